//! Frequency-dependent refractive-index models for the stack layers.
//!
//! Three model kinds cover the use cases: a constant index, a
//! single-effective-oscillator fit (with an optional infrared correction
//! term and a constant anchoring offset), and tabulated `(wavelength, n)`
//! data with monotone-cubic or linear interpolation. Every model carries an
//! explicit validity range and refuses to extrapolate outside it.
//!
//! All models describe lossless dielectrics: `n` is real and `>= 1`.

use thiserror::Error;

/// `h*c` in eV·m, for converting vacuum wavelength to photon energy.
const HC_EV_M: f64 = 1.239_841_984_332_002_6e-6;

#[derive(Debug, Error)]
pub enum MaterialError {
    #[error("wavelength {lambda_m:.6e} m outside validity range [{min_m:.6e}, {max_m:.6e}] m")]
    OutOfRange { lambda_m: f64, min_m: f64, max_m: f64 },

    #[error("unknown material preset `{0}`")]
    UnknownMaterial(String),

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),
}

/// Interpolation scheme for [`MaterialModel::Table`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    Linear,
    /// Fritsch-Carlson monotone cubic (PCHIP). Falls back to linear for
    /// two-point tables.
    MonotoneCubic,
}

/// Tabulated refractive index with precomputed interpolation slopes.
#[derive(Debug, Clone)]
pub struct TableModel {
    lambda_m: Vec<f64>,
    index: Vec<f64>,
    slopes: Vec<f64>,
    interp: Interpolation,
}

/// Single-effective-oscillator dispersion model,
/// `n^2 = 1 + E0*Ed/(E0^2 - E^2) - (El/E)^2`, plus a constant offset used
/// to anchor the curve to a measured index at one wavelength.
#[derive(Debug, Clone)]
pub struct OscillatorModel {
    /// Oscillator energy E0, eV.
    pub e0_ev: f64,
    /// Dispersion energy Ed, eV.
    pub ed_ev: f64,
    /// Infrared correction energy El, eV (0 disables the term).
    pub lattice_ev: f64,
    /// Constant index offset added after the square root.
    pub offset: f64,
    /// Validity range in metres.
    pub range_m: (f64, f64),
}

/// A refractive-index model valid over an explicit vacuum-wavelength range.
#[derive(Debug, Clone)]
pub enum MaterialModel {
    Constant { n: f64, range_m: (f64, f64) },
    Oscillator(OscillatorModel),
    Table(TableModel),
}

impl MaterialModel {
    /// Constant index over a validity range.
    pub fn constant(n: f64, range_m: (f64, f64)) -> Result<Self, MaterialError> {
        if !(n >= 1.0) {
            return Err(MaterialError::InvalidModel(format!("constant index {n} < 1")));
        }
        if !(range_m.0 > 0.0 && range_m.1 > range_m.0) {
            return Err(MaterialError::InvalidModel("empty validity range".into()));
        }
        Ok(MaterialModel::Constant { n, range_m })
    }

    /// Oscillator model; validates that the index stays real and `>= 1`
    /// over the requested range.
    pub fn oscillator(model: OscillatorModel) -> Result<Self, MaterialError> {
        if !(model.range_m.0 > 0.0 && model.range_m.1 > model.range_m.0) {
            return Err(MaterialError::InvalidModel("empty validity range".into()));
        }
        let m = MaterialModel::Oscillator(model);
        m.check_physical()?;
        Ok(m)
    }

    /// Tabulated model. Wavelengths must be strictly increasing, with at
    /// least two entries, and all indices `>= 1`.
    pub fn table(
        lambda_m: Vec<f64>,
        index: Vec<f64>,
        interp: Interpolation,
    ) -> Result<Self, MaterialError> {
        if lambda_m.len() != index.len() {
            return Err(MaterialError::InvalidTable("length mismatch".into()));
        }
        if lambda_m.len() < 2 {
            return Err(MaterialError::InvalidTable("need at least 2 entries".into()));
        }
        if lambda_m.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(MaterialError::InvalidTable(
                "wavelengths must be strictly increasing".into(),
            ));
        }
        if lambda_m[0] <= 0.0 {
            return Err(MaterialError::InvalidTable("non-positive wavelength".into()));
        }
        if index.iter().any(|&n| !(n >= 1.0) || !n.is_finite()) {
            return Err(MaterialError::InvalidTable("index below 1 or not finite".into()));
        }
        let slopes = match interp {
            Interpolation::Linear => Vec::new(),
            Interpolation::MonotoneCubic => pchip_slopes(&lambda_m, &index),
        };
        Ok(MaterialModel::Table(TableModel { lambda_m, index, slopes, interp }))
    }

    /// Validity range in metres.
    pub fn validity_m(&self) -> (f64, f64) {
        match self {
            MaterialModel::Constant { range_m, .. } => *range_m,
            MaterialModel::Oscillator(o) => o.range_m,
            MaterialModel::Table(t) => (t.lambda_m[0], *t.lambda_m.last().unwrap()),
        }
    }

    /// Refractive index at vacuum wavelength `lambda_m` (metres).
    pub fn refractive_index(&self, lambda_m: f64) -> Result<f64, MaterialError> {
        let (min_m, max_m) = self.validity_m();
        if !(lambda_m >= min_m && lambda_m <= max_m) {
            return Err(MaterialError::OutOfRange { lambda_m, min_m, max_m });
        }
        Ok(match self {
            MaterialModel::Constant { n, .. } => *n,
            MaterialModel::Oscillator(o) => o.eval(lambda_m),
            MaterialModel::Table(t) => t.eval(lambda_m),
        })
    }

    fn check_physical(&self) -> Result<(), MaterialError> {
        let (lo, hi) = self.validity_m();
        for j in 0..=200 {
            let lam = lo + (hi - lo) * j as f64 / 200.0;
            let n = match self {
                MaterialModel::Constant { n, .. } => *n,
                MaterialModel::Oscillator(o) => o.eval(lam),
                MaterialModel::Table(t) => t.eval(lam),
            };
            if !n.is_finite() || n < 1.0 {
                return Err(MaterialError::InvalidModel(format!(
                    "index {n} at {lam:.4e} m violates n >= 1"
                )));
            }
        }
        Ok(())
    }
}

impl OscillatorModel {
    fn eval(&self, lambda_m: f64) -> f64 {
        let e = HC_EV_M / lambda_m;
        let mut n2 = 1.0 + self.e0_ev * self.ed_ev / (self.e0_ev * self.e0_ev - e * e);
        if self.lattice_ev != 0.0 {
            let r = self.lattice_ev / e;
            n2 -= r * r;
        }
        n2.sqrt() + self.offset
    }
}

impl TableModel {
    fn eval(&self, x: f64) -> f64 {
        let xs = &self.lambda_m;
        let ys = &self.index;
        // bracketing interval; x is inside the table by the range check
        let i = match xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => return ys[i],
            Err(i) => i.clamp(1, xs.len() - 1) - 1,
        };
        let h = xs[i + 1] - xs[i];
        let t = (x - xs[i]) / h;
        match self.interp {
            Interpolation::Linear => ys[i] + t * (ys[i + 1] - ys[i]),
            Interpolation::MonotoneCubic => {
                let (m0, m1) = (self.slopes[i], self.slopes[i + 1]);
                let t2 = t * t;
                let t3 = t2 * t;
                let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
                let h10 = t3 - 2.0 * t2 + t;
                let h01 = -2.0 * t3 + 3.0 * t2;
                let h11 = t3 - t2;
                h00 * ys[i] + h10 * h * m0 + h01 * ys[i + 1] + h11 * h * m1
            }
        }
    }
}

/// Fritsch-Carlson slopes for shape-preserving cubic interpolation.
fn pchip_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let d: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
    if n == 2 {
        return vec![d[0], d[0]];
    }
    let mut m = vec![0.0; n];
    for i in 1..n - 1 {
        if d[i - 1] * d[i] <= 0.0 {
            m[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    m[0] = endpoint_slope(h[0], h[1], d[0], d[1]);
    m[n - 1] = endpoint_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    m
}

fn endpoint_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

/// Single-effective-oscillator parameters for Al(x)Ga(1-x)As at x = 0.4:
/// `E0 = 3.65 + 0.871 x + 0.179 x^2`, `Ed = 36.1 - 2.45 x` (eV).
const ALGAAS04_E0_EV: f64 = 3.65 + 0.871 * 0.4 + 0.179 * 0.4 * 0.4;
const ALGAAS04_ED_EV: f64 = 36.1 - 2.45 * 0.4;
/// Anchor: n(750 nm) = 3.40.
const ALGAAS04_ANCHOR_LAMBDA_M: f64 = 750e-9;
const ALGAAS04_ANCHOR_N: f64 = 3.40;

/// Look up a built-in material preset by name (case-insensitive).
///
/// Shipped presets: `air`, `algaas-x0.4`, `bbo-ordinary`, `bbo-extraordinary`.
pub fn builtin_material(name: &str) -> Result<MaterialModel, MaterialError> {
    match name.to_ascii_lowercase().as_str() {
        "air" => MaterialModel::constant(1.0, (100e-9, 100e-6)),
        "algaas-x0.4" => {
            let raw = OscillatorModel {
                e0_ev: ALGAAS04_E0_EV,
                ed_ev: ALGAAS04_ED_EV,
                lattice_ev: 0.0,
                offset: 0.0,
                range_m: (700e-9, 2000e-9),
            };
            let offset = ALGAAS04_ANCHOR_N - raw.eval(ALGAAS04_ANCHOR_LAMBDA_M);
            MaterialModel::oscillator(OscillatorModel { offset, ..raw })
        }
        "bbo-ordinary" => bbo_table(2.7405, 0.0184, 0.0179, 0.0155),
        "bbo-extraordinary" => bbo_table(2.3730, 0.0128, 0.0156, 0.0044),
        other => Err(MaterialError::UnknownMaterial(other.to_string())),
    }
}

/// Beta-barium-borate Sellmeier fit `n^2 = a + b/(l^2 - c) - d*l^2`
/// (`l` in micrometres), tabulated on a 10 nm grid over 400-1800 nm and
/// interpolated with the monotone cubic.
fn bbo_table(a: f64, b: f64, c: f64, d: f64) -> Result<MaterialModel, MaterialError> {
    let mut lambda = Vec::new();
    let mut index = Vec::new();
    let mut l_nm = 400.0;
    while l_nm <= 1800.0 + 1e-9 {
        let l_um = l_nm * 1e-3;
        let n2 = a + b / (l_um * l_um - c) - d * l_um * l_um;
        lambda.push(l_nm * 1e-9);
        index.push(n2.sqrt());
        l_nm += 10.0;
    }
    MaterialModel::table(lambda, index, Interpolation::MonotoneCubic)
}
