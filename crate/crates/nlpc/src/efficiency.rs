//! Four-factor relative conversion-efficiency model and the zinc-blende
//! (point group 4-bar 3m) second-order tensor contraction.
//!
//! The nonlinear tensor of a 43m crystal has a single independent
//! coefficient: `d_ijk` is nonzero exactly when `i, j, k` are pairwise
//! distinct. `deff_factor` is the `d_14`-normalized contraction of that
//! tensor with the three interacting polarization unit vectors, expressed
//! in the crystal frame.

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum EfficiencyError {
    #[error("vector norm {0} is not unit within 1e-9")]
    NotUnit(f64),

    #[error("zero wavevector has no polarization frame")]
    ZeroVector,

    #[error("crystal frame matrix is not orthonormal")]
    NotARotation,

    #[error("invalid efficiency factors: {0}")]
    InvalidFactors(String),
}

/// Orientation of the cubic crystal axes relative to the lab frame
/// (`z` = stack normal). The matrix maps lab vectors into the crystal
/// frame. The default identity corresponds to the conventional (100)
/// surface orientation with the stack normal along a cubic axis; for the
/// pairwise-distinct-index tensor any relabeling of cubic axes is
/// equivalent.
#[derive(Debug, Clone, Copy)]
pub struct CrystalFrame {
    matrix: [[f64; 3]; 3],
}

impl Default for CrystalFrame {
    fn default() -> Self {
        CrystalFrame { matrix: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] }
    }
}

impl CrystalFrame {
    /// Build from a lab-to-crystal matrix, which must be orthonormal to
    /// 1e-9.
    pub fn new(matrix: [[f64; 3]; 3]) -> Result<Self, EfficiencyError> {
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| matrix[i][k] * matrix[j][k]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                if (dot - expect).abs() > 1e-9 {
                    return Err(EfficiencyError::NotARotation);
                }
            }
        }
        Ok(CrystalFrame { matrix })
    }

    pub fn to_crystal(&self, v: [f64; 3]) -> [f64; 3] {
        let m = &self.matrix;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// `d_14`-normalized effective-nonlinearity factor
/// `|sum_{i!=j!=k} e_p,i e_1,j e_2,k|` for pump and photon polarization
/// unit vectors given in the lab frame.
pub fn deff_factor(
    e_pump: [f64; 3],
    e_1: [f64; 3],
    e_2: [f64; 3],
    frame: &CrystalFrame,
) -> Result<f64, EfficiencyError> {
    for v in [e_pump, e_1, e_2] {
        let n = norm3(v);
        if (n - 1.0).abs() > 1e-9 {
            return Err(EfficiencyError::NotUnit(n));
        }
    }
    let p = frame.to_crystal(e_pump);
    let a = frame.to_crystal(e_1);
    let b = frame.to_crystal(e_2);
    let value = p[0] * (a[1] * b[2] + a[2] * b[1])
        + p[1] * (a[0] * b[2] + a[2] * b[0])
        + p[2] * (a[0] * b[1] + a[1] * b[0]);
    Ok(value.abs())
}

/// Polarization unit vector of a mode with (dominant-harmonic) wavevector
/// `k`: TE lies in the layer plane perpendicular to the transverse
/// direction, TM lies in the plane spanned by `k` and the stack normal,
/// perpendicular to `k`. At normal incidence the transverse direction
/// defaults to x, so TE maps to y and TM to x.
pub fn polarization_vector(
    k: [f64; 3],
    pol: crate::bandstructure::Polarization,
) -> Result<[f64; 3], EfficiencyError> {
    let k_norm = norm3(k);
    if k_norm == 0.0 {
        return Err(EfficiencyError::ZeroVector);
    }
    let kt = (k[0] * k[0] + k[1] * k[1]).sqrt();
    let t = if kt < 1e-12 * k_norm { [1.0, 0.0] } else { [k[0] / kt, k[1] / kt] };
    // TE: z cross t
    let te = [-t[1], t[0], 0.0];
    match pol {
        crate::bandstructure::Polarization::Te => Ok(te),
        crate::bandstructure::Polarization::Tm => {
            // te cross k-hat, normalized
            let kh = [k[0] / k_norm, k[1] / k_norm, k[2] / k_norm];
            let v = [
                te[1] * kh[2] - te[2] * kh[1],
                te[2] * kh[0] - te[0] * kh[2],
                te[0] * kh[1] - te[1] * kh[0],
            ];
            let n = norm3(v);
            Ok([v[0] / n, v[1] / n, v[2] / n])
        }
    }
}

/// The four amplitude factors of the relative-efficiency model:
/// nonlinearity ratio, nonlinear-material fill fraction, dominant-harmonic
/// fraction and tensor factor.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EfficiencyFactors {
    pub chi2_ratio: f64,
    pub fill: f64,
    pub fourier: f64,
    pub tensor: f64,
}

impl EfficiencyFactors {
    pub fn validate(&self) -> Result<(), EfficiencyError> {
        let all = [
            ("chi2_ratio", self.chi2_ratio),
            ("fill", self.fill),
            ("fourier", self.fourier),
            ("tensor", self.tensor),
        ];
        for (name, v) in all {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(EfficiencyError::InvalidFactors(format!("{name} = {v}")));
            }
        }
        if self.fill > 1.0 {
            return Err(EfficiencyError::InvalidFactors(format!("fill = {}", self.fill)));
        }
        if self.fourier > 1.0 + 1e-12 {
            return Err(EfficiencyError::InvalidFactors(format!("fourier = {}", self.fourier)));
        }
        Ok(())
    }
}

/// Amplitude product of the four factors and its square, the efficiency
/// relative to the reference crystal.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EfficiencyReport {
    pub factors: EfficiencyFactors,
    pub amplitude: f64,
    pub efficiency: f64,
}

pub fn relative_efficiency(factors: &EfficiencyFactors) -> Result<EfficiencyReport, EfficiencyError> {
    factors.validate()?;
    let amplitude = factors.chi2_ratio * factors.fill * factors.fourier * factors.tensor;
    Ok(EfficiencyReport { factors: *factors, amplitude, efficiency: amplitude * amplitude })
}

/// The 24 elements of the 4-bar 3m point group as signed permutation
/// matrices: all axis permutations combined with sign patterns of product
/// +1 (these are exactly the orthogonal maps preserving `x*y*z`).
pub fn point_group_elements() -> Vec<[[f64; 3]; 3]> {
    let perms: [[usize; 3]; 6] =
        [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let sign_sets: [[f64; 3]; 4] = [
        [1.0, 1.0, 1.0],
        [1.0, -1.0, -1.0],
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
    ];
    let mut out = Vec::with_capacity(24);
    for perm in perms {
        for signs in sign_sets {
            let mut m = [[0.0; 3]; 3];
            for i in 0..3 {
                m[i][perm[i]] = signs[i];
            }
            out.push(m);
        }
    }
    out
}
