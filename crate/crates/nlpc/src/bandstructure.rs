//! Bloch dispersion of a two-layer periodic stack via the unit-cell
//! transfer matrix.
//!
//! The 2x2 matrix acts on `(u, v)` where `u` is the principal field
//! component (E for TE, H for TM) and `v = u'/gamma` its scaled derivative
//! (`gamma = 1` for TE, `n^2` for TM), which are the quantities continuous
//! across interfaces. For lossless layers every matrix entry is real even
//! when a layer is evanescent, so the half trace is computed without
//! complex arithmetic. A propagating Bloch mode exists where the half
//! trace lies in `[-1, 1]`.

use rayon::prelude::*;
use serde::Serialize;

use crate::materials::{MaterialError, MaterialModel};
use crate::numeric::{bisect_bool, cos_kd, golden_min, sin_over_k};
use crate::C_LIGHT;
use num_complex::Complex64;

#[derive(Debug, thiserror::Error)]
pub enum BandError {
    #[error(transparent)]
    Material(#[from] MaterialError),

    #[error("invalid stack: {0}")]
    InvalidStack(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("materials have equal indices; birefringence objective is flat")]
    NoBirefringence,
}

/// Field polarization relative to the layer planes. TE has the electric
/// field in the plane of the layers (the ordinary wave of the effective
/// uniaxial medium); TM is the extraordinary counterpart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    Te,
    Tm,
}

impl Polarization {
    pub fn other(self) -> Self {
        match self {
            Polarization::Te => Polarization::Tm,
            Polarization::Tm => Polarization::Te,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Polarization::Te => "te",
            Polarization::Tm => "tm",
        }
    }
}

/// Periodic two-layer unit cell: layer 1 on `[0, a)`, layer 2 on `[a, a+b)`.
#[derive(Debug, Clone)]
pub struct LayeredStack {
    pub material_1: MaterialModel,
    pub material_2: MaterialModel,
    thickness_1: f64,
    thickness_2: f64,
}

impl LayeredStack {
    pub fn new(
        material_1: MaterialModel,
        thickness_1: f64,
        material_2: MaterialModel,
        thickness_2: f64,
    ) -> Result<Self, BandError> {
        if !(thickness_1 > 0.0 && thickness_1.is_finite()) {
            return Err(BandError::InvalidStack("thickness_1 must be positive".into()));
        }
        if !(thickness_2 > 0.0 && thickness_2.is_finite()) {
            return Err(BandError::InvalidStack("thickness_2 must be positive".into()));
        }
        Ok(LayeredStack { material_1, material_2, thickness_1, thickness_2 })
    }

    /// Build from period and fill fraction of layer 1.
    pub fn from_period_fill(
        material_1: MaterialModel,
        material_2: MaterialModel,
        period: f64,
        fill: f64,
    ) -> Result<Self, BandError> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(BandError::InvalidStack("period must be positive".into()));
        }
        if !(fill > 0.0 && fill < 1.0) {
            return Err(BandError::InvalidStack("fill must lie in (0, 1)".into()));
        }
        LayeredStack::new(material_1, fill * period, material_2, (1.0 - fill) * period)
    }

    /// AlGaAs (x = 0.4) / air stack, the workhorse configuration.
    pub fn algaas_air(period: f64, fill: f64) -> Result<Self, BandError> {
        LayeredStack::from_period_fill(
            crate::materials::builtin_material("algaas-x0.4")?,
            crate::materials::builtin_material("air")?,
            period,
            fill,
        )
    }

    pub fn thickness_1(&self) -> f64 {
        self.thickness_1
    }

    pub fn thickness_2(&self) -> f64 {
        self.thickness_2
    }

    pub fn period(&self) -> f64 {
        self.thickness_1 + self.thickness_2
    }

    /// Fill fraction of layer 1, `a / (a + b)`.
    pub fn fill(&self) -> f64 {
        self.thickness_1 / self.period()
    }

    /// Layer indices at angular frequency `omega` (rad/s).
    pub fn indices_at(&self, omega: f64) -> Result<(f64, f64), MaterialError> {
        let lambda = 2.0 * std::f64::consts::PI * C_LIGHT / omega;
        Ok((
            self.material_1.refractive_index(lambda)?,
            self.material_2.refractive_index(lambda)?,
        ))
    }

    /// Angular frequency from the normalized value `omega * period / (pi c)`.
    pub fn omega_from_norm(&self, omega_norm: f64) -> f64 {
        omega_norm * std::f64::consts::PI * C_LIGHT / self.period()
    }

    pub fn omega_norm(&self, omega: f64) -> f64 {
        omega * self.period() / (std::f64::consts::PI * C_LIGHT)
    }

    /// Wavevector from the normalized value `k * period / pi`.
    pub fn k_from_norm(&self, k_norm: f64) -> f64 {
        k_norm * std::f64::consts::PI / self.period()
    }

    pub fn k_norm(&self, k: f64) -> f64 {
        k * self.period() / std::f64::consts::PI
    }
}

/// Plane-wave z-component in a uniform layer of index `n`:
/// `sqrt((n omega / c)^2 - k_par^2)` on the principal branch, so the result
/// is positive real (propagating) or positive imaginary (evanescent).
pub fn layer_kz(n: f64, omega: f64, k_par: f64) -> Complex64 {
    let s2 = (n * omega / C_LIGHT).powi(2) - k_par * k_par;
    if s2 >= 0.0 {
        Complex64::new(s2.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-s2).sqrt())
    }
}

/// Resolved per-layer parameters of the unit cell at one `(omega, k_par,
/// pol)` point. `s2_i` is the signed square of the layer z-wavevector.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CellParams {
    pub a: f64,
    pub b: f64,
    pub s2_1: f64,
    pub s2_2: f64,
    pub g1: f64,
    pub g2: f64,
}

impl CellParams {
    pub fn new(
        stack: &LayeredStack,
        omega: f64,
        k_par: f64,
        pol: Polarization,
    ) -> Result<Self, BandError> {
        if !(omega > 0.0) {
            return Err(BandError::InvalidGrid("omega must be positive".into()));
        }
        let (n1, n2) = stack.indices_at(omega)?;
        let kp2 = k_par * k_par;
        let (g1, g2) = match pol {
            Polarization::Te => (1.0, 1.0),
            Polarization::Tm => (n1 * n1, n2 * n2),
        };
        Ok(CellParams {
            a: stack.thickness_1(),
            b: stack.thickness_2(),
            s2_1: (n1 * omega / C_LIGHT).powi(2) - kp2,
            s2_2: (n2 * omega / C_LIGHT).powi(2) - kp2,
            g1,
            g2,
        })
    }

    pub fn k1(&self) -> Complex64 {
        complex_sqrt_signed(self.s2_1)
    }

    pub fn k2(&self) -> Complex64 {
        complex_sqrt_signed(self.s2_2)
    }

    /// Unit-cell transfer matrix `M = L2 * L1` acting on `(u, v)`.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        let l1 = layer_matrix(self.s2_1, self.a, self.g1);
        let l2 = layer_matrix(self.s2_2, self.b, self.g2);
        mat_mul(&l2, &l1)
    }
}

fn complex_sqrt_signed(s2: f64) -> Complex64 {
    if s2 >= 0.0 {
        Complex64::new(s2.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-s2).sqrt())
    }
}

/// Propagation matrix across a uniform layer in the `(u, v)` basis.
fn layer_matrix(s2: f64, d: f64, gamma: f64) -> [[f64; 2]; 2] {
    let c = cos_kd(s2, d);
    let s = sin_over_k(s2, d);
    [[c, gamma * s], [-s2 * s / gamma, c]]
}

fn mat_mul(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

/// Half the trace of the unit-cell transfer matrix. This is the
/// authoritative dispersion quantity: a Bloch mode propagates iff the
/// value lies in `[-1, 1]`, where it equals `cos(K_z * period)`.
///
/// Layers with `|k_z| * period` below 1e-12 are handled by the series
/// limit of `sin(kd)/k`, so grazing layer resonances need no special
/// treatment by the caller.
pub fn half_trace(
    stack: &LayeredStack,
    omega: f64,
    k_par: f64,
    pol: Polarization,
) -> Result<f64, BandError> {
    let p = CellParams::new(stack, omega, k_par, pol)?;
    let m = p.matrix();
    Ok(0.5 * (m[0][0] + m[1][1]))
}

/// Closed-form equivalent of [`half_trace`], kept as an independent
/// cross-check route:
/// `cos(k1 a + k2 b) - (k1' - k2')^2 / (2 k1' k2') sin(k1 a) sin(k2 b)`
/// with `k_i' = k_i` for TE and `k_i / n_i^2` for TM. The analogous
/// expression with a plus sign in the squared term does not reduce to the
/// matrix trace.
pub fn half_trace_closed_form(
    stack: &LayeredStack,
    omega: f64,
    k_par: f64,
    pol: Polarization,
) -> Result<f64, BandError> {
    let p = CellParams::new(stack, omega, k_par, pol)?;
    let (k1, k2) = (p.k1(), p.k2());
    let (k1e, k2e) = (k1 / p.g1, k2 / p.g2);
    let diff = k1e - k2e;
    let v = (k1 * p.a + k2 * p.b).cos()
        - diff * diff / (2.0 * k1e * k2e) * (k1 * p.a).sin() * (k2 * p.b).sin();
    Ok(v.re)
}

/// Bloch wavevector solution at one `(omega, k_par, polarization)` point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BlochKz {
    pub half_trace: f64,
    pub propagating: bool,
    /// Reduced-zone `K_z` in `[0, pi/period]`, rad/m. For evanescent
    /// points this is the gap-edge value (0 or `pi/period`).
    pub kz_reduced: f64,
    /// Imaginary part of `K_z` for evanescent points, rad/m; 0 otherwise.
    pub attenuation: f64,
    pub omega: f64,
    pub k_par: f64,
    pub pol: Polarization,
}

/// Solve the dispersion relation `cos(K_z L) = half_trace` at one point.
pub fn bloch_kz(
    stack: &LayeredStack,
    omega: f64,
    k_par: f64,
    pol: Polarization,
) -> Result<BlochKz, BandError> {
    let ht = half_trace(stack, omega, k_par, pol)?;
    let period = stack.period();
    let (propagating, kz_reduced, attenuation) = if ht.abs() <= 1.0 {
        (true, ht.acos() / period, 0.0)
    } else {
        let edge = if ht > 1.0 { 0.0 } else { std::f64::consts::PI / period };
        (false, edge, ht.abs().acosh() / period)
    };
    Ok(BlochKz { half_trace: ht, propagating, kz_reduced, attenuation, omega, k_par, pol })
}

/// Normal-incidence stopbands within `omega_range`, as maximal disjoint
/// `[omega_lo, omega_hi]` intervals where no propagating mode exists,
/// sorted ascending. Band edges are refined by bisection to f64
/// resolution. `n_samples` must resolve the trace oscillation: at least
/// 100 samples per free spectral range `pi c / (n1 a + n2 b)`.
pub fn stopbands_normal(
    stack: &LayeredStack,
    pol: Polarization,
    omega_range: (f64, f64),
    n_samples: usize,
) -> Result<Vec<(f64, f64)>, BandError> {
    let (lo, hi) = omega_range;
    if !(lo > 0.0 && hi > lo) {
        return Err(BandError::InvalidGrid("omega range must be positive and ascending".into()));
    }
    let (n1, n2) = stack.indices_at(0.5 * (lo + hi))?;
    let optical = n1 * stack.thickness_1() + n2 * stack.thickness_2();
    let fsr = std::f64::consts::PI * C_LIGHT / optical;
    let needed = (100.0 * (hi - lo) / fsr).ceil() as usize;
    if n_samples < needed.max(2) {
        return Err(BandError::InvalidGrid(format!(
            "{n_samples} samples under-resolve the range; need at least {}",
            needed.max(2)
        )));
    }

    let evanescent = |omega: f64| -> Result<bool, BandError> {
        Ok(half_trace(stack, omega, 0.0, pol)?.abs() > 1.0)
    };

    let mut bands: Vec<(f64, f64)> = Vec::new();
    let mut open: Option<f64> = None;
    let mut prev_omega = lo;
    let mut prev_evan = evanescent(lo)?;
    if prev_evan {
        open = Some(lo);
    }
    for j in 1..n_samples {
        let omega = lo + (hi - lo) * j as f64 / (n_samples - 1) as f64;
        let evan = evanescent(omega)?;
        if evan != prev_evan {
            // refine the edge; the predicate is infallible inside the bracket
            let edge = bisect_bool(prev_omega, omega, |w| {
                half_trace(stack, w, 0.0, pol).map(|h| h.abs() > 1.0).unwrap_or(false)
            });
            if evan {
                open = Some(edge);
            } else if let Some(start) = open.take() {
                bands.push((start, edge));
            }
        }
        prev_omega = omega;
        prev_evan = evan;
    }
    if let Some(start) = open {
        bands.push((start, hi));
    }
    Ok(bands)
}

/// Long-wavelength effective indices of the layered medium:
/// `n_o^2 = alpha n1^2 + (1-alpha) n2^2` (TE/ordinary) and
/// `1/n_e^2 = alpha/n1^2 + (1-alpha)/n2^2` (TM/extraordinary).
/// Always `n_o >= n_e`.
pub fn effective_indices(n1: f64, n2: f64, alpha: f64) -> (f64, f64) {
    let no = (alpha * n1 * n1 + (1.0 - alpha) * n2 * n2).sqrt();
    let ne = 1.0 / (alpha / (n1 * n1) + (1.0 - alpha) / (n2 * n2)).sqrt();
    (no, ne)
}

/// Fill fraction maximizing the long-wavelength birefringence
/// `n_o(alpha) - n_e(alpha)`, located by golden-section search to better
/// than 1e-6 in `alpha`. The objective is unimodal on `(0, 1)`.
pub fn optimal_fill(n1: f64, n2: f64) -> Result<f64, BandError> {
    if n1 == n2 {
        return Err(BandError::NoBirefringence);
    }
    let objective = |alpha: f64| {
        let (no, ne) = effective_indices(n1, n2, alpha);
        -(no - ne)
    };
    let (alpha, _) = golden_min(1e-9, 1.0 - 1e-9, 1e-7, objective);
    Ok(alpha)
}

/// One cell of a band diagram grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandCell {
    pub propagating: bool,
    /// Evanescent decay rate, rad/m (0 for propagating cells).
    pub attenuation: f64,
    /// `omega > c * k_par`: the mode is reachable from vacuum.
    pub above_light_line: bool,
}

/// Band diagram sampled on an `omega x k_par` grid, row-major with
/// `omega` as the slow index.
#[derive(Debug, Clone)]
pub struct BandDiagram {
    pub omega: Vec<f64>,
    pub k_par: Vec<f64>,
    pub pol: Polarization,
    pub cells: Vec<BandCell>,
}

impl BandDiagram {
    pub fn cell(&self, i_omega: usize, i_kpar: usize) -> &BandCell {
        &self.cells[i_omega * self.k_par.len() + i_kpar]
    }
}

/// Fill a band diagram grid. Rows are evaluated in parallel; the output
/// ordering is deterministic regardless of thread count.
pub fn band_diagram(
    stack: &LayeredStack,
    omega_grid: &[f64],
    k_par_grid: &[f64],
    pol: Polarization,
) -> Result<BandDiagram, BandError> {
    if omega_grid.is_empty() || k_par_grid.is_empty() {
        return Err(BandError::InvalidGrid("empty grid".into()));
    }
    if omega_grid.windows(2).any(|w| w[1] <= w[0]) || k_par_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(BandError::InvalidGrid("grids must be strictly ascending".into()));
    }
    let rows: Result<Vec<Vec<BandCell>>, BandError> = omega_grid
        .par_iter()
        .map(|&omega| {
            k_par_grid
                .iter()
                .map(|&k_par| {
                    let bk = bloch_kz(stack, omega, k_par, pol)?;
                    Ok(BandCell {
                        propagating: bk.propagating,
                        attenuation: bk.attenuation,
                        above_light_line: omega > C_LIGHT * k_par,
                    })
                })
                .collect()
        })
        .collect();
    Ok(BandDiagram {
        omega: omega_grid.to_vec(),
        k_par: k_par_grid.to_vec(),
        pol,
        cells: rows?.into_iter().flatten().collect(),
    })
}


#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn layer_kz_principal_branch() {
        // 3-4-5 triangle: n*omega/c = 5, k_par = 3 -> 4
        let omega = 5.0 * C_LIGHT;
        let kz = layer_kz(1.0, omega, 3.0);
        assert_relative_eq!(kz.re, 4.0, epsilon = 1e-12);
        assert_eq!(kz.im, 0.0);
        // evanescent branch: n*omega/c = 3, k_par = 5 -> 4i
        let kz = layer_kz(1.0, 3.0 * C_LIGHT, 5.0);
        assert_eq!(kz.re, 0.0);
        assert_relative_eq!(kz.im, 4.0, epsilon = 1e-12);
        // grazing: n*omega/c = k_par -> 0
        let kz = layer_kz(2.0, C_LIGHT, 2.0);
        assert_eq!(kz, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn homogeneous_half_trace_is_cos() {
        let st = stack_const(1.5, 0.3, 1.5, 0.7);
        let omega = 0.8 * C_LIGHT; // k_z = 1.2 rad/m
        for k_par in [0.0, 0.5, 0.9] {
            let kz = layer_kz(1.5, omega, k_par);
            let expect = (kz * st.period()).cos().re;
            let ht = half_trace(&st, omega, k_par, Polarization::Te).unwrap();
            assert_relative_eq!(ht, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn quarter_wave_half_trace() {
        // k1 a = k2 b = pi/2 at omega = c (k1 = 2, k2 = 1 rad/m)
        let st = stack_const(2.0, std::f64::consts::FRAC_PI_4, 1.0, std::f64::consts::FRAC_PI_2);
        let ht = half_trace(&st, C_LIGHT, 0.0, Polarization::Te).unwrap();
        assert_relative_eq!(ht, -1.25, epsilon = 1e-12);

        let bk = bloch_kz(&st, C_LIGHT, 0.0, Polarization::Te).unwrap();
        assert!(!bk.propagating);
        assert_relative_eq!(bk.kz_reduced, std::f64::consts::PI / st.period(), epsilon = 1e-12);
        assert_relative_eq!(bk.attenuation, 1.25f64.acosh() / st.period(), epsilon = 1e-12);
    }

    #[test]
    fn homogeneous_bloch_kz_folds() {
        // k_z * period = 0.3 pi, propagating
        let period = 1.0;
        let st = stack_const(1.5, 0.4, 1.5, 0.6);
        let omega = 0.3 * std::f64::consts::PI * C_LIGHT / 1.5 / period;
        let bk = bloch_kz(&st, omega, 0.0, Polarization::Te).unwrap();
        assert!(bk.propagating);
        assert_relative_eq!(bk.kz_reduced, 0.3 * std::f64::consts::PI / period, max_relative = 1e-12);
        assert_eq!(bk.attenuation, 0.0);
    }

    #[test]
    fn te_tm_degenerate_at_normal_incidence() {
        // dispersive stack within its material validity window
        let st = ws_demo_stack();
        for j in 0..=100 {
            let wn = 0.19 + 0.34 * j as f64 / 100.0;
            let omega = st.omega_from_norm(wn);
            let te = half_trace(&st, omega, 0.0, Polarization::Te).unwrap();
            let tm = half_trace(&st, omega, 0.0, Polarization::Tm).unwrap();
            assert!((te - tm).abs() <= 1e-12 * te.abs().max(1.0), "split at omega_norm {wn}");
        }
        // constant-index stack over a wide sweep
        let st = stack_const(3.4, 0.6, 1.0, 0.4);
        for j in 1..=100 {
            let omega = j as f64 * 0.05 * C_LIGHT;
            let te = half_trace(&st, omega, 0.0, Polarization::Te).unwrap();
            let tm = half_trace(&st, omega, 0.0, Polarization::Tm).unwrap();
            assert!((te - tm).abs() <= 1e-12 * te.abs().max(1.0));
        }
    }

    #[test]
    fn closed_form_matches_matrix_trace() {
        let st = ws_demo_stack();
        let omega = st.omega_from_norm(0.5);
        for pol in [Polarization::Te, Polarization::Tm] {
            for kn in [0.0, 0.17, 0.42, 0.73, 1.1] {
                let k_par = st.k_from_norm(kn);
                let a = half_trace(&st, omega, k_par, pol).unwrap();
                let b = half_trace_closed_form(&st, omega, k_par, pol).unwrap();
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
        }
        // the sampled pump point is propagating
        let ht = half_trace(&st, omega, 0.0, Polarization::Te).unwrap();
        assert!(ht.abs() <= 1.0);
    }

    #[test]
    fn plus_sign_variant_disagrees_with_trace() {
        // the same closed form with (k1' + k2')^2 is not the half trace
        let st = stack_const(2.0, std::f64::consts::FRAC_PI_4, 1.0, std::f64::consts::FRAC_PI_2);
        let p = CellParams::new(&st, C_LIGHT, 0.0, Polarization::Te).unwrap();
        let (k1, k2) = (p.k1(), p.k2());
        let sum = k1 + k2;
        let plus = ((k1 * p.a + k2 * p.b).cos()
            - sum * sum / (2.0 * k1 * k2) * (k1 * p.a).sin() * (k2 * p.b).sin())
        .re;
        let trace = half_trace(&st, C_LIGHT, 0.0, Polarization::Te).unwrap();
        assert!((plus - trace).abs() > 0.5, "plus form {plus} vs trace {trace}");
    }

    #[test]
    fn effective_indices_limits() {
        let (no, ne) = effective_indices(2.5, 2.5, 0.3);
        assert_relative_eq!(no, 2.5, epsilon = 1e-12);
        assert_relative_eq!(ne, 2.5, epsilon = 1e-12);
        let (no, ne) = effective_indices(3.4, 1.0, 1e-12);
        assert_relative_eq!(no, 1.0, epsilon = 1e-9);
        assert_relative_eq!(ne, 1.0, epsilon = 1e-9);
        // closed-form spot values for the 65.6% AlGaAs fill
        let (no, ne) = effective_indices(3.4, 1.0, 0.656);
        assert_relative_eq!(no, 2.8156, epsilon = 1e-4);
        assert_relative_eq!(ne, 1.5797, epsilon = 1e-4);
        assert!(no >= ne);
    }

    #[test]
    fn optimal_fill_matches_grid_oracle() {
        // oracle: dense grid scan of the birefringence objective
        let scan = |n1: f64, n2: f64| {
            let mut best = (0.0, f64::NEG_INFINITY);
            for j in 1..10_000 {
                let alpha = j as f64 / 10_000.0;
                let (no, ne) = effective_indices(n1, n2, alpha);
                if no - ne > best.1 {
                    best = (alpha, no - ne);
                }
            }
            best.0
        };
        let a = optimal_fill(2.0, 1.0).unwrap();
        assert!((a - scan(2.0, 1.0)).abs() < 2e-4);
        assert!(a > 0.5 && a < 1.0);

        let a34 = optimal_fill(3.4, 1.0).unwrap();
        assert!((a34 - scan(3.4, 1.0)).abs() < 2e-4);
        assert!((a34 - 0.656).abs() <= 0.01);
    }

    #[test]
    fn optimal_fill_swap_symmetry() {
        let a = optimal_fill(3.4, 1.0).unwrap();
        let b = optimal_fill(1.0, 3.4).unwrap();
        assert!((b - (1.0 - a)).abs() < 1e-5);
    }

    #[test]
    fn optimal_fill_equal_indices_errors() {
        assert!(matches!(optimal_fill(2.0, 2.0), Err(BandError::NoBirefringence)));
    }

    #[test]
    fn homogeneous_medium_has_no_stopband() {
        let st = stack_const(1.5, 0.4, 1.5, 0.6);
        let lo = 0.05 * C_LIGHT;
        let hi = 4.0 * C_LIGHT;
        let bands = stopbands_normal(&st, Polarization::Te, (lo, hi), 4000).unwrap();
        assert!(bands.is_empty());
    }

    #[test]
    fn quarter_wave_stopband_contains_center() {
        // quarter-wave at omega0 = c: k1 a = k2 b = pi/2
        let st = stack_const(2.0, std::f64::consts::FRAC_PI_4, 1.0, std::f64::consts::FRAC_PI_2);
        let bands =
            stopbands_normal(&st, Polarization::Te, (0.2 * C_LIGHT, 2.0 * C_LIGHT), 4000).unwrap();
        assert!(!bands.is_empty());
        let first = bands[0];
        assert!(first.0 < C_LIGHT && C_LIGHT < first.1, "first band {first:?}");
    }

    #[test]
    fn under_resolved_stopband_scan_errors() {
        let st = ws_demo_stack();
        let range = (st.omega_from_norm(0.01), st.omega_from_norm(0.6));
        assert!(matches!(
            stopbands_normal(&st, Polarization::Te, range, 10),
            Err(BandError::InvalidGrid(_))
        ));
    }

    #[test]
    fn band_diagram_homogeneous_all_propagating() {
        let st = stack_const(1.5, 0.4, 1.5, 0.6);
        let omega: Vec<f64> = (1..=16).map(|j| j as f64 * 0.3 * C_LIGHT).collect();
        let kpar: Vec<f64> = (0..=16).map(|j| j as f64 * 0.05).collect();
        let bd = band_diagram(&st, &omega, &kpar, Polarization::Te).unwrap();
        for (idx, cell) in bd.cells.iter().enumerate() {
            let w = bd.omega[idx / bd.k_par.len()];
            let k = bd.k_par[idx % bd.k_par.len()];
            if k <= 1.5 * w / C_LIGHT {
                assert!(cell.propagating, "evanescent below the medium light line");
            }
            assert_eq!(cell.above_light_line, w > C_LIGHT * k);
        }
    }

    #[test]
    fn band_diagram_normal_incidence_column_matches_stopbands() {
        // scan the material validity window, which brackets the first gap
        let st = ws_demo_stack();
        let omega: Vec<f64> =
            (0..=300).map(|j| st.omega_from_norm(0.20 + 0.33 * j as f64 / 300.0)).collect();
        let kpar = vec![0.0, st.k_from_norm(0.2)];
        let bd = band_diagram(&st, &omega, &kpar, Polarization::Te).unwrap();
        let bands = stopbands_normal(
            &st,
            Polarization::Te,
            (omega[0], *omega.last().unwrap()),
            6000,
        )
        .unwrap();
        assert!(!bands.is_empty());
        for (i, &w) in omega.iter().enumerate() {
            let in_gap = bands.iter().any(|&(lo, hi)| w > lo && w < hi);
            assert_eq!(
                !bd.cell(i, 0).propagating,
                in_gap,
                "mismatch at omega_norm {}",
                st.omega_norm(w)
            );
        }
        // the TE and TM grids coincide along the normal-incidence column
        let bd_tm = band_diagram(&st, &omega, &kpar, Polarization::Tm).unwrap();
        for i in 0..omega.len() {
            assert_eq!(bd.cell(i, 0).propagating, bd_tm.cell(i, 0).propagating);
            assert!(
                (bd.cell(i, 0).attenuation - bd_tm.cell(i, 0).attenuation).abs()
                    <= 1e-12 * bd.cell(i, 0).attenuation.abs().max(1.0)
            );
        }
    }
}
