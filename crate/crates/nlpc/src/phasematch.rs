//! Down-conversion phase matching: planar solutions, full emission cones
//! and the cone-cone crossings that define polarization-entanglement
//! directions.
//!
//! Conventions: the pump transverse wavevector is a 2-vector in the layer
//! plane; transverse momentum is conserved exactly
//! (`k_par_1 + k_par_2 = k_par_pump`, there is no in-plane reciprocal
//! lattice vector in a 1D crystal) and energy is conserved by
//! construction (`omega_1 + omega_2 = omega_pump`). The longitudinal
//! mismatch uses extended-zone Bloch wavevectors per band plus explicit
//! reciprocal-lattice multiples of `2 pi / period`.

use rayon::prelude::*;
use serde::Serialize;

use crate::bandstructure::{BandError, LayeredStack, Polarization};
use crate::numeric::{bisect, golden_min};
use crate::surfaces::kz_extended;
use crate::C_LIGHT;

#[derive(Debug, thiserror::Error)]
pub enum MatchError {
    #[error(transparent)]
    Band(#[from] BandError),

    #[error("pump mode is not propagating at (omega, k_par, band) = ({omega:.6e}, {k_par:.6e}, {band})")]
    PumpNotPropagating { omega: f64, k_par: f64, band: u32 },

    #[error("no propagating samples in the scan range")]
    EmptyScan,

    #[error("no planar phase-matching solution to seed the cone trace")]
    NoPlanarSolution,

    #[error("cone trace failed to close: {missing} of {total} azimuths have no solution")]
    OpenCurve {
        /// Partial curve with the successful rays only.
        partial: Box<EmissionCone>,
        missing: usize,
        total: usize,
    },

    #[error("cone pair is not a complementary type-II pair from the same pump: {0}")]
    MismatchedCones(String),

    #[error("cones coincide within tolerance; crossing directions are ill-defined")]
    DegenerateOverlap,

    #[error("cones do not intersect; no entanglement directions for this geometry")]
    NoIntersection,
}

/// Propagation branch of a photon's longitudinal wavevector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Forward,
    Backward,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Forward => 1.0,
            Branch::Backward => -1.0,
        }
    }
}

/// Pump mode specification: frequency, polarization, transverse
/// wavevector, band (zone choice) and an extra reciprocal-lattice index
/// `g_p` in units of `2 pi / period`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PumpSpec {
    pub omega: f64,
    pub pol: Polarization,
    pub k_par: [f64; 2],
    pub band: u32,
    pub g_p: i32,
}

impl PumpSpec {
    pub fn k_par_mag(&self) -> f64 {
        (self.k_par[0] * self.k_par[0] + self.k_par[1] * self.k_par[1]).sqrt()
    }

    /// Total longitudinal pump wavevector `K_z(band) + g_p 2pi/L`, or an
    /// error if the pump mode is evanescent.
    pub fn kz_total(&self, stack: &LayeredStack) -> Result<f64, MatchError> {
        let kz = kz_extended(stack, self.omega, self.k_par_mag(), self.pol, self.band)?;
        match kz {
            Some(v) => Ok(v + self.g_p as f64 * 2.0 * std::f64::consts::PI / stack.period()),
            None => Err(MatchError::PumpNotPropagating {
                omega: self.omega,
                k_par: self.k_par_mag(),
                band: self.band,
            }),
        }
    }

    /// Full pump wavevector as a 3-vector `(k_x, k_y, K_z + g_p 2pi/L)`.
    pub fn k3(&self, stack: &LayeredStack) -> Result<[f64; 3], MatchError> {
        let kz = self.kz_total(stack)?;
        Ok([self.k_par[0], self.k_par[1], kz])
    }

    /// Unit vector along the transverse pump direction; defaults to x
    /// for normal incidence.
    pub fn transverse_unit(&self) -> [f64; 2] {
        let m = self.k_par_mag();
        if m < f64::EPSILON {
            [1.0, 0.0]
        } else {
            [self.k_par[0] / m, self.k_par[1] / m]
        }
    }
}

/// Down-conversion type: both photons share one polarization (type I) or
/// carry orthogonal polarizations (type II).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchType {
    TypeI,
    TypeII,
}

pub fn classify(pol_1: Polarization, pol_2: Polarization) -> MatchType {
    if pol_1 == pol_2 {
        MatchType::TypeI
    } else {
        MatchType::TypeII
    }
}

/// One phase-matched photon pair.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MatchSolution {
    pub omega_1: f64,
    pub omega_2: f64,
    pub k_par_1: [f64; 2],
    pub k_par_2: [f64; 2],
    /// Signed extended-zone longitudinal wavevectors (negative for
    /// backward emission).
    pub kz_1: f64,
    pub kz_2: f64,
    pub pol_1: Polarization,
    pub pol_2: Polarization,
    pub band_1: u32,
    pub band_2: u32,
    pub g_dc: i32,
    /// Longitudinal mismatch left after root refinement, rad/m.
    pub residual: f64,
    pub match_type: MatchType,
    pub backward: bool,
}

impl MatchSolution {
    /// Photon-1 wavevector as a 3-vector (transverse, longitudinal).
    pub fn k_1_3(&self) -> [f64; 3] {
        [self.k_par_1[0], self.k_par_1[1], self.kz_1]
    }

    pub fn k_2_3(&self) -> [f64; 3] {
        [self.k_par_2[0], self.k_par_2[1], self.kz_2]
    }
}

/// Parameters of a down-conversion search.
#[derive(Debug, Clone, Copy)]
pub struct ScanSpec {
    pub pol_1: Polarization,
    pub pol_2: Polarization,
    pub band_1: u32,
    pub band_2: u32,
    /// Frequency split `omega_1 / omega_pump`.
    pub split: f64,
    pub g_dc: i32,
    /// Bracketing samples along the scan line.
    pub n_brackets: usize,
    /// Scan-coordinate range; `None` covers every transverse wavevector
    /// the photons could propagate at.
    pub range: Option<(f64, f64)>,
}

impl ScanSpec {
    pub fn degenerate(pol_1: Polarization, pol_2: Polarization) -> Self {
        ScanSpec {
            pol_1,
            pol_2,
            band_1: 0,
            band_2: 0,
            split: 0.5,
            g_dc: 0,
            n_brackets: 2048,
            range: None,
        }
    }
}

/// Residual acceptance bound for a refined root, in units of `pi/period`.
const RESIDUAL_TOL_NORM: f64 = 1e-9;

/// Longitudinal phase mismatch
/// `[K_zp + g_p 2pi/L] - [s1 K_z1 + s2 K_z2 + g_dc 2pi/L]`
/// for photon 1 at `(split * omega_p, k_par_1)` and photon 2 taking the
/// transverse and energy remainders. `None` if either down-converted mode
/// is evanescent; an error if the pump itself is.
#[allow(clippy::too_many_arguments)]
pub fn mismatch(
    stack: &LayeredStack,
    pump: &PumpSpec,
    omega_1: f64,
    k_par_1: [f64; 2],
    pol_1: Polarization,
    pol_2: Polarization,
    bands: (u32, u32),
    signs: (Branch, Branch),
    g_dc: i32,
) -> Result<Option<f64>, MatchError> {
    let pump_total = pump.kz_total(stack)?;
    Ok(photon_mismatch(
        stack, pump, pump_total, omega_1, k_par_1, pol_1, pol_2, bands, signs, g_dc,
    )?)
}

/// Inner mismatch with the pump longitudinal total precomputed.
#[allow(clippy::too_many_arguments)]
fn photon_mismatch(
    stack: &LayeredStack,
    pump: &PumpSpec,
    pump_total: f64,
    omega_1: f64,
    k_par_1: [f64; 2],
    pol_1: Polarization,
    pol_2: Polarization,
    bands: (u32, u32),
    signs: (Branch, Branch),
    g_dc: i32,
) -> Result<Option<f64>, BandError> {
    debug_assert!(omega_1 > 0.0 && omega_1 < pump.omega);
    let omega_2 = pump.omega - omega_1;
    let k_par_2 = [pump.k_par[0] - k_par_1[0], pump.k_par[1] - k_par_1[1]];
    let m1 = (k_par_1[0] * k_par_1[0] + k_par_1[1] * k_par_1[1]).sqrt();
    let m2 = (k_par_2[0] * k_par_2[0] + k_par_2[1] * k_par_2[1]).sqrt();
    let Some(kz_1) = kz_extended(stack, omega_1, m1, pol_1, bands.0)? else {
        return Ok(None);
    };
    let Some(kz_2) = kz_extended(stack, omega_2, m2, pol_2, bands.1)? else {
        return Ok(None);
    };
    let g = g_dc as f64 * 2.0 * std::f64::consts::PI / stack.period();
    Ok(Some(pump_total - (signs.0.sign() * kz_1 + signs.1.sign() * kz_2 + g)))
}

/// All planar phase-matching solutions along the scan line through the
/// pump's transverse direction (photon wavevectors confined to the plane
/// spanned by the pump and the stack normal).
///
/// The scan coordinate is the photon-1 transverse component along the
/// pump direction; every sign-change bracket of the mismatch is refined
/// by bisection until the residual is below `1e-9 pi/period`, tangential
/// zero touches are picked up by a golden-section pass, and all four
/// longitudinal sign combinations are examined (solutions with a backward
/// photon are flagged). Solutions are reported once each, sorted by scan
/// coordinate.
pub fn find_matches(
    stack: &LayeredStack,
    pump: &PumpSpec,
    scan: &ScanSpec,
) -> Result<Vec<MatchSolution>, MatchError> {
    let pump_total = pump.kz_total(stack)?;
    let omega_1 = scan.split * pump.omega;
    let u = pump.transverse_unit();
    let reach = scan_reach(stack, pump, scan)?;
    let (t_lo, t_hi) = scan.range.unwrap_or((-reach, reach));
    if !(t_hi > t_lo) {
        return Err(MatchError::Band(BandError::InvalidGrid(
            "scan range must be ascending".into(),
        )));
    }
    let combos = [
        (Branch::Forward, Branch::Forward),
        (Branch::Forward, Branch::Backward),
        (Branch::Backward, Branch::Forward),
        (Branch::Backward, Branch::Backward),
    ];

    let tol = RESIDUAL_TOL_NORM * std::f64::consts::PI / stack.period();
    let mut out: Vec<(f64, (Branch, Branch), MatchSolution)> = Vec::new();
    let mut any_sample = false;
    for signs in combos {
        let f = |t: f64| -> Option<f64> {
            photon_mismatch(
                stack,
                pump,
                pump_total,
                omega_1,
                [t * u[0], t * u[1]],
                scan.pol_1,
                scan.pol_2,
                (scan.band_1, scan.band_2),
                signs,
                scan.g_dc,
            )
            .ok()
            .flatten()
        };
        let roots = line_roots(&f, t_lo, t_hi, scan.n_brackets, tol);
        any_sample = any_sample || roots.sampled;
        for t in roots.roots {
            // report each root once per sign combination
            if out
                .iter()
                .any(|(t0, s0, _)| (t0 - t).abs() < 1e-9 * (t_hi - t_lo) && *s0 == signs)
            {
                continue;
            }
            if let Some(sol) =
                build_solution(stack, pump, pump_total, omega_1, t, u, scan, signs, tol)?
            {
                out.push((t, signs, sol));
            }
        }
    }
    if !any_sample {
        return Err(MatchError::EmptyScan);
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(out.into_iter().map(|(_, _, s)| s).collect())
}

/// Scan reach: the largest photon-1 transverse magnitude that can still
/// propagate in either layer.
fn scan_reach(
    stack: &LayeredStack,
    pump: &PumpSpec,
    scan: &ScanSpec,
) -> Result<f64, MatchError> {
    let omega_1 = scan.split * pump.omega;
    let (n1, n2) = stack.indices_at(omega_1).map_err(BandError::from)?;
    Ok(n1.max(n2) * omega_1 / C_LIGHT + pump.k_par_mag())
}

#[allow(clippy::too_many_arguments)]
fn build_solution(
    stack: &LayeredStack,
    pump: &PumpSpec,
    pump_total: f64,
    omega_1: f64,
    t: f64,
    u: [f64; 2],
    scan: &ScanSpec,
    signs: (Branch, Branch),
    tol: f64,
) -> Result<Option<MatchSolution>, MatchError> {
    let k_par_1 = [t * u[0], t * u[1]];
    let residual = photon_mismatch(
        stack,
        pump,
        pump_total,
        omega_1,
        k_par_1,
        scan.pol_1,
        scan.pol_2,
        (scan.band_1, scan.band_2),
        signs,
        scan.g_dc,
    )?;
    let Some(residual) = residual else { return Ok(None) };
    if residual.abs() >= tol {
        return Ok(None);
    }
    let omega_2 = pump.omega - omega_1;
    let k_par_2 = [pump.k_par[0] - k_par_1[0], pump.k_par[1] - k_par_1[1]];
    let m1 = (k_par_1[0] * k_par_1[0] + k_par_1[1] * k_par_1[1]).sqrt();
    let m2 = (k_par_2[0] * k_par_2[0] + k_par_2[1] * k_par_2[1]).sqrt();
    let kz_1 = kz_extended(stack, omega_1, m1, scan.pol_1, scan.band_1)?.unwrap();
    let kz_2 = kz_extended(stack, omega_2, m2, scan.pol_2, scan.band_2)?.unwrap();
    Ok(Some(MatchSolution {
        omega_1,
        omega_2,
        k_par_1,
        k_par_2,
        kz_1: signs.0.sign() * kz_1,
        kz_2: signs.1.sign() * kz_2,
        pol_1: scan.pol_1,
        pol_2: scan.pol_2,
        band_1: scan.band_1,
        band_2: scan.band_2,
        g_dc: scan.g_dc,
        residual,
        match_type: classify(scan.pol_1, scan.pol_2),
        backward: signs.0 == Branch::Backward || signs.1 == Branch::Backward,
    }))
}

struct LineRoots {
    roots: Vec<f64>,
    /// Whether any sample in the range was propagating.
    sampled: bool,
}

/// Roots of a partial function on `[lo, hi]`: sign-change brackets refined
/// by bisection, plus tangential touches of zero found by minimizing |f|
/// on interior local minima.
fn line_roots(f: &dyn Fn(f64) -> Option<f64>, lo: f64, hi: f64, n: usize, tol: f64) -> LineRoots {
    let xs: Vec<f64> = (0..=n).map(|j| lo + (hi - lo) * j as f64 / n as f64).collect();
    let ys: Vec<Option<f64>> = xs.iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();
    let sampled = ys.iter().any(|y| y.is_some());
    let push_unique = |roots: &mut Vec<f64>, r: f64| {
        if roots.iter().all(|&q| (q - r).abs() > 1e-10 * (hi - lo)) {
            roots.push(r);
        }
    };
    for j in 0..n {
        let (Some(y0), Some(y1)) = (ys[j], ys[j + 1]) else { continue };
        if y0 == 0.0 {
            push_unique(&mut roots, xs[j]);
            continue;
        }
        if y0 * y1 < 0.0 {
            let r = bisect(xs[j], xs[j + 1], |x| f(x).unwrap_or(f64::NAN));
            push_unique(&mut roots, r);
        }
    }
    if ys[n] == Some(0.0) {
        push_unique(&mut roots, xs[n]);
    }
    // tangential touches: interior local minima of |f| that reach zero
    for j in 1..n {
        let (Some(ym), Some(y0), Some(yp)) = (ys[j - 1], ys[j], ys[j + 1]) else { continue };
        if y0.abs() <= ym.abs() && y0.abs() <= yp.abs() && ym * yp > 0.0 {
            let (r, fr) = golden_min(xs[j - 1], xs[j + 1], 1e-14 * (hi - lo).abs(), |x| {
                f(x).map(|v| v.abs()).unwrap_or(f64::INFINITY)
            });
            if fr < tol {
                push_unique(&mut roots, r);
            }
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    LineRoots { roots, sampled }
}

/// One sample of an emission cone: photon wavevectors at azimuth `phi`
/// about the cone centroid (measured from the pump's transverse
/// direction).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConeSample {
    pub phi: f64,
    pub k_1: [f64; 3],
    pub k_2: [f64; 3],
    pub residual: f64,
}

/// Parameters of a cone trace.
#[derive(Debug, Clone, Copy)]
pub struct ConeSpec {
    pub pol_1: Polarization,
    pub pol_2: Polarization,
    pub band_1: u32,
    pub band_2: u32,
    pub split: f64,
    pub g_dc: i32,
    pub signs: (Branch, Branch),
    pub n_azimuth: usize,
}

impl ConeSpec {
    pub fn degenerate(pol_1: Polarization, pol_2: Polarization, n_azimuth: usize) -> Self {
        ConeSpec {
            pol_1,
            pol_2,
            band_1: 0,
            band_2: 0,
            split: 0.5,
            g_dc: 0,
            signs: (Branch::Forward, Branch::Forward),
            n_azimuth,
        }
    }

    fn scan(&self) -> ScanSpec {
        ScanSpec {
            pol_1: self.pol_1,
            pol_2: self.pol_2,
            band_1: self.band_1,
            band_2: self.band_2,
            split: self.split,
            g_dc: self.g_dc,
            n_brackets: 2048,
            range: None,
        }
    }
}

/// Closed emission-cone curve in the photon-1 transverse plane, with the
/// partner photon completed by transverse conservation.
#[derive(Debug, Clone, Serialize)]
pub struct EmissionCone {
    pub pump: PumpSpec,
    pub match_type: MatchType,
    pub pol_1: Polarization,
    pub pol_2: Polarization,
    pub band_1: u32,
    pub band_2: u32,
    pub split: f64,
    pub g_dc: i32,
    pub signs: (Branch, Branch),
    /// Interior point the curve is star-shaped about.
    pub centroid: [f64; 2],
    pub samples: Vec<ConeSample>,
    pub closed: bool,
}

impl EmissionCone {
    /// Transverse polyline of photon-1 samples.
    pub fn transverse_points(&self) -> Vec<[f64; 2]> {
        self.samples.iter().map(|s| [s.k_1[0], s.k_1[1]]).collect()
    }
}

/// Trace the emission cone for one polarization assignment by polar
/// continuation about the interior centroid of the planar solutions.
/// Rays that find no solution make the curve open; the partial curve is
/// returned inside the error for diagnostics.
pub fn emission_cone(
    stack: &LayeredStack,
    pump: &PumpSpec,
    spec: &ConeSpec,
) -> Result<EmissionCone, MatchError> {
    if spec.n_azimuth < 64 {
        return Err(MatchError::Band(BandError::InvalidGrid(format!(
            "n_azimuth = {}; need at least 64",
            spec.n_azimuth
        ))));
    }
    let pump_total = pump.kz_total(stack)?;
    let planar = find_matches(stack, pump, &spec.scan())?;
    let u = pump.transverse_unit();
    // planar solutions on this sign combination only
    let seeds: Vec<f64> = planar
        .iter()
        .filter(|s| {
            s.kz_1.signum() == spec.signs.0.sign() && s.kz_2.signum() == spec.signs.1.sign()
        })
        .map(|s| s.k_par_1[0] * u[0] + s.k_par_1[1] * u[1])
        .collect();
    if seeds.is_empty() {
        return Err(MatchError::NoPlanarSolution);
    }
    let t_lo = seeds.iter().cloned().fold(f64::INFINITY, f64::min);
    let t_hi = seeds.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let centroid_t = 0.5 * (t_lo + t_hi);
    let centroid = [centroid_t * u[0], centroid_t * u[1]];
    let radius = (t_hi - t_lo) * 0.5;
    let reach = 2.5 * radius.max(1e-6 * std::f64::consts::PI / stack.period());
    let tol = RESIDUAL_TOL_NORM * std::f64::consts::PI / stack.period();
    let w = [-u[1], u[0]];

    let omega_1 = spec.split * pump.omega;
    let ray_solve = |phi: f64| -> Option<(f64, f64)> {
        let dir = [
            phi.cos() * u[0] + phi.sin() * w[0],
            phi.cos() * u[1] + phi.sin() * w[1],
        ];
        let f = |s: f64| -> Option<f64> {
            photon_mismatch(
                stack,
                pump,
                pump_total,
                omega_1,
                [centroid[0] + s * dir[0], centroid[1] + s * dir[1]],
                spec.pol_1,
                spec.pol_2,
                (spec.band_1, spec.band_2),
                spec.signs,
                spec.g_dc,
            )
            .ok()
            .flatten()
        };
        let found = line_roots(&f, 0.0, reach, 512, tol);
        if let Some(&s) = found.roots.first() {
            return Some((s, f(s).unwrap_or(f64::NAN)));
        }
        // degenerate cone: the centroid itself satisfies the condition
        if let Some(v) = f(0.0) {
            if v.abs() < tol {
                return Some((0.0, v));
            }
        }
        None
    };

    let rays: Vec<(f64, Option<(f64, f64)>)> = (0..spec.n_azimuth)
        .into_par_iter()
        .map(|j| {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / spec.n_azimuth as f64;
            (phi, ray_solve(phi))
        })
        .collect();

    let mut samples = Vec::with_capacity(spec.n_azimuth);
    let mut missing = 0usize;
    for (phi, hit) in &rays {
        match hit {
            Some((s, residual)) => {
                let dir = [
                    phi.cos() * u[0] + phi.sin() * w[0],
                    phi.cos() * u[1] + phi.sin() * w[1],
                ];
                let k_par_1 = [centroid[0] + s * dir[0], centroid[1] + s * dir[1]];
                let k_par_2 = [pump.k_par[0] - k_par_1[0], pump.k_par[1] - k_par_1[1]];
                let m1 = (k_par_1[0] * k_par_1[0] + k_par_1[1] * k_par_1[1]).sqrt();
                let m2 = (k_par_2[0] * k_par_2[0] + k_par_2[1] * k_par_2[1]).sqrt();
                let kz_1 = kz_extended(stack, omega_1, m1, spec.pol_1, spec.band_1)?
                    .expect("refined ray root must be propagating");
                let kz_2 =
                    kz_extended(stack, pump.omega - omega_1, m2, spec.pol_2, spec.band_2)?
                        .expect("refined ray root must be propagating");
                samples.push(ConeSample {
                    phi: *phi,
                    k_1: [k_par_1[0], k_par_1[1], spec.signs.0.sign() * kz_1],
                    k_2: [k_par_2[0], k_par_2[1], spec.signs.1.sign() * kz_2],
                    residual: *residual,
                });
            }
            None => missing += 1,
        }
    }

    let cone = EmissionCone {
        pump: *pump,
        match_type: classify(spec.pol_1, spec.pol_2),
        pol_1: spec.pol_1,
        pol_2: spec.pol_2,
        band_1: spec.band_1,
        band_2: spec.band_2,
        split: spec.split,
        g_dc: spec.g_dc,
        signs: spec.signs,
        centroid,
        samples,
        closed: missing == 0,
    };
    if missing > 0 {
        return Err(MatchError::OpenCurve {
            partial: Box::new(cone),
            missing,
            total: spec.n_azimuth,
        });
    }
    Ok(cone)
}

/// A pair of emission directions at a cone crossing.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DirectionPair {
    pub k_1: [f64; 3],
    pub k_2: [f64; 3],
    /// Residuals of the two cone conditions at the crossing, rad/m.
    pub residual_a: f64,
    pub residual_b: f64,
}

/// Crossing directions of the two type-II cones, where the orthogonally
/// polarized photons of a pair become indistinguishable except by
/// polarization.
#[derive(Debug, Clone, Serialize)]
pub struct EntanglementDirections {
    pub pairs: Vec<DirectionPair>,
}

impl EntanglementDirections {
    /// Angle between the photon-1 directions of two crossing pairs, rad.
    pub fn angular_separation(&self) -> Option<f64> {
        if self.pairs.len() < 2 {
            return None;
        }
        Some(angle_between(self.pairs[0].k_1, self.pairs[1].k_1))
    }
}

pub fn angle_between(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let na = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    let nb = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
    (dot / (na * nb)).clamp(-1.0, 1.0).acos()
}

/// Find all crossings of two complementary type-II cone curves in the
/// photon-1 transverse plane, refined until both cone conditions hold to
/// well below `1e-6 pi/period`.
pub fn cone_intersections(
    stack: &LayeredStack,
    cone_a: &EmissionCone,
    cone_b: &EmissionCone,
) -> Result<EntanglementDirections, MatchError> {
    validate_pair(cone_a, cone_b)?;
    let pts_a = cone_a.transverse_points();
    let pts_b = cone_b.transverse_points();
    let scale = overlap_scale(&pts_a, &pts_b);

    // coincident curves have no transversal crossings to report
    let hausdorff = one_sided_hausdorff(&pts_a, &pts_b).max(one_sided_hausdorff(&pts_b, &pts_a));
    if hausdorff < 1e-9 * scale {
        return Err(MatchError::DegenerateOverlap);
    }

    let mut crossings: Vec<(usize, [f64; 2])> = Vec::new();
    for i in 0..pts_a.len() {
        let a0 = pts_a[i];
        let a1 = pts_a[(i + 1) % pts_a.len()];
        for j in 0..pts_b.len() {
            let b0 = pts_b[j];
            let b1 = pts_b[(j + 1) % pts_b.len()];
            if let Some(p) = segment_intersection(a0, a1, b0, b1) {
                if crossings
                    .iter()
                    .all(|(_, q)| (q[0] - p[0]).hypot(q[1] - p[1]) > 1e-6 * scale)
                {
                    crossings.push((i, p));
                }
            }
        }
    }
    if crossings.is_empty() {
        return Err(MatchError::NoIntersection);
    }

    let mut pairs = Vec::with_capacity(crossings.len());
    for (seg_a, guess) in crossings {
        pairs.push(refine_crossing(stack, cone_a, cone_b, seg_a, guess)?);
    }
    pairs.sort_by(|p, q| {
        p.k_1[1]
            .atan2(p.k_1[0])
            .partial_cmp(&q.k_1[1].atan2(q.k_1[0]))
            .unwrap()
    });
    Ok(EntanglementDirections { pairs })
}

fn validate_pair(a: &EmissionCone, b: &EmissionCone) -> Result<(), MatchError> {
    let same_pump = (a.pump.omega - b.pump.omega).abs() <= 1e-9 * a.pump.omega
        && (a.pump.k_par[0] - b.pump.k_par[0]).abs() <= 1e-9 * (a.pump.k_par_mag() + 1.0)
        && (a.pump.k_par[1] - b.pump.k_par[1]).abs() <= 1e-9 * (a.pump.k_par_mag() + 1.0)
        && a.pump.pol == b.pump.pol
        && a.pump.band == b.pump.band
        && a.pump.g_p == b.pump.g_p;
    if !same_pump {
        return Err(MatchError::MismatchedCones("pumps differ".into()));
    }
    if a.match_type != MatchType::TypeII || b.match_type != MatchType::TypeII {
        return Err(MatchError::MismatchedCones("both cones must be type II".into()));
    }
    if !(a.pol_1 == b.pol_2 && a.pol_2 == b.pol_1 && a.pol_1 != b.pol_1) {
        return Err(MatchError::MismatchedCones(
            "polarization assignments must be complementary".into(),
        ));
    }
    if a.samples.len() < 3 || b.samples.len() < 3 {
        return Err(MatchError::MismatchedCones("cones are too sparse".into()));
    }
    Ok(())
}

fn overlap_scale(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    let mut scale = 0.0f64;
    for p in a.iter().chain(b.iter()) {
        scale = scale.max(p[0].abs()).max(p[1].abs());
    }
    scale.max(f64::MIN_POSITIVE)
}

fn one_sided_hausdorff(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    let mut worst = 0.0f64;
    for p in a {
        let mut best = f64::INFINITY;
        for q in b {
            best = best.min((p[0] - q[0]).hypot(p[1] - q[1]));
        }
        worst = worst.max(best);
    }
    worst
}

/// Intersection point of two closed segments, or `None` if they do not
/// cross transversally.
fn segment_intersection(
    a0: [f64; 2],
    a1: [f64; 2],
    b0: [f64; 2],
    b1: [f64; 2],
) -> Option<[f64; 2]> {
    let r = [a1[0] - a0[0], a1[1] - a0[1]];
    let s = [b1[0] - b0[0], b1[1] - b0[1]];
    let denom = r[0] * s[1] - r[1] * s[0];
    if denom == 0.0 {
        return None;
    }
    let d = [b0[0] - a0[0], b0[1] - a0[1]];
    let t = (d[0] * s[1] - d[1] * s[0]) / denom;
    let v = (d[0] * r[1] - d[1] * r[0]) / denom;
    if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&v) {
        Some([a0[0] + t * r[0], a0[1] + t * r[1]])
    } else {
        None
    }
}

/// Refine a polyline crossing to a point satisfying both cone conditions:
/// bisection in azimuth along cone A of the signed cone-B mismatch.
fn refine_crossing(
    stack: &LayeredStack,
    cone_a: &EmissionCone,
    cone_b: &EmissionCone,
    seg_a: usize,
    guess: [f64; 2],
) -> Result<DirectionPair, MatchError> {
    let pump = &cone_a.pump;
    let pump_total = pump.kz_total(stack)?;
    let u = pump.transverse_unit();
    let w = [-u[1], u[0]];
    let omega_1 = cone_a.split * pump.omega;
    let tol = RESIDUAL_TOL_NORM * std::f64::consts::PI / stack.period();

    // point on curve A at azimuth phi (fresh ray root about A's centroid)
    let reach = cone_a
        .samples
        .iter()
        .map(|smp| {
            let dx = smp.k_1[0] - cone_a.centroid[0];
            let dy = smp.k_1[1] - cone_a.centroid[1];
            dx.hypot(dy)
        })
        .fold(0.0f64, f64::max)
        * 2.0;
    let point_on_a = |phi: f64| -> Option<[f64; 2]> {
        let dir = [
            phi.cos() * u[0] + phi.sin() * w[0],
            phi.cos() * u[1] + phi.sin() * w[1],
        ];
        let f = |s: f64| -> Option<f64> {
            photon_mismatch(
                stack,
                pump,
                pump_total,
                omega_1,
                [cone_a.centroid[0] + s * dir[0], cone_a.centroid[1] + s * dir[1]],
                cone_a.pol_1,
                cone_a.pol_2,
                (cone_a.band_1, cone_a.band_2),
                cone_a.signs,
                cone_a.g_dc,
            )
            .ok()
            .flatten()
        };
        let roots = line_roots(&f, 0.0, reach, 512, tol);
        roots
            .roots
            .first()
            .map(|&s| [cone_a.centroid[0] + s * dir[0], cone_a.centroid[1] + s * dir[1]])
    };
    let mismatch_b = |p: [f64; 2]| -> Option<f64> {
        photon_mismatch(
            stack,
            pump,
            pump_total,
            omega_1,
            p,
            cone_b.pol_1,
            cone_b.pol_2,
            (cone_b.band_1, cone_b.band_2),
            cone_b.signs,
            cone_b.g_dc,
        )
        .ok()
        .flatten()
    };

    let n = cone_a.samples.len();
    let phi0 = cone_a.samples[seg_a].phi;
    let phi1 = if seg_a + 1 == n {
        2.0 * std::f64::consts::PI
    } else {
        cone_a.samples[seg_a + 1].phi
    };
    let g = |phi: f64| -> f64 {
        point_on_a(phi).and_then(&mismatch_b).unwrap_or(f64::NAN)
    };
    let (g0, g1) = (g(phi0), g(phi1));
    let phi_star = if g0.is_finite() && g1.is_finite() && g0 * g1 < 0.0 {
        bisect(phi0, phi1, g)
    } else {
        // fall back to the polyline crossing azimuth
        (guess[1] - cone_a.centroid[1]).atan2(guess[0] - cone_a.centroid[0])
    };

    let p = point_on_a(phi_star).ok_or(MatchError::NoIntersection)?;
    let residual_b = mismatch_b(p).ok_or(MatchError::NoIntersection)?;
    let residual_a = photon_mismatch(
        stack,
        pump,
        pump_total,
        omega_1,
        p,
        cone_a.pol_1,
        cone_a.pol_2,
        (cone_a.band_1, cone_a.band_2),
        cone_a.signs,
        cone_a.g_dc,
    )?
    .unwrap_or(f64::NAN);

    let k_par_2 = [pump.k_par[0] - p[0], pump.k_par[1] - p[1]];
    let m1 = p[0].hypot(p[1]);
    let m2 = k_par_2[0].hypot(k_par_2[1]);
    let kz_1 = kz_extended(stack, omega_1, m1, cone_a.pol_1, cone_a.band_1)?
        .ok_or(MatchError::NoIntersection)?;
    let kz_2 = kz_extended(stack, pump.omega - omega_1, m2, cone_a.pol_2, cone_a.band_2)?
        .ok_or(MatchError::NoIntersection)?;
    Ok(DirectionPair {
        k_1: [p[0], p[1], cone_a.signs.0.sign() * kz_1],
        k_2: [k_par_2[0], k_par_2[1], cone_a.signs.1.sign() * kz_2],
        residual_a,
        residual_b,
    })
}
