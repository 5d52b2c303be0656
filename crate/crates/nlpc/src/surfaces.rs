//! Dispersion surfaces `K_z(k_par)` at fixed frequency, in reduced or
//! repeated (extended) zone schemes, with Bragg gap detection.

use rayon::prelude::*;

use crate::bandstructure::{bloch_kz, BandError, LayeredStack, Polarization};
use crate::numeric::bisect_bool;
use crate::C_LIGHT;

/// Zone scheme for reporting `K_z`. Band `n` of the extended scheme
/// occupies `[n pi/L, (n+1) pi/L]`: even bands unfold as
/// `n pi/L + K_reduced`, odd bands as `(n+1) pi/L - K_reduced`, which
/// reproduces the free-photon dispersion in the homogeneous limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZoneScheme {
    Reduced,
    Extended(u32),
}

#[derive(Debug, Clone, Copy)]
pub struct SurfaceSample {
    pub k_par: f64,
    /// `K_z` in the requested zone scheme, or `None` inside a gap.
    pub kz: Option<f64>,
    pub above_light_line: bool,
}

/// Sampled dispersion surface at fixed `omega` for one polarization.
#[derive(Debug, Clone)]
pub struct DispersionSurface {
    pub omega: f64,
    pub pol: Polarization,
    pub zone: ZoneScheme,
    /// Samples sorted by `k_par` (the dispersion depends on `|k_par|`
    /// only, so non-negative transverse wavevectors suffice).
    pub samples: Vec<SurfaceSample>,
    /// Gap intervals in `k_par`, edges refined by bisection.
    pub gaps: Vec<(f64, f64)>,
}

/// Extended-zone `K_z` for the requested band at `(omega, k_par)`, or
/// `None` inside a gap.
pub fn kz_extended(
    stack: &LayeredStack,
    omega: f64,
    k_par: f64,
    pol: Polarization,
    band: u32,
) -> Result<Option<f64>, BandError> {
    let bk = bloch_kz(stack, omega, k_par, pol)?;
    if !bk.propagating {
        return Ok(None);
    }
    Ok(Some(unfold(bk.kz_reduced, stack.period(), band)))
}

pub(crate) fn unfold(kz_reduced: f64, period: f64, band: u32) -> f64 {
    let edge = std::f64::consts::PI / period;
    if band.is_multiple_of(2) {
        band as f64 * edge + kz_reduced
    } else {
        (band + 1) as f64 * edge - kz_reduced
    }
}

/// Fold an extended-zone `K_z` back into `[0, pi/period]`.
pub fn fold_reduced(kz_ext: f64, period: f64) -> f64 {
    let two_edge = 2.0 * std::f64::consts::PI / period;
    let r = kz_ext.rem_euclid(two_edge);
    if r > 0.5 * two_edge {
        two_edge - r
    } else {
        r
    }
}

/// Sample the dispersion surface at `omega` over `k_par` in
/// `[0, k_par_max]`. Gap edges are refined by bisection on the
/// propagating predicate. `n_samples >= 64`; `k_par_max` may not exceed
/// the largest layer light line `max(n1, n2) omega / c`.
pub fn surface(
    stack: &LayeredStack,
    omega: f64,
    pol: Polarization,
    k_par_max: f64,
    n_samples: usize,
    zone: ZoneScheme,
) -> Result<DispersionSurface, BandError> {
    if n_samples < 64 {
        return Err(BandError::InvalidGrid(format!(
            "n_samples = {n_samples}; need at least 64"
        )));
    }
    let (n1, n2) = stack.indices_at(omega)?;
    let k_cut = n1.max(n2) * omega / C_LIGHT;
    if !(k_par_max > 0.0 && k_par_max <= k_cut * (1.0 + 1e-12)) {
        return Err(BandError::InvalidGrid(format!(
            "k_par_max = {k_par_max:.6e} outside (0, {k_cut:.6e}]"
        )));
    }
    let period = stack.period();

    let evaluated: Result<Vec<_>, BandError> = (0..n_samples)
        .into_par_iter()
        .map(|j| {
            let k_par = k_par_max * j as f64 / (n_samples - 1) as f64;
            let bk = bloch_kz(stack, omega, k_par, pol)?;
            Ok((k_par, bk.propagating, bk.kz_reduced))
        })
        .collect();
    let evaluated = evaluated?;

    let samples: Vec<SurfaceSample> = evaluated
        .iter()
        .map(|&(k_par, propagating, kz_reduced)| SurfaceSample {
            k_par,
            kz: propagating.then(|| match zone {
                ZoneScheme::Reduced => kz_reduced,
                ZoneScheme::Extended(band) => unfold(kz_reduced, period, band),
            }),
            above_light_line: omega > C_LIGHT * k_par,
        })
        .collect();

    // gap interval assembly with bisected edges
    let propagating_at = |k: f64| {
        bloch_kz(stack, omega, k, pol).map(|b| b.propagating).unwrap_or(false)
    };
    let mut gaps = Vec::new();
    let mut open: Option<f64> = None;
    if !evaluated[0].1 {
        open = Some(evaluated[0].0);
    }
    for w in evaluated.windows(2) {
        let (k0, p0, _) = w[0];
        let (k1, p1, _) = w[1];
        if p0 != p1 {
            let edge = bisect_bool(k0, k1, propagating_at);
            if !p1 {
                open = Some(edge);
            } else if let Some(start) = open.take() {
                gaps.push((start, edge));
            }
        }
    }
    if let Some(start) = open {
        gaps.push((start, k_par_max));
    }

    Ok(DispersionSurface { omega, pol, zone, samples, gaps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandstructure::test_support::{lw_demo_stack, ws_demo_stack, stack_const};
    use crate::bandstructure::{effective_indices, half_trace};
    use approx::assert_relative_eq;

    #[test]
    fn homogeneous_extended_band0_is_exact_circle() {
        let st = stack_const(1.5, 0.4, 1.5, 0.6);
        // n omega L / c = 0.8 pi, so the whole circle sits in band 0
        let omega = 0.8 * std::f64::consts::PI * C_LIGHT / 1.5;
        let r = 1.5 * omega / C_LIGHT;
        let s = surface(&st, omega, Polarization::Te, 0.999 * r, 128, ZoneScheme::Extended(0))
            .unwrap();
        assert!(s.gaps.is_empty());
        for sm in &s.samples {
            let expect = (r * r - sm.k_par * sm.k_par).sqrt();
            let kz = sm.kz.expect("no gaps in a homogeneous medium");
            assert_relative_eq!(kz, expect, max_relative = 1e-10);
        }
    }

    #[test]
    fn homogeneous_reduced_is_fold_of_extended() {
        let st = stack_const(1.5, 0.4, 1.5, 0.6);
        let omega = 2.3 * std::f64::consts::PI * C_LIGHT / 1.5; // band 2 at k_par = 0
        let r = 1.5 * omega / C_LIGHT;
        let red =
            surface(&st, omega, Polarization::Te, 0.9 * r, 128, ZoneScheme::Reduced).unwrap();
        let period = st.period();
        for sm in &red.samples {
            let q = (r * r - sm.k_par * sm.k_par).sqrt();
            let kz = sm.kz.unwrap();
            assert_relative_eq!(kz, fold_reduced(q, period), max_relative = 1e-9);
            assert!(kz <= std::f64::consts::PI / period * (1.0 + 1e-12));
        }
    }

    #[test]
    fn long_wavelength_surfaces_match_effective_medium() {
        // 18.75 nm stack at 1500 nm: TE a circle of radius n_o omega/c,
        // TM the uniaxial ellipse, both to 0.1% away from the transverse
        // cutoff (the agreement degrades approaching the cutoff, where the
        // quadratic form-birefringence correction is amplified)
        let st = lw_demo_stack();
        let omega = 2.0 * std::f64::consts::PI * C_LIGHT / 1500e-9;
        let (n1, n2) = st.indices_at(omega).unwrap();
        let (no, ne) = effective_indices(n1, n2, st.fill());
        let kmax = 0.85 * ne * omega / C_LIGHT;

        let te = surface(&st, omega, Polarization::Te, kmax, 256, ZoneScheme::Extended(0)).unwrap();
        for sm in &te.samples {
            let expect = ((no * omega / C_LIGHT).powi(2) - sm.k_par * sm.k_par).sqrt();
            assert!((sm.kz.unwrap() - expect).abs() / expect < 1e-3);
        }
        let tm = surface(&st, omega, Polarization::Tm, kmax, 256, ZoneScheme::Extended(0)).unwrap();
        for sm in &tm.samples {
            let expect =
                no * ((omega / C_LIGHT).powi(2) - (sm.k_par / ne).powi(2)).sqrt();
            assert!((sm.kz.unwrap() - expect).abs() / expect < 1e-3);
        }
    }

    #[test]
    fn wavelength_scale_surface_has_bragg_gaps() {
        let st = ws_demo_stack();
        let omega = st.omega_from_norm(0.5);
        let kmax = st.k_from_norm(1.4);
        let s = surface(&st, omega, Polarization::Tm, kmax, 512, ZoneScheme::Extended(1)).unwrap();
        assert!(!s.gaps.is_empty(), "expected excluded directions at this frequency");
        assert!(s.samples.iter().any(|sm| sm.kz.is_none()));
        assert!(s.samples.iter().any(|sm| sm.kz.is_some()));
        // gap edges agree with the propagating predicate
        for &(lo, hi) in &s.gaps {
            assert!(lo < hi);
            let mid = 0.5 * (lo + hi);
            assert!(half_trace(&st, omega, mid, Polarization::Tm).unwrap().abs() > 1.0);
        }
        // K_z is continuous within each non-gap segment: adjacent jumps
        // stay within an order of magnitude of the local slope estimate
        // (plus a floor for flat regions)
        let floor = 1e-6 * std::f64::consts::PI / st.period();
        let mut prev_jump: Option<f64> = None;
        for w in s.samples.windows(2) {
            match (w[0].kz, w[1].kz) {
                (Some(a), Some(b)) => {
                    let jump = (b - a).abs();
                    if let Some(p) = prev_jump {
                        assert!(
                            jump <= 10.0 * p + floor,
                            "discontinuity at k_par = {}: jump {jump} after {p}",
                            w[1].k_par
                        );
                    }
                    prev_jump = Some(jump);
                }
                _ => prev_jump = None,
            }
        }
    }

    #[test]
    fn kz_extended_examples() {
        // homogeneous band 0
        let st = stack_const(1.5, 0.4, 1.5, 0.6);
        let omega = 0.8 * std::f64::consts::PI * C_LIGHT / 1.5;
        let r = 1.5 * omega / C_LIGHT;
        let kz = kz_extended(&st, omega, 0.3 * r, Polarization::Te, 0).unwrap().unwrap();
        assert_relative_eq!(kz, (r * r - (0.3 * r) * (0.3 * r)).sqrt(), max_relative = 1e-10);

        // wavelength-scale stack, second zone at normal incidence
        let st = ws_demo_stack();
        let omega = st.omega_from_norm(0.5);
        let ht = half_trace(&st, omega, 0.0, Polarization::Tm).unwrap();
        let expect = 2.0 * std::f64::consts::PI / st.period() - ht.acos() / st.period();
        let kz = kz_extended(&st, omega, 0.0, Polarization::Tm, 1).unwrap().unwrap();
        assert_relative_eq!(kz, expect, max_relative = 1e-12);
        // consistent with surface() at matching parameters
        let s = surface(
            &st,
            omega,
            Polarization::Tm,
            st.k_from_norm(0.5),
            64,
            ZoneScheme::Extended(1),
        )
        .unwrap();
        assert_relative_eq!(s.samples[0].kz.unwrap(), kz, max_relative = 1e-10);

        // inside the first normal-incidence stopband
        let in_gap = kz_extended(&st, st.omega_from_norm(0.35), 0.0, Polarization::Te, 0).unwrap();
        assert!(in_gap.is_none());
    }

    #[test]
    fn zone_consistency_and_band_ordering() {
        let st = ws_demo_stack();
        let omega = st.omega_from_norm(0.5);
        let period = st.period();
        for kn in [0.0, 0.1, 0.3, 0.45] {
            let k_par = st.k_from_norm(kn);
            let mut prev = -1.0;
            for band in 0..4 {
                if let Some(kz) =
                    kz_extended(&st, omega, k_par, Polarization::Te, band).unwrap()
                {
                    let red = bloch_kz(&st, omega, k_par, Polarization::Te).unwrap().kz_reduced;
                    assert_relative_eq!(fold_reduced(kz, period), red, max_relative = 1e-10);
                    assert!(kz > prev, "band ordering violated at band {band}");
                    prev = kz;
                }
            }
        }
    }

    #[test]
    fn dispersion_is_even_in_k_par() {
        let st = ws_demo_stack();
        let omega = st.omega_from_norm(0.5);
        for kn in [0.1, 0.35, 0.8] {
            let k = st.k_from_norm(kn);
            let plus = half_trace(&st, omega, k, Polarization::Tm).unwrap();
            let minus = half_trace(&st, omega, -k, Polarization::Tm).unwrap();
            assert_eq!(plus, minus);
        }
    }

    #[test]
    fn surface_input_validation() {
        let st = ws_demo_stack();
        let omega = st.omega_from_norm(0.5);
        assert!(matches!(
            surface(&st, omega, Polarization::Te, st.k_from_norm(0.5), 10, ZoneScheme::Reduced),
            Err(BandError::InvalidGrid(_))
        ));
        // beyond the largest layer light line
        assert!(matches!(
            surface(&st, omega, Polarization::Te, st.k_from_norm(5.0), 64, ZoneScheme::Reduced),
            Err(BandError::InvalidGrid(_))
        ));
    }
}
