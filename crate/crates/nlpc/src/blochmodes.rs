//! Bloch mode profiles over one period and their space-harmonic spectra.
//!
//! The field is reconstructed from the eigenvector of the unit-cell
//! transfer matrix as forward/backward plane-wave amplitudes in each
//! layer; the Fourier coefficients of the periodic part are then exact
//! piecewise integrals, no quadrature involved. The principal component is
//! tracked (E for TE, H for TM).

use num_complex::Complex64;
use serde::Serialize;

use crate::bandstructure::{BandError, CellParams, LayeredStack, Polarization};
use crate::numeric::integral_exp;

#[derive(Debug, thiserror::Error)]
pub enum ModeError {
    #[error(transparent)]
    Band(#[from] BandError),

    #[error("no propagating mode at this point (|half trace| = {half_trace_abs} > 1)")]
    EvanescentMode { half_trace_abs: f64 },

    #[error("a layer has |k_z| * period below 1e-12; plane-wave amplitudes are undefined")]
    GrazingLayer,

    #[error("g_max = {0} is too small; need at least 8")]
    GMaxTooSmall(u32),
}

/// Forward/backward plane-wave amplitudes of one layer.
#[derive(Debug, Clone, Copy)]
pub struct LayerAmplitudes {
    pub forward: Complex64,
    pub backward: Complex64,
    /// Layer z-wavevector (positive real or positive imaginary).
    pub kz: Complex64,
}

/// Bloch field profile of a propagating mode over one period.
///
/// The principal component `u(z)` (E for TE, H for TM) satisfies
/// `u(z + period) = exp(i K_z period) u(z)`; `kz_ext` is the extended-zone
/// wavevector of the forward-flux mode, canonicalized to `[0, 2 pi /
/// period)`. Space harmonics live at `kz_ext + G * 2 pi / period`.
#[derive(Debug, Clone)]
pub struct FieldProfile {
    pub omega: f64,
    pub k_par: f64,
    pub pol: Polarization,
    /// Extended-zone `K_z` of the forward mode, rad/m, in `[0, 2 pi / L)`.
    pub kz_ext: f64,
    pub layer_1: LayerAmplitudes,
    pub layer_2: LayerAmplitudes,
    /// Interface position `a` and period `a + b`, metres.
    pub thickness_1: f64,
    pub period: f64,
    /// Sample positions in `[0, period)` and the field there.
    pub z: Vec<f64>,
    pub field: Vec<Complex64>,
}

const PROFILE_SAMPLES: usize = 512;

impl FieldProfile {
    /// Principal field component at `z` in `[0, period)`.
    pub fn field_at(&self, z: f64) -> Complex64 {
        debug_assert!((0.0..self.period).contains(&z));
        if z < self.thickness_1 {
            let i = Complex64::i();
            self.layer_1.forward * (i * self.layer_1.kz * z).exp()
                + self.layer_1.backward * (-i * self.layer_1.kz * z).exp()
        } else {
            let i = Complex64::i();
            let zz = z - self.thickness_1;
            self.layer_2.forward * (i * self.layer_2.kz * zz).exp()
                + self.layer_2.backward * (-i * self.layer_2.kz * zz).exp()
        }
    }

    /// Periodic part `u(z) * exp(-i kz_ext z)` at `z`.
    pub fn periodic_part_at(&self, z: f64) -> Complex64 {
        self.field_at(z) * (-Complex64::i() * self.kz_ext * z).exp()
    }
}

/// Reconstruct the forward-propagating Bloch mode at `(omega, k_par, pol)`.
///
/// The forward mode is selected by the sign of the z energy flux
/// `Im(conj(u) v)`; its extended-zone `K_z` is the argument of the
/// matching transfer-matrix eigenvalue, lifted into `[0, 2 pi / period)`.
pub fn mode_profile(
    stack: &LayeredStack,
    omega: f64,
    k_par: f64,
    pol: Polarization,
) -> Result<FieldProfile, ModeError> {
    let p = CellParams::new(stack, omega, k_par, pol)?;
    let m = p.matrix();
    let ht = 0.5 * (m[0][0] + m[1][1]);
    if ht.abs() > 1.0 {
        return Err(ModeError::EvanescentMode { half_trace_abs: ht.abs() });
    }
    let period = p.a + p.b;
    let (k1, k2) = (p.k1(), p.k2());
    if k1.norm() * period < 1e-12 || k2.norm() * period < 1e-12 {
        return Err(ModeError::GrazingLayer);
    }

    let kred = ht.acos() / period;
    let i = Complex64::i();
    let mut best: Option<(f64, Complex64, [Complex64; 2])> = None;
    for lam in [(i * kred * period).exp(), (-i * kred * period).exp()] {
        // null vector of (M - lam I): orthogonal (without conjugation) to
        // whichever row has the larger norm
        let r0 = [Complex64::new(m[0][0], 0.0) - lam, Complex64::new(m[0][1], 0.0)];
        let r1 = [Complex64::new(m[1][0], 0.0), Complex64::new(m[1][1], 0.0) - lam];
        let pick = if r0[0].norm_sqr() + r0[1].norm_sqr() >= r1[0].norm_sqr() + r1[1].norm_sqr() {
            r0
        } else {
            r1
        };
        let mut psi = [-pick[1], pick[0]];
        let norm = (psi[0].norm_sqr() + psi[1].norm_sqr()).sqrt();
        psi[0] /= norm;
        psi[1] /= norm;
        let flux = (psi[0].conj() * psi[1]).im;
        if best.as_ref().is_none_or(|(f, _, _)| flux > *f) {
            best = Some((flux, lam, psi));
        }
    }
    let (_, lam, psi) = best.unwrap();

    let theta = lam.arg();
    let kz_ext = if theta >= 0.0 {
        theta / period
    } else {
        (2.0 * std::f64::consts::PI + theta) / period
    };

    // amplitude decomposition in each layer from (u, v) at the layer start
    let decompose = |u: Complex64, v: Complex64, kz: Complex64, gamma: f64| LayerAmplitudes {
        forward: 0.5 * (u + gamma * v / (i * kz)),
        backward: 0.5 * (u - gamma * v / (i * kz)),
        kz,
    };
    let layer_1 = decompose(psi[0], psi[1], k1, p.g1);
    // (u, v) at the internal interface via the layer-1 matrix
    let l1 = layer_matrix_complex(p.s2_1, p.a, p.g1);
    let ua = l1[0][0] * psi[0] + l1[0][1] * psi[1];
    let va = l1[1][0] * psi[0] + l1[1][1] * psi[1];
    let layer_2 = decompose(ua, va, k2, p.g2);

    let mut profile = FieldProfile {
        omega,
        k_par,
        pol,
        kz_ext,
        layer_1,
        layer_2,
        thickness_1: p.a,
        period,
        z: Vec::with_capacity(PROFILE_SAMPLES),
        field: Vec::with_capacity(PROFILE_SAMPLES),
    };
    for j in 0..PROFILE_SAMPLES {
        let z = (j as f64 + 0.5) / PROFILE_SAMPLES as f64 * period;
        profile.z.push(z);
        profile.field.push(profile.field_at(z));
    }
    Ok(profile)
}

fn layer_matrix_complex(s2: f64, d: f64, gamma: f64) -> [[Complex64; 2]; 2] {
    let c = crate::numeric::cos_kd(s2, d);
    let s = crate::numeric::sin_over_k(s2, d);
    [
        [Complex64::new(c, 0.0), Complex64::new(gamma * s, 0.0)],
        [Complex64::new(-s2 * s / gamma, 0.0), Complex64::new(c, 0.0)],
    ]
}

/// One space harmonic: coefficient of `exp(i (kz_ext + g 2pi/L) z)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Harmonic {
    pub g: i32,
    #[serde(skip)]
    pub coefficient: Complex64,
    pub magnitude: f64,
}

/// Parseval-normalized space-harmonic spectrum of a Bloch mode:
/// `sum_G |e_G|^2 = 1` over `G` in `[-g_max, g_max]`.
#[derive(Debug, Clone)]
pub struct HarmonicSpectrum {
    pub entries: Vec<Harmonic>,
}

impl HarmonicSpectrum {
    pub fn coefficient(&self, g: i32) -> Option<Complex64> {
        self.entries.iter().find(|h| h.g == g).map(|h| h.coefficient)
    }
}

/// Exact Fourier coefficients of the periodic part of the profile,
/// `e_G = (1/L) \int_0^L u(z) exp(-i (kz_ext + G 2pi/L) z) dz`,
/// evaluated by closed-form integration of the piecewise plane waves and
/// then unit-normalized.
pub fn fourier_coefficients(
    profile: &FieldProfile,
    g_max: u32,
) -> Result<HarmonicSpectrum, ModeError> {
    if g_max < 8 {
        return Err(ModeError::GMaxTooSmall(g_max));
    }
    let l = profile.period;
    let a = profile.thickness_1;
    let b = l - a;
    let i = Complex64::i();
    let mut entries = Vec::with_capacity(2 * g_max as usize + 1);
    for g in -(g_max as i32)..=(g_max as i32) {
        let q = Complex64::new(profile.kz_ext + g as f64 * 2.0 * std::f64::consts::PI / l, 0.0);
        let l1 = &profile.layer_1;
        let l2 = &profile.layer_2;
        let part_1 = l1.forward * integral_exp(l1.kz - q, a)
            + l1.backward * integral_exp(-l1.kz - q, a);
        let part_2 = l2.forward * integral_exp(l2.kz - q, b)
            + l2.backward * integral_exp(-l2.kz - q, b);
        let e = (part_1 + (-i * q * a).exp() * part_2) / l;
        entries.push(Harmonic { g, coefficient: e, magnitude: 0.0 });
    }
    let norm = entries.iter().map(|h| h.coefficient.norm_sqr()).sum::<f64>().sqrt();
    for h in &mut entries {
        h.coefficient /= norm;
        h.magnitude = h.coefficient.norm();
    }
    Ok(HarmonicSpectrum { entries })
}

/// Index and amplitude fraction of the dominant space harmonic. Under the
/// unit Parseval norm the fraction is `|e_{G*}|` in `[0, 1]`. Ties go to
/// the smaller `|G|`.
pub fn leading_fraction(spectrum: &HarmonicSpectrum) -> (i32, f64) {
    let mut best_g = 0i32;
    let mut best = f64::NEG_INFINITY;
    for h in &spectrum.entries {
        if h.magnitude > best || (h.magnitude == best && h.g.abs() < best_g.abs()) {
            best = h.magnitude;
            best_g = h.g;
        }
    }
    (best_g, best)
}
