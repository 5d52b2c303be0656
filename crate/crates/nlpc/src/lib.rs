//! Design toolkit for one-dimensional nonlinear photonic crystals used as
//! sources of entangled photon pairs.
//!
//! The crate solves the Bloch dispersion relation of a two-layer periodic
//! stack via the unit-cell transfer matrix, reconstructs Bloch mode profiles
//! and their space-harmonic spectra, samples dispersion surfaces in reduced
//! or repeated zone schemes, finds type-I/type-II down-conversion
//! phase-matching solutions (planar intersections, full emission cones and
//! cone crossings), and evaluates a four-factor conversion-efficiency model
//! for zinc-blende nonlinear media.
//!
//! Quantities are SI throughout (`rad/s`, `rad/m`, metres). Normalized units
//! follow the usual photonic-crystal convention: frequencies as
//! `omega * period / (pi * c)` and wavevectors as `k * period / pi`.

// validation guards are written `!(x > 0.0)` on purpose: the negation
// rejects NaN, which `x <= 0.0` would let through
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bandstructure;
pub mod blochmodes;
pub mod config;
pub mod efficiency;
pub mod materials;
mod numeric;
pub mod phasematch;
pub mod surfaces;

/// Speed of light in vacuum, m/s.
pub const C_LIGHT: f64 = 299_792_458.0;

pub use bandstructure::{BlochKz, LayeredStack, Polarization};
pub use blochmodes::{FieldProfile, HarmonicSpectrum};
pub use materials::MaterialModel;
pub use phasematch::{EmissionCone, EntanglementDirections, MatchSolution, PumpSpec};
pub use surfaces::DispersionSurface;
