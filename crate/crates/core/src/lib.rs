//! Rotationally symmetric self-shrinking tori of mean curvature flow.
//!
//! A rotationally symmetric surface is determined by its cross-section, a
//! closed curve in the half-plane `r > 0`. Equipping the half-plane with the
//! conformal metric `g = sigma^2 (dr^2 + dz^2)`, where
//! `sigma = r/2 * exp(-(r^2+z^2)/4)`, turns cross-sections of self-shrinkers
//! into closed geodesics and Gaussian entropy into curve length. This crate
//!
//! * finds such closed geodesics by shooting ([`solver`]),
//! * assembles the Fourier components of the entropy-stability operator on a
//!   computed cross-section and counts their negative eigenvalues
//!   ([`spectral`]),
//! * and evaluates closed-form upper/lower bounds on those counts, on the
//!   Morse-type index, and on the entropy ([`bounds`]).
//!
//! The `parallel` feature (on by default) runs independent work items —
//! bracket scans and per-mode eigensolves — on a rayon pool; without it the
//! same API runs sequentially.

pub mod bounds;
pub mod curve;
pub mod geometry;
pub mod par;
pub mod solver;
pub mod spectral;
pub mod spline;

pub use bounds::{coarse_index_bounds, entropy_lower_bounds, fine_index_bounds, fine_mode_bounds, IndexReport, ModeBounds};
pub use curve::{CrossSection, GeometricScalars, NormalProjections};
pub use geometry::{gauss_curvature, grad_log_sigma, sigma, HalfPlanePoint};
pub use solver::{certify, integrate_half_orbit, shoot_closed_torus, ShootingResult, ShootingState};
pub use spectral::{mode_spectrum, negative_count, ModeSpectrum};
