//! The conformal weight `sigma` and its closed-form derived quantities.
//!
//! Everything here is a pure function of a point in the open half-plane
//! `r > 0`. The weight is `sigma = r/2 * exp(-|x|^2/4)` with `|x|^2 = r^2 +
//! z^2`; its maximum over the half-plane is `1/sqrt(2e)`, attained at
//! `(sqrt(2), 0)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("point has non-positive distance to the rotation axis (r = {0})")]
    NonPositiveRadius(f64),
    #[error("closed curve needs at least {min} points, got {got}")]
    TooFewPoints { min: usize, got: usize },
    #[error("consecutive duplicate point at index {0}")]
    DuplicatePoint(usize),
}

/// A point `(r, z)` of the open half-plane `r > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlanePoint {
    /// Distance to the rotation axis.
    pub r: f64,
    /// Height along the axis.
    pub z: f64,
}

impl HalfPlanePoint {
    pub fn new(r: f64, z: f64) -> Result<Self, GeometryError> {
        if !(r > 0.0) {
            return Err(GeometryError::NonPositiveRadius(r));
        }
        Ok(Self { r, z })
    }

    /// Squared distance to the origin.
    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.r * self.r + self.z * self.z
    }
}

/// The conformal weight `sigma(r, z) = r/2 * exp(-(r^2+z^2)/4)`.
#[inline]
pub fn sigma(p: HalfPlanePoint) -> f64 {
    0.5 * p.r * (-p.norm_sq() / 4.0).exp()
}

/// Checked variant of [`sigma`] for raw coordinates.
pub fn sigma_checked(r: f64, z: f64) -> Result<f64, GeometryError> {
    HalfPlanePoint::new(r, z).map(sigma)
}

/// Gradient of `log sigma`: `(1/r - r/2, -z/2)`.
#[inline]
pub fn grad_log_sigma(p: HalfPlanePoint) -> [f64; 2] {
    [1.0 / p.r - 0.5 * p.r, -0.5 * p.z]
}

/// Gaussian curvature of the half-plane with metric `sigma^2 (dr^2 + dz^2)`,
/// `K = sigma^-2 (1 + 1/r^2)`. Strictly positive.
#[inline]
pub fn gauss_curvature(p: HalfPlanePoint) -> f64 {
    let s = sigma(p);
    (1.0 + 1.0 / (p.r * p.r)) / (s * s)
}

/// Global maximum of `sigma` over the half-plane, `1/sqrt(2e)`.
pub fn sigma_max_global() -> f64 {
    1.0 / (2.0 * std::f64::consts::E).sqrt()
}
