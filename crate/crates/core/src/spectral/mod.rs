//! Fourier-mode stability operators on a cross-section and their spectra.
//!
//! On the uniform sigma-arclength grid the conjugated mode operator is
//! `-L_k^sigma = -d^2/ds^2 - P_k` with potential
//! `P_k = sigma^-2 (1 + (1 - k^2)/r^2)`, discretized by second-order central
//! differences into a symmetric cyclic tridiagonal matrix `A`. The mode
//! operator itself acts in the sigma-weighted space: the generalized problem
//! `A eta = lambda D eta` with `D = diag(sigma^-2)` has the eigenvalues of
//! `-L_k` acting on `u = sigma^-1 eta`, and is solved as the symmetric matrix
//! `diag(sigma) A diag(sigma)`.
//!
//! Counts of negative eigenvalues are computed along two independent routes —
//! a dense symmetric eigendecomposition and the O(N) cyclic LDL^T inertia —
//! and must agree; the positive congruence between the conjugated and
//! generalized forms makes their counts a matrix-level identity that is also
//! checked at runtime.

pub mod cyclic;
pub mod galerkin;

use crate::curve::CrossSection;
use crate::geometry::GeometryError;
use cyclic::CyclicTridiag;
use serde::Serialize;
use std::io::Write;
use thiserror::Error;

/// Minimum grid size for spectral assembly.
pub const MIN_SPECTRAL_POINTS: usize = 64;

/// Default zero-tolerance factor: `tau = TAU_FACTOR * ||A||`.
pub const TAU_FACTOR: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("curve must be uniform in sigma-arclength (resample first)")]
    NonUniformCurve,
    #[error("spectral assembly needs at least {min} points, got {got}")]
    TooFewPoints { min: usize, got: usize },
    #[error("negative-count routes disagree: eigendecomposition {eigen}, LDL^T inertia {inertia} (tau = {tau:e})")]
    RouteMismatch { eigen: usize, inertia: usize, tau: f64 },
    #[error("inertia invariance violated for mode {k}: generalized {generalized}, conjugated {conjugated} (nearest eigenvalue to zero: {nearest_to_zero:e})")]
    InertiaMismatch {
        k: u32,
        generalized: usize,
        conjugated: usize,
        nearest_to_zero: f64,
    },
    #[error("mode coverage incomplete: need contiguous modes 0..={required}, missing {missing}")]
    IncompleteModeCoverage { required: u32, missing: u32 },
    #[error("eigenfunction values must match the grid: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("zero vector rejected")]
    ZeroVector,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Sampled potential of one Fourier mode on the uniform grid.
#[derive(Debug, Clone)]
pub struct ModePotential {
    pub k: u32,
    pub values: Vec<f64>,
    pub grid_spacing: f64,
}

impl ModePotential {
    pub fn from_curve(curve: &CrossSection, k: u32) -> Result<Self, SpectralError> {
        check_grid(curve)?;
        let kk = (k as f64) * (k as f64);
        let values = curve
            .points()
            .iter()
            .zip(curve.sigma_values())
            .map(|(p, s)| (1.0 + (1.0 - kk) / (p.r * p.r)) / (s * s))
            .collect();
        let grid_spacing = curve.sigma_length() / curve.len() as f64;
        Ok(Self { k, values, grid_spacing })
    }
}

fn check_grid(curve: &CrossSection) -> Result<(), SpectralError> {
    if curve.len() < MIN_SPECTRAL_POINTS {
        return Err(SpectralError::TooFewPoints { min: MIN_SPECTRAL_POINTS, got: curve.len() });
    }
    if !curve.is_uniform_sigma_arclength() {
        return Err(SpectralError::NonUniformCurve);
    }
    Ok(())
}

/// Discretization of the conjugated operator `-L_k^sigma`: diagonal
/// `2/h^2 - P_k(s_i)`, off-diagonals `-1/h^2` with periodic wrap.
pub fn assemble_conjugated(curve: &CrossSection, k: u32) -> Result<CyclicTridiag, SpectralError> {
    let potential = ModePotential::from_curve(curve, k)?;
    Ok(assemble_periodic(&potential.values, potential.grid_spacing))
}

/// Assemble `-d^2/ds^2 - diag(potential)` on a uniform periodic grid.
pub fn assemble_periodic(potential: &[f64], h: f64) -> CyclicTridiag {
    let n = potential.len();
    let inv_h2 = 1.0 / (h * h);
    let diag = potential.iter().map(|p| 2.0 * inv_h2 - p).collect();
    let off = vec![-inv_h2; n];
    CyclicTridiag::new(diag, off)
}

/// The weighted eigenproblem `A eta = lambda D eta`: returns the
/// finite-difference matrix `A` of `-L_k^sigma` and the diagonal weights
/// `D_i = sigma(s_i)^-2`. Eigenvalues equal those of `-L_k` on
/// `u = sigma^-1 eta`.
pub fn assemble_generalized(curve: &CrossSection, k: u32) -> Result<(CyclicTridiag, Vec<f64>), SpectralError> {
    let a = assemble_conjugated(curve, k)?;
    let d = curve.sigma_values().iter().map(|s| 1.0 / (s * s)).collect();
    Ok((a, d))
}

/// Reduce the generalized problem to the ordinary symmetric matrix
/// `D^-1/2 A D^-1/2 = diag(sigma) A diag(sigma)`.
pub fn symmetrized_generalized(a: &CyclicTridiag, weights: &[f64]) -> CyclicTridiag {
    let d_inv_sqrt: Vec<f64> = weights.iter().map(|w| 1.0 / w.sqrt()).collect();
    a.diagonal_congruence(&d_inv_sqrt)
}

/// Default zero tolerance for a matrix.
pub fn default_tau(matrix: &CyclicTridiag) -> f64 {
    TAU_FACTOR * matrix.norm_estimate()
}

fn dense_eigenvalues_sorted(matrix: &CyclicTridiag) -> Vec<f64> {
    let mut ev: Vec<f64> = matrix
        .to_dense()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Count of eigenvalues below `-tau`, computed by a full symmetric
/// eigendecomposition and independently by the LDL^T inertia; errors if the
/// routes disagree.
pub fn negative_count(matrix: &CyclicTridiag, tau: f64) -> Result<usize, SpectralError> {
    let eigen = dense_eigenvalues_sorted(matrix).iter().filter(|&&l| l < -tau).count();
    let inertia = matrix.inertia_below(-tau);
    if eigen != inertia {
        return Err(SpectralError::RouteMismatch { eigen, inertia, tau });
    }
    Ok(eigen)
}

/// Spectrum of one Fourier mode of the stability operator.
#[derive(Debug, Clone, Serialize)]
pub struct ModeSpectrum {
    pub k: u32,
    pub n: usize,
    pub tau: f64,
    /// Ascending eigenvalues of `-L_k` in the weighted pairing.
    pub eigenvalues: Vec<f64>,
    pub negative_count: usize,
    pub conjugated_negative_count: usize,
}

impl ModeSpectrum {
    /// Smallest-magnitude eigenvalue; borderline counts show up here.
    pub fn nearest_to_zero(&self) -> f64 {
        self.eigenvalues
            .iter()
            .cloned()
            .min_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap())
            .unwrap_or(f64::NAN)
    }

    /// True when some eigenvalue is within `tol` of `lambda`.
    pub fn contains_eigenvalue(&self, lambda: f64, tol: f64) -> bool {
        self.eigenvalues.iter().any(|e| (e - lambda).abs() <= tol)
    }
}

/// Generalized spectrum, negative counts along both routes, and the inertia
/// invariance check for one mode.
///
/// The generalized count is verified dense-vs-inertia; the conjugated count
/// comes from the O(N) inertia route and must match by positive congruence.
pub fn mode_spectrum(curve: &CrossSection, k: u32) -> Result<ModeSpectrum, SpectralError> {
    let (a, weights) = assemble_generalized(curve, k)?;
    let symmetric = symmetrized_generalized(&a, &weights);
    let tau = default_tau(&symmetric);
    let eigenvalues = dense_eigenvalues_sorted(&symmetric);
    let negative_count = eigenvalues.iter().filter(|&&l| l < -tau).count();
    let inertia = symmetric.inertia_below(-tau);
    if negative_count != inertia {
        return Err(SpectralError::RouteMismatch { eigen: negative_count, inertia, tau });
    }
    let tau_conjugated = default_tau(&a);
    let conjugated_negative_count = a.inertia_below(-tau_conjugated);
    if conjugated_negative_count != negative_count {
        let nearest = eigenvalues
            .iter()
            .cloned()
            .min_by(|x, y| x.abs().partial_cmp(&y.abs()).unwrap())
            .unwrap_or(f64::NAN);
        return Err(SpectralError::InertiaMismatch {
            k,
            generalized: negative_count,
            conjugated: conjugated_negative_count,
            nearest_to_zero: nearest,
        });
    }
    Ok(ModeSpectrum {
        k,
        n: curve.len(),
        tau,
        eigenvalues,
        negative_count,
        conjugated_negative_count,
    })
}

/// Weighted residual `||(-L_k) u - lambda u|| / ||u||` of a candidate
/// eigenpair, evaluated through the generalized discretization.
pub fn eigenfunction_residual(curve: &CrossSection, u: &[f64], lambda: f64, k: u32) -> Result<f64, SpectralError> {
    let n = curve.len();
    if u.len() != n {
        return Err(SpectralError::LengthMismatch { expected: n, got: u.len() });
    }
    let norm_u_sq: f64 = u.iter().map(|v| v * v).sum();
    if norm_u_sq == 0.0 {
        return Err(SpectralError::ZeroVector);
    }
    let (a, weights) = assemble_generalized(curve, k)?;
    let sigma = curve.sigma_values();
    let eta: Vec<f64> = (0..n).map(|i| sigma[i] * u[i]).collect();
    let diag = a.diag();
    let off = a.off();
    let mut residual_sq = 0.0;
    for i in 0..n {
        let prev = (i + n - 1) % n;
        let next = (i + 1) % n;
        let a_eta = diag[i] * eta[i] + off[i] * eta[next] + off[prev] * eta[prev];
        let res = sigma[i] * (a_eta - lambda * weights[i] * eta[i]);
        residual_sq += res * res;
    }
    Ok((residual_sq / norm_u_sq).sqrt())
}

/// Smallest integer `k` with `k^2 >= 1 + r_max^2`; modes at or beyond it have
/// no negative eigenvalues, so spectra are only needed for `k` below it.
pub fn required_k_max(r_max: f64) -> u32 {
    (1.0 + r_max * r_max).sqrt().ceil() as u32
}

/// Index aggregation over computed mode spectra.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IndexAggregate {
    /// `-4 + i_0 + 2 sum_{k>=1} i_k`: negative eigenvalues of the stability
    /// operator excluding the four translation/dilation modes.
    pub index: i64,
    /// `i_0 + 2 sum_{k>=1} i_k` before the exclusion.
    pub raw_negative_count: i64,
}

/// Aggregate per-mode negative counts into the index. `spectra` must cover
/// contiguous modes `0..=k_max` with `k_max >= sqrt(1 + r_max^2)`.
pub fn index_aggregate(spectra: &[ModeSpectrum], r_max: f64) -> Result<IndexAggregate, SpectralError> {
    let required = required_k_max(r_max);
    for k in 0..=required {
        if !spectra.iter().any(|s| s.k == k) {
            return Err(SpectralError::IncompleteModeCoverage { required, missing: k });
        }
    }
    let mut raw: i64 = 0;
    for s in spectra {
        let c = s.negative_count as i64;
        raw += if s.k == 0 { c } else { 2 * c };
    }
    Ok(IndexAggregate { index: raw - 4, raw_negative_count: raw })
}

/// Write an eigenfunction sampled on the sigma-arclength grid as CSV with
/// header `s,u`.
pub fn write_eigenfunction_csv<W: Write>(curve: &CrossSection, u: &[f64], mut writer: W) -> Result<(), std::io::Error> {
    let h = curve.sigma_length() / curve.len() as f64;
    writer.write_all(b"s,u\n")?;
    for (i, v) in u.iter().enumerate() {
        writeln!(writer, "{},{}", i as f64 * h, v)?;
    }
    Ok(())
}
