//! Discrete closed cross-sections in the half-plane.
//!
//! A [`CrossSection`] is an ordered list of points (no duplicated endpoint)
//! together with cached geometric data: the weight `sigma` at each point,
//! unwrapped tangent angles, Euclidean curvature, per-segment lengths in the
//! conformal metric, and the total length. Segment lengths are measured by
//! 4-point Gauss-Legendre quadrature along the periodic cubic interpolant of
//! the points, so the total agrees with the length of the underlying smooth
//! curve to interpolation order rather than to chord order.
//!
//! Orientation convention: the normal is the left normal
//! `n = (-sin phi, cos phi)` of the oriented curve, and the scalar mean
//! curvature is `H = -kappa` with `kappa = d phi / ds`. Individual signs
//! depend on this choice; spectra and bound evaluations do not.

use crate::geometry::{sigma, GeometryError, HalfPlanePoint};
use crate::spline::PeriodicSpline;
use std::io::{BufRead, Write};
use thiserror::Error;

/// Minimum number of points in a closed cross-section.
pub const MIN_POINTS: usize = 16;

/// Relative tolerance on per-segment lengths for the uniform-parametrization flag.
pub const UNIFORMITY_TOL: f64 = 1e-8;

/// 4-point Gauss-Legendre nodes and weights on [0, 1].
const GL_NODES: [f64; 4] = [
    0.069431844202973712,
    0.330009478207571868,
    0.669990521792428132,
    0.930568155797026288,
];
const GL_WEIGHTS: [f64; 4] = [
    0.173927422568726929,
    0.326072577431273071,
    0.326072577431273071,
    0.173927422568726929,
];

#[derive(Debug, Error)]
pub enum CurveIoError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected two comma-separated numbers, got {content:?}")]
    Parse { line: usize, content: String },
    #[error("missing or malformed header, expected \"r,z\"")]
    Header,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Extrema of a cross-section used by the closed-form bounds.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GeometricScalars {
    /// Smallest distance to the rotation axis.
    pub r_min: f64,
    /// Largest distance to the rotation axis.
    pub r_max: f64,
    /// Largest distance to the origin.
    pub radius_max: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

/// Pointwise normal projections along the curve with the left-normal convention.
#[derive(Debug, Clone)]
pub struct NormalProjections {
    /// `<e_r, n>` at each point.
    pub e_r_perp: Vec<f64>,
    /// `<x, n>` at each point.
    pub x_perp: Vec<f64>,
    /// Scalar curve mean curvature `H = -kappa`.
    pub h_gamma: Vec<f64>,
    /// Mean curvature of the surface of revolution restricted to the curve,
    /// `H_gamma + e_r_perp / r`.
    pub h_sigma_restricted: Vec<f64>,
}

impl NormalProjections {
    /// Max-norm residual of the self-shrinker equation
    /// `H_gamma - x_perp/2 + e_r_perp/r = 0`.
    pub fn max_shrinker_residual(&self, curve: &CrossSection) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.h_gamma.len() {
            let res = self.h_gamma[i] - 0.5 * self.x_perp[i] + self.e_r_perp[i] / curve.points()[i].r;
            worst = worst.max(res.abs());
        }
        worst
    }
}

/// A closed discrete curve in the half-plane with cached geometric fields.
#[derive(Debug, Clone)]
pub struct CrossSection {
    points: Vec<HalfPlanePoint>,
    sigma_values: Vec<f64>,
    tangent_angle: Vec<f64>,
    euclid_curvature: Vec<f64>,
    segment_sigma_lengths: Vec<f64>,
    sigma_length: f64,
    is_uniform_sigma_arclength: bool,
    total_turning: f64,
}

/// Transient spline representation of a curve, shared by construction and
/// resampling.
struct CurveSpline {
    r: PeriodicSpline,
    z: PeriodicSpline,
    /// Knot parameter of each point (provisional chord arclength).
    knots: Vec<f64>,
    /// Sigma-length of each spline segment.
    segments: Vec<f64>,
}

impl CurveSpline {
    fn density(&self, t: f64) -> f64 {
        let r = self.r.eval(t);
        let z = self.z.eval(t);
        let speed = self.r.deriv(t).hypot(self.z.deriv(t));
        0.5 * r * (-(r * r + z * z) / 4.0).exp() * speed
    }

    fn segment_integral(&self, from: f64, to: f64) -> f64 {
        let mut acc = 0.0;
        for (node, weight) in GL_NODES.iter().zip(&GL_WEIGHTS) {
            acc += weight * self.density(from + node * (to - from));
        }
        acc * (to - from)
    }

    fn point_at(&self, t: f64) -> Result<HalfPlanePoint, GeometryError> {
        HalfPlanePoint::new(self.r.eval(t), self.z.eval(t))
    }
}

fn fit_spline(points: &[HalfPlanePoint]) -> CurveSpline {
    let n = points.len();
    // provisional parametrization: sigma-weighted chord lengths
    let chord_sigma = |p: HalfPlanePoint, q: HalfPlanePoint| -> f64 {
        let d = (q.r - p.r).hypot(q.z - p.z);
        let mut acc = 0.0;
        for (node, weight) in GL_NODES.iter().zip(&GL_WEIGHTS) {
            let r = p.r + node * (q.r - p.r);
            let z = p.z + node * (q.z - p.z);
            acc += weight * 0.5 * r * (-(r * r + z * z) / 4.0).exp();
        }
        acc * d
    };
    let mut knots = vec![0.0; n];
    for i in 1..n {
        knots[i] = knots[i - 1] + chord_sigma(points[i - 1], points[i]);
    }
    let period = knots[n - 1] + chord_sigma(points[n - 1], points[0]);
    let r = PeriodicSpline::new(knots.clone(), points.iter().map(|p| p.r).collect(), period);
    let z = PeriodicSpline::new(knots.clone(), points.iter().map(|p| p.z).collect(), period);
    let mut spline = CurveSpline { r, z, knots, segments: Vec::new() };
    let mut segments = vec![0.0; n];
    for i in 0..n {
        let from = spline.knots[i];
        let to = if i + 1 == n { period } else { spline.knots[i + 1] };
        segments[i] = spline.segment_integral(from, to);
    }
    spline.segments = segments;
    spline
}

impl CrossSection {
    /// Build a cross-section from an ordered closed point list (the last point
    /// connects back to the first; do not duplicate it).
    pub fn build(points: Vec<HalfPlanePoint>) -> Result<Self, GeometryError> {
        let n = points.len();
        if n < MIN_POINTS {
            return Err(GeometryError::TooFewPoints { min: MIN_POINTS, got: n });
        }
        for i in 0..n {
            let p = points[i];
            if !(p.r > 0.0) {
                return Err(GeometryError::NonPositiveRadius(p.r));
            }
            let q = points[(i + 1) % n];
            if p.r == q.r && p.z == q.z {
                return Err(GeometryError::DuplicatePoint(i));
            }
        }
        let spline = fit_spline(&points);
        Ok(Self::from_validated(points, spline))
    }

    fn from_validated(points: Vec<HalfPlanePoint>, spline: CurveSpline) -> Self {
        let n = points.len();
        let sigma_values: Vec<f64> = points.iter().map(|&p| sigma(p)).collect();
        let segment_sigma_lengths = spline.segments.clone();
        let sigma_length: f64 = segment_sigma_lengths.iter().sum();
        let mean = sigma_length / n as f64;
        let max_dev = segment_sigma_lengths
            .iter()
            .map(|s| (s - mean).abs())
            .fold(0.0f64, f64::max);
        let is_uniform = max_dev < UNIFORMITY_TOL * sigma_length;

        let (tangent_angle, euclid_curvature, total_turning) = if is_uniform {
            tangent_and_curvature_uniform(&points, &sigma_values, mean)
        } else {
            tangent_and_curvature_general(&points)
        };

        Self {
            points,
            sigma_values,
            tangent_angle,
            euclid_curvature,
            segment_sigma_lengths,
            sigma_length,
            is_uniform_sigma_arclength: is_uniform,
            total_turning,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[HalfPlanePoint] {
        &self.points
    }

    pub fn sigma_values(&self) -> &[f64] {
        &self.sigma_values
    }

    /// Unwrapped tangent angles; consecutive entries differ by less than pi.
    pub fn tangent_angle(&self) -> &[f64] {
        &self.tangent_angle
    }

    pub fn euclid_curvature(&self) -> &[f64] {
        &self.euclid_curvature
    }

    pub fn segment_sigma_lengths(&self) -> &[f64] {
        &self.segment_sigma_lengths
    }

    /// Total curve length in the conformal metric. For the cross-section of a
    /// shrinking torus this is its Gaussian entropy.
    pub fn sigma_length(&self) -> f64 {
        self.sigma_length
    }

    pub fn is_uniform_sigma_arclength(&self) -> bool {
        self.is_uniform_sigma_arclength
    }

    /// Accumulated turning of the tangent over one loop; -2*pi or +2*pi for
    /// an embedded cross-section (diagnostic, not enforced: immersed curves
    /// may differ).
    pub fn total_turning(&self) -> f64 {
        self.total_turning
    }

    /// Extrema over the discrete points.
    pub fn geometric_scalars(&self) -> GeometricScalars {
        let mut r_min = f64::INFINITY;
        let mut r_max = f64::NEG_INFINITY;
        let mut radius_max = 0.0f64;
        let mut sigma_min = f64::INFINITY;
        let mut sigma_max = f64::NEG_INFINITY;
        for (p, &s) in self.points.iter().zip(&self.sigma_values) {
            r_min = r_min.min(p.r);
            r_max = r_max.max(p.r);
            radius_max = radius_max.max(p.norm_sq().sqrt());
            sigma_min = sigma_min.min(s);
            sigma_max = sigma_max.max(s);
        }
        GeometricScalars { r_min, r_max, radius_max, sigma_min, sigma_max }
    }

    /// Pointwise projections onto the left normal.
    pub fn normal_projections(&self) -> NormalProjections {
        let n = self.len();
        let mut e_r_perp = vec![0.0; n];
        let mut x_perp = vec![0.0; n];
        let mut h_gamma = vec![0.0; n];
        let mut h_sigma_restricted = vec![0.0; n];
        for i in 0..n {
            let (sin_phi, cos_phi) = self.tangent_angle[i].sin_cos();
            let p = self.points[i];
            e_r_perp[i] = -sin_phi;
            x_perp[i] = -p.r * sin_phi + p.z * cos_phi;
            h_gamma[i] = -self.euclid_curvature[i];
            h_sigma_restricted[i] = h_gamma[i] + e_r_perp[i] / p.r;
        }
        NormalProjections { e_r_perp, x_perp, h_gamma, h_sigma_restricted }
    }

    /// Resample to `n_out` points equally spaced in sigma-arclength.
    ///
    /// Positions come from the periodic cubic interpolant; each target
    /// arclength is solved by Newton iteration on the quadrature of the
    /// interpolant, so the output is uniform to near machine precision and
    /// resampling an already-uniform curve reproduces it.
    pub fn resample_sigma_arclength(&self, n_out: usize) -> Result<Self, GeometryError> {
        if n_out < MIN_POINTS {
            return Err(GeometryError::TooFewPoints { min: MIN_POINTS, got: n_out });
        }
        if self.is_uniform_sigma_arclength && n_out == self.len() {
            return Ok(self.clone());
        }
        let spline = fit_spline(&self.points);
        let n = self.len();
        let mut cumulative = vec![0.0; n + 1];
        for i in 0..n {
            cumulative[i + 1] = cumulative[i] + spline.segments[i];
        }
        let total = cumulative[n];
        let period = spline.r.period();

        let mut out = Vec::with_capacity(n_out);
        let mut seg = 0usize;
        for j in 0..n_out {
            let target = total * j as f64 / n_out as f64;
            while seg + 1 < n && cumulative[seg + 1] < target {
                seg += 1;
            }
            let lower = spline.knots[seg];
            let upper = if seg + 1 == n { period } else { spline.knots[seg + 1] };
            let want = target - cumulative[seg];
            // Newton on t -> integral over [lower, t] minus want
            let frac = (want / spline.segments[seg]).clamp(0.0, 1.0);
            let mut t = lower + frac * (upper - lower);
            for _ in 0..12 {
                let f = spline.segment_integral(lower, t) - want;
                let d = spline.density(t);
                if !(d > 0.0) {
                    break;
                }
                let step = f / d;
                t = (t - step).clamp(lower, upper);
                if step.abs() < 1e-15 * (1.0 + t.abs()) {
                    break;
                }
            }
            out.push(spline.point_at(t)?);
        }
        CrossSection::build(out)
    }

    /// Reverse the orientation. Keeps the first point first so tests can
    /// compare pointwise.
    pub fn reversed(&self) -> Result<Self, GeometryError> {
        let mut pts = self.points.clone();
        pts[1..].reverse();
        CrossSection::build(pts)
    }
}

/// 4th-order central differences on the uniform sigma-arclength grid.
/// Tangents come from position differences, curvature from differences of the
/// unwrapped tangent angle, both mapped to Euclidean arclength through sigma.
fn tangent_and_curvature_uniform(
    points: &[HalfPlanePoint],
    sigma_values: &[f64],
    step: f64,
) -> (Vec<f64>, Vec<f64>, f64) {
    let n = points.len();
    let mut raw = vec![0.0; n];
    for i in 0..n {
        let at = |offset: isize| points[((i as isize + n as isize + offset) % n as isize) as usize];
        let dr = -at(2).r + 8.0 * at(1).r - 8.0 * at(-1).r + at(-2).r;
        let dz = -at(2).z + 8.0 * at(1).z - 8.0 * at(-1).z + at(-2).z;
        raw[i] = dz.atan2(dr);
    }
    let (unwrapped, total_turning) = unwrap_angles(&raw);
    let extended = |i: isize| -> f64 {
        let n_i = n as isize;
        let w = i.rem_euclid(n_i) as usize;
        let wraps = ((i - w as isize) / n_i) as f64;
        unwrapped[w] + wraps * total_turning
    };
    let mut curvature = vec![0.0; n];
    for i in 0..n {
        let ii = i as isize;
        let dphi = -extended(ii + 2) + 8.0 * extended(ii + 1) - 8.0 * extended(ii - 1) + extended(ii - 2);
        // d phi / ds_euclid = sigma * d phi / ds_sigma
        curvature[i] = sigma_values[i] * dphi / (12.0 * step);
    }
    (unwrapped, curvature, total_turning)
}

/// Weighted 3-point central differences in Euclidean arclength for curves
/// that are not uniformly parametrized. Second order on smoothly graded grids.
fn tangent_and_curvature_general(points: &[HalfPlanePoint]) -> (Vec<f64>, Vec<f64>, f64) {
    let n = points.len();
    let chord = |i: usize| -> f64 {
        let p = points[i];
        let q = points[(i + 1) % n];
        (q.r - p.r).hypot(q.z - p.z)
    };
    let chords: Vec<f64> = (0..n).map(chord).collect();
    let diff = |prev: f64, here: f64, next: f64, a: f64, b: f64| -> f64 {
        (next * a * a - prev * b * b + here * (b * b - a * a)) / (a * b * (a + b))
    };
    let mut raw = vec![0.0; n];
    for i in 0..n {
        let im = (i + n - 1) % n;
        let ip = (i + 1) % n;
        let a = chords[im];
        let b = chords[i];
        let dr = diff(points[im].r, points[i].r, points[ip].r, a, b);
        let dz = diff(points[im].z, points[i].z, points[ip].z, a, b);
        raw[i] = dz.atan2(dr);
    }
    let (unwrapped, total_turning) = unwrap_angles(&raw);
    let mut curvature = vec![0.0; n];
    for i in 0..n {
        let im = (i + n - 1) % n;
        let ip = (i + 1) % n;
        let a = chords[im];
        let b = chords[i];
        let prev = if i == 0 { unwrapped[im] - total_turning } else { unwrapped[im] };
        let next = if i == n - 1 { unwrapped[ip] + total_turning } else { unwrapped[ip] };
        curvature[i] = diff(prev, unwrapped[i], next, a, b);
    }
    (unwrapped, curvature, total_turning)
}

/// Accumulate angles continuously along the curve; returns the unwrapped
/// sequence and the total turning over one loop.
fn unwrap_angles(raw: &[f64]) -> (Vec<f64>, f64) {
    use std::f64::consts::PI;
    let n = raw.len();
    let mut unwrapped = vec![0.0; n];
    unwrapped[0] = raw[0];
    for i in 1..n {
        let mut d = raw[i] - raw[i - 1];
        while d > PI {
            d -= 2.0 * PI;
        }
        while d < -PI {
            d += 2.0 * PI;
        }
        unwrapped[i] = unwrapped[i - 1] + d;
    }
    let mut d = raw[0] - raw[n - 1];
    while d > PI {
        d -= 2.0 * PI;
    }
    while d < -PI {
        d += 2.0 * PI;
    }
    let total_turning = unwrapped[n - 1] + d - unwrapped[0];
    (unwrapped, total_turning)
}

/// Write points as CSV with header `r,z`, one point per row, LF endings.
pub fn write_curve_csv<W: Write>(points: &[HalfPlanePoint], mut writer: W) -> Result<(), CurveIoError> {
    writer.write_all(b"r,z\n")?;
    for p in points {
        writeln!(writer, "{},{}", p.r, p.z)?;
    }
    Ok(())
}

/// Read a closed curve from CSV with header `r,z`.
pub fn read_curve_csv<R: BufRead>(reader: R) -> Result<Vec<HalfPlanePoint>, CurveIoError> {
    let mut lines = reader.lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == "r,z" => {}
        Some(Ok(_)) | None => return Err(CurveIoError::Header),
        Some(Err(e)) => return Err(CurveIoError::Io(e)),
    }
    let mut points = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut parts = trimmed.split(',');
        let parse = |s: Option<&str>| s.and_then(|v| v.trim().parse::<f64>().ok());
        match (parse(parts.next()), parse(parts.next()), parts.next()) {
            (Some(r), Some(z), None) => points.push(HalfPlanePoint::new(r, z)?),
            _ => {
                return Err(CurveIoError::Parse { line: idx + 2, content: trimmed.to_string() });
            }
        }
    }
    Ok(points)
}
