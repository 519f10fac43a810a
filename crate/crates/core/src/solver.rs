//! Closed geodesics of the conformal half-plane metric by shooting.
//!
//! The weight `sigma` is even in `z`, so a geodesic launched perpendicular to
//! the axis `z = 0` that crosses it perpendicularly again closes up under
//! reflection. Shooting therefore reduces to one scalar root-find: the miss
//! function is the deviation of the tangent line from perpendicular at the
//! designated downward crossing of `z = 0`, folded into `(-pi/2, pi/2]` so
//! that both tangent directions count as perpendicular.
//!
//! Two integrators are kept deliberately independent: fixed-step classic RK4
//! for production, and an embedded Dormand-Prince 5(4) pair at tight
//! tolerance used by [`certify`] to re-verify converged orbits.

use crate::curve::{CrossSection, NormalProjections};
use crate::geometry::{GeometryError, HalfPlanePoint};
use crate::par;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("miss function has no sign change over [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("root-finding did not converge within {iters} iterations (|miss| = {miss:e})")]
    NoConvergence { iters: usize, miss: f64 },
    #[error("trajectory reached the axis floor (r = {r:e}); not a torus cross-section")]
    AxisHit { r: f64 },
    #[error("no crossing within the arclength cap {cap}")]
    ArclengthCapExceeded { cap: f64 },
    #[error("trajectory left the search window (r = {r})")]
    LeftWindow { r: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Shooting state: position, tangent angle, and elapsed Euclidean arclength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingState {
    pub r: f64,
    pub z: f64,
    pub phi: f64,
    pub s_euclid: f64,
}

/// Right-hand side of the geodesic equation in tangent-angle form:
/// `r' = cos phi`, `z' = sin phi`, `phi' = <grad log sigma, n>` with the left
/// normal `n = (-sin phi, cos phi)`, `s' = 1`.
pub fn geodesic_rhs(state: &ShootingState) -> Result<[f64; 4], GeometryError> {
    if !(state.r > 0.0) {
        return Err(GeometryError::NonPositiveRadius(state.r));
    }
    Ok(rhs_raw(state.r, state.z, state.phi))
}

#[inline]
fn rhs_raw(r: f64, z: f64, phi: f64) -> [f64; 4] {
    let (sin_phi, cos_phi) = phi.sin_cos();
    [
        cos_phi,
        sin_phi,
        -sin_phi * (1.0 / r - 0.5 * r) - cos_phi * 0.5 * z,
        1.0,
    ]
}

/// Tunables for the shooting solver. Defaults reproduce the production setup.
#[derive(Debug, Clone)]
pub struct ShootOptions {
    /// Fixed RK4 step in Euclidean arclength.
    pub step: f64,
    /// Abort when `r` drops below this floor.
    pub axis_floor: f64,
    /// Abort when the arclength since launch exceeds this cap.
    pub arclength_cap: f64,
    /// Abort when `r` exceeds this window bound.
    pub window_r_max: f64,
    /// Number of downward `z = 0` crossings before the miss is evaluated
    /// (1 for the embedded torus; immersed tori close after more).
    pub crossings: usize,
    /// Scan granularity used to locate a sign change inside the bracket.
    pub scan_step: f64,
    /// Convergence tolerance on the miss function.
    pub miss_tol: f64,
    /// Iteration cap for bisection plus secant polish.
    pub max_iters: usize,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self {
            step: 1e-4,
            axis_floor: 1e-3,
            arclength_cap: 50.0,
            window_r_max: 50.0,
            crossings: 1,
            scan_step: 0.05,
            miss_tol: 1e-10,
            max_iters: 200,
        }
    }
}

/// Default shooting bracket scanned for a sign change of the miss function.
pub const DEFAULT_BRACKET: (f64, f64) = (0.4, 1.4);

#[derive(Debug, Clone, Copy)]
enum Method {
    FixedRk4,
    /// Embedded 5(4) pair with this relative/absolute tolerance.
    AdaptiveDp45(f64),
}

/// Result of a half-orbit integration up to the designated downward crossing.
#[derive(Debug, Clone)]
pub struct HalfOrbit {
    /// Accepted integration states from launch to the refined crossing.
    pub trajectory: Vec<ShootingState>,
    /// Refined state at the crossing (z located to ~1e-14).
    pub crossing: ShootingState,
    /// Signed perpendicularity miss at the crossing, folded into (-pi/2, pi/2].
    pub miss: f64,
}

/// Converged closed orbit.
#[derive(Debug, Clone)]
pub struct ShootingResult {
    /// Starting radius on the z = 0 axis.
    pub r0: f64,
    /// Closed curve, resampled to uniform sigma-arclength.
    pub curve: CrossSection,
    /// Distance between launch point and the end of a full-period integration.
    pub closure_gap: f64,
    /// |miss| at the far crossing before symmetrization.
    pub perp_defect: f64,
    pub n_points: usize,
}

/// Fold an angle difference into `(-pi/2, pi/2]`; the tangent LINE is
/// perpendicular to the axis when the folded value is zero.
fn fold_half_turn(x: f64) -> f64 {
    let mut m = x - PI * (x / PI).round();
    if m <= -FRAC_PI_2 {
        m += PI;
    }
    m
}

fn miss_of_phi(phi: f64) -> f64 {
    fold_half_turn(phi - FRAC_PI_2)
}

const DP_A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn rk4_step(y: [f64; 3], h: f64) -> [f64; 3] {
    let f = |y: [f64; 3]| {
        let d = rhs_raw(y[0], y[1], y[2]);
        [d[0], d[1], d[2]]
    };
    let k1 = f(y);
    let k2 = f([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1], y[2] + 0.5 * h * k1[2]]);
    let k3 = f([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1], y[2] + 0.5 * h * k2[2]]);
    let k4 = f([y[0] + h * k3[0], y[1] + h * k3[1], y[2] + h * k3[2]]);
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        y[2] + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    ]
}

/// One Dormand-Prince step; returns the 5th-order solution and the max
/// componentwise error estimate against the embedded 4th-order solution.
fn dp45_step(y: [f64; 3], h: f64) -> ([f64; 3], f64) {
    let f = |y: [f64; 3]| {
        let d = rhs_raw(y[0], y[1], y[2]);
        [d[0], d[1], d[2]]
    };
    let mut k = [[0.0f64; 3]; 7];
    k[0] = f(y);
    for stage in 0..6 {
        let mut trial = y;
        for (j, kj) in k.iter().enumerate().take(stage + 1) {
            let a = DP_A[stage][j];
            if a != 0.0 {
                for c in 0..3 {
                    trial[c] += h * a * kj[c];
                }
            }
        }
        k[stage + 1] = f(trial);
    }
    let mut y5 = y;
    let mut err = 0.0f64;
    for c in 0..3 {
        let mut acc5 = 0.0;
        let mut acc4 = 0.0;
        for j in 0..7 {
            acc5 += DP_B5[j] * k[j][c];
            acc4 += DP_B4[j] * k[j][c];
        }
        y5[c] += h * acc5;
        let scale = 1.0 + y[c].abs();
        err = err.max((h * (acc5 - acc4)).abs() / scale);
    }
    (y5, err)
}

/// Refine a bracketed `z` crossing by Newton iteration on the step size taken
/// from `before`; `single_step` must advance the state by an arbitrary
/// substep of the integrator.
fn refine_crossing<F>(before: [f64; 3], h: f64, z_after: f64, single_step: F) -> ([f64; 3], f64)
where
    F: Fn([f64; 3], f64) -> [f64; 3],
{
    let mut dt = if (before[1] - z_after).abs() > 0.0 {
        h * before[1] / (before[1] - z_after)
    } else {
        0.5 * h
    };
    dt = dt.clamp(0.0, h);
    let mut cur = before;
    for _ in 0..60 {
        cur = single_step(before, dt);
        let dz = cur[2].sin();
        if cur[1].abs() < 1e-15 || dz == 0.0 {
            break;
        }
        dt = (dt - cur[1] / dz).clamp(0.0, h);
    }
    (cur, dt)
}

struct OrbitOutcome {
    trajectory: Vec<ShootingState>,
    crossing: ShootingState,
    /// Final upward-crossing state when a full period was requested.
    return_state: Option<ShootingState>,
}

/// Core orbit integrator. Runs from `(r0, 0, pi/2)` until the
/// `opts.crossings`-th downward transversal crossing of `z = 0`; with
/// `full_period` it continues to the next upward crossing, which for a closed
/// orbit returns to the launch point.
fn integrate_orbit(r0: f64, opts: &ShootOptions, method: Method, full_period: bool) -> Result<OrbitOutcome, SolveError> {
    if !(r0 > 0.0) {
        return Err(SolveError::Geometry(GeometryError::NonPositiveRadius(r0)));
    }
    let mut y = [r0, 0.0, FRAC_PI_2];
    let mut s = 0.0f64;
    let mut h = match method {
        Method::FixedRk4 => opts.step,
        Method::AdaptiveDp45(_) => 1e-3,
    };
    let h_max = 1e-2;
    let mut trajectory = vec![ShootingState { r: y[0], z: y[1], phi: y[2], s_euclid: 0.0 }];
    let mut down_seen = 0usize;
    let mut crossing: Option<ShootingState> = None;

    loop {
        let (next, accepted_h) = match method {
            Method::FixedRk4 => (rk4_step(y, h), h),
            Method::AdaptiveDp45(tol) => loop {
                let (trial, err) = dp45_step(y, h);
                let ratio = err / tol;
                if ratio <= 1.0 {
                    let taken = h;
                    h = (0.9 * h * ratio.powf(-0.2).min(5.0)).min(h_max);
                    break (trial, taken);
                }
                h = (0.9 * h * ratio.powf(-0.2).max(0.2)).max(1e-10);
            },
        };

        if next[0] < opts.axis_floor {
            return Err(SolveError::AxisHit { r: next[0] });
        }
        if next[0] > opts.window_r_max {
            return Err(SolveError::LeftWindow { r: next[0] });
        }
        if s + accepted_h > opts.arclength_cap {
            return Err(SolveError::ArclengthCapExceeded { cap: opts.arclength_cap });
        }

        let downward = y[1] > 0.0 && next[1] <= 0.0;
        let upward = y[1] < 0.0 && next[1] >= 0.0;
        let single = |from: [f64; 3], dt: f64| match method {
            Method::FixedRk4 => rk4_step(from, dt),
            Method::AdaptiveDp45(_) => dp45_step(from, dt).0,
        };

        if downward && next[2].sin() < 0.0 {
            let (refined, dt) = refine_crossing(y, accepted_h, next[1], single);
            let state = ShootingState { r: refined[0], z: refined[1], phi: refined[2], s_euclid: s + dt };
            down_seen += 1;
            if down_seen == opts.crossings {
                if crossing.is_none() {
                    trajectory.push(state);
                    crossing = Some(state);
                    if !full_period {
                        return Ok(OrbitOutcome { trajectory, crossing: state, return_state: None });
                    }
                }
            } else {
                trajectory.push(state);
            }
            // fall through: keep integrating from the unrefined step end
        } else if full_period && crossing.is_some() && upward && next[2].sin() > 0.0 {
            let (refined, dt) = refine_crossing(y, accepted_h, next[1], single);
            let state = ShootingState { r: refined[0], z: refined[1], phi: refined[2], s_euclid: s + dt };
            return Ok(OrbitOutcome { trajectory, crossing: crossing.unwrap(), return_state: Some(state) });
        }

        s += accepted_h;
        y = next;
        if crossing.is_none() {
            trajectory.push(ShootingState { r: y[0], z: y[1], phi: y[2], s_euclid: s });
        }
    }
}

/// Integrate from `(r0, 0, pi/2)` to the designated downward crossing of the
/// axis; the returned miss is zero exactly when the orbit closes under
/// reflection.
pub fn integrate_half_orbit(r0: f64, opts: &ShootOptions) -> Result<HalfOrbit, SolveError> {
    let outcome = integrate_orbit(r0, opts, Method::FixedRk4, false)?;
    let miss = miss_of_phi(outcome.crossing.phi);
    Ok(HalfOrbit { trajectory: outcome.trajectory, crossing: outcome.crossing, miss })
}

/// Adaptive-integrator variant of [`integrate_half_orbit`], used as the
/// independent verification route.
pub fn integrate_half_orbit_adaptive(r0: f64, opts: &ShootOptions, tol: f64) -> Result<HalfOrbit, SolveError> {
    let outcome = integrate_orbit(r0, opts, Method::AdaptiveDp45(tol), false)?;
    let miss = miss_of_phi(outcome.crossing.phi);
    Ok(HalfOrbit { trajectory: outcome.trajectory, crossing: outcome.crossing, miss })
}

fn miss_at(r0: f64, opts: &ShootOptions) -> Result<f64, SolveError> {
    Ok(integrate_half_orbit(r0, opts)?.miss)
}

/// Assemble the closed curve from a half orbit by reflecting across `z = 0`.
fn assemble_closed(trajectory: &[ShootingState]) -> Vec<HalfPlanePoint> {
    let mut pts: Vec<HalfPlanePoint> = trajectory
        .iter()
        .map(|s| HalfPlanePoint { r: s.r, z: s.z })
        .collect();
    // a refined crossing can coincide with the preceding step point
    pts.dedup();
    let m = pts.len();
    for i in (1..m - 1).rev() {
        pts.push(HalfPlanePoint { r: pts[i].r, z: -pts[i].z });
    }
    pts
}

/// Find the closed orbit whose starting radius lies in `bracket` and return
/// it resampled to `n_points` uniform sigma-arclength points.
///
/// The bracket is scanned at `opts.scan_step` granularity for a sign change
/// of the miss function (scan points where the integration fails are
/// skipped), then bisection narrows the root and a secant polish drives
/// `|miss|` below `opts.miss_tol`.
pub fn shoot_closed_torus(bracket: (f64, f64), n_points: usize, opts: &ShootOptions) -> Result<ShootingResult, SolveError> {
    let (lo, hi) = bracket;
    if !(hi > lo) || !(lo > 0.0) {
        return Err(SolveError::NoSignChange { lo, hi });
    }

    // scan for a sign change; independent integrations, evaluated in parallel
    let mut scan_points = Vec::new();
    let mut x = lo;
    while x <= hi + 1e-12 {
        scan_points.push(x.min(hi));
        x += opts.scan_step;
    }
    let scan_values = par::map(scan_points.clone(), |r0| miss_at(r0, opts).ok());
    let mut found: Option<(f64, f64, f64, f64)> = None;
    for w in scan_points.windows(2).zip(scan_values.windows(2)) {
        if let ([a, b], [Some(ma), Some(mb)]) = w {
            if ma.signum() != mb.signum() {
                found = Some((*a, *b, *ma, *mb));
                break;
            }
        }
    }
    let (mut a, mut b, mut ma, _mb) = found.ok_or(SolveError::NoSignChange { lo, hi })?;

    // bisection until the interval is tight, then secant polish
    let mut iters = 0usize;
    while iters < opts.max_iters && (b - a) > 1e-13 {
        let mid = 0.5 * (a + b);
        let mm = miss_at(mid, opts)?;
        iters += 1;
        if mm == 0.0 {
            a = mid;
            b = mid;
            break;
        }
        if mm.signum() == ma.signum() {
            a = mid;
            ma = mm;
        } else {
            b = mid;
        }
    }
    let mut x0 = a;
    let mut x1 = b;
    let mut f0 = miss_at(x0, opts)?;
    let mut f1 = if x1 > x0 { miss_at(x1, opts)? } else { f0 };
    let mut best = if f0.abs() < f1.abs() { (x0, f0) } else { (x1, f1) };
    while best.1.abs() > opts.miss_tol && iters < opts.max_iters {
        if (f1 - f0).abs() == 0.0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        let f2 = miss_at(x2, opts)?;
        iters += 1;
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
        if f2.abs() < best.1.abs() {
            best = (x2, f2);
        }
    }
    if best.1.abs() > opts.miss_tol {
        return Err(SolveError::NoConvergence { iters, miss: best.1 });
    }
    let r0 = best.0;

    let half = integrate_half_orbit(r0, opts)?;
    let closed = assemble_closed(&half.trajectory);
    let dense = CrossSection::build(closed)?;
    let curve = dense.resample_sigma_arclength(n_points)?;

    let full = integrate_orbit(r0, opts, Method::FixedRk4, true)?;
    let closure_gap = full
        .return_state
        .map(|s| (s.r - r0).hypot(s.z))
        .unwrap_or(f64::INFINITY);

    Ok(ShootingResult {
        r0,
        curve,
        closure_gap,
        perp_defect: half.miss.abs(),
        n_points,
    })
}

/// One certificate line: a measured quantity against its threshold.
#[derive(Debug, Clone, Serialize)]
pub struct CertCheck {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Machine-readable summary of a converged orbit.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub r0: f64,
    pub sigma_length: f64,
    pub closure_gap: f64,
    pub perp_defect: f64,
    pub max_shrinker_residual: f64,
    pub n_points: usize,
}

/// Re-verification report produced by [`certify`].
#[derive(Debug, Clone, Serialize)]
pub struct CertifyReport {
    pub certificate: Certificate,
    pub checks: Vec<CertCheck>,
    pub warnings: Vec<String>,
    pub passed: bool,
}

/// Resolution below which the certificate emits a warning: the default
/// residual thresholds assume at least this many points.
pub const RESOLUTION_WARNING_FLOOR: usize = 256;

/// Re-verify a shooting result against independent integrations: the miss and
/// closure gap are recomputed with the adaptive 5(4) integrator at tolerance
/// 1e-13, and the sigma-length against a doubled-resolution RK4 orbit.
/// Failures are reported, not thrown.
pub fn certify(result: &ShootingResult, opts: &ShootOptions) -> CertifyReport {
    let mut checks = Vec::new();
    let mut warnings = Vec::new();

    let scalars = result.curve.geometric_scalars();
    let projections: NormalProjections = result.curve.normal_projections();
    let residual = projections.max_shrinker_residual(&result.curve);
    let diameter = {
        let pts = result.curve.points();
        let (mut r_lo, mut r_hi, mut z_lo, mut z_hi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in pts {
            r_lo = r_lo.min(p.r);
            r_hi = r_hi.max(p.r);
            z_lo = z_lo.min(p.z);
            z_hi = z_hi.max(p.z);
        }
        (r_hi - r_lo).hypot(z_hi - z_lo)
    };

    // independent adaptive re-integration
    let adaptive = integrate_half_orbit_adaptive(result.r0, opts, 1e-13);
    let adaptive_miss = adaptive.as_ref().map(|h| h.miss.abs()).unwrap_or(f64::INFINITY);
    let adaptive_closure = integrate_orbit(result.r0, opts, Method::AdaptiveDp45(1e-13), true)
        .ok()
        .and_then(|o| o.return_state)
        .map(|s| (s.r - result.r0).hypot(s.z))
        .unwrap_or(f64::INFINITY);

    // doubled-resolution fixed-step re-integration for the sigma-length
    let fine_opts = ShootOptions { step: 0.5 * opts.step, ..opts.clone() };
    let sigma_refined = integrate_half_orbit(result.r0, &fine_opts)
        .map_err(|e| warnings.push(format!("doubled-resolution re-integration failed: {e}")))
        .ok()
        .and_then(|half| CrossSection::build(assemble_closed(&half.trajectory)).ok())
        .map(|c| c.sigma_length());

    checks.push(CertCheck {
        name: "max_shrinker_residual".into(),
        measured: residual,
        threshold: 1e-4,
        pass: residual < 1e-4,
    });
    checks.push(CertCheck {
        name: "closure_gap".into(),
        measured: result.closure_gap.max(adaptive_closure),
        threshold: 1e-8 * diameter,
        pass: result.closure_gap.max(adaptive_closure) < 1e-8 * diameter,
    });
    checks.push(CertCheck {
        name: "perp_defect".into(),
        measured: result.perp_defect.max(adaptive_miss),
        threshold: 1e-10,
        pass: result.perp_defect.max(adaptive_miss) < 1e-10,
    });
    if let Some(l_fine) = sigma_refined {
        let rel = (result.curve.sigma_length() - l_fine).abs() / l_fine;
        checks.push(CertCheck {
            name: "sigma_length_agreement".into(),
            measured: rel,
            threshold: 1e-6,
            pass: rel < 1e-6,
        });
    }
    // sandwich on the weight from the closed form
    let sandwich_lo = 0.5 * scalars.r_min * (-scalars.radius_max * scalars.radius_max / 4.0).exp();
    let sandwich_ok = sandwich_lo <= scalars.sigma_min + 1e-12
        && scalars.sigma_max <= crate::geometry::sigma_max_global() + 1e-12;
    checks.push(CertCheck {
        name: "sigma_sandwich".into(),
        measured: if sandwich_ok { 0.0 } else { 1.0 },
        threshold: 0.5,
        pass: sandwich_ok,
    });

    if result.n_points < RESOLUTION_WARNING_FLOOR {
        warnings.push(format!(
            "resolution warning: n_points = {} is below {}; residual thresholds assume finer sampling",
            result.n_points, RESOLUTION_WARNING_FLOOR
        ));
    }

    let passed = checks.iter().all(|c| c.pass);
    CertifyReport {
        certificate: Certificate {
            r0: result.r0,
            sigma_length: result.curve.sigma_length(),
            closure_gap: result.closure_gap,
            perp_defect: result.perp_defect,
            max_shrinker_residual: residual,
            n_points: result.n_points,
        },
        checks,
        warnings,
        passed,
    }
}
