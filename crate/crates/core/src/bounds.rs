//! Closed-form bounds on per-mode negative-eigenvalue counts, on the index,
//! and on the entropy, plus the consistency report pitting them against
//! computed spectra.
//!
//! With `l` the sigma-length and `Q_k = (l/2pi) sigma^-1 sqrt(1 + (1-k^2)/r^2)`
//! evaluated where the radicand is nonnegative:
//!
//! * `i_k >= 2 floor(min Q_k) + 1` when `k^2 <= 1 + r_min^2`, dropping to
//!   `2 Q_k - 1` in the exceptional case where `Q_k` is constant and integer;
//! * `i_k <= 2 ceil(max Q_k) - 1` when `k^2 < 1 + r_max^2`;
//! * `i_k = 0` when `k^2 >= 1 + r_max^2`.
//!
//! Aggregation uses `index = -4 + i_0 + 2 sum_{k>=1} i_k`. The coarse bounds
//! depend only on the entropy, `r_min`, and the outer radius `R`:
//! `3 sqrt(2e)/pi * F - 7 < index < (2/pi)(F/r_min) e^{R^2/4}(3 + 1/r_min + 2R) + 2R - 1`.

use crate::curve::CrossSection;
use crate::spectral::{self, ModeSpectrum, SpectralError};
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

/// Absolute tolerance for declaring the bound quantity constant and integer.
pub const EXCEPTIONAL_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("invalid bound inputs: {0}")]
    Domain(String),
    #[error("mode {k}: computed count {count} violates bounds [{lower:?}, {upper}]")]
    BoundViolation { k: u32, count: usize, lower: Option<i64>, upper: i64 },
    #[error("coarse sandwich violated: index {index} not inside ({lower}, {upper})")]
    CoarseViolation { index: i64, lower: f64, upper: f64 },
    #[error("entropy {entropy} below its {which} lower bound {bound}")]
    EntropyViolation { entropy: f64, bound: f64, which: &'static str },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Integer bounds on the negative count of one mode.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct ModeBounds {
    pub k: u32,
    /// Lower bound; absent when `k^2 > 1 + r_min^2`.
    pub lower: Option<i64>,
    /// Upper bound; zero exactly when `k^2 >= 1 + r_max^2`.
    pub upper: i64,
    /// True when the bound quantity is constant and integer on the grid (the
    /// lower bound then loses 2).
    pub exceptional: bool,
}

/// Bound kernel on sampled values of `Q_k` (already restricted to points
/// where the radicand is nonnegative).
pub(crate) fn mode_bounds_from_q(k: u32, q_defined: &[f64], lower_applies: bool, upper_applies: bool) -> ModeBounds {
    if !upper_applies {
        // k^2 >= 1 + r_max^2: no negative eigenvalues at all
        return ModeBounds { k, lower: if lower_applies { Some(0) } else { None }, upper: 0, exceptional: false };
    }
    let q_min = q_defined.iter().cloned().fold(f64::INFINITY, f64::min);
    let q_max = q_defined.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exceptional = (q_max - q_min) < EXCEPTIONAL_TOL && (q_min - q_min.round()).abs() < EXCEPTIONAL_TOL;
    let upper = 2 * (q_max.ceil() as i64) - 1;
    let lower = if lower_applies {
        Some(if exceptional {
            2 * (q_min.round() as i64) - 1
        } else {
            2 * (q_min.floor() as i64) + 1
        })
    } else {
        None
    };
    ModeBounds { k, lower, upper, exceptional }
}

/// Evaluate the per-mode bounds on a computed curve.
pub fn fine_mode_bounds(curve: &CrossSection, k: u32) -> ModeBounds {
    let scalars = curve.geometric_scalars();
    let kk = (k as f64) * (k as f64);
    let upper_applies = kk < 1.0 + scalars.r_max * scalars.r_max;
    let lower_applies = kk <= 1.0 + scalars.r_min * scalars.r_min;
    let l_over_2pi = curve.sigma_length() / (2.0 * PI);
    let q: Vec<f64> = curve
        .points()
        .iter()
        .zip(curve.sigma_values())
        .filter_map(|(p, s)| {
            let radicand = 1.0 + (1.0 - kk) / (p.r * p.r);
            (radicand >= 0.0).then(|| l_over_2pi / s * radicand.sqrt())
        })
        .collect();
    mode_bounds_from_q(k, &q, lower_applies, upper_applies)
}

/// Aggregated fine bounds on the index.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct FineIndexBounds {
    /// Raw aggregation of the per-mode lower bounds; can be vacuous
    /// (negative) at low entropy.
    pub lower_raw: i64,
    /// Raw lower bound clamped at the trivial bound 0.
    pub lower_clamped: i64,
    pub upper: i64,
}

/// Aggregate per-mode bounds into index bounds. Requires contiguous coverage
/// from mode 0 through the first certified-zero mode.
pub fn fine_index_bounds(per_mode: &[ModeBounds]) -> Result<FineIndexBounds, BoundsError> {
    if per_mode.is_empty() || per_mode[0].k != 0 {
        return Err(BoundsError::Domain("per-mode bounds must start at k = 0".into()));
    }
    for w in per_mode.windows(2) {
        if w[1].k != w[0].k + 1 {
            return Err(BoundsError::Domain(format!("mode list skips k = {}", w[0].k + 1)));
        }
    }
    if per_mode.last().unwrap().upper != 0 {
        return Err(BoundsError::Domain("coverage must extend to the first mode with upper bound 0".into()));
    }
    let mut upper: i64 = -4;
    let mut lower: i64 = -4;
    for b in per_mode {
        let weight = if b.k == 0 { 1 } else { 2 };
        upper += weight * b.upper;
        lower += weight * b.lower.unwrap_or(0);
    }
    Ok(FineIndexBounds { lower_raw: lower, lower_clamped: lower.max(0), upper })
}

/// Coarse closed-form bounds from entropy, inner radius, and outer radius.
pub fn coarse_index_bounds(entropy: f64, r_min: f64, radius_max: f64) -> Result<(f64, f64), BoundsError> {
    if !(entropy > 0.0) {
        return Err(BoundsError::Domain(format!("entropy must be positive, got {entropy}")));
    }
    if !(r_min > 0.0 && r_min <= radius_max) {
        return Err(BoundsError::Domain(format!(
            "need 0 < r_min <= R, got r_min = {r_min}, R = {radius_max}"
        )));
    }
    let lower = 3.0 * (2.0 * std::f64::consts::E).sqrt() / PI * entropy - 7.0;
    let upper = 2.0 / PI * entropy / r_min
        * (radius_max * radius_max / 4.0).exp()
        * (3.0 + 1.0 / r_min + 2.0 * radius_max)
        + 2.0 * radius_max
        - 1.0;
    Ok((lower, upper))
}

/// Entropy lower bounds: `pi sqrt(2) min(r e^{-|x|^2/4})` from the horizontal
/// translation mode and `pi min(r^2 e^{-|x|^2/4})` from the dilation mode.
pub fn entropy_lower_bounds(curve: &CrossSection) -> (f64, f64) {
    let mut min_translation = f64::INFINITY;
    let mut min_dilation = f64::INFINITY;
    for p in curve.points() {
        let weight = (-p.norm_sq() / 4.0).exp();
        min_translation = min_translation.min(p.r * weight);
        min_dilation = min_dilation.min(p.r * p.r * weight);
    }
    (PI * 2f64.sqrt() * min_translation, PI * min_dilation)
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeEntry {
    pub k: u32,
    pub negative_count: usize,
    pub lower: Option<i64>,
    pub upper: i64,
    pub exceptional: bool,
}

/// Per-mode counts, aggregated index, and all bounds side by side.
#[derive(Debug, Clone, Serialize)]
pub struct IndexReport {
    pub per_mode: Vec<ModeEntry>,
    /// First mode from which counts vanish identically (`k^2 >= 1 + r_max^2`).
    pub k_zero: u32,
    pub index_computed: i64,
    pub raw_negative_count: i64,
    pub index_lower_fine: i64,
    pub index_lower_fine_clamped: i64,
    pub index_upper_fine: i64,
    pub index_lower_coarse: f64,
    pub index_upper_coarse: f64,
    pub entropy: f64,
    pub entropy_lb_translation: f64,
    pub entropy_lb_dilation: f64,
}

/// Cross-check computed spectra against every bound and assemble the report.
/// A violated bound falsifies either the spectra or the bounds code and is a
/// hard error.
pub fn consistency_report(curve: &CrossSection, spectra: &[ModeSpectrum]) -> Result<IndexReport, BoundsError> {
    let scalars = curve.geometric_scalars();
    let aggregate = spectral::index_aggregate(spectra, scalars.r_max)?;

    let mut per_mode = Vec::new();
    for s in spectra {
        let b = fine_mode_bounds(curve, s.k);
        let count = s.negative_count;
        if let Some(lo) = b.lower {
            if (count as i64) < lo {
                return Err(BoundsError::BoundViolation { k: s.k, count, lower: b.lower, upper: b.upper });
            }
        }
        if count as i64 > b.upper {
            return Err(BoundsError::BoundViolation { k: s.k, count, lower: b.lower, upper: b.upper });
        }
        per_mode.push(ModeEntry {
            k: s.k,
            negative_count: count,
            lower: b.lower,
            upper: b.upper,
            exceptional: b.exceptional,
        });
    }
    per_mode.sort_by_key(|e| e.k);

    let bounds_for_aggregate: Vec<ModeBounds> = per_mode
        .iter()
        .map(|e| ModeBounds { k: e.k, lower: e.lower, upper: e.upper, exceptional: e.exceptional })
        .collect();
    let fine = fine_index_bounds(&bounds_for_aggregate)?;
    let (coarse_lower, coarse_upper) = coarse_index_bounds(curve.sigma_length(), scalars.r_min, scalars.radius_max)?;
    let index = aggregate.index;
    if !(coarse_lower < index as f64 && (index as f64) < coarse_upper) {
        return Err(BoundsError::CoarseViolation { index, lower: coarse_lower, upper: coarse_upper });
    }
    if (index as f64) < fine.lower_raw as f64 || index > fine.upper {
        return Err(BoundsError::CoarseViolation { index, lower: fine.lower_raw as f64, upper: fine.upper as f64 });
    }

    let entropy = curve.sigma_length();
    let (lb_translation, lb_dilation) = entropy_lower_bounds(curve);
    // the entropy inequalities are theorems about shrinkers; enforce them only
    // when the curve actually satisfies the shrinker equation
    let is_shrinker = curve.normal_projections().max_shrinker_residual(curve) < 1e-3;
    if is_shrinker {
        if entropy < lb_translation {
            return Err(BoundsError::EntropyViolation { entropy, bound: lb_translation, which: "translation" });
        }
        if entropy < lb_dilation {
            return Err(BoundsError::EntropyViolation { entropy, bound: lb_dilation, which: "dilation" });
        }
    }

    Ok(IndexReport {
        per_mode,
        k_zero: spectral::required_k_max(scalars.r_max),
        index_computed: index,
        raw_negative_count: aggregate.raw_negative_count,
        index_lower_fine: fine.lower_raw,
        index_lower_fine_clamped: fine.lower_clamped,
        index_upper_fine: fine.upper,
        index_lower_coarse: coarse_lower,
        index_upper_coarse: coarse_upper,
        entropy,
        entropy_lb_translation: lb_translation,
        entropy_lb_dilation: lb_dilation,
    })
}

/// Aligned plain-text rendering of an [`IndexReport`]. The format is frozen;
/// regression tests diff it verbatim.
pub fn render_text_table(report: &IndexReport) -> String {
    let mut out = String::new();
    out.push_str("  k  count  lower  upper\n");
    for e in &report.per_mode {
        if e.k >= report.k_zero {
            continue;
        }
        let lower = e.lower.map(|l| l.to_string()).unwrap_or_else(|| "-".into());
        out.push_str(&format!("{:>3}  {:>5}  {:>5}  {:>5}\n", e.k, e.negative_count, lower, e.upper));
        if e.exceptional {
            out.push_str(&format!("     (mode {} bound quantity is a constant integer)\n", e.k));
        }
    }
    out.push_str(&format!("i_k = 0 for k >= {}\n", report.k_zero));
    out.push_str(&format!("index (computed)              {}\n", report.index_computed));
    out.push_str(&format!("raw negative count            {}\n", report.raw_negative_count));
    out.push_str(&format!(
        "fine index bounds             [{}, {}] (lower clamped at {})\n",
        report.index_lower_fine, report.index_upper_fine, report.index_lower_fine_clamped
    ));
    out.push_str(&format!(
        "coarse index bounds           ({:.4}, {:.4})\n",
        report.index_lower_coarse, report.index_upper_coarse
    ));
    out.push_str(&format!("entropy (sigma-length)        {:.6}\n", report.entropy));
    out.push_str(&format!(
        "entropy lower bounds          translation {:.6}, dilation {:.6}\n",
        report.entropy_lb_translation, report.entropy_lb_dilation
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bound_kernel_floor_ceiling_arithmetic() {
        // q in [0.995, 3.53]: lower 2*floor(0.995)+1 = 1, upper 2*ceil(3.53)-1 = 7
        let b = mode_bounds_from_q(0, &[0.995, 1.7, 3.53], true, true);
        assert_eq!(b.lower, Some(1));
        assert_eq!(b.upper, 7);
        assert!(!b.exceptional);

        // no lower bound when out of range
        let b = mode_bounds_from_q(2, &[0.1, 2.36], false, true);
        assert_eq!(b.lower, None);
        assert_eq!(b.upper, 5);

        // vanishing case
        let b = mode_bounds_from_q(5, &[], false, false);
        assert_eq!(b.upper, 0);
        assert_eq!(b.lower, None);
    }

    #[test]
    fn bound_kernel_exceptional_flag() {
        // constant integer: flag raised and the lower bound drops by 2
        let q = vec![3.0 - 2e-9, 3.0 - 1e-9, 3.0 - 3e-9];
        let b = mode_bounds_from_q(1, &q, true, true);
        assert!(b.exceptional);
        assert_eq!(b.lower, Some(5)); // 2 * 3 - 1
        assert_eq!(b.upper, 5);

        // constant but not integer: no flag, usual floor
        let q = vec![2.5, 2.5 + 1e-9];
        let b = mode_bounds_from_q(1, &q, true, true);
        assert!(!b.exceptional);
        assert_eq!(b.lower, Some(5)); // 2 * floor(2.5) + 1
        assert_eq!(b.upper, 5);
    }

    #[test]
    fn bound_kernel_stable_under_tiny_perturbations() {
        // away from integers, perturbations of 1e-10 never move a bound
        let base = [0.7341, 1.9924, 3.1077];
        let b0 = mode_bounds_from_q(0, &base, true, true);
        for delta in [-1e-10, 1e-10] {
            let moved: Vec<f64> = base.iter().map(|q| q + delta).collect();
            assert_eq!(mode_bounds_from_q(0, &moved, true, true), b0);
        }
    }

    #[test]
    fn fine_aggregation_reproduces_arithmetic() {
        let mk = |k: u32, lower: Option<i64>, upper: i64| ModeBounds { k, lower, upper, exceptional: false };
        // uppers (7, 5, 5, 3) then 0: -4 + 7 + 2(5+5+3) = 29
        let bounds = vec![
            mk(0, Some(1), 7),
            mk(1, Some(1), 5),
            mk(2, None, 5),
            mk(3, None, 3),
            mk(4, None, 0),
        ];
        let f = fine_index_bounds(&bounds).unwrap();
        assert_eq!(f.upper, 29);
        // lowers: -4 + 1 + 2*1 = -1, clamped to 0
        assert_eq!(f.lower_raw, -1);
        assert_eq!(f.lower_clamped, 0);

        // all-zero bounds aggregate to the raw -4
        let trivial = vec![mk(0, Some(0), 1), mk(1, Some(0), 0)];
        // upper chain must end at 0; k=1 with upper 0 ends coverage
        let f = fine_index_bounds(&trivial).unwrap();
        assert_eq!(f.lower_raw, -4);

        // incomplete coverage rejected
        let gap = vec![mk(0, Some(1), 7), mk(2, None, 0)];
        assert!(fine_index_bounds(&gap).is_err());
        let unfinished = vec![mk(0, Some(1), 7), mk(1, None, 3)];
        assert!(fine_index_bounds(&unfinished).is_err());
    }

    #[test]
    fn coarse_bounds_closed_form() {
        // direct evaluation: 3 sqrt(2e)/pi * 1.85 - 7
        let (lower, _) = coarse_index_bounds(1.85, 0.437, 3.31).unwrap();
        let direct = 3.0 * (2.0 * std::f64::consts::E).sqrt() / PI * 1.85 - 7.0;
        assert_relative_eq!(lower, direct, epsilon = 1e-14);
        assert_relative_eq!(lower, -2.8808714, epsilon = 1e-6);
        assert!(lower < 0.0, "bound is vacuous at the torus entropy");

        // entropy 4.5 beats the prior lower bound of 3
        let (lower, _) = coarse_index_bounds(4.5, 0.437, 3.31).unwrap();
        assert_relative_eq!(lower, 3.0195020, epsilon = 1e-6);
        assert!(lower > 3.0);

        assert!(coarse_index_bounds(-1.0, 0.4, 3.0).is_err());
        assert!(coarse_index_bounds(1.85, 3.5, 3.0).is_err());
    }

    #[test]
    fn coarse_upper_monotonicity() {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut rnd = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let f = 0.5 + 3.0 * rnd();
            let r_min = 0.2 + 0.8 * rnd();
            let radius = r_min + 0.5 + 2.0 * rnd();
            let (_, up) = coarse_index_bounds(f, r_min, radius).unwrap();
            // increasing in R
            let (_, up_bigger_radius) = coarse_index_bounds(f, r_min, radius + 0.1).unwrap();
            assert!(up_bigger_radius > up);
            // decreasing in r_min
            let (_, up_bigger_rmin) = coarse_index_bounds(f, r_min + 0.05, radius).unwrap();
            assert!(up_bigger_rmin < up);
        }
    }

    #[test]
    fn entropy_bounds_on_shrinking_circles() {
        use crate::geometry::HalfPlanePoint;
        let center = (2f64.sqrt(), 0.0);
        // dense-sampled oracle for the pointwise minima on an exact circle
        let oracle = |rho: f64| -> (f64, f64) {
            let mut t_min = f64::INFINITY;
            let mut d_min = f64::INFINITY;
            for i in 0..100_000 {
                let t = 2.0 * PI * i as f64 / 100_000.0;
                let r = center.0 + rho * t.cos();
                let z = center.1 + rho * t.sin();
                let w = (-(r * r + z * z) / 4.0).exp();
                t_min = t_min.min(r * w);
                d_min = d_min.min(r * r * w);
            }
            (PI * 2f64.sqrt() * t_min, PI * d_min)
        };
        let mut previous = (0.0, 0.0);
        for rho in [0.2, 0.1, 0.05] {
            let pts: Vec<HalfPlanePoint> = (0..512)
                .map(|i| {
                    let t = 2.0 * PI * i as f64 / 512.0;
                    HalfPlanePoint::new(center.0 + rho * t.cos(), center.1 + rho * t.sin()).unwrap()
                })
                .collect();
            let c = CrossSection::build(pts).unwrap();
            let (tr, di) = entropy_lower_bounds(&c);
            let (tr_oracle, di_oracle) = oracle(rho);
            assert_relative_eq!(tr, tr_oracle, max_relative = 1e-4);
            assert_relative_eq!(di, di_oracle, max_relative = 1e-4);
            // shrinking the circle raises both minima toward the center value
            assert!(tr > previous.0 && di > previous.1);
            previous = (tr, di);
        }
        // ceiling: the pointwise value at the sigma maximizer
        let ceiling = 2.0 * PI * (-0.5f64).exp();
        assert!(previous.0 < ceiling && previous.1 < ceiling);
    }

    #[test]
    fn corrupted_count_triggers_bound_violation() {
        use crate::spectral::ModeSpectrum;
        // a circle is not a shrinker but bounds and spectra are well-defined
        let pts: Vec<crate::geometry::HalfPlanePoint> = (0..256)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / 256.0;
                crate::geometry::HalfPlanePoint::new(2.0 + 0.5 * t.cos(), 0.5 * t.sin()).unwrap()
            })
            .collect();
        let c = CrossSection::build(pts).unwrap().resample_sigma_arclength(256).unwrap();
        let k_max = spectral::required_k_max(c.geometric_scalars().r_max);
        let mut spectra: Vec<ModeSpectrum> = (0..=k_max).map(|k| spectral::mode_spectrum(&c, k).unwrap()).collect();
        // intact spectra must pass
        consistency_report(&c, &spectra).unwrap();
        // corrupt i_0
        spectra[0].negative_count = 9;
        spectra[0].conjugated_negative_count = 9;
        match consistency_report(&c, &spectra) {
            Err(BoundsError::BoundViolation { k: 0, count: 9, .. }) => {}
            other => panic!("expected bound violation at k = 0, got {other:?}"),
        }
        // truncated coverage
        let short = &spectra[..1];
        assert!(matches!(
            consistency_report(&c, short),
            Err(BoundsError::Spectral(SpectralError::IncompleteModeCoverage { .. }))
        ));
    }
}
