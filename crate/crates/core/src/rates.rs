//! Lyapunov statistics for matrix/operator families, the distance-bound
//! formulas gated by their preconditions, the Lindeberg truncation
//! functional, and empirical rate fitting on the log-log scale.
//!
//! The absolute constants in the bounds are unknowable, so they enter as a
//! caller-supplied factor C (default 1); everything testable lives in the
//! exponents and inequality directions.

use crate::measure::{Measure, MeasureError};
use crate::quad::integrate_gl;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RatesError {
    #[error("empty profile list")]
    EmptyProfiles,
    #[error("total variance must be positive")]
    ZeroVariance,
    #[error("invalid moment profile: {0}")]
    InvalidProfile(String),
    #[error("norm bounds are required for support-type statistics ({0})")]
    MissingNormBounds(&'static str),
    #[error("precondition gate failed: {0}")]
    GateFailed(String),
    #[error("degenerate series: {0}")]
    DegenerateSeries(String),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Per-variable moment data: operator-norm bound (if the variable is
/// bounded), variance, and absolute third/fourth moments.
#[derive(Debug, Clone, Copy)]
pub struct MomentProfile {
    pub norm_bound: Option<f64>,
    pub variance: f64,
    pub abs_moment_3: f64,
    pub abs_moment_4: f64,
}

impl MomentProfile {
    pub fn new(
        norm_bound: Option<f64>,
        variance: f64,
        abs_moment_3: f64,
        abs_moment_4: f64,
    ) -> Result<Self, RatesError> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(RatesError::InvalidProfile(format!(
                "variance must be positive (got {variance})"
            )));
        }
        if abs_moment_3 < 0.0 || abs_moment_4 < 0.0 {
            return Err(RatesError::InvalidProfile(
                "absolute moments must be non-negative".into(),
            ));
        }
        if let Some(nb) = norm_bound {
            if nb < 0.0 {
                return Err(RatesError::InvalidProfile("norm bound must be >= 0".into()));
            }
            let slack = 1.0 + 1e-12;
            if abs_moment_3 > nb.powi(3) * slack || abs_moment_4 > nb.powi(4) * slack {
                return Err(RatesError::InvalidProfile(format!(
                    "absolute moments exceed the norm-bound powers \
                     (m3 {abs_moment_3} vs {}, m4 {abs_moment_4} vs {})",
                    nb.powi(3),
                    nb.powi(4)
                )));
            }
        }
        // Cauchy-Schwarz between |X|^3 = |X| * X^2 halves.
        if abs_moment_3 * abs_moment_3 > variance * abs_moment_4 * (1.0 + 1e-9) {
            return Err(RatesError::InvalidProfile(format!(
                "m3^2 = {} exceeds variance * m4 = {}",
                abs_moment_3 * abs_moment_3,
                variance * abs_moment_4
            )));
        }
        Ok(Self {
            norm_bound,
            variance,
            abs_moment_3,
            abs_moment_4,
        })
    }

    /// Moment profile of a centered law (variance taken about the mean; the
    /// norm bound is the largest support endpoint modulus).
    pub fn from_measure(m: &Measure) -> Result<Self, RatesError> {
        let (lo, hi) = m.support_interval();
        let nb = lo.abs().max(hi.abs());
        Self::new(
            Some(nb),
            m.variance(),
            m.abs_moment(3)?,
            m.abs_moment(4)?,
        )
    }
}

/// Normalized moment statistics of a family: the variance sum and the
/// third/fourth fractions in both the moment form (sums of absolute moments
/// over powers of B) and the support form (sums of norm powers over powers
/// of B). The family size and the largest norm ride along because two of
/// the bound formulas need them.
#[derive(Debug, Clone, Copy)]
pub struct LyapunovReport {
    pub count: usize,
    /// B^2 = sum of variances.
    pub variance_sum: f64,
    /// L_{3}: sum of absolute third moments / B^3.
    pub moment_fraction_3: f64,
    /// L_{4}: sum of absolute fourth moments / B^4.
    pub moment_fraction_4: f64,
    /// Support-type third fraction: sum of norm cubes / B^3 (needs bounds).
    pub support_fraction_3: Option<f64>,
    /// Support-type fourth fraction: sum of norm fourth powers / B^4.
    pub support_fraction_4: Option<f64>,
    /// Largest norm bound in the family, when all are present.
    pub max_norm: Option<f64>,
}

/// Computes the normalized fractions from per-variable profiles.
pub fn lyapunov_report(profiles: &[MomentProfile]) -> Result<LyapunovReport, RatesError> {
    if profiles.is_empty() {
        return Err(RatesError::EmptyProfiles);
    }
    let variance_sum: f64 = profiles.iter().map(|p| p.variance).sum();
    if !(variance_sum > 0.0) {
        return Err(RatesError::ZeroVariance);
    }
    let b = variance_sum.sqrt();
    let b3 = b.powi(3);
    let b4 = variance_sum * variance_sum;
    let moment_fraction_3 = profiles.iter().map(|p| p.abs_moment_3).sum::<f64>() / b3;
    let moment_fraction_4 = profiles.iter().map(|p| p.abs_moment_4).sum::<f64>() / b4;
    let all_bounded = profiles.iter().all(|p| p.norm_bound.is_some());
    let (support_fraction_3, support_fraction_4, max_norm) = if all_bounded {
        let s3: f64 = profiles
            .iter()
            .map(|p| p.norm_bound.unwrap().powi(3))
            .sum::<f64>()
            / b3;
        let s4: f64 = profiles
            .iter()
            .map(|p| p.norm_bound.unwrap().powi(4))
            .sum::<f64>()
            / b4;
        let mx = profiles
            .iter()
            .map(|p| p.norm_bound.unwrap())
            .fold(0.0_f64, f64::max);
        (Some(s3), Some(s4), Some(mx))
    } else {
        (None, None, None)
    };
    Ok(LyapunovReport {
        count: profiles.len(),
        variance_sum,
        moment_fraction_3,
        moment_fraction_4,
        support_fraction_3,
        support_fraction_4,
        max_norm,
    })
}

/// Which distance/support bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoremId {
    /// Bounded, possibly non-identical summands: log-weighted support
    /// fractions; gate L_{S,4} < 1/16 and L_{S,3} < 1/(2e).
    BoundedNonIdentical,
    /// Support-radius inclusion for the self-normalized law; gate
    /// L_{S,4} < 1/64.
    SupportRadius,
    /// Bounded identical summands: norm^3 log(n)/sqrt(n); gate
    /// n > 16 max_norm^4.
    BoundedIdentical,
    /// Unbounded, possibly non-identical: fourth-moment fraction powers.
    UnboundedNonIdentical,
    /// Unbounded identical: average fourth moment to the 5/4 over n^{1/4}.
    UnboundedIdentical,
}

impl TheoremId {
    pub fn all() -> [TheoremId; 5] {
        [
            TheoremId::BoundedNonIdentical,
            TheoremId::SupportRadius,
            TheoremId::BoundedIdentical,
            TheoremId::UnboundedNonIdentical,
            TheoremId::UnboundedIdentical,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            TheoremId::BoundedNonIdentical => "bounded-non-id",
            TheoremId::SupportRadius => "support-radius",
            TheoremId::BoundedIdentical => "bounded-id",
            TheoremId::UnboundedNonIdentical => "unbounded-non-id",
            TheoremId::UnboundedIdentical => "unbounded-id",
        }
    }
}

/// Gate outcome; on failure every violated inequality is named.
#[derive(Debug, Clone)]
pub struct GateOutcome {
    pub passed: bool,
    pub violations: Vec<String>,
}

fn support_fractions(
    report: &LyapunovReport,
    theorem: &'static str,
) -> Result<(f64, f64, f64), RatesError> {
    match (
        report.support_fraction_3,
        report.support_fraction_4,
        report.max_norm,
    ) {
        (Some(s3), Some(s4), Some(mx)) => Ok((s3, s4, mx)),
        _ => Err(RatesError::MissingNormBounds(theorem)),
    }
}

/// Checks the Lyapunov-side preconditions of the selected bound. The
/// existence thresholds that are non-constructive (a minimal n for the
/// unbounded bounds) cannot be certified and are not checked here.
pub fn precondition_gate(
    report: &LyapunovReport,
    theorem: TheoremId,
) -> Result<GateOutcome, RatesError> {
    let mut violations = Vec::new();
    match theorem {
        TheoremId::BoundedNonIdentical => {
            let (s3, s4, _) = support_fractions(report, "bounded-non-id")?;
            if !(s4 < 1.0 / 16.0) {
                violations.push(format!("support_fraction_4 < 1/16 (got {s4})"));
            }
            let half_e = 1.0 / (2.0 * std::f64::consts::E);
            if !(s3 < half_e) {
                violations.push(format!("support_fraction_3 < 1/(2e) (got {s3})"));
            }
        }
        TheoremId::SupportRadius => {
            let (_, s4, _) = support_fractions(report, "support-radius")?;
            if !(s4 < 1.0 / 64.0) {
                violations.push(format!("support_fraction_4 < 1/64 (got {s4})"));
            }
        }
        TheoremId::BoundedIdentical => {
            let (_, _, mx) = support_fractions(report, "bounded-id")?;
            let n = report.count as f64;
            if !(n > 16.0 * mx.powi(4)) {
                violations.push(format!(
                    "n > 16 max_norm^4 (got n = {n}, 16 max_norm^4 = {})",
                    16.0 * mx.powi(4)
                ));
            }
        }
        TheoremId::UnboundedNonIdentical | TheoremId::UnboundedIdentical => {
            if !report.moment_fraction_4.is_finite() {
                violations.push(format!(
                    "finite fourth-moment fraction (got {})",
                    report.moment_fraction_4
                ));
            }
        }
    }
    Ok(GateOutcome {
        passed: violations.is_empty(),
        violations,
    })
}

/// Evaluates the selected bound formula verbatim with caller constant `c`
/// (the sharp absolute constants are unknowable). Fails when the gate does.
/// The support-radius formula carries no constant; `c` is ignored there.
pub fn theorem_bound(
    report: &LyapunovReport,
    theorem: TheoremId,
    c: f64,
    n: u32,
) -> Result<f64, RatesError> {
    let gate = precondition_gate(report, theorem)?;
    if !gate.passed {
        return Err(RatesError::GateFailed(gate.violations.join("; ")));
    }
    let nf = n as f64;
    Ok(match theorem {
        TheoremId::BoundedNonIdentical => {
            let (s3, s4, _) = support_fractions(report, "bounded-non-id")?;
            let t1 = s3.ln().abs() * s3;
            let t2 = s4.ln().abs() * s4.sqrt();
            c * t1.max(t2)
        }
        TheoremId::SupportRadius => {
            let (_, s4, mx) = support_fractions(report, "support-radius")?;
            2.0 + mx / report.variance_sum.sqrt() + 57.0 * s4.sqrt()
        }
        TheoremId::BoundedIdentical => {
            let (_, _, mx) = support_fractions(report, "bounded-id")?;
            c * mx.powi(3) * nf.ln() / nf.sqrt()
        }
        TheoremId::UnboundedNonIdentical => {
            let l4 = report.moment_fraction_4;
            c * (l4.powf(0.25) + nf.sqrt() * l4.powf(0.75) + nf * l4.powf(1.25))
        }
        TheoremId::UnboundedIdentical => {
            // Average fourth moment recovered from the fraction:
            // m4 = L_4 B^4 / n.
            let m4 = report.moment_fraction_4 * report.variance_sum * report.variance_sum
                / report.count as f64;
            c * m4.powf(1.25) / nf.powf(0.25)
        }
    })
}

/// Second moment of `m` outside [-t, t].
fn truncated_second_moment(m: &Measure, t: f64) -> Result<f64, RatesError> {
    if t <= 0.0 {
        return Ok(m.moment(2)?);
    }
    Ok(match m {
        Measure::Atomic { points, masses } => points
            .iter()
            .zip(masses)
            .filter(|(&p, _)| p.abs() > t)
            .map(|(&p, &w)| w * p * p)
            .sum(),
        Measure::Empirical { samples } => {
            samples
                .iter()
                .filter(|s| s.abs() > t)
                .map(|&s| s * s)
                .sum::<f64>()
                / samples.len() as f64
        }
        _ => {
            let (lo, hi) = m.support_interval();
            let mut acc = 0.0;
            if hi > t {
                acc += integrate_gl(|x| x * x * m.density_at(x), t.max(lo), hi, 64);
            }
            if lo < -t {
                acc += integrate_gl(|x| x * x * m.density_at(x), lo, (-t).min(hi), 64);
            }
            // Atoms (free Poisson below unit rate) sit at the origin and
            // never contribute beyond a positive threshold.
            acc
        }
    })
}

/// Lindeberg truncation functional
/// (1/B^2) sum_i of the second moment of X_i outside |x| > eps B, with
/// B^2 the sum of raw second moments (the centered convention).
pub fn lindeberg_functional(measures: &[Measure], eps: f64) -> Result<f64, RatesError> {
    if measures.is_empty() {
        return Err(RatesError::EmptyProfiles);
    }
    if !(eps > 0.0) {
        return Err(RatesError::DegenerateSeries(format!(
            "threshold eps must be positive (got {eps})"
        )));
    }
    let mut b_sq = 0.0;
    for m in measures {
        b_sq += m.moment(2)?;
    }
    if !(b_sq > 0.0) {
        return Err(RatesError::ZeroVariance);
    }
    let threshold = eps * b_sq.sqrt();
    let mut acc = 0.0;
    for m in measures {
        acc += truncated_second_moment(m, threshold)?;
    }
    Ok(acc / b_sq)
}

/// Fitted decay of a (n, delta) series on the log-log scale.
#[derive(Debug, Clone, Copy)]
pub struct RateFit {
    /// Slope of log delta against log n.
    pub exponent: f64,
    /// True when the model includes a log n factor
    /// (delta = constant * log(n) * n^exponent).
    pub log_factor_included: bool,
    /// Multiplicative constant of the fitted model.
    pub constant: f64,
    /// Largest absolute residual of log delta over the input points.
    pub max_abs_residual: f64,
}

/// Least squares of log(delta) = log(constant) + exponent * log(n)
/// (+ log log n when `with_log`), for a strictly increasing series of at
/// least four points with positive deltas and n >= 2.
pub fn rate_fit(series: &[(u32, f64)], with_log: bool) -> Result<RateFit, RatesError> {
    if series.len() < 4 {
        return Err(RatesError::DegenerateSeries(format!(
            "need at least 4 points (got {})",
            series.len()
        )));
    }
    if series.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(RatesError::DegenerateSeries(
            "sample sizes must be strictly increasing".into(),
        ));
    }
    if series.iter().any(|&(n, _)| n < 2) {
        return Err(RatesError::DegenerateSeries(
            "sample sizes must be at least 2".into(),
        ));
    }
    if series.iter().any(|&(_, d)| !(d > 0.0 && d.is_finite())) {
        return Err(RatesError::DegenerateSeries(
            "distances must be positive and finite".into(),
        ));
    }
    let pts: Vec<(f64, f64)> = series
        .iter()
        .map(|&(n, d)| {
            let x = (n as f64).ln();
            let mut y = d.ln();
            if with_log {
                y -= x.ln();
            }
            (x, y)
        })
        .collect();
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = m * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return Err(RatesError::DegenerateSeries(
            "sample sizes are too clustered for a slope".into(),
        ));
    }
    let exponent = (m * sxy - sx * sy) / denom;
    let intercept = (sy - exponent * sx) / m;
    let max_abs_residual = pts
        .iter()
        .map(|&(x, y)| (y - intercept - exponent * x).abs())
        .fold(0.0, f64::max);
    Ok(RateFit {
        exponent,
        log_factor_included: with_log,
        constant: intercept.exp(),
        max_abs_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bernoulli_profile() -> MomentProfile {
        // Symmetric two-point law at +-1: variance 1, |X|^3 = |X|^4 = 1.
        MomentProfile::new(Some(1.0), 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn profile_validation() {
        assert!(MomentProfile::new(Some(1.0), 1.0, 1.5, 1.0).is_err()); // m3 > nb^3
        assert!(MomentProfile::new(None, 1.0, 2.0, 1.0).is_err()); // Cauchy-Schwarz
        assert!(MomentProfile::new(None, 0.0, 0.0, 0.0).is_err());
        assert!(MomentProfile::new(None, 1.0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn identical_family_fractions() {
        let profiles = vec![bernoulli_profile(); 100];
        let r = lyapunov_report(&profiles).unwrap();
        assert!((r.support_fraction_3.unwrap() - 0.1).abs() < 1e-12);
        assert!((r.support_fraction_4.unwrap() - 0.01).abs() < 1e-12);
        assert!((r.moment_fraction_3 - 0.1).abs() < 1e-12);
        assert!((r.variance_sum - 100.0).abs() < 1e-12);
    }

    #[test]
    fn single_profile_gives_unit_fractions() {
        let r = lyapunov_report(&[bernoulli_profile()]).unwrap();
        assert_eq!(r.support_fraction_3, Some(1.0));
        assert_eq!(r.support_fraction_4, Some(1.0));
        assert_eq!(r.moment_fraction_3, 1.0);
        assert_eq!(r.moment_fraction_4, 1.0);
    }

    #[test]
    fn lyapunov_chain_on_randomized_profiles() {
        // L_3 <= sqrt(L_4) follows from the per-profile Cauchy-Schwarz.
        let mut state = 99u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..200 {
            let k = 1 + (next() * 6.0) as usize;
            let mut profiles = Vec::new();
            for _ in 0..k {
                let nb = 0.5 + 2.0 * next();
                let variance = nb * nb * (0.1 + 0.9 * next());
                let m4 = nb.powi(4) * (0.05 + 0.95 * next());
                let m3_cap = (variance * m4).sqrt().min(nb.powi(3));
                let m3 = m3_cap * next();
                profiles.push(MomentProfile::new(Some(nb), variance, m3, m4).unwrap());
            }
            let r = lyapunov_report(&profiles).unwrap();
            assert!(
                r.moment_fraction_3 <= r.moment_fraction_4.sqrt() + 1e-12,
                "L3 {} vs sqrt(L4) {}",
                r.moment_fraction_3,
                r.moment_fraction_4.sqrt()
            );
            let s3 = r.support_fraction_3.unwrap();
            let s4 = r.support_fraction_4.unwrap();
            assert!(s4.powf(0.25) <= s3.powf(1.0 / 3.0) + 1e-12);
        }
    }

    #[test]
    fn gate_boundaries_are_strict() {
        let profiles = vec![bernoulli_profile(); 100];
        let r = lyapunov_report(&profiles).unwrap();
        // L_{S,4} = 0.01 < 1/16 passes.
        assert!(precondition_gate(&r, TheoremId::BoundedNonIdentical)
            .unwrap()
            .passed);

        // Exactly 1/16 fails the strict inequality: 16 copies of norm-1
        // variance-1 profiles give s4 = 16/256 = 1/16.
        let profiles = vec![bernoulli_profile(); 16];
        let r = lyapunov_report(&profiles).unwrap();
        let gate = precondition_gate(&r, TheoremId::BoundedNonIdentical).unwrap();
        assert!(!gate.passed);
        assert!(gate.violations[0].contains("1/16"));

        // n = 17 > 16 * 1^4 passes the identical-law gate.
        let profiles = vec![bernoulli_profile(); 17];
        let r = lyapunov_report(&profiles).unwrap();
        assert!(precondition_gate(&r, TheoremId::BoundedIdentical)
            .unwrap()
            .passed);
    }

    #[test]
    fn gate_requires_norm_bounds() {
        let p = MomentProfile::new(None, 1.0, 1.0, 1.5).unwrap();
        let r = lyapunov_report(&[p; 40]).unwrap();
        assert!(matches!(
            precondition_gate(&r, TheoremId::BoundedNonIdentical),
            Err(RatesError::MissingNormBounds(_))
        ));
        assert!(precondition_gate(&r, TheoremId::UnboundedNonIdentical)
            .unwrap()
            .passed);
    }

    #[test]
    fn bound_formulas_match_hand_arithmetic() {
        // Support fractions 0.1 / 0.01: the log-weighted max picks
        // |log 0.01| * 0.1 = 0.4605...
        let profiles = vec![bernoulli_profile(); 100];
        let r = lyapunov_report(&profiles).unwrap();
        let b = theorem_bound(&r, TheoremId::BoundedNonIdentical, 1.0, 100).unwrap();
        assert!((b - 0.01_f64.ln().abs() * 0.1).abs() < 1e-12, "b = {b}");

        // Fourth-moment fraction 1/n at n = 256 gives 3 * 0.25.
        let n = 256u32;
        let r = LyapunovReport {
            count: n as usize,
            variance_sum: n as f64,
            moment_fraction_3: (1.0 / (n as f64)).sqrt(),
            moment_fraction_4: 1.0 / n as f64,
            support_fraction_3: None,
            support_fraction_4: None,
            max_norm: None,
        };
        let b = theorem_bound(&r, TheoremId::UnboundedNonIdentical, 1.0, n).unwrap();
        assert!((b - 0.75).abs() < 1e-12, "b = {b}");

        // Support radius at norm 1, n = 10^4: 2 + 0.01 + 57 * 0.01 = 2.58.
        let profiles = vec![bernoulli_profile(); 10_000];
        let r = lyapunov_report(&profiles).unwrap();
        let b = theorem_bound(&r, TheoremId::SupportRadius, 1.0, 10_000).unwrap();
        assert!((b - 2.58).abs() < 1e-12, "b = {b}");

        // Identical-law log bound: norm 1 gives ln(n)/sqrt(n).
        let profiles = vec![bernoulli_profile(); 100];
        let r = lyapunov_report(&profiles).unwrap();
        let b = theorem_bound(&r, TheoremId::BoundedIdentical, 1.0, 100).unwrap();
        assert!((b - 100.0_f64.ln() / 10.0).abs() < 1e-12);

        // Unbounded identical law: m4 = 1 gives c / n^{1/4}.
        let b = theorem_bound(&r, TheoremId::UnboundedIdentical, 2.0, 100).unwrap();
        assert!((b - 2.0 / 100.0_f64.powf(0.25)).abs() < 1e-12);
    }

    #[test]
    fn gate_failure_blocks_bound() {
        let profiles = vec![bernoulli_profile(); 4];
        let r = lyapunov_report(&profiles).unwrap();
        assert!(matches!(
            theorem_bound(&r, TheoremId::BoundedNonIdentical, 1.0, 4),
            Err(RatesError::GateFailed(_))
        ));
    }

    #[test]
    fn lindeberg_vanishes_for_scaled_families() {
        // n copies of the symmetric two-point law at +-1: B = sqrt(n); for
        // n >= 5 the region |x| > 0.5 sqrt(n) excludes the support.
        let b = Measure::atomic(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap();
        for n in [5usize, 16, 100] {
            let measures = vec![b.clone(); n];
            let v = lindeberg_functional(&measures, 0.5).unwrap();
            assert_eq!(v, 0.0, "n = {n}");
        }
        // n = 1: the whole mass lies beyond 0.5 * 1.
        let v = lindeberg_functional(std::slice::from_ref(&b), 0.5).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn lindeberg_detects_a_dominant_summand() {
        // One heavy two-point law among tiny-variance noise keeps the
        // functional bounded away from zero.
        let heavy = Measure::atomic(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap();
        let noise = Measure::atomic(vec![-1e-4, 1e-4], vec![0.5, 0.5]).unwrap();
        for n in [10usize, 100, 1000] {
            let mut measures = vec![heavy.clone()];
            measures.extend(vec![noise.clone(); n - 1]);
            let v = lindeberg_functional(&measures, 0.5).unwrap();
            assert!(v > 0.9, "n = {n}: {v}");
        }
    }

    #[test]
    fn lindeberg_monotone_in_threshold() {
        let m = Measure::standard_semicircle();
        let family = vec![m; 3];
        let mut prev = f64::INFINITY;
        for eps in [0.1, 0.2, 0.5, 1.0, 2.0] {
            let v = lindeberg_functional(&family, eps).unwrap();
            assert!(v <= prev + 1e-12);
            prev = v;
        }
        assert_eq!(lindeberg_functional(&family, 1e9).unwrap(), 0.0);
    }

    #[test]
    fn rate_fit_recovers_exact_power_laws() {
        let series: Vec<(u32, f64)> = (2..10).map(|k| (1 << k, (1 << k) as f64)).collect();
        let pure: Vec<(u32, f64)> = series
            .iter()
            .map(|&(n, _)| (n, (n as f64).powf(-0.5)))
            .collect();
        let fit = rate_fit(&pure, false).unwrap();
        assert!((fit.exponent + 0.5).abs() < 1e-10);
        assert!(fit.max_abs_residual < 1e-10);

        let logged: Vec<(u32, f64)> = series
            .iter()
            .map(|&(n, _)| (n, 3.0 * (n as f64).ln() * (n as f64).powf(-0.5)))
            .collect();
        let fit = rate_fit(&logged, true).unwrap();
        assert!((fit.exponent + 0.5).abs() < 1e-8);
        assert!((fit.constant - 3.0).abs() < 1e-6);
    }

    #[test]
    fn rate_fit_input_validation() {
        assert!(rate_fit(&[(2, 1.0), (4, 0.5), (8, 0.25)], false).is_err());
        assert!(rate_fit(&[(2, 1.0), (4, 0.5), (4, 0.25), (8, 0.1)], false).is_err());
        assert!(rate_fit(&[(2, 1.0), (4, 0.5), (8, 0.0), (16, 0.1)], false).is_err());
    }
}
