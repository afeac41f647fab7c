//! Scalar thresholding operators and their element-wise application.
//!
//! Three operators are provided: soft thresholding (the ℓ1 proximal map),
//! hard thresholding, and log-thresholding, the closed-form local minimizer
//! of the scalar objective
//!
//! ```text
//! g(x) = (x − z)² + λ·log(δ + |x|)
//! ```
//!
//! Log-thresholding maps every `|z| ≤ x₀ = √(2λ) − δ` to zero and otherwise
//! returns the stationary point of `g` on the same side as `z`. It falls
//! between hard thresholding (no shrinkage) and soft thresholding (constant
//! shrinkage) and its shrinkage vanishes as `|z|` grows.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::Vector;

/// Which scalar operator a [`ThresholdRule`] applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ThresholdKind {
    Soft,
    Hard,
    Log,
}

impl ThresholdKind {
    pub const ALL: [ThresholdKind; 3] = [ThresholdKind::Soft, ThresholdKind::Hard, ThresholdKind::Log];

    /// Conventional name of the iterative algorithm built on this operator.
    pub fn algorithm_name(self) -> &'static str {
        match self {
            ThresholdKind::Soft => "IST",
            ThresholdKind::Hard => "IHT",
            ThresholdKind::Log => "ILT",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ThresholdKind::Soft => "soft",
            ThresholdKind::Hard => "hard",
            ThresholdKind::Log => "log",
        }
    }
}

impl fmt::Display for ThresholdKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ThresholdKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "soft" | "ist" => Ok(ThresholdKind::Soft),
            "hard" | "iht" => Ok(ThresholdKind::Hard),
            "log" | "ilt" => Ok(ThresholdKind::Log),
            other => Err(Error::invalid("kind", format!("unknown threshold kind `{other}`"))),
        }
    }
}

/// A validated thresholding operator with its parameters.
///
/// For `Hard` the `lambda` field is the keep threshold `t`. `delta` is only
/// meaningful for `Log`. The dead zone is stored explicitly so that top-K
/// rules can pin it to an exact magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdRule {
    kind: ThresholdKind,
    lambda: f64,
    delta: f64,
    dead_zone: f64,
}

impl ThresholdRule {
    pub fn soft(lambda: f64) -> Result<Self> {
        check_nonnegative("lambda", lambda)?;
        Ok(Self {
            kind: ThresholdKind::Soft,
            lambda,
            delta: 0.0,
            dead_zone: lambda,
        })
    }

    pub fn hard(t: f64) -> Result<Self> {
        check_nonnegative("lambda", t)?;
        Ok(Self {
            kind: ThresholdKind::Hard,
            lambda: t,
            delta: 0.0,
            dead_zone: t,
        })
    }

    /// Log rule; requires `λ > 0`, `δ > 0` and a positive dead zone
    /// (`2λ > δ²`).
    pub fn log(lambda: f64, delta: f64) -> Result<Self> {
        check_log_params(lambda, delta)?;
        if 2.0 * lambda <= delta * delta {
            return Err(Error::invalid(
                "lambda",
                format!("log rule needs 2·lambda > delta² (lambda={lambda}, delta={delta})"),
            ));
        }
        Ok(Self {
            kind: ThresholdKind::Log,
            lambda,
            delta,
            dead_zone: (2.0 * lambda).sqrt() - delta,
        })
    }

    pub fn new(kind: ThresholdKind, lambda: f64, delta: f64) -> Result<Self> {
        match kind {
            ThresholdKind::Soft => Self::soft(lambda),
            ThresholdKind::Hard => Self::hard(lambda),
            ThresholdKind::Log => Self::log(lambda, delta),
        }
    }

    pub fn kind(&self) -> ThresholdKind {
        self.kind
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Largest magnitude mapped to zero (`x₀` for the log rule).
    pub fn dead_zone(&self) -> f64 {
        self.dead_zone
    }

    /// Largest magnitude that this rule maps to zero. Equals the dead zone
    /// except for log rules with `x₀ < δ`, where inputs up to `λ/(2δ)` are
    /// clamped to zero as well.
    pub fn zero_region(&self) -> f64 {
        if self.kind == ThresholdKind::Log && self.dead_zone < self.delta {
            self.dead_zone.max((self.lambda / (2.0 * self.delta)).min(self.delta))
        } else {
            self.dead_zone
        }
    }

    #[inline]
    pub fn apply_scalar(&self, z: f64) -> f64 {
        match self.kind {
            ThresholdKind::Soft => soft_threshold(z, self.lambda),
            ThresholdKind::Hard => hard_threshold(z, self.lambda),
            ThresholdKind::Log => log_threshold_with_dead_zone(z, self.lambda, self.delta, self.dead_zone),
        }
    }
}

fn check_nonnegative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and nonnegative, got {value}")))
    }
}

fn check_log_params(lambda: f64, delta: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid("lambda", format!("log rule needs lambda > 0, got {lambda}")));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::invalid("delta", format!("log rule needs delta > 0, got {delta}")));
    }
    Ok(())
}

/// `sign(z)·max(0, |z| − λ)`.
#[inline]
pub fn soft_threshold(z: f64, lambda: f64) -> f64 {
    if z > lambda {
        z - lambda
    } else if z < -lambda {
        z + lambda
    } else {
        0.0
    }
}

/// Keeps `z` when `|z| > t`, zero otherwise.
#[inline]
pub fn hard_threshold(z: f64, t: f64) -> f64 {
    if z.abs() > t {
        z
    } else {
        0.0
    }
}

/// Log-thresholding of a scalar.
///
/// Returns 0 inside the dead zone `|z| ≤ √(2λ) − δ` and the larger-magnitude
/// stationary point of the scalar objective otherwise. If that point falls
/// on the opposite side of zero (only possible when `x₀ < δ`), the result is
/// clamped to 0.
///
/// Accepts the boundary case `2λ = δ²` (dead zone of width zero), which the
/// top-K schedule produces when fewer than `K+1` inputs are nonzero.
pub fn log_threshold(z: f64, lambda: f64, delta: f64) -> Result<f64> {
    check_log_params(lambda, delta)?;
    if 2.0 * lambda < delta * delta {
        return Err(Error::invalid(
            "lambda",
            format!("log threshold needs 2·lambda ≥ delta² (lambda={lambda}, delta={delta})"),
        ));
    }
    let x0 = (2.0 * lambda).sqrt() - delta;
    Ok(log_threshold_with_dead_zone(z, lambda, delta, x0))
}

#[inline]
fn log_threshold_with_dead_zone(z: f64, lambda: f64, delta: f64, x0: f64) -> f64 {
    // When x₀ < δ the stationary point for small |z| lies on the wrong side
    // of zero; the minimizer on z's side is then 0 itself.
    let two_lambda = 2.0 * lambda;
    if z > x0 {
        let disc = ((z + delta) * (z + delta) - two_lambda).max(0.0);
        (0.5 * ((z - delta) + disc.sqrt())).max(0.0)
    } else if z < -x0 {
        let disc = ((z - delta) * (z - delta) - two_lambda).max(0.0);
        (0.5 * ((z + delta) - disc.sqrt())).min(0.0)
    } else {
        0.0
    }
}

/// `(candidate − z)² + λ·log(δ + |candidate|)`.
pub fn scalar_prox_objective(candidate: f64, z: f64, lambda: f64, delta: f64) -> f64 {
    let d = candidate - z;
    d * d + lambda * (delta + candidate.abs()).ln()
}

/// Applies `rule` to each entry of `v`.
pub fn apply_rule(v: &Vector, rule: &ThresholdRule) -> Vector {
    v.map(|z| rule.apply_scalar(z))
}

/// How the log rule's λ is derived from the `(K+1)`-th magnitude in
/// [`params_for_topk_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TopKLogLambda {
    /// `λ = (s + δ)²/2`, which puts the dead zone exactly at `s`.
    #[default]
    DeadZoneMatched,
    /// `λ = (s + δ)²/4`, clamped below at `δ²/2`. Leaves the dead zone
    /// short of `s`, so more than `K` entries may survive.
    Quarter,
}

/// `(K+1)`-th largest magnitude of `v`, or 0 when `v` has at most `K` entries.
pub fn kth_plus_one_magnitude(v: &Vector, k: usize) -> f64 {
    if k >= v.len() {
        return 0.0;
    }
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    let (_, nth, _) = mags.select_nth_unstable_by(k, |a, b| b.total_cmp(a));
    *nth
}

/// Rule whose dead zone eliminates everything but the `K` largest
/// magnitudes of `v`. Entries tied with the `(K+1)`-th magnitude are
/// zeroed as well, so at most `K` entries survive.
pub fn params_for_topk(v: &Vector, k: usize, kind: ThresholdKind, delta: f64) -> Result<ThresholdRule> {
    params_for_topk_with(v, k, kind, delta, TopKLogLambda::DeadZoneMatched)
}

pub fn params_for_topk_with(
    v: &Vector,
    k: usize,
    kind: ThresholdKind,
    delta: f64,
    log_lambda: TopKLogLambda,
) -> Result<ThresholdRule> {
    let s = kth_plus_one_magnitude(v, k);
    match kind {
        ThresholdKind::Soft => ThresholdRule::soft(s),
        ThresholdKind::Hard => ThresholdRule::hard(s),
        ThresholdKind::Log => {
            if !(delta.is_finite() && delta > 0.0) {
                return Err(Error::invalid("delta", format!("log rule needs delta > 0, got {delta}")));
            }
            let shifted = (s + delta) * (s + delta);
            let (lambda, dead_zone) = match log_lambda {
                TopKLogLambda::DeadZoneMatched => (shifted / 2.0, s),
                TopKLogLambda::Quarter => {
                    let lambda = (shifted / 4.0).max(delta * delta / 2.0);
                    (lambda, (2.0 * lambda).sqrt() - delta)
                }
            };
            Ok(ThresholdRule {
                kind: ThresholdKind::Log,
                lambda,
                delta,
                dead_zone,
            })
        }
    }
}

/// Evaluation of the sufficient condition `λ/δ + 2δ > 2√(2λ)` under which
/// fixed points of the log iteration are strict local minimizers of the
/// surrogate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaConditionReport {
    pub lambda: f64,
    pub delta: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}
