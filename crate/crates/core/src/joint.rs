//! The joint significance + replication criterion.
//!
//! A result `t₁` is taken as real under null `q` when it is significant
//! (`|t₁| ≥ t_crit`) and its replication probability is at least `β`
//! (`|t₁| ≥ t_rep`). With `u = qN`:
//!
//! ```text
//! t_crit(u) = T_ν⁻¹(1−α) √(1+u)
//! t_rep(u)  = (1 + 1/u) (t_crit(u) + T_ν⁻¹(β) √((1+2u)/(1+u)))
//! R(u)      = max(t_rep(u), t_crit(u))
//! ```
//!
//! `R` is unimodal in `u` for every `β > α`, which is what lets
//! [`JointCriterion::minimize`] use golden-section search and
//! [`JointCriterion::q_interval`] bisect each side of the minimum.

use crate::dist::predictive_scale;
use crate::point::check_alpha;
use crate::solve::{bisect, golden_section_min};
use crate::special::{t_quantile, t_sf, DegreesOfFreedom, Probability};
use crate::summary::check_n;
use crate::{Error, Result};

/// `3√3/2`, the minimum of `(1 + 1/u)√(1+u)` (attained at `u = 2`).
pub const THUMB_FACTOR: f64 = 2.598_076_211_353_316;

/// Search bracket for `u = qN`.
pub const QN_FLOOR: f64 = 1e-6;
pub const QN_CEILING: f64 = 1e6;

/// Default upper limit on `q` for [`q_interval`].
pub const DEFAULT_Q_CEILING: f64 = 1e3;

const MIN_LOG_TOL: f64 = 1e-10;
const ROOT_REL_TOL: f64 = 1e-8;

/// Significance level `α` and replication level `β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Criteria {
    alpha: Probability,
    beta: Probability,
}

impl Criteria {
    /// Requires `0 < α < 0.5` and `α < β < 1`.
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let valid = alpha > 0.0 && alpha < 0.5 && beta > alpha && beta < 1.0;
        if !valid {
            return Err(Error::InvalidCriteria { alpha, beta });
        }
        Ok(Criteria { alpha: Probability::new(alpha)?, beta: Probability::new(beta)? })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.get()
    }

    pub fn beta(&self) -> f64 {
        self.beta.get()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointCriterionResult {
    pub q: f64,
    pub t_rep: f64,
    pub t_crit: f64,
    /// `max(t_rep, t_crit)`.
    pub r_q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionMinimum {
    pub q_at_min: f64,
    pub r_min: f64,
}

/// The range of `q` over which `|t₁| ≥ R_q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QInterval {
    pub q1: f64,
    pub q2: f64,
    /// Generalisability, equal to `q2`.
    pub gamma: f64,
    pub r_min: f64,
    pub q_at_min: f64,
    /// `R` is still below `|t₁|` at the lower end of the search bracket.
    pub q1_censored: bool,
    /// `R` is still below `|t₁|` at the user ceiling, so `q2` is only a
    /// lower bound.
    pub q2_censored: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QRange {
    Interval(QInterval),
    /// `|t₁| < R_min`: no `q` satisfies both criteria.
    NoSolution { r_min: f64, q_at_min: f64 },
}

/// `R_q` for fixed `(α, β, ν, N)` as a function of `q`.
///
/// The two quantiles are computed once at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointCriterion {
    criteria: Criteria,
    nu: DegreesOfFreedom,
    n: u64,
    upper: f64,
    beta_quantile: f64,
}

impl JointCriterion {
    pub fn new(criteria: Criteria, nu: DegreesOfFreedom, n: u64) -> Result<Self> {
        check_n(n)?;
        Ok(JointCriterion {
            criteria,
            nu,
            n,
            upper: t_quantile(1.0 - criteria.alpha(), nu)?,
            beta_quantile: t_quantile(criteria.beta(), nu)?,
        })
    }

    pub fn criteria(&self) -> Criteria {
        self.criteria
    }

    pub fn nu(&self) -> DegreesOfFreedom {
        self.nu
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `T_ν⁻¹(1−α)`.
    pub fn upper_quantile(&self) -> f64 {
        self.upper
    }

    pub fn t_crit_at_qn(&self, qn: f64) -> f64 {
        self.upper * libm::sqrt(1.0 + qn)
    }

    pub fn t_rep_at_qn(&self, qn: f64) -> f64 {
        (1.0 + 1.0 / qn) * (self.t_crit_at_qn(qn) + self.beta_quantile * predictive_scale(qn))
    }

    pub fn r_at_qn(&self, qn: f64) -> f64 {
        self.t_rep_at_qn(qn).max(self.t_crit_at_qn(qn))
    }

    fn qn(&self, q: f64) -> f64 {
        q * self.n as f64
    }

    pub fn t_rep(&self, q: f64) -> Result<f64> {
        check_positive_q(q)?;
        Ok(self.t_rep_at_qn(self.qn(q)))
    }

    pub fn evaluate(&self, q: f64) -> Result<JointCriterionResult> {
        check_positive_q(q)?;
        let qn = self.qn(q);
        let t_rep = self.t_rep_at_qn(qn);
        let t_crit = self.t_crit_at_qn(qn);
        Ok(JointCriterionResult { q, t_rep, t_crit, r_q: t_rep.max(t_crit) })
    }

    /// Golden-section search over `ln(qN) ∈ [ln 1e−6, ln 1e6]`.
    pub fn minimize(&self) -> CriterionMinimum {
        let (s, r_min) = golden_section_min(
            |s| self.r_at_qn(libm::exp(s)),
            libm::log(QN_FLOOR),
            libm::log(QN_CEILING),
            MIN_LOG_TOL,
        );
        CriterionMinimum { q_at_min: libm::exp(s) / self.n as f64, r_min }
    }

    /// Interval `[q₁, q₂]` with `R(q₁) = R(q₂) = |t₁|`, searched between
    /// `qN = 1e−6` and `q = q_ceiling`.
    pub fn q_interval(&self, t1: f64, q_ceiling: f64) -> Result<QRange> {
        if !(q_ceiling.is_finite() && q_ceiling > 0.0) {
            return Err(Error::domain("q_ceiling", q_ceiling, "a finite value > 0"));
        }
        let target = t1.abs();
        if !target.is_finite() {
            return Err(Error::domain("t1", t1, "a finite value"));
        }
        let min = self.minimize();
        if target < min.r_min {
            return Ok(QRange::NoSolution { r_min: min.r_min, q_at_min: min.q_at_min });
        }
        let n = self.n as f64;
        let s_min = libm::log(min.q_at_min * n);
        let s_floor = libm::log(QN_FLOOR);
        let s_ceil = libm::log(q_ceiling * n);
        if s_ceil <= s_min {
            return Err(Error::domain(
                "q_ceiling",
                q_ceiling,
                "a ceiling above the q that minimises the criterion",
            ));
        }
        let tol = ROOT_REL_TOL * target;
        let g = |s: f64| self.r_at_qn(libm::exp(s)) - target;

        let (s1, q1_censored) = if g(s_floor) < 0.0 {
            (s_floor, true)
        } else {
            (bisect(g, s_floor, s_min, tol)?, false)
        };
        let (s2, q2_censored) = if g(s_ceil) < 0.0 {
            (s_ceil, true)
        } else {
            (bisect(g, s_min, s_ceil, tol)?, false)
        };
        let q1 = if q1_censored { QN_FLOOR / n } else { libm::exp(s1) / n };
        let q2 = if q2_censored { q_ceiling } else { libm::exp(s2) / n };
        Ok(QRange::Interval(QInterval {
            q1,
            q2,
            gamma: q2,
            r_min: min.r_min,
            q_at_min: min.q_at_min,
            q1_censored,
            q2_censored,
        }))
    }
}

fn check_positive_q(q: f64) -> Result<()> {
    if q == 0.0 {
        Err(Error::DivergentAtZero)
    } else if q.is_finite() && q > 0.0 {
        Ok(())
    } else {
        Err(Error::domain("q", q, "a finite value > 0"))
    }
}

/// `t_rep = (1 + 1/(qN))(t_crit + T_ν⁻¹(β)√((1+2qN)/(1+qN)))`.
pub fn t_rep(criteria: Criteria, nu: DegreesOfFreedom, n: u64, q: f64) -> Result<f64> {
    check_positive_q(q)?;
    JointCriterion::new(criteria, nu, n)?.t_rep(q)
}

pub fn r_crit(criteria: Criteria, nu: DegreesOfFreedom, n: u64, q: f64) -> Result<JointCriterionResult> {
    check_positive_q(q)?;
    JointCriterion::new(criteria, nu, n)?.evaluate(q)
}

pub fn minimize_r(criteria: Criteria, nu: DegreesOfFreedom, n: u64) -> Result<CriterionMinimum> {
    Ok(JointCriterion::new(criteria, nu, n)?.minimize())
}

pub fn q_interval(
    t1: f64,
    criteria: Criteria,
    nu: DegreesOfFreedom,
    n: u64,
    q_ceiling: f64,
) -> Result<QRange> {
    JointCriterion::new(criteria, nu, n)?.q_interval(t1, q_ceiling)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleOfThumb {
    /// `T_ν⁻¹(1−α)·3√3/2`, the smallest `R_q` over all `q` when `β = 0.5`.
    pub t_bound: f64,
    /// `1 − T_ν(t_bound)`: results with a larger p-value cannot pass both
    /// criteria for any `q`.
    pub p_threshold: f64,
}

pub fn rule_of_thumb(alpha: f64, nu: DegreesOfFreedom) -> Result<RuleOfThumb> {
    check_alpha(alpha)?;
    let t_bound = t_quantile(1.0 - alpha, nu)? * THUMB_FACTOR;
    Ok(RuleOfThumb { t_bound, p_threshold: t_sf(t_bound, nu) })
}
