//! Testing against a distributional null `μ ~ N(0, qσ²)`.
//!
//! Under this null `x̄ ~ N(0, (σ²/N)(1 + qN))`, so `t/√(1+qN)` follows a t
//! distribution with the design's degrees of freedom. Everything below is a
//! consequence of that pivot: p-values and critical values inflate the
//! point-form ones by `√(1+qN)`, and the replication probability comes from
//! the Gaussian posterior for `μ` after the first experiment.
//!
//! `σ` is never observed, so posterior variances are reported as multiples
//! of `σ²`.

use crate::point::check_alpha;
use crate::special::{t_cdf, t_quantile, t_sf, DegreesOfFreedom};
use crate::summary::{check_n, ExperimentSummary};
use crate::{Error, Result};

/// The variance ratio `q = σ₀²/σ²` of a distributional null.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DistributionalNull(f64);

impl DistributionalNull {
    pub fn new(q: f64) -> Result<Self> {
        if q.is_finite() && q >= 0.0 {
            Ok(DistributionalNull(q))
        } else {
            Err(Error::domain("q", q, "a finite value >= 0"))
        }
    }

    /// `q = 0`: the point-form null.
    pub const fn point() -> Self {
        DistributionalNull(0.0)
    }

    #[inline]
    pub fn q(self) -> f64 {
        self.0
    }

    /// `√(1 + qN)`.
    #[inline]
    pub fn inflation(self, n: u64) -> f64 {
        libm::sqrt(1.0 + self.0 * n as f64)
    }

    /// `qN / (1 + qN)`.
    #[inline]
    pub fn shrinkage(self, n: u64) -> f64 {
        let qn = self.0 * n as f64;
        if qn.is_infinite() {
            1.0
        } else {
            qn / (1.0 + qn)
        }
    }
}

/// `1 − T_ν(|t₁| / √(1+qN))`.
pub fn dist_p_value(t1: f64, nu: DegreesOfFreedom, n: u64, null: DistributionalNull) -> Result<f64> {
    check_n(n)?;
    Ok(t_sf(t1.abs() / null.inflation(n), nu))
}

/// `t_crit = T_ν⁻¹(1−α)·√(1+qN)`.
pub fn dist_t_crit(alpha: f64, nu: DegreesOfFreedom, n: u64, null: DistributionalNull) -> Result<f64> {
    check_alpha(alpha)?;
    check_n(n)?;
    Ok(t_quantile(1.0 - alpha, nu)? * null.inflation(n))
}

/// `Z_crit = T_ν⁻¹(1−α)·√(1+qN)/√N`.
pub fn dist_z_crit(alpha: f64, nu: DegreesOfFreedom, n: u64, null: DistributionalNull) -> Result<f64> {
    Ok(dist_t_crit(alpha, nu, n, null)? / libm::sqrt(n as f64))
}

/// `T_ν⁻¹(1−α)·√q`: the limit of `Z_crit` as `N → ∞`. No `|z|` below this
/// bound is significant at any sample size.
pub fn asymptotic_z_bound(alpha: f64, nu: DegreesOfFreedom, null: DistributionalNull) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(t_quantile(1.0 - alpha, nu)? * libm::sqrt(null.q()))
}

/// Posterior for `μ` after observing `x̄₁`, in `σ`-normalised units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorMean {
    /// `μ_N`, in the units of `x̄₁`.
    pub mu_n: f64,
    /// `qN / (1 + qN)`.
    pub shrinkage: f64,
    /// `σ_N² / σ²`.
    pub var_n_over_sigma2: f64,
}

/// `μ_N = qN/(1+qN)·x̄₁`, `σ_N² = qN/(1+qN)·σ²/N`.
pub fn posterior_update(x_bar_1: f64, n: u64, null: DistributionalNull) -> Result<PosteriorMean> {
    if n == 0 {
        return Err(Error::domain("n", 0.0, "a positive sample size"));
    }
    let shrinkage = null.shrinkage(n);
    Ok(PosteriorMean {
        mu_n: shrinkage * x_bar_1,
        shrinkage,
        var_n_over_sigma2: shrinkage / n as f64,
    })
}

/// `√((1 + 2qN)/(1 + qN))`: the predictive spread of `t₂` around its
/// posterior mean, in t units.
pub(crate) fn predictive_scale(qn: f64) -> f64 {
    if qn.is_infinite() {
        core::f64::consts::SQRT_2
    } else {
        libm::sqrt((1.0 + 2.0 * qn) / (1.0 + qn))
    }
}

/// Probability that an exact repeat (same `N`, `σ`, `q`, `α`) is significant
/// with the same sign as `t₁`:
/// `T_ν((qN/(1+qN)·|t₁| − t_crit) / √((1+2qN)/(1+qN)))`.
///
/// At `q = 0` this is exactly `α`.
pub fn replication_probability(
    t1: f64,
    alpha: f64,
    nu: DegreesOfFreedom,
    n: u64,
    null: DistributionalNull,
) -> Result<f64> {
    if null.q() == 0.0 {
        check_alpha(alpha)?;
        check_n(n)?;
        return Ok(alpha);
    }
    let t_crit = dist_t_crit(alpha, nu, n, null)?;
    let qn = null.q() * n as f64;
    let arg = (null.shrinkage(n) * t1.abs() - t_crit) / predictive_scale(qn);
    Ok(t_cdf(arg, nu))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistTestReport {
    pub t_stat: f64,
    pub nu: DegreesOfFreedom,
    pub n: u64,
    pub q: f64,
    pub alpha: f64,
    pub p_value: f64,
    pub z_crit: f64,
    pub t_crit: f64,
    pub significant: bool,
    pub asymptotic_bound_z: f64,
}

pub fn dist_test_t(
    t: f64,
    nu: DegreesOfFreedom,
    n: u64,
    alpha: f64,
    null: DistributionalNull,
) -> Result<DistTestReport> {
    let t_crit = dist_t_crit(alpha, nu, n, null)?;
    Ok(DistTestReport {
        t_stat: t,
        nu,
        n,
        q: null.q(),
        alpha,
        p_value: dist_p_value(t, nu, n, null)?,
        z_crit: t_crit / libm::sqrt(n as f64),
        t_crit,
        significant: t.abs() >= t_crit,
        asymptotic_bound_z: asymptotic_z_bound(alpha, nu, null)?,
    })
}

pub fn dist_test(
    summary: &ExperimentSummary,
    alpha: f64,
    null: DistributionalNull,
) -> Result<DistTestReport> {
    let (t, nu) = summary.t_statistic();
    dist_test_t(t, nu, summary.n(), alpha, null)
}
