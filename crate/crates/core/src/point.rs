//! Point-form null hypothesis testing (`μ = 0` in every experiment).
//!
//! The p-value convention follows the `|z|` form `1 − T_ν(|z|√N)`, i.e. the
//! tail probability of the absolute statistic, with significance at level
//! `α` when `|z| ≥ Z_crit = T_ν⁻¹(1−α)/√N`. [`two_sided`] doubles a p-value
//! for callers who want the conventional two-sided number; it is not used in
//! any verdict.

use crate::special::{normal_cdf, t_quantile, t_sf, DegreesOfFreedom};
use crate::summary::{check_n, ExperimentSummary};
use crate::{Error, Result};

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 0.5 {
        Ok(())
    } else {
        Err(Error::domain("alpha", alpha, "a significance level in (0, 0.5)"))
    }
}

/// `1 − T_ν(|z|·√N)` for the normalised mean `z = x̄/s`.
pub fn point_p_value(z: f64, n: u64, nu: DegreesOfFreedom) -> Result<f64> {
    check_n(n)?;
    Ok(t_sf(z.abs() * libm::sqrt(n as f64), nu))
}

/// `Z_crit = T_ν⁻¹(1−α)/√N`.
pub fn point_z_crit(alpha: f64, n: u64, nu: DegreesOfFreedom) -> Result<f64> {
    check_alpha(alpha)?;
    check_n(n)?;
    Ok(t_quantile(1.0 - alpha, nu)? / libm::sqrt(n as f64))
}

/// `T_ν⁻¹(1−α)`: the point-form critical value on the t scale.
pub fn point_t_crit(alpha: f64, nu: DegreesOfFreedom) -> Result<f64> {
    check_alpha(alpha)?;
    t_quantile(1.0 - alpha, nu)
}

/// Doubles a one-tail p-value, capped at 1.
pub fn two_sided(p: f64) -> f64 {
    (2.0 * p).min(1.0)
}

/// Which quantile enters the power-based replication approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PowerQuantile {
    /// `T_ν⁻¹(α)`. For `α < 0.5` this
    /// quantile is negative, so the estimate is large even for `t₁ = 0`.
    #[default]
    LowerAlpha,
    /// `T_ν⁻¹(1−α)`, the upper critical value.
    UpperCritical,
}

/// Power-based replication estimate
/// `1 − Φ((c − t₁) / √(1 + c²/(2ν)))` where `c` is chosen by `quantile`.
///
/// This treats `μ = x̄₁` as known (a normal approximation to the noncentral
/// t). It is provided for comparison with
/// [`replication_probability`](crate::dist::replication_probability).
pub fn power_replication_estimate(
    t1: f64,
    alpha: f64,
    nu: DegreesOfFreedom,
    quantile: PowerQuantile,
) -> Result<f64> {
    if nu.get() < 1.0 {
        return Err(Error::domain("nu", nu.get(), "at least 1"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain("alpha", alpha, "a value in (0, 1)"));
    }
    let c = match quantile {
        PowerQuantile::LowerAlpha => t_quantile(alpha, nu)?,
        PowerQuantile::UpperCritical => t_quantile(1.0 - alpha, nu)?,
    };
    let x = (c - t1) / libm::sqrt(1.0 + c * c / (2.0 * nu.get()));
    Ok(normal_cdf(-x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointTestReport {
    pub t_stat: f64,
    pub nu: DegreesOfFreedom,
    pub n: u64,
    pub alpha: f64,
    pub p_value: f64,
    pub z_crit: f64,
    pub t_crit: f64,
    pub significant: bool,
}

/// Point-form test of a t statistic with per-group sample size `n`.
pub fn point_test_t(t: f64, nu: DegreesOfFreedom, n: u64, alpha: f64) -> Result<PointTestReport> {
    check_alpha(alpha)?;
    check_n(n)?;
    let t_crit = t_quantile(1.0 - alpha, nu)?;
    Ok(PointTestReport {
        t_stat: t,
        nu,
        n,
        alpha,
        p_value: t_sf(t.abs(), nu),
        z_crit: t_crit / libm::sqrt(n as f64),
        t_crit,
        significant: t.abs() >= t_crit,
    })
}

pub fn point_test(summary: &ExperimentSummary, alpha: f64) -> Result<PointTestReport> {
    let (t, nu) = summary.t_statistic();
    point_test_t(t, nu, summary.n(), alpha)
}
