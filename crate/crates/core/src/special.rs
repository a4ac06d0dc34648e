//! Student-t and normal distribution functions.
//!
//! `T_ν(x)` is evaluated through the regularized incomplete beta function,
//! `P(T > x) = ½ I_{ν/(ν+x²)}(ν/2, ½)` for `x ≥ 0`, with the other half of
//! the line obtained by symmetry. Both `ν/(ν+x²)` and its complement
//! `x²/(ν+x²)` are formed directly so neither tail loses precision to
//! cancellation.

use core::fmt;

use crate::solve::brent_root;
use crate::{Error, Result};

/// Degrees of freedom `ν` of a t distribution. Any finite `ν > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DegreesOfFreedom(f64);

impl DegreesOfFreedom {
    pub fn new(nu: f64) -> Result<Self> {
        if nu.is_finite() && nu > 0.0 {
            Ok(DegreesOfFreedom(nu))
        } else {
            Err(Error::domain("nu", nu, "a finite value > 0"))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for DegreesOfFreedom {
    type Error = Error;

    fn try_from(nu: f64) -> Result<Self> {
        DegreesOfFreedom::new(nu)
    }
}

impl fmt::Display for DegreesOfFreedom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Probability(f64);

impl Probability {
    pub fn new(p: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&p) {
            Ok(Probability(p))
        } else {
            Err(Error::domain("probability", p, "a value in [0, 1]"))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    pub fn complement(self) -> Self {
        Probability(1.0 - self.0)
    }
}

impl TryFrom<f64> for Probability {
    type Error = Error;

    fn try_from(p: f64) -> Result<Self> {
        Probability::new(p)
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

const CF_MAX_ITER: usize = 10_000;
const TINY: f64 = 1e-300;

fn ln_beta(a: f64, b: f64) -> f64 {
    libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b)
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::domain("a", a, "a finite value > 0"));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::domain("b", b, "a finite value > 0"));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain("x", x, "a value in [0, 1]"));
    }
    Ok(inc_beta_pair(x, 1.0 - x, a, b).0)
}

/// `(I_x(a, b), 1 − I_x(a, b))` where the caller supplies `y = 1 − x`
/// computed without cancellation. Whichever of the two is small is
/// evaluated directly.
pub(crate) fn inc_beta_pair(x: f64, y: f64, a: f64, b: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (0.0, 1.0);
    }
    if y <= 0.0 {
        return (1.0, 0.0);
    }
    if x <= (a + 1.0) / (a + b + 2.0) {
        let lower = inc_beta_direct(x, y, a, b);
        (lower, 1.0 - lower)
    } else {
        let upper = inc_beta_direct(y, x, b, a);
        (1.0 - upper, upper)
    }
}

fn inc_beta_direct(x: f64, y: f64, a: f64, b: f64) -> f64 {
    if x <= 0.1 && b * x <= 0.7 {
        inc_beta_series(x, a, b)
    } else {
        inc_beta_cf(x, y, a, b)
    }
}

/// `I_x(a,b) = x^a / B(a,b) · Σ (1−b)_n / n! · x^n / (a+n)`.
pub(crate) fn inc_beta_series(x: f64, a: f64, b: f64) -> f64 {
    let mut sum = 1.0 / a;
    let mut term = 1.0;
    for n in 1..CF_MAX_ITER {
        let n = n as f64;
        term *= (n - b) * x / n;
        let contrib = term / (a + n);
        sum += contrib;
        if contrib.abs() <= f64::EPSILON * sum.abs() {
            break;
        }
    }
    libm::exp(a * libm::log(x) - ln_beta(a, b)) * sum
}

/// Continued fraction for `I_x(a,b)`, modified Lentz evaluation. Converges
/// quickly for `x < (a+1)/(a+b+2)`.
pub(crate) fn inc_beta_cf(x: f64, y: f64, a: f64, b: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() <= f64::EPSILON {
            break;
        }
    }
    let ln_front = a * libm::log(x) + b * libm::log(y) - ln_beta(a, b);
    libm::exp(ln_front) * h / a
}

/// `P(T > t)` for `t ≥ 0`.
fn t_upper_tail(t: f64, nu: f64) -> f64 {
    if t == 0.0 {
        return 0.5;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let r = t / libm::sqrt(nu);
    let r2 = r * r;
    let (z, w) = if r2.is_finite() {
        (1.0 / (1.0 + r2), r2 / (1.0 + r2))
    } else {
        let inv = 1.0 / r;
        (inv * inv, 1.0)
    };
    0.5 * inc_beta_pair(z, w, 0.5 * nu, 0.5).0
}

/// Student-t CDF `T_ν(x)`. NaN propagates.
pub fn t_cdf(x: f64, nu: DegreesOfFreedom) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x >= 0.0 {
        1.0 - t_upper_tail(x, nu.get())
    } else {
        t_upper_tail(-x, nu.get())
    }
}

/// Survival function `1 − T_ν(x)`, accurate deep into the upper tail.
pub fn t_sf(x: f64, nu: DegreesOfFreedom) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x >= 0.0 {
        t_upper_tail(x, nu.get())
    } else {
        1.0 - t_upper_tail(-x, nu.get())
    }
}

/// Inverse Student-t CDF `T_ν⁻¹(p)` for `0 < p < 1`.
///
/// Solves for the tail probability `min(p, 1 − p)` with a bracketed Brent
/// iteration, so `t_quantile(1 − p) = −t_quantile(p)` holds exactly.
pub fn t_quantile(p: f64, nu: DegreesOfFreedom) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain("p", p, "a value in (0, 1)"));
    }
    if p == 0.0 || p == 1.0 {
        return Err(Error::UnboundedQuantile { p });
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let (tail, sign) = if p < 0.5 { (p, -1.0) } else { (1.0 - p, 1.0) };
    let nu = nu.get();

    let mut lo = 0.0;
    let mut hi = 1.0;
    while t_upper_tail(hi, nu) > tail {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::SolverFailure { what: "t quantile bracket" });
        }
    }
    let t = brent_root(|t| t_upper_tail(t, nu) - tail, lo, hi, 0.0, 500)?;
    Ok(sign * t)
}

/// Standard normal CDF `Φ(x)`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}
