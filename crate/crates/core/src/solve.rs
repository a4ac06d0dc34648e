//! One-dimensional root finding and minimization.

use crate::{Error, Result};

/// Brent's method for a root of `f` in `[a, b]`.
///
/// `f(a)` and `f(b)` must have opposite signs (or one of them be zero).
/// Iteration stops once the bracket is narrower than
/// `2·eps·|x| + x_tol / 2`.
pub fn brent_root<F>(mut f: F, a: f64, b: f64, x_tol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::SolverFailure { what: "root not bracketed" });
    }

    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * x_tol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                // secant
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                // inverse quadratic interpolation
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Err(Error::SolverFailure { what: "brent iteration limit" })
}

/// Bisection for `g(x) = 0` on `[lo, hi]` where `g(lo)` and `g(hi)` have
/// opposite signs. Returns the first midpoint with `|g| <= g_tol`.
///
/// Fails if the bracket collapses to adjacent floating-point values first.
pub fn bisect<G>(mut g: G, mut lo: f64, mut hi: f64, g_tol: f64) -> Result<f64>
where
    G: FnMut(f64) -> f64,
{
    let g_lo = g(lo);
    if g_lo.abs() <= g_tol {
        return Ok(lo);
    }
    let g_hi = g(hi);
    if g_hi.abs() <= g_tol {
        return Ok(hi);
    }
    if g_lo.signum() == g_hi.signum() {
        return Err(Error::SolverFailure { what: "bisection bracket has no sign change" });
    }
    let lo_sign = g_lo.signum();
    for _ in 0..2_000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        let gm = g(mid);
        if gm.abs() <= g_tol {
            return Ok(mid);
        }
        if gm.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::SolverFailure { what: "bisection tolerance not met" })
}

/// Golden-section search for the minimum of a unimodal `f` on `[a, b]`.
///
/// Returns `(x_min, f(x_min))` once the bracket is narrower than `x_tol`.
pub fn golden_section_min<F>(mut f: F, a: f64, b: f64, x_tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    // 1/φ
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a) > x_tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_cubic_root() {
        let r = brent_root(|x| x * x * x - 2.0 * x - 5.0, 2.0, 3.0, 0.0, 100).unwrap();
        assert!((r - 2.094_551_481_542_326_5).abs() < 1e-14);
    }

    #[test]
    fn brent_rejects_unbracketed() {
        assert!(brent_root(|x| x * x + 1.0, -1.0, 1.0, 0.0, 100).is_err());
    }

    #[test]
    fn bisect_meets_value_tolerance() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((r * r - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn bisect_reports_unreachable_tolerance() {
        // a jump discontinuity never gets within tolerance of zero
        let err = bisect(|x| if x < 1.0 { -1.0 } else { 1.0 }, 0.0, 2.0, 1e-3);
        assert!(matches!(err, Err(Error::SolverFailure { .. })));
    }

    #[test]
    fn golden_section_on_parabola() {
        let (x, fx) = golden_section_min(|x| (x - 0.3) * (x - 0.3) + 1.0, -5.0, 5.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-14);
    }

    #[test]
    fn golden_section_on_kink() {
        let (x, _) = golden_section_min(|x| (x - 1.5).abs(), 0.0, 10.0, 1e-12);
        assert!((x - 1.5).abs() < 1e-11);
    }
}
