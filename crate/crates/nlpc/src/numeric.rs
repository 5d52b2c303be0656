//! Shared scalar numerics: bracketing bisection, golden-section minimization
//! and small complex helpers used by the dispersion and mode solvers.

use num_complex::Complex64;

/// Golden ratio conjugate step used by [`golden_min`].
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Bisect `f` on a bracket `[lo, hi]` with `f(lo)` and `f(hi)` of opposite
/// sign, until the interval is at floating-point resolution. Returns the
/// midpoint of the final interval.
///
/// The caller guarantees the bracket; this routine never evaluates outside
/// `[lo, hi]`.
pub fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    let f_hi = f(hi);
    if f_hi == 0.0 {
        return hi;
    }
    debug_assert!(
        f_lo.signum() != f_hi.signum(),
        "bisect requires a sign change on the bracket"
    );
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval exhausted at f64 resolution
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Like [`bisect`] but on a boolean predicate: `pred(lo) != pred(hi)`.
/// Returns the transition point.
pub fn bisect_bool(mut lo: f64, mut hi: f64, pred: impl Fn(f64) -> bool) -> f64 {
    let p_lo = pred(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) == p_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section search for the minimum of a unimodal `f` on `[lo, hi]`.
/// Stops when the interval is shorter than `tol`. Returns `(x_min, f_min)`.
pub fn golden_min(mut lo: f64, mut hi: f64, tol: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// `sin(kd)/k` evaluated from the signed square `s2 = k^2`, valid for both
/// propagating (`s2 > 0`, ordinary sine) and evanescent (`s2 < 0`,
/// hyperbolic sine) layers. The removable singularity at `k -> 0` is
/// handled by a series in `x = s2 * d^2`.
pub fn sin_over_k(s2: f64, d: f64) -> f64 {
    let x = s2 * d * d;
    if x.abs() < 1e-12 {
        // d * (1 - x/6 + x^2/120), the same series for either sign of x
        return d * (1.0 - x / 6.0 + x * x / 120.0);
    }
    if s2 > 0.0 {
        let k = s2.sqrt();
        (k * d).sin() / k
    } else {
        let kappa = (-s2).sqrt();
        (kappa * d).sinh() / kappa
    }
}

/// `cos(kd)` from the signed square `s2 = k^2`; `cosh` on the evanescent
/// branch.
pub fn cos_kd(s2: f64, d: f64) -> f64 {
    if s2 >= 0.0 {
        (s2.sqrt() * d).cos()
    } else {
        ((-s2).sqrt() * d).cosh()
    }
}

/// Closed-form `\int_0^d exp(i c z) dz` for complex `c`, with the
/// removable singularity at `c -> 0` expanded in series.
pub fn integral_exp(c: Complex64, d: f64) -> Complex64 {
    let cd = c * d;
    if cd.norm() < 1e-8 {
        let i = Complex64::i();
        return d * (Complex64::new(1.0, 0.0) + i * cd / 2.0 - cd * cd / 6.0);
    }
    let i = Complex64::i();
    ((i * cd).exp() - 1.0) / (i * c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(0.0, 2.0, |x| x * x - 2.0);
        assert_relative_eq!(r, std::f64::consts::SQRT_2, max_relative = 1e-14);
    }

    #[test]
    fn golden_min_quadratic() {
        let (x, _) = golden_min(-1.0, 3.0, 1e-10, |x| (x - 0.7) * (x - 0.7));
        assert_relative_eq!(x, 0.7, epsilon = 1e-8);
    }

    #[test]
    fn sin_over_k_branches_agree_with_direct() {
        assert_relative_eq!(sin_over_k(4.0, 0.5), (2.0f64 * 0.5).sin() / 2.0, epsilon = 1e-15);
        assert_relative_eq!(sin_over_k(-4.0, 0.5), (2.0f64 * 0.5).sinh() / 2.0, epsilon = 1e-15);
        // series region
        assert_relative_eq!(sin_over_k(1e-14, 1.0), 1.0, epsilon = 1e-12);
        assert_relative_eq!(sin_over_k(0.0, 0.25), 0.25, epsilon = 0.0);
    }

    #[test]
    fn integral_exp_matches_quadrature() {
        let c = Complex64::new(3.0, 0.0);
        let d = 0.7;
        let n = 20_000;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let z = (j as f64 + 0.5) * d / n as f64;
            acc += (Complex64::i() * c * z).exp() * (d / n as f64);
        }
        let exact = integral_exp(c, d);
        assert!((acc - exact).norm() < 1e-8);
    }
}
