//! One-dimensional minimization and root bracketing.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum<T> {
    pub x: T,
    pub value: T,
    pub iterations: usize,
}

/// Golden-section search for a minimum of a unimodal `f` on `[lo, hi]`.
///
/// Stops when the bracket is narrower than `x_tol`. The best point seen so far
/// is returned, including the endpoints, so a monotone objective yields the
/// boundary value.
pub fn golden_section<T: Real, F: Fn(T) -> T>(
    f: F,
    lo: T,
    hi: T,
    x_tol: T,
    max_iter: usize,
) -> Result<Minimum<T>> {
    if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
        return Err(Error::param(
            "bracket",
            format!("empty bracket [{lo}, {hi}]"),
        ));
    }
    let inv_phi = T::lit(0.618_033_988_749_894_9);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while (b - a).abs() > x_tol {
        if iterations >= max_iter {
            return Err(Error::OptimizerNonConvergence(format!(
                "golden section bracket still {} wide after {max_iter} iterations",
                (b - a).abs()
            )));
        }
        if !(fc.is_finite() && fd.is_finite()) {
            return Err(Error::NonFinite("golden-section objective"));
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        iterations += 1;
    }
    let mut best = if fc <= fd {
        Minimum {
            x: c,
            value: fc,
            iterations,
        }
    } else {
        Minimum {
            x: d,
            value: fd,
            iterations,
        }
    };
    for edge in [lo, hi] {
        let fe = f(edge);
        if fe < best.value {
            best = Minimum {
                x: edge,
                value: fe,
                iterations,
            };
        }
    }
    Ok(best)
}

/// Brent's method for a root of `f` on a sign-changing bracket.
pub fn brent_root<T: Real, F: Fn(T) -> T>(
    f: F,
    lo: T,
    hi: T,
    x_tol: T,
    max_iter: usize,
) -> Result<T> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if !(fa.is_finite() && fb.is_finite()) {
        return Err(Error::NonFinite("root objective at bracket"));
    }
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::RootNotBracketed {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let eps = T::epsilon();
    let (mut c, mut fc) = (a, fa);
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
        let tol = two * eps * b.abs() + half * x_tol;
        let m = half * (c - b);
        if m.abs() <= tol || fb == T::zero() {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (two * m * s, T::one() - s)
            } else {
                let q0 = fa / fc;
                let r = fb / fc;
                (
                    s * (two * m * q0 * (q0 - r) - (b - a) * (r - T::one())),
                    (q0 - T::one()) * (r - T::one()) * (s - T::one()),
                )
            };
            if p > T::zero() {
                q = -q;
            } else {
                p = -p;
            }
            if two * p < (T::lit(3.0) * m * q - (tol * q).abs()).min((e * q).abs()) {
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
        b = if d.abs() > tol {
            b + d
        } else {
            b + tol * m.signum()
        };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::NonFinite("root objective"));
        }
    }
    Err(Error::OptimizerNonConvergence(format!(
        "brent root search exceeded {max_iter} iterations"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_minimum() {
        let m = golden_section(|x: f64| (x - 0.3).powi(2), -2.0, 5.0, 1e-10, 500).unwrap();
        assert!((m.x - 0.3).abs() < 1e-9);
        assert!(m.value < 1e-18);
    }

    #[test]
    fn golden_monotone_returns_edge() {
        let m = golden_section(|x: f64| x, 1.0, 2.0, 1e-10, 500).unwrap();
        assert_eq!(m.x, 1.0);
    }

    #[test]
    fn golden_rejects_empty_bracket() {
        assert!(golden_section(|x: f64| x, 1.0, 1.0, 1e-6, 10).is_err());
    }

    #[test]
    fn brent_finds_cubic_root() {
        let r = brent_root(|x: f64| x * x * x - 2.0, 0.0, 2.0, 1e-14, 200).unwrap();
        assert!((r - 2.0_f64.cbrt()).abs() < 1e-12);
    }

    #[test]
    fn brent_reports_missing_bracket() {
        let r = brent_root(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-10, 100);
        assert!(matches!(r, Err(Error::RootNotBracketed { .. })));
    }
}
