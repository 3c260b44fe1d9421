//! Bracketing root finder and golden-section minimizer.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Stop when |f(x)| <= f_tol.
    pub f_tol: f64,
    /// Stop when the bracket is narrower than x_tol.
    pub x_tol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions { f_tol: 0.0, x_tol: 1e-15, max_iter: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
    /// Final bracket.
    pub lo: f64,
    pub hi: f64,
}

/// Finds a sign change of `f` in [lo, hi].
///
/// Illinois-modified regula falsi; a bisection step is forced whenever the
/// bracket fails to halve over two consecutive steps, so the bracket
/// always shrinks at least as fast as plain bisection every other step.
pub fn bracketed_root<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, opts: RootOptions) -> Result<Root> {
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa.is_nan() || fb.is_nan() {
        return Err(Error::Numeric { message: "NaN at bracket end".into(), lo: a, hi: b });
    }
    if fa.abs() <= opts.f_tol || fa == 0.0 {
        return Ok(Root { x: a, fx: fa, iterations: 0, lo: a, hi: b });
    }
    if fb.abs() <= opts.f_tol || fb == 0.0 {
        return Ok(Root { x: b, fx: fb, iterations: 0, lo: a, hi: b });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Numeric { message: "root not bracketed".into(), lo: a, hi: b });
    }

    let mut side = 0i8;
    let mut ref_width = (b - a).abs();
    let mut stalled = 0usize;
    for it in 1..=opts.max_iter {
        let mut x = if stalled >= 2 {
            0.5 * (a + b)
        } else {
            (a * fb - b * fa) / (fb - fa)
        };
        if !x.is_finite() || x <= a.min(b) || x >= a.max(b) {
            x = 0.5 * (a + b);
        }
        let fx = f(x);
        if fx.is_nan() {
            return Err(Error::Numeric { message: "NaN inside bracket".into(), lo: a, hi: b });
        }
        if fx.abs() <= opts.f_tol || fx == 0.0 {
            return Ok(Root { x, fx, iterations: it, lo: a, hi: b });
        }
        if fx.signum() == fb.signum() {
            b = x;
            fb = fx;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = x;
            fa = fx;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        let new_width = (b - a).abs();
        stalled += 1;
        if new_width <= 0.5 * ref_width {
            stalled = 0;
            ref_width = new_width;
        }
        let mid = 0.5 * (a + b);
        if new_width <= opts.x_tol || mid == a || mid == b {
            let (x, fx) = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
            return Ok(Root { x, fx, iterations: it, lo: a.min(b), hi: a.max(b) });
        }
    }
    Err(Error::Numeric {
        message: format!("no convergence in {} iterations", opts.max_iter),
        lo: a.min(b),
        hi: a.max(b),
    })
}

/// Safeguarded Newton iteration for a sign change of `f` in [lo, hi].
///
/// `fdf` returns the value and derivative. A Newton step is replaced by
/// bisection when it would leave the bracket or is not at least twice as
/// short as the step before last.
pub fn newton_bracketed<F: FnMut(f64) -> (f64, f64)>(mut fdf: F, lo: f64, hi: f64, opts: RootOptions) -> Result<Root> {
    let (mut a, mut b) = (lo, hi);
    let fa = fdf(a).0;
    let fb = fdf(b).0;
    if fa.is_nan() || fb.is_nan() {
        return Err(Error::Numeric { message: "NaN at bracket end".into(), lo: a, hi: b });
    }
    if fa.abs() <= opts.f_tol || fa == 0.0 {
        return Ok(Root { x: a, fx: fa, iterations: 0, lo: a, hi: b });
    }
    if fb.abs() <= opts.f_tol || fb == 0.0 {
        return Ok(Root { x: b, fx: fb, iterations: 0, lo: a, hi: b });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Numeric { message: "root not bracketed".into(), lo: a, hi: b });
    }
    let sa = fa.signum();
    let mut x = (a * fb - b * fa) / (fb - fa);
    let mut step_old = (b - a).abs();
    let mut step = step_old;
    for it in 1..=opts.max_iter {
        let (fx, dfx) = fdf(x);
        if fx.is_nan() {
            return Err(Error::Numeric { message: "NaN inside bracket".into(), lo: a, hi: b });
        }
        if fx.abs() <= opts.f_tol || fx == 0.0 {
            return Ok(Root { x, fx, iterations: it, lo: a.min(b), hi: a.max(b) });
        }
        if fx.signum() == sa {
            a = x;
        } else {
            b = x;
        }
        let newton = x - fx / dfx;
        let inside = newton.is_finite() && newton > a.min(b) && newton < a.max(b);
        if inside && (2.0 * fx).abs() <= (step_old * dfx).abs() {
            step_old = step;
            step = (newton - x).abs();
            x = newton;
        } else {
            step_old = step;
            step = 0.5 * (b - a).abs();
            x = 0.5 * (a + b);
        }
        let mid = 0.5 * (a + b);
        if step <= opts.x_tol || mid == a || mid == b {
            return Ok(Root { x, fx: fdf(x).0, iterations: it, lo: a.min(b), hi: a.max(b) });
        }
    }
    Err(Error::Numeric {
        message: format!("no convergence in {} iterations", opts.max_iter),
        lo: a.min(b),
        hi: a.max(b),
    })
}

/// Plain bisection on a predicate that is true on [lo, s*) and false on
/// (s*, hi]. Returns the last `true` point.
pub fn bisect_predicate<P: FnMut(f64) -> bool>(mut inside: P, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Golden-section search for the minimum of a unimodal function on [a, b].
pub fn golden_section_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
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
    fn finds_cubic_root() {
        let r = bracketed_root(|x| x * x * x - 2.0, 0.0, 2.0, RootOptions { f_tol: 1e-14, ..Default::default() })
            .unwrap();
        assert!((r.x - 2f64.cbrt()).abs() < 1e-13);
        assert!(r.iterations < 40);
    }

    #[test]
    fn decreasing_function() {
        let r = bracketed_root(|x| 1.0 - x.exp(), -1.0, 3.0, RootOptions { f_tol: 1e-15, ..Default::default() })
            .unwrap();
        assert!(r.x.abs() < 1e-14);
    }

    #[test]
    fn reports_unbracketed() {
        let e = bracketed_root(|x| x * x + 1.0, -1.0, 1.0, RootOptions::default()).unwrap_err();
        assert!(matches!(e, Error::Numeric { .. }));
    }

    #[test]
    fn iteration_cap_carries_bracket() {
        let opts = RootOptions { f_tol: 0.0, x_tol: 0.0, max_iter: 3 };
        match bracketed_root(|x| x - 0.3, 0.0, 1.0, opts) {
            Err(Error::Numeric { lo, hi, .. }) => assert!(lo <= 0.3 && 0.3 <= hi),
            Ok(r) => assert!((r.x - 0.3).abs() < 1e-15),
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn golden_section() {
        let (x, fx) = golden_section_min(|x| (x - 0.7).powi(2) + 1.0, 0.0, 2.0, 1e-10);
        assert!((x - 0.7).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-15);
    }

    #[test]
    fn newton_converges_fast() {
        let r = newton_bracketed(|x| (x * x * x - 2.0, 3.0 * x * x), 0.0, 2.0, RootOptions { f_tol: 1e-15, ..Default::default() })
            .unwrap();
        assert!((r.x - 2f64.cbrt()).abs() < 1e-14);
        assert!(r.iterations < 12);
    }

    #[test]
    fn predicate_bisection() {
        let s = bisect_predicate(|x| x < 0.25, 0.0, 1.0, 1e-14);
        assert!((s - 0.25).abs() < 1e-13);
    }
}
