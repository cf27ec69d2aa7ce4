//! Bracketed root refinement and one-dimensional maximization.
//!
//! The band-structure search only ever refines roots inside a sign-change
//! bracket, so a safeguarded secant step (fall back to bisection whenever the
//! secant leaves the bracket or stalls) is sufficient and derivative-free.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RootError<E> {
    #[error("no sign change on the bracket [{a}, {b}] (f(a)={fa}, f(b)={fb})")]
    NoSignChange { a: f64, b: f64, fa: f64, fb: f64 },
    #[error("root refinement did not converge in {0} iterations")]
    MaxIterations(usize),
    #[error("function evaluation failed: {0}")]
    Eval(#[source] E),
}

/// Root of f inside [a, b], given f(a) and f(b) of opposite sign.
/// Secant steps safeguarded by bisection; terminates when the bracket is
/// shorter than `xtol`.
pub fn refine_root<E>(
    f: &mut impl FnMut(f64) -> Result<f64, E>,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<f64, RootError<E>> {
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NoSignChange { a, b, fa, fb });
    }
    for _ in 0..max_iter {
        if (b - a).abs() <= xtol {
            return Ok(0.5 * (a + b));
        }
        let mid = 0.5 * (a + b);
        let secant = b - fb * (b - a) / (fb - fa);
        let lo = a.min(b);
        let hi = a.max(b);
        let margin = 0.01 * (hi - lo);
        let x = if secant.is_finite() && secant > lo + margin && secant < hi - margin {
            secant
        } else {
            mid
        };
        let fx = f(x).map_err(RootError::Eval)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
    }
    Err(RootError::MaxIterations(max_iter))
}

/// Maximizer of f on [a, b] by golden-section search; returns (x, f(x)).
pub fn golden_max<E>(
    f: &mut impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<(f64, f64), RootError<E>> {
    let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut lo = a;
    let mut hi = b;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1).map_err(RootError::Eval)?;
    let mut f2 = f(x2).map_err(RootError::Eval)?;
    for _ in 0..max_iter {
        if (hi - lo).abs() <= xtol {
            break;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1).map_err(RootError::Eval)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2).map_err(RootError::Eval)?;
        }
    }
    let xm = 0.5 * (lo + hi);
    let fm = f(xm).map_err(RootError::Eval)?;
    if f1 >= f2 && f1 >= fm {
        Ok((x1, f1))
    } else if f2 >= fm {
        Ok((x2, f2))
    } else {
        Ok((xm, fm))
    }
}
