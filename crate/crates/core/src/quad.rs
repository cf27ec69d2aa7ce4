//! Gauss-Legendre quadrature with order doubling.
//!
//! Everything integrated here is either analytic on the closed interval or
//! piecewise smooth with known breakpoints, so a fixed-node Gauss rule with
//! order doubling is both simpler and faster than adaptive panel splitting.
//! Endpoint square-root behaviour is always absorbed upstream by the
//! substitution x = mid + r·sinθ (see [`sin_substitution`]), after which the
//! integrand is analytic in θ and the rule converges spectrally.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuadError<E> {
    #[error("quadrature did not converge: best estimate {best}, error estimate {err}")]
    NoConvergence { best: f64, err: f64 },
    #[error("integrand evaluation failed: {0}")]
    Eval(#[source] E),
}

type Rule = Arc<(Vec<f64>, Vec<f64>)>;

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> Rule {
    static CACHE: OnceLock<Mutex<BTreeMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(compute_gauss_legendre(n)))
        .clone()
}

fn compute_gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_and_derivative(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Fixed n-point Gauss-Legendre approximation of ∫_a^b f.
pub fn gauss_fixed<E>(
    f: &mut impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    n: usize,
) -> Result<f64, E> {
    let rule = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in rule.0.iter().zip(rule.1.iter()) {
        acc += w * f(mid + half * x)?;
    }
    Ok(half * acc)
}

/// ∫_a^b f with the order doubled until two consecutive estimates agree to
/// max(abs_tol, rel_tol·|I|). Interior breakpoints split the interval so each
/// piece is smooth; the tolerance is shared across pieces.
pub fn integrate_to_tol<E>(
    f: &mut impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64, QuadError<E>> {
    let mut edges = vec![a];
    for &p in breakpoints {
        if p > a && p < b {
            edges.push(p);
        }
    }
    edges.push(b);
    let pieces = (edges.len() - 1) as f64;
    let mut total = 0.0;
    for w in edges.windows(2) {
        total += integrate_piece(f, w[0], w[1], abs_tol / pieces, rel_tol)?;
    }
    Ok(total)
}

fn integrate_piece<E>(
    f: &mut impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64, QuadError<E>> {
    let mut n = 16;
    let mut prev = gauss_fixed(f, a, b, n).map_err(QuadError::Eval)?;
    while n <= 2048 {
        n *= 2;
        let cur = gauss_fixed(f, a, b, n).map_err(QuadError::Eval)?;
        let err = (cur - prev).abs();
        if err <= abs_tol.max(rel_tol * cur.abs()) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(QuadError::NoConvergence {
        best: prev,
        err: f64::NAN,
    })
}

/// ∫ over the interval (lo, hi) of an integrand vanishing like a square root
/// at both endpoints: substitutes x = mid + r·sinθ, θ ∈ [-π/2, π/2], which
/// turns the root behaviour into an analytic function of θ.
pub fn sin_substitution<E>(
    f: &mut impl FnMut(f64) -> Result<f64, E>,
    lo: f64,
    hi: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64, QuadError<E>> {
    let mid = 0.5 * (lo + hi);
    let r = 0.5 * (hi - lo);
    let mut g = |theta: f64| -> Result<f64, E> {
        let x = mid + r * theta.sin();
        Ok(f(x)? * r * theta.cos())
    };
    integrate_to_tol(
        &mut g,
        -std::f64::consts::FRAC_PI_2,
        std::f64::consts::FRAC_PI_2,
        &[],
        abs_tol,
        rel_tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    fn ok(f: impl Fn(f64) -> f64) -> impl FnMut(f64) -> Result<f64, Infallible> {
        move |x| Ok(f(x))
    }

    #[test]
    fn nodes_integrate_polynomials_exactly() {
        // n-point rule is exact through degree 2n-1.
        let mut f = ok(|x| x.powi(13) + 3.0 * x.powi(4));
        let got = gauss_fixed(&mut f, -1.0, 1.0, 8).unwrap();
        assert!((got - 6.0 / 5.0).abs() < 1e-14, "got {got}");
    }

    #[test]
    fn doubling_reaches_tolerance_on_oscillation() {
        let mut f = ok(|x: f64| (20.0 * x).cos());
        let got = integrate_to_tol(&mut f, 0.0, 1.0, &[], 1e-14, 1e-13).unwrap();
        let exact = 20.0f64.sin() / 20.0;
        assert!((got - exact).abs() < 1e-12, "got {got}, exact {exact}");
    }

    #[test]
    fn sin_substitution_handles_sqrt_endpoints() {
        // ∫_{-1}^{1} √(1-x²) dx = π/2.
        let mut f = ok(|x: f64| (1.0 - x * x).max(0.0).sqrt());
        let got = sin_substitution(&mut f, -1.0, 1.0, 1e-13, 1e-13).unwrap();
        assert!(
            (got - std::f64::consts::FRAC_PI_2).abs() < 1e-12,
            "got {got}"
        );
    }

    #[test]
    fn breakpoints_split_kinks() {
        // |x - 1/3| on [0,1]: kink resolved exactly when split there.
        let mut f = ok(|x: f64| (x - 1.0 / 3.0).abs());
        let got = integrate_to_tol(&mut f, 0.0, 1.0, &[1.0 / 3.0], 1e-14, 1e-13).unwrap();
        let exact = (1.0 / 9.0 + 4.0 / 9.0) / 2.0;
        assert!((got - exact).abs() < 1e-13, "got {got}, exact {exact}");
    }
}
