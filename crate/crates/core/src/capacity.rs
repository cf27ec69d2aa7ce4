//! Analytic capacity of unions of real segments and the extremal function.
//!
//! For a compact E ⊂ ℝ the analytic capacity is C(E) = |E|/4
//! (Ivanov-Pommerenke) and the extremal (Ahlfors) function is explicit:
//!
//! ```text
//! f_E(z) = (e^{φ/2} - 1)/(e^{φ/2} + 1) = tanh(φ_E(z)/4),
//! φ_E(z) = ∫_E dt/(z - t) = Σ log((z - aᵢ)/(z - bᵢ)).
//! ```
//!
//! |f_E| ≤ 1 off E because Im φ_E stays inside (-π, π) and tanh maps the
//! strip |Im w| < π/4 into the unit disk. The derivative at infinity
//! lim z·f_E(z) recovers the capacity; averaging z·f_E over symmetric points
//! of a large circle cancels the O(1/z) moment term and leaves an O(R⁻²)
//! (or better) verification error.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CapacityError {
    #[error("interval {0} is degenerate or reversed")]
    BadInterval(usize),
    #[error("intervals {0} and {1} overlap or touch")]
    Overlap(usize, usize),
    #[error("non-finite interval endpoint in interval {0}")]
    NonFinite(usize),
}

/// The Ahlfors function of a finite union of disjoint real segments.
#[derive(Debug, Clone, Serialize)]
pub struct AhlforsFunction {
    intervals: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CapacityResult {
    /// |E|/4.
    pub capacity: f64,
    pub ahlfors: AhlforsFunction,
}

/// Validate the union and return its capacity together with the extremal
/// function handle.
pub fn capacity_segments(intervals: &[(f64, f64)]) -> Result<CapacityResult, CapacityError> {
    for (i, &(a, b)) in intervals.iter().enumerate() {
        if !a.is_finite() || !b.is_finite() {
            return Err(CapacityError::NonFinite(i));
        }
        if !(a < b) {
            return Err(CapacityError::BadInterval(i));
        }
    }
    for i in 1..intervals.len() {
        if intervals[i].0 <= intervals[i - 1].1 {
            return Err(CapacityError::Overlap(i - 1, i));
        }
    }
    let length: f64 = intervals.iter().map(|&(a, b)| b - a).sum();
    Ok(CapacityResult {
        capacity: length / 4.0,
        ahlfors: AhlforsFunction {
            intervals: intervals.to_vec(),
        },
    })
}

impl AhlforsFunction {
    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    /// Whether z lies on the set E (up to exact endpoint inclusion).
    pub fn on_set(&self, z: Complex64) -> bool {
        z.im == 0.0
            && self
                .intervals
                .iter()
                .any(|&(a, b)| z.re >= a && z.re <= b)
    }

    /// φ_E(z) = Σ log((z - a)/(z - b)), principal branch off E.
    pub fn phi(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(a, b) in &self.intervals {
            // log((z-a)/(z-b)) = log(1 + (b-a)/(z-b)), stable for large z.
            let w = Complex64::new(b - a, 0.0) / (z - Complex64::new(b, 0.0));
            acc += ln_1p(w);
        }
        acc
    }

    /// f_E(z) = tanh(φ_E(z)/4).
    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.phi(z) / 4.0).tanh()
    }

    /// lim z·f_E(z) estimated by averaging over `samples` equispaced points
    /// of the circle |z| = radius; the average kills every moment term whose
    /// order is not a multiple of `samples`.
    pub fn derivative_at_infinity(&self, radius: f64, samples: usize) -> Complex64 {
        let n = samples.max(1);
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let theta = std::f64::consts::TAU * (j as f64 + 0.37) / n as f64;
            let z = Complex64::from_polar(radius, theta);
            acc += z * self.eval(z);
        }
        acc / n as f64
    }
}

fn ln_1p(w: Complex64) -> Complex64 {
    if w.norm() < 1e-3 {
        // ln(1+w) by series; keeps full precision when 1+w rounds to 1.
        let mut term = w;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 1..=6 {
            acc += term / k as f64;
            term *= -w;
        }
        acc
    } else {
        (Complex64::new(1.0, 0.0) + w).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_segment_capacity() {
        let r = capacity_segments(&[(-1.0, 1.0)]).unwrap();
        assert_eq!(r.capacity, 0.5);
    }

    #[test]
    fn empty_set_capacity_zero() {
        let r = capacity_segments(&[]).unwrap();
        assert_eq!(r.capacity, 0.0);
        let f = r.ahlfors.eval(Complex64::new(2.0, 1.0));
        assert_eq!(f, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn two_segments_large_z_limit() {
        let r = capacity_segments(&[(0.0, 1.0), (2.0, 3.0)]).unwrap();
        assert_eq!(r.capacity, 0.5);
        let est = r.ahlfors.derivative_at_infinity(1e6, 8);
        assert!(
            (est.re - 0.5).abs() < 1e-8 * 0.5 && est.im.abs() < 1e-8,
            "est={est}"
        );
    }

    #[test]
    fn overlapping_intervals_rejected() {
        assert!(matches!(
            capacity_segments(&[(0.0, 1.0), (0.5, 2.0)]),
            Err(CapacityError::Overlap(0, 1))
        ));
        assert!(capacity_segments(&[(0.0, 1.0), (1.0, 2.0)]).is_err());
    }

    #[test]
    fn modulus_bounded_by_one_off_set() {
        let r = capacity_segments(&[(-2.0, -1.0), (0.5, 1.5), (3.0, 3.25)]).unwrap();
        let mut worst = 0.0f64;
        for i in 0..40 {
            for j in 0..40 {
                let z = Complex64::new(-4.0 + 0.21 * i as f64, -2.0 + 0.103 * j as f64 + 0.001);
                if !r.ahlfors.on_set(z) {
                    worst = worst.max(r.ahlfors.eval(z).norm());
                }
            }
        }
        assert!(worst <= 1.0 + 1e-12, "max |f| = {worst}");
    }

    #[test]
    fn phi_matches_direct_quadrature() {
        // ∫_0^1 dt/(z-t) at z = 2+i against the closed form.
        let r = capacity_segments(&[(0.0, 1.0)]).unwrap();
        let z = Complex64::new(2.0, 1.0);
        let direct = {
            let n = 20000;
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..n {
                let t = (i as f64 + 0.5) / n as f64;
                acc += Complex64::new(1.0, 0.0) / (z - Complex64::new(t, 0.0));
            }
            acc / n as f64
        };
        let phi = r.ahlfors.phi(z);
        assert!((phi - direct).norm() < 1e-6, "phi={phi} direct={direct}");
    }
}
