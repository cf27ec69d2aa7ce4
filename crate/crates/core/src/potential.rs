//! Real 1-periodic potentials for the Zakharov-Shabat system.
//!
//! A potential is the pair of scalar components (V1, V2) of the symmetric
//! matrix V = [[V1, V2], [V2, -V1]] on the unit period. The squared L² size
//! ∫₀¹ (V1² + V2²) dt is reported together with its doubled value, because
//! the two conventions differ by the factor that also distinguishes the
//! component-wise and matrix Hilbert-Schmidt norms; the audit layer pins the
//! convention empirically per identity.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quad;

#[derive(Debug, Error)]
pub enum PotentialError {
    #[error("sampled potential needs at least 2 nodes per component, got {0}")]
    TooFewSamples(usize),
    #[error("non-finite value in potential data ({0})")]
    NonFinite(&'static str),
    #[error("quadrature for the potential norm did not converge (best estimate {best}, error {err})")]
    NormQuadrature { best: f64, err: f64 },
}

/// A real 1-periodic potential, period fixed to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PotentialSpec {
    /// V ≡ 0; the free system with Δ(z) = cos z.
    Zero,
    /// V1 = 0, V2 ≡ a.
    ConstantOffDiagonal { a: f64 },
    /// Finite trigonometric series per component:
    /// Vi(t) = Σ_j cos_j · cos(2πjt) + Σ_j sin_j · sin(2πjt),
    /// lists indexed by frequency j starting at 0 (the j = 0 sine term is
    /// identically zero and kept only for uniform indexing).
    Fourier {
        #[serde(default)]
        v1_cos: Vec<f64>,
        #[serde(default)]
        v1_sin: Vec<f64>,
        #[serde(default)]
        v2_cos: Vec<f64>,
        #[serde(default)]
        v2_sin: Vec<f64>,
    },
    /// Equispaced samples on [0, 1] (nodes i/(m-1), both endpoints included),
    /// interpolated piecewise-linearly. First-order accurate in the grid
    /// spacing; use the Fourier kind for smooth potentials.
    Sampled { v1: Vec<f64>, v2: Vec<f64> },
}

/// Both candidate values of the squared potential norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormSq {
    /// ∫₀¹ (V1² + V2²) dt.
    pub integral: f64,
    /// 2 ∫₀¹ (V1² + V2²) dt (the matrix Hilbert-Schmidt value).
    pub doubled: f64,
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<(), PotentialError> {
        let check = |v: &[f64], what: &'static str| {
            if v.iter().any(|x| !x.is_finite()) {
                Err(PotentialError::NonFinite(what))
            } else {
                Ok(())
            }
        };
        match self {
            PotentialSpec::Zero => Ok(()),
            PotentialSpec::ConstantOffDiagonal { a } => {
                if a.is_finite() {
                    Ok(())
                } else {
                    Err(PotentialError::NonFinite("a"))
                }
            }
            PotentialSpec::Fourier {
                v1_cos,
                v1_sin,
                v2_cos,
                v2_sin,
            } => {
                check(v1_cos, "v1_cos")?;
                check(v1_sin, "v1_sin")?;
                check(v2_cos, "v2_cos")?;
                check(v2_sin, "v2_sin")
            }
            PotentialSpec::Sampled { v1, v2 } => {
                if v1.len() < 2 {
                    return Err(PotentialError::TooFewSamples(v1.len()));
                }
                if v2.len() < 2 {
                    return Err(PotentialError::TooFewSamples(v2.len()));
                }
                check(v1, "v1")?;
                check(v2, "v2")
            }
        }
    }

    /// Component values (V1(t), V2(t)); t is wrapped into the unit period.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        match self {
            PotentialSpec::Zero => (0.0, 0.0),
            PotentialSpec::ConstantOffDiagonal { a } => (0.0, *a),
            PotentialSpec::Fourier {
                v1_cos,
                v1_sin,
                v2_cos,
                v2_sin,
            } => (
                trig_series(v1_cos, v1_sin, t),
                trig_series(v2_cos, v2_sin, t),
            ),
            PotentialSpec::Sampled { v1, v2 } => (linear_interp(v1, t), linear_interp(v2, t)),
        }
    }

    /// Interior smoothness breakpoints in (0, 1); integrators restart there
    /// so that every step stays inside a smooth piece.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            PotentialSpec::Sampled { v1, v2 } => {
                let mut pts: Vec<f64> = Vec::new();
                for m in [v1.len(), v2.len()] {
                    for i in 1..m.saturating_sub(1) {
                        pts.push(i as f64 / (m as f64 - 1.0));
                    }
                }
                pts.sort_by(f64::total_cmp);
                pts.dedup();
                pts
            }
            _ => Vec::new(),
        }
    }

    /// ∫₀¹ (V1² + V2²) dt by composite quadrature (1e-12 relative), together
    /// with the doubled value.
    pub fn norm_sq(&self) -> Result<NormSq, PotentialError> {
        let breaks = self.breakpoints();
        let mut f = |t: f64| -> Result<f64, std::convert::Infallible> {
            let (a, b) = self.eval(t);
            Ok(a * a + b * b)
        };
        let integral = quad::integrate_to_tol(&mut f, 0.0, 1.0, &breaks, 1e-14, 1e-12)
            .map_err(|e| match e {
                quad::QuadError::NoConvergence { best, err } => {
                    PotentialError::NormQuadrature { best, err }
                }
                quad::QuadError::Eval(never) => match never {},
            })?;
        Ok(NormSq {
            integral,
            doubled: 2.0 * integral,
        })
    }
}

fn trig_series(cos_coeffs: &[f64], sin_coeffs: &[f64], t: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut acc = 0.0;
    for (j, c) in cos_coeffs.iter().enumerate() {
        acc += c * (tau * j as f64 * t).cos();
    }
    for (j, s) in sin_coeffs.iter().enumerate() {
        if j > 0 {
            acc += s * (tau * j as f64 * t).sin();
        }
    }
    acc
}

fn linear_interp(values: &[f64], t: f64) -> f64 {
    let m = values.len();
    let tt = t - t.floor();
    // t exactly 1.0 wraps to 0.0, which matches only for periodic samples;
    // the monodromy never evaluates past the final node of a segment.
    let x = tt * (m as f64 - 1.0);
    let i = (x.floor() as usize).min(m - 2);
    let frac = x - i as f64;
    values[i] * (1.0 - frac) + values[i + 1] * frac
}
