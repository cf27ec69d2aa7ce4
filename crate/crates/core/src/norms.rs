//! Weighted ℓ^p norms over a finite index window: ‖f‖_{p,ω}^p = Σ ω_n f_n^p
//! with ω_n ≥ 1; p = ∞ is the plain maximum.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NormError {
    #[error("sequence has {values} values but {indices} indices")]
    LengthMismatch { values: usize, indices: usize },
    #[error("p must satisfy p ≥ 1, got {0}")]
    BadExponent(f64),
}

/// The exponent of an ℓ^p norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PExp {
    Finite(f64),
    Infinity,
}

impl PExp {
    pub fn parse(token: &str) -> Option<PExp> {
        match token.trim() {
            "inf" | "Inf" | "INF" | "∞" => Some(PExp::Infinity),
            t => {
                let v: f64 = t.parse().ok()?;
                if v >= 1.0 {
                    Some(PExp::Finite(v))
                } else {
                    None
                }
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            PExp::Finite(p) => format!("{p}"),
            PExp::Infinity => "inf".into(),
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            PExp::Finite(p) => *p,
            PExp::Infinity => f64::INFINITY,
        }
    }

    /// Hölder conjugate: 1/p + 1/q = 1.
    pub fn conjugate(&self) -> PExp {
        match self {
            PExp::Infinity => PExp::Finite(1.0),
            PExp::Finite(p) if *p == 1.0 => PExp::Infinity,
            PExp::Finite(p) => PExp::Finite(p / (p - 1.0)),
        }
    }
}

/// Stock weight choices ω_n ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weight {
    Unit,
    OnePlusAbsN,
}

impl Weight {
    pub fn at(&self, n: i64) -> f64 {
        match self {
            Weight::Unit => 1.0,
            Weight::OnePlusAbsN => 1.0 + n.unsigned_abs() as f64,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Weight::Unit => "1",
            Weight::OnePlusAbsN => "1+|n|",
        }
    }

    pub fn parse(token: &str) -> Option<Weight> {
        match token.trim() {
            "1" | "unit" => Some(Weight::Unit),
            "1+|n|" | "one-plus-abs-n" => Some(Weight::OnePlusAbsN),
            _ => None,
        }
    }
}

/// ‖f‖_{p,ω} over the window; entries are taken by absolute value.
pub fn weighted_norm(
    values: &[f64],
    indices: &[i64],
    p: PExp,
    w: Weight,
) -> Result<f64, NormError> {
    if values.len() != indices.len() {
        return Err(NormError::LengthMismatch {
            values: values.len(),
            indices: indices.len(),
        });
    }
    match p {
        PExp::Infinity => Ok(values.iter().fold(0.0, |m, v| m.max(v.abs()))),
        PExp::Finite(p) => {
            if !(p >= 1.0) {
                return Err(NormError::BadExponent(p));
            }
            let sum: f64 = values
                .iter()
                .zip(indices.iter())
                .map(|(v, n)| w.at(*n) * v.abs().powf(p))
                .sum();
            Ok(sum.powf(1.0 / p))
        }
    }
}
