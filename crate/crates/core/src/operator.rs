//! Monodromy of the Zakharov-Shabat system and the Lyapunov function.
//!
//! The first-order system J ψ' + V ψ = z ψ with J = [[0, 1], [-1, 0]] is
//! integrated as ψ' = A(t, z) ψ where
//!
//! ```text
//! A = [[ V2,       -(z + V1) ],
//!      [ z - V1,   -V2       ]]
//! ```
//!
//! A is trace-free, so det ψ(t, z) ≡ 1 (the Wronskian); tests use that as
//! the step-control sanity check. The z-derivatives needed by the effective
//! masses come from the variational systems
//!
//! ```text
//! ψ_z'  = A ψ_z  + B ψ          B = ∂A/∂z = [[0, -1], [1, 0]]
//! ψ_zz' = A ψ_zz + 2 B ψ_z
//! ```
//!
//! integrated alongside ψ with the same adaptive step sequence, so Δ' and Δ''
//! keep full accuracy near band edges where finite differences cancel.
//!
//! The stepper is Dormand-Prince 5(4) with PI step-size control. Sampled
//! potentials are integrated segment by segment between their nodes so the
//! controller never straddles a kink.

use thiserror::Error;

use crate::potential::PotentialSpec;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("step size underflow at t = {t} (z = {z}); potential too rough for the requested tolerance")]
    StepSizeUnderflow { t: f64, z: f64 },
    #[error("non-finite state at t = {t} (z = {z})")]
    NonFiniteState { t: f64, z: f64 },
}

/// Fundamental matrix at t = 1 together with the Lyapunov function and its
/// first two z-derivatives.
#[derive(Debug, Clone, Copy)]
pub struct MonodromyResult {
    pub z: f64,
    /// ψ(1, z), row-major.
    pub m: [[f64; 2]; 2],
    /// Δ(z) = ½ (m11 + m22).
    pub delta: f64,
    pub delta_prime: f64,
    pub delta_double_prime: f64,
    /// Accepted steps over the period.
    pub steps: usize,
}

impl MonodromyResult {
    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }
}

/// State layout: [ψ, ψ_z, ψ_zz], each 2×2 row-major.
type State = [f64; 12];

fn rhs(pot: &PotentialSpec, z: f64, t: f64, y: &State, dy: &mut State) {
    let (v1, v2) = pot.eval(t);
    let a11 = v2;
    let a12 = -(z + v1);
    let a21 = z - v1;
    let a22 = -v2;
    // Blocks: X' = A·X for X = ψ, plus B-coupling for the variations.
    for blk in 0..3 {
        let o = 4 * blk;
        let (x11, x12, x21, x22) = (y[o], y[o + 1], y[o + 2], y[o + 3]);
        dy[o] = a11 * x11 + a12 * x21;
        dy[o + 1] = a11 * x12 + a12 * x22;
        dy[o + 2] = a21 * x11 + a22 * x21;
        dy[o + 3] = a21 * x12 + a22 * x22;
    }
    // B·X = [[-x21, -x22], [x11, x12]].
    dy[4] += -y[2];
    dy[5] += -y[3];
    dy[6] += y[0];
    dy[7] += y[1];
    dy[8] += -2.0 * y[6];
    dy[9] += -2.0 * y[7];
    dy[10] += 2.0 * y[4];
    dy[11] += 2.0 * y[5];
}

/// Integrate the period problem ψ(0) = I and return Δ, Δ', Δ'' at z.
///
/// `tol` controls the local error (absolute and relative alike). Each
/// evaluation is a fresh integration, so calls are independent and safe to
/// run concurrently over z-grids.
pub fn integrate_monodromy(
    pot: &PotentialSpec,
    z: f64,
    tol: f64,
) -> Result<MonodromyResult, OperatorError> {
    if !(tol > 0.0) {
        return Err(OperatorError::InvalidTolerance(tol));
    }
    let mut y: State = [
        1.0, 0.0, 0.0, 1.0, // ψ = I
        0.0, 0.0, 0.0, 0.0, // ψ_z = 0
        0.0, 0.0, 0.0, 0.0, // ψ_zz = 0
    ];
    let mut steps = 0usize;
    let breaks = pot.breakpoints();
    let mut edges = vec![0.0];
    edges.extend(breaks.iter().copied().filter(|&t| t > 0.0 && t < 1.0));
    edges.push(1.0);
    for w in edges.windows(2) {
        steps += integrate_segment(pot, z, w[0], w[1], tol, &mut y)?;
    }
    let m = [[y[0], y[1]], [y[2], y[3]]];
    Ok(MonodromyResult {
        z,
        m,
        delta: 0.5 * (y[0] + y[3]),
        delta_prime: 0.5 * (y[4] + y[7]),
        delta_double_prime: 0.5 * (y[8] + y[11]),
        steps,
    })
}

// Dormand-Prince 5(4) coefficients.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [0.2];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const A7: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
// 5th-order weights minus embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn integrate_segment(
    pot: &PotentialSpec,
    z: f64,
    t0: f64,
    t1: f64,
    tol: f64,
    y: &mut State,
) -> Result<usize, OperatorError> {
    let span = t1 - t0;
    if span <= 0.0 {
        return Ok(0);
    }
    let mut t = t0;
    // Start conservatively; the controller grows the step quickly.
    let mut h = (span).min(0.05 / (1.0 + z.abs()));
    let h_min = 1e-14 * span.max(1.0);
    let mut k = [[0.0; 12]; 7];
    rhs(pot, z, t, y, &mut k[0]);
    let mut err_old: f64 = 1.0e-4;
    let mut accepted = 0usize;
    let mut rejects_in_a_row = 0usize;
    loop {
        if t >= t1 - 1e-15 * span.max(1.0) {
            return Ok(accepted);
        }
        if h < h_min {
            return Err(OperatorError::StepSizeUnderflow { t, z });
        }
        h = h.min(t1 - t);

        let mut ytmp: State = [0.0; 12];
        let tableau: [&[f64]; 6] = [&A2, &A3, &A4, &A5, &A6, &A7];
        for (s, row) in tableau.iter().enumerate() {
            for i in 0..12 {
                let mut acc = 0.0;
                for (j, a) in row.iter().enumerate() {
                    acc += a * k[j][i];
                }
                ytmp[i] = y[i] + h * acc;
            }
            rhs(pot, z, t + C[s + 1] * h, &ytmp, &mut k[s + 1]);
        }
        // Stage 7 state (A7 row) is the 5th-order solution; FSAL.
        let ynew = ytmp;

        let mut err: f64 = 0.0;
        for i in 0..12 {
            let mut e = 0.0;
            for (j, c) in E.iter().enumerate() {
                e += c * k[j][i];
            }
            e *= h;
            let scale = tol + tol * y[i].abs().max(ynew[i].abs());
            err = err.max((e / scale).abs());
        }
        if !err.is_finite() {
            if !ynew.iter().all(|v| v.is_finite()) && h <= 4.0 * h_min {
                return Err(OperatorError::NonFiniteState { t, z });
            }
            h *= 0.25;
            rhs(pot, z, t, y, &mut k[0]);
            continue;
        }

        if err <= 1.0 {
            t += h;
            *y = ynew;
            k[0] = k[6];
            accepted += 1;
            rejects_in_a_row = 0;
            let fac = 0.9 * err.max(1e-10).powf(-0.7 / 5.0) * err_old.powf(0.4 / 5.0);
            h *= fac.clamp(0.2, 5.0);
            err_old = err.max(1e-4);
        } else {
            rejects_in_a_row += 1;
            let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            h *= fac;
            if rejects_in_a_row > 200 {
                return Err(OperatorError::StepSizeUnderflow { t, z });
            }
        }
    }
}
