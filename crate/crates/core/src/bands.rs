//! Band edges, gap critical points and slit heights.
//!
//! On the real axis Δ is strictly monotone inside every spectral band, so Δ'
//! vanishes exactly once per gap (open or collapsed). The search therefore
//! scans Δ' for sign changes, refines each zero z_n, and classifies the gap
//! there: (-1)^n Δ(z_n) > 1 means an open gap whose edges solve
//! (-1)^n Δ = 1 on either side, while a value ≤ 1 (to tolerance) is a closed
//! gap z_n^- = z_n^+ = z_n.
//!
//! Labeling: consecutive critical points get consecutive integers (each band
//! advances the quasimomentum by π) and the sign of Δ(z_n) fixes the parity,
//! since Δ(z_n^±) = (-1)^n. The absolute offset is anchored by the
//! asymptotics z_n = n(π + o(1)): each critical point votes round(z_n/π) and
//! the parity-consistent consensus wins. A tie between two consensus offsets
//! is reported as an error rather than guessed.

use serde::Serialize;
use thiserror::Error;

use crate::operator::{integrate_monodromy, MonodromyResult, OperatorError};
use crate::potential::PotentialSpec;
use crate::quasimomentum::{ActionRecord, MomentSummary};
use crate::roots::{golden_max, refine_root, RootError};

#[derive(Debug, Error)]
pub enum BandError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("window must satisfy N >= 1, got {0}")]
    WindowTooSmall(u32),
    #[error("scan step {0} must be positive and at most π/8")]
    BadScanStep(f64),
    #[error(
        "gap labeling failed: {reason}; rescan with a finer step (current {step})"
    )]
    Labeling { reason: String, step: f64 },
    #[error("edge refinement failed for gap {n}: {source}")]
    EdgeRefinement {
        n: i64,
        #[source]
        source: RootError<OperatorError>,
    },
    #[error("edges do not interlace between gaps {left} and {right}")]
    Interlacing { left: i64, right: i64 },
    #[error(
        "extremum of (-1)^n Δ on gap {n} is {max} < 1 - 100·tol; edge mislabeled"
    )]
    InconsistentExtremum { n: i64, max: f64 },
}

/// One gap of the spectrum: edges, critical point and slit height.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GapRecord {
    pub n: i64,
    pub z_minus: f64,
    pub z_plus: f64,
    /// The single zero of Δ' in [z_minus, z_plus].
    pub z_crit: f64,
    /// Slit height, cosh h = (-1)^n Δ(z_crit); 0 for closed gaps. NaN until
    /// [`compute_heights`] has run.
    pub h: f64,
    pub is_closed: bool,
}

impl GapRecord {
    pub fn gap_len(&self) -> f64 {
        self.z_plus - self.z_minus
    }
}

/// Options for the band scan.
#[derive(Debug, Clone, Copy)]
pub struct BandOptions {
    /// Grid step of the Δ' sign scan; π/8 resolves potentials with ‖V‖ ≲ 4.
    pub scan_step: f64,
    /// Extra width beyond (N+1)π covered by the scan.
    pub scan_margin: f64,
}

impl Default for BandOptions {
    fn default() -> Self {
        BandOptions {
            scan_step: std::f64::consts::PI / 8.0,
            scan_margin: 2.0,
        }
    }
}

/// Spectral data over the index window -N..N.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralSummary {
    pub window: u32,
    pub tol: f64,
    /// Gaps n = -N..N in index order.
    pub gaps: Vec<GapRecord>,
    /// The ring |n| = N+1, kept for adjacent band lengths; not reported.
    pub outer: Vec<GapRecord>,
    /// Smallest n₀ ≥ 0 with |z_n^± - πn| ≤ π/2 for every |n| ≥ n₀ in window.
    pub n0_asymptotic: Option<u32>,
    /// max(h_{-N}, h_N): truncation indicator for the ℓ^p sums.
    pub tail_height: f64,
    /// Per-gap actions and masses; filled by `quasimomentum::compute_actions`.
    pub actions: Vec<ActionRecord>,
    pub moments: Option<MomentSummary>,
}

impl SpectralSummary {
    pub fn gap(&self, n: i64) -> Option<&GapRecord> {
        self.gaps.iter().find(|g| g.n == n)
    }

    /// All gaps including the outer ring, sorted by index.
    fn all_gaps(&self) -> Vec<&GapRecord> {
        let mut v: Vec<&GapRecord> = self.gaps.iter().chain(self.outer.iter()).collect();
        v.sort_by_key(|g| g.n);
        v
    }

    /// Band length |σ_n| = z_n^- - z_{n-1}^+ between gaps n-1 and n.
    pub fn band_len(&self, n: i64) -> Option<f64> {
        let left = self
            .gaps
            .iter()
            .chain(self.outer.iter())
            .find(|g| g.n == n - 1)?;
        let right = self
            .gaps
            .iter()
            .chain(self.outer.iter())
            .find(|g| g.n == n)?;
        Some(right.z_minus - left.z_plus)
    }

    /// Smallest computable band length (truncated inf over the window).
    pub fn min_band_len(&self) -> Option<f64> {
        let all = self.all_gaps();
        all.windows(2)
            .map(|w| w[1].z_minus - w[0].z_plus)
            .min_by(f64::total_cmp)
    }
}

/// ODE tolerance used for Δ evaluations inside the band machinery: two
/// orders below the root tolerance so root location noise stays subordinate.
pub(crate) fn ode_tol(tol: f64) -> f64 {
    (tol * 1e-2).clamp(1e-14, 1e-6)
}

/// Locate band edges, critical points and gap labels for |n| ≤ N.
pub fn find_band_edges(
    pot: &PotentialSpec,
    n_window: u32,
    tol: f64,
    opts: &BandOptions,
) -> Result<SpectralSummary, BandError> {
    if n_window < 1 {
        return Err(BandError::WindowTooSmall(n_window));
    }
    if !(opts.scan_step > 0.0) || opts.scan_step > std::f64::consts::PI / 8.0 + 1e-12 {
        return Err(BandError::BadScanStep(opts.scan_step));
    }
    let otol = ode_tol(tol);
    let span = (n_window as f64 + 1.0) * std::f64::consts::PI + opts.scan_margin;

    // Scan Δ' for sign changes.
    let mut zs = Vec::new();
    let mut z = -span;
    while z < span + 0.5 * opts.scan_step {
        zs.push(z.min(span));
        z += opts.scan_step;
    }
    let mut evals: Vec<MonodromyResult> = Vec::with_capacity(zs.len());
    for &z in &zs {
        evals.push(integrate_monodromy(pot, z, otol)?);
    }

    let mut crits: Vec<f64> = Vec::new();
    let mut eval_dp = |x: f64| -> Result<f64, OperatorError> {
        Ok(integrate_monodromy(pot, x, otol)?.delta_prime)
    };
    for w in evals.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.delta_prime == 0.0 {
            crits.push(a.z);
            continue;
        }
        if a.delta_prime.signum() != b.delta_prime.signum() && b.delta_prime != 0.0 {
            let root = refine_root(
                &mut eval_dp,
                a.z,
                b.z,
                a.delta_prime,
                b.delta_prime,
                tol.min(1e-9),
                200,
            )
            .map_err(|source| BandError::EdgeRefinement { n: 0, source })?;
            crits.push(root);
        }
    }
    // A zero of Δ' landing exactly on a grid node would be seen by both
    // neighboring brackets.
    crits.dedup_by(|a, b| (*a - *b).abs() <= 10.0 * tol);
    if crits.is_empty() {
        return Err(BandError::Labeling {
            reason: "no critical points of Δ found in the scan window".into(),
            step: opts.scan_step,
        });
    }

    // Classify each critical point and check sign alternation.
    let mut signs: Vec<f64> = Vec::with_capacity(crits.len());
    let mut deltas: Vec<MonodromyResult> = Vec::with_capacity(crits.len());
    for &zc in &crits {
        let r = integrate_monodromy(pot, zc, otol)?;
        if r.delta.abs() < 1.0 - 1e3 * tol {
            return Err(BandError::Labeling {
                reason: format!(
                    "interior extremum with |Δ| = {} < 1 at z = {zc}; missed crossings",
                    r.delta.abs()
                ),
                step: opts.scan_step,
            });
        }
        signs.push(r.delta.signum());
        deltas.push(r);
    }
    for (i, w) in signs.windows(2).enumerate() {
        if w[0] == w[1] {
            return Err(BandError::Labeling {
                reason: format!(
                    "consecutive gap extrema at z = {} and z = {} share the sign of Δ",
                    crits[i],
                    crits[i + 1]
                ),
                step: opts.scan_step,
            });
        }
    }

    // Index offset: majority vote of round(z/π) - position, restricted to the
    // parity class where sign(Δ(z_n)) = (-1)^n.
    let mut votes: std::collections::BTreeMap<i64, usize> = std::collections::BTreeMap::new();
    for (j, &zc) in crits.iter().enumerate() {
        let vote = (zc / std::f64::consts::PI).round() as i64 - j as i64;
        *votes.entry(vote).or_insert(0) += 1;
    }
    let parity_ok = |off: i64| -> bool {
        signs.iter().enumerate().all(|(j, &s)| {
            let n = off + j as i64;
            (n.rem_euclid(2) == 0) == (s > 0.0)
        })
    };
    let mut candidates: Vec<(usize, i64)> = votes
        .iter()
        .filter(|(off, _)| parity_ok(**off))
        .map(|(off, cnt)| (*cnt, *off))
        .collect();
    candidates.sort();
    let offset = match candidates.last() {
        None => {
            return Err(BandError::Labeling {
                reason: "no parity-consistent index offset".into(),
                step: opts.scan_step,
            })
        }
        Some(&(best_cnt, best_off)) => {
            let tied = candidates
                .iter()
                .filter(|(cnt, off)| *cnt == best_cnt && *off != best_off)
                .count();
            if tied > 0 {
                return Err(BandError::Labeling {
                    reason: "index anchor ambiguous (tied offset votes)".into(),
                    step: opts.scan_step,
                });
            }
            best_off
        }
    };

    // Resolve each labeled gap in the extended window |n| ≤ N+1. Edges lie
    // strictly between consecutive critical points, which bounds the search.
    let n_keep = n_window as i64;
    let mut gaps: Vec<GapRecord> = Vec::new();
    let mut outer: Vec<GapRecord> = Vec::new();
    for (j, &zc) in crits.iter().enumerate() {
        let n = offset + j as i64;
        if n.abs() > n_keep + 1 {
            continue;
        }
        let left_bound = if j > 0 {
            crits[j - 1]
        } else {
            zc - std::f64::consts::PI - opts.scan_margin
        };
        let right_bound = if j + 1 < crits.len() {
            crits[j + 1]
        } else {
            zc + std::f64::consts::PI + opts.scan_margin
        };
        let rec = resolve_gap(pot, n, zc, &deltas[j], (left_bound, right_bound), tol, opts)?;
        if n.abs() <= n_keep {
            gaps.push(rec);
        } else {
            outer.push(rec);
        }
    }
    gaps.sort_by_key(|g| g.n);
    outer.sort_by_key(|g| g.n);

    // The window must be fully populated.
    let labels: Vec<i64> = gaps.iter().map(|g| g.n).collect();
    let expected: Vec<i64> = (-n_keep..=n_keep).collect();
    if labels != expected {
        return Err(BandError::Labeling {
            reason: format!("window incomplete: found labels {labels:?}"),
            step: opts.scan_step,
        });
    }

    // Interlacing across the full computed set.
    {
        let mut all: Vec<&GapRecord> = gaps.iter().chain(outer.iter()).collect();
        all.sort_by_key(|g| g.n);
        for w in all.windows(2) {
            if !(w[0].z_plus < w[1].z_minus) {
                return Err(BandError::Interlacing {
                    left: w[0].n,
                    right: w[1].n,
                });
            }
        }
    }

    let n0 = asymptotic_anchor(&gaps);
    Ok(SpectralSummary {
        window: n_window,
        tol,
        gaps,
        outer,
        n0_asymptotic: n0,
        tail_height: f64::NAN,
        actions: Vec::new(),
        moments: None,
    })
}

fn asymptotic_anchor(gaps: &[GapRecord]) -> Option<u32> {
    let ok = |g: &GapRecord| {
        let target = g.n as f64 * std::f64::consts::PI;
        (g.z_minus - target).abs() <= std::f64::consts::FRAC_PI_2
            && (g.z_plus - target).abs() <= std::f64::consts::FRAC_PI_2
    };
    let max_n = gaps.iter().map(|g| g.n.unsigned_abs() as u32).max()?;
    (0..=max_n).find(|&n0| gaps.iter().filter(|g| g.n.unsigned_abs() as u32 >= n0).all(ok))
}

fn resolve_gap(
    pot: &PotentialSpec,
    n: i64,
    z_crit: f64,
    at_crit: &MonodromyResult,
    bounds: (f64, f64),
    tol: f64,
    opts: &BandOptions,
) -> Result<GapRecord, BandError> {
    let otol = ode_tol(tol);
    let sign = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let excess = sign * at_crit.delta - 1.0;

    // Half-width estimate from the curvature at the extremum.
    let ddp = (sign * at_crit.delta_double_prime).abs().max(1e-8);
    let w_est = (2.0 * excess.max(0.0) / ddp).sqrt();
    if excess <= 0.0 || 2.0 * w_est < 100.0 * tol {
        return Ok(GapRecord {
            n,
            z_minus: z_crit,
            z_plus: z_crit,
            z_crit,
            h: 0.0,
            is_closed: true,
        });
    }

    let mut f = |x: f64| -> Result<f64, OperatorError> {
        Ok(sign * integrate_monodromy(pot, x, otol)?.delta - 1.0)
    };
    let mut locate = |dir: f64| -> Result<f64, BandError> {
        // Probes never cross the neighboring critical point: on the far
        // side of it the parity flips, so the edge sits strictly inside.
        let limit = if dir > 0.0 {
            bounds.1 - 1e3 * tol
        } else {
            bounds.0 + 1e3 * tol
        };
        let mut step = w_est.max(100.0 * tol);
        let mut inner = z_crit;
        let mut f_inner = excess;
        loop {
            let raw = z_crit + dir * step;
            let probe = if dir > 0.0 { raw.min(limit) } else { raw.max(limit) };
            let fp = f(probe).map_err(|e| BandError::EdgeRefinement {
                n,
                source: RootError::Eval(e),
            })?;
            if fp < 0.0 {
                let (a, b, fa, fb) = if dir > 0.0 {
                    (inner, probe, f_inner, fp)
                } else {
                    (probe, inner, fp, f_inner)
                };
                return refine_root(&mut f, a, b, fa, fb, tol, 300)
                    .map_err(|source| BandError::EdgeRefinement { n, source });
            }
            if probe == limit {
                return Err(BandError::Labeling {
                    reason: format!(
                        "gap {n} has no edge before the adjacent extremum at {limit}"
                    ),
                    step: opts.scan_step,
                });
            }
            inner = probe;
            f_inner = fp;
            step *= 2.0;
        }
    };
    let z_plus = locate(1.0)?;
    let z_minus = locate(-1.0)?;
    let is_closed = z_plus - z_minus < 100.0 * tol;
    Ok(GapRecord {
        n,
        z_minus,
        z_plus,
        z_crit,
        h: if is_closed { 0.0 } else { f64::NAN },
        is_closed,
    })
}

/// Fill slit heights: maximize (-1)^n Δ over each open gap by golden section,
/// polish the maximizer with a bisection on Δ', and set h = arccosh(max).
pub fn compute_heights(
    mut summary: SpectralSummary,
    pot: &PotentialSpec,
    tol: f64,
) -> Result<SpectralSummary, BandError> {
    let otol = ode_tol(tol);
    let window = summary.window;
    for gap in summary.gaps.iter_mut().chain(summary.outer.iter_mut()) {
        if gap.is_closed {
            gap.h = 0.0;
            continue;
        }
        let sign = if gap.n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let mut f = |x: f64| -> Result<f64, OperatorError> {
            Ok(sign * integrate_monodromy(pot, x, otol)?.delta)
        };
        let xtol = (1e-6 * gap.gap_len()).max(tol);
        let (x0, _) = golden_max(&mut f, gap.z_minus, gap.z_plus, xtol, 400)
            .map_err(|source| BandError::EdgeRefinement { n: gap.n, source })?;
        // Δ' changes sign across the extremum; polish within a small bracket.
        let mut dp = |x: f64| -> Result<f64, OperatorError> {
            Ok(sign * integrate_monodromy(pot, x, otol)?.delta_prime)
        };
        let r = xtol.max(2.0 * tol);
        let a = (x0 - r).max(gap.z_minus);
        let b = (x0 + r).min(gap.z_plus);
        let fa = dp(a).map_err(|e| BandError::EdgeRefinement {
            n: gap.n,
            source: RootError::Eval(e),
        })?;
        let fb = dp(b).map_err(|e| BandError::EdgeRefinement {
            n: gap.n,
            source: RootError::Eval(e),
        })?;
        let z_crit = if fa > 0.0 && fb < 0.0 {
            refine_root(&mut dp, a, b, fa, fb, tol.min(1e-9), 200)
                .map_err(|source| BandError::EdgeRefinement { n: gap.n, source })?
        } else {
            x0
        };
        let peak = sign
            * integrate_monodromy(pot, z_crit, otol)
                .map_err(BandError::Operator)?
                .delta;
        if peak < 1.0 - 100.0 * tol {
            return Err(BandError::InconsistentExtremum {
                n: gap.n,
                max: peak,
            });
        }
        gap.z_crit = z_crit;
        gap.h = if peak <= 1.0 { 0.0 } else { peak.acosh() };
    }
    summary.tail_height = summary
        .gaps
        .iter()
        .filter(|g| g.n.unsigned_abs() as u32 == window)
        .map(|g| g.h)
        .fold(0.0, f64::max);
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edges(pot: &PotentialSpec, n: u32) -> SpectralSummary {
        let s = find_band_edges(pot, n, 1e-10, &BandOptions::default()).unwrap();
        compute_heights(s, pot, 1e-10).unwrap()
    }

    #[test]
    fn zero_potential_all_gaps_closed_at_pi_n() {
        let s = edges(&PotentialSpec::Zero, 3);
        assert_eq!(s.gaps.len(), 7);
        for g in &s.gaps {
            assert!(g.is_closed, "gap {} open: [{}, {}]", g.n, g.z_minus, g.z_plus);
            assert_eq!(g.h, 0.0);
            let target = g.n as f64 * std::f64::consts::PI;
            assert!(
                (g.z_crit - target).abs() < 1e-7,
                "gap {}: z_crit={} target={}",
                g.n,
                g.z_crit,
                target
            );
        }
        assert_eq!(s.n0_asymptotic, Some(0));
    }

    #[test]
    fn constant_potential_has_single_open_gap() {
        let a = 0.5;
        let s = edges(&PotentialSpec::ConstantOffDiagonal { a }, 2);
        let g0 = s.gap(0).unwrap();
        assert!(!g0.is_closed);
        assert!((g0.z_minus + a).abs() < 1e-8, "z_minus={}", g0.z_minus);
        assert!((g0.z_plus - a).abs() < 1e-8, "z_plus={}", g0.z_plus);
        assert!((g0.h - a).abs() < 1e-9, "h={}", g0.h);
        for g in s.gaps.iter().filter(|g| g.n != 0) {
            assert!(g.is_closed, "gap {} should be closed", g.n);
            let target = (a * a + (g.n as f64 * std::f64::consts::PI).powi(2)).sqrt()
                * (g.n as f64).signum();
            assert!(
                (g.z_crit - target).abs() < 1e-6,
                "gap {}: z={} target={target}",
                g.n,
                g.z_crit
            );
        }
    }

    #[test]
    fn constant_family_gap_lengths() {
        for a in [0.1, 0.5, 1.0, 2.0] {
            let s = edges(&PotentialSpec::ConstantOffDiagonal { a }, 1);
            let g0 = s.gap(0).unwrap();
            assert!(
                (g0.gap_len() - 2.0 * a).abs() <= 1e-8 * 2.0 * a,
                "a={a}: |g0|={}",
                g0.gap_len()
            );
        }
    }

    #[test]
    fn cosine_potential_interlaces_and_bounds_gaps() {
        let pot = PotentialSpec::Fourier {
            v1_cos: vec![],
            v1_sin: vec![],
            v2_cos: vec![0.0, 0.1],
            v2_sin: vec![],
        };
        let s = edges(&pot, 2);
        // Interlacing is checked internally; verify |g_n| ≤ 2 h_n here.
        for g in &s.gaps {
            if !g.is_closed {
                assert!(
                    g.gap_len() <= 2.0 * g.h * (1.0 + 1e-8),
                    "gap {}: |g|={} 2h={}",
                    g.n,
                    g.gap_len(),
                    2.0 * g.h
                );
            }
        }
    }

    #[test]
    fn refining_tolerance_moves_edges_within_budget() {
        let pot = PotentialSpec::ConstantOffDiagonal { a: 1.0 };
        let coarse = {
            let s = find_band_edges(&pot, 1, 1e-8, &BandOptions::default()).unwrap();
            compute_heights(s, &pot, 1e-8).unwrap()
        };
        let fine = edges(&pot, 1);
        for (c, f) in coarse.gaps.iter().zip(fine.gaps.iter()) {
            assert!((c.z_minus - f.z_minus).abs() < 10.0 * 1e-8);
            assert!((c.z_plus - f.z_plus).abs() < 10.0 * 1e-8);
        }
    }

    #[test]
    fn window_too_small_is_rejected() {
        assert!(matches!(
            find_band_edges(&PotentialSpec::Zero, 0, 1e-10, &BandOptions::default()),
            Err(BandError::WindowTooSmall(0))
        ));
    }

    #[test]
    fn coarse_scan_step_is_rejected() {
        let opts = BandOptions {
            scan_step: 1.0,
            ..BandOptions::default()
        };
        assert!(matches!(
            find_band_edges(&PotentialSpec::Zero, 1, 1e-10, &opts),
            Err(BandError::BadScanStep(_))
        ));
    }

    #[test]
    fn strong_coupling_keeps_labels_consistent() {
        // a = 3: the inner edges sit more than π/2 away from πn, so the
        // naive per-gap vote is wrong there and the majority/parity anchor
        // has to carry the labeling.
        let a = 3.0;
        let s = edges(&PotentialSpec::ConstantOffDiagonal { a }, 3);
        let g0 = s.gap(0).unwrap();
        assert!((g0.z_minus + a).abs() < 1e-7 && (g0.z_plus - a).abs() < 1e-7);
        for g in s.gaps.iter().filter(|g| g.n != 0) {
            let target =
                (a * a + (g.n as f64 * std::f64::consts::PI).powi(2)).sqrt() * (g.n as f64).signum();
            assert!(
                (g.z_crit - target).abs() < 1e-6,
                "gap {}: z={} target={target}",
                g.n,
                g.z_crit
            );
        }
        // |z_0^±| = 3 > π/2 but |z_1 - π| ≈ 1.21 < π/2 already.
        assert_eq!(s.n0_asymptotic, Some(1));
    }
}
