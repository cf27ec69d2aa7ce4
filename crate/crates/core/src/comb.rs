//! Comb domains: slit data, the single-slit map, greedy slit selection and
//! Lindelöf monotonicity checks.
//!
//! A comb is the plane minus vertical slits Γ_n = [u_n - ih_n, u_n + ih_n].
//! For a single slit at u₀ the comb map is explicit,
//! z(k) = √((k-u₀)² + h₀²) with the branch fixed by z(k) ~ k - u₀ at
//! infinity, and its first moment is Q₀ = h₀²/2. Those closed forms back the
//! monotonicity checks (lowering slits raises Im z and lowers Q₀) and the
//! comb-side mass ν = 1/|k''| = h at a single slit tip.
//!
//! Greedy selection keeps, in height order, every slit whose abscissa is
//! farther than h_s from each previously kept abscissa u_s (strict
//! inequality; ties between equal heights break toward the smaller
//! abscissa). The selected subsequence h̃ pins Q₀ two-sidedly:
//! ‖h̃‖₂²/π² ≤ Q₀(h) ≤ (2√2/π)‖h̃‖₂².

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CombError {
    #[error("slit abscissas must be strictly increasing (entry {0})")]
    NotIncreasing(usize),
    #[error("slit heights must be finite and ≥ 0 (entry {0})")]
    BadHeight(usize),
    #[error("k = {0} lies on the slit")]
    OnSlit(Complex64),
    #[error("combs not comparable: {0}")]
    Incomparable(String),
}

/// One vertical slit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombSlit {
    pub u: f64,
    pub h: f64,
}

/// A finite comb: slits at strictly increasing abscissas.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comb {
    entries: Vec<CombSlit>,
}

impl Comb {
    pub fn new(entries: Vec<CombSlit>) -> Result<Self, CombError> {
        for (i, e) in entries.iter().enumerate() {
            if !e.h.is_finite() || e.h < 0.0 || !e.u.is_finite() {
                return Err(CombError::BadHeight(i));
            }
            if i > 0 && entries[i - 1].u >= e.u {
                return Err(CombError::NotIncreasing(i));
            }
        }
        Ok(Comb { entries })
    }

    pub fn entries(&self) -> &[CombSlit] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// u_* = min spacing of consecutive abscissas; None for < 2 slits.
    pub fn u_star(&self) -> Option<f64> {
        self.entries
            .windows(2)
            .map(|w| w[1].u - w[0].u)
            .min_by(f64::total_cmp)
    }

    pub fn heights(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.h).collect()
    }

    pub fn l2_sq(&self) -> f64 {
        self.entries.iter().map(|e| e.h * e.h).sum()
    }

    /// Indices of slits with positive height.
    fn positive(&self) -> Vec<usize> {
        (0..self.entries.len())
            .filter(|&i| self.entries[i].h > 0.0)
            .collect()
    }

    /// The single positive slit, if the comb reduces to one.
    pub fn as_single_slit(&self) -> Option<CombSlit> {
        let pos = self.positive();
        match pos.len() {
            0 => Some(CombSlit { u: 0.0, h: 0.0 }),
            1 => Some(self.entries[pos[0]]),
            _ => None,
        }
    }

    /// Q₀ where the comb map is explicit: 0 or a single positive slit.
    pub fn single_slit_q0(&self) -> Option<f64> {
        self.as_single_slit().map(|s| 0.5 * s.h * s.h)
    }
}

/// z(k) = √((k-u₀)² + h₀²) with z(k) ~ (k-u₀) at infinity; maps the plane cut
/// along the slit onto the plane cut along the gap (u₀-plane: [-h₀, h₀]).
pub fn single_slit_map(u0: f64, h0: f64, k: Complex64) -> Result<Complex64, CombError> {
    let zeta = k - Complex64::new(u0, 0.0);
    if h0 == 0.0 {
        return Ok(zeta);
    }
    // On-slit test: ζ purely imaginary with |Im ζ| ≤ h₀.
    if zeta.re == 0.0 && zeta.im.abs() <= h0 {
        return Err(CombError::OnSlit(k));
    }
    // ζ·√(1 + h₀²/ζ²): the principal square root of 1 + h₀²/ζ² is analytic
    // exactly off the slit and tends to 1 at infinity.
    let w = Complex64::new(h0 * h0, 0.0) / (zeta * zeta);
    Ok(zeta * (Complex64::new(1.0, 0.0) + w).sqrt())
}

/// Im z(k) for a comb whose map is explicit (≤ 1 positive slit).
pub fn single_slit_y(comb: &Comb, k: Complex64) -> Result<Option<f64>, CombError> {
    match comb.as_single_slit() {
        None => Ok(None),
        Some(s) if s.h == 0.0 => Ok(Some(k.im)),
        Some(s) => Ok(Some(single_slit_map(s.u, s.h, k)?.im)),
    }
}

/// Comb-side effective mass at a single slit tip: ν = 1/|k''(z₀)| = h₀.
pub fn single_slit_comb_mass(h0: f64) -> f64 {
    // k(z) = √(z² - h²) near the image of the tip gives |k''(0)| = 1/h.
    h0
}

/// Greedy subsequence of (2.15-style) slit selection: repeatedly keep the
/// tallest remaining slit among those farther than h_s from every kept
/// abscissa u_s. Returns the comb with unselected heights zeroed.
pub fn greedy_select(comb: &Comb) -> Comb {
    let entries = comb.entries();
    let mut kept: Vec<usize> = Vec::new();
    loop {
        let mut best: Option<usize> = None;
        'candidates: for (i, e) in entries.iter().enumerate() {
            if e.h <= 0.0 || kept.contains(&i) {
                continue;
            }
            for &s in &kept {
                if (e.u - entries[s].u).abs() <= entries[s].h {
                    continue 'candidates;
                }
            }
            best = match best {
                None => Some(i),
                Some(b) => {
                    // Taller wins; equal heights break toward smaller abscissa.
                    if e.h > entries[b].h || (e.h == entries[b].h && e.u < entries[b].u) {
                        Some(i)
                    } else {
                        Some(b)
                    }
                }
            };
        }
        match best {
            Some(i) => kept.push(i),
            None => break,
        }
    }
    let selected: Vec<CombSlit> = entries
        .iter()
        .enumerate()
        .map(|(i, e)| CombSlit {
            u: e.u,
            h: if kept.contains(&i) { e.h } else { 0.0 },
        })
        .collect();
    Comb { entries: selected }
}

/// One probe-point comparison of the monotonicity y(k, h̃) ≥ y(k, h).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LindelofProbe {
    pub k_re: f64,
    pub k_im: f64,
    pub y_tilde: f64,
    pub y: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LindelofReport {
    pub probes: Vec<LindelofProbe>,
    /// (Q₀(h̃), Q₀(h), pass) when both moments are explicit.
    pub q0: Option<(f64, f64, bool)>,
    pub all_pass: bool,
}

/// Check y(k, h̃) ≥ y(k, h) at probe points and Q₀(h̃) ≤ Q₀(h), wherever both
/// comb maps are explicit. Errors when the combs do not share abscissas or
/// h̃ exceeds h somewhere.
pub fn lindelof_check(
    h: &Comb,
    h_tilde: &Comb,
    probes: &[Complex64],
) -> Result<LindelofReport, CombError> {
    if h.len() != h_tilde.len() {
        return Err(CombError::Incomparable("different slit counts".into()));
    }
    for (a, b) in h.entries().iter().zip(h_tilde.entries().iter()) {
        if a.u != b.u {
            return Err(CombError::Incomparable(format!(
                "abscissa mismatch {} vs {}",
                a.u, b.u
            )));
        }
        if b.h > a.h {
            return Err(CombError::Incomparable(format!(
                "h̃ = {} exceeds h = {} at u = {}",
                b.h, a.h, a.u
            )));
        }
    }
    let slack = 1e-12;
    let mut out = Vec::new();
    for &k in probes {
        if let (Some(yt), Some(y)) = (single_slit_y(h_tilde, k)?, single_slit_y(h, k)?) {
            out.push(LindelofProbe {
                k_re: k.re,
                k_im: k.im,
                y_tilde: yt,
                y,
                pass: yt >= y - slack * (1.0 + y.abs()),
            });
        }
    }
    let q0 = match (h_tilde.single_slit_q0(), h.single_slit_q0()) {
        (Some(qt), Some(q)) => Some((qt, q, qt <= q + slack * (1.0 + q.abs()))),
        _ => None,
    };
    let all_pass = out.iter().all(|p| p.pass) && q0.is_none_or(|(_, _, ok)| ok);
    Ok(LindelofReport {
        probes: out,
        q0,
        all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn comb(pairs: &[(f64, f64)]) -> Comb {
        Comb::new(pairs.iter().map(|&(u, h)| CombSlit { u, h }).collect()).unwrap()
    }

    #[test]
    fn single_slit_map_direct_values() {
        // √((2i)² + 1) = i√3 on the positive-imaginary branch.
        let z = single_slit_map(0.0, 1.0, Complex64::new(0.0, 2.0)).unwrap();
        assert!((z.re).abs() < 1e-14 && (z.im - 3.0f64.sqrt()).abs() < 1e-14, "z={z}");
        // Real k outside the slit maps to the real axis beyond the gap.
        let z = single_slit_map(0.0, 1.0, Complex64::new(0.5, 0.0)).unwrap();
        assert!((z.im).abs() < 1e-14 && (z.re - (0.25f64 + 1.0).sqrt()).abs() < 1e-14);
        let z = single_slit_map(0.0, 1.0, Complex64::new(-0.5, 0.0)).unwrap();
        assert!((z.re + (0.25f64 + 1.0).sqrt()).abs() < 1e-14, "left side keeps sign, z={z}");
    }

    #[test]
    fn single_slit_map_asymptotics() {
        // z(iv) = iv(1 + o(1)) along the imaginary axis.
        for v in [1e2, 1e4, 1e6] {
            let z = single_slit_map(0.0, 0.7, Complex64::new(0.0, v)).unwrap();
            assert!((z.im / v - 1.0).abs() < 1.0 / (v * v) * 1.0 + 1e-9, "v={v} z={z}");
        }
    }

    #[test]
    fn on_slit_is_rejected() {
        assert!(matches!(
            single_slit_map(0.0, 1.0, Complex64::new(0.0, 0.5)),
            Err(CombError::OnSlit(_))
        ));
    }

    #[test]
    fn greedy_hand_example() {
        // u = (0, 0.5, 10), h = (1, 0.9, 0.3): the middle slit sits within
        // h₀ = 1 of u = 0, so indices {0, 2} are kept.
        let c = comb(&[(0.0, 1.0), (0.5, 0.9), (10.0, 0.3)]);
        let sel = greedy_select(&c);
        let hs = sel.heights();
        assert_eq!(hs, vec![1.0, 0.0, 0.3]);
    }

    #[test]
    fn greedy_keeps_separated_equal_heights() {
        let c = comb(&[(0.0, 1.0), (3.0, 1.0)]);
        assert_eq!(greedy_select(&c).heights(), vec![1.0, 1.0]);
    }

    #[test]
    fn greedy_single_slit_identity() {
        let c = comb(&[(0.0, 0.0), (2.0, 0.8), (5.0, 0.0)]);
        let sel = greedy_select(&c);
        assert_eq!(sel.l2_sq(), c.l2_sq());
    }

    #[test]
    fn greedy_zero_comb_selects_nothing() {
        let c = comb(&[(0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(greedy_select(&c).l2_sq(), 0.0);
    }

    #[test]
    fn greedy_is_idempotent() {
        let c = comb(&[(0.0, 0.6), (0.5, 0.9), (1.4, 0.4), (2.0, 0.9), (9.0, 0.2)]);
        let once = greedy_select(&c);
        let twice = greedy_select(&once);
        assert_eq!(once, twice);
    }

    #[test]
    fn greedy_respects_separation_in_selection_order() {
        let c = comb(&[(0.0, 0.6), (0.5, 0.9), (1.4, 0.4), (2.0, 0.9), (9.0, 0.2)]);
        let sel = greedy_select(&c);
        let kept: Vec<CombSlit> = sel
            .entries()
            .iter()
            .filter(|e| e.h > 0.0)
            .cloned()
            .collect();
        for i in 0..kept.len() {
            for j in i + 1..kept.len() {
                let far = (kept[i].u - kept[j].u).abs();
                assert!(far > kept[i].h.min(kept[j].h), "{:?} vs {:?}", kept[i], kept[j]);
            }
        }
    }

    #[test]
    fn lindelof_zero_vs_slit() {
        // y(k, 0) = Im k dominates the slit map's imaginary part.
        let h = comb(&[(0.0, 1.0)]);
        let zero = comb(&[(0.0, 0.0)]);
        let probes: Vec<Complex64> = vec![
            Complex64::new(0.3, 0.4),
            Complex64::new(-1.0, 1.0),
            Complex64::new(2.0, 0.1),
            Complex64::new(0.0, 5.0),
        ];
        let rep = lindelof_check(&h, &zero, &probes).unwrap();
        assert!(rep.all_pass, "{rep:?}");
        let (qt, q, ok) = rep.q0.unwrap();
        assert_eq!(qt, 0.0);
        assert_eq!(q, 0.5);
        assert!(ok);
    }

    #[test]
    fn lindelof_nested_single_slits() {
        let h = comb(&[(0.0, 1.0)]);
        let ht = comb(&[(0.0, 0.6)]);
        let probes: Vec<Complex64> = vec![Complex64::new(0.2, 1.1), Complex64::new(-0.7, 2.0)];
        let rep = lindelof_check(&h, &ht, &probes).unwrap();
        assert!(rep.all_pass);
        let (qt, q, _) = rep.q0.unwrap();
        assert!((qt - 0.18).abs() < 1e-15 && (q - 0.5).abs() < 1e-15);
    }

    #[test]
    fn lindelof_rejects_taller_tilde() {
        let h = comb(&[(0.0, 0.5)]);
        let ht = comb(&[(0.0, 0.7)]);
        assert!(lindelof_check(&h, &ht, &[]).is_err());
    }
}
