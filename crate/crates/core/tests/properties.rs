//! Property tests for the operator-free pieces: greedy selection, capacity,
//! norms and the single-slit monotonicity.

use num_complex::Complex64;
use proptest::prelude::*;

use zs_core::capacity::capacity_segments;
use zs_core::comb::{greedy_select, lindelof_check, Comb, CombSlit};
use zs_core::norms::{weighted_norm, PExp, Weight};

fn comb_strategy() -> impl Strategy<Value = Comb> {
    // Spacings ≥ 0.5, heights ≤ 1: the regime of the randomized audits.
    (1usize..10)
        .prop_flat_map(|n| {
            (
                proptest::collection::vec(0.5f64..3.0, n),
                proptest::collection::vec(0.0f64..1.0, n),
            )
        })
        .prop_map(|(spacings, heights)| {
            let mut u = -5.0;
            let mut slits = Vec::new();
            for (du, h) in spacings.into_iter().zip(heights) {
                u += du;
                slits.push(CombSlit { u, h });
            }
            Comb::new(slits).unwrap()
        })
}

proptest! {
    #[test]
    fn greedy_idempotent_and_separated(comb in comb_strategy()) {
        let once = greedy_select(&comb);
        let twice = greedy_select(&once);
        prop_assert_eq!(&once, &twice);
        prop_assert!(once.l2_sq() <= comb.l2_sq() + 1e-15);
        let kept: Vec<CombSlit> = once
            .entries()
            .iter()
            .filter(|e| e.h > 0.0)
            .cloned()
            .collect();
        for i in 0..kept.len() {
            for j in i + 1..kept.len() {
                prop_assert!((kept[i].u - kept[j].u).abs() > kept[i].h.min(kept[j].h));
            }
        }
        // Nothing positive survives outside the selection radius rule: the
        // tallest slit is always kept.
        if comb.heights().iter().any(|&h| h > 0.0) {
            let hmax = comb.heights().iter().cloned().fold(0.0, f64::max);
            prop_assert!(once.heights().iter().cloned().fold(0.0, f64::max) == hmax);
        }
    }

    #[test]
    fn capacity_matches_quarter_length(
        raw in proptest::collection::vec((0.01f64..1.5, 0.05f64..2.0), 1..6),
        start in -5.0f64..0.0,
    ) {
        let mut intervals = Vec::new();
        let mut x = start;
        for (gap_before, len) in raw {
            x += gap_before;
            intervals.push((x, x + len));
            x += len;
        }
        let r = capacity_segments(&intervals).unwrap();
        let total: f64 = intervals.iter().map(|(a, b)| b - a).sum();
        prop_assert!((r.capacity - total / 4.0).abs() < 1e-15);
        let est = r.ahlfors.derivative_at_infinity(1e6, 8);
        prop_assert!(
            (est.re - r.capacity).abs() <= 1e-8 * r.capacity,
            "est {} vs capacity {}", est.re, r.capacity
        );
        // |f| ≤ 1 off E at a handful of probes.
        for i in 0..12 {
            let z = Complex64::new(-6.0 + i as f64, 0.37 + 0.11 * i as f64);
            prop_assert!(r.ahlfors.eval(z).norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn weighted_norms_monotone(
        values in proptest::collection::vec(-2.0f64..2.0, 1..9),
        p_idx in 0usize..4,
    ) {
        let p = [PExp::Finite(1.0), PExp::Finite(1.5), PExp::Finite(2.0), PExp::Infinity][p_idx];
        let idx: Vec<i64> = (0..values.len() as i64).map(|i| i - 2).collect();
        let plain = weighted_norm(&values, &idx, p, Weight::Unit).unwrap();
        let weighted = weighted_norm(&values, &idx, p, Weight::OnePlusAbsN).unwrap();
        prop_assert!(weighted >= plain - 1e-12);
        // Monotone in each |f_n|.
        let mut bumped = values.clone();
        bumped[0] = bumped[0].abs() + 0.5;
        let bigger = weighted_norm(&bumped, &idx, p, Weight::Unit).unwrap();
        prop_assert!(bigger >= plain - 1e-12);
    }

    #[test]
    fn single_slit_lindelof(h in 0.05f64..2.0, frac in 0.0f64..1.0, u0 in -3.0f64..3.0) {
        let tall = Comb::new(vec![CombSlit { u: u0, h }]).unwrap();
        let short = Comb::new(vec![CombSlit { u: u0, h: h * frac }]).unwrap();
        let probes: Vec<Complex64> = vec![
            Complex64::new(u0 + 0.3, 0.2),
            Complex64::new(u0 - 1.0, 1.5),
            Complex64::new(u0, h + 0.25),
            Complex64::new(u0 + 4.0, 0.05),
        ];
        let rep = lindelof_check(&tall, &short, &probes).unwrap();
        prop_assert!(rep.all_pass, "{:?}", rep);
    }
}
