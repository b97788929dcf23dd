use std::sync::Arc;

use lhbp_core::criteria::{
    agresti_bounds, classify, global_verdict, tridiagonal_mu_limit, Budget, GlobalKind, Regime,
    DEFAULT_MARGIN,
};
use lhbp_core::embedded::{embedded_moments, partial_verdict, MomentStatus, PartialKind};
use lhbp_core::fixedpoints::{curve_from_anchor, GCache};
use lhbp_core::generating::{extinction_ladder, TruncatedSystem, DEFAULT_MAX_ITER};
use lhbp_core::model::{moment_tables, ModelDocument, OffspringLaw, TableEntry};
use lhbp_core::montecarlo::{simulate_trace, simulate_truncated, SimConfig, Variant};
use lhbp_core::LhbpModel;
use proptest::prelude::*;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

/// Table law of parent `i` with a guaranteed forward child.
fn table_law(i: usize) -> impl Strategy<Value = OffspringLaw> {
    let entry = (
        prop::collection::vec((0..=i + 1, 0u64..4), 0..3),
        1u32..10,
    );
    (prop::collection::vec(entry, 1..4), 1u64..3, 1u32..10).prop_map(move |(entries, fwd, w)| {
        let mut raw: Vec<(Vec<(usize, u64)>, f64)> =
            entries.into_iter().map(|(c, w)| (c, w as f64)).collect();
        raw.push((vec![(i + 1, fwd)], w as f64));
        let total: f64 = raw.iter().map(|(_, w)| w).sum();
        OffspringLaw::Table(
            raw.into_iter()
                .map(|(c, w)| TableEntry::new(c, w / total))
                .collect(),
        )
    })
}

fn explicit_model() -> impl Strategy<Value = LhbpModel> {
    (table_law(0), table_law(1), table_law(2))
        .prop_map(|(a, b, c)| LhbpModel::explicit(vec![a, b, c]).unwrap())
}

fn parametric_model() -> impl Strategy<Value = LhbpModel> {
    prop_oneof![
        (0.0..0.99f64).prop_map(|g| LhbpModel::example2(g).unwrap()),
        (0.05..1.0f64, 0.0..0.6f64, 0.1..1.5f64)
            .prop_map(|(a, b, c)| LhbpModel::tridiagonal(a, b, c, 1.0).unwrap()),
    ]
}

fn brute_row_sum(law: &OffspringLaw) -> f64 {
    match law {
        OffspringLaw::Table(entries) => entries.iter().map(|e| e.prob * e.total() as f64).sum(),
        OffspringLaw::Product(coords) => coords
            .iter()
            .map(|c| {
                c.pmf
                    .iter()
                    .enumerate()
                    .map(|(v, p)| p * v as f64)
                    .sum::<f64>()
            })
            .sum(),
    }
}

proptest! {
    #![proptest_config(cfg(48))]

    #[test]
    fn mean_rows_match_enumeration(m in prop_oneof![explicit_model(), parametric_model()]) {
        let t = moment_tables(&m, 8);
        for i in 0..=8 {
            let row: f64 = t.m_row(i).iter().map(|&(_, v)| v).sum();
            let brute = brute_row_sum(&m.law(i));
            match m.law(i) {
                // same terms, different summation order
                OffspringLaw::Table(_) => prop_assert!((row - brute).abs() <= 4.0 * f64::EPSILON * brute.abs()),
                OffspringLaw::Product(_) => prop_assert!((row - brute).abs() <= 1e-12),
            }
        }
    }

    #[test]
    fn second_moment_blocks_are_symmetric(m in prop_oneof![explicit_model(), parametric_model()], k in 0usize..6) {
        let a = moment_tables(&m, k).a_block(k);
        for i in 0..a.len() {
            for j in 0..a.len() {
                prop_assert_eq!(a[i][j], a[j][i]);
            }
        }
    }

    #[test]
    fn explicit_tail_rule_repeats(m in explicit_model(), i in 3usize..20, i2 in 3usize..20) {
        for delta in -3isize..=1 {
            let j = (i as isize + delta) as usize;
            let j2 = (i2 as isize + delta) as usize;
            prop_assert_eq!(m.mean(i, j), m.mean(i2, j2));
        }
    }

    #[test]
    fn ladder_is_monotone_and_sandwiched(m in parametric_model()) {
        let ladder = extinction_ladder(&m, &[2, 4, 8, 16, 32, 64], 8, 1e-12).unwrap();
        for w in ladder.q_vectors.windows(2) {
            for (a, b) in w[0].iter().zip(&w[1]) {
                prop_assert!(*a <= b + 1e-12);
            }
        }
        for w in ladder.qtilde_vectors.windows(2) {
            for (a, b) in w[0].iter().zip(&w[1]) {
                prop_assert!(*a >= b - 1e-12);
            }
        }
        for (q, qt) in ladder.q_vectors.iter().zip(&ladder.qtilde_vectors) {
            for (a, b) in q.iter().zip(qt) {
                prop_assert!(*a <= b + 1e-12);
            }
        }
    }

    #[test]
    fn solves_are_fixed_points_and_monotone_in_boundary(
        m in prop_oneof![explicit_model(), parametric_model()],
        k in 1usize..40,
        s1 in 0.0..1.0f64,
        s2 in 0.0..1.0f64,
    ) {
        let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        let sys = TruncatedSystem::new(&m, k);
        let tol = 1e-12;
        let a = sys.solve(lo, tol, DEFAULT_MAX_ITER).unwrap();
        let b = sys.solve(hi, tol, DEFAULT_MAX_ITER).unwrap();
        prop_assert!(a.converged && b.converged);
        prop_assert!(sys.fixed_point_residual(&a.vector) <= 10.0 * tol);
        for i in 0..=k {
            prop_assert!(a.vector[i] <= b.vector[i] + 1e-12);
        }
    }

    #[test]
    fn first_return_sum_matches_recursion(g in 0.0..0.3f64, k in 1usize..5) {
        // x_k = M_kk + sum over paths k -> (types < k)* -> k; the path sum is
        // the Neumann series r (I - A)^{-1} c of the block A on types < k
        let m = LhbpModel::example2(g).unwrap();
        let mom = embedded_moments(&m, k);
        prop_assume!(mom.len() > k);
        let mut a: Vec<Vec<f64>> = (0..k)
            .map(|i| (0..k).map(|j| f64::from(i == j) - m.mean(i, j)).collect())
            .collect();
        let mut y: Vec<f64> = (0..k).map(|i| m.mean(i, k)).collect();
        for p in 0..k {
            let piv = (p..k).max_by(|&i, &j| a[i][p].abs().total_cmp(&a[j][p].abs())).unwrap();
            a.swap(p, piv);
            y.swap(p, piv);
            for i in p + 1..k {
                let f = a[i][p] / a[p][p];
                for j in p..k {
                    a[i][j] -= f * a[p][j];
                }
                y[i] -= f * y[p];
            }
        }
        for p in (0..k).rev() {
            y[p] = (y[p] - (p + 1..k).map(|j| a[p][j] * y[j]).sum::<f64>()) / a[p][p];
        }
        let x = m.mean(k, k) + (0..k).map(|j| m.mean(k, j) * y[j]).sum::<f64>();
        prop_assert!((x - mom.x[k]).abs() <= 1e-8, "{} vs {}", x, mom.x[k]);
    }

    #[test]
    fn blowup_shows_in_the_ladder(g in 0.2..0.95f64) {
        let m = LhbpModel::example2(g).unwrap();
        let mom = embedded_moments(&m, 200);
        let MomentStatus::Blowup { k, .. } = mom.status else {
            return Err(TestCaseError::fail("expected a blowup"));
        };
        let level = (k + 64).max(8);
        // from the all-zero start the iteration reaches the minimal solution
        let r = TruncatedSystem::new(&m, level).solve(1.0, 1e-12, DEFAULT_MAX_ITER).unwrap();
        prop_assert!(r.value(0) < 1.0 - 1e-6);
    }

    #[test]
    fn bounds_sandwich_the_oracle(m in parametric_model(), i in 1usize..4, extra in 1usize..30) {
        let k = i + extra;
        prop_assume!(embedded_moments(&m, k).len() > k);
        let b = agresti_bounds(&m, i, k).unwrap();
        let q = TruncatedSystem::new(&m, k).solve(0.0, 1e-13, DEFAULT_MAX_ITER).unwrap();
        prop_assert!(b.lower <= q.value(i) + 1e-8, "{} > {}", b.lower, q.value(i));
        prop_assert!(q.value(i) <= b.upper + 1e-8, "{} > {}", q.value(i), b.upper);
    }

    #[test]
    fn tridiagonal_recursion_reaches_closed_form(a in 0.01..1.0f64, b in 0.0..0.9f64, c in 0.01..1.5f64) {
        let disc = (1.0 - b) * (1.0 - b) - 4.0 * a * c;
        prop_assume!(disc >= 1e-4);
        let m = LhbpModel::tridiagonal(a, b, c, 1.0).unwrap();
        // at discriminant 1e-4 the error contracts like 0.98^k
        let mom = embedded_moments(&m, 5000);
        let lim = tridiagonal_mu_limit(a, b, c).unwrap();
        prop_assert!((mom.mu[5000] - lim.mu).abs() <= 1e-10);
    }

    #[test]
    fn curves_keep_anchor_order(t1 in 0.05..0.95f64, t2 in 0.05..0.95f64) {
        let m = LhbpModel::example2(0.3).unwrap();
        let ladder = extinction_ladder(&m, &[64, 128, 256], 24, 1e-12).unwrap();
        let (q0, qt0) = (ladder.q_estimate[0], ladder.qtilde_estimate[0]);
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let cache = GCache::new();
        let a = curve_from_anchor(&m, q0 + lo * (qt0 - q0), 20, 1e-12, &ladder, None, &cache).unwrap();
        let b = curve_from_anchor(&m, q0 + hi * (qt0 - q0), 20, 1e-12, &ladder, None, &cache).unwrap();
        prop_assert!(a.residual <= 1e-11 && b.residual <= 1e-11);
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!(*x <= *y);
        }
    }

    #[test]
    fn anchors_outside_the_bracket_are_rejected(eps in 2e-6..0.1f64) {
        let m = LhbpModel::example2(0.3).unwrap();
        let ladder = extinction_ladder(&m, &[64], 8, 1e-12).unwrap();
        let cache = GCache::new();
        let below = ladder.q_estimate[0] - eps;
        let above = ladder.qtilde_estimate[0] + eps;
        prop_assert!(curve_from_anchor(&m, below, 4, 1e-12, &ladder, None, &cache).is_err());
        prop_assert!(curve_from_anchor(&m, above, 4, 1e-12, &ladder, None, &cache).is_err());
    }

    #[test]
    fn simulation_is_deterministic(seed in any::<u64>(), g in 0.0..1.0f64) {
        let m = LhbpModel::example2(g.min(0.99)).unwrap();
        let c = SimConfig::new(4, Variant::Sterile, 0, 64, seed);
        prop_assert_eq!(simulate_truncated(&m, &c).unwrap(), simulate_truncated(&m, &c).unwrap());
    }

    #[test]
    fn sterile_and_immortal_runs_couple(seed in any::<u64>(), g in 0.0..0.99f64, k in 1usize..6, rep in 0usize..50) {
        let m = LhbpModel::example2(g).unwrap();
        let s = simulate_trace(&m, &SimConfig::new(k, Variant::Sterile, 0, 1, seed), rep, 30);
        let i = simulate_trace(&m, &SimConfig::new(k, Variant::Immortal, 0, 1, seed), rep, 30);
        for (a, b) in s.iter().zip(&i) {
            prop_assert_eq!(&a[..=k], &b[..=k]);
        }
    }

    #[test]
    fn model_documents_round_trip(g in 0.0..1.0f64, a in 0.0..2.0f64, b in 0.0..2.0f64, c in 0.0..2.0f64, u in 1.0..4.0f64) {
        for doc in [
            ModelDocument::Example2 { gamma: g, bandwidth: None },
            ModelDocument::Tridiagonal { a, b, c, u, bandwidth: Some(1) },
        ] {
            let text = serde_json::to_string(&doc).unwrap();
            let back: ModelDocument = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(doc, back);
        }
    }
}

proptest! {
    #![proptest_config(cfg(12))]

    #[test]
    fn global_extinction_needs_partial_extinction(m in parametric_model()) {
        let v = global_verdict(&m, 2000, DEFAULT_MARGIN);
        if v.verdict == GlobalKind::GlobalExtinction {
            prop_assert!(v.partial != PartialKind::PartialSurvival);
        }
    }

    #[test]
    fn regimes_agree_with_the_ladder(m in parametric_model()) {
        let budget = Budget { horizon: 2000, tail_horizon: 2000, k_budget: 60, ..Budget::default() };
        let regime = classify(&m, budget).regime;
        let ladder = extinction_ladder(&m, &[64, 256, 1024], 1, 1e-12).unwrap();
        match regime {
            Regime::QeqQtildeEq1 | Regime::QltQtildeEq1 => {
                prop_assert!(ladder.qtilde_estimate[0] >= 1.0 - 1e-9);
            }
            Regime::QltQtildeLt1 | Regime::QeqQtildeLt1 => {
                prop_assert!(ladder.qtilde_vectors.iter().any(|v| v[0] < 1.0 - 1e-6));
            }
            Regime::Unresolved => {}
        }
    }

    #[test]
    fn doubling_the_budget_keeps_the_regime(g in 0.0..0.99f64) {
        let m = LhbpModel::example2(g).unwrap();
        let small = Budget { k_budget: 50, ..Budget::default() };
        let large = Budget { k_budget: 100, ..Budget::default() };
        let a = classify(&m, small).regime;
        if a != Regime::Unresolved {
            prop_assert_eq!(a, classify(&m, large).regime);
        }
    }

    #[test]
    fn batch_split_follows_the_limit(a in 0.05..0.3f64, b in 0.0..0.5f64, c in 0.3..1.5f64, u in 1.0..3.0f64) {
        let Ok(lim) = tridiagonal_mu_limit(a, b, c) else { return Ok(()); };
        prop_assume!(lim.discriminant >= 1e-3 && lim.mu >= 1.0);
        // keep clear of u = mu, where neither side is decided
        prop_assume!((u - lim.mu).abs() > 0.05);
        let m = LhbpModel::tridiagonal(a, b, c, u).unwrap();
        let v = global_verdict(&m, 3000, DEFAULT_MARGIN).verdict;
        let expect = if u > lim.mu { GlobalKind::GlobalExtinction } else { GlobalKind::GlobalSurvivalPossible };
        prop_assert_eq!(v, expect);
    }
}

#[test]
fn tail_of_quartic_family_is_certified() {
    let base = Arc::new(LhbpModel::example2(0.8).unwrap());
    let tail = base.tail(5);
    assert_eq!(partial_verdict(&tail, 500).kind, PartialKind::PartialExtinctionCertain);
}
