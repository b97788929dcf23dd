//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero when
//! any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use lhbp_core::criteria::{
    agresti_bounds, classify, global_verdict, Budget, GlobalKind, Regime, DEFAULT_MARGIN,
};
use lhbp_core::embedded::embedded_moments;
use lhbp_core::fixedpoints::{curve_from_anchor, FixedPointCurve, GCache, INVERSION_TOL};
use lhbp_core::generating::{default_schedule, extinction_ladder, TruncatedSystem, DEFAULT_MAX_ITER};
use lhbp_core::montecarlo::{estimate_embedded_moment, estimate_extinction, Variant};
use lhbp_core::sweep::gamma_star;
use lhbp_core::LhbpModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn gamma_star_range() -> Outcome {
    let t = Instant::now();
    let g = gamma_star(5000, 5e-4).expect("bisection");
    let el = t.elapsed();
    let pass = (0.1615..=0.1635).contains(&g.estimate) && el < Duration::from_secs(60);
    check(
        pass,
        format!("gamma* = {:.6} in [{:.6}, {:.6}], want [0.1615, 0.1635], {}", g.estimate, g.lo, g.hi, secs(el)),
    )
}

fn long_horizon_anchor() -> Outcome {
    let t = Instant::now();
    let m = LhbpModel::example2(0.0).unwrap();
    let mut schedule = default_schedule(4096);
    schedule.push(8000);
    let ladder = extinction_ladder(&m, &schedule, 1, 1e-12).unwrap();
    let q0 = ladder.q_estimate[0];
    let worst_qt = ladder
        .qtilde_vectors
        .iter()
        .map(|v| (1.0 - v[0]).abs())
        .fold(0.0, f64::max);
    let el = t.elapsed();
    let pass = (0.93..=0.97).contains(&q0) && worst_qt <= 1e-9 && el < Duration::from_secs(300);
    check(
        pass,
        format!("q_0^(8000) = {q0:.6} (want [0.93, 0.97]), max |1 - qtilde_0| = {worst_qt:.1e}, {}", secs(el)),
    )
}

fn regime_table() -> Outcome {
    let want = [
        (0.0, Regime::QeqQtildeEq1),
        (0.1, Regime::QltQtildeEq1),
        (0.3, Regime::QltQtildeLt1),
        (0.8, Regime::QeqQtildeLt1),
    ];
    let mut pass = true;
    let mut got = Vec::new();
    for (g, r) in want {
        let c = classify(&LhbpModel::example2(g).unwrap(), Budget::default()).regime;
        pass &= c == r;
        got.push(format!("{g}: {c:?}"));
    }
    check(pass, got.join(", "))
}

fn tridiagonal_closed_form() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    while n < 50 {
        let (a, b, c): (f64, f64, f64) = (rng.gen_range(0.01..2.0), rng.gen_range(0.0..1.0), rng.gen_range(0.01..2.0));
        let disc = (1.0 - b) * (1.0 - b) - 4.0 * a * c;
        if disc < 1e-3 {
            continue;
        }
        n += 1;
        let closed = (1.0 - b - disc.sqrt()) / (2.0 * a);
        let mom = embedded_moments(&LhbpModel::tridiagonal(a, b, c, 1.0).unwrap(), 500);
        worst = worst.max((mom.mu[500] - closed).abs());
    }
    check(worst <= 1e-10, format!("max |mu_500 - closed form| over 50 draws = {worst:.2e} (tol 1e-10)"))
}

fn batch_split() -> Outcome {
    let cases = [
        ((0.1, 0.2, 0.8, 1.0), GlobalKind::GlobalSurvivalPossible),
        ((0.1, 0.2, 0.8, 2.0), GlobalKind::GlobalExtinction),
        ((0.25, 0.0, 0.25, 1.0), GlobalKind::GlobalExtinction),
    ];
    let mut pass = true;
    let mut got = Vec::new();
    for ((a, b, c, u), want) in cases {
        let v = global_verdict(&LhbpModel::tridiagonal(a, b, c, u).unwrap(), 5000, DEFAULT_MARGIN);
        pass &= v.verdict == want;
        got.push(format!("({a},{b},{c}) u={u}: {:?} by {:?}", v.verdict, v.rule));
    }
    check(pass, got.join("; "))
}

fn acceptance_models() -> Vec<(String, LhbpModel)> {
    let mut out: Vec<(String, LhbpModel)> = [0.0, 0.1, 0.3, 0.5, 0.8]
        .iter()
        .map(|&g| (format!("example2({g})"), LhbpModel::example2(g).unwrap()))
        .collect();
    for (a, b, c, u) in [(0.1, 0.2, 0.8, 1.0), (0.1, 0.2, 0.8, 2.0), (0.25, 0.0, 0.25, 1.0)] {
        out.push((
            format!("tridiagonal({a},{b},{c},{u})"),
            LhbpModel::tridiagonal(a, b, c, u).unwrap(),
        ));
    }
    out
}

fn ladder_monotonicity() -> Outcome {
    let t = Instant::now();
    let schedule = &default_schedule(4096);
    let models = acceptance_models();
    let results: Vec<(String, bool)> = std::thread::scope(|s| {
        let handles: Vec<_> = models
            .iter()
            .map(|(name, m)| {
                s.spawn(move || {
                    let l = extinction_ladder(m, schedule, 16, 1e-12).unwrap();
                    let up = l.q_vectors.windows(2).all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| *a <= b + 1e-12));
                    let down = l.qtilde_vectors.windows(2).all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| *a >= b - 1e-12));
                    (name.clone(), up && down && l.solves_converged)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let bad: Vec<&str> = results.iter().filter(|r| !r.1).map(|r| r.0.as_str()).collect();
    check(
        bad.is_empty(),
        format!("{} models, levels 2..4096, window 16, failing: {:?}, {}", results.len(), bad, secs(t.elapsed())),
    )
}

fn fixed_point_continuum() -> Outcome {
    let t = Instant::now();
    let m = LhbpModel::example2(0.3).unwrap();
    let ladder = extinction_ladder(&m, &default_schedule(4096), 202, 1e-12).unwrap();
    let (q0, qt0) = (ladder.q_estimate[0], ladder.qtilde_estimate[0]);
    let cache = GCache::new();
    let curves: Vec<FixedPointCurve> = std::thread::scope(|s| {
        let handles: Vec<_> = (1..=10)
            .map(|a| {
                let (m, ladder, cache) = (&m, &ladder, &cache);
                s.spawn(move || {
                    let s0 = q0 + (qt0 - q0) * a as f64 / 11.0;
                    curve_from_anchor(m, s0, 200, INVERSION_TOL, ladder, None, cache).unwrap()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let complete = curves.iter().all(|c| c.is_complete(200));
    let worst = curves.iter().map(|c| c.residual).fold(0.0, f64::max);
    let ordered = curves
        .windows(2)
        .all(|w| w[0].values.iter().zip(&w[1].values).all(|(x, y)| x <= y));
    check(
        complete && worst <= 1e-8 && ordered,
        format!(
            "10 anchors in ({q0:.6}, {qt0:.6}), window 200: complete = {complete}, max residual = {worst:.2e}, ordered = {ordered}, {}",
            secs(t.elapsed())
        ),
    )
}

fn bound_sandwich() -> Outcome {
    let m = LhbpModel::example2(0.0).unwrap();
    let mut pass = true;
    let mut got = Vec::new();
    for k in [10, 100, 1000] {
        let b = agresti_bounds(&m, 1, k).unwrap();
        let q = TruncatedSystem::new(&m, k).solve(0.0, 1e-13, DEFAULT_MAX_ITER).unwrap().value(1);
        pass &= b.lower <= q && q <= b.upper;
        got.push(format!("k={k}: {:.6} <= {q:.6} <= {:.6}", b.lower, b.upper));
    }
    check(pass, got.join("; "))
}

fn monte_carlo() -> Outcome {
    let m = LhbpModel::example2(0.0).unwrap();
    let e = estimate_extinction(&m, 1, 0, Variant::Immortal, 100_000, 17).unwrap();
    // q_0^(1) = 3/4 + (1/4)(1/2)^4 for the quartic law
    let p = 49.0 / 64.0;
    let sigma = (p * (1.0 - p) / e.n as f64).sqrt();
    let ok_q = (e.estimate - p).abs() <= 3.0 * sigma && !e.unreliable;
    let mu = estimate_embedded_moment(&m, 1, 100_000, 17).unwrap();
    let ok_mu = (mu.mean - 2.0).abs() <= 3.0 * mu.std_error && !mu.unreliable;
    check(
        ok_q && ok_mu,
        format!(
            "q_0^(1): {:.5} vs 49/64 (3 sigma = {:.5}); mu_1: {:.5} vs 2 (3 sigma = {:.5})",
            e.estimate,
            3.0 * sigma,
            mu.mean,
            3.0 * mu.std_error
        ),
    )
}

fn boundary_honesty() -> Outcome {
    let c = classify(&LhbpModel::example2(0.5).unwrap(), Budget::default()).regime;
    check(c == Regime::Unresolved, format!("gamma = 0.5: {c:?}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("gamma* reproduction", gamma_star_range),
        ("gamma = 0 anchor points", long_horizon_anchor),
        ("regime table", regime_table),
        ("tridiagonal closed form", tridiagonal_closed_form),
        ("batch/mean split", batch_split),
        ("ladder monotonicity", ladder_monotonicity),
        ("fixed-point continuum", fixed_point_continuum),
        ("bound sandwich", bound_sandwich),
        ("Monte Carlo agreement", monte_carlo),
        ("boundary honesty", boundary_honesty),
    ];
    let mut failed = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<26} {}  {}",
            n + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
