//! Decision procedures: global extinction, two-sided bounds on `q^(k)`, the
//! mean growth rate, strong local survival and the four-way classifier.

use std::sync::Arc;

use serde::Serialize;
use serde_json::json;

use crate::embedded::{
    embedded_moments, partial_verdict_from, EmbeddedMoments, PartialKind, PartialVerdict,
};
use crate::error::NumericError;
pub use crate::generating::SpectralBracket;
use crate::generating::{TruncatedSystem, DEFAULT_MAX_ITER};
use crate::model::{Family, LhbpModel};

pub const DEFAULT_MARGIN: f64 = 0.05;
/// Fraction of the horizon used as the tail window of finite-horizon tests.
pub const TAIL_FRACTION: f64 = 0.2;
/// Relative growth of the running maximum of `a_k / mu_k` over the last half
/// of the horizon below which the ratio counts as bounded.
pub const BOUNDED_RATIO_TOL: f64 = 1e-6;
/// Relative range below which a tail-window sequence counts as stable.
pub const STABLE_RANGE: f64 = 0.05;
/// Upper bound on `1 - q_0^(k)` that the mean rule must reach in the window.
pub const MEAN_RULE_LEVEL: f64 = 1e-6;
/// Minimal per-index log-decay of the bound terms for a geometric series.
pub const GEOMETRIC_SLOPE: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GlobalKind {
    GlobalExtinction,
    GlobalSurvivalPossible,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GlobalRule {
    /// `q~ < 1` forces `q < 1`.
    PartialSurvival,
    /// `1 - q_0^(k) <= m_{0->k} / d_k -> 0`, where `d_k` is the smallest
    /// positive number of type-`(k+1)` children of a type-`k` parent.
    MeanOverBatch,
    RaabeConvergent,
    RaabeDivergent,
    /// `1 / m_{0->k}` is comparable to `1 / k`.
    HarmonicComparison,
    /// The upper two-sided bound on `q_1^(k)` stays below one.
    BoundSeriesConvergent,
    None,
}

#[derive(Clone, Debug, Serialize)]
pub struct HypothesisFlags {
    pub second_moment_ratio_sup: f64,
    pub second_moment_ratio_bounded: bool,
    pub min_double_birth: f64,
    pub double_birth_positive: bool,
}

impl HypothesisFlags {
    pub fn hold(&self) -> bool {
        self.second_moment_ratio_bounded && self.double_birth_positive
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GlobalVerdict {
    pub verdict: GlobalKind,
    pub rule: GlobalRule,
    pub horizon: usize,
    pub partial: PartialKind,
    /// `sum_{k <= K} 1 / m_{0->k}`.
    pub series_partial_sum: f64,
    /// `k (mu_{k+1} - 1)` for `k = 0..K-1`.
    #[serde(skip)]
    pub raabe_stats: Vec<f64>,
    /// Min and max of the Raabe statistic over the tail window.
    pub raabe_window: (f64, f64),
    pub hypothesis_flags: HypothesisFlags,
    /// Human-readable trail of the rules tried.
    pub notes: Vec<String>,
}

fn tail_start(len: usize) -> usize {
    let w = ((len as f64) * TAIL_FRACTION).ceil() as usize;
    len.saturating_sub(w.max(1))
}

/// Least-squares slope of `ys` against the index.
fn slope(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    if ys.len() < 2 {
        return 0.0;
    }
    let mx = (n - 1.0) / 2.0;
    let my = ys.iter().sum::<f64>() / n;
    let (mut num, mut den) = (0.0, 0.0);
    for (i, y) in ys.iter().enumerate() {
        let dx = i as f64 - mx;
        num += dx * (y - my);
        den += dx * dx;
    }
    num / den
}

fn relative_range(ys: &[f64]) -> f64 {
    let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi.abs() > 0.0) {
        return f64::INFINITY;
    }
    (hi - lo) / hi.abs()
}

fn hypothesis_flags(model: &LhbpModel, mom: &EmbeddedMoments) -> HypothesisFlags {
    let n = mom.len();
    let ratio: Vec<f64> = mom.a.iter().zip(&mom.mu).map(|(a, m)| a / m).collect();
    let half = n / 2;
    let max_first = ratio[..half.max(1).min(n)]
        .iter()
        .copied()
        .fold(0.0, f64::max);
    let max_all = ratio.iter().copied().fold(0.0, f64::max);
    let bounded = max_all.is_finite()
        && (max_all <= max_first || (max_all - max_first) <= BOUNDED_RATIO_TOL * max_first);
    let min_double = (0..n)
        .map(|k| model.law(k).prob_at_least_of(k + 1, 2))
        .fold(f64::INFINITY, f64::min)
        .max(0.0);
    HypothesisFlags {
        second_moment_ratio_sup: max_all,
        second_moment_ratio_bounded: bounded,
        min_double_birth: min_double,
        double_birth_positive: min_double > 1e-12,
    }
}

/// `ln d_k` for every `k` in the table.
fn log_min_forward(model: &LhbpModel, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            model
                .law(k)
                .min_positive_count_of(k + 1)
                .map_or(0.0, f64::ln)
        })
        .collect()
}

/// Mean-over-batch rule: the Markov bound on `1 - q_0^(k)` vanishes in the window.
fn mean_rule(model: &LhbpModel, mom: &EmbeddedMoments, notes: &mut Vec<String>) -> bool {
    let n = mom.len();
    if n < 10 {
        return false;
    }
    let ld = log_min_forward(model, n);
    let r: Vec<f64> = (0..n).map(|k| mom.log_m0[k] - ld[k]).collect();
    let w = &r[tail_start(n)..];
    let worst = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s = slope(w);
    notes.push(format!(
        "mean rule: max ln(m0/d) over window = {worst:.6e}, slope = {s:.6e}"
    ));
    worst < MEAN_RULE_LEVEL.ln() && s < 0.0
}

/// Terms of the upper bound on `q_1^(k)`: `1/m_{1->k-1}` and
/// `sum_{j=1}^{k-1} a_j / (mu_j m_{1->j})`, in logs.
fn bound_series_rule(mom: &EmbeddedMoments, notes: &mut Vec<String>) -> bool {
    let n = mom.len();
    if n < 10 {
        return false;
    }
    let log_terms: Vec<f64> = (1..n)
        .map(|j| mom.a[j].ln() - mom.mu[j].ln() - mom.log_m(1, j))
        .collect();
    let inv_m: Vec<f64> = (1..n).map(|k| -mom.log_m(1, k)).collect();
    let ts = tail_start(log_terms.len());
    let s_terms = slope(&log_terms[ts..]);
    let s_inv = slope(&inv_m[ts..]);
    let finite = log_terms.iter().all(|t| t.is_finite() || *t == f64::NEG_INFINITY);
    notes.push(format!(
        "bound series: log-term slope = {s_terms:.6e}, log(1/m) slope = {s_inv:.6e}"
    ));
    finite && s_terms < -GEOMETRIC_SLOPE && s_inv < -GEOMETRIC_SLOPE
}

/// Finite-horizon global extinction verdict on the `q~ = 1` side.
pub fn global_verdict(model: &LhbpModel, horizon: usize, margin: f64) -> GlobalVerdict {
    let mom = embedded_moments(model, horizon);
    global_verdict_from(model, &mom, margin)
}

/// Prefix of the tables on which `a_k` and `d_k` are finite (batched laws
/// overflow for large types).
fn finite_prefix(model: &LhbpModel, mom: &EmbeddedMoments) -> EmbeddedMoments {
    let ld = log_min_forward(model, mom.len());
    let n = (0..mom.len())
        .position(|k| !(mom.a[k].is_finite() && mom.mu[k].is_finite() && ld[k].is_finite()))
        .unwrap_or(mom.len());
    let mut out = mom.clone();
    out.mu.truncate(n);
    out.a.truncate(n);
    out.x.truncate(n);
    out.m0.truncate(n);
    out.log_m0.truncate(n);
    out
}

pub fn global_verdict_from(model: &LhbpModel, mom: &EmbeddedMoments, margin: f64) -> GlobalVerdict {
    let partial = partial_verdict_from(model, mom);
    let full = mom.len();
    let mom = &finite_prefix(model, mom);
    let series_partial_sum: f64 = mom.log_m0.iter().map(|l| (-l).exp()).sum();
    let raabe_stats: Vec<f64> = (0..mom.len().saturating_sub(1))
        .map(|k| k as f64 * (mom.mu[k + 1] - 1.0))
        .collect();
    let raabe_window = if raabe_stats.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        let w = &raabe_stats[tail_start(raabe_stats.len())..];
        (
            w.iter().copied().fold(f64::INFINITY, f64::min),
            w.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    };
    let flags = hypothesis_flags(model, mom);
    let mut notes = Vec::new();
    if mom.len() < full {
        notes.push(format!("tests use the finite prefix k < {}", mom.len()));
    }
    let out = |verdict, rule, notes: Vec<String>| GlobalVerdict {
        verdict,
        rule,
        horizon: mom.horizon,
        partial: partial.kind,
        series_partial_sum,
        raabe_stats: raabe_stats.clone(),
        raabe_window,
        hypothesis_flags: flags.clone(),
        notes,
    };
    if !partial.kind.extinction_side() {
        notes.push("x-criterion fails: q <= q~ < 1".into());
        return out(GlobalKind::GlobalSurvivalPossible, GlobalRule::PartialSurvival, notes);
    }
    if mean_rule(model, mom, &mut notes) {
        return out(GlobalKind::GlobalExtinction, GlobalRule::MeanOverBatch, notes);
    }
    let (lo, hi) = raabe_window;
    let mut candidate = None;
    if lo > 1.0 + margin {
        candidate = Some((GlobalKind::GlobalSurvivalPossible, GlobalRule::RaabeConvergent));
    } else if hi < 1.0 - margin {
        candidate = Some((GlobalKind::GlobalExtinction, GlobalRule::RaabeDivergent));
    } else if lo.is_finite() {
        // within the band: compare 1/m_{0->k} with 1/k
        let n = mom.len();
        let h: Vec<f64> = (0..n)
            .map(|k| ((k + 1) as f64).ln() - mom.log_m0[k])
            .map(f64::exp)
            .collect();
        let w = &h[tail_start(n)..];
        let range = relative_range(w);
        notes.push(format!(
            "Raabe window [{lo:.6}, {hi:.6}] inside the margin; (k+1)/m0 relative range {range:.3e}"
        ));
        if range < STABLE_RANGE {
            candidate = Some((GlobalKind::GlobalExtinction, GlobalRule::HarmonicComparison));
        }
    }
    if let Some((kind, rule)) = candidate {
        if flags.hold() {
            notes.push(format!("{rule:?} with hypotheses satisfied"));
            return out(kind, rule, notes);
        }
        notes.push(format!(
            "{rule:?} downgraded: ratio bounded = {}, min double birth = {:e}",
            flags.second_moment_ratio_bounded, flags.min_double_birth
        ));
    }
    if bound_series_rule(mom, &mut notes) {
        return out(
            GlobalKind::GlobalSurvivalPossible,
            GlobalRule::BoundSeriesConvergent,
            notes,
        );
    }
    out(GlobalKind::Inconclusive, GlobalRule::None, notes)
}

#[derive(Clone, Debug, Serialize)]
pub struct AgrestiBounds {
    pub i: usize,
    pub k: usize,
    pub lower: f64,
    pub upper: f64,
    /// The corresponding bracket was non-positive or non-finite.
    pub lower_degenerate: bool,
    pub upper_degenerate: bool,
}

/// Forward-difference estimate of `g_j''(0)` with one Richardson step.
fn g_second_at_zero(model: &LhbpModel, j: usize, h: f64) -> Result<f64, NumericError> {
    let sys = TruncatedSystem::new(model, j);
    let mut prev: Option<Vec<f64>> = None;
    let mut vals = [0.0; 5];
    for (n, slot) in vals.iter_mut().enumerate() {
        let s = n as f64 * h / 2.0;
        let r = sys.solve_from(s, prev.as_deref(), 1e-15, DEFAULT_MAX_ITER)?;
        *slot = r.value(j);
        prev = Some(r.vector);
    }
    // D(h) uses 0, h, 2h; D(h/2) uses 0, h/2, h
    let d_h = (vals[4] - 2.0 * vals[2] + vals[0]) / (h * h);
    let d_half = (vals[2] - 2.0 * vals[1] + vals[0]) / (h * h / 4.0);
    Ok((2.0 * d_half - d_h).max(0.0))
}

/// Two-sided bounds on `q_i^(k)` from the embedded moments:
/// `1 - [1/m_{i->k} + sum_{j=i}^{k} c_j / (mu_j m_{i->j})]^{-1}` with
/// `c_j = g_j''(0) / 2` (lower) or `c_j = a_j` (upper).
pub fn agresti_bounds(model: &LhbpModel, i: usize, k: usize) -> Result<AgrestiBounds, NumericError> {
    if !(1 <= i && i < k) {
        return Err(NumericError::Precondition(format!(
            "bounds need 1 <= i < k, got i = {i}, k = {k}"
        )));
    }
    let mom = embedded_moments(model, k);
    if mom.len() <= k {
        return Err(NumericError::PartialSurvivalRegime(format!(
            "moment recursion stopped at {}",
            mom.status.label()
        )));
    }
    let inv_m = (-mom.log_m(i, k)).exp();
    let mut upper_sum = 0.0;
    let mut lower_sum = 0.0;
    for j in i..=k {
        let scale = (mom.mu[j].ln() + mom.log_m(i, j)).exp();
        upper_sum += mom.a[j] / scale;
        lower_sum += 0.5 * g_second_at_zero(model, j, 1e-3)? / scale;
    }
    let bound = |bracket: f64| -> (f64, bool) {
        if bracket > 0.0 && bracket.is_finite() {
            ((1.0 - 1.0 / bracket).max(0.0), false)
        } else {
            (0.0, true)
        }
    };
    let (lower, lower_degenerate) = bound(inv_m + lower_sum);
    let (upper, upper_degenerate) = match bound(inv_m + upper_sum) {
        (_, true) => (1.0, true),
        ok => ok,
    };
    Ok(AgrestiBounds {
        i,
        k,
        lower,
        upper,
        lower_degenerate,
        upper_degenerate,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct XiEstimate {
    pub k: usize,
    /// `((M~^(k))^n 1)_0^{1/n}` for `n = 1..=n_max`.
    pub estimates: Vec<f64>,
    /// Minimum of the estimates over the second half of the sequence.
    pub liminf_proxy: f64,
}

/// Mean growth rate of the population restricted to types `0..=k`.
pub fn xi_estimate(model: &LhbpModel, k: usize, n_max: usize) -> Result<XiEstimate, NumericError> {
    if k < 1 || n_max < 1 {
        return Err(NumericError::Precondition("k and n_max must be >= 1".into()));
    }
    let rows: Vec<Vec<(usize, f64)>> = (0..=k)
        .map(|i| {
            model
                .mean_row(i)
                .into_iter()
                .filter(|&(j, _)| j <= k)
                .collect()
        })
        .collect();
    let mut v = vec![1.0; k + 1];
    let mut log_scale = 0.0;
    let mut estimates = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let next: Vec<f64> = rows
            .iter()
            .map(|row| row.iter().map(|&(j, m)| m * v[j]).sum())
            .collect();
        let norm = next.iter().copied().fold(0.0, f64::max);
        if norm == 0.0 {
            estimates.push(0.0);
            v = next;
            continue;
        }
        v = next.iter().map(|x| x / norm).collect();
        log_scale += norm.ln();
        estimates.push(((log_scale + v[0].ln()) / n as f64).exp());
    }
    let start = estimates.len() / 2;
    let liminf_proxy = estimates[start..]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(XiEstimate {
        k,
        estimates,
        liminf_proxy,
    })
}

/// Perron bracket of the `(k+1) x (k+1)` head of the mean matrix.
pub fn head_spectral_radius(model: &LhbpModel, k: usize, stop_above: Option<f64>) -> SpectralBracket {
    TruncatedSystem::new(model, k).perron_bracket(stop_above)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SlsResult {
    StrongLocalSurvival,
    NonStrongLocalSurvival,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct SlsVerdict {
    pub result: SlsResult,
    /// Partition level: the head holds types `0..=k_used`.
    pub k_used: Option<usize>,
    pub head_spectral_radius: Option<SpectralBracket>,
    pub tail_partial: Option<PartialVerdict>,
    pub tail_global: Option<GlobalVerdict>,
    pub finite_coupling: bool,
    pub notes: Vec<String>,
}

/// Threshold the head spectral radius must exceed.
const SP_MARGIN: f64 = 1e-9;

/// Strong local survival test on the `q~ < 1` side.
pub fn sls_verdict(model: &LhbpModel, k_budget: usize, horizon: usize) -> SlsVerdict {
    let base = Arc::new(model.clone());
    let finite_coupling = true; // a finite bandwidth bounds the lower-left block
    let mut notes = vec![format!(
        "bandwidth {}: rows beyond k + {} of the lower-left block vanish",
        model.bandwidth(),
        model.bandwidth()
    )];
    let mut head_ok_from: Option<usize> = None;
    for k in 0..=k_budget {
        let tail = base.tail(k + 1);
        let tail_mom = embedded_moments(&tail, horizon);
        let tail_partial = partial_verdict_from(&tail, &tail_mom);
        // where the family offers an early-exit certificate, a tail that only
        // survives the horizon without it is not accepted
        let tail_ok = match tail_partial.kind {
            PartialKind::PartialExtinctionCertain => true,
            PartialKind::PartialExtinctionLikely => !tail.mu_decrease_certifies(),
            _ => false,
        };
        if !tail_ok {
            continue;
        }
        let head = match head_ok_from {
            Some(_) => head_spectral_radius(model, k, Some(1.0 + SP_MARGIN)),
            None => head_spectral_radius(model, k, Some(1.0 + SP_MARGIN)),
        };
        if !(head.lower > 1.0 + SP_MARGIN) {
            continue;
        }
        head_ok_from.get_or_insert(k);
        let tail_global = global_verdict_from(&tail, &tail_mom, DEFAULT_MARGIN);
        let result = match tail_global.verdict {
            GlobalKind::GlobalExtinction => SlsResult::StrongLocalSurvival,
            GlobalKind::GlobalSurvivalPossible => SlsResult::NonStrongLocalSurvival,
            GlobalKind::Inconclusive => SlsResult::Inconclusive,
        };
        notes.push(format!(
            "k = {k}: head spectral radius in [{:.12}, {:.12}], tail {:?}, tail global {:?} by {:?}",
            head.lower, head.upper, tail_partial.kind, tail_global.verdict, tail_global.rule
        ));
        return SlsVerdict {
            result,
            k_used: Some(k),
            head_spectral_radius: Some(head),
            tail_partial: Some(tail_partial),
            tail_global: Some(tail_global),
            finite_coupling,
            notes,
        };
    }
    notes.push(format!(
        "no partition level k <= {k_budget} met the hypotheses within horizon {horizon}"
    ));
    SlsVerdict {
        result: SlsResult::Inconclusive,
        k_used: None,
        head_spectral_radius: None,
        tail_partial: None,
        tail_global: None,
        finite_coupling,
        notes,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    QeqQtildeEq1,
    QltQtildeEq1,
    QltQtildeLt1,
    QeqQtildeLt1,
    Unresolved,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub test: String,
    pub inputs: serde_json::Value,
    pub outcome: String,
    pub details: serde_json::Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    pub regime: Regime,
    pub certificates: Vec<Certificate>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Budget {
    /// Horizon of the moment recursions.
    pub horizon: usize,
    /// Largest partition level tried by the strong-local-survival test.
    pub k_budget: usize,
    /// Horizon of the tail models' recursions.
    pub tail_horizon: usize,
    pub margin: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            horizon: 5000,
            k_budget: 200,
            tail_horizon: 5000,
            margin: DEFAULT_MARGIN,
        }
    }
}

/// Places the model in one of the four extinction regimes.
pub fn classify(model: &LhbpModel, budget: Budget) -> Classification {
    let mom = embedded_moments(model, budget.horizon);
    let partial = partial_verdict_from(model, &mom);
    let mut certificates = vec![Certificate {
        test: "partial_verdict".into(),
        inputs: json!({ "horizon": budget.horizon }),
        outcome: format!("{:?}", partial.kind),
        details: serde_json::to_value(&partial).unwrap_or_default(),
    }];
    let regime = if partial.kind.extinction_side() {
        let g = global_verdict_from(model, &mom, budget.margin);
        certificates.push(Certificate {
            test: "global_verdict".into(),
            inputs: json!({ "horizon": budget.horizon, "margin": budget.margin }),
            outcome: format!("{:?}", g.verdict),
            details: serde_json::to_value(&g).unwrap_or_default(),
        });
        match g.verdict {
            GlobalKind::GlobalExtinction => Regime::QeqQtildeEq1,
            GlobalKind::GlobalSurvivalPossible => Regime::QltQtildeEq1,
            GlobalKind::Inconclusive => Regime::Unresolved,
        }
    } else {
        let s = sls_verdict(model, budget.k_budget, budget.tail_horizon);
        certificates.push(Certificate {
            test: "sls_verdict".into(),
            inputs: json!({ "k_budget": budget.k_budget, "tail_horizon": budget.tail_horizon }),
            outcome: format!("{:?}", s.result),
            details: serde_json::to_value(&s).unwrap_or_default(),
        });
        match s.result {
            SlsResult::StrongLocalSurvival => Regime::QeqQtildeLt1,
            SlsResult::NonStrongLocalSurvival => Regime::QltQtildeLt1,
            SlsResult::Inconclusive => Regime::Unresolved,
        }
    };
    Classification {
        regime,
        certificates,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum UBatchSide {
    /// `mu < 1`, or `u > mu >= 1`: `q = 1`.
    Extinction,
    /// `1 <= u < mu`: `q < 1`.
    SurvivalPossible,
    /// `u = mu >= 1`.
    Undecided,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TridiagonalLimit {
    pub mu: f64,
    pub discriminant: f64,
}

impl TridiagonalLimit {
    /// Global extinction side for the batched family with parameter `u`.
    pub fn side(&self, u: f64) -> UBatchSide {
        if self.mu < 1.0 || u > self.mu {
            UBatchSide::Extinction
        } else if u < self.mu {
            UBatchSide::SurvivalPossible
        } else {
            UBatchSide::Undecided
        }
    }
}

/// Limit of `mu_k` for the tridiagonal family.
pub fn tridiagonal_mu_limit(a: f64, b: f64, c: f64) -> Result<TridiagonalLimit, NumericError> {
    if !(a > 0.0 && c > 0.0) {
        return Err(NumericError::Precondition("a and c must be positive".into()));
    }
    let disc = (1.0 - b) * (1.0 - b) - 4.0 * a * c;
    if !(b < 1.0) || disc < 0.0 {
        return Err(NumericError::PartialSurvivalRegime(format!(
            "b = {b}, (1-b)^2 - 4ac = {disc}"
        )));
    }
    // rationalized form avoids cancellation when 4ac is small
    let mu = 2.0 * c / (1.0 - b + disc.sqrt());
    Ok(TridiagonalLimit {
        mu,
        discriminant: disc,
    })
}

/// Whether the model's parameters place it in the tridiagonal family.
pub fn tridiagonal_parameters(model: &LhbpModel) -> Option<(f64, f64, f64, f64)> {
    match model.family() {
        Family::Tridiagonal { a, b, c, u } => Some((*a, *b, *c, *u)),
        _ => None,
    }
}
