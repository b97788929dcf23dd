//! Fixed points of the progeny generating vector between `q` and `q~`.
//!
//! A curve is grown from an anchor `s_0` by inverting the embedded generating
//! functions, `s_{j+1} = g_j^{-1}(s_j)`.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::Serialize;

use crate::embedded::EmbeddedMoments;
use crate::error::NumericError;
use crate::generating::{ExtinctionLadder, TruncatedSystem, DEFAULT_MAX_ITER};
use crate::model::LhbpModel;

pub const INVERSION_TOL: f64 = 1e-12;
pub const BISECTION_STEPS: usize = 60;
/// Slack on the ladder bracket when accepting anchors.
pub const ANCHOR_SLACK: f64 = 1e-6;

/// Memo of `g_k(s)` keyed by level and the exact bits of `s`. Bisection
/// midpoints are dyadic, so repeated probes hit the same keys.
#[derive(Debug, Default)]
pub struct GCache {
    map: Mutex<HashMap<(usize, u64), f64>>,
}

impl GCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn get(&self, k: usize, s: f64) -> Option<f64> {
        self.map.lock().ok()?.get(&(k, s.to_bits())).copied()
    }

    fn put(&self, k: usize, s: f64, g: f64) {
        if let Ok(mut m) = self.map.lock() {
            m.insert((k, s.to_bits()), g);
        }
    }

    pub fn len(&self) -> usize {
        self.map.lock().map(|m| m.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn solve_tol(tol: f64) -> f64 {
    (tol * 1e-2).max(1e-15)
}

/// Inverts `g_k` on a prepared level-`k` system.
fn invert_on(
    sys: &TruncatedSystem,
    cache: &GCache,
    target: f64,
    tol: f64,
) -> Result<f64, NumericError> {
    let k = sys.level();
    let stol = solve_tol(tol);
    let at0 = sys.solve(0.0, stol, DEFAULT_MAX_ITER)?;
    let g0 = at0.value(k);
    let g1 = match cache.get(k, 1.0) {
        Some(g) => g,
        None => {
            let r = sys.solve_qtilde(Some(&at0.vector), stol, DEFAULT_MAX_ITER)?;
            cache.put(k, 1.0, r.value(k));
            r.value(k)
        }
    };
    cache.put(k, 0.0, g0);
    if target < g0 - tol || target > g1 + tol {
        return Err(NumericError::Range {
            level: k,
            target,
            lo: g0,
            hi: g1,
        });
    }
    if (g0 - target).abs() <= tol {
        return Ok(0.0);
    }
    if (g1 - target).abs() <= tol {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    // the solution at `lo` lies below every solution with a larger boundary
    let mut below = at0.vector;
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let g = match cache.get(k, mid) {
            Some(g) => g,
            None => {
                let r = sys.solve_from(mid, Some(&below), stol, DEFAULT_MAX_ITER)?;
                let g = r.value(k);
                cache.put(k, mid, g);
                if g < target {
                    below = r.vector;
                }
                g
            }
        };
        if (g - target).abs() <= tol {
            return Ok(mid);
        }
        if g < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The preimage of `target` under `g_k`.
pub fn invert_g(model: &LhbpModel, k: usize, target: f64, tol: f64) -> Result<f64, NumericError> {
    invert_on(&TruncatedSystem::new(model, k), &GCache::new(), target, tol)
}

#[derive(Clone, Debug, Serialize)]
pub struct FixedPointCurve {
    pub anchor_index: usize,
    pub anchor_value: f64,
    /// `s_0..=s_J`, shorter when construction stopped early.
    pub values: Vec<f64>,
    /// `max_{i < len-1} |G_i(s) - s_i|`.
    pub residual: f64,
    /// Index whose inversion left the admissible range.
    pub failure_index: Option<usize>,
    /// `(1 - s_k) m_{0->k-1}` where the moment table is finite.
    pub decay: Vec<f64>,
}

impl FixedPointCurve {
    pub fn is_complete(&self, window: usize) -> bool {
        self.failure_index.is_none() && self.values.len() == window + 1
    }
}

/// `max_{i < n-1} |G_i(s) - s_i|` on a finite prefix.
pub fn curve_residual(model: &LhbpModel, values: &[f64]) -> f64 {
    let n = values.len();
    let mut worst: f64 = 0.0;
    for i in 0..n.saturating_sub(1) {
        let law = model.law(i);
        worst = worst.max((law.pgf(values) - values[i]).abs());
    }
    worst
}

fn scaled_decay(values: &[f64], moments: Option<&EmbeddedMoments>) -> Vec<f64> {
    let Some(mom) = moments else {
        return Vec::new();
    };
    values
        .iter()
        .enumerate()
        .take_while(|&(k, _)| k == 0 || k - 1 < mom.len())
        .map(|(k, s)| {
            let lm = if k == 0 { 0.0 } else { mom.log_m0[k - 1] };
            (1.0 - s) * lm.exp()
        })
        .collect()
}

/// Grows the fixed-point curve through `s0` over indices `0..=window`.
pub fn curve_from_anchor(
    model: &LhbpModel,
    s0: f64,
    window: usize,
    tol: f64,
    ladder: &ExtinctionLadder,
    moments: Option<&EmbeddedMoments>,
    cache: &GCache,
) -> Result<FixedPointCurve, NumericError> {
    let lo = ladder.q_estimate.first().copied().unwrap_or(0.0) - ANCHOR_SLACK;
    let hi = ladder.qtilde_estimate.first().copied().unwrap_or(1.0) + ANCHOR_SLACK;
    if !(lo..=hi).contains(&s0) {
        return Err(NumericError::Range {
            level: 0,
            target: s0,
            lo,
            hi,
        });
    }
    let mut values = Vec::with_capacity(window + 1);
    values.push(s0);
    let mut failure_index = None;
    let mut sys = TruncatedSystem::new(model, 0);
    for j in 0..window {
        sys.extend(model, j);
        match invert_on(&sys, cache, values[j], tol) {
            Ok(s) => values.push(s),
            Err(NumericError::Range { .. }) => {
                failure_index = Some(j);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(FixedPointCurve {
        anchor_index: 0,
        anchor_value: s0,
        residual: curve_residual(model, &values),
        decay: scaled_decay(&values, moments),
        values,
        failure_index,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "class", content = "limit", rename_all = "lowercase")]
pub enum Trend {
    Diverging,
    Vanishing,
    Stabilizing(f64),
    Undetermined,
}

/// Relative range of the last quarter below which a sequence is stabilizing.
pub const STABLE_RANGE: f64 = 0.05;
/// Per-index slope of the log-sequence beyond which it diverges or vanishes.
pub const TREND_SLOPE: f64 = 0.01;

/// Finite-window trend of a positive sequence.
pub fn trend(seq: &[f64]) -> Trend {
    let seq: Vec<f64> = seq.iter().copied().filter(|x| x.is_finite()).collect();
    if seq.len() < 8 {
        return Trend::Undetermined;
    }
    let tail = &seq[seq.len() - seq.len() / 4..];
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > 0.0 && lo > 0.0 && (hi - lo) / hi < STABLE_RANGE {
        return Trend::Stabilizing(tail[tail.len() - 1]);
    }
    if lo <= 0.0 {
        return if tail.iter().all(|x| *x <= 0.0) {
            Trend::Vanishing
        } else {
            Trend::Undetermined
        };
    }
    let logs: Vec<f64> = tail.iter().map(|x| x.ln()).collect();
    let s = slope(&logs);
    if s > TREND_SLOPE {
        Trend::Diverging
    } else if s < -TREND_SLOPE {
        Trend::Vanishing
    } else {
        Trend::Undetermined
    }
}

fn slope(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    let mx = (n - 1.0) / 2.0;
    let my = ys.iter().sum::<f64>() / n;
    let (mut num, mut den) = (0.0, 0.0);
    for (i, y) in ys.iter().enumerate() {
        num += (i as f64 - mx) * (y - my);
        den += (i as f64 - mx).powi(2);
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    /// `(1 - s_k) C_k` with `C_k = m_{0->k-1}`, or the conditioned analogue
    /// when the embedded process is explosive.
    pub scaled: Vec<f64>,
    pub scaled_trend: Trend,
    /// Whether `scaled` uses means conditioned on partial extinction.
    pub conditioned: bool,
    pub ratio_q: Vec<f64>,
    pub ratio_q_trend: Trend,
    pub ratio_qtilde: Vec<f64>,
    pub ratio_qtilde_trend: Trend,
}

/// Step of the one-sided difference for conditioned means.
const DERIV_STEP: f64 = 1e-6;

/// Means `g_k'(t_{k+1}) t_{k+1} / t_k` of the process conditioned on partial
/// extinction, where `t = q~`.
fn conditioned_log_means(
    model: &LhbpModel,
    qtilde: &[f64],
    n: usize,
    tol: f64,
) -> Result<Vec<f64>, NumericError> {
    let stol = solve_tol(tol);
    let mut out = Vec::with_capacity(n);
    let mut sys = TruncatedSystem::new(model, 0);
    for k in 0..n {
        sys.extend(model, k);
        let t = qtilde[k + 1];
        let base = sys.solve(t - DERIV_STEP, stol, DEFAULT_MAX_ITER)?;
        let top = sys.solve_from(t, Some(&base.vector), stol, DEFAULT_MAX_ITER)?;
        let d = (top.value(k) - base.value(k)) / DERIV_STEP;
        out.push(d.ln() + t.ln() - qtilde[k].ln());
    }
    Ok(out)
}

/// Growth-rate and ratio diagnostics of a curve against the ladder windows.
pub fn decay_diagnostics(
    model: &LhbpModel,
    curve: &FixedPointCurve,
    moments: &EmbeddedMoments,
    ladder: &ExtinctionLadder,
    tol: f64,
) -> Result<DecayReport, NumericError> {
    let s = &curve.values;
    let q = &ladder.q_estimate;
    let qt = &ladder.qtilde_estimate;
    let n = s.len().min(q.len()).min(qt.len());
    let ratio = |w: &[f64]| -> Vec<f64> { (0..n).map(|k| (1.0 - w[k]) / (1.0 - s[k])).collect() };
    let ratio_q = ratio(q);
    let ratio_qtilde = ratio(qt);
    let conditioned = !moments.is_ok() || moments.len() + 1 < n;
    let scaled = if conditioned {
        let m = n.saturating_sub(1);
        let logs = conditioned_log_means(model, qt, m, tol)?;
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            if k > 0 {
                acc += logs[k - 1];
            }
            out.push((1.0 - s[k] / qt[k]) * acc.exp());
        }
        out
    } else {
        scaled_decay(&s[..n], Some(moments))
    };
    Ok(DecayReport {
        scaled_trend: trend(&scaled),
        scaled,
        conditioned,
        ratio_q_trend: trend(&ratio_q),
        ratio_q,
        ratio_qtilde_trend: trend(&ratio_qtilde),
        ratio_qtilde,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedded::eval_g;

    #[test]
    fn inversion_examples() {
        let m = LhbpModel::example2(0.0).unwrap();
        assert_eq!(invert_g(&m, 1, 0.5, INVERSION_TOL).unwrap(), 0.0);
        let m = LhbpModel::example2(0.3).unwrap();
        let g = eval_g(&m, 3, 0.5, 1e-14).unwrap();
        let s = invert_g(&m, 3, g, INVERSION_TOL).unwrap();
        assert!((s - 0.5).abs() < 1e-10);
        let g0 = eval_g(&m, 3, 0.0, 1e-14).unwrap();
        assert!(matches!(
            invert_g(&m, 3, g0 - 0.01, INVERSION_TOL),
            Err(NumericError::Range { level: 3, .. })
        ));
    }

    #[test]
    fn trend_classes() {
        assert_eq!(trend(&[2.0; 20]), Trend::Stabilizing(2.0));
        let up: Vec<f64> = (0..40).map(|k| (0.1 * k as f64).exp()).collect();
        assert_eq!(trend(&up), Trend::Diverging);
        let down: Vec<f64> = (0..40).map(|k| (-0.1 * k as f64).exp()).collect();
        assert_eq!(trend(&down), Trend::Vanishing);
        assert_eq!(trend(&[1.0, 2.0]), Trend::Undetermined);
    }
}
