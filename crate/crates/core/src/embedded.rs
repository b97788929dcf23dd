//! The embedded single-type process in a varying environment.
//!
//! `mu_k` and `a_k` are the first two factorial moments of generation `k`'s
//! offspring law, computed by exact recursions on the mean and second
//! factorial moments of the original laws. `x_k` is the mean number of
//! first-return type-`k` descendants; partial extinction is almost sure iff
//! `0 <= x_k < 1` for every `k`.

use serde::Serialize;

use crate::error::NumericError;
use crate::generating::iterate_to_limit;
use crate::model::LhbpModel;

/// `|x_k - 1|` at or below this counts as the boundary case `x_k = 1`.
pub const BOUNDARY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MomentStatus {
    /// `0 <= x_k < 1` through the horizon.
    Ok,
    /// First `k` with `x_k > 1`.
    Blowup { k: usize, x: f64 },
    /// First `k` with `x_k = 1` within [`BOUNDARY_TOL`].
    Boundary { k: usize, x: f64 },
}

impl MomentStatus {
    pub fn label(&self) -> String {
        match self {
            MomentStatus::Ok => "ok".into(),
            MomentStatus::Blowup { k, .. } => format!("blowup({k})"),
            MomentStatus::Boundary { k, .. } => format!("boundary({k})"),
        }
    }

    pub fn stop(&self) -> Option<usize> {
        match self {
            MomentStatus::Ok => None,
            MomentStatus::Blowup { k, .. } | MomentStatus::Boundary { k, .. } => Some(*k),
        }
    }
}

/// Moment tables for `k = 0..len`; `len = horizon + 1` when the status is
/// `Ok`, otherwise the index where the recursion stopped.
#[derive(Clone, Debug, Serialize)]
pub struct EmbeddedMoments {
    pub horizon: usize,
    pub mu: Vec<f64>,
    pub a: Vec<f64>,
    pub x: Vec<f64>,
    /// `m_{0->k}`; may overflow to infinity, see `log_m0`.
    pub m0: Vec<f64>,
    pub log_m0: Vec<f64>,
    pub status: MomentStatus,
}

impl EmbeddedMoments {
    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn is_ok(&self) -> bool {
        self.status == MomentStatus::Ok
    }

    /// `m_{i->k} = mu_i ... mu_k`, with the empty product equal to one.
    pub fn m(&self, i: usize, k: usize) -> f64 {
        if i > k {
            return 1.0;
        }
        self.mu[i..=k].iter().product()
    }

    /// `ln m_{i->k}`.
    pub fn log_m(&self, i: usize, k: usize) -> f64 {
        if i > k {
            return 0.0;
        }
        let base = if i == 0 { 0.0 } else { self.log_m0[i - 1] };
        self.log_m0[k] - base
    }

    /// First `k >= 1` with `mu_k < mu_{k-1}`.
    pub fn first_decrease(&self) -> Option<usize> {
        self.mu.windows(2).position(|w| w[1] < w[0]).map(|p| p + 1)
    }
}

/// Runs the moment recursions for `k = 0..=horizon`, stopping at the first
/// `x_k >= 1`.
pub fn embedded_moments(model: &LhbpModel, horizon: usize) -> EmbeddedMoments {
    let mut mu: Vec<f64> = Vec::with_capacity(horizon + 1);
    let mut a: Vec<f64> = Vec::with_capacity(horizon + 1);
    let mut xs: Vec<f64> = Vec::with_capacity(horizon + 1);
    let mut m0: Vec<f64> = Vec::with_capacity(horizon + 1);
    let mut log_m0: Vec<f64> = Vec::with_capacity(horizon + 1);
    let mut status = MomentStatus::Ok;

    for k in 0..=horizon {
        let law = model.law(k);
        let row = law.mean_row();
        let lo = law.min_type().unwrap_or(k).min(k);
        // m_{t->k-1} for t in lo..=k, built downward from m_{k->k-1} = 1
        let mut back = vec![1.0; k - lo + 1];
        for t in (lo..k).rev() {
            back[t - lo] = back[t + 1 - lo] * mu[t];
        }
        let x: f64 = row
            .iter()
            .filter(|&&(t, _)| t <= k)
            .map(|&(t, m)| m * back[t - lo])
            .sum();
        if (x - 1.0).abs() <= BOUNDARY_TOL {
            status = MomentStatus::Boundary { k, x };
            break;
        }
        if x > 1.0 {
            status = MomentStatus::Blowup { k, x };
            break;
        }
        let forward = law.mean_of(k + 1);
        let denom = 1.0 - x;
        let mu_k = forward / denom;

        // D_t = g''_{t->k-1}(1) = a_t m_{t+1->k-1}^2 + mu_t D_{t+1}, D_k = 0
        let mut d = vec![0.0; k - lo + 1];
        for t in (lo..k).rev() {
            let tail = back[t + 1 - lo];
            d[t - lo] = a[t] * tail * tail + mu[t] * d[t + 1 - lo];
        }
        let through: f64 = row
            .iter()
            .filter(|&&(t, _)| t <= k)
            .map(|&(t, m)| m * d[t - lo])
            .sum::<f64>()
            * mu_k
            * mu_k;
        let weight = |t: usize| -> f64 {
            if t == k + 1 {
                1.0
            } else if t >= lo && t <= k {
                back[t - lo] * mu_k
            } else {
                0.0
            }
        };
        let direct = law.second_factorial_form(weight);
        let a_k = ((through + direct) / denom).max(0.0);

        let prev_log = log_m0.last().copied().unwrap_or(0.0);
        let prev = m0.last().copied().unwrap_or(1.0);
        mu.push(mu_k);
        a.push(a_k);
        xs.push(x);
        m0.push(prev * mu_k);
        log_m0.push(prev_log + mu_k.ln());
    }
    EmbeddedMoments {
        horizon,
        mu,
        a,
        x: xs,
        m0,
        log_m0,
        status,
    }
}

/// `g_k(s)`: coordinate `k` of the level-`k` truncated limit with boundary `s`.
pub fn eval_g(model: &LhbpModel, k: usize, s: f64, tol: f64) -> Result<f64, NumericError> {
    let r = iterate_to_limit(model, k, s, tol, crate::generating::DEFAULT_MAX_ITER)?;
    if !r.converged {
        return Err(NumericError::Precondition(format!(
            "g_{k}({s}) did not converge (residual {:e})",
            r.residual
        )));
    }
    Ok(r.value(k))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartialKind {
    /// Some `x_k > 1`: partial extinction fails.
    PartialSurvival,
    /// A certified early exit showed `x_k < 1` for every `k`.
    PartialExtinctionCertain,
    /// `0 <= x_k < 1` through the horizon, without a certificate for the rest.
    PartialExtinctionLikely,
    /// Some `x_k = 1`: partial extinction fails for irreducible models.
    Boundary,
}

impl PartialKind {
    /// Whether the verdict sits on the `q~ = 1` side.
    pub fn extinction_side(&self) -> bool {
        matches!(
            self,
            PartialKind::PartialExtinctionCertain | PartialKind::PartialExtinctionLikely
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PartialVerdict {
    pub kind: PartialKind,
    pub horizon: usize,
    /// Index at which the recursion stopped (blowup or boundary).
    pub k_star: Option<usize>,
    /// `x_{k*}` at the stopping index.
    pub x_star: Option<f64>,
    /// Index of the first observed decrease `mu_k < mu_{k-1}`.
    pub decrease_at: Option<usize>,
    /// Largest `x_k` over the computed range.
    pub max_x: f64,
}

/// Partial-extinction verdict from the `x_k` criterion over `k <= horizon`.
pub fn partial_verdict(model: &LhbpModel, horizon: usize) -> PartialVerdict {
    partial_verdict_from(model, &embedded_moments(model, horizon))
}

pub fn partial_verdict_from(model: &LhbpModel, mom: &EmbeddedMoments) -> PartialVerdict {
    let max_x = mom.x.iter().copied().fold(0.0, f64::max);
    let decrease_at = mom.first_decrease();
    let (kind, k_star, x_star) = match mom.status {
        MomentStatus::Blowup { k, x } => (PartialKind::PartialSurvival, Some(k), Some(x)),
        MomentStatus::Boundary { k, x } => (PartialKind::Boundary, Some(k), Some(x)),
        MomentStatus::Ok => {
            let kind = if decrease_at.is_some() && model.mu_decrease_certifies() {
                PartialKind::PartialExtinctionCertain
            } else {
                PartialKind::PartialExtinctionLikely
            };
            (kind, None, None)
        }
    };
    PartialVerdict {
        kind,
        horizon: mom.horizon,
        k_star,
        x_star,
        decrease_at,
        max_x: max_x.max(x_star.unwrap_or(0.0)),
    }
}

/// Runs the recursion only until it is decided: stops at the first blowup or
/// boundary, or at the first certified decrease. Used for threshold searches.
pub fn partial_verdict_early(model: &LhbpModel, horizon: usize) -> PartialVerdict {
    if !model.mu_decrease_certifies() {
        return partial_verdict(model, horizon);
    }
    // doubling horizons keep the work proportional to the decision index
    let mut h = 64.min(horizon);
    loop {
        let mom = embedded_moments(model, h);
        let v = partial_verdict_from(model, &mom);
        if v.kind != PartialKind::PartialExtinctionLikely || h == horizon {
            return PartialVerdict { horizon, ..v };
        }
        h = (h * 2).min(horizon);
    }
}
