use serde::Serialize;

use super::law::NORMALIZATION_TOL;
use super::LhbpModel;

/// Whether `sum_i (1 - p1(i))` plausibly diverges, judged on a finite horizon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DivergenceFlag {
    Plausible,
    Fails,
}

/// Threshold below which `1 - p1(i)` counts as vanishing.
const DIVERGENCE_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub horizon: usize,
    /// `|total mass - 1|` per type.
    pub normalization_residuals: Vec<f64>,
    pub negative_probability_types: Vec<usize>,
    /// Types with offspring beyond `i + 1`.
    pub hessenberg_violations: Vec<usize>,
    /// Types with `M_{i,i+1} = 0`.
    pub missing_forward_edges: Vec<usize>,
    /// Every type in the first half of the horizon reaches a lower type
    /// through some descendant within the horizon.
    pub back_edge_reachable: bool,
    pub min_one_minus_p1: f64,
    pub divergence: DivergenceFlag,
}

impl ValidationReport {
    pub fn normalization_ok(&self) -> bool {
        self.normalization_residuals
            .iter()
            .all(|r| *r <= NORMALIZATION_TOL)
    }

    pub fn passed(&self) -> bool {
        self.normalization_ok()
            && self.negative_probability_types.is_empty()
            && self.hessenberg_violations.is_empty()
            && self.missing_forward_edges.is_empty()
    }

    /// Human-readable list of failed checks.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some((i, r)) = self
            .normalization_residuals
            .iter()
            .enumerate()
            .find(|(_, r)| **r > NORMALIZATION_TOL)
        {
            out.push(format!("type {i}: normalization residual {r:e}"));
        }
        if let Some(i) = self.negative_probability_types.first() {
            out.push(format!("type {i}: negative probability"));
        }
        if let Some(i) = self.hessenberg_violations.first() {
            out.push(format!("type {i}: offspring beyond type {}", i + 1));
        }
        if let Some(i) = self.missing_forward_edges.first() {
            out.push(format!("type {i}: M_{{{i},{}}} = 0", i + 1));
        }
        out
    }
}

/// Checks the laws of types `0..=horizon` and reports every failure.
pub fn validate(model: &LhbpModel, horizon: usize) -> ValidationReport {
    let mut residuals = Vec::with_capacity(horizon + 1);
    let mut negative = Vec::new();
    let mut hessenberg = Vec::new();
    let mut missing = Vec::new();
    let mut lowest_child = Vec::with_capacity(horizon + 1);
    let mut min_gap = f64::INFINITY;
    for i in 0..=horizon {
        let law = model.law(i);
        let worst_mass = match &law {
            super::OffspringLaw::Table(entries) => {
                (entries.iter().map(|e| e.prob).sum::<f64>() - 1.0).abs()
            }
            super::OffspringLaw::Product(coords) => coords
                .iter()
                .map(|c| (c.pmf.iter().sum::<f64>() - 1.0).abs())
                .fold(0.0, f64::max),
        };
        residuals.push(worst_mass);
        if matches!(law.check(i), Err(crate::error::ModelError::NegativeProbability { .. })) {
            negative.push(i);
        }
        if law.max_type().is_some_and(|t| t > i + 1) {
            hessenberg.push(i);
        }
        if !(law.mean_of(i + 1) > 0.0) {
            missing.push(i);
        }
        lowest_child.push(law.min_type().unwrap_or(usize::MAX));
        min_gap = min_gap.min(1.0 - law.prob_one_child());
    }
    // suffix minimum of the lowest reachable child type
    let mut reach = vec![usize::MAX; horizon + 2];
    for i in (0..=horizon).rev() {
        reach[i] = reach[i + 1].min(lowest_child[i]);
    }
    let back_edge_reachable = (1..=horizon / 2).all(|i| reach[i] < i);
    ValidationReport {
        horizon,
        normalization_residuals: residuals,
        negative_probability_types: negative,
        hessenberg_violations: hessenberg,
        missing_forward_edges: missing,
        back_edge_reachable,
        min_one_minus_p1: min_gap,
        divergence: if min_gap > DIVERGENCE_FLOOR {
            DivergenceFlag::Plausible
        } else {
            DivergenceFlag::Fails
        },
    }
}
