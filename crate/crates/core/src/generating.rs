//! Monotone fixed-point iteration for truncated progeny generating vectors.
//!
//! At level `k` the system has coordinates `0..=k+1`; coordinate `k+1` is
//! held at the boundary value `s` and the rest iterate under `G` from below.
//! The limit's coordinate `i` is `g_{i->k}(s)`: with `s = 0` it is `q^(k)`,
//! with `s = 1` it is `q~^(k)`.

use serde::Serialize;

use crate::error::NumericError;
use crate::model::{LhbpModel, OffspringLaw};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 10_000_000;

#[derive(Clone, Debug, Serialize)]
pub struct TruncationResult {
    pub k: usize,
    pub boundary: f64,
    /// `k + 2` entries; the last one equals `boundary`.
    pub vector: Vec<f64>,
    /// Number of full sweeps performed.
    pub iterations: usize,
    /// Largest coordinate change in the final sweep.
    pub residual: f64,
    /// Success: the final change is below the tolerance and the geometric
    /// extrapolation of the remaining distance to the limit is below half of it.
    pub converged: bool,
}

impl TruncationResult {
    /// `g_{i->k}(s)`.
    pub fn value(&self, i: usize) -> f64 {
        self.vector[i]
    }
}

/// Bracket on the spectral radius of the `(k+1) x (k+1)` head of the mean matrix.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SpectralBracket {
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
}

const POWER_MAX_ITER: usize = 10_000;
const POWER_TOL: f64 = 1e-12;
const CERTIFICATE_SWEEPS: usize = 2_000;
const CERTIFICATE_SCREEN: usize = 64;
/// Required gap below 1 of the certified Collatz-Wielandt ratio.
const CERTIFICATE_MARGIN: f64 = 1e-9;

/// Laws of types `0..=k`, materialized once for repeated solves at one level.
#[derive(Clone, Debug)]
pub struct TruncatedSystem {
    k: usize,
    laws: Vec<OffspringLaw>,
}

impl TruncatedSystem {
    pub fn new(model: &LhbpModel, k: usize) -> Self {
        Self {
            k,
            laws: (0..=k).map(|i| model.law(i)).collect(),
        }
    }

    /// Reuses the laws of `self` up to the new level and materializes the rest.
    pub fn extend(&mut self, model: &LhbpModel, k: usize) {
        self.laws.extend((self.laws.len()..=k).map(|i| model.law(i)));
        self.laws.truncate(k + 1);
        self.k = k;
    }

    pub fn level(&self) -> usize {
        self.k
    }

    pub fn law(&self, i: usize) -> &OffspringLaw {
        &self.laws[i]
    }

    /// `G_i(u)` for `i <= k`.
    pub fn apply(&self, i: usize, u: &[f64]) -> f64 {
        self.laws[i].pgf(u)
    }

    /// Collatz-Wielandt bracket on the Perron root of the mean matrix
    /// restricted to types `0..=k`, from power iteration on `M + I` (the shift
    /// removes periodicity of bipartite heads). With `stop_at = Some(t)` the
    /// iteration ends as soon as the bracket excludes `t`.
    pub fn perron_bracket(&self, stop_at: Option<f64>) -> SpectralBracket {
        let k = self.k;
        let rows: Vec<Vec<(usize, f64)>> = self
            .laws
            .iter()
            .map(|law| law.mean_row().into_iter().filter(|&(j, _)| j <= k).collect())
            .collect();
        let mut v = vec![1.0; k + 1];
        let mut bracket = SpectralBracket {
            lower: 0.0,
            upper: f64::INFINITY,
            iterations: 0,
        };
        for it in 1..=POWER_MAX_ITER {
            let w: Vec<f64> = rows
                .iter()
                .enumerate()
                .map(|(i, row)| v[i] + row.iter().map(|&(j, m)| m * v[j]).sum::<f64>())
                .collect();
            // any positive v gives a valid bracket, including the clamped one
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for (wi, vi) in w.iter().zip(&v) {
                let r = wi / vi;
                lo = lo.min(r);
                hi = hi.max(r);
            }
            bracket = SpectralBracket {
                lower: bracket.lower.max(lo - 1.0),
                upper: bracket.upper.min(hi - 1.0),
                iterations: it,
            };
            let norm = w.iter().copied().fold(0.0, f64::max);
            v = w.iter().map(|x| (x / norm).max(1e-300)).collect();
            if bracket.upper - bracket.lower <= POWER_TOL * bracket.upper.max(1.0) {
                break;
            }
            if let Some(t) = stop_at {
                if bracket.lower > t || bracket.upper < t {
                    break;
                }
            }
        }
        bracket
    }

    /// Certifies that the restricted mean matrix has Perron root below 1.
    ///
    /// Heads of size up to 64 are screened first: a principal submatrix
    /// with Perron root near 1 rules the certificate out. Then the power
    /// iteration bracket is tried, which suits near-critical matrices.
    /// Strongly drifting matrices defeat it (the Perron vector spans more
    /// than the range of `f64`), so the last attempt takes rounds of one
    /// symmetric Gauss-Seidel sweep on `x = w + M x` with `w`
    /// the previous iterate (shifted inverse iteration), holding `ln x` since
    /// the vector varies geometrically across types. Once
    /// `max_i (M x)_i / x_i < 1` for this positive `x`, the Collatz-Wielandt
    /// bound proves the claim.
    pub fn subcritical(&self) -> bool {
        let k = self.k;
        let mut j = 1;
        while j < k.min(CERTIFICATE_SCREEN) {
            let head = TruncatedSystem {
                k: j,
                laws: self.laws[..=j].to_vec(),
            };
            if head.perron_bracket(Some(1.0)).lower >= 1.0 - CERTIFICATE_MARGIN {
                return false;
            }
            j *= 2;
        }
        let bracket = self.perron_bracket(Some(1.0 - CERTIFICATE_MARGIN));
        if bracket.upper < 1.0 - CERTIFICATE_MARGIN {
            return true;
        }
        if bracket.lower >= 1.0 - CERTIFICATE_MARGIN {
            return false;
        }
        let rows: Vec<Vec<(usize, f64)>> = self
            .laws
            .iter()
            .map(|law| law.mean_row().into_iter().filter(|&(j, _)| j <= k).collect())
            .collect();
        let mut lx = vec![0.0; k + 1];
        let mut lw = vec![0.0; k + 1];
        let update = |i: usize, lx: &mut [f64], lw: &[f64]| -> bool {
            let (mut diag, mut top) = (0.0, lw[i]);
            for &(j, m) in &rows[i] {
                if j == i {
                    diag += m;
                } else {
                    top = top.max(lx[j]);
                }
            }
            if diag >= 1.0 {
                return false;
            }
            let mut sum = (lw[i] - top).exp();
            for &(j, m) in &rows[i] {
                if j != i {
                    sum += m * (lx[j] - top).exp();
                }
            }
            lx[i] = top + sum.ln() - (1.0 - diag).ln();
            true
        };
        for _ in 0..CERTIFICATE_SWEEPS {
            for i in (0..=k).rev().chain(0..=k) {
                if !update(i, &mut lx, &lw) {
                    return false;
                }
            }
            // the rescaled iterate stays below the next solution
            let top = lx.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            lx.iter_mut().for_each(|v| *v -= top);
            let ratio = rows
                .iter()
                .enumerate()
                .map(|(i, row)| row.iter().map(|&(j, m)| m * (lx[j] - lx[i]).exp()).sum::<f64>())
                .fold(0.0, f64::max);
            if !ratio.is_finite() {
                return false;
            }
            if ratio < 1.0 - CERTIFICATE_MARGIN {
                return true;
            }
            lw.copy_from_slice(&lx);
        }
        false
    }

    /// `q~^(k)`: the solve with boundary 1, replaced by the all-ones vector
    /// when [`Self::subcritical`] holds. The killed process then dies out
    /// surely. Strongly drifting models need this: their interior stays
    /// within rounding of `q` for hundreds of types, so the iteration settles
    /// on a spurious fixed point.
    pub fn solve_qtilde(
        &self,
        start: Option<&[f64]>,
        tol: f64,
        max_iter: usize,
    ) -> Result<TruncationResult, NumericError> {
        let r = self.solve_from(1.0, start, tol, max_iter)?;
        if r.vector.iter().all(|&x| x == 1.0) || !self.subcritical() {
            return Ok(r);
        }
        Ok(TruncationResult {
            vector: vec![1.0; self.k + 2],
            residual: 0.0,
            converged: true,
            ..r
        })
    }

    /// `max_i |G_i(u) - u_i|` over `i <= k`.
    pub fn fixed_point_residual(&self, u: &[f64]) -> f64 {
        (0..=self.k)
            .map(|i| (self.apply(i, u) - u[i]).abs())
            .fold(0.0, f64::max)
    }

    /// Iterates from the all-zero start with boundary `s`.
    pub fn solve(&self, s: f64, tol: f64, max_iter: usize) -> Result<TruncationResult, NumericError> {
        self.solve_from(s, None, tol, max_iter)
    }

    /// Iterates from `start` (padded with zeros and with the boundary set to
    /// `s`). The start must lie below the minimal fixed point with boundary
    /// `s`, e.g. a solution for a smaller boundary or a lower level.
    pub fn solve_from(
        &self,
        s: f64,
        start: Option<&[f64]>,
        tol: f64,
        max_iter: usize,
    ) -> Result<TruncationResult, NumericError> {
        if !(0.0..=1.0).contains(&s) {
            return Err(NumericError::Boundary(s));
        }
        let k = self.k;
        let mut u = vec![0.0; k + 2];
        if let Some(start) = start {
            let n = start.len().min(k + 1);
            u[..n].copy_from_slice(&start[..n]);
        }
        u[k + 1] = s;
        let floor = 10.0 * f64::EPSILON;
        let mut iterations = 0;
        let mut residual = f64::INFINITY;
        let mut error_bound = f64::INFINITY;
        while iterations < max_iter {
            iterations += 1;
            let prev = residual;
            residual = 0.0;
            // descending Gauss-Seidel: the boundary propagates down in one sweep
            for i in (0..=k).rev() {
                let next = self.apply(i, &u).clamp(0.0, 1.0);
                if next > u[i] {
                    residual = f64::max(residual, next - u[i]);
                    u[i] = next;
                }
            }
            // geometric tail bound on the distance still to travel
            let ratio = residual / prev;
            error_bound = if residual == 0.0 {
                0.0
            } else if ratio < 1.0 {
                residual * ratio / (1.0 - ratio)
            } else {
                f64::INFINITY
            };
            if residual <= floor || (residual <= tol && error_bound <= 0.5 * tol) {
                break;
            }
        }
        Ok(TruncationResult {
            k,
            boundary: s,
            vector: u,
            iterations,
            residual,
            converged: residual <= floor || (residual <= tol && error_bound <= 0.5 * tol),
        })
    }
}

/// Limit of `G^(k)` iterated from `(0, ..., 0, s)`.
pub fn iterate_to_limit(
    model: &LhbpModel,
    k: usize,
    s: f64,
    tol: f64,
    max_iter: usize,
) -> Result<TruncationResult, NumericError> {
    TruncatedSystem::new(model, k).solve(s, tol, max_iter)
}

/// Convergence class of a sequence of ladder levels on the reporting window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LadderStatus {
    /// Successive levels differ by less than the tolerance.
    Converged,
    /// Differences shrink at least geometrically across the schedule.
    Converging,
    /// Differences shrink slower than geometrically.
    StalledSlow,
    /// Fewer than two levels.
    Insufficient,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtinctionLadder {
    pub levels: Vec<usize>,
    /// `q^(k)` restricted to the window, one vector per level.
    pub q_vectors: Vec<Vec<f64>>,
    pub qtilde_vectors: Vec<Vec<f64>>,
    pub q_estimate: Vec<f64>,
    pub qtilde_estimate: Vec<f64>,
    pub q_status: LadderStatus,
    pub qtilde_status: LadderStatus,
    /// Whether every underlying solve met its tolerance.
    pub solves_converged: bool,
    pub max_iterations: usize,
}

/// Differences between successive levels at which shrinking counts as slow.
const SLOW_RATIO: f64 = 0.5;

fn classify_ladder(vectors: &[Vec<f64>], tol: f64) -> LadderStatus {
    if vectors.len() < 2 {
        return LadderStatus::Insufficient;
    }
    let diffs: Vec<f64> = vectors
        .windows(2)
        .map(|w| {
            w[0].iter()
                .zip(&w[1])
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let last = diffs[diffs.len() - 1];
    if last < tol {
        return LadderStatus::Converged;
    }
    if diffs.len() >= 2 && last > SLOW_RATIO * diffs[diffs.len() - 2] {
        LadderStatus::StalledSlow
    } else {
        LadderStatus::Converging
    }
}

/// Powers of two from 2 up to `cap`, plus `cap` itself if it is not one.
pub fn default_schedule(cap: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut k = 2;
    while k <= cap {
        out.push(k);
        k *= 2;
    }
    if out.last() != Some(&cap) && cap >= 1 {
        out.push(cap);
    }
    out
}

/// Solves `q^(k)` and `q~^(k)` at every level of `schedule` and records the
/// first `window` coordinates.
pub fn extinction_ladder(
    model: &LhbpModel,
    schedule: &[usize],
    window: usize,
    tol: f64,
) -> Result<ExtinctionLadder, NumericError> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(NumericError::Precondition(
            "schedule must be non-empty and strictly increasing".into(),
        ));
    }
    let mut system = TruncatedSystem::new(model, schedule[0]);
    let mut q_vectors = Vec::with_capacity(schedule.len());
    let mut qt_vectors = Vec::with_capacity(schedule.len());
    let mut prev_q: Option<Vec<f64>> = None;
    let mut solves_converged = true;
    let mut max_iterations = 0;
    for &k in schedule {
        system.extend(model, k);
        // q^(k-) <= q^(k) and q^(k) <= q~^(k) make both warm starts admissible
        let q = system.solve_from(0.0, prev_q.as_deref(), tol, DEFAULT_MAX_ITER)?;
        let qt = system.solve_qtilde(Some(&q.vector), tol, DEFAULT_MAX_ITER)?;
        solves_converged &= q.converged && qt.converged;
        max_iterations = max_iterations.max(q.iterations).max(qt.iterations);
        let w = window.min(k + 1);
        q_vectors.push(q.vector[..w].to_vec());
        qt_vectors.push(qt.vector[..w].to_vec());
        let mut carry = q.vector;
        carry.pop();
        prev_q = Some(carry);
    }
    // windows may be shorter at small levels; compare on the common prefix
    let common = q_vectors.iter().map(Vec::len).min().unwrap_or(0);
    let trim = |v: &Vec<Vec<f64>>| -> Vec<Vec<f64>> { v.iter().map(|x| x[..common].to_vec()).collect() };
    let q_status = classify_ladder(&trim(&q_vectors), tol);
    let qtilde_status = classify_ladder(&trim(&qt_vectors), tol);
    Ok(ExtinctionLadder {
        levels: schedule.to_vec(),
        q_estimate: q_vectors.last().cloned().unwrap_or_default(),
        qtilde_estimate: qt_vectors.last().cloned().unwrap_or_default(),
        q_vectors,
        qtilde_vectors: qt_vectors,
        q_status,
        qtilde_status,
        solves_converged,
        max_iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Family, TableEntry};

    #[test]
    fn gamma_zero_level_one() {
        let m = LhbpModel::example2(0.0).unwrap();
        let r = iterate_to_limit(&m, 1, 1.0, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(r.vector, vec![1.0, 1.0, 1.0]);
        let r = iterate_to_limit(&m, 1, 0.0, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert!((r.value(1) - 0.5).abs() < 1e-15);
        assert!((r.value(0) - 49.0 / 64.0).abs() < 1e-15);
        assert!(r.converged);
    }

    #[test]
    fn drifting_truncation_is_certified_subcritical() {
        // Perron root b + 2 sqrt(ac) cos(pi/(k+2)) < 0.57 at every level
        let m = LhbpModel::tridiagonal(0.05, 0.12, 0.99, 1.0).unwrap();
        for k in [16, 1024] {
            let sys = TruncatedSystem::new(&m, k);
            assert!(sys.subcritical());
            let r = sys.solve_qtilde(None, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
            assert!(r.converged && r.vector.iter().all(|&x| x == 1.0));
        }
        // a head of a few types already has Perron root above 1
        let sys = TruncatedSystem::new(&LhbpModel::example2(0.3).unwrap(), 64);
        assert!(!sys.subcritical());
    }

    #[test]
    fn residual_and_boundary_checks() {
        let m = LhbpModel::example2(0.3).unwrap();
        let sys = TruncatedSystem::new(&m, 60);
        for s in [0.0, 0.4, 1.0] {
            let r = sys.solve(s, 1e-12, DEFAULT_MAX_ITER).unwrap();
            assert!(r.converged);
            assert_eq!(r.vector[61], s);
            assert!(sys.fixed_point_residual(&r.vector) <= 1e-11);
        }
        assert!(matches!(sys.solve(1.5, 1e-12, 10), Err(NumericError::Boundary(_))));
    }

    #[test]
    fn sterile_model_dies_out() {
        let m = LhbpModel::from_family_unchecked(
            Family::Explicit {
                head: vec![OffspringLaw::Table(vec![TableEntry::new(vec![], 1.0)])],
                tail_from: 0,
            },
            None,
        );
        let ladder = extinction_ladder(&m, &[4, 8, 16], 5, DEFAULT_TOL).unwrap();
        for v in &ladder.q_vectors {
            assert!(v.iter().all(|&x| x == 1.0));
        }
        assert_eq!(ladder.q_status, LadderStatus::Converged);
    }

    #[test]
    fn gamma_zero_ladder_shape() {
        let m = LhbpModel::example2(0.0).unwrap();
        let ladder = extinction_ladder(&m, &[1000, 2000, 4000, 8000], 3, DEFAULT_TOL).unwrap();
        let q0: Vec<f64> = ladder.q_vectors.iter().map(|v| v[0]).collect();
        assert!(q0.windows(2).all(|w| w[0] < w[1]));
        assert!(ladder.qtilde_vectors.iter().all(|v| v[0] == 1.0));
        assert_eq!(ladder.q_status, LadderStatus::StalledSlow);
    }

    #[test]
    fn schedule_must_increase() {
        let m = LhbpModel::example2(0.0).unwrap();
        assert!(extinction_ladder(&m, &[4, 4], 2, DEFAULT_TOL).is_err());
        assert_eq!(default_schedule(20), vec![2, 4, 8, 16, 20]);
    }
}
