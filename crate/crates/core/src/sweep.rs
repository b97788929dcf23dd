//! Parameter sweeps and the partial-extinction threshold of the quartic family.

use serde::{Deserialize, Serialize};

use crate::criteria::{classify, Budget};
use crate::embedded::partial_verdict_early;
use crate::error::{ModelError, NumericError};
use crate::generating::{TruncatedSystem, DEFAULT_MAX_ITER};
use crate::model::{Family, LhbpModel};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: f64,
    pub q0: f64,
    pub qtilde0: f64,
    pub regime: String,
    pub q_converged: bool,
    pub qtilde_converged: bool,
}

/// Parses `START:STEP:END` into an inclusive grid.
pub fn parse_grid(grid: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = grid.split(':').collect();
    let [a, s, b] = parts.as_slice() else {
        return Err(format!("grid {grid:?} is not START:STEP:END"));
    };
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    let (start, step, end) = (num(a)?, num(s)?, num(b)?);
    if !(step > 0.0) || end < start {
        return Err(format!("grid {grid:?} needs STEP > 0 and END >= START"));
    }
    let n = ((end - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

/// `q_0^(k)` and `q~_0^(k)` with their convergence flags.
pub fn level_pair(model: &LhbpModel, k: usize, tol: f64) -> Result<(f64, bool, f64, bool), NumericError> {
    let sys = TruncatedSystem::new(model, k);
    let q = sys.solve(0.0, tol, DEFAULT_MAX_ITER)?;
    let qt = sys.solve_qtilde(Some(&q.vector), tol, DEFAULT_MAX_ITER)?;
    Ok((q.value(0), q.converged, qt.value(0), qt.converged))
}

fn row(build: &(dyn Fn(f64) -> Result<LhbpModel, ModelError> + Sync), p: f64, k: usize, tol: f64, budget: Budget) -> SweepRow {
    let failed = |why: String| SweepRow {
        parameter: p,
        q0: f64::NAN,
        qtilde0: f64::NAN,
        regime: why,
        q_converged: false,
        qtilde_converged: false,
    };
    let model = match build(p) {
        Ok(m) => m,
        Err(e) => return failed(format!("invalid: {e}")),
    };
    match level_pair(&model, k, tol) {
        Ok((q0, qc, qt0, qtc)) => SweepRow {
            parameter: p,
            q0,
            qtilde0: qt0,
            regime: format!("{:?}", classify(&model, budget).regime),
            q_converged: qc,
            qtilde_converged: qtc,
        },
        Err(e) => failed(format!("error: {e}")),
    }
}

/// One row per grid point, in grid order; a failing point yields a flagged row.
pub fn sweep(
    build: &(dyn Fn(f64) -> Result<LhbpModel, ModelError> + Sync),
    grid: &[f64],
    k: usize,
    tol: f64,
    budget: Budget,
) -> Vec<SweepRow> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        grid.par_iter().map(|&p| row(build, p, k, tol, budget)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    grid.iter().map(|&p| row(build, p, k, tol, budget)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaStar {
    /// Largest probed `gamma` on the partial-extinction side.
    pub lo: f64,
    /// Smallest probed `gamma` on the partial-survival side.
    pub hi: f64,
    pub estimate: f64,
    pub probes: usize,
    pub horizon: usize,
}

/// Bisection for the threshold of the quartic family between partial
/// extinction and partial survival.
pub fn gamma_star(horizon: usize, tol: f64) -> Result<GammaStar, NumericError> {
    let side = |g: f64| -> Result<bool, NumericError> {
        if !(0.0..=1.0).contains(&g) {
            return Err(NumericError::Precondition(format!("gamma {g} outside [0, 1]")));
        }
        // gamma = 1 has no forward edge; the recursion still applies there
        let m = LhbpModel::from_family_unchecked(Family::Example2 { gamma: g }, None);
        Ok(partial_verdict_early(&m, horizon).kind.extinction_side())
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    if !side(lo)? || side(hi)? {
        return Err(NumericError::Precondition(
            "threshold not bracketed by [0, 1]".into(),
        ));
    }
    let mut probes = 2;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        probes += 1;
        if side(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(GammaStar {
        lo,
        hi,
        estimate: 0.5 * (lo + hi),
        probes,
        horizon,
    })
}
