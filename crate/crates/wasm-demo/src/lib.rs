//! wasm-bindgen entry points for the static demo page. Every function
//! returns a JSON string.

use lhbp_core::criteria::Budget;
use lhbp_core::embedded::embedded_moments;
use lhbp_core::fixedpoints::{curve_from_anchor, GCache, INVERSION_TOL};
use lhbp_core::generating::{default_schedule, extinction_ladder, DEFAULT_TOL};
use lhbp_core::sweep::sweep;
use lhbp_core::LhbpModel;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn err(msg: impl ToString) -> String {
    json!({ "error": msg.to_string() }).to_string()
}

fn model(family: &str, p: &[f64]) -> Result<LhbpModel, String> {
    let m = match (family, p) {
        ("example2", [g, ..]) => LhbpModel::example2(*g),
        ("tridiagonal", [a, b, c, u, ..]) => LhbpModel::tridiagonal(*a, *b, *c, *u),
        _ => return Err(format!("unknown family {family:?} or missing parameters")),
    };
    m.map_err(|e| e.to_string())
}

fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// `q_0^(k)`, `q~_0^(k)` and the regime for `gamma = 0, 1/n, ..., (n-1)/n`.
#[wasm_bindgen]
pub fn gamma_sweep(points: usize, k: usize) -> String {
    let n = points.clamp(2, 200);
    let grid: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
    let budget = Budget {
        horizon: 2000,
        tail_horizon: 2000,
        k_budget: 100,
        ..Budget::default()
    };
    let rows = sweep(&LhbpModel::example2, &grid, k.clamp(2, 4096), DEFAULT_TOL, budget);
    let rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "gamma": r.parameter,
                "q0": finite(r.q0),
                "qtilde0": finite(r.qtilde0),
                "regime": r.regime,
            })
        })
        .collect();
    Value::Array(rows).to_string()
}

/// Embedded moment table `mu_k`, `a_k`, `x_k`, `m_{0->k}` up to `horizon`.
#[wasm_bindgen]
pub fn moments_table(family: &str, params: &[f64], horizon: usize) -> String {
    let m = match model(family, params) {
        Ok(m) => m,
        Err(e) => return err(e),
    };
    let mom = embedded_moments(&m, horizon.min(100_000));
    json!({
        "mu": mom.mu.iter().map(|&x| finite(x)).collect::<Vec<_>>(),
        "a": mom.a.iter().map(|&x| finite(x)).collect::<Vec<_>>(),
        "x": mom.x.iter().map(|&x| finite(x)).collect::<Vec<_>>(),
        "log_m0": mom.log_m0.iter().map(|&x| finite(x)).collect::<Vec<_>>(),
        "status": mom.status.label(),
    })
    .to_string()
}

/// Fixed-point curve of the example2 family through the anchor
/// `q_0 + t (q~_0 - q_0)` together with the `q` and `q~` windows.
#[wasm_bindgen]
pub fn fixed_point_curve(gamma: f64, t: f64, window: usize) -> String {
    let m = match model("example2", &[gamma]) {
        Ok(m) => m,
        Err(e) => return err(e),
    };
    let window = window.clamp(1, 150);
    let ladder = match extinction_ladder(&m, &default_schedule(1024), window + 2, DEFAULT_TOL) {
        Ok(l) => l,
        Err(e) => return err(e),
    };
    let (q0, qt0) = (ladder.q_estimate[0], ladder.qtilde_estimate[0]);
    let s0 = q0 + t.clamp(0.0, 1.0) * (qt0 - q0);
    match curve_from_anchor(&m, s0, window, INVERSION_TOL, &ladder, None, &GCache::new()) {
        Ok(c) => json!({
            "s": c.values,
            "q": ladder.q_estimate,
            "qtilde": ladder.qtilde_estimate,
            "residual": c.residual,
            "failure_index": c.failure_index,
        })
        .to_string(),
        Err(e) => err(e),
    }
}
