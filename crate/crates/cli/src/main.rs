//! `lhbp`: extinction probabilities, moments, classification, fixed points,
//! simulation and sweeps for lower Hessenberg branching processes.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lhbp_core::criteria::{agresti_bounds, classify, Budget};
use lhbp_core::embedded::embedded_moments;
use lhbp_core::fixedpoints::{curve_from_anchor, decay_diagnostics, GCache, INVERSION_TOL};
use lhbp_core::generating::{default_schedule, extinction_ladder, TruncatedSystem, DEFAULT_MAX_ITER, DEFAULT_TOL};
use lhbp_core::model::{validate, ModelDocument};
use lhbp_core::montecarlo::{estimate_extinction, Variant};
use lhbp_core::sweep::{gamma_star, parse_grid, sweep};
use lhbp_core::{LhbpModel, ModelError, NumericError};
use serde_json::json;

use output::{fmt_f, Sink};

#[derive(Parser)]
#[command(name = "lhbp", version, about = "Lower Hessenberg branching process toolkit")]
struct Cli {
    /// Size of the worker pool (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the model invariants up to a horizon. Prints a JSON report.
    Validate {
        #[arg(long)]
        model: String,
        #[arg(long = "K", default_value_t = 1000)]
        horizon: usize,
    },
    /// q^(k) and q~^(k) on a window of types.
    /// CSV columns: index, q, qtilde.
    Extinction {
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 1024)]
        k: usize,
        #[arg(long, default_value_t = 10)]
        window: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Embedded-process moment table.
    /// CSV columns: k, mu, a, x, m0, status, log_m0.
    Moments {
        #[arg(long)]
        model: String,
        #[arg(long = "K", default_value_t = 100)]
        horizon: usize,
    },
    /// Extinction regime with certificates (JSON).
    Classify {
        #[arg(long)]
        model: String,
        #[arg(long = "K", default_value_t = 5000)]
        horizon: usize,
    },
    /// Two-sided bounds on q_i^(k).
    /// CSV columns: i, k, lower, oracle, upper.
    Bounds {
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 1)]
        i: usize,
        #[arg(long)]
        k: usize,
    },
    /// Fixed-point curve through an anchor at type 0.
    /// CSV columns: index, s, one_minus_s_times_m0, q_window, qtilde_window.
    Fixedpoints {
        #[arg(long)]
        model: String,
        /// Ladder level used for the q and q~ windows.
        #[arg(long, default_value_t = 4096)]
        k: usize,
        /// Curve length J.
        #[arg(long, default_value_t = 100)]
        window: usize,
        /// Anchor s_0 (default: midpoint of q_0 and q~_0).
        #[arg(long)]
        anchor: Option<f64>,
        #[arg(long, default_value_t = INVERSION_TOL)]
        tol: f64,
    },
    /// Monte Carlo extinction frequency of a truncation (JSON).
    Simulate {
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        i0: usize,
        #[arg(long, value_enum, default_value_t = VariantArg::Immortal)]
        variant: VariantArg,
        #[arg(long, default_value_t = 100_000)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// q_0^(k), q~_0^(k) and regime over a parameter grid.
    /// CSV columns: parameter, q0, qtilde0, regime, q_converged, qtilde_converged.
    Sweep {
        #[arg(long, value_enum, default_value_t = FamilyArg::Example2)]
        family: FamilyArg,
        #[arg(long, default_value = "0:0.01:1")]
        grid: String,
        #[arg(long, default_value_t = 2000)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Fixed a, b, c for the tridiagonal family (the grid varies u).
        #[arg(long, default_value_t = 0.1)]
        a: f64,
        #[arg(long, default_value_t = 0.2)]
        b: f64,
        #[arg(long, default_value_t = 0.8)]
        c: f64,
    },
    /// Partial-extinction threshold of the example2 family (JSON).
    Gammastar {
        #[arg(long = "K", default_value_t = 5000)]
        horizon: usize,
        #[arg(long, default_value_t = 5e-4)]
        tol: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Sterile,
    Immortal,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Example2,
    Tridiagonal,
}

enum Failure {
    Validation(String),
    NonConvergence(String),
    Usage(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::NonConvergence(_) => 3,
            Failure::Usage(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::NonConvergence(m) | Failure::Usage(m) => m,
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<NumericError> for Failure {
    fn from(e: NumericError) -> Self {
        match e {
            NumericError::PartialSurvivalRegime(_) => Failure::NonConvergence(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// A JSON file, or `example2:GAMMA` / `tridiagonal:A,B,C[,U]`.
fn load(arg: &str) -> Result<LhbpModel, Failure> {
    if Path::new(arg).exists() {
        let text = std::fs::read_to_string(arg)?;
        return Ok(lhbp_core::load_model(&text)?);
    }
    let bad = || Failure::Usage(format!("{arg:?} is neither a file nor a family shorthand"));
    let (family, args) = arg.split_once(':').ok_or_else(bad)?;
    let nums: Vec<f64> = args
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    let doc = match (family, nums.as_slice()) {
        ("example2", [g]) => ModelDocument::Example2 {
            gamma: *g,
            bandwidth: None,
        },
        ("tridiagonal", [a, b, c]) | ("tridiagonal", [a, b, c, _]) => ModelDocument::Tridiagonal {
            a: *a,
            b: *b,
            c: *c,
            u: nums.get(3).copied().unwrap_or(1.0),
            bandwidth: None,
        },
        _ => return Err(bad()),
    };
    Ok(doc.build()?)
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let mut sink = Sink::open(cli.out.as_deref())?;
    match cli.command {
        Command::Validate { model, horizon } => {
            let m = load(&model)?;
            let report = validate(&m, horizon);
            sink.json(&report)?;
            if !report.passed() {
                return Err(Failure::Validation(report.failures().join("; ")));
            }
        }
        Command::Extinction { model, k, window, tol } => {
            let m = load(&model)?;
            let ladder = extinction_ladder(&m, &default_schedule(k), window, tol)?;
            let rows = (0..ladder.q_estimate.len()).map(|i| {
                vec![
                    i.to_string(),
                    fmt_f(ladder.q_estimate[i]),
                    fmt_f(ladder.qtilde_estimate[i]),
                ]
            });
            sink.csv(&["index", "q", "qtilde"], rows)?;
            eprintln!(
                "ladder: q {:?}, qtilde {:?}, max iterations {}",
                ladder.q_status, ladder.qtilde_status, ladder.max_iterations
            );
            if !ladder.solves_converged {
                return Err(Failure::NonConvergence("a truncated solve missed its tolerance".into()));
            }
        }
        Command::Moments { model, horizon } => {
            let m = load(&model)?;
            let mom = embedded_moments(&m, horizon);
            let mut rows: Vec<Vec<String>> = (0..mom.len())
                .map(|k| {
                    vec![
                        k.to_string(),
                        fmt_f(mom.mu[k]),
                        fmt_f(mom.a[k]),
                        fmt_f(mom.x[k]),
                        fmt_f(mom.m0[k]),
                        "ok".to_string(),
                        fmt_f(mom.log_m0[k]),
                    ]
                })
                .collect();
            // a stopped recursion gets one trailing row naming the reason
            if mom.len() <= horizon {
                let mut last = vec![String::new(); 7];
                last[0] = mom.len().to_string();
                last[5] = mom.status.label();
                rows.push(last);
            }
            sink.csv(&["k", "mu", "a", "x", "m0", "status", "log_m0"], rows)?;
        }
        Command::Classify { model, horizon } => {
            let m = load(&model)?;
            let budget = Budget {
                horizon,
                tail_horizon: horizon,
                ..Budget::default()
            };
            sink.json(&classify(&m, budget))?;
        }
        Command::Bounds { model, i, k } => {
            let m = load(&model)?;
            let b = agresti_bounds(&m, i, k)?;
            let oracle = TruncatedSystem::new(&m, k).solve(0.0, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
            sink.csv(
                &["i", "k", "lower", "oracle", "upper"],
                [vec![i.to_string(), k.to_string(), fmt_f(b.lower), fmt_f(oracle.value(i)), fmt_f(b.upper)]],
            )?;
            if b.lower_degenerate || b.upper_degenerate {
                eprintln!("degenerate bound: lower {}, upper {}", b.lower_degenerate, b.upper_degenerate);
            }
            if !oracle.converged {
                return Err(Failure::NonConvergence("the oracle solve missed its tolerance".into()));
            }
        }
        Command::Fixedpoints {
            model,
            k,
            window,
            anchor,
            tol,
        } => {
            let m = load(&model)?;
            if window + 2 > k + 1 {
                return Err(Failure::Usage("the ladder level must exceed the window by 2".into()));
            }
            let ladder = extinction_ladder(&m, &default_schedule(k), window + 2, DEFAULT_TOL)?;
            let s0 = anchor.unwrap_or(0.5 * (ladder.q_estimate[0] + ladder.qtilde_estimate[0]));
            let mom = embedded_moments(&m, window + 1);
            let curve = curve_from_anchor(&m, s0, window, tol, &ladder, Some(&mom), &GCache::new())?;
            let decay = decay_diagnostics(&m, &curve, &mom, &ladder, tol)?;
            let rows = (0..curve.values.len()).map(|j| {
                vec![
                    j.to_string(),
                    fmt_f(curve.values[j]),
                    decay.scaled.get(j).map_or_else(String::new, |v| fmt_f(*v)),
                    fmt_f(ladder.q_estimate[j]),
                    fmt_f(ladder.qtilde_estimate[j]),
                ]
            });
            sink.csv(
                &["index", "s", "one_minus_s_times_m0", "q_window", "qtilde_window"],
                rows,
            )?;
            eprintln!(
                "residual {:e}; decay {:?}{}",
                curve.residual,
                decay.scaled_trend,
                if decay.conditioned { " (conditioned means)" } else { "" }
            );
            if let Some(j) = curve.failure_index {
                return Err(Failure::NonConvergence(format!(
                    "curve left the admissible range at index {j}"
                )));
            }
        }
        Command::Simulate {
            model,
            k,
            i0,
            variant,
            reps,
            seed,
        } => {
            let m = load(&model)?;
            let variant = match variant {
                VariantArg::Sterile => Variant::Sterile,
                VariantArg::Immortal => Variant::Immortal,
            };
            let e = estimate_extinction(&m, k, i0, variant, reps, seed)?;
            sink.json(&json!({
                "estimate": e.estimate,
                "half_width": e.half_width,
                "n": e.n,
                "censored": e.censored,
                "unreliable": e.unreliable,
                "seed": e.seed,
            }))?;
        }
        Command::Sweep {
            family,
            grid,
            k,
            tol,
            a,
            b,
            c,
        } => {
            let grid = parse_grid(&grid).map_err(Failure::Usage)?;
            let tri = move |u: f64| LhbpModel::tridiagonal(a, b, c, u);
            let build: &(dyn Fn(f64) -> Result<LhbpModel, ModelError> + Sync) = match family {
                FamilyArg::Example2 => &LhbpModel::example2,
                FamilyArg::Tridiagonal => &tri,
            };
            let rows = sweep(build, &grid, k, tol, Budget::default());
            sink.csv(&output::SWEEP_HEADER, rows.iter().map(output::sweep_record))?;
        }
        Command::Gammastar { horizon, tol } => {
            let g = gamma_star(horizon, tol)?;
            sink.json(&g)?;
        }
    }
    sink.finish()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(4) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
