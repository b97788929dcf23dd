//! Monte Carlo simulation of truncated processes.
//!
//! Populations are count vectors over types `0..=k+1`; the offspring of all
//! parents of one type are drawn together with binomial splits. Replication
//! `r` uses a ChaCha8 stream selected by `r` under the configured seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::embedded::embedded_moments;
use crate::error::NumericError;
use crate::model::{CoordLaw, LhbpModel, OffspringLaw};

pub const DEFAULT_MAX_GENERATIONS: usize = 10_000;
pub const DEFAULT_POPULATION_CAP: u64 = 10_000_000;
/// Fraction of censored replications above which an estimate is flagged.
pub const CENSOR_LIMIT: f64 = 0.05;
const Z95: f64 = 1.96;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Types above `k` have no offspring.
    Sterile,
    /// Type `k+1` replaces itself forever.
    Immortal,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimConfig {
    pub k: usize,
    pub variant: Variant,
    pub initial_type: usize,
    pub max_generations: usize,
    pub population_cap: u64,
    pub replications: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(k: usize, variant: Variant, initial_type: usize, replications: usize, seed: u64) -> Self {
        Self {
            k,
            variant,
            initial_type,
            max_generations: DEFAULT_MAX_GENERATIONS,
            population_cap: DEFAULT_POPULATION_CAP,
            replications,
            seed,
        }
    }

    fn check(&self) -> Result<(), NumericError> {
        if self.max_generations == 0 || self.population_cap == 0 || self.replications == 0 {
            return Err(NumericError::Precondition(
                "caps and replications must be positive".into(),
            ));
        }
        if self.initial_type > self.k + 1 {
            return Err(NumericError::Precondition(format!(
                "initial type {} is above k + 1 = {}",
                self.initial_type,
                self.k + 1
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    /// Population reached zero at this generation.
    Extinct(usize),
    /// Alive at the generation cap, or certain to survive: an immortal
    /// individual is present and never dies.
    Survived,
    PopulationCapHit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Replication {
    pub outcome: Outcome,
    /// Type-`(k+1)` individuals born over the run.
    pub births_above: u64,
}

fn rng_for(seed: u64, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep as u64);
    rng
}

fn binomial<R: Rng>(rng: &mut R, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).map_or(0, |b| b.sample(rng))
}

/// Splits `n` trials over `probs` (the remainder beyond the listed mass is dropped).
fn multinomial<R: Rng>(rng: &mut R, n: u64, probs: &[f64]) -> Vec<u64> {
    let mut out = vec![0; probs.len()];
    let mut left = n;
    let mut mass: f64 = probs.iter().sum();
    for (slot, &p) in out.iter_mut().zip(probs) {
        if left == 0 || mass <= 0.0 {
            break;
        }
        let draw = binomial(rng, left, p / mass);
        *slot = draw;
        left -= draw;
        mass -= p;
    }
    out
}

fn add_coord<R: Rng>(rng: &mut R, c: &CoordLaw, n: u64, next: &mut [u64]) {
    if c.ty >= next.len() {
        return;
    }
    let batch = c.batch.max(1.0);
    let active = binomial(rng, n, 1.0 / batch);
    let split = multinomial(rng, active, &c.pmf);
    let total: u64 = split
        .iter()
        .enumerate()
        .map(|(v, &m)| (v as u64).saturating_mul(m))
        .fold(0u64, |a, b| a.saturating_add(b));
    next[c.ty] = next[c.ty].saturating_add(total.saturating_mul(batch as u64));
}

fn add_offspring<R: Rng>(rng: &mut R, law: &OffspringLaw, n: u64, next: &mut [u64]) {
    match law {
        OffspringLaw::Table(entries) => {
            let probs: Vec<f64> = entries.iter().map(|e| e.prob).collect();
            let split = multinomial(rng, n, &probs);
            for (e, m) in entries.iter().zip(split) {
                if m == 0 {
                    continue;
                }
                for &(t, c) in &e.counts {
                    if t < next.len() {
                        next[t] = next[t].saturating_add(c.saturating_mul(m));
                    }
                }
            }
        }
        OffspringLaw::Product(coords) => {
            for c in coords {
                add_coord(rng, c, n, next);
            }
        }
    }
}

/// Precomputed laws of the live types `0..=k`.
struct Truncated {
    k: usize,
    laws: Vec<OffspringLaw>,
    variant: Variant,
}

impl Truncated {
    fn new(model: &LhbpModel, k: usize, variant: Variant) -> Self {
        Self {
            k,
            laws: (0..=k).map(|i| model.law(i)).collect(),
            variant,
        }
    }

    /// One generation; returns the number of type-`(k+1)` births.
    fn step<R: Rng>(&self, rng: &mut R, pop: &[u64], next: &mut [u64]) -> u64 {
        next.iter_mut().for_each(|x| *x = 0);
        for (i, law) in self.laws.iter().enumerate() {
            if pop[i] > 0 {
                add_offspring(rng, law, pop[i], next);
            }
        }
        let born = next[self.k + 1];
        if self.variant == Variant::Immortal {
            next[self.k + 1] = next[self.k + 1].saturating_add(pop[self.k + 1]);
        }
        born
    }
}

fn run_one(sys: &Truncated, cfg: &SimConfig, rep: usize) -> Replication {
    let mut rng = rng_for(cfg.seed, rep);
    let mut pop = vec![0u64; sys.k + 2];
    pop[cfg.initial_type] = 1;
    let mut next = vec![0u64; sys.k + 2];
    let mut births_above = u64::from(cfg.initial_type == sys.k + 1);
    for gen in 1..=cfg.max_generations {
        if sys.variant == Variant::Immortal && pop[sys.k + 1] > 0 {
            return Replication {
                outcome: Outcome::Survived,
                births_above,
            };
        }
        births_above = births_above.saturating_add(sys.step(&mut rng, &pop, &mut next));
        std::mem::swap(&mut pop, &mut next);
        let total = pop.iter().fold(0u64, |a, &b| a.saturating_add(b));
        if total == 0 {
            return Replication {
                outcome: Outcome::Extinct(gen),
                births_above,
            };
        }
        if total > cfg.population_cap {
            return Replication {
                outcome: Outcome::PopulationCapHit,
                births_above,
            };
        }
    }
    Replication {
        outcome: Outcome::Survived,
        births_above,
    }
}

/// Runs every replication of `cfg`; results are in replication order.
pub fn simulate_truncated(model: &LhbpModel, cfg: &SimConfig) -> Result<Vec<Replication>, NumericError> {
    cfg.check()?;
    let sys = Truncated::new(model, cfg.k, cfg.variant);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        Ok((0..cfg.replications)
            .into_par_iter()
            .map(|r| run_one(&sys, cfg, r))
            .collect())
    }
    #[cfg(not(feature = "parallel"))]
    Ok((0..cfg.replications).map(|r| run_one(&sys, cfg, r)).collect())
}

/// Population vectors of replication `rep` for generations `0..=generations`,
/// ignoring caps.
pub fn simulate_trace(model: &LhbpModel, cfg: &SimConfig, rep: usize, generations: usize) -> Vec<Vec<u64>> {
    let sys = Truncated::new(model, cfg.k, cfg.variant);
    let mut rng = rng_for(cfg.seed, rep);
    let mut pop = vec![0u64; cfg.k + 2];
    pop[cfg.initial_type] = 1;
    let mut next = vec![0u64; cfg.k + 2];
    let mut out = vec![pop.clone()];
    for _ in 0..generations {
        sys.step(&mut rng, &pop, &mut next);
        std::mem::swap(&mut pop, &mut next);
        out.push(pop.clone());
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct SimEstimate {
    /// Fraction of all replications observed extinct within the caps.
    pub estimate: f64,
    pub half_width: f64,
    pub n: usize,
    /// Replications stopped by the population cap.
    pub censored: usize,
    /// Censored fraction above the limit.
    pub unreliable: bool,
    pub seed: u64,
}

fn proportion(hits: usize, n: usize) -> (f64, f64) {
    let p = hits as f64 / n as f64;
    (p, Z95 * (p * (1.0 - p) / n as f64).sqrt())
}

/// Extinction frequency of the truncated process started from one type-`i0`
/// individual. The immortal variant targets `q^(k)`, the sterile one `q~^(k)`.
pub fn estimate_extinction(
    model: &LhbpModel,
    k: usize,
    i0: usize,
    variant: Variant,
    n: usize,
    seed: u64,
) -> Result<SimEstimate, NumericError> {
    if n < 100 {
        return Err(NumericError::Precondition("at least 100 replications".into()));
    }
    let cfg = SimConfig::new(k, variant, i0, n, seed);
    let reps = simulate_truncated(model, &cfg)?;
    let extinct = reps
        .iter()
        .filter(|r| matches!(r.outcome, Outcome::Extinct(_)))
        .count();
    let censored = reps
        .iter()
        .filter(|r| r.outcome == Outcome::PopulationCapHit)
        .count();
    let (estimate, half_width) = proportion(extinct, n);
    Ok(SimEstimate {
        estimate,
        half_width,
        n,
        censored,
        unreliable: censored as f64 > CENSOR_LIMIT * n as f64,
        seed,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub half_width: f64,
    /// Uncensored replications used for the mean.
    pub n: usize,
    pub censored: usize,
    pub unreliable: bool,
    pub seed: u64,
}

/// Sample mean of the type-`(k+1)` births of the level-`k` sterile
/// truncation started from one type-`k` individual; estimates `mu_k`.
pub fn estimate_embedded_moment(model: &LhbpModel, k: usize, n: usize, seed: u64) -> Result<MomentEstimate, NumericError> {
    let mom = embedded_moments(model, k);
    if mom.len() <= k {
        return Err(NumericError::PartialSurvivalRegime(format!(
            "embedded moments stop at {}",
            mom.status.label()
        )));
    }
    let cfg = SimConfig::new(k, Variant::Sterile, k, n, seed);
    let reps = simulate_truncated(model, &cfg)?;
    let used: Vec<f64> = reps
        .iter()
        .filter(|r| r.outcome != Outcome::PopulationCapHit)
        .map(|r| r.births_above as f64)
        .collect();
    let censored = n - used.len();
    let m = used.len() as f64;
    let mean = used.iter().sum::<f64>() / m;
    let var = used.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
    let std_error = (var / m).sqrt();
    Ok(MomentEstimate {
        mean,
        std_error,
        half_width: Z95 * std_error,
        n: used.len(),
        censored,
        unreliable: censored as f64 > CENSOR_LIMIT * n as f64,
        seed,
    })
}
