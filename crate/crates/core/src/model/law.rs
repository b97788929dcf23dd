//! Finite-support offspring laws of a single parental type.
//!
//! A law is either an explicit table of offspring vectors or a product of
//! independent per-type count distributions. Types are absolute indices.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Tolerance on the total mass of a law.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// One support point of a table law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    /// `(type, count)` pairs with positive count, sorted by type.
    pub counts: Vec<(usize, u64)>,
    pub prob: f64,
}

impl TableEntry {
    pub fn new(mut counts: Vec<(usize, u64)>, prob: f64) -> Self {
        counts.retain(|&(_, c)| c > 0);
        counts.sort_unstable_by_key(|&(t, _)| t);
        // merge repeated types
        let mut merged: Vec<(usize, u64)> = Vec::with_capacity(counts.len());
        for (t, c) in counts {
            match merged.last_mut() {
                Some((lt, lc)) if *lt == t => *lc += c,
                _ => merged.push((t, c)),
            }
        }
        Self { counts: merged, prob }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&(_, c)| c).sum()
    }

    pub fn count_of(&self, ty: usize) -> u64 {
        self.counts
            .iter()
            .find(|&&(t, _)| t == ty)
            .map_or(0, |&(_, c)| c)
    }
}

/// Count distribution of one offspring type inside a product law.
///
/// With probability `1/batch` the count is `batch * c` where `c ~ pmf`,
/// otherwise it is zero. `batch = 1` is a plain count distribution; larger
/// values encode a thinned-and-inflated coordinate with unchanged mean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordLaw {
    pub ty: usize,
    /// `pmf[c]` is the probability of `c` children (before batching).
    pub pmf: Vec<f64>,
    #[serde(default = "one")]
    pub batch: f64,
}

fn one() -> f64 {
    1.0
}

impl CoordLaw {
    pub fn new(ty: usize, pmf: Vec<f64>) -> Self {
        Self { ty, pmf, batch: 1.0 }
    }

    /// Two-point-or-less law on {0,1,2} with the given mean (requires `0 <= mean <= 2`).
    pub fn with_mean(ty: usize, mean: f64) -> Self {
        let pmf = if mean <= 1.0 {
            vec![1.0 - mean, mean]
        } else {
            vec![0.0, 2.0 - mean, mean - 1.0]
        };
        Self::new(ty, pmf)
    }

    fn raw_mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(c, p)| c as f64 * p).sum()
    }

    fn raw_second(&self) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .map(|(c, p)| (c * c) as f64 * p)
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.raw_mean()
    }

    /// E[N(N-1)].
    pub fn second_factorial(&self) -> f64 {
        self.batch * self.raw_second() - self.raw_mean()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.second_factorial() + m - m * m
    }

    /// Generating function of the count at `s`.
    pub fn pgf(&self, s: f64) -> f64 {
        if self.batch == 1.0 {
            return horner(&self.pmf, s);
        }
        let inner = if s >= 1.0 {
            self.pmf.iter().sum()
        } else if s <= 0.0 {
            self.pmf.first().copied().unwrap_or(0.0)
        } else {
            self.pmf
                .iter()
                .enumerate()
                .map(|(c, p)| {
                    if c == 0 {
                        *p
                    } else {
                        p * s.powf(self.batch * c as f64)
                    }
                })
                .sum()
        };
        inner / self.batch + (1.0 - 1.0 / self.batch)
    }

    /// Probability that the count equals exactly `n`.
    pub fn prob_of(&self, n: u64) -> f64 {
        let inv = 1.0 / self.batch;
        if n == 0 {
            return (1.0 - inv) + inv * self.pmf.first().copied().unwrap_or(0.0);
        }
        if self.batch == 1.0 {
            return self.pmf.get(n as usize).copied().unwrap_or(0.0);
        }
        let b = self.batch;
        let c = n as f64 / b;
        if c.fract() != 0.0 {
            return 0.0;
        }
        inv * self.pmf.get(c as usize).copied().unwrap_or(0.0)
    }

    /// Smallest positive count with positive probability.
    pub fn min_positive(&self) -> Option<f64> {
        self.pmf
            .iter()
            .enumerate()
            .skip(1)
            .find(|(_, &p)| p > 0.0)
            .map(|(c, _)| c as f64 * self.batch)
    }

    /// Probability that the count is at least `n`.
    pub fn prob_at_least(&self, n: f64) -> f64 {
        if n <= 0.0 {
            return 1.0;
        }
        self.pmf
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(c, _)| *c as f64 * self.batch >= n)
            .map(|(_, p)| p / self.batch)
            .sum()
    }
}

/// Offspring distribution of one parental type.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum OffspringLaw {
    Table(Vec<TableEntry>),
    Product(Vec<CoordLaw>),
}

impl OffspringLaw {
    /// Law with no offspring at all.
    pub fn sterile() -> Self {
        OffspringLaw::Table(vec![TableEntry::new(vec![], 1.0)])
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            OffspringLaw::Table(entries) => entries.iter().map(|e| e.prob).sum(),
            // each coordinate is a distribution on its own
            OffspringLaw::Product(coords) => coords
                .iter()
                .map(|c| c.pmf.iter().sum::<f64>())
                .fold(1.0, |acc, m| acc * m),
        }
    }

    /// Largest offspring type with positive probability.
    pub fn max_type(&self) -> Option<usize> {
        match self {
            OffspringLaw::Table(entries) => entries
                .iter()
                .filter(|e| e.prob > 0.0)
                .flat_map(|e| e.counts.iter().map(|&(t, _)| t))
                .max(),
            OffspringLaw::Product(coords) => coords
                .iter()
                .filter(|c| c.mean() > 0.0)
                .map(|c| c.ty)
                .max(),
        }
    }

    /// Smallest offspring type with positive probability.
    pub fn min_type(&self) -> Option<usize> {
        match self {
            OffspringLaw::Table(entries) => entries
                .iter()
                .filter(|e| e.prob > 0.0)
                .flat_map(|e| e.counts.iter().map(|&(t, _)| t))
                .min(),
            OffspringLaw::Product(coords) => coords
                .iter()
                .filter(|c| c.mean() > 0.0)
                .map(|c| c.ty)
                .min(),
        }
    }

    /// Checks normalization, non-negativity and the lower Hessenberg support
    /// constraint for a parent of type `parent`.
    pub fn check(&self, parent: usize) -> Result<(), ModelError> {
        let negative = match self {
            OffspringLaw::Table(entries) => entries.iter().any(|e| !(e.prob >= 0.0)),
            OffspringLaw::Product(coords) => coords
                .iter()
                .any(|c| c.pmf.iter().any(|p| !(*p >= 0.0)) || !(c.batch >= 1.0)),
        };
        if negative {
            return Err(ModelError::NegativeProbability { ty: parent });
        }
        match self {
            OffspringLaw::Table(entries) => {
                let mass: f64 = entries.iter().map(|e| e.prob).sum();
                if (mass - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(ModelError::Normalization { ty: parent, mass });
                }
            }
            OffspringLaw::Product(coords) => {
                for c in coords {
                    let mass: f64 = c.pmf.iter().sum();
                    if (mass - 1.0).abs() > NORMALIZATION_TOL {
                        return Err(ModelError::Normalization { ty: parent, mass });
                    }
                }
            }
        }
        if let Some(t) = self.max_type() {
            if t > parent + 1 {
                return Err(ModelError::Hessenberg {
                    ty: parent,
                    child: t,
                });
            }
        }
        Ok(())
    }

    /// Generating function evaluated at `s`, indexed by absolute type.
    /// Types beyond `s.len()` are treated as `s = 1`.
    pub fn pgf(&self, s: &[f64]) -> f64 {
        let at = |t: usize| s.get(t).copied().unwrap_or(1.0);
        match self {
            OffspringLaw::Table(entries) => entries
                .iter()
                .map(|e| {
                    e.counts
                        .iter()
                        .fold(e.prob, |acc, &(t, c)| acc * pow_count(at(t), c))
                })
                .sum(),
            OffspringLaw::Product(coords) => coords.iter().map(|c| c.pgf(at(c.ty))).product(),
        }
    }

    /// Mean number of type-`ty` children.
    pub fn mean_of(&self, ty: usize) -> f64 {
        match self {
            OffspringLaw::Table(entries) => entries
                .iter()
                .map(|e| e.prob * e.count_of(ty) as f64)
                .sum(),
            OffspringLaw::Product(coords) => coords
                .iter()
                .filter(|c| c.ty == ty)
                .map(|c| c.mean())
                .sum(),
        }
    }

    /// Sparse mean row: `(type, mean)` for every type with positive mean, sorted by type.
    pub fn mean_row(&self) -> Vec<(usize, f64)> {
        let mut row: Vec<(usize, f64)> = Vec::new();
        let mut push = |t: usize, v: f64| {
            if v == 0.0 {
                return;
            }
            match row.iter_mut().find(|(rt, _)| *rt == t) {
                Some((_, rv)) => *rv += v,
                None => row.push((t, v)),
            }
        };
        match self {
            OffspringLaw::Table(entries) => {
                for e in entries {
                    for &(t, c) in &e.counts {
                        push(t, e.prob * c as f64);
                    }
                }
            }
            OffspringLaw::Product(coords) => {
                for c in coords {
                    push(c.ty, c.mean());
                }
            }
        }
        row.sort_unstable_by_key(|&(t, _)| t);
        row
    }

    /// Second factorial moment `A_{ij} = d^2 G / ds_i ds_j` at `s = 1`.
    pub fn second_factorial(&self, i: usize, j: usize) -> f64 {
        match self {
            OffspringLaw::Table(entries) => entries
                .iter()
                .map(|e| {
                    let ni = e.count_of(i) as f64;
                    if i == j {
                        e.prob * ni * (ni - 1.0)
                    } else {
                        e.prob * ni * e.count_of(j) as f64
                    }
                })
                .sum(),
            OffspringLaw::Product(coords) => {
                if i == j {
                    // counts of the same type from different coordinates add up
                    let same: Vec<&CoordLaw> = coords.iter().filter(|c| c.ty == i).collect();
                    let mut total = 0.0;
                    for (a, ca) in same.iter().enumerate() {
                        total += ca.second_factorial();
                        for (b, cb) in same.iter().enumerate() {
                            if a != b {
                                total += ca.mean() * cb.mean();
                            }
                        }
                    }
                    total
                } else {
                    self.mean_of(i) * self.mean_of(j)
                }
            }
        }
    }

    /// Quadratic form `sum_{i,j} w_i w_j A_{ij}` with `w` given as a function of type.
    pub fn second_factorial_form(&self, w: impl Fn(usize) -> f64) -> f64 {
        match self {
            OffspringLaw::Table(entries) => entries
                .iter()
                .map(|e| {
                    let lin: f64 = e.counts.iter().map(|&(t, c)| w(t) * c as f64).sum();
                    let diag: f64 = e.counts.iter().map(|&(t, c)| w(t) * w(t) * c as f64).sum();
                    e.prob * (lin * lin - diag)
                })
                .sum(),
            OffspringLaw::Product(coords) => {
                let lin: f64 = coords.iter().map(|c| w(c.ty) * c.mean()).sum();
                let var: f64 = coords.iter().map(|c| w(c.ty) * w(c.ty) * c.variance()).sum();
                let diag: f64 = coords.iter().map(|c| w(c.ty) * w(c.ty) * c.mean()).sum();
                lin * lin + var - diag
            }
        }
    }

    /// Probability of exactly one child in total.
    pub fn prob_one_child(&self) -> f64 {
        match self {
            OffspringLaw::Table(entries) => entries
                .iter()
                .filter(|e| e.total() == 1)
                .map(|e| e.prob)
                .sum(),
            OffspringLaw::Product(coords) => {
                let zeros: Vec<f64> = coords.iter().map(|c| c.prob_of(0)).collect();
                (0..coords.len())
                    .map(|a| {
                        coords[a].prob_of(1)
                            * zeros
                                .iter()
                                .enumerate()
                                .filter(|&(b, _)| b != a)
                                .map(|(_, z)| z)
                                .product::<f64>()
                    })
                    .sum()
            }
        }
    }

    /// Probability of at least `n` children of type `ty`.
    pub fn prob_at_least_of(&self, ty: usize, n: u64) -> f64 {
        match self {
            OffspringLaw::Table(entries) => entries
                .iter()
                .filter(|e| e.count_of(ty) >= n)
                .map(|e| e.prob)
                .sum(),
            OffspringLaw::Product(coords) => {
                let same: Vec<&CoordLaw> = coords.iter().filter(|c| c.ty == ty).collect();
                match same.as_slice() {
                    [] => {
                        if n == 0 {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    [c] => c.prob_at_least(n as f64),
                    // several coordinates of one type: convolve the small supports
                    _ => {
                        let mut dist = vec![1.0];
                        for c in same {
                            let support = (c.pmf.len() - 1) as f64 * c.batch;
                            let len = support as usize + 1;
                            let mut own = vec![0.0; len];
                            for (v, slot) in own.iter_mut().enumerate() {
                                *slot = c.prob_of(v as u64);
                            }
                            let mut next = vec![0.0; dist.len() + len - 1];
                            for (a, pa) in dist.iter().enumerate() {
                                for (b, pb) in own.iter().enumerate() {
                                    next[a + b] += pa * pb;
                                }
                            }
                            dist = next;
                        }
                        dist.iter().skip(n as usize).sum()
                    }
                }
            }
        }
    }

    /// Smallest positive number of type-`ty` children that occurs with positive probability.
    pub fn min_positive_count_of(&self, ty: usize) -> Option<f64> {
        match self {
            OffspringLaw::Table(entries) => entries
                .iter()
                .filter(|e| e.prob > 0.0)
                .map(|e| e.count_of(ty))
                .filter(|&c| c > 0)
                .min()
                .map(|c| c as f64),
            OffspringLaw::Product(coords) => coords
                .iter()
                .filter(|c| c.ty == ty)
                .filter_map(|c| c.min_positive())
                .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v)))),
        }
    }

    /// Relabels every offspring type `t` as `t + delta`, dropping types that
    /// would become negative.
    pub fn shifted(&self, delta: isize) -> Self {
        let map = |t: usize| -> Option<usize> {
            let n = t as isize + delta;
            (n >= 0).then_some(n as usize)
        };
        match self {
            OffspringLaw::Table(entries) => {
                let mut out: Vec<TableEntry> = Vec::with_capacity(entries.len());
                for e in entries {
                    let counts: Vec<(usize, u64)> = e
                        .counts
                        .iter()
                        .filter_map(|&(t, c)| map(t).map(|nt| (nt, c)))
                        .collect();
                    let entry = TableEntry::new(counts, e.prob);
                    // dropping types can make support points coincide
                    match out.iter_mut().find(|o| o.counts == entry.counts) {
                        Some(o) => o.prob += entry.prob,
                        None => out.push(entry),
                    }
                }
                OffspringLaw::Table(out)
            }
            OffspringLaw::Product(coords) => OffspringLaw::Product(
                coords
                    .iter()
                    .filter_map(|c| {
                        map(c.ty).map(|ty| CoordLaw {
                            ty,
                            pmf: c.pmf.clone(),
                            batch: c.batch,
                        })
                    })
                    .collect(),
            ),
        }
    }
}

/// `s^c` for a non-negative integer count.
#[inline]
pub(crate) fn pow_count(s: f64, c: u64) -> f64 {
    if c <= i32::MAX as u64 {
        s.powi(c as i32)
    } else {
        s.powf(c as f64)
    }
}

fn horner(coeffs: &[f64], s: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
}
