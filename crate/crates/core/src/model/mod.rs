//! Lower Hessenberg branching process models.
//!
//! A model is a lazily indexable sequence of offspring laws: an explicit
//! head with a shift-repeat tail, one of the two parametric families, or the
//! relabelled tail of another model.

mod document;
pub mod law;
mod moments;
mod validate;

use std::sync::Arc;

pub use document::{load_model, CoordDoc, EntryDoc, HeadLawDoc, LawDoc, ModelDocument};
pub use law::{CoordLaw, OffspringLaw, TableEntry};
pub use moments::{moment_tables, MomentTables};
pub use validate::{validate, DivergenceFlag, ValidationReport};

use crate::error::ModelError;

#[derive(Clone, Debug)]
pub enum Family {
    /// Laws for types `0..=tail_from`; type `i > tail_from` reuses the last
    /// law with every offspring type shifted by `i - tail_from`.
    Explicit {
        head: Vec<OffspringLaw>,
        tail_from: usize,
    },
    /// Tridiagonal mean matrix with rows `(a, b, c)` and the `<u>` batching
    /// of forward children.
    Tridiagonal { a: f64, b: f64, c: f64, u: f64 },
    /// Quartic family with `M_{i,i-1} = gamma (i+1)/i`, `M_{i,i+1} = (1-gamma)(i+1)/i`.
    Example2 { gamma: f64 },
    /// Types `>= offset` of `base`, relabelled to start at zero; children of
    /// types below `offset` are removed.
    Tail { base: Arc<LhbpModel>, offset: usize },
}

#[derive(Clone, Debug)]
pub struct LhbpModel {
    family: Family,
    bandwidth: usize,
}

impl LhbpModel {
    /// Builds a model without checking any invariant.
    pub fn from_family_unchecked(family: Family, bandwidth: Option<usize>) -> Self {
        let mut model = Self {
            family,
            bandwidth: 0,
        };
        model.bandwidth = bandwidth.unwrap_or_else(|| model.observed_bandwidth());
        model
    }

    /// Builds a model and checks the laws that determine the whole sequence.
    pub fn from_family(family: Family, bandwidth: Option<usize>) -> Result<Self, ModelError> {
        match &family {
            Family::Explicit { head, tail_from } => {
                if head.is_empty() || head.len() != tail_from + 1 {
                    return Err(ModelError::Head(format!(
                        "expected laws for types 0..={tail_from}, found {}",
                        head.len()
                    )));
                }
            }
            Family::Tridiagonal { a, b, c, u } => {
                for (name, v) in [("a", a), ("b", b), ("c", c)] {
                    if !(0.0..=2.0).contains(v) {
                        return Err(ModelError::Parameter(format!(
                            "{name} = {v} must lie in [0, 2] for the canonical {{0,1,2}} law"
                        )));
                    }
                }
                if !(*u >= 1.0) || !u.is_finite() {
                    return Err(ModelError::Parameter(format!("u = {u} must be >= 1")));
                }
            }
            Family::Example2 { gamma } => {
                if !(0.0..=1.0).contains(gamma) {
                    return Err(ModelError::Parameter(format!(
                        "gamma = {gamma} must lie in [0, 1]"
                    )));
                }
            }
            Family::Tail { .. } => {}
        }
        let model = Self::from_family_unchecked(family, bandwidth);
        for i in 0..=model.representative_types() {
            let law = model.law(i);
            law.check(i)?;
            if !(law.mean_of(i + 1) > 0.0) {
                return Err(ModelError::NoForwardEdge { ty: i });
            }
        }
        Ok(model)
    }

    pub fn example2(gamma: f64) -> Result<Self, ModelError> {
        Self::from_family(Family::Example2 { gamma }, None)
    }

    pub fn tridiagonal(a: f64, b: f64, c: f64, u: f64) -> Result<Self, ModelError> {
        Self::from_family(Family::Tridiagonal { a, b, c, u }, None)
    }

    pub fn explicit(head: Vec<OffspringLaw>) -> Result<Self, ModelError> {
        let tail_from = head.len().saturating_sub(1);
        Self::from_family(Family::Explicit { head, tail_from }, None)
    }

    /// Relabelled tail: types `>= offset` become `0, 1, ...`.
    pub fn tail(self: &Arc<Self>, offset: usize) -> Self {
        Self {
            bandwidth: self.bandwidth,
            family: Family::Tail {
                base: Arc::clone(self),
                offset,
            },
        }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Largest downward reach `i - j` of any offspring of a type-`i` parent.
    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// Number of leading types after which the law sequence is determined by
    /// a fixed rule (used to bound exhaustive checks).
    fn representative_types(&self) -> usize {
        match &self.family {
            Family::Explicit { tail_from, .. } => *tail_from,
            Family::Tridiagonal { .. } | Family::Example2 { .. } => 2,
            Family::Tail { base, offset } => base.representative_types().saturating_sub(*offset) + 2,
        }
    }

    fn observed_bandwidth(&self) -> usize {
        (0..=self.representative_types() + 1)
            .map(|i| {
                let law = self.law(i);
                law.min_type().map_or(0, |t| i.saturating_sub(t))
            })
            .max()
            .unwrap_or(0)
    }

    /// Whether an observed decrease `mu_k < mu_{k-1}` certifies that every
    /// later `x_k` stays below one. Holds for the quartic family and its tails,
    /// whose moment recursion is a decreasing-coefficient Moebius map.
    pub fn mu_decrease_certifies(&self) -> bool {
        match &self.family {
            Family::Example2 { .. } => true,
            Family::Tail { base, .. } => base.mu_decrease_certifies(),
            _ => false,
        }
    }

    /// Offspring law of a type-`i` parent.
    pub fn law(&self, i: usize) -> OffspringLaw {
        match &self.family {
            Family::Explicit { head, tail_from } => {
                if i <= *tail_from {
                    head[i].clone()
                } else {
                    head[*tail_from].shifted((i - tail_from) as isize)
                }
            }
            Family::Tridiagonal { a, b, c, u } => {
                let mut coords = Vec::with_capacity(3);
                if i > 0 && *a > 0.0 {
                    coords.push(CoordLaw::with_mean(i - 1, *a));
                }
                if *b > 0.0 {
                    coords.push(CoordLaw::with_mean(i, *b));
                }
                if *c > 0.0 {
                    let mut fwd = CoordLaw::with_mean(i + 1, *c);
                    fwd.batch = u.powi(i.min(i32::MAX as usize) as i32).ceil();
                    coords.push(fwd);
                }
                OffspringLaw::Product(coords)
            }
            Family::Example2 { gamma } => example2_law(*gamma, i),
            Family::Tail { base, offset } => base.law(i + offset).shifted(-(*offset as isize)),
        }
    }

    /// Sparse row `(j, M_{i,j})` of the mean progeny matrix.
    pub fn mean_row(&self, i: usize) -> Vec<(usize, f64)> {
        self.law(i).mean_row()
    }

    pub fn mean(&self, i: usize, j: usize) -> f64 {
        self.law(i).mean_of(j)
    }
}

fn example2_law(gamma: f64, k: usize) -> OffspringLaw {
    if k == 0 {
        // normalized so that G_0(1) = 1 and M_{0,1} = 1
        return OffspringLaw::Table(vec![
            TableEntry::new(vec![], 0.75),
            TableEntry::new(vec![(1, 4)], 0.25),
        ]);
    }
    let w = (k + 1) as f64 / (4 * k) as f64;
    const BINOM: [f64; 5] = [1.0, 4.0, 6.0, 4.0, 1.0];
    let mut entries = vec![TableEntry::new(vec![], 1.0 - w)];
    for back in 0..=4u64 {
        let p = w
            * BINOM[back as usize]
            * gamma.powi(back as i32)
            * (1.0 - gamma).powi(4 - back as i32);
        if p > 0.0 {
            entries.push(TableEntry::new(vec![(k - 1, back), (k + 1, 4 - back)], p));
        }
    }
    OffspringLaw::Table(entries)
}
