//! JSON model documents.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CoordLaw, Family, LhbpModel, OffspringLaw, TableEntry};
use crate::error::ModelError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ModelDocument {
    Explicit {
        head: Vec<HeadLawDoc>,
        tail_from: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bandwidth: Option<usize>,
    },
    Tridiagonal {
        a: f64,
        b: f64,
        c: f64,
        #[serde(default = "unit")]
        u: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bandwidth: Option<usize>,
    },
    Example2 {
        gamma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bandwidth: Option<usize>,
    },
}

fn unit() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeadLawDoc {
    #[serde(rename = "type")]
    pub ty: usize,
    pub law: LawDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LawDoc {
    Table { entries: Vec<EntryDoc> },
    Product { coords: Vec<CoordDoc> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryDoc {
    /// Offspring type (as a decimal string key) to count; absent types have
    /// count zero.
    pub counts: BTreeMap<String, u64>,
    pub prob: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordDoc {
    #[serde(rename = "type")]
    pub ty: usize,
    pub pmf: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch: Option<f64>,
}

impl LawDoc {
    pub fn to_law(&self) -> Result<OffspringLaw, ModelError> {
        Ok(match self {
            LawDoc::Table { entries } => {
                let mut out = Vec::with_capacity(entries.len());
                for e in entries {
                    let mut counts = Vec::with_capacity(e.counts.len());
                    for (key, &c) in &e.counts {
                        let t = key.trim().parse::<usize>().map_err(|_| {
                            ModelError::Head(format!("offspring type key {key:?} is not an integer"))
                        })?;
                        counts.push((t, c));
                    }
                    out.push(TableEntry::new(counts, e.prob));
                }
                OffspringLaw::Table(out)
            }
            LawDoc::Product { coords } => OffspringLaw::Product(
                coords
                    .iter()
                    .map(|c| CoordLaw {
                        ty: c.ty,
                        pmf: c.pmf.clone(),
                        batch: c.batch.unwrap_or(1.0),
                    })
                    .collect(),
            ),
        })
    }
}

impl ModelDocument {
    fn into_parts(self) -> Result<(Family, Option<usize>), ModelError> {
        Ok(match self {
            ModelDocument::Explicit {
                mut head,
                tail_from,
                bandwidth,
            } => {
                head.sort_by_key(|h| h.ty);
                for (expect, h) in head.iter().enumerate() {
                    if h.ty != expect {
                        return Err(ModelError::Head(format!(
                            "head laws must cover types 0..={tail_from} exactly once; type {expect} is missing or repeated"
                        )));
                    }
                }
                let head = head
                    .iter()
                    .map(|h| h.law.to_law())
                    .collect::<Result<Vec<_>, _>>()?;
                (Family::Explicit { head, tail_from }, bandwidth)
            }
            ModelDocument::Tridiagonal {
                a,
                b,
                c,
                u,
                bandwidth,
            } => (Family::Tridiagonal { a, b, c, u }, bandwidth),
            ModelDocument::Example2 { gamma, bandwidth } => (Family::Example2 { gamma }, bandwidth),
        })
    }

    /// Builds the model, checking every invariant.
    pub fn build(self) -> Result<LhbpModel, ModelError> {
        let (family, bandwidth) = self.into_parts()?;
        LhbpModel::from_family(family, bandwidth)
    }

    /// Builds the model without checking invariants (for diagnostics on
    /// degenerate models).
    pub fn build_unchecked(self) -> Result<LhbpModel, ModelError> {
        let (family, bandwidth) = self.into_parts()?;
        Ok(LhbpModel::from_family_unchecked(family, bandwidth))
    }
}

/// Parses and validates a JSON model document.
pub fn load_model(text: &str) -> Result<LhbpModel, ModelError> {
    let doc: ModelDocument = serde_json::from_str(text)?;
    doc.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parametric_documents() {
        let m = load_model(r#"{"family":"example2","gamma":0.3}"#).unwrap();
        assert!((m.mean(1, 0) - 0.6).abs() < 1e-14);
        assert!((m.mean(1, 2) - 1.4).abs() < 1e-14);

        let m = load_model(r#"{"family":"tridiagonal","a":0.25,"b":0.25,"c":0.5,"u":1}"#).unwrap();
        for i in 1..6 {
            assert_eq!(m.mean_row(i), vec![(i - 1, 0.25), (i, 0.25), (i + 1, 0.5)]);
        }
    }

    #[test]
    fn explicit_document_round_trip() {
        let text = r#"{
            "family": "explicit",
            "tail_from": 1,
            "head": [
                {"type": 0, "law": {"kind": "table", "entries": [
                    {"counts": {"1": 2}, "prob": 0.5},
                    {"counts": {}, "prob": 0.5}]}},
                {"type": 1, "law": {"kind": "product", "coords": [
                    {"type": 0, "pmf": [0.5, 0.5]},
                    {"type": 2, "pmf": [0.25, 0.5, 0.25]}]}}
            ]
        }"#;
        let doc: ModelDocument = serde_json::from_str(text).unwrap();
        let again: ModelDocument = serde_json::from_str(&serde_json::to_string(&doc).unwrap()).unwrap();
        assert_eq!(doc, again);
        let m = doc.build().unwrap();
        assert_eq!(m.mean_row(4), vec![(3, 0.5), (5, 1.0)]);
    }

    #[test]
    fn normalization_error() {
        let text = r#"{"family":"explicit","tail_from":0,"head":[
            {"type":0,"law":{"kind":"table","entries":[{"counts":{"1":1},"prob":0.9}]}}]}"#;
        assert!(matches!(load_model(text), Err(ModelError::Normalization { ty: 0, .. })));
    }

    #[test]
    fn parse_and_parameter_errors() {
        assert!(matches!(load_model("{not json"), Err(ModelError::Parse(_))));
        assert!(matches!(
            load_model(r#"{"family":"example2","gamma":1.5}"#),
            Err(ModelError::Parameter(_))
        ));
        assert!(matches!(
            load_model(r#"{"family":"tridiagonal","a":0.2,"b":0.2,"c":0}"#),
            Err(ModelError::NoForwardEdge { .. })
        ));
    }
}
