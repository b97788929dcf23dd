use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("malformed model document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("offspring law of type {ty} has total mass {mass}, expected 1")]
    Normalization { ty: usize, mass: f64 },
    #[error("offspring law of type {ty} has a negative or non-finite probability")]
    NegativeProbability { ty: usize },
    #[error("type {ty} can produce type {child}, beyond the lower Hessenberg limit {}", ty + 1)]
    Hessenberg { ty: usize, child: usize },
    #[error("mean number of type-{} children of a type-{ty} parent is zero", ty + 1)]
    NoForwardEdge { ty: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("explicit head is inconsistent: {0}")]
    Head(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error("boundary value {0} is outside [0, 1]")]
    Boundary(f64),
    #[error("target {target} is outside the attainable range [{lo}, {hi}] of g_{level}")]
    Range {
        level: usize,
        target: f64,
        lo: f64,
        hi: f64,
    },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no partial-extinction regime: {0}")]
    PartialSurvivalRegime(String),
}
