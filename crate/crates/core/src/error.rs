use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("n = {n} is below the minimum {min}")]
    InvalidN { n: usize, min: usize },
    #[error("divisor classes live on different lattices")]
    BasisMismatch,
    #[error("lattice error: {0}")]
    Lattice(String),
    #[error("class is not integral: {0}")]
    NonIntegral(String),
    #[error("fixed-component stripping exceeded the multiplicity cap {cap}")]
    StrippingDiverged { cap: i64 },
    #[error("no contiguous arc of the cycle matches: {0}")]
    NoArcMatch(String),
    #[error("constraint system inconsistent: {0}")]
    Inconsistent(String),
    #[error("constraint system underdetermined: unknowns {0:?} not fixed")]
    Underdetermined(Vec<String>),
    #[error("axiom registry incomplete: missing {0}")]
    MissingAxiom(String),
    #[error("elimination did not terminate by stage {0}")]
    NonTermination(usize),
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("invalid roots: {0}")]
    InvalidRoots(String),
    #[error("invalid quadric: {0}")]
    InvalidQuadric(String),
    #[error("polynomial error: {0}")]
    Poly(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, EngineError>;
