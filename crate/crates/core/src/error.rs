use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid modulus: {0}")]
    InvalidModulus(String),
    #[error("modulus {p}^{s} exceeds the 62-bit budget")]
    BudgetOverflow { p: u64, s: u32 },
    #[error("not a unit: {0}")]
    NotAUnit(String),
    #[error("degenerate regime: {0}")]
    DegenerateRegime(String),
    #[error("z_{i} - z_{j} is not invertible")]
    NonInvertibleDifference { i: usize, j: usize },
    #[error("division by p while {0}")]
    DivisionByP(String),
    #[error("series truncation too short: {0}")]
    InsufficientTruncation(String),
    #[error("determinant is not a unit at the chosen point")]
    DetNotUnit,
    #[error("Cartier map is not onto: {0}")]
    NotOnto(String),
    #[error("form is not closed: {0}")]
    NotClosed(String),
    #[error("cutoff too small: {0}")]
    CutoffTooSmall(String),
    #[error("p-adic precision exhausted at degree {degree}: {detail}")]
    PrecisionExhausted { degree: u32, detail: String },
    #[error("no hypergeometric match: {0}")]
    NoMatch(String),
    #[error("vector violates the sum-zero invariant")]
    SumNotZero,
    #[error("index out of range: {0}")]
    InvalidIndex(String),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("connection is not integrable: {0}")]
    NotIntegrable(String),
    #[error("witness does not satisfy dg = p^s eta: {0}")]
    BadWitness(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("parse error: {0}")]
    Parse(String),
}
