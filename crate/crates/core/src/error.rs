use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |a - a^dagger| = {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not symmetric (max |a - a^T| = {0:e})")]
    NotSymmetric(f64),
    #[error("density matrix trace is {0}, expected 1")]
    NotUnitTrace(f64),
    #[error("density matrix has negative eigenvalue {0:e}")]
    NotPositive(f64),
    #[error("matrix has a non-finite entry")]
    NonFinite,
    #[error("vector of norm {0} cannot be used as a unit direction")]
    NotUnit(f64),
    #[error("{name} = {value} is outside [{lo}, {hi}]")]
    OutOfRange { name: &'static str, value: f64, lo: f64, hi: f64 },
    #[error("mixture weights are invalid: {0}")]
    BadWeights(&'static str),
    #[error("rank {0} is not in 1..=4")]
    BadRank(usize),
    #[error("CHSH index {0} is not in 0..=3")]
    BadIndex(usize),
    #[error("pair ({0}, {0}) needs two distinct indices")]
    SameIndex(usize),
    #[error("correlation t[{m}][{n}] has imaginary part {im:e}")]
    NonRealCorrelation { m: usize, n: usize, im: f64 },
    #[error("Bob's settings are (anti)parallel, so the mid-frame is degenerate")]
    DegenerateBob,
    #[error("no rotation angle reproduces the inner product {0}")]
    NoBranch(f64),
    #[error("{name} = {value} lies outside its allowed interval [{lo}, {hi}]")]
    BadInterval { name: &'static str, value: f64, lo: f64, hi: f64 },
    #[error("ellipse is unbounded: principal coefficient {0:e} with nonzero r^2")]
    DegenerateEllipse(f64),
    #[error("linear system for D, D' is singular (determinant {0:e})")]
    SingularSystem(f64),
}

pub type Result<T> = core::result::Result<T, Error>;
