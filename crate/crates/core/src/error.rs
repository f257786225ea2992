use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("seed {label}: {reason}")]
    InvalidSeed { label: usize, reason: String },
    #[error("duplicate seed label {0}")]
    DuplicateLabel(usize),
    #[error("unknown seed label {0}")]
    UnknownLabel(usize),
    #[error("at least one seed is required")]
    NoSeeds,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("operator for label {label} does not preserve the reduced space (leak {leak:.3e})")]
    NotReducing { label: usize, leak: f64 },
    #[error("element at label {label} is not centered (state value {value:.3e})")]
    NotCentered { label: usize, value: f64 },
    #[error("word of length {len} leaves the exact regime (max_len {max_len})")]
    Inexact { len: usize, max_len: usize },
    #[error("vector is not cyclic: rank {rank} < {dim}")]
    NotCyclic { rank: usize, dim: usize },
    #[error("vector is not separating: commutant rank {rank} < {dim}")]
    NotSeparating { rank: usize, dim: usize },
    #[error("subalgebra is not contained in the ambient algebra (residual {residual:.3e})")]
    NotSubalgebra { residual: f64 },
    #[error("algebra closure did not stabilize after {0} iterations")]
    ClosureDiverged(usize),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("multiplicity overflow while combining spectra")]
    MultiplicityOverflow,
    #[error("spectrum: {0}")]
    Spectrum(String),
    #[error("reduced trace stays above {threshold} on the whole search range")]
    NoSplitDistance { threshold: f64 },
    #[error("rapidity grid too small: edge mass {edge_mass:.3e}")]
    GridTooSmall { edge_mass: f64 },
    #[error("velocity support is empty at threshold {0}")]
    EmptySupport(f64),
    #[error("packets are not velocity ordered")]
    PrecedenceViolated,
    #[error("state is outside the S-matrix domain (wrong-side mass fraction {fraction:.3e})")]
    OutsideDomain { fraction: f64 },
    #[error("particle number cap {0} exceeded")]
    CapExceeded(usize),
}
