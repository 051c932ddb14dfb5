use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max |A - A^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("trace is {trace}, expected 1")]
    TraceNotOne { trace: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("length {len} does not match {rows}x{cols}")]
    LengthMismatch { len: usize, rows: usize, cols: usize },
    #[error("not a valid state: {0}")]
    NotAState(String),
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
    #[error("invalid Kraus set: {0}")]
    InvalidKraus(String),
    #[error("parameter out of domain: {0}")]
    DomainError(String),
    #[error("unknown state '{0}'")]
    UnknownState(String),
    #[error("matrix columns are not orthonormal (max |V^dagger V - I| = {deviation:e})")]
    NotIsometry { deviation: f64 },
    #[error("operator sets do not represent the same state (max deviation {deviation:e})")]
    NotSameState { deviation: f64 },
    #[error("source ensemble is not spectral (max |Tr c_a^dagger c_b - delta_ab| = {deviation:e})")]
    NotSpectral { deviation: f64 },
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("certificate failure: {0}")]
    CertificateFailure(String),
    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
