//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown activation `{0}`")]
    UnknownActivation(String),
    #[error("activation `{name}`: {reason}")]
    InvalidShapeParam { name: String, reason: String },
    #[error("the Dirac activation is analysis-only and cannot be evaluated pointwise")]
    DiracPointwise,
    #[error("penalty design: {0}")]
    Design(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("dataset: {0}")]
    Dataset(String),
    #[error("linear system inconsistent: least-squares residual mse {residual_mse:.3e} (pass allow_lsq to accept)")]
    InconsistentSystem { residual_mse: f64 },
    #[error("mse ball infeasible: requested eps {eps:.3e} below achievable floor {floor:.3e}")]
    InfeasibleEps { eps: f64, floor: f64 },
    #[error("solver did not converge: {0}")]
    NoConvergence(String),
    #[error("boundary probe is ambiguous: stencil straddles a second region boundary (shrink h)")]
    AmbiguousProbe,
    #[error("attractor undefined: active data carries no error-correlated direction")]
    DegenerateRegion,
    #[error("grid: {0}")]
    Grid(String),
    #[error("spectral leakage {fraction:.2}% exceeds the 1% budget at eps={eps}")]
    SpectralLeakage { fraction: f64, eps: f64 },
    #[error("idx file `{path}`: {reason}")]
    Idx { path: String, reason: String },
    #[error("config: {0}")]
    Config(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
