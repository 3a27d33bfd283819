use thiserror::Error;

/// Errors produced by the light field operations.
#[derive(Debug, Error)]
pub enum LfError {
    #[error("{axis} index {index} out of range (size {len})")]
    OutOfBounds {
        axis: &'static str,
        index: usize,
        len: usize,
    },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid dimensions: {0}")]
    InvalidDims(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("kernel undefined for out-of-plane motion (p_z = {pz} at t = {t})")]
    OutOfPlaneKernel { pz: f64, t: f64 },
    #[error("unknown texture kind `{0}`")]
    UnknownTextureKind(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("solver diverged in stage {stage} at iteration {iteration}")]
    Diverged {
        stage: u8,
        iteration: usize,
        report: Box<crate::solver::SolverReport>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = LfError> = std::result::Result<T, E>;
