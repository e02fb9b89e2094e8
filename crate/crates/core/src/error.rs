use thiserror::Error;

/// Errors raised by mesh queries, linear solves and the time stepper.
///
/// Numerical payloads are widened to `f64` regardless of the working precision.
#[derive(Debug, Error)]
pub enum Error {
    #[error("division number must be at least 1")]
    InvalidDivision,
    #[error("point outside domain: ({x}, {y})")]
    PointOutsideDomain { x: f64, y: f64 },
    #[error("upwind point escaped domain: ({x}, {y})")]
    UpwindEscaped { x: f64, y: f64 },
    #[error("index ({row}, {col}) out of range for {n_rows}x{n_cols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("linear solve failed, achieved residual {residual:e}")]
    SolveFailed { residual: f64 },
    #[error("matrix is structurally singular")]
    StructurallySingular,
    #[error("newton diverged after {iterations} iterations, residual {residual:e}")]
    NewtonDiverged { iterations: usize, residual: f64 },
    #[error("time step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("mesh format error on line {line}: {message}")]
    MeshFormat { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
