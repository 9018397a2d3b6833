use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("index ({i}, {j}) outside mesh {nx}x{ny}")]
    IndexOutOfRange { i: usize, j: usize, nx: usize, ny: usize },
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix row {row} is not strictly diagonally dominant")]
    NotDiagonallyDominant { row: usize },
    #[error("singular matrix at pivot {0}")]
    Singular(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("construction refused: {0}")]
    ConstructionRefused(String),
    #[error("time step restriction violated: tau*beta = {product:.6e} >= 1")]
    TauRestriction { product: f64 },
    #[error("level {level}: no convergence after {iterations} iterations (residual {residual:.3e})")]
    NotConverged { level: usize, iterations: usize, residual: f64 },
    #[error("level {level}, iteration {iteration}: {count} sandwich violations")]
    SandwichViolation { level: usize, iteration: usize, count: usize },
    #[error("newton iteration failed: {0}")]
    Newton(String),
}

pub type Result<T> = std::result::Result<T, Error>;
