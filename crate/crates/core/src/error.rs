use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("inadmissible metric: t·b_max = {product} must be below {limit}")]
    Inadmissible { product: f64, limit: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("singular quadrature weight at ({x}, {y}): 1 - t²β(v)² = {denominator:e}")]
    SingularWeight { x: f64, y: f64, denominator: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("cell ({i}, {j}) has a non positive-definite symbol (det = {det:e})")]
    IndefiniteSymbol { i: usize, j: usize, det: f64 },

    #[error("mass matrix is not positive definite")]
    IndefiniteMass,

    #[error("vector has zero mass norm")]
    ZeroMassNorm,

    #[error("eigensolver did not converge after {iterations} iterations (worst relative residual {worst_residual:e})")]
    NotConverged {
        iterations: usize,
        worst_residual: f64,
        residuals: Vec<f64>,
    },

    #[error("curve is not closed: endpoint offset ({dx}, {dy}) is not an integer vector")]
    OpenCurve { dx: f64, dy: f64 },

    #[error("unit-speed drift {drift:e} exceeds the per-step limit")]
    SpeedDrift { drift: f64 },

    #[error("operation requires a closed one-form")]
    NotClosed,

    #[error("length invariance holds for exact forms only; `{0}` is not exact")]
    NotExact(String),

    #[error("integrability requires 2s > n - 1 (s = {s}, n = {n})")]
    NotIntegrable { s: f64, n: usize },

    #[error("tail mass fraction {fraction:e} beyond R_max exceeds 1e-8")]
    TailTooHeavy { fraction: f64 },

    #[error("least-squares fit needs at least 3 radii, got {0}")]
    DegenerateFit(usize),
}
