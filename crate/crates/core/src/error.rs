use thiserror::Error;

/// Errors raised by the toolkit. Numerical payloads are reported in binary64
/// regardless of the scalar type the computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("z = {0} lies outside the difference set of the domain")]
    OutOfDomain(f64),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Polya density is negative ({value:e}) at t = {t}")]
    NegativeDensity { t: f64, value: f64 },

    #[error("kernel is not convex near x = {x:?} (second difference {second_difference:e})")]
    NotConvex { x: [f64; 3], second_difference: f64 },

    #[error("kernel is not nonincreasing near x = {x:?} (difference {difference:e})")]
    NotDecreasing { x: [f64; 2], difference: f64 },

    #[error("kernel is not even and real at x = {x} (defect {defect:e})")]
    NotEvenReal { x: f64, defect: f64 },

    #[error("tangent at the boundary has slope {slope} with value {value}; it never reaches zero")]
    TangentHorizontal { slope: f64, value: f64 },

    #[error("cutoff {cutoff} is smaller than the tangent zero {required}")]
    CutoffTooSmall { cutoff: f64, required: f64 },

    #[error("domain must be a single interval")]
    DomainNotInterval,

    #[error("candidate carries no backing measure")]
    NoBackingMeasure,

    #[error("candidate is not an extension: residual {residual:e} exceeds budget {budget:e}")]
    NotAnExtension { residual: f64, budget: f64 },

    #[error("covariance is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("function is not conditionally negative definite: {0}")]
    NotCnd(String),

    #[error("Gaussian sampling needs a real covariance; kernel has imaginary part {0:e}")]
    ComplexKernel(f64),

    #[error("at least two paths are required, got {0}")]
    TooFewPaths(usize),

    #[error("grid values are not uniformly spaced at row {index}")]
    NonUniformGrid { index: usize },

    #[error("sample table is not Hermitian: defect {defect:e} exceeds {tolerance:e}")]
    AsymmetricData { defect: f64, tolerance: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
