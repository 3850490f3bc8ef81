use thiserror::Error;

pub type Result<T> = std::result::Result<T, GeomError>;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeomError {
    #[error("metric is not positive definite at {point:?}")]
    SingularMetric { point: Vec<f64> },

    #[error("metric is not symmetric at {point:?} (asymmetry {asymmetry:e})")]
    AsymmetricMetric { point: Vec<f64>, asymmetry: f64 },

    #[error("non-finite value while evaluating {what} at {point:?}")]
    NonFinite { what: String, point: Vec<f64> },

    #[error("point {point:?} lies outside the chart domain")]
    ChartDomain { point: Vec<f64> },

    #[error("N = {n} coincides with the manifold dimension; df⊗df/(N-n) is undefined")]
    DimensionClash { n: usize },

    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("sampling grid is empty")]
    EmptyGrid,

    #[error("supremum diverges on the sampled range (maximizer at r = {argmax}, value {value:e})")]
    DivergentThreshold { argmax: f64, value: f64 },

    #[error("integration overflow at t = {t}")]
    StepOverflow { t: f64 },

    #[error("geodesic trace is empty")]
    EmptyTrace,

    #[error("no samples supplied")]
    EmptySamples,

    #[error("radius must be positive")]
    ZeroRadius,

    #[error("|grad r| = {norm} is not 1 within tolerance at {point:?}")]
    NotDistanceFunction { norm: f64, point: Vec<f64> },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub(crate) fn ensure_finite(what: &str, point: &[f64], values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(GeomError::NonFinite {
            what: what.to_string(),
            point: point.to_vec(),
        })
    }
}
