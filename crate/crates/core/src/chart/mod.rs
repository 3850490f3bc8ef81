//! Numerical tensor calculus on a single coordinate chart.

pub mod connection;
pub mod fd;
pub mod field;
pub mod metric;
pub mod operators;
pub mod point;

pub use connection::{christoffel, ricci_numeric, riemann_numeric, Christoffel, Riemann};
pub use fd::{Differ, FdSteps, FirstStencil};
pub use field::{DensitySpec, ScalarField, VectorField};
pub use metric::{BilinearForm, MetricSpec};
pub use operators::{
    drift, gradient, gradient_norm, hessian_norm_sq, hessian_scalar, laplacian, lie_derivative_metric,
    weighted_laplacian,
};
pub use point::{ChartDomain, ChartPoint};
