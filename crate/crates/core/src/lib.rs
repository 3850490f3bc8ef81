//! Numerical verification of weighted Ricci curvature, curvature-dimension
//! conditions and the comparison geometry of manifolds with density.

pub mod builtins;
pub mod chart;
pub mod comparison;
pub mod error;
pub mod export;
pub mod geodesic;
pub mod quadrature;
pub mod warped;
pub mod weighted;

pub use error::{GeomError, Result};
