//! Generalized Ricci tensors, curvature-dimension checks and weighted mean curvature.

pub mod cd;
pub mod grid;
pub mod mean_curvature;
pub mod ricci;

pub use cd::{cd_verify, CdReport, CdSample, Verdict, SAMPLING_CAVEAT, TOL_CD};
pub use grid::{cell_centers, linspace, SampleGrid};
pub use mean_curvature::{level_set_mean_curvature, weighted_mean_curvature, MeanCurvature};
pub use ricci::{
    drift_field, generalized_ricci, generalized_ricci_gradient, generalized_ricci_vector, min_relative_eigenvalue,
    ExtendedReal,
};
