//! Weighted Laplacian comparison, Bochner formula and rigidity diagnostics.

pub mod bochner;
pub mod bound;
pub mod radial;
pub mod rigidity;

use std::io::Write;

pub use bochner::{bochner_inequality_margin, bochner_residual, BochnerTerms, DISTANCE_TOL, NESTED_STEP};
pub use bound::{comparison_bound, v_integral};
pub use radial::{radial_comparison_check, radial_field, ComparisonSample, RadialModel};
pub use rigidity::{riccati_comparison_trace, rigidity_check, RiccatiComparisonSample, RigidityReport};

use crate::error::Result;
use crate::export::write_csv;

/// Columns `r, lap_f_r, bound, slack, v_integral`.
pub fn write_comparison_csv<W: Write>(out: W, samples: &[ComparisonSample]) -> Result<()> {
    let header: Vec<String> = ["r", "lap_f_r", "bound", "slack", "v_integral"].iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<Option<f64>>> = samples
        .iter()
        .map(|s| vec![Some(s.r), Some(s.lap_f_r), Some(s.bound), Some(s.slack), Some(s.v_integral)])
        .collect();
    write_csv(out, &header, &rows)
}
