//! Geodesic integration, conserved quantities and line integrals of the density.

pub mod completeness;
pub mod conserved;
pub mod integrate;

use std::io::Write;

pub use completeness::{completeness_diagnostic, default_directions, CompletenessTable, DirectionGrowth};
pub use conserved::{clairaut_constant, f_along_geodesic, fiber_length, ClairautReport};
pub use integrate::{geodesic_integrate, normalize_velocity, GeodesicSample, GeodesicTrace};

use crate::error::Result;
use crate::export::write_csv;

/// CSV with columns `t, q0.., v0.., clairaut, f_gamma`; absent series are
/// left empty.
pub fn write_trace_csv<W: Write>(
    out: W,
    trace: &GeodesicTrace,
    clairaut: Option<&[f64]>,
    f_gamma: Option<&[(f64, f64)]>,
) -> Result<()> {
    let n = trace.samples.first().map_or(0, |s| s.position.len());
    let mut header = vec!["t".to_string()];
    header.extend((0..n).map(|k| format!("q{k}")));
    header.extend((0..n).map(|k| format!("v{k}")));
    header.push("clairaut".into());
    header.push("f_gamma".into());
    let rows: Vec<Vec<Option<f64>>> = trace
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut row = vec![Some(s.t)];
            row.extend(s.position.iter().map(|v| Some(*v)));
            row.extend(s.velocity.iter().map(|v| Some(*v)));
            row.push(clairaut.map(|c| c[i]));
            row.push(f_gamma.map(|f| f[i].1));
            row
        })
        .collect();
    write_csv(out, &header, &rows)
}
