use rayon::prelude::*;

use super::grid::SampleGrid;
use super::ricci::{generalized_ricci, min_whitened_eigenvalue, ExtendedReal};
use crate::chart::{DensitySpec, MetricSpec};
use crate::error::Result;

/// Default verdict tolerance.
pub const TOL_CD: f64 = 1e-7;

pub const SAMPLING_CAVEAT: &str = "sampled, not proven: a pass means no violation was found at the sampled \
points; the condition is not certified between them, the check is local to one chart, and nothing is \
assumed about completeness of the metric";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdSample {
    pub point: Vec<f64>,
    /// Smallest eigenvalue of `Ric^N - λg` relative to `g`.
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdReport {
    pub verdict: Verdict,
    /// `|min| ≤ tol`: the sampled minimum sits on the verdict boundary.
    pub boundary: bool,
    pub lambda: f64,
    pub n_param: ExtendedReal,
    pub tol: f64,
    pub min: f64,
    pub samples: Vec<CdSample>,
    pub witness: Vec<f64>,
    pub grid_spec: String,
    pub caveat: &'static str,
}

impl CdReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn verdict_label(&self) -> &'static str {
        match (self.verdict, self.boundary) {
            (Verdict::Pass, false) => "pass",
            (Verdict::Pass, true) => "pass (boundary)",
            (Verdict::Fail, _) => "fail",
        }
    }
}

/// Decide `Ric^N ≥ λ g` at every grid point. Points are evaluated in
/// parallel and reported in grid order.
pub fn cd_verify(
    spec: &MetricSpec,
    density: &DensitySpec,
    lambda: f64,
    n_param: ExtendedReal,
    grid: &SampleGrid,
    tol: f64,
) -> Result<CdReport> {
    n_param.inverse_gap(spec.dim())?;
    let points = grid.points()?;
    let samples: Vec<CdSample> = points
        .into_par_iter()
        .map(|p| {
            let ric = generalized_ricci(spec, density, n_param, &p)?;
            let g = spec.components(&p)?;
            let chol = spec.factor(&p)?;
            let shifted = ric.sub(&crate::chart::BilinearForm::from_matrix(g * lambda));
            let min_eigenvalue = min_whitened_eigenvalue(&shifted, &chol);
            Ok(CdSample { point: p, min_eigenvalue })
        })
        .collect::<Result<_>>()?;

    let mut best = 0;
    for (i, s) in samples.iter().enumerate() {
        if s.min_eigenvalue < samples[best].min_eigenvalue {
            best = i;
        }
    }
    let min = samples[best].min_eigenvalue;
    Ok(CdReport {
        verdict: if min >= -tol { Verdict::Pass } else { Verdict::Fail },
        boundary: min.abs() <= tol,
        lambda,
        n_param,
        tol,
        min,
        witness: samples[best].point.clone(),
        samples,
        grid_spec: grid.describe(),
        caveat: SAMPLING_CAVEAT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::ChartDomain;

    #[test]
    fn flat_plane_is_boundary_pass() {
        let grid = SampleGrid::random_in(&ChartDomain::cube(2, -1.0, 1.0).unwrap(), 20, 1);
        let rep = cd_verify(
            &MetricSpec::euclidean(2),
            &DensitySpec::zero(2),
            0.0,
            ExtendedReal::PosInfinity,
            &grid,
            TOL_CD,
        )
        .unwrap();
        assert!(rep.passed() && rep.boundary);
        assert_eq!(rep.verdict_label(), "pass (boundary)");
        assert_eq!(rep.samples.len(), 20);
    }

    #[test]
    fn witness_attains_minimum() {
        let grid = SampleGrid::Points(vec![vec![0.0, 0.0], vec![1.0, 0.0]]);
        let rep = cd_verify(
            &MetricSpec::euclidean(2),
            &DensitySpec::zero(2),
            1.0,
            ExtendedReal::PosInfinity,
            &grid,
            TOL_CD,
        )
        .unwrap();
        assert!(!rep.passed());
        assert!(rep.samples.iter().all(|s| s.min_eigenvalue >= rep.min));
        assert_eq!(rep.witness, vec![0.0, 0.0]);
    }
}
