//! Radial densities `f(|x|)` on flat `ℝⁿ` and the Laplacian comparison along rays.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::bound::{comparison_bound, v_integral};
use crate::chart::{weighted_laplacian, DensitySpec, MetricSpec, ScalarField};
use crate::error::{GeomError, Result};
use crate::warped::WarpingProfile;
use crate::weighted::{cd_verify, ExtendedReal, SampleGrid, TOL_CD};

/// Quadrature spacing for the bound's integral along the ray.
const RAY_STEP: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct RadialModel {
    n: usize,
    f: WarpingProfile,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonSample {
    pub r: f64,
    /// `Δ_f r = (n-1)/ρ - f'(ρ)`.
    pub lap_f_r: f64,
    /// The same through the numerical weighted Laplacian of `|x|`.
    pub lap_f_r_numeric: f64,
    pub bound: f64,
    pub slack: f64,
    pub v_integral: f64,
}

impl RadialModel {
    /// `f` as a function of `ρ = |x|` with its first two derivatives.
    pub fn new(n: usize, f: WarpingProfile) -> Result<Self> {
        if n < 2 {
            return Err(GeomError::InvalidArgument("dimension must be at least 2".into()));
        }
        Ok(Self { n, f })
    }

    /// `f = ((n-1)/2) log(1 + ρ²)`.
    pub fn log_model(n: usize) -> Self {
        let c = (n as f64 - 1.0) / 2.0;
        let f = WarpingProfile::new(
            move |r| c * (1.0 + r * r).ln(),
            move |r| 2.0 * c * r / (1.0 + r * r),
            move |r| 2.0 * c * (1.0 - r * r) / ((1.0 + r * r) * (1.0 + r * r)),
        );
        Self { n, f }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn profile(&self) -> &WarpingProfile {
        &self.f
    }

    pub fn metric(&self) -> MetricSpec {
        MetricSpec::euclidean(self.n)
    }

    pub fn potential(&self) -> ScalarField {
        radial_field(self.n, self.f.clone())
    }

    pub fn density(&self) -> DensitySpec {
        DensitySpec::Gradient(self.potential())
    }

    /// `ρ = |x|`.
    pub fn distance_field(&self) -> ScalarField {
        radial_field(self.n, WarpingProfile::linear(1.0, 0.0))
    }

    /// `(n-1)/ρ - f'(ρ)`.
    pub fn lap_f_r(&self, rho: f64) -> f64 {
        (self.n as f64 - 1.0) / rho - self.f.d1(rho)
    }
}

/// `x ↦ u(|x|)` with its gradient and Hessian; valid away from the origin.
pub fn radial_field(n: usize, u: WarpingProfile) -> ScalarField {
    let (a, b, c) = (u.clone(), u.clone(), u);
    let norm = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().sqrt();
    ScalarField::new(move |x| a.value(norm(x)))
        .with_gradient(move |x| {
            let rho = norm(x);
            DVector::from_column_slice(x) * (b.d1(rho) / rho)
        })
        .with_second_partials(move |x| {
            let rho = norm(x);
            let e = DVector::from_column_slice(x) / rho;
            let radial = &e * e.transpose();
            let tangential = DMatrix::identity(n, n) - &radial;
            radial * c.d2(rho) + tangential * (c.d1(rho) / rho)
        })
}

/// Laplacian comparison along the ray `t e₁`, `0 ≤ t ≤ ρ`, at each radius.
/// Refuses unless CD(0,1) holds at sampled points on every radius.
pub fn radial_comparison_check(model: &RadialModel, rho_grid: &[f64]) -> Result<Vec<ComparisonSample>> {
    if rho_grid.is_empty() {
        return Err(GeomError::EmptyGrid);
    }
    if let Some(r) = rho_grid.iter().find(|r| !(**r > 0.0)) {
        return Err(GeomError::Precondition(format!("radii must be positive, got {r}")));
    }
    let n = model.dim();
    let metric = model.metric();
    let density = model.density();
    // a few directions per radius
    let mut pts = Vec::new();
    for &rho in rho_grid {
        for k in 0..n {
            let mut x = vec![0.0; n];
            x[k] = rho;
            pts.push(x.clone());
            x[k] = -rho;
            pts.push(x);
        }
    }
    let cd = cd_verify(&metric, &density, 0.0, ExtendedReal::Finite(1.0), &SampleGrid::Points(pts), TOL_CD)?;
    if !cd.passed() {
        return Err(GeomError::Precondition(format!(
            "the density is not CD(0,1): smallest eigenvalue {:e} at {:?}",
            cd.min, cd.witness
        )));
    }
    let dist = model.distance_field();
    rho_grid
        .par_iter()
        .map(|&rho| {
            let count = ((rho / RAY_STEP).ceil() as usize).max(2);
            let count = count + count % 2;
            let f_samples: Vec<(f64, f64)> = (0..=count)
                .map(|i| {
                    let t = if i == count { rho } else { rho * i as f64 / count as f64 };
                    (t, model.profile().value(t))
                })
                .collect();
            let bound = comparison_bound(&f_samples, n, rho)?;
            let lap = model.lap_f_r(rho);
            let mut x = vec![0.0; n];
            x[0] = rho;
            let lap_num = weighted_laplacian(&metric, &density, &dist, &x)?;
            Ok(ComparisonSample {
                r: rho,
                lap_f_r: lap,
                lap_f_r_numeric: lap_num,
                bound,
                slack: bound - lap,
                v_integral: v_integral(&f_samples, n, rho)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weighted::linspace;

    #[test]
    fn unweighted_equality() {
        let m = RadialModel::new(3, WarpingProfile::constant(0.0)).unwrap();
        let s = radial_comparison_check(&m, &[0.5, 1.0, 4.0]).unwrap();
        for c in s {
            assert!((c.lap_f_r - 2.0 / c.r).abs() < 1e-15);
            assert_eq!(c.bound, 2.0 / c.r);
            assert!(c.slack.abs() < 1e-15);
            assert!((c.lap_f_r_numeric - c.lap_f_r).abs() < 1e-9);
        }
    }

    #[test]
    fn log_model_slack_matches_closed_form() {
        let m = RadialModel::log_model(3);
        let grid = linspace(0.1, 10.0, 12);
        for c in radial_comparison_check(&m, &grid).unwrap() {
            let rho = c.r;
            let exact = 2.0 / ((1.0 + rho * rho) * rho.atan());
            assert!((c.bound - exact).abs() < 1e-10 * exact, "{rho}");
            assert!(c.slack > 0.0);
            assert!((c.v_integral - rho.atan()).abs() < 1e-12);
        }
    }

    #[test]
    fn concave_quadratic_is_refused() {
        let m = RadialModel::new(3, WarpingProfile::new(|r| -r * r, |r| -2.0 * r, |_| -2.0)).unwrap();
        assert!(matches!(radial_comparison_check(&m, &[1.0]), Err(GeomError::Precondition(_))));
    }
}
