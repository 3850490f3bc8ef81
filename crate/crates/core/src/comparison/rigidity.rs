use nalgebra::DVector;
use rayon::prelude::*;

use super::bochner::NESTED_STEP;
use crate::chart::{
    drift, gradient, hessian_scalar, weighted_laplacian, BilinearForm, DensitySpec, FdSteps, MetricSpec, ScalarField,
};
use crate::error::{GeomError, Result};
use crate::geodesic::{f_along_geodesic, GeodesicTrace};
use crate::warped::SplitSpace;
use crate::weighted::{generalized_ricci_gradient, ExtendedReal, SampleGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiComparisonSample {
    pub t: f64,
    /// `λ = v² Δ_f r` along the geodesic, `v = e^{f_γ/(n-1)}`.
    pub lambda: f64,
    pub lambda_dot: f64,
    /// `λ' + λ²/(v²(n-1))`; non-positive when the comparison holds.
    pub residual: f64,
}

/// Evaluate the Riccati inequality for `λ = v² Δ_f r` along a unit-speed
/// geodesic that is an integral curve of `∇r`. `λ'` is assembled from
/// `v²' = (2/(n-1)) v² g(γ̇, X)` and a nested difference of `Δ_f r`.
pub fn riccati_comparison_trace(
    spec: &MetricSpec,
    density: &DensitySpec,
    r: &ScalarField,
    trace: &GeodesicTrace,
) -> Result<Vec<RiccatiComparisonSample>> {
    let m = spec.dim() as f64 - 1.0;
    let f_gamma = f_along_geodesic(spec, density, trace)?;
    let fine = spec.clone().with_steps(FdSteps::nested(NESTED_STEP));
    let d = fine.differ();
    let lap_f = |x: &[f64]| weighted_laplacian(&fine, density, r, x).unwrap_or(f64::NAN);
    trace
        .samples
        .par_iter()
        .zip(f_gamma.par_iter())
        .map(|(s, (_, fg))| {
            let x = &s.position;
            let vel = DVector::from_column_slice(&s.velocity);
            let v_sq = (2.0 * fg / m).exp();
            let lap = weighted_laplacian(&fine, density, r, x)?;
            let lap_dot = d.gradient(&lap_f, x)?.dot(&vel);
            let along = spec.inner(x, &vel, &drift(spec, density, x)?)?;
            let lambda = v_sq * lap;
            let lambda_dot = 2.0 / m * v_sq * along * lap + v_sq * lap_dot;
            Ok(RiccatiComparisonSample {
                t: s.t,
                lambda,
                lambda_dot,
                residual: lambda_dot + lambda * lambda / (v_sq * m),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RigidityReport {
    /// `max ||∇r| - 1|`.
    pub grad_deviation: f64,
    /// `max |Δ_f r|`.
    pub lap_f: f64,
    /// `max |Hess r - (g(∇f,∇r)/(n-1))(g - dr⊗dr)|` in an orthonormal frame.
    pub hess_residual: f64,
    /// `max |Ric_f^1(∂r, ∂r)|`.
    pub ricci_radial: f64,
    /// `max |Δ_f b|` for both Busemann functions `b = ±r`.
    pub busemann: f64,
    pub points: usize,
}

/// Check the split-space identities for `r` at each grid point.
pub fn rigidity_check(split: &SplitSpace, grid: &SampleGrid) -> Result<RigidityReport> {
    let pts = grid.points()?;
    if pts.is_empty() {
        return Err(GeomError::EmptyGrid);
    }
    let spec = split.metric();
    let density = split.density();
    let f = split.potential();
    let r = split.distance_field();
    let minus_r = r.scaled(-1.0);
    let m = split.dim() as f64 - 1.0;
    let rows: Vec<[f64; 5]> = pts
        .par_iter()
        .map(|p| {
            let g = spec.components(p)?;
            let nr = gradient(spec, &r, p)?;
            let dr = r.partials(p, &spec.differ())?;
            let grad_dev = (nr.dot(&dr).max(0.0).sqrt() - 1.0).abs();
            let lap = weighted_laplacian(spec, &density, &r, p)?;
            let df_r = f.partials(p, &spec.differ())?.dot(&nr);
            let model = BilinearForm::from_matrix(g.clone()).sub(&BilinearForm::outer(&dr)).scale(df_r / m);
            let chol = spec.factor(p)?;
            let hess = hessian_scalar(spec, &r, p)?;
            let hres = hess.sub(&model).whitened(&chol).amax();
            let ric = generalized_ricci_gradient(spec, &f, ExtendedReal::Finite(1.0), p)?;
            let ric_rr = ric.eval(&nr, &nr);
            let b_plus = weighted_laplacian(spec, &density, &r, p)?;
            let b_minus = weighted_laplacian(spec, &density, &minus_r, p)?;
            Ok([grad_dev, lap.abs(), hres, ric_rr.abs(), b_plus.abs().max(b_minus.abs())])
        })
        .collect::<Result<_>>()?;
    let col = |k: usize| rows.iter().map(|r| r[k]).fold(0.0, f64::max);
    Ok(RigidityReport {
        grad_deviation: col(0),
        lap_f: col(1),
        hess_residual: col(2),
        ricci_radial: col(3),
        busemann: col(4),
        points: rows.len(),
    })
}
