use crate::chart::{drift, hessian_scalar, DensitySpec, MetricSpec, ScalarField};
use crate::error::Result;
use crate::warped::SplitSpace;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanCurvature {
    /// `H = div ν` for `ν = ∇u/|∇u|`.
    pub mean: f64,
    /// `H_f = H - g(∇f, ν)` (or `H - g(X, ν)`).
    pub weighted: f64,
}

/// Mean curvature of the level set of `u` through `p`, with respect to the
/// unit normal `∇u/|∇u|`.
pub fn level_set_mean_curvature(
    spec: &MetricSpec,
    density: &DensitySpec,
    u: &ScalarField,
    p: &[f64],
) -> Result<MeanCurvature> {
    let d = spec.differ();
    let du = u.partials(p, &d)?;
    let grad = spec.sharp(p, &du)?;
    let norm = du.dot(&grad).sqrt();
    let nu = &grad / norm;
    let hess = hessian_scalar(spec, u, p)?;
    let g_inv = spec.inverse(p)?;
    let lap = g_inv.component_mul(hess.matrix()).sum();
    let mean = (lap - hess.eval(&nu, &nu)) / norm;
    let w = drift(spec, density, p)?;
    let g = spec.components(p)?;
    let weighted = mean - nu.dot(&(g * w));
    Ok(MeanCurvature { mean, weighted })
}

/// `H` and `H_f` of the slice `{r = r0}` of a split space at fiber point `y`.
pub fn weighted_mean_curvature(split: &SplitSpace, r0: f64, y: &[f64]) -> Result<MeanCurvature> {
    let mut p = vec![r0];
    p.extend_from_slice(y);
    level_set_mean_curvature(split.metric(), &split.density(), &split.distance_field(), &p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warped::{Fiber, WarpingProfile};

    #[test]
    fn split_space_slices_are_weighted_minimal() {
        let s = SplitSpace::unweighted_fiber(WarpingProfile::sine(1.0, 1.0, 0.0), Fiber::round_sphere(2, 1.0).unwrap());
        for r0 in [-2.0, 0.0, 0.7] {
            let h = weighted_mean_curvature(&s, r0, &[0.3, -0.1]).unwrap();
            assert!((h.mean - r0.cos()).abs() < 1e-10);
            assert!(h.weighted.abs() < 1e-10);
        }
    }

    #[test]
    fn linear_profile_without_density() {
        let s = SplitSpace::unweighted_fiber(WarpingProfile::linear(2.0, 0.0), Fiber::euclidean(2));
        let metric = s.metric().clone();
        let h = level_set_mean_curvature(&metric, &DensitySpec::zero(3), &s.distance_field(), &[0.5, 0.0, 0.0])
            .unwrap();
        assert!((h.mean - 2.0).abs() < 1e-10 && (h.weighted - 2.0).abs() < 1e-10);
    }

    #[test]
    fn product_is_minimal() {
        let s = SplitSpace::unweighted_fiber(WarpingProfile::constant(0.0), Fiber::euclidean(2));
        let h = weighted_mean_curvature(&s, 1.0, &[0.0, 0.0]).unwrap();
        assert!(h.mean.abs() < 1e-12 && h.weighted.abs() < 1e-12);
    }
}
