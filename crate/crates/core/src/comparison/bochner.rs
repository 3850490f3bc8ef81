//! Weighted Bochner formula and the Riccati-type inequality for distance functions.
//!
//! Third derivatives of `h` enter through `Δ_f |∇h|²` and `∇Δ_f h`; those
//! are nested finite differences at a uniform step of `1e-3`.

use nalgebra::DVector;

use crate::chart::{
    christoffel, drift, hessian_norm_sq, hessian_scalar, operators::hessian_from_parts, weighted_laplacian,
    DensitySpec, FdSteps, MetricSpec, ScalarField,
};
use crate::error::{ensure_finite, GeomError, Result};
use crate::weighted::{generalized_ricci, ExtendedReal};

/// Step used by every nested difference here.
pub const NESTED_STEP: f64 = 1e-3;

/// Tolerance on `|∇r| = 1` for a distance function.
pub const DISTANCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BochnerTerms {
    /// `½ Δ_f |∇h|²`.
    pub lhs: f64,
    pub hess_sq: f64,
    /// `Ric_f^∞(∇h, ∇h)`.
    pub ricci: f64,
    /// `g(∇h, ∇Δ_f h)`.
    pub gradient_term: f64,
    pub residual: f64,
}

struct Pieces {
    half_lap_grad_sq: f64,
    lap_f_h: f64,
    grad_h: DVector<f64>,
    drift: DVector<f64>,
    gradient_term: f64,
    hess_sq: f64,
    ricci: f64,
}

fn nested(spec: &MetricSpec) -> MetricSpec {
    spec.clone().with_steps(FdSteps::nested(NESTED_STEP))
}

fn pieces(spec: &MetricSpec, density: &DensitySpec, h: &ScalarField, p: &[f64]) -> Result<Pieces> {
    let fine = nested(spec);
    let d = fine.differ();
    let grad_sq = |x: &[f64]| -> f64 {
        let go = || -> Result<f64> {
            let dh = h.partials(x, &d)?;
            Ok(dh.dot(&fine.sharp(x, &dh)?))
        };
        go().unwrap_or(f64::NAN)
    };
    let lap_f = |x: &[f64]| weighted_laplacian(&fine, density, h, x).unwrap_or(f64::NAN);

    // Δ_f of |∇h|² from its coordinate derivatives
    let dq = d.gradient(&grad_sq, p)?;
    let d2q = d.second_partials(&grad_sq, p)?;
    let gamma = christoffel(&fine, p)?;
    let g_inv = fine.inverse(p)?;
    let hess_q = hessian_from_parts(&gamma, &dq, &d2q);
    let w = drift(&fine, density, p)?;
    let lap_f_q = g_inv.component_mul(hess_q.matrix()).sum() - dq.dot(&w);

    let dh = h.partials(p, &d)?;
    let grad_h = &g_inv * &dh;
    let d_lap = d.gradient(&lap_f, p)?;
    let hess = hessian_scalar(&fine, h, p)?;
    let ric = generalized_ricci(&fine, density, ExtendedReal::PosInfinity, p)?;
    let out = Pieces {
        half_lap_grad_sq: 0.5 * lap_f_q,
        lap_f_h: lap_f(p),
        gradient_term: d_lap.dot(&grad_h),
        hess_sq: hessian_norm_sq(&fine, &hess, p)?,
        ricci: ric.eval(&grad_h, &grad_h),
        grad_h,
        drift: w,
    };
    ensure_finite(
        "bochner terms",
        p,
        &[out.half_lap_grad_sq, out.lap_f_h, out.gradient_term, out.hess_sq, out.ricci],
    )?;
    Ok(out)
}

/// Both sides of `½Δ_f|∇h|² = |Hess h|² + g(∇h, ∇Δ_f h) + Ric_f^∞(∇h, ∇h)`
/// (with `X` in place of `∇f` for a vector density) at `p`.
pub fn bochner_residual(spec: &MetricSpec, density: &DensitySpec, h: &ScalarField, p: &[f64]) -> Result<BochnerTerms> {
    let pc = pieces(spec, density, h, p)?;
    let rhs = pc.hess_sq + pc.gradient_term + pc.ricci;
    Ok(BochnerTerms {
        lhs: pc.half_lap_grad_sq,
        hess_sq: pc.hess_sq,
        ricci: pc.ricci,
        gradient_term: pc.gradient_term,
        residual: (pc.half_lap_grad_sq - rhs).abs(),
    })
}

/// `v²[½Δ_f|∇h|² - (Δ_f h)²/m - K|∇h|² - g(∇h, ∇Δ_f h) - (2/m) g(∇h, X) Δ_f h]`
/// for a distance function `h`, where `Ric_f^1(∇h, ∇h) ≥ K` is assumed,
/// `m = n - 1` and `v = e^{f(p)/m}` (`v = 1` for a vector density, whose
/// potential along a geodesic starts at `0`). Non-negative when the
/// inequality holds at `p`.
pub fn bochner_inequality_margin(
    spec: &MetricSpec,
    density: &DensitySpec,
    k: f64,
    m: f64,
    r: &ScalarField,
    p: &[f64],
) -> Result<f64> {
    if !(m > 0.0) {
        return Err(GeomError::InvalidArgument(format!("m must be positive, got {m}")));
    }
    let pc = pieces(spec, density, r, p)?;
    let g = spec.components(p)?;
    let norm_sq = pc.grad_h.dot(&(&g * &pc.grad_h));
    if (norm_sq.sqrt() - 1.0).abs() > DISTANCE_TOL {
        return Err(GeomError::NotDistanceFunction {
            norm: norm_sq.sqrt(),
            point: p.to_vec(),
        });
    }
    let v_sq = match density {
        DensitySpec::Gradient(f) => (2.0 * f.value(p) / m).exp(),
        DensitySpec::Vector(_) => 1.0,
    };
    let along = pc.grad_h.dot(&(&g * &pc.drift));
    let inner = pc.half_lap_grad_sq - pc.lap_f_h * pc.lap_f_h / m - k * norm_sq - pc.gradient_term
        - 2.0 / m * along * pc.lap_f_h;
    Ok(v_sq * inner)
}
