//! Hessians, Lie derivatives of the metric, gradients and (weighted) Laplacians.

use nalgebra::{DMatrix, DVector};

use super::connection::{christoffel, Christoffel};
use super::field::{DensitySpec, ScalarField, VectorField};
use super::metric::{BilinearForm, MetricSpec};
use super::point::check_dim;
use crate::error::{ensure_finite, Result};

/// `∂_i∂_j h − Γ^k_{ij} ∂_k h` from precomputed pieces.
pub fn hessian_from_parts(gamma: &Christoffel, dh: &DVector<f64>, d2h: &DMatrix<f64>) -> BilinearForm {
    let n = dh.len();
    let m = DMatrix::from_fn(n, n, |i, j| {
        d2h[(i, j)] - (0..n).map(|k| gamma.get(k, i, j) * dh[k]).sum::<f64>()
    });
    BilinearForm::from_matrix(m)
}

/// Covariant Hessian `(Hess h)_{ij} = ∂_i∂_j h − Γ^k_{ij} ∂_k h`.
pub fn hessian_scalar(spec: &MetricSpec, h: &ScalarField, p: &[f64]) -> Result<BilinearForm> {
    check_dim(spec.dim(), p)?;
    let d = spec.differ();
    let gamma = christoffel(spec, p)?;
    let dh = h.partials(p, &d)?;
    let d2h = h.second_partials(p, &d)?;
    let hess = hessian_from_parts(&gamma, &dh, &d2h);
    ensure_finite("hessian", p, hess.matrix().as_slice())?;
    Ok(hess)
}

/// `(L_X g)_{ij} = X^k ∂_k g_ij + g_kj ∂_i X^k + g_ik ∂_j X^k`.
pub fn lie_derivative_metric(spec: &MetricSpec, x: &VectorField, p: &[f64]) -> Result<BilinearForm> {
    check_dim(spec.dim(), p)?;
    let n = spec.dim();
    let g = spec.components(p)?;
    let dg = spec.partials(p)?;
    let xv = x.at(p)?;
    let jac = x.jacobian(p, &spec.differ())?;
    let mut out = DMatrix::zeros(n, n);
    for k in 0..n {
        out += &dg[k] * xv[k];
    }
    // g_kj ∂_i X^k = (Jᵀ g)_{ij}
    let jt_g = jac.transpose() * &g;
    out += &jt_g + jt_g.transpose();
    ensure_finite("lie derivative", p, out.as_slice())?;
    Ok(BilinearForm::from_matrix(out))
}

/// Contravariant gradient `∇h = g^{-1} dh`.
pub fn gradient(spec: &MetricSpec, h: &ScalarField, p: &[f64]) -> Result<DVector<f64>> {
    check_dim(spec.dim(), p)?;
    let dh = h.partials(p, &spec.differ())?;
    spec.sharp(p, &dh)
}

/// `|∇h|_g`.
pub fn gradient_norm(spec: &MetricSpec, h: &ScalarField, p: &[f64]) -> Result<f64> {
    let dh = h.partials(p, &spec.differ())?;
    let up = spec.sharp(p, &dh)?;
    Ok(dh.dot(&up).max(0.0).sqrt())
}

/// The drift vector of a density: `∇f` or `X`, contravariant.
pub fn drift(spec: &MetricSpec, density: &DensitySpec, p: &[f64]) -> Result<DVector<f64>> {
    match density {
        DensitySpec::Gradient(f) => gradient(spec, f, p),
        DensitySpec::Vector(x) => {
            check_dim(spec.dim(), p)?;
            x.at(p)
        }
    }
}

/// Laplace–Beltrami operator `Δh = tr_g Hess h`.
pub fn laplacian(spec: &MetricSpec, h: &ScalarField, p: &[f64]) -> Result<f64> {
    let hess = hessian_scalar(spec, h, p)?;
    let g_inv = spec.inverse(p)?;
    Ok(g_inv.component_mul(hess.matrix()).sum())
}

/// `Δ_f h = Δh − g(∇f, ∇h)` or `Δ_X h = Δh − dh(X)`.
pub fn weighted_laplacian(spec: &MetricSpec, density: &DensitySpec, h: &ScalarField, p: &[f64]) -> Result<f64> {
    let lap = laplacian(spec, h, p)?;
    let dh = h.partials(p, &spec.differ())?;
    let w = drift(spec, density, p)?;
    let v = lap - dh.dot(&w);
    ensure_finite("weighted laplacian", p, &[v])?;
    Ok(v)
}

/// `|Hess h|²` computed in a `g`-orthonormal frame.
pub fn hessian_norm_sq(spec: &MetricSpec, hess: &BilinearForm, p: &[f64]) -> Result<f64> {
    let chol = spec.factor(p)?;
    let w = hess.whitened(&chol);
    Ok(w.iter().map(|v| v * v).sum())
}
