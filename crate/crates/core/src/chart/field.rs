//! Scalar and vector fields on a chart, with optional analytic derivatives.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::fd::Differ;
use crate::error::{ensure_finite, GeomError, Result};

pub type ScalarFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
pub type VectorFn = dyn Fn(&[f64]) -> DVector<f64> + Send + Sync;
pub type MatrixFn = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync;

/// A real function of the chart coordinates. Analytic coordinate gradient and
/// second partials override finite differences when present.
#[derive(Clone)]
pub struct ScalarField {
    value: Arc<ScalarFn>,
    gradient: Option<Arc<VectorFn>>,
    second: Option<Arc<MatrixFn>>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("analytic_gradient", &self.gradient.is_some())
            .field("analytic_second", &self.second.is_some())
            .finish()
    }
}

impl ScalarField {
    pub fn new(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            value: Arc::new(f),
            gradient: None,
            second: None,
        }
    }

    pub fn with_gradient(mut self, g: impl Fn(&[f64]) -> DVector<f64> + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(g));
        self
    }

    pub fn with_second_partials(mut self, h: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        self.second = Some(Arc::new(h));
        self
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::new(move |_| c)
            .with_gradient(move |_| DVector::zeros(dim))
            .with_second_partials(move |_| DMatrix::zeros(dim, dim))
    }

    /// The coordinate function `p ↦ p[k]`.
    pub fn coordinate(dim: usize, k: usize) -> Self {
        Self::new(move |p| p[k])
            .with_gradient(move |_| {
                let mut g = DVector::zeros(dim);
                g[k] = 1.0;
                g
            })
            .with_second_partials(move |_| DMatrix::zeros(dim, dim))
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn has_analytic_second(&self) -> bool {
        self.second.is_some()
    }

    pub fn analytic_gradient(&self, p: &[f64]) -> Option<DVector<f64>> {
        self.gradient.as_ref().map(|g| g(p))
    }

    pub fn analytic_second(&self, p: &[f64]) -> Option<DMatrix<f64>> {
        self.second.as_ref().map(|h| h(p))
    }

    pub fn value(&self, p: &[f64]) -> f64 {
        (self.value)(p)
    }

    /// `f + c`, keeping analytic derivatives.
    pub fn shifted(&self, c: f64) -> Self {
        let v = self.value.clone();
        Self {
            value: Arc::new(move |p| v(p) + c),
            gradient: self.gradient.clone(),
            second: self.second.clone(),
        }
    }

    /// `s * f`, keeping analytic derivatives.
    pub fn scaled(&self, s: f64) -> Self {
        let v = self.value.clone();
        let g = self.gradient.clone();
        let h = self.second.clone();
        Self {
            value: Arc::new(move |p| s * v(p)),
            gradient: g.map(|g| Arc::new(move |p: &[f64]| g(p) * s) as Arc<VectorFn>),
            second: h.map(|h| Arc::new(move |p: &[f64]| h(p) * s) as Arc<MatrixFn>),
        }
    }

    /// Drop analytic derivatives so that every derivative is finite-differenced.
    pub fn numeric_only(&self) -> Self {
        Self {
            value: self.value.clone(),
            gradient: None,
            second: None,
        }
    }

    pub fn partials(&self, p: &[f64], d: &Differ<'_>) -> Result<DVector<f64>> {
        let g = match &self.gradient {
            Some(g) => g(p),
            None => d.gradient(&*self.value, p)?,
        };
        ensure_finite("scalar gradient", p, g.as_slice())?;
        Ok(g)
    }

    pub fn second_partials(&self, p: &[f64], d: &Differ<'_>) -> Result<DMatrix<f64>> {
        let h = match &self.second {
            Some(h) => h(p),
            None => d.second_partials(&*self.value, p)?,
        };
        ensure_finite("scalar second partials", p, h.as_slice())?;
        Ok(h)
    }

    /// Largest relative mismatch between the analytic gradient and a
    /// finite-difference gradient at `p`; `None` without an analytic gradient.
    pub fn gradient_discrepancy(&self, p: &[f64], d: &Differ<'_>) -> Result<Option<f64>> {
        let Some(g) = &self.gradient else {
            return Ok(None);
        };
        let exact = g(p);
        let fd = d.gradient(&*self.value, p)?;
        let scale = exact.amax().max(1.0);
        Ok(Some((exact - fd).amax() / scale))
    }
}

/// A vector field given by its contravariant components.
#[derive(Clone)]
pub struct VectorField {
    components: Arc<VectorFn>,
    /// `J[(k, i)] = ∂_i X^k`.
    jacobian: Option<Arc<MatrixFn>>,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorField")
            .field("analytic_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

impl VectorField {
    pub fn new(x: impl Fn(&[f64]) -> DVector<f64> + Send + Sync + 'static) -> Self {
        Self {
            components: Arc::new(x),
            jacobian: None,
        }
    }

    pub fn with_jacobian(mut self, j: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        self.jacobian = Some(Arc::new(j));
        self
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(move |_| DVector::zeros(dim)).with_jacobian(move |_| DMatrix::zeros(dim, dim))
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn at(&self, p: &[f64]) -> Result<DVector<f64>> {
        let x = (self.components)(p);
        ensure_finite("vector field", p, x.as_slice())?;
        Ok(x)
    }

    pub fn jacobian(&self, p: &[f64], d: &Differ<'_>) -> Result<DMatrix<f64>> {
        let n = p.len();
        let j = match &self.jacobian {
            Some(j) => j(p),
            None => {
                let comps = |q: &[f64]| -> Result<Vec<f64>> { Ok((self.components)(q).as_slice().to_vec()) };
                let mut j = DMatrix::zeros(n, n);
                for i in 0..n {
                    let col = d.d1_vec(&comps, p, i, d.steps.first, d.steps.first_stencil)?;
                    for k in 0..n {
                        j[(k, i)] = col[k];
                    }
                }
                j
            }
        };
        ensure_finite("vector field jacobian", p, j.as_slice())?;
        Ok(j)
    }
}

/// The weight of a manifold with density: a potential `f` or a drift field `X`.
#[derive(Debug, Clone)]
pub enum DensitySpec {
    Gradient(ScalarField),
    Vector(VectorField),
}

impl DensitySpec {
    pub fn zero(dim: usize) -> Self {
        DensitySpec::Gradient(ScalarField::constant(dim, 0.0))
    }

    pub fn potential(&self) -> Option<&ScalarField> {
        match self {
            DensitySpec::Gradient(f) => Some(f),
            DensitySpec::Vector(_) => None,
        }
    }

    /// Check that the analytic gradient of a potential agrees with finite
    /// differences to `tol` (relative) at each point.
    pub fn validate_gradient(&self, points: &[Vec<f64>], d: &Differ<'_>, tol: f64) -> Result<()> {
        let DensitySpec::Gradient(f) = self else {
            return Ok(());
        };
        for p in points {
            let v = f.value(p);
            ensure_finite("density", p, &[v])?;
            if let Some(err) = f.gradient_discrepancy(p, d)? {
                if err > tol {
                    return Err(GeomError::Precondition(format!(
                        "analytic gradient of the potential disagrees with finite differences by {err:e} at {p:?}"
                    )));
                }
            }
        }
        Ok(())
    }
}
