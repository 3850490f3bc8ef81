use std::fmt;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::fd::{Differ, FdSteps};
use super::field::MatrixFn;
use super::point::{check_dim, ChartDomain};
use crate::error::{ensure_finite, GeomError, Result};

/// `∂_k g` for k = 0..n, in coordinate order.
pub type PartialsFn = dyn Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync;

const SYMMETRY_TOL: f64 = 1e-12;

/// A Riemannian metric on a single coordinate chart.
#[derive(Clone)]
pub struct MetricSpec {
    dim: usize,
    g: Arc<MatrixFn>,
    partials: Option<Arc<PartialsFn>>,
    domain: ChartDomain,
    steps: FdSteps,
}

impl fmt::Debug for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricSpec")
            .field("dim", &self.dim)
            .field("analytic_partials", &self.partials.is_some())
            .field("domain", &self.domain)
            .field("steps", &self.steps)
            .finish()
    }
}

impl MetricSpec {
    pub fn new(dim: usize, g: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        Self {
            dim,
            g: Arc::new(g),
            partials: None,
            domain: ChartDomain::unbounded(dim),
            steps: FdSteps::default(),
        }
    }

    /// Flat metric in Cartesian coordinates.
    pub fn euclidean(dim: usize) -> Self {
        Self::new(dim, move |_| DMatrix::identity(dim, dim))
            .with_partials(move |_| vec![DMatrix::zeros(dim, dim); dim])
    }

    pub fn with_partials(mut self, dg: impl Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync + 'static) -> Self {
        self.partials = Some(Arc::new(dg));
        self
    }

    pub fn without_partials(mut self) -> Self {
        self.partials = None;
        self
    }

    pub fn with_domain(mut self, domain: ChartDomain) -> Self {
        assert_eq!(domain.dim(), self.dim, "domain dimension must match metric dimension");
        self.domain = domain;
        self
    }

    pub fn with_steps(mut self, steps: FdSteps) -> Self {
        self.steps = steps;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &ChartDomain {
        &self.domain
    }

    pub fn steps(&self) -> FdSteps {
        self.steps
    }

    pub fn has_analytic_partials(&self) -> bool {
        self.partials.is_some()
    }

    pub fn differ(&self) -> Differ<'_> {
        Differ::new(&self.domain, self.steps)
    }

    /// Raw components `g_ij(p)`; checks dimension, domain, finiteness and
    /// symmetry but not definiteness.
    pub fn components(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        check_dim(self.dim, p)?;
        self.domain.check(p)?;
        let g = (self.g)(p);
        if g.nrows() != self.dim || g.ncols() != self.dim {
            return Err(GeomError::DimensionMismatch {
                expected: self.dim,
                got: g.nrows(),
            });
        }
        ensure_finite("metric", p, g.as_slice())?;
        let scale = g.amax().max(1.0);
        let asym = (&g - g.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(GeomError::AsymmetricMetric {
                point: p.to_vec(),
                asymmetry: asym,
            });
        }
        Ok(g)
    }

    /// Cholesky factor of `g(p)`; failure means the metric is not positive definite.
    pub fn factor(&self, p: &[f64]) -> Result<Cholesky<f64, Dyn>> {
        let g = self.components(p)?;
        cholesky(g, p)
    }

    pub fn inverse(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.factor(p)?.inverse())
    }

    /// `∂_k g_ij`, analytic when supplied.
    pub fn partials(&self, p: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        match &self.partials {
            Some(dg) => {
                check_dim(self.dim, p)?;
                self.domain.check(p)?;
                let dg = dg(p);
                for m in &dg {
                    ensure_finite("metric partials", p, m.as_slice())?;
                }
                Ok(dg)
            }
            None => self.fd_partials(p),
        }
    }

    /// Central-difference metric partials, ignoring any analytic partials.
    pub fn fd_partials(&self, p: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        check_dim(self.dim, p)?;
        let n = self.dim;
        let d = self.differ();
        let flat = |q: &[f64]| -> Result<Vec<f64>> { Ok(self.components(q)?.as_slice().to_vec()) };
        (0..n)
            .map(|k| {
                let v = d.d1_vec(&flat, p, k, self.steps.first, self.steps.first_stencil)?;
                Ok(DMatrix::from_column_slice(n, n, &v))
            })
            .collect()
    }

    /// Debug check: largest entry of `analytic − finite-difference` metric
    /// partials, relative to the partials' scale. `None` when no analytic
    /// partials are attached.
    pub fn partials_discrepancy(&self, p: &[f64]) -> Result<Option<f64>> {
        let Some(dg) = &self.partials else {
            return Ok(None);
        };
        let exact = dg(p);
        let fd = self.fd_partials(p)?;
        let mut worst = 0.0_f64;
        let mut scale = 1.0_f64;
        for (a, b) in exact.iter().zip(&fd) {
            worst = worst.max((a - b).amax());
            scale = scale.max(a.amax());
        }
        Ok(Some(worst / scale))
    }

    /// `g(u, w)` at `p`.
    pub fn inner(&self, p: &[f64], u: &DVector<f64>, w: &DVector<f64>) -> Result<f64> {
        let g = self.components(p)?;
        Ok(u.dot(&(g * w)))
    }

    /// Raise an index: `g^{-1} ω`.
    pub fn sharp(&self, p: &[f64], covector: &DVector<f64>) -> Result<DVector<f64>> {
        let chol = self.factor(p)?;
        Ok(chol.solve(covector))
    }
}

pub(crate) fn cholesky(g: DMatrix<f64>, p: &[f64]) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(g).ok_or_else(|| GeomError::SingularMetric { point: p.to_vec() })
}

/// A symmetric (0,2)-tensor at a point in chart components.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearForm(DMatrix<f64>);

impl BilinearForm {
    /// Symmetrize `m`. The caller is responsible for `m` being symmetric up
    /// to discretization noise.
    pub fn from_matrix(m: DMatrix<f64>) -> Self {
        assert!(m.is_square(), "bilinear form must be square");
        let s = (&m + m.transpose()) * 0.5;
        Self(s)
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn eval(&self, u: &DVector<f64>, w: &DVector<f64>) -> f64 {
        u.dot(&(&self.0 * w))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.amax()
    }

    pub fn add(&self, other: &BilinearForm) -> BilinearForm {
        BilinearForm(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &BilinearForm) -> BilinearForm {
        BilinearForm(&self.0 - &other.0)
    }

    pub fn scale(&self, s: f64) -> BilinearForm {
        BilinearForm(&self.0 * s)
    }

    /// `ω ⊗ ω`.
    pub fn outer(w: &DVector<f64>) -> BilinearForm {
        BilinearForm(w * w.transpose())
    }

    /// Components in a frame orthonormal for the metric with Cholesky factor
    /// `chol` (`L⁻¹ A L⁻ᵀ`).
    pub fn whitened(&self, chol: &Cholesky<f64, Dyn>) -> DMatrix<f64> {
        let l = chol.l();
        let a = l
            .solve_lower_triangular(&self.0)
            .expect("Cholesky factor is invertible");
        let b = l
            .solve_lower_triangular(&a.transpose())
            .expect("Cholesky factor is invertible");
        let w = b.transpose();
        (&w + w.transpose()) * 0.5
    }

    /// Largest entry of `self − other` in a `metric`-orthonormal frame,
    /// divided by `max(1, largest entry of other)` in the same frame.
    pub fn relative_error(&self, other: &BilinearForm, chol: &Cholesky<f64, Dyn>) -> f64 {
        let diff = self.sub(other).whitened(chol).amax();
        let scale = other.whitened(chol).amax().max(1.0);
        diff / scale
    }
}
