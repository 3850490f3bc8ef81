use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use cdsplit_core::chart::{BilinearForm, ChartDomain, DensitySpec, FdSteps, MetricSpec, ScalarField, VectorField};
use cdsplit_core::comparison::RadialModel;
use cdsplit_core::warped::{twisted_ricci_analytic, Fiber, SplitSpace, TwistedProduct, WarpingProfile};
use cdsplit_core::weighted::{linspace, SampleGrid};
use cdsplit_core::{GeomError, Result};

use crate::expr::Expr;
use crate::manifest::{DensityDecl, FiberDecl, Kind, Manifest};

pub enum Model {
    General { metric: MetricSpec, density: DensitySpec },
    Split(SplitSpace),
    Twisted { space: TwistedProduct, density: DensitySpec },
    Radial(RadialModel),
}

fn steps(m: &Manifest) -> FdSteps {
    FdSteps {
        first: m.numeric.fd_first,
        second: m.numeric.fd_second,
        ..FdSteps::default()
    }
}

/// Metric with symbolic first partials.
pub fn metric_from_exprs(gij: &[Vec<Expr>]) -> MetricSpec {
    let n = gij.len();
    let g: Arc<Vec<Expr>> = Arc::new(gij.iter().flatten().cloned().collect());
    let dg: Arc<Vec<Vec<Expr>>> = Arc::new((0..n).map(|k| g.iter().map(|e| e.diff(k)).collect()).collect());
    let g2 = g.clone();
    MetricSpec::new(n, move |p| DMatrix::from_fn(n, n, |i, j| g2[i * n + j].eval(p)))
        .with_partials(move |p| {
            dg.iter()
                .map(|d| DMatrix::from_fn(n, n, |i, j| d[i * n + j].eval(p)))
                .collect()
        })
}

fn profile(e: &Expr) -> WarpingProfile {
    let (v, d1) = (Arc::new(e.clone()), Arc::new(e.diff(0)));
    let d2 = Arc::new(d1.diff(0));
    WarpingProfile::new(move |r| v.eval(&[r]), move |r| d1.eval(&[r]), move |r| d2.eval(&[r]))
}

fn vector_field(xs: &[Expr]) -> VectorField {
    let n = xs.len();
    let comps = Arc::new(xs.to_vec());
    let jac: Arc<Vec<Expr>> = Arc::new((0..n * n).map(|k| xs[k / n].diff(k % n)).collect());
    VectorField::new(move |p| DVector::from_iterator(n, comps.iter().map(|e| e.eval(p))))
        .with_jacobian(move |p| DMatrix::from_fn(n, n, |i, j| jac[i * n + j].eval(p)))
}

fn density(decl: &DensityDecl, n: usize) -> DensitySpec {
    match decl {
        DensityDecl::None | DensityDecl::FiberPotential(_) => DensitySpec::zero(n),
        DensityDecl::Gradient(e) => DensitySpec::Gradient(e.to_field(n)),
        DensityDecl::Vector(xs) => DensitySpec::Vector(vector_field(xs)),
    }
}

fn fiber(decl: &FiberDecl, m: usize) -> Result<Fiber> {
    match decl {
        FiberDecl::Euclidean => Ok(Fiber::euclidean(m)),
        FiberDecl::Sphere { einstein } => Fiber::round_sphere(m, *einstein),
        FiberDecl::Torus { periods } => Fiber::flat_torus(periods.clone()),
        FiberDecl::Custom {
            gij,
            einstein,
            safe_min,
            safe_max,
        } => Fiber::custom(
            metric_from_exprs(gij),
            ChartDomain::new(safe_min.clone(), safe_max.clone())?,
            *einstein,
        ),
    }
}

impl Model {
    pub fn build(m: &Manifest) -> Result<Self> {
        let n = m.dim;
        Ok(match m.kind {
            Kind::General => Model::General {
                metric: metric_from_exprs(m.metric.as_ref().expect("validated")).with_steps(steps(m)),
                density: density(&m.density, n),
            },
            Kind::Split => {
                let fib = fiber(m.fiber.as_ref().expect("validated"), n - 1)?;
                let f_l = match &m.density {
                    DensityDecl::FiberPotential(e) => e.to_field(n - 1),
                    _ => ScalarField::constant(n - 1, 0.0),
                };
                let phi = profile(m.phi.as_ref().expect("validated"));
                Model::Split(SplitSpace::new(phi, fib, f_l).with_steps(steps(m)))
            }
            Kind::Twisted => {
                let fib = fiber(m.fiber.as_ref().expect("validated"), n - 1)?;
                let psi = m.psi.as_ref().expect("validated").to_field(n);
                Model::Twisted {
                    space: TwistedProduct::new(psi, fib).with_steps(steps(m)),
                    density: density(&m.density, n),
                }
            }
            Kind::RadialModel => Model::Radial(RadialModel::new(n, profile(m.radial_f.as_ref().expect("validated")))?),
        })
    }

    pub fn dim(&self) -> usize {
        self.metric().dim()
    }

    pub fn metric(&self) -> MetricSpec {
        match self {
            Model::General { metric, .. } => metric.clone(),
            Model::Split(s) => s.metric().clone(),
            Model::Twisted { space, .. } => space.metric().clone(),
            Model::Radial(r) => r.metric(),
        }
    }

    pub fn density(&self) -> DensitySpec {
        match self {
            Model::General { density, .. } | Model::Twisted { density, .. } => density.clone(),
            Model::Split(s) => s.density(),
            Model::Radial(r) => r.density(),
        }
    }

    /// Closed-form Ricci tensor where one is available.
    pub fn analytic_ricci(&self, p: &[f64]) -> Option<Result<BilinearForm>> {
        match self {
            Model::General { .. } => None,
            Model::Split(s) => Some(twisted_ricci_analytic(&s.as_twisted(), p)),
            Model::Twisted { space, .. } => Some(twisted_ricci_analytic(space, p)),
            Model::Radial(r) => Some(Ok(BilinearForm::zeros(r.dim()))),
        }
    }

    /// Analytic distance function: `r` on split spaces, `|x|` on radial models.
    pub fn distance_field(&self) -> Option<ScalarField> {
        match self {
            Model::Split(s) => Some(s.distance_field()),
            Model::Radial(r) => Some(r.distance_field()),
            _ => None,
        }
    }

    /// Box for random sampling.
    pub fn sample_box(&self, m: &Manifest) -> Result<ChartDomain> {
        if let Model::Radial(_) = self {
            return ChartDomain::cube(m.dim, m.grid.rho_min, m.grid.rho_max);
        }
        let (lo, hi) = m.fiber_box();
        let mut lower = vec![m.grid.r_min];
        let mut upper = vec![m.grid.r_max];
        lower.extend(lo);
        upper.extend(hi);
        ChartDomain::new(lower, upper)
    }

    /// Grid on which the curvature-dimension condition is decided.
    pub fn cd_grid(&self, m: &Manifest) -> Result<SampleGrid> {
        if let Model::Radial(_) = self {
            let mut pts = Vec::new();
            for rho in linspace(m.grid.rho_min, m.grid.rho_max, m.grid.rho_count) {
                for k in 0..m.dim {
                    for s in [1.0, -1.0] {
                        let mut x = vec![0.0; m.dim];
                        x[k] = s * rho;
                        pts.push(x);
                    }
                }
            }
            return Ok(SampleGrid::Points(pts));
        }
        let (lo, hi) = m.fiber_box();
        let fiber_box = ChartDomain::new(lo, hi)?;
        Ok(SampleGrid::split(
            m.grid.r_min,
            m.grid.r_max,
            m.grid.r_count,
            &fiber_box,
            m.grid.fiber_count,
        ))
    }
}

/// `GeomError` variants that mean a hypothesis was checked and failed, as
/// opposed to input that cannot be evaluated.
pub fn is_violation(e: &GeomError) -> bool {
    matches!(
        e,
        GeomError::Precondition(_) | GeomError::DivergentThreshold { .. } | GeomError::NotDistanceFunction { .. }
    )
}
