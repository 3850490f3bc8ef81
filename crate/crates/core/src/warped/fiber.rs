//! Fibers of warped and twisted products over the real line.

use nalgebra::{DMatrix, DVector};

use crate::chart::{ricci_numeric, BilinearForm, ChartDomain, MetricSpec};
use crate::error::{GeomError, Result};

const SPHERE_BOX: f64 = 3.0;
const EUCLIDEAN_BOX: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub enum FiberKind {
    Euclidean,
    /// Round sphere of constant Ricci curvature `einstein`, in a stereographic chart.
    RoundSphere { einstein: f64 },
    FlatTorus { periods: Vec<f64> },
    /// User-supplied metric; `einstein` records a known Einstein constant.
    Custom { einstein: Option<f64> },
}

/// A fiber metric `g_L` with the coordinate box in which it is sampled.
#[derive(Debug, Clone)]
pub struct Fiber {
    kind: FiberKind,
    metric: MetricSpec,
    safe_box: ChartDomain,
}

impl Fiber {
    /// Flat `ℝ^dim`, sampled in `[-10, 10]^dim`.
    pub fn euclidean(dim: usize) -> Self {
        let safe_box = ChartDomain::cube(dim, -EUCLIDEAN_BOX, EUCLIDEAN_BOX).expect("nonempty box");
        Self {
            kind: FiberKind::Euclidean,
            metric: MetricSpec::euclidean(dim).with_domain(safe_box.clone()),
            safe_box,
        }
    }

    /// Round `S^dim` with `Ric = einstein · g`, i.e. radius `sqrt((dim-1)/einstein)`,
    /// in the stereographic chart from the north pole, sampled in `[-3, 3]^dim`.
    pub fn round_sphere(dim: usize, einstein: f64) -> Result<Self> {
        if dim < 2 {
            return Err(GeomError::InvalidArgument(
                "a round sphere fiber with an Einstein constant needs dimension at least 2".into(),
            ));
        }
        if !(einstein > 0.0 && einstein.is_finite()) {
            return Err(GeomError::InvalidArgument(format!(
                "sphere Einstein constant must be positive, got {einstein}"
            )));
        }
        let radius_sq = (dim as f64 - 1.0) / einstein;
        let safe_box = ChartDomain::cube(dim, -SPHERE_BOX, SPHERE_BOX)?;
        let metric = MetricSpec::new(dim, move |y| {
            let s = sphere_factor(radius_sq, y);
            DMatrix::from_diagonal_element(dim, dim, s)
        })
        .with_partials(move |y| {
            let q: f64 = y.iter().map(|v| v * v).sum();
            let s = sphere_factor(radius_sq, y);
            (0..dim)
                .map(|k| DMatrix::from_diagonal_element(dim, dim, -4.0 * s * y[k] / (1.0 + q)))
                .collect()
        })
        .with_domain(safe_box.clone());
        Ok(Self {
            kind: FiberKind::RoundSphere { einstein },
            metric,
            safe_box,
        })
    }

    /// Flat torus `ℝ^dim / ∏ periods_i ℤ`, sampled over one fundamental box.
    pub fn flat_torus(periods: Vec<f64>) -> Result<Self> {
        if periods.is_empty() || periods.iter().any(|p| !(*p > 0.0 && p.is_finite())) {
            return Err(GeomError::InvalidArgument(format!(
                "torus periods must be positive, got {periods:?}"
            )));
        }
        let dim = periods.len();
        let safe_box = ChartDomain::new(vec![0.0; dim], periods.clone())?;
        Ok(Self {
            kind: FiberKind::FlatTorus { periods },
            metric: MetricSpec::euclidean(dim),
            safe_box,
        })
    }

    pub fn custom(metric: MetricSpec, safe_box: ChartDomain, einstein: Option<f64>) -> Result<Self> {
        if safe_box.dim() != metric.dim() {
            return Err(GeomError::DimensionMismatch {
                expected: metric.dim(),
                got: safe_box.dim(),
            });
        }
        Ok(Self {
            kind: FiberKind::Custom { einstein },
            metric,
            safe_box,
        })
    }

    pub fn with_safe_box(mut self, safe_box: ChartDomain) -> Result<Self> {
        if safe_box.dim() != self.dim() {
            return Err(GeomError::DimensionMismatch {
                expected: self.dim(),
                got: safe_box.dim(),
            });
        }
        self.safe_box = safe_box;
        Ok(self)
    }

    pub fn kind(&self) -> &FiberKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn metric(&self) -> &MetricSpec {
        &self.metric
    }

    pub fn safe_box(&self) -> &ChartDomain {
        &self.safe_box
    }

    /// Einstein constant when the fiber is known to be Einstein.
    pub fn einstein_constant(&self) -> Option<f64> {
        match &self.kind {
            FiberKind::Euclidean | FiberKind::FlatTorus { .. } => Some(0.0),
            FiberKind::RoundSphere { einstein } => Some(*einstein),
            FiberKind::Custom { einstein } => *einstein,
        }
    }

    /// Ricci tensor of `g_L` at `y`: closed form for built-ins, numerical otherwise.
    pub fn ricci(&self, y: &[f64]) -> Result<BilinearForm> {
        match &self.kind {
            FiberKind::Custom { einstein: None } => ricci_numeric(&self.metric, y),
            _ => {
                let lambda = self.einstein_constant().unwrap_or(0.0);
                Ok(BilinearForm::from_matrix(self.metric.components(y)? * lambda))
            }
        }
    }

    /// Riemannian distance between two fiber points, where known in closed form.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> Option<f64> {
        match &self.kind {
            FiberKind::Euclidean => Some(euclid(a, b)),
            FiberKind::FlatTorus { periods } => {
                let d2: f64 = a
                    .iter()
                    .zip(b)
                    .zip(periods)
                    .map(|((x, y), p)| {
                        let d = (x - y).rem_euclid(*p);
                        let d = d.min(p - d);
                        d * d
                    })
                    .sum();
                Some(d2.sqrt())
            }
            FiberKind::RoundSphere { einstein } => {
                let radius = ((self.dim() as f64 - 1.0) / einstein).sqrt();
                let ua = stereographic_to_unit(a);
                let ub = stereographic_to_unit(b);
                let diff = (&ua - &ub).norm();
                let sum = (&ua + &ub).norm();
                Some(radius * 2.0 * diff.atan2(sum))
            }
            FiberKind::Custom { .. } => None,
        }
    }
}

fn sphere_factor(radius_sq: f64, y: &[f64]) -> f64 {
    let q: f64 = y.iter().map(|v| v * v).sum();
    4.0 * radius_sq / ((1.0 + q) * (1.0 + q))
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Inverse stereographic projection onto the unit sphere in `ℝ^{m+1}`.
fn stereographic_to_unit(y: &[f64]) -> DVector<f64> {
    let q: f64 = y.iter().map(|v| v * v).sum();
    let mut u = DVector::zeros(y.len() + 1);
    for (k, v) in y.iter().enumerate() {
        u[k] = 2.0 * v / (1.0 + q);
    }
    u[y.len()] = (q - 1.0) / (q + 1.0);
    u
}
