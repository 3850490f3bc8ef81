use std::fmt;
use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, Dyn, SymmetricEigen};

use crate::chart::{
    christoffel, drift, lie_derivative_metric, ricci_numeric, BilinearForm, DensitySpec, MetricSpec, ScalarField,
    VectorField,
};
use crate::chart::operators::hessian_from_parts;
use crate::error::{GeomError, Result};

/// The dimension parameter `N ∈ (-∞, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    PosInfinity,
}

impl ExtendedReal {
    /// `1/(N - n)`, or 0 for `N = ∞`.
    pub fn inverse_gap(self, n: usize) -> Result<f64> {
        match self {
            ExtendedReal::PosInfinity => Ok(0.0),
            ExtendedReal::Finite(v) if v == n as f64 => Err(GeomError::DimensionClash { n }),
            ExtendedReal::Finite(v) => Ok(1.0 / (v - n as f64)),
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }
}

impl From<f64> for ExtendedReal {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY {
            ExtendedReal::PosInfinity
        } else {
            ExtendedReal::Finite(v)
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::PosInfinity => write!(f, "inf"),
        }
    }
}

impl FromStr for ExtendedReal {
    type Err = GeomError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "+inf" | "infinity" | "+infinity" | "∞" => Ok(ExtendedReal::PosInfinity),
            t => match t.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(ExtendedReal::Finite(v)),
                _ => Err(GeomError::InvalidArgument(format!("not a finite number or 'inf': {t:?}"))),
            },
        }
    }
}

/// `Ric + Hess f - df⊗df/(N-n)`.
pub fn generalized_ricci_gradient(
    spec: &MetricSpec,
    f: &ScalarField,
    n_param: ExtendedReal,
    p: &[f64],
) -> Result<BilinearForm> {
    let inv = n_param.inverse_gap(spec.dim())?;
    let ric = ricci_numeric(spec, p)?;
    let d = spec.differ();
    let gamma = christoffel(spec, p)?;
    let df = f.partials(p, &d)?;
    let hess = hessian_from_parts(&gamma, &df, &f.second_partials(p, &d)?);
    Ok(ric.add(&hess).sub(&BilinearForm::outer(&df).scale(inv)))
}

/// `Ric + ½ L_X g - X♭⊗X♭/(N-n)`.
pub fn generalized_ricci_vector(
    spec: &MetricSpec,
    x: &VectorField,
    n_param: ExtendedReal,
    p: &[f64],
) -> Result<BilinearForm> {
    let inv = n_param.inverse_gap(spec.dim())?;
    let ric = ricci_numeric(spec, p)?;
    let lie = lie_derivative_metric(spec, x, p)?;
    let flat = spec.components(p)? * x.at(p)?;
    Ok(ric.add(&lie.scale(0.5)).sub(&BilinearForm::outer(&flat).scale(inv)))
}

/// Dispatch on the density variant.
pub fn generalized_ricci(
    spec: &MetricSpec,
    density: &DensitySpec,
    n_param: ExtendedReal,
    p: &[f64],
) -> Result<BilinearForm> {
    match density {
        DensitySpec::Gradient(f) => generalized_ricci_gradient(spec, f, n_param, p),
        DensitySpec::Vector(x) => generalized_ricci_vector(spec, x, n_param, p),
    }
}

/// `Ric_X^N` for the drift `X` of any density, with the drift given as a
/// plain vector field (used to compare gradient and vector forms).
pub fn drift_field(spec: &MetricSpec, density: &DensitySpec) -> VectorField {
    let (spec, density) = (spec.clone(), density.clone());
    VectorField::new(move |p| {
        drift(&spec, &density, p).unwrap_or_else(|_| nalgebra::DVector::from_element(p.len(), f64::NAN))
    })
}

/// Smallest `μ` with `form·v = μ·metric·v`.
pub fn min_relative_eigenvalue(form: &BilinearForm, metric: &BilinearForm) -> Result<f64> {
    let chol = Cholesky::new(metric.matrix().clone()).ok_or_else(|| GeomError::SingularMetric { point: vec![] })?;
    Ok(min_whitened_eigenvalue(form, &chol))
}

pub(crate) fn min_whitened_eigenvalue(form: &BilinearForm, chol: &Cholesky<f64, Dyn>) -> f64 {
    let w: DMatrix<f64> = form.whitened(chol);
    SymmetricEigen::new(w).eigenvalues.min()
}
