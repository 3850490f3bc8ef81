use nalgebra::DVector;

use super::integrate::GeodesicTrace;
use crate::chart::{DensitySpec, MetricSpec};
use crate::error::{GeomError, Result};
use crate::quadrature::cumulative;
use crate::warped::SplitSpace;

#[derive(Debug, Clone, PartialEq)]
pub struct ClairautReport {
    /// `v(r)⁴ g_L(ẏ, ẏ)` at every sample, `v = e^{φ/(n-1)}`.
    pub values: Vec<f64>,
    pub initial: f64,
    /// `max |C(t) - C(0)| / |C(0)|`, or the absolute drift when `C(0) = 0`.
    pub drift: f64,
}

/// The conserved quantity `(v∘γ₁)⁴ g_L(γ̇₂, γ̇₂)` of a warped-product geodesic.
pub fn clairaut_constant(split: &SplitSpace, trace: &GeodesicTrace) -> Result<ClairautReport> {
    if trace.is_empty() {
        return Err(GeomError::EmptyTrace);
    }
    let fib = split.fiber().metric();
    let values: Vec<f64> = trace
        .samples
        .iter()
        .map(|s| {
            let v = split.warping_factor(s.position[0]);
            let ydot = DVector::from_column_slice(&s.velocity[1..]);
            Ok(v.powi(4) * fib.inner(&s.position[1..], &ydot, &ydot)?)
        })
        .collect::<Result<_>>()?;
    let initial = values[0];
    let worst = values.iter().map(|c| (c - initial).abs()).fold(0.0, f64::max);
    let drift = if initial == 0.0 { worst } else { worst / initial.abs() };
    Ok(ClairautReport {
        values,
        initial,
        drift,
    })
}

/// Length of the fiber projection `γ₂` measured in `g_L`.
pub fn fiber_length(split: &SplitSpace, trace: &GeodesicTrace) -> Result<f64> {
    if trace.is_empty() {
        return Err(GeomError::EmptyTrace);
    }
    let fib = split.fiber().metric();
    let speeds: Vec<f64> = trace
        .samples
        .iter()
        .map(|s| {
            let ydot = DVector::from_column_slice(&s.velocity[1..]);
            Ok(fib.inner(&s.position[1..], &ydot, &ydot)?.max(0.0).sqrt())
        })
        .collect::<Result<_>>()?;
    Ok(*cumulative(&trace.times(), &speeds).last().expect("nonempty"))
}

/// `f_γ(t) = ∫_0^t g(γ̇, X) ds` (with `X = ∇f` for a potential), by
/// cumulative Simpson quadrature on the integrator's time grid.
pub fn f_along_geodesic(spec: &MetricSpec, density: &DensitySpec, trace: &GeodesicTrace) -> Result<Vec<(f64, f64)>> {
    if trace.is_empty() {
        return Err(GeomError::EmptyTrace);
    }
    let d = spec.differ();
    let integrand: Vec<f64> = trace
        .samples
        .iter()
        .map(|s| {
            let v = DVector::from_column_slice(&s.velocity);
            match density {
                DensitySpec::Gradient(f) => Ok(f.partials(&s.position, &d)?.dot(&v)),
                DensitySpec::Vector(x) => {
                    let xv = x.at(&s.position)?;
                    spec.inner(&s.position, &v, &xv)
                }
            }
        })
        .collect::<Result<_>>()?;
    let ts = trace.times();
    let cum = cumulative(&ts, &integrand);
    Ok(ts.into_iter().zip(cum).collect())
}
