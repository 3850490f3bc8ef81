//! Finite-range diagnostic for the growth of `∫_0^r e^{-2 f_γ/(n-1)} ds`.
//!
//! Completeness is a statement about all minimizing geodesics and `r → ∞`;
//! this samples finitely many directions to a finite length and reports what
//! it saw. It decides nothing.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::conserved::f_along_geodesic;
use super::integrate::geodesic_integrate;
use crate::chart::{DensitySpec, MetricSpec};
use crate::error::{GeomError, Result};
use crate::quadrature::{cumulative, integral_to};

pub const COMPLETENESS_NOTE: &str = "finite-range diagnostic: finitely many directions, finite length, \
minimality of the geodesics not checked; no limsup is claimed";

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionGrowth {
    pub direction: Vec<f64>,
    /// `I(r)` at each checkpoint; `None` past a truncation.
    pub values: Vec<Option<f64>>,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletenessTable {
    pub checkpoints: Vec<f64>,
    pub directions: Vec<DirectionGrowth>,
    /// Minimum over the directions that reached each checkpoint.
    pub min_per_checkpoint: Vec<Option<f64>>,
    pub note: &'static str,
}

/// Tabulate `I(r)` along geodesics from `y` in each direction at `checkpoints`
/// evenly spaced radii up to `r_max`.
pub fn completeness_diagnostic(
    spec: &MetricSpec,
    density: &DensitySpec,
    y: &[f64],
    directions: &[Vec<f64>],
    r_max: f64,
    dt: f64,
    checkpoints: usize,
) -> Result<CompletenessTable> {
    if !(r_max > 0.0) {
        return Err(GeomError::InvalidArgument(format!("r_max must be positive, got {r_max}")));
    }
    if directions.is_empty() || checkpoints == 0 {
        return Err(GeomError::EmptyGrid);
    }
    let m = spec.dim() as f64 - 1.0;
    let radii: Vec<f64> = (1..=checkpoints).map(|k| r_max * k as f64 / checkpoints as f64).collect();
    let rows: Vec<DirectionGrowth> = directions
        .par_iter()
        .map(|dir| {
            let trace = geodesic_integrate(spec, y, dir, r_max, dt)?;
            let fg = f_along_geodesic(spec, density, &trace)?;
            let ts: Vec<f64> = fg.iter().map(|(t, _)| *t).collect();
            let w: Vec<f64> = fg.iter().map(|(_, f)| (-2.0 * f / m).exp()).collect();
            let cum = cumulative(&ts, &w);
            let reach = *ts.last().expect("nonempty");
            let values = radii
                .iter()
                .map(|&r| {
                    if r > reach + 1e-12 || ts.len() < 3 {
                        None
                    } else {
                        Some(integral_to(&ts, &w, &cum, r))
                    }
                })
                .collect();
            Ok(DirectionGrowth {
                direction: dir.clone(),
                values,
                truncated: trace.truncated.is_some(),
            })
        })
        .collect::<Result<_>>()?;
    let min_per_checkpoint = (0..checkpoints)
        .map(|k| rows.iter().filter_map(|r| r.values[k]).reduce(f64::min))
        .collect();
    Ok(CompletenessTable {
        checkpoints: radii,
        directions: rows,
        min_per_checkpoint,
        note: COMPLETENESS_NOTE,
    })
}

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as f64;
    let mut inv = 1.0 / b;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base as u64) as f64 * inv;
        i /= base as u64;
        inv /= b;
    }
    out
}

/// `count` unit vectors (in `g` at `p`) spread over the unit sphere: a
/// Halton sequence with a seeded random shift, mapped to Gaussian vectors
/// by Box–Muller and pushed to the `g`-sphere by the inverse Cholesky factor.
pub fn default_directions(spec: &MetricSpec, p: &[f64], count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let n = spec.dim();
    if 2 * n > PRIMES.len() {
        return Err(GeomError::InvalidArgument(format!("direction sampling supports dimension ≤ {}", PRIMES.len() / 2)));
    }
    let chol = spec.factor(p)?;
    let lt = chol.l().transpose();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..2 * n).map(|_| rng.gen::<f64>()).collect();
    let mut out = Vec::with_capacity(count);
    let mut i = 1u64;
    while out.len() < count {
        let u: Vec<f64> = (0..2 * n)
            .map(|k| (radical_inverse(i, PRIMES[k]) + shift[k]).fract())
            .collect();
        i += 1;
        let z = DVector::from_fn(n, |k, _| {
            let (u1, u2) = (u[2 * k].max(1e-300), u[2 * k + 1]);
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        });
        let norm = z.norm();
        if !(norm > 1e-12) {
            continue;
        }
        let v = lt
            .solve_upper_triangular(&(z / norm))
            .ok_or_else(|| GeomError::SingularMetric { point: p.to_vec() })?;
        out.push(v.as_slice().to_vec());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::ScalarField;
    use nalgebra::DMatrix;

    #[test]
    fn directions_are_unit_for_the_metric() {
        let m = MetricSpec::new(2, |_| DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 0.5]));
        let dirs = default_directions(&m, &[0.0, 0.0], 16, 42).unwrap();
        assert_eq!(dirs.len(), 16);
        for d in &dirs {
            let v = DVector::from_column_slice(d);
            assert!((m.inner(&[0.0, 0.0], &v, &v).unwrap() - 1.0).abs() < 1e-12);
        }
        assert_eq!(dirs, default_directions(&m, &[0.0, 0.0], 16, 42).unwrap());
    }

    #[test]
    fn unweighted_growth_is_linear() {
        let m = MetricSpec::euclidean(2);
        let dirs = default_directions(&m, &[0.0, 0.0], 4, 1).unwrap();
        let t = completeness_diagnostic(&m, &DensitySpec::zero(2), &[0.0, 0.0], &dirs, 5.0, 1e-2, 5).unwrap();
        for (r, v) in t.checkpoints.iter().zip(&t.min_per_checkpoint) {
            assert!((v.unwrap() - r).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_potential_saturates() {
        let m = MetricSpec::euclidean(2);
        let f = DensitySpec::Gradient(ScalarField::coordinate(2, 0));
        let t = completeness_diagnostic(&m, &f, &[0.0, 0.0], &[vec![1.0, 0.0]], 6.0, 1e-3, 6).unwrap();
        for (r, v) in t.checkpoints.iter().zip(&t.min_per_checkpoint) {
            assert!((v.unwrap() - (1.0 - (-2.0 * r).exp()) / 2.0).abs() < 1e-10);
        }
    }
}
