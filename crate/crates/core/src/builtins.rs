//! Ready-made test manifolds.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chart::{ScalarField, VectorField};
use crate::comparison::RadialModel;
use crate::error::Result;
use crate::warped::{Fiber, SplitSpace, TwistedProduct, WarpingProfile};

/// Radius of the `r` interval used by the random twisted products.
pub const TWISTED_R: f64 = 3.0;

/// `dr² + e^{2r} (dx² + dy²)`, hyperbolic 3-space with `Ric = -2g`.
pub fn hyperbolic3() -> TwistedProduct {
    let psi = ScalarField::new(|p| 2.0 * p[0])
        .with_gradient(|_| DVector::from_vec(vec![2.0, 0.0, 0.0]))
        .with_second_partials(|_| DMatrix::zeros(3, 3));
    TwistedProduct::new(psi, Fiber::euclidean(2))
}

/// The flat plane in polar coordinates, `dr² + r² dθ²` for `r > 0`.
pub fn polar_plane() -> TwistedProduct {
    let psi = ScalarField::new(|p| p[0].ln())
        .with_gradient(|p| DVector::from_vec(vec![1.0 / p[0], 0.0]))
        .with_second_partials(|p| DMatrix::from_row_slice(2, 2, &[-1.0 / (p[0] * p[0]), 0.0, 0.0, 0.0]));
    let fiber = Fiber::flat_torus(vec![std::f64::consts::TAU]).expect("positive period");
    TwistedProduct::with_r_range(psi, fiber, 0.0, f64::INFINITY)
}

/// `φ = sin r` over a round 2-sphere fiber with Einstein constant `einstein`.
pub fn sine_sphere(einstein: f64) -> Result<SplitSpace> {
    Ok(SplitSpace::unweighted_fiber(WarpingProfile::sine(1.0, 1.0, 0.0), Fiber::round_sphere(2, einstein)?))
}

/// `ψ = a sin r cos⟨b,y⟩ + c r² + r⟨d,y⟩` with seeded coefficients, over a
/// line fiber when `dim = 2` and a round sphere otherwise.
pub fn random_twisted(dim: usize, seed: u64) -> Result<TwistedProduct> {
    let m = dim.saturating_sub(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: f64 = rng.gen_range(0.2..0.6);
    let c: f64 = rng.gen_range(-0.3..0.3);
    let b: Vec<f64> = (0..m).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let d: Vec<f64> = (0..m).map(|_| rng.gen_range(-0.3..0.3)).collect();
    let fiber = if m == 1 {
        Fiber::euclidean(1)
    } else {
        Fiber::round_sphere(m, rng.gen_range(0.5..2.0))?
    };
    let dot = |u: &[f64], y: &[f64]| u.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let (b1, d1, b2, d2, b3, d3) = (b.clone(), d.clone(), b.clone(), d.clone(), b, d);
    let psi = ScalarField::new(move |p| {
        let (r, y) = (p[0], &p[1..]);
        a * r.sin() * dot(&b1, y).cos() + c * r * r + r * dot(&d1, y)
    })
    .with_gradient(move |p| {
        let (r, y) = (p[0], &p[1..]);
        let s = dot(&b2, y);
        let mut g = DVector::zeros(m + 1);
        g[0] = a * r.cos() * s.cos() + 2.0 * c * r + dot(&d2, y);
        for i in 0..m {
            g[i + 1] = -a * r.sin() * s.sin() * b2[i] + r * d2[i];
        }
        g
    })
    .with_second_partials(move |p| {
        let (r, y) = (p[0], &p[1..]);
        let s = dot(&b3, y);
        let mut h = DMatrix::zeros(m + 1, m + 1);
        h[(0, 0)] = -a * r.sin() * s.cos() + 2.0 * c;
        for i in 0..m {
            let v = -a * r.cos() * s.sin() * b3[i] + d3[i];
            h[(0, i + 1)] = v;
            h[(i + 1, 0)] = v;
            for j in 0..m {
                h[(i + 1, j + 1)] = -a * r.sin() * s.cos() * b3[i] * b3[j];
            }
        }
        h
    });
    Ok(TwistedProduct::with_r_range(psi, fiber, -TWISTED_R, TWISTED_R))
}

/// The vector-field example: `dr² + e^{2φ/(n-1)} g_{S^{n-1}}` with a small
/// `φ(r, y)` and `X = (2/(n-1)) ∂_rφ ∂_r + ((n-3)/(n-1)) ∇φ`, which is not a
/// gradient unless `n = 3` or `φ` is radial.
#[derive(Debug, Clone)]
pub struct VectorFieldExample {
    pub space: TwistedProduct,
    pub phi: ScalarField,
    pub field: VectorField,
}

/// `φ = ε (sin r + ½ cos r sin y¹ + ⅓ r y^{n-1})` on a unit-radius round
/// sphere fiber; needs `n ≥ 3`.
pub fn vector_field_example(n: usize, eps: f64) -> Result<VectorFieldExample> {
    let m = n - 1;
    let fiber = Fiber::round_sphere(m, m as f64 - 1.0)?;
    let last = m;
    let phi = ScalarField::new(move |p| eps * (p[0].sin() + 0.5 * p[0].cos() * p[1].sin() + p[0] * p[last] / 3.0))
        .with_gradient(move |p| {
            let mut g = DVector::zeros(n);
            g[0] = eps * (p[0].cos() - 0.5 * p[0].sin() * p[1].sin() + p[last] / 3.0);
            g[1] += eps * 0.5 * p[0].cos() * p[1].cos();
            g[last] += eps * p[0] / 3.0;
            g
        })
        .with_second_partials(move |p| {
            let mut h = DMatrix::zeros(n, n);
            h[(0, 0)] = eps * (-p[0].sin() - 0.5 * p[0].cos() * p[1].sin());
            h[(0, 1)] += -eps * 0.5 * p[0].sin() * p[1].cos();
            h[(0, last)] += eps / 3.0;
            h[(1, 1)] += -eps * 0.5 * p[0].cos() * p[1].sin();
            for i in 1..n {
                h[(i, 0)] = h[(0, i)];
            }
            h
        });
    let space = TwistedProduct::with_r_range(phi.clone(), fiber, -TWISTED_R, TWISTED_R);
    let (metric, phi_x) = (space.metric().clone(), phi.clone());
    let mf = m as f64;
    let field = VectorField::new(move |p| {
        let dphi = phi_x.analytic_gradient(p).expect("analytic gradient");
        let mut x = metric
            .sharp(p, &dphi)
            .unwrap_or_else(|_| DVector::from_element(p.len(), f64::NAN))
            * ((n as f64 - 3.0) / mf);
        x[0] += 2.0 / mf * dphi[0];
        x
    });
    Ok(VectorFieldExample { space, phi, field })
}

/// `f = ((n-1)/2) log(1 + ρ²)` on flat `ℝⁿ`.
pub fn radial_log_model(n: usize) -> RadialModel {
    RadialModel::log_model(n)
}
