//! Twisted products `dr² + e^{2ψ/(n-1)} h_L` over an interval of the real line.

use nalgebra::DMatrix;

use super::fiber::Fiber;
use crate::chart::{christoffel, BilinearForm, ChartDomain, FdSteps, MetricSpec, ScalarField};
use crate::error::{GeomError, Result};

/// `dr² + e^{2ψ(r,y)/m} h_L(y)` on `(r_min, r_max) × safe box`, `m = n - 1`.
#[derive(Debug, Clone)]
pub struct TwistedProduct {
    psi: ScalarField,
    fiber: Fiber,
    metric: MetricSpec,
}

impl TwistedProduct {
    /// `psi` is a function of the full chart point `(r, y¹, …, y^m)`.
    pub fn new(psi: ScalarField, fiber: Fiber) -> Self {
        Self::with_r_range(psi, fiber, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn with_r_range(psi: ScalarField, fiber: Fiber, r_min: f64, r_max: f64) -> Self {
        let metric = build_metric(&psi, &fiber, r_min, r_max);
        Self { psi, fiber, metric }
    }

    /// Override the finite-difference steps of the metric.
    pub fn with_steps(mut self, steps: FdSteps) -> Self {
        self.metric = self.metric.with_steps(steps);
        self
    }

    pub fn dim(&self) -> usize {
        self.fiber.dim() + 1
    }

    pub fn psi(&self) -> &ScalarField {
        &self.psi
    }

    pub fn fiber(&self) -> &Fiber {
        &self.fiber
    }

    pub fn metric(&self) -> &MetricSpec {
        &self.metric
    }

    /// `|∂²ψ/∂r∂y^k|` maximized over `k`.
    pub fn mixed_radial_residual(&self, p: &[f64]) -> Result<f64> {
        let h = self.psi.second_partials(p, &self.metric.differ())?;
        Ok((1..self.dim()).map(|k| h[(0, k)].abs()).fold(0.0, f64::max))
    }
}

fn build_metric(psi: &ScalarField, fiber: &Fiber, r_min: f64, r_max: f64) -> MetricSpec {
    let m = fiber.dim();
    let n = m + 1;
    let mf = m as f64;
    let domain = ChartDomain::new(vec![r_min], vec![r_max])
        .expect("nonempty r range")
        .product(fiber.safe_box());
    let (psi_g, fib_g) = (psi.clone(), fiber.metric().clone());
    let spec = MetricSpec::new(n, move |p| {
        let h = fib_g.components(&p[1..]).unwrap_or_else(|_| DMatrix::from_element(m, m, f64::NAN));
        let w = (2.0 * psi_g.value(p) / mf).exp();
        block(1.0, &(h * w))
    })
    .with_domain(domain);
    if !psi.has_analytic_gradient() {
        return spec;
    }
    let (psi_d, fib_d) = (psi.clone(), fiber.metric().clone());
    spec.with_partials(move |p| {
        let y = &p[1..];
        let nan = || DMatrix::from_element(m, m, f64::NAN);
        let h = fib_d.components(y).unwrap_or_else(|_| nan());
        let dh = fib_d.partials(y).unwrap_or_else(|_| vec![nan(); m]);
        let dpsi = psi_d.analytic_gradient(p).expect("analytic gradient present");
        let w = (2.0 * psi_d.value(p) / mf).exp();
        (0..n)
            .map(|k| {
                let mut fib = &h * (2.0 * dpsi[k] / mf * w);
                if k > 0 {
                    fib += &dh[k - 1] * w;
                }
                block(0.0, &fib)
            })
            .collect()
    })
}

/// `diag(a, B)`.
pub(crate) fn block(a: f64, b: &DMatrix<f64>) -> DMatrix<f64> {
    let m = b.nrows();
    let mut out = DMatrix::zeros(m + 1, m + 1);
    out[(0, 0)] = a;
    out.view_mut((1, 1), (m, m)).copy_from(b);
    out
}

/// Closed-form Ricci tensor of a twisted product in the `(r, y)` chart.
///
/// With `m = n - 1`, `g = dr² + e^{2ψ/m} h`:
///
/// * `Ric(∂r, ∂r) = -ψ_rr - ψ_r²/m`
/// * `Ric(∂r, ∂i) = ((1-m)/m) ∂_i ψ_r`
/// * `Ric(∂i, ∂j) = Ric^h_ij - ((m-2)/m)(Hess^h ψ_ij - ψ_i ψ_j / m)
///   - (1/m)(Δ_h ψ + ((m-2)/m)|dψ|²_h) h_ij - (1/m)(ψ_rr + ψ_r²) g_ij`
///
/// where the fiber Hessian, Laplacian and norm are those of `h` applied to
/// `ψ(r, ·)` at fixed `r`.
pub fn twisted_ricci_analytic(tw: &TwistedProduct, p: &[f64]) -> Result<BilinearForm> {
    let n = tw.dim();
    if p.len() != n {
        return Err(GeomError::DimensionMismatch {
            expected: n,
            got: p.len(),
        });
    }
    let m = n - 1;
    let mf = m as f64;
    let y = &p[1..];
    let d = tw.metric.differ();
    let dpsi = tw.psi.partials(p, &d)?;
    let d2psi = tw.psi.second_partials(p, &d)?;
    let h = tw.fiber.metric().components(y)?;
    let h_inv = tw.fiber.metric().inverse(y)?;
    let gamma_h = christoffel(tw.fiber.metric(), y)?;
    let ric_h = tw.fiber.ricci(y)?;
    let w = (2.0 * tw.psi.value(p) / mf).exp();

    let (psi_r, psi_rr) = (dpsi[0], d2psi[(0, 0)]);
    let psi_y: Vec<f64> = (0..m).map(|i| dpsi[i + 1]).collect();
    let hess_h = DMatrix::from_fn(m, m, |i, j| {
        d2psi[(i + 1, j + 1)] - (0..m).map(|k| gamma_h.get(k, i, j) * psi_y[k]).sum::<f64>()
    });
    let lap_h = h_inv.component_mul(&hess_h).sum();
    let grad_sq_h: f64 = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| h_inv[(i, j)] * psi_y[i] * psi_y[j])
        .sum();

    let c = (mf - 2.0) / mf;
    let trace_term = (lap_h + c * grad_sq_h) / mf;
    let radial_term = (psi_rr + psi_r * psi_r) / mf;
    let mut ric = DMatrix::zeros(n, n);
    ric[(0, 0)] = -psi_rr - psi_r * psi_r / mf;
    for i in 0..m {
        let v = (1.0 - mf) / mf * d2psi[(0, i + 1)];
        ric[(0, i + 1)] = v;
        ric[(i + 1, 0)] = v;
        for j in 0..m {
            ric[(i + 1, j + 1)] = ric_h.get(i, j) - c * (hess_h[(i, j)] - psi_y[i] * psi_y[j] / mf)
                - trace_term * h[(i, j)]
                - radial_term * w * h[(i, j)];
        }
    }
    crate::error::ensure_finite("twisted ricci", p, ric.as_slice())?;
    Ok(BilinearForm::from_matrix(ric))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::ricci_numeric;
    use nalgebra::DVector;

    fn radial_psi(n: usize, f: fn(f64) -> f64, df: fn(f64) -> f64, d2f: fn(f64) -> f64) -> ScalarField {
        ScalarField::new(move |p| f(p[0]))
            .with_gradient(move |p| {
                let mut g = DVector::zeros(n);
                g[0] = df(p[0]);
                g
            })
            .with_second_partials(move |p| {
                let mut h = DMatrix::zeros(n, n);
                h[(0, 0)] = d2f(p[0]);
                h
            })
    }

    #[test]
    fn product_of_flats_is_flat() {
        let tw = TwistedProduct::new(ScalarField::constant(3, 0.7), Fiber::euclidean(2));
        let ric = twisted_ricci_analytic(&tw, &[0.3, 0.1, -0.4]).unwrap();
        assert!(ric.max_abs() < 1e-14);
    }

    #[test]
    fn hyperbolic_space() {
        let tw = TwistedProduct::new(radial_psi(3, |r| 2.0 * r, |_| 2.0, |_| 0.0), Fiber::euclidean(2));
        let p = [0.2, 0.5, -1.0];
        let ric = twisted_ricci_analytic(&tw, &p).unwrap();
        let g = tw.metric().components(&p).unwrap();
        assert!((ric.matrix() + g * 2.0).amax() < 1e-12);
    }

    #[test]
    fn polar_plane_is_flat() {
        let tw = TwistedProduct::with_r_range(
            radial_psi(2, f64::ln, |r| 1.0 / r, |r| -1.0 / (r * r)),
            Fiber::euclidean(1),
            0.0,
            f64::INFINITY,
        );
        for r in [0.5, 1.0, 3.0] {
            let ric = twisted_ricci_analytic(&tw, &[r, 0.2]).unwrap();
            assert!(ric.max_abs() < 1e-12);
        }
    }

    #[test]
    fn fiber_dependent_psi_matches_numeric() {
        // ψ = 0.3 sin(r) y1 + 0.2 y2² + 0.1 r y2 over a round S²
        let psi = ScalarField::new(|p| 0.3 * p[0].sin() * p[1] + 0.2 * p[2] * p[2] + 0.1 * p[0] * p[2])
            .with_gradient(|p| {
                DVector::from_vec(vec![
                    0.3 * p[0].cos() * p[1] + 0.1 * p[2],
                    0.3 * p[0].sin(),
                    0.4 * p[2] + 0.1 * p[0],
                ])
            })
            .with_second_partials(|p| {
                DMatrix::from_row_slice(
                    3,
                    3,
                    &[
                        -0.3 * p[0].sin() * p[1],
                        0.3 * p[0].cos(),
                        0.1,
                        0.3 * p[0].cos(),
                        0.0,
                        0.0,
                        0.1,
                        0.0,
                        0.4,
                    ],
                )
            });
        let tw = TwistedProduct::new(psi, Fiber::round_sphere(2, 0.5).unwrap());
        for p in [[0.1, 0.2, -0.3], [1.3, -0.8, 0.5], [-2.0, 1.1, 1.4]] {
            let exact = twisted_ricci_analytic(&tw, &p).unwrap();
            let num = ricci_numeric(tw.metric(), &p).unwrap();
            let chol = tw.metric().factor(&p).unwrap();
            let err = num.relative_error(&exact, &chol);
            assert!(err < 1e-6, "{p:?}: {err:e}");
        }
    }
}
