//! Levi-Civita connection and curvature from chart metric components.

use nalgebra::{DMatrix, DVector};

use super::fd::FirstStencil;
use super::metric::{BilinearForm, MetricSpec};
use super::point::check_dim;
use crate::error::{ensure_finite, Result};

/// Christoffel symbols of the second kind, `Γ^k_{ij}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn from_flat(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n * n);
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, k: usize, i: usize, j: usize) -> usize {
        (k * self.n + i) * self.n + j
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[self.idx(k, i, j)]
    }

    #[inline]
    pub fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        let at = self.idx(k, i, j);
        self.data[at] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `Γ^k_{ij} u^i w^j`.
    pub fn contract(&self, u: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        DVector::from_fn(n, |k, _| {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += self.get(k, i, j) * u[i] * w[j];
                }
            }
            s
        })
    }

    /// Largest `|Γ^k_{ij} − Γ^k_{ji}|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0_f64;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    worst = worst.max((self.get(k, i, j) - self.get(k, j, i)).abs());
                }
            }
        }
        worst
    }
}

/// Christoffel symbols from metric components and their partials.
pub fn christoffel_from_parts(g_inv: &DMatrix<f64>, dg: &[DMatrix<f64>]) -> Christoffel {
    let n = g_inv.nrows();
    let mut gamma = Christoffel::zeros(n);
    for i in 0..n {
        for j in i..n {
            // first kind: [ij, l] = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
            let first: Vec<f64> = (0..n)
                .map(|l| 0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]))
                .collect();
            for k in 0..n {
                let v: f64 = (0..n).map(|l| g_inv[(k, l)] * first[l]).sum();
                gamma.set(k, i, j, v);
                gamma.set(k, j, i, v);
            }
        }
    }
    gamma
}

/// `Γ^k_{ij} = ½ g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij)` at `p`.
pub fn christoffel(spec: &MetricSpec, p: &[f64]) -> Result<Christoffel> {
    check_dim(spec.dim(), p)?;
    let g_inv = spec.inverse(p)?;
    let dg = spec.partials(p)?;
    let gamma = christoffel_from_parts(&g_inv, &dg);
    ensure_finite("christoffel symbols", p, gamma.as_slice())?;
    Ok(gamma)
}

/// Riemann tensor `R^a_{bcd}` with
/// `R^a_{bcd} = ∂_c Γ^a_{db} − ∂_d Γ^a_{cb} + Γ^a_{ce} Γ^e_{db} − Γ^a_{de} Γ^e_{cb}`,
/// so that `Ric_{bd} = R^a_{bad}`.
#[derive(Debug, Clone)]
pub struct Riemann {
    n: usize,
    data: Vec<f64>,
}

impl Riemann {
    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let n = self.n;
        self.data[((a * n + b) * n + c) * n + d]
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn ricci(&self) -> BilinearForm {
        let n = self.n;
        let m = DMatrix::from_fn(n, n, |b, d| (0..n).map(|a| self.get(a, b, a, d)).sum());
        BilinearForm::from_matrix(m)
    }
}

/// Riemann tensor from Christoffel symbols and their finite-differenced
/// partials (five-point stencil with the second-derivative step).
pub fn riemann_numeric(spec: &MetricSpec, p: &[f64]) -> Result<Riemann> {
    check_dim(spec.dim(), p)?;
    let n = spec.dim();
    let gamma = christoffel(spec, p)?;
    let d = spec.differ();
    let flat = |q: &[f64]| -> Result<Vec<f64>> { Ok(christoffel(spec, q)?.data) };
    // dgamma[c] = ∂_c Γ
    let dgamma: Vec<Christoffel> = (0..n)
        .map(|c| {
            let v = d.d1_vec(&flat, p, c, spec.steps().second, FirstStencil::Central4)?;
            Ok(Christoffel::from_flat(n, v))
        })
        .collect::<Result<_>>()?;

    let mut data = vec![0.0; n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for dd in 0..n {
                    let mut v = dgamma[c].get(a, dd, b) - dgamma[dd].get(a, c, b);
                    for e in 0..n {
                        v += gamma.get(a, c, e) * gamma.get(e, dd, b) - gamma.get(a, dd, e) * gamma.get(e, c, b);
                    }
                    data[((a * n + b) * n + c) * n + dd] = v;
                }
            }
        }
    }
    ensure_finite("riemann tensor", p, &data)?;
    Ok(Riemann { n, data })
}

/// Ricci tensor by contraction of the numerically computed curvature tensor.
pub fn ricci_numeric(spec: &MetricSpec, p: &[f64]) -> Result<BilinearForm> {
    Ok(riemann_numeric(spec, p)?.ricci())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::point::ChartDomain;

    fn polar() -> MetricSpec {
        MetricSpec::new(2, |p| DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, p[0] * p[0]]))
            .with_domain(ChartDomain::new(vec![0.0, f64::NEG_INFINITY], vec![f64::INFINITY; 2]).unwrap())
    }

    #[test]
    fn euclidean_christoffels_vanish() {
        let g = christoffel(&MetricSpec::euclidean(2), &[0.3, -2.0]).unwrap();
        assert!(g.as_slice().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn polar_christoffels() {
        let g = christoffel(&polar(), &[2.0, 0.4]).unwrap();
        assert!((g.get(0, 1, 1) + 2.0).abs() < 1e-9);
        assert!((g.get(1, 0, 1) - 0.5).abs() < 1e-9);
        assert!((g.get(1, 1, 0) - 0.5).abs() < 1e-9);
        for (k, i, j) in [(0, 0, 0), (0, 0, 1), (1, 0, 0), (1, 1, 1)] {
            assert!(g.get(k, i, j).abs() < 1e-9);
        }
    }

    #[test]
    fn exponential_warp_christoffels() {
        let m = MetricSpec::new(2, |p| DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, (2.0 * p[0]).exp()]));
        for r in [-1.0, 0.0, 0.7] {
            let g = christoffel(&m, &[r, 0.1]).unwrap();
            assert!((g.get(0, 1, 1) + (2.0 * r).exp()).abs() < 1e-8 * (2.0 * r).exp().max(1.0));
            assert!((g.get(1, 0, 1) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn flat_polar_ricci_vanishes() {
        let ric = ricci_numeric(&polar(), &[1.3, 0.2]).unwrap();
        assert!(ric.max_abs() < 1e-6, "{}", ric.max_abs());
    }

    #[test]
    fn hyperbolic_three_space_ricci() {
        let m = MetricSpec::new(3, |p| {
            let e = (2.0 * p[0]).exp();
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, e, e]))
        });
        let p = [0.4, 0.3, -0.2];
        let ric = ricci_numeric(&m, &p).unwrap();
        let g = m.components(&p).unwrap();
        assert!((ric.get(0, 0) + 2.0).abs() < 1e-6);
        for i in 0..3 {
            for j in 0..3 {
                assert!((ric.get(i, j) + 2.0 * g[(i, j)]).abs() < 1e-5 * g[(i, j)].abs().max(1.0));
            }
        }
    }

    #[test]
    fn unit_sphere_is_einstein() {
        // stereographic chart of the unit 2-sphere
        let m = MetricSpec::new(2, |p| {
            let s = 4.0 / (1.0 + p[0] * p[0] + p[1] * p[1]).powi(2);
            DMatrix::from_diagonal(&DVector::from_vec(vec![s, s]))
        });
        for p in [[0.0, 0.0], [0.5, -0.3], [1.2, 0.9], [-2.0, 1.0]] {
            let ric = ricci_numeric(&m, &p).unwrap();
            let g = m.components(&p).unwrap();
            assert!((ric.matrix() - g).amax() < 1e-5, "{p:?}");
        }
    }
}
