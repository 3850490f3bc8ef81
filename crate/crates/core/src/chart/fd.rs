//! Central finite-difference stencils with domain guards.
//!
//! Steps are relative: the step along axis `k` at point `p` is
//! `rel * max(1, |p[k]|)`, so stencils stay well conditioned far from the
//! origin. Every stencil point is checked against the chart domain before the
//! function is evaluated there.

use nalgebra::{DMatrix, DVector};

use super::point::ChartDomain;
use crate::error::{ensure_finite, Result};

/// First-derivative stencil.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FirstStencil {
    /// `(f(x+h) - f(x-h)) / 2h`, second order.
    Central2,
    /// Five-point stencil, fourth order.
    Central4,
}

/// Relative finite-difference steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdSteps {
    /// Step for first derivatives (metric partials, gradients).
    pub first: f64,
    /// Step for second derivatives and derivatives of Christoffel symbols.
    pub second: f64,
    pub first_stencil: FirstStencil,
}

impl Default for FdSteps {
    fn default() -> Self {
        Self {
            first: 1e-5,
            second: 1e-4,
            first_stencil: FirstStencil::Central2,
        }
    }
}

impl FdSteps {
    /// Steps for derivatives that are themselves differentiated again
    /// (third-order terms). All stencils use `h` and fourth-order accuracy.
    pub fn nested(h: f64) -> Self {
        Self {
            first: h,
            second: h,
            first_stencil: FirstStencil::Central4,
        }
    }
}

#[inline]
pub fn rel_step(rel: f64, x: f64) -> f64 {
    rel * x.abs().max(1.0)
}

/// Finite-difference evaluator bound to a chart domain.
#[derive(Debug, Clone, Copy)]
pub struct Differ<'a> {
    pub domain: &'a ChartDomain,
    pub steps: FdSteps,
}

impl<'a> Differ<'a> {
    pub fn new(domain: &'a ChartDomain, steps: FdSteps) -> Self {
        Self { domain, steps }
    }

    fn shifted(&self, p: &[f64], k: usize, delta: f64) -> Result<Vec<f64>> {
        let mut q = p.to_vec();
        q[k] += delta;
        self.domain.check(&q)?;
        Ok(q)
    }

    /// Partial derivative along axis `k` of a vector-valued function, using a
    /// first-derivative stencil with relative step `rel`.
    pub fn d1_vec<F>(&self, f: &F, p: &[f64], k: usize, rel: f64, stencil: FirstStencil) -> Result<Vec<f64>>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>> + ?Sized,
    {
        let h = rel_step(rel, p[k]);
        let out = match stencil {
            FirstStencil::Central2 => {
                let fp = f(&self.shifted(p, k, h)?)?;
                let fm = f(&self.shifted(p, k, -h)?)?;
                fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect::<Vec<_>>()
            }
            FirstStencil::Central4 => {
                let fp2 = f(&self.shifted(p, k, 2.0 * h)?)?;
                let fp1 = f(&self.shifted(p, k, h)?)?;
                let fm1 = f(&self.shifted(p, k, -h)?)?;
                let fm2 = f(&self.shifted(p, k, -2.0 * h)?)?;
                (0..fp1.len())
                    .map(|i| (-fp2[i] + 8.0 * fp1[i] - 8.0 * fm1[i] + fm2[i]) / (12.0 * h))
                    .collect()
            }
        };
        ensure_finite("finite difference", p, &out)?;
        Ok(out)
    }

    /// Gradient (coordinate partials) of a scalar function.
    pub fn gradient<F>(&self, f: &F, p: &[f64]) -> Result<DVector<f64>>
    where
        F: Fn(&[f64]) -> f64 + ?Sized,
    {
        let wrapped = |q: &[f64]| -> Result<Vec<f64>> { Ok(vec![f(q)]) };
        let mut g = DVector::zeros(p.len());
        for k in 0..p.len() {
            g[k] = self.d1_vec(&wrapped, p, k, self.steps.first, self.steps.first_stencil)?[0];
        }
        Ok(g)
    }

    /// Matrix of second coordinate partials of a scalar function. Diagonal
    /// entries use the five-point second-difference stencil; mixed entries
    /// nest two five-point first-difference stencils.
    pub fn second_partials<F>(&self, f: &F, p: &[f64]) -> Result<DMatrix<f64>>
    where
        F: Fn(&[f64]) -> f64 + ?Sized,
    {
        let n = p.len();
        let rel = self.steps.second;
        let f0 = f(p);
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            let h = rel_step(rel, p[i]);
            let fp2 = f(&self.shifted(p, i, 2.0 * h)?);
            let fp1 = f(&self.shifted(p, i, h)?);
            let fm1 = f(&self.shifted(p, i, -h)?);
            let fm2 = f(&self.shifted(p, i, -2.0 * h)?);
            out[(i, i)] = (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h);
        }
        const W: [(f64, f64); 4] = [(2.0, -1.0), (1.0, 8.0), (-1.0, -8.0), (-2.0, 1.0)];
        for i in 0..n {
            let hi = rel_step(rel, p[i]);
            for j in (i + 1)..n {
                let hj = rel_step(rel, p[j]);
                let mut acc = 0.0;
                for (si, wi) in W {
                    let qi = self.shifted(p, i, si * hi)?;
                    for (sj, wj) in W {
                        let q = self.shifted(&qi, j, sj * hj)?;
                        acc += wi * wj * f(&q);
                    }
                }
                let v = acc / (144.0 * hi * hj);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        ensure_finite("second partials", p, out.as_slice())?;
        Ok(out)
    }
}
