//! Split spaces `dr² + e^{2φ(r)/(n-1)} g_L` with density `f = φ(r) + f_L`.

use nalgebra::{DMatrix, DVector};

use super::fiber::{Fiber, FiberKind};
use super::profile::WarpingProfile;
use super::twisted::{block, TwistedProduct};
use crate::chart::{ChartDomain, DensitySpec, FdSteps, MetricSpec, ScalarField};
use crate::error::{GeomError, Result};
use crate::weighted::{generalized_ricci_gradient, ExtendedReal};

#[derive(Debug, Clone)]
pub struct SplitSpace {
    phi: WarpingProfile,
    fiber: Fiber,
    f_l: ScalarField,
    r_range: (f64, f64),
    metric: MetricSpec,
}

impl SplitSpace {
    /// `f_l` is a function of the fiber coordinates only.
    pub fn new(phi: WarpingProfile, fiber: Fiber, f_l: ScalarField) -> Self {
        Self::with_r_range(phi, fiber, f_l, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn with_r_range(phi: WarpingProfile, fiber: Fiber, f_l: ScalarField, r_min: f64, r_max: f64) -> Self {
        let metric = build_metric(&phi, &fiber, r_min, r_max);
        Self {
            phi,
            fiber,
            f_l,
            r_range: (r_min, r_max),
            metric,
        }
    }

    /// Override the finite-difference steps of the metric.
    pub fn with_steps(mut self, steps: FdSteps) -> Self {
        self.metric = self.metric.with_steps(steps);
        self
    }

    /// Unweighted fiber (`f_L = 0`).
    pub fn unweighted_fiber(phi: WarpingProfile, fiber: Fiber) -> Self {
        let m = fiber.dim();
        Self::new(phi, fiber, ScalarField::constant(m, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.fiber.dim() + 1
    }

    pub fn phi(&self) -> &WarpingProfile {
        &self.phi
    }

    pub fn fiber(&self) -> &Fiber {
        &self.fiber
    }

    pub fn fiber_potential(&self) -> &ScalarField {
        &self.f_l
    }

    pub fn r_range(&self) -> (f64, f64) {
        self.r_range
    }

    pub fn metric(&self) -> &MetricSpec {
        &self.metric
    }

    /// Warping factor `v(r) = e^{φ(r)/(n-1)}`, so that `g = dr² + v² g_L`.
    pub fn warping_factor(&self, r: f64) -> f64 {
        (self.phi.value(r) / self.fiber.dim() as f64).exp()
    }

    /// `f = φ(r) + f_L(y)` on the full chart.
    pub fn potential(&self) -> ScalarField {
        let n = self.dim();
        let (phi, fl) = (self.phi.clone(), self.f_l.clone());
        let mut f = ScalarField::new(move |p| phi.value(p[0]) + fl.value(&p[1..]));
        if self.f_l.has_analytic_gradient() {
            let (phi, fl) = (self.phi.clone(), self.f_l.clone());
            f = f.with_gradient(move |p| {
                let g = fl.analytic_gradient(&p[1..]).expect("analytic gradient");
                let mut out = DVector::zeros(n);
                out[0] = phi.d1(p[0]);
                out.rows_mut(1, n - 1).copy_from(&g);
                out
            });
        }
        if self.f_l.has_analytic_second() {
            let (phi, fl) = (self.phi.clone(), self.f_l.clone());
            f = f.with_second_partials(move |p| {
                let h = fl.analytic_second(&p[1..]).expect("analytic second partials");
                block(phi.d2(p[0]), &h)
            });
        }
        f
    }

    pub fn density(&self) -> DensitySpec {
        DensitySpec::Gradient(self.potential())
    }

    /// The distance to the slice `{r = 0}`, i.e. the coordinate `r`.
    pub fn distance_field(&self) -> ScalarField {
        ScalarField::coordinate(self.dim(), 0)
    }

    /// The same metric viewed as a twisted product with `ψ = φ(r)`.
    pub fn as_twisted(&self) -> TwistedProduct {
        let n = self.dim();
        let (a, b, c) = (self.phi.clone(), self.phi.clone(), self.phi.clone());
        let psi = ScalarField::new(move |p| a.value(p[0]))
            .with_gradient(move |p| {
                let mut g = DVector::zeros(n);
                g[0] = b.d1(p[0]);
                g
            })
            .with_second_partials(move |p| {
                let mut h = DMatrix::zeros(n, n);
                h[(0, 0)] = c.d2(p[0]);
                h
            });
        TwistedProduct::with_r_range(psi, self.fiber.clone(), self.r_range.0, self.r_range.1)
    }

    /// `(1/(n-1)) φ''(r) e^{2φ(r)/(n-1)}`, the pointwise quantity whose
    /// supremum is the critical fiber Einstein constant.
    pub fn threshold_integrand(&self, r: f64) -> f64 {
        let m = self.fiber.dim() as f64;
        self.phi.d2(r) * (2.0 * self.phi.value(r) / m).exp() / m
    }
}

fn build_metric(phi: &WarpingProfile, fiber: &Fiber, r_min: f64, r_max: f64) -> MetricSpec {
    let m = fiber.dim();
    let mf = m as f64;
    let domain = ChartDomain::new(vec![r_min], vec![r_max])
        .expect("nonempty r range")
        .product(fiber.safe_box());
    let nan = move || DMatrix::from_element(m, m, f64::NAN);
    let (phi_g, fib_g) = (phi.clone(), fiber.metric().clone());
    let (phi_d, fib_d) = (phi.clone(), fiber.metric().clone());
    MetricSpec::new(m + 1, move |p| {
        let h = fib_g.components(&p[1..]).unwrap_or_else(|_| nan());
        block(1.0, &(h * (2.0 * phi_g.value(p[0]) / mf).exp()))
    })
    .with_partials(move |p| {
        let y = &p[1..];
        let h = fib_d.components(y).unwrap_or_else(|_| nan());
        let dh = fib_d.partials(y).unwrap_or_else(|_| vec![nan(); m]);
        let w = (2.0 * phi_d.value(p[0]) / mf).exp();
        let mut out = vec![block(0.0, &(&h * (2.0 * phi_d.d1(p[0]) / mf * w)))];
        out.extend(dh.iter().map(|d| block(0.0, &(d * w))));
        out
    })
    .with_domain(domain)
}

/// Supremum of a function of `r` over a finite range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub value: f64,
    pub argmax: f64,
    /// Maximizer on the range boundary with monotone growth toward it: the
    /// supremum over the whole line is likely larger or infinite.
    pub divergent: bool,
}

const GOLDEN_WIDTH: f64 = 1e-10;

/// `sup_r (1/(n-1)) φ''(r) e^{2φ(r)/(n-1)}` over `[r_min, r_max]`: grid scan
/// with `samples` points, then golden-section refinement in the cells
/// adjacent to the best grid point.
pub fn split_cd_threshold(split: &SplitSpace, r_min: f64, r_max: f64, samples: usize) -> Result<Threshold> {
    sup_on_range(|r| split.threshold_integrand(r), r_min, r_max, samples)
}

pub(crate) fn sup_on_range(q: impl Fn(f64) -> f64, r_min: f64, r_max: f64, samples: usize) -> Result<Threshold> {
    if !(r_min.is_finite() && r_max.is_finite() && r_min < r_max) {
        return Err(GeomError::InvalidArgument(format!(
            "threshold range must be finite and nonempty, got [{r_min}, {r_max}]"
        )));
    }
    if samples < 3 {
        return Err(GeomError::EmptyGrid);
    }
    let step = (r_max - r_min) / (samples - 1) as f64;
    let rs: Vec<f64> = (0..samples).map(|i| r_min + step * i as f64).collect();
    let qs: Vec<f64> = rs.iter().map(|&r| q(r)).collect();
    if let Some(i) = qs.iter().position(|v| !v.is_finite()) {
        return Err(GeomError::NonFinite {
            what: "threshold integrand".into(),
            point: vec![rs[i]],
        });
    }
    let best = (0..samples).fold(0, |b, i| if qs[i] > qs[b] { i } else { b });

    let lo = rs[best.saturating_sub(1)];
    let hi = rs[(best + 1).min(samples - 1)];
    let (r_gold, q_gold) = golden_max(&q, lo, hi);
    let (value, argmax) = if q_gold > qs[best] {
        (q_gold, r_gold)
    } else {
        (qs[best], rs[best])
    };

    let tail = (samples / 10).max(2);
    let divergent = if best == samples - 1 {
        let t = &qs[samples - tail..];
        t.windows(2).all(|w| w[1] >= w[0]) && t[tail - 1] > t[0]
    } else if best == 0 {
        let t = &qs[..tail];
        t.windows(2).all(|w| w[0] >= w[1]) && t[0] > t[tail - 1]
    } else {
        false
    };
    Ok(Threshold {
        value,
        argmax,
        divergent,
    })
}

fn golden_max(q: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut qc, mut qd) = (q(c), q(d));
    while b - a > GOLDEN_WIDTH {
        if qc >= qd {
            b = d;
            d = c;
            qd = qc;
            c = b - inv_phi * (b - a);
            qc = q(c);
        } else {
            a = c;
            c = d;
            qc = qd;
            d = a + inv_phi * (b - a);
            qd = q(d);
        }
    }
    let r = 0.5 * (a + b);
    (r, q(r))
}

/// Smallest Einstein constant of a round-sphere fiber for which the
/// unweighted-fiber split space is CD(0,1) on `[r_min, r_max]`.
pub fn sphere_example_lambda(split: &SplitSpace, r_min: f64, r_max: f64, samples: usize) -> Result<f64> {
    if !matches!(split.fiber().kind(), FiberKind::RoundSphere { .. }) {
        return Err(GeomError::InvalidArgument("fiber must be a round sphere".into()));
    }
    let center = split.fiber().safe_box().center();
    let probes = [center.clone(), split.fiber().safe_box().lower().to_vec()];
    let fl0 = split.fiber_potential().value(&center);
    if probes.iter().any(|y| split.fiber_potential().value(y) != fl0) {
        return Err(GeomError::Precondition("fiber potential must be constant".into()));
    }
    let t = split_cd_threshold(split, r_min, r_max, samples)?;
    if t.divergent {
        return Err(GeomError::DivergentThreshold {
            argmax: t.argmax,
            value: t.value,
        });
    }
    Ok(t.value.max(0.0))
}

/// Closed-form and numerical values of `Ric_f^N(∂r, ∂r)` on a split space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialIdentity {
    pub analytic: f64,
    pub numeric: f64,
}

/// `((N-1)/((n-1)(n-N))) φ'(r)²` against the numerically computed
/// `Ric_f^N(∂r, ∂r)` at the chart point `p`.
pub fn radial_identity_n(split: &SplitSpace, n_param: ExtendedReal, p: &[f64]) -> Result<RadialIdentity> {
    let n = split.dim();
    let nf = n as f64;
    let d1 = split.phi().d1(p[0]);
    let analytic = match n_param {
        ExtendedReal::Finite(big_n) => {
            if big_n == nf {
                return Err(GeomError::DimensionClash { n });
            }
            (big_n - 1.0) / ((nf - 1.0) * (nf - big_n)) * d1 * d1
        }
        ExtendedReal::PosInfinity => -d1 * d1 / (nf - 1.0),
    };
    let ric = generalized_ricci_gradient(split.metric(), &split.potential(), n_param, p)?;
    Ok(RadialIdentity {
        analytic,
        numeric: ric.get(0, 0),
    })
}
