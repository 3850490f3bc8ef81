use std::fmt;
use std::sync::Arc;

use crate::error::{GeomError, Result};

type RealFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A function of `r` together with its first two derivatives.
#[derive(Clone)]
pub struct WarpingProfile {
    f: Arc<RealFn>,
    df: Arc<RealFn>,
    d2f: Arc<RealFn>,
}

impl fmt::Debug for WarpingProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WarpingProfile").finish_non_exhaustive()
    }
}

impl WarpingProfile {
    pub fn new(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            f: Arc::new(f),
            df: Arc::new(df),
            d2f: Arc::new(d2f),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c, |_| 0.0, |_| 0.0)
    }

    /// `a·r + b`.
    pub fn linear(a: f64, b: f64) -> Self {
        Self::new(move |r| a * r + b, move |_| a, |_| 0.0)
    }

    /// `amp·sin(freq·r + phase)`.
    pub fn sine(amp: f64, freq: f64, phase: f64) -> Self {
        Self::new(
            move |r| amp * (freq * r + phase).sin(),
            move |r| amp * freq * (freq * r + phase).cos(),
            move |r| -amp * freq * freq * (freq * r + phase).sin(),
        )
    }

    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        (self.f)(r)
    }

    #[inline]
    pub fn d1(&self, r: f64) -> f64 {
        (self.df)(r)
    }

    #[inline]
    pub fn d2(&self, r: f64) -> f64 {
        (self.d2f)(r)
    }

    /// Check finiteness and that the supplied derivatives agree with central
    /// differences of the lower ones to `tol` (relative) at the given radii.
    pub fn check(&self, radii: &[f64], tol: f64) -> Result<()> {
        for &r in radii {
            let vals = [self.value(r), self.d1(r), self.d2(r)];
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(GeomError::NonFinite {
                    what: "warping profile".into(),
                    point: vec![r],
                });
            }
            let h = 1e-5 * r.abs().max(1.0);
            let fd1 = (self.value(r + h) - self.value(r - h)) / (2.0 * h);
            let fd2 = (self.d1(r + h) - self.d1(r - h)) / (2.0 * h);
            for (name, exact, fd) in [("first", vals[1], fd1), ("second", vals[2], fd2)] {
                let err = (exact - fd).abs() / exact.abs().max(1.0);
                if err > tol {
                    return Err(GeomError::Precondition(format!(
                        "{name} derivative of the warping profile disagrees with finite differences by {err:e} at r = {r}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_profile_passes_check() {
        let p = WarpingProfile::sine(1.0, 1.0, 0.0);
        let radii: Vec<f64> = (0..50).map(|i| -10.0 + 0.4 * i as f64).collect();
        p.check(&radii, 1e-6).unwrap();
    }

    #[test]
    fn wrong_derivative_is_caught() {
        let p = WarpingProfile::new(|r| r * r, |r| 2.0 * r, |_| 3.0);
        assert!(p.check(&[0.5], 1e-6).is_err());
    }
}
