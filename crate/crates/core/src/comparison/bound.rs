use crate::error::{GeomError, Result};
use crate::quadrature::{cumulative, integral_to, interpolate};

/// Samples must reach this close (relative) to `0` and `r`.
const COVER_TOL: f64 = 1e-12;

fn check_cover(f_samples: &[(f64, f64)], r: f64) -> Result<()> {
    if f_samples.is_empty() {
        return Err(GeomError::EmptySamples);
    }
    if !(r > 0.0) {
        return Err(GeomError::ZeroRadius);
    }
    if f_samples.len() < 3 {
        return Err(GeomError::InvalidArgument("at least three samples are needed".into()));
    }
    let (t0, t1) = (f_samples[0].0, f_samples[f_samples.len() - 1].0);
    if t0.abs() > COVER_TOL * r.max(1.0) || t1 < r * (1.0 - COVER_TOL) {
        return Err(GeomError::InvalidArgument(format!(
            "samples cover [{t0}, {t1}] but [0, {r}] is required"
        )));
    }
    if f_samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(GeomError::InvalidArgument("sample times must be strictly increasing".into()));
    }
    Ok(())
}

fn split(f_samples: &[(f64, f64)]) -> (Vec<f64>, Vec<f64>) {
    f_samples.iter().copied().unzip()
}

/// `∫_0^r e^{-2(f(t) - c)/(n-1)} dt` with the reference level `c`.
fn weighted_length(ts: &[f64], fs: &[f64], n: usize, r: f64, c: f64) -> f64 {
    let m = n as f64 - 1.0;
    let w: Vec<f64> = fs.iter().map(|f| (-2.0 * (f - c) / m).exp()).collect();
    let cum = cumulative(ts, &w);
    integral_to(ts, &w, &cum, r)
}

/// `∫_0^r v⁻²(t) dt` with `v = e^{f/(n-1)}`.
pub fn v_integral(f_samples: &[(f64, f64)], n: usize, r: f64) -> Result<f64> {
    check_cover(f_samples, r)?;
    let (ts, fs) = split(f_samples);
    Ok(weighted_length(&ts, &fs, n, r, 0.0))
}

/// `(n-1) / (v²(r) ∫_0^r v⁻²)`, `v = e^{f/(n-1)}`. A constant `f` gives
/// exactly `(n-1)/r`.
pub fn comparison_bound(f_samples: &[(f64, f64)], n: usize, r: f64) -> Result<f64> {
    check_cover(f_samples, r)?;
    if n < 2 {
        return Err(GeomError::InvalidArgument("dimension must be at least 2".into()));
    }
    let m = n as f64 - 1.0;
    let (ts, fs) = split(f_samples);
    if fs.iter().all(|f| *f == fs[0]) {
        return Ok(m / r);
    }
    // v²(r) ∫ v⁻² = ∫ e^{-2(f(t) - f(r))/(n-1)}
    let f_r = interpolate(&ts, &fs, r);
    Ok(m / weighted_length(&ts, &fs, n, r, f_r))
}
