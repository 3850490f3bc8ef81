use nalgebra::DVector;

use crate::chart::{christoffel, MetricSpec};
use crate::error::{GeomError, Result};

/// Tolerance on the initial speed.
pub const UNIT_SPEED_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicSample {
    pub t: f64,
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicTrace {
    /// Strictly increasing in `t`, starting at `t = 0`.
    pub samples: Vec<GeodesicSample>,
    /// `max |‖γ̇‖_g - 1|` over the samples.
    pub speed_drift: f64,
    /// Set when the trajectory left the chart domain before the requested
    /// length; the samples stop at the last point inside.
    pub truncated: Option<GeomError>,
}

impl GeodesicTrace {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn end(&self) -> Option<&GeodesicSample> {
        self.samples.last()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// `v / ‖v‖_g`.
pub fn normalize_velocity(spec: &MetricSpec, p: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let v = DVector::from_column_slice(v);
    let norm = spec.inner(p, &v, &v)?.sqrt();
    if !(norm > 0.0) {
        return Err(GeomError::InvalidArgument("zero velocity".into()));
    }
    Ok((v / norm).as_slice().to_vec())
}

fn acceleration(spec: &MetricSpec, q: &[f64], v: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(-christoffel(spec, q)?.contract(v, v))
}

/// Integrate `ẍ^k + Γ^k_ij ẋ^i ẋ^j = 0` by fixed-step RK4 from `p0` with unit
/// velocity `v0` up to arc length `length`. The step is `length / ⌈length/dt⌉`
/// so the last sample lands on `length`.
pub fn geodesic_integrate(
    spec: &MetricSpec,
    p0: &[f64],
    v0: &[f64],
    length: f64,
    dt: f64,
) -> Result<GeodesicTrace> {
    let n = spec.dim();
    if v0.len() != n {
        return Err(GeomError::DimensionMismatch { expected: n, got: v0.len() });
    }
    if !(length > 0.0 && dt > 0.0 && length.is_finite()) {
        return Err(GeomError::InvalidArgument(format!(
            "geodesic length and step must be positive, got {length} and {dt}"
        )));
    }
    let speed = speed_of(spec, p0, v0)?;
    if (speed - 1.0).abs() > UNIT_SPEED_TOL {
        return Err(GeomError::Precondition(format!(
            "initial velocity must have unit length, got |v| = {speed}"
        )));
    }
    let steps = (length / dt - 1e-9).ceil().max(1.0) as usize;
    let h = length / steps as f64;

    let mut q = DVector::from_column_slice(p0);
    let mut v = DVector::from_column_slice(v0);
    let mut samples = vec![GeodesicSample {
        t: 0.0,
        position: p0.to_vec(),
        velocity: v0.to_vec(),
    }];
    let mut speed_drift = 0.0_f64;
    let mut truncated = None;

    for i in 1..=steps {
        let step = || -> Result<(DVector<f64>, DVector<f64>)> {
            let a1 = acceleration(spec, q.as_slice(), &v)?;
            let (q2, v2) = (&q + &v * (0.5 * h), &v + &a1 * (0.5 * h));
            let a2 = acceleration(spec, q2.as_slice(), &v2)?;
            let (q3, v3) = (&q + &v2 * (0.5 * h), &v + &a2 * (0.5 * h));
            let a3 = acceleration(spec, q3.as_slice(), &v3)?;
            let (q4, v4) = (&q + &v3 * h, &v + &a3 * h);
            let a4 = acceleration(spec, q4.as_slice(), &v4)?;
            let qn = &q + (&v + &v2 * 2.0 + &v3 * 2.0 + &v4) * (h / 6.0);
            let vn = &v + (&a1 + &a2 * 2.0 + &a3 * 2.0 + &a4) * (h / 6.0);
            spec.domain().check(qn.as_slice())?;
            Ok((qn, vn))
        };
        let t = if i == steps { length } else { h * i as f64 };
        match step() {
            Ok((qn, vn)) => {
                if qn.iter().chain(vn.iter()).any(|x| !x.is_finite()) {
                    return Err(GeomError::StepOverflow { t });
                }
                q = qn;
                v = vn;
            }
            Err(e @ GeomError::ChartDomain { .. }) => {
                truncated = Some(e);
                break;
            }
            Err(GeomError::NonFinite { .. }) => return Err(GeomError::StepOverflow { t }),
            Err(e) => return Err(e),
        }
        speed_drift = speed_drift.max((speed_of(spec, q.as_slice(), v.as_slice())? - 1.0).abs());
        samples.push(GeodesicSample {
            t,
            position: q.as_slice().to_vec(),
            velocity: v.as_slice().to_vec(),
        });
    }
    Ok(GeodesicTrace {
        samples,
        speed_drift,
        truncated,
    })
}

fn speed_of(spec: &MetricSpec, p: &[f64], v: &[f64]) -> Result<f64> {
    let v = DVector::from_column_slice(v);
    Ok(spec.inner(p, &v, &v)?.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::ChartDomain;
    use nalgebra::DMatrix;

    fn polar() -> MetricSpec {
        MetricSpec::new(2, |p| DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, p[0] * p[0]]))
            .with_partials(|p| {
                vec![
                    DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 2.0 * p[0]]),
                    DMatrix::zeros(2, 2),
                ]
            })
            .with_domain(ChartDomain::new(vec![0.0, f64::NEG_INFINITY], vec![f64::INFINITY; 2]).unwrap())
    }

    #[test]
    fn flat_lines_are_straight() {
        let v = [0.6, 0.8];
        let tr = geodesic_integrate(&MetricSpec::euclidean(2), &[1.0, -1.0], &v, 5.0, 1e-2).unwrap();
        let end = tr.end().unwrap();
        assert!((end.position[0] - 4.0).abs() < 1e-12 && (end.position[1] - 3.0).abs() < 1e-12);
        assert!(tr.speed_drift < 1e-14);
    }

    #[test]
    fn polar_geodesic_is_a_cartesian_line() {
        let tr = geodesic_integrate(&polar(), &[1.0, 0.0], &[0.0, 1.0], 10.0, 1e-3).unwrap();
        let worst = tr
            .samples
            .iter()
            .map(|s| {
                let (x, y) = (s.position[0] * s.position[1].cos(), s.position[0] * s.position[1].sin());
                (x - 1.0).abs().max((y - s.t).abs())
            })
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "{worst:e}");
        assert!(tr.speed_drift < 1e-6);
    }

    #[test]
    fn non_unit_velocity_is_rejected() {
        assert!(matches!(
            geodesic_integrate(&MetricSpec::euclidean(2), &[0.0, 0.0], &[1.0, 1.0], 1.0, 0.1),
            Err(GeomError::Precondition(_))
        ));
    }

    #[test]
    fn leaving_the_domain_truncates() {
        let m = MetricSpec::euclidean(1).with_domain(ChartDomain::cube(1, -1.0, 1.0).unwrap());
        let tr = geodesic_integrate(&m, &[0.0], &[1.0], 3.0, 0.1).unwrap();
        assert!(tr.truncated.is_some());
        assert!(tr.end().unwrap().position[0] <= 1.0);
    }
}
