//! The comparison ODE `y'' = -a e^{-2y}` and detection of finite-time blow-up to `-∞`.
//!
//! Integration is classical RK4 with base step `dt`. Close to a blow-up the
//! solution varies on the time scale `min(1/|y'|, e^{y}/√a)`, which shrinks to
//! zero; the step is capped at a fixed fraction of that scale so the blow-up
//! time is resolved instead of being overshot by one coarse step. Away from
//! blow-up every step equals `dt`.

use crate::error::{GeomError, Result};

/// Step cap as a fraction of the local time scale.
const SCALE_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiConfig {
    pub dt: f64,
    pub t_max: f64,
    /// Blow-up is declared once `y` falls to this value.
    pub blowup_threshold: f64,
    /// Blow-up is also declared once `y' ≤ -overflow_guard`; `y' ≥ overflow_guard`
    /// is an overflow error.
    pub overflow_guard: f64,
    /// When the forward solution exists up to `t_max`, also integrate
    /// backward in time.
    pub backward: bool,
}

impl RiccatiConfig {
    pub fn new(t_max: f64) -> Self {
        Self {
            dt: 1e-3,
            t_max,
            blowup_threshold: -50.0,
            overflow_guard: 1e8,
            backward: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlowUpTrigger {
    Threshold,
    SlopeGuard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeDirection {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiSample {
    pub t: f64,
    pub y: f64,
    pub yp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiReport {
    pub blow_up: bool,
    /// Signed: negative when the blow-up happens backward in time.
    pub blow_up_time: Option<f64>,
    pub trigger: Option<BlowUpTrigger>,
    pub direction: Option<TimeDirection>,
    /// Forward trace, `t` increasing from 0.
    pub trace: Vec<RiccatiSample>,
    /// Backward trace, `t` decreasing from 0; empty unless integrated.
    pub backward_trace: Vec<RiccatiSample>,
    pub threshold_used: f64,
    /// The conserved quantity `y'² - a e^{-2y}` at `t = 0`.
    pub energy: f64,
}

/// Integrate with default settings (`dt = 1e-3`, threshold `-50`, guard `1e8`).
pub fn riccati_obstruction(a: f64, y0: f64, y0p: f64, t_max: f64) -> Result<RiccatiReport> {
    riccati_obstruction_with(a, y0, y0p, &RiccatiConfig::new(t_max))
}

pub fn riccati_obstruction_with(a: f64, y0: f64, y0p: f64, cfg: &RiccatiConfig) -> Result<RiccatiReport> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(GeomError::Precondition(format!("coefficient a must be positive, got {a}")));
    }
    if !(cfg.t_max > 0.0 && cfg.t_max.is_finite()) {
        return Err(GeomError::Precondition(format!("t_max must be positive, got {}", cfg.t_max)));
    }
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return Err(GeomError::InvalidArgument(format!("step must be positive, got {}", cfg.dt)));
    }
    if !(y0.is_finite() && y0p.is_finite()) {
        return Err(GeomError::NonFinite {
            what: "riccati initial data".into(),
            point: vec![y0, y0p],
        });
    }
    let energy = y0p * y0p - a * (-2.0 * y0).exp();
    let mut report = RiccatiReport {
        blow_up: false,
        blow_up_time: None,
        trigger: None,
        direction: None,
        trace: Vec::new(),
        backward_trace: Vec::new(),
        threshold_used: cfg.blowup_threshold,
        energy,
    };

    let (trace, hit) = integrate(a, y0, y0p, cfg)?;
    report.trace = trace;
    if let Some((t, trig)) = hit {
        report.blow_up = true;
        report.blow_up_time = Some(t);
        report.trigger = Some(trig);
        report.direction = Some(TimeDirection::Forward);
        return Ok(report);
    }
    if cfg.backward {
        // y(-s) solves the same equation with the initial slope negated
        let (trace, hit) = integrate(a, y0, -y0p, cfg)?;
        report.backward_trace = trace
            .into_iter()
            .map(|s| RiccatiSample {
                t: -s.t,
                y: s.y,
                yp: -s.yp,
            })
            .collect();
        if let Some((t, trig)) = hit {
            report.blow_up = true;
            report.blow_up_time = Some(-t);
            report.trigger = Some(trig);
            report.direction = Some(TimeDirection::Backward);
        }
    }
    Ok(report)
}

type Hit = Option<(f64, BlowUpTrigger)>;

fn integrate(a: f64, y0: f64, y0p: f64, cfg: &RiccatiConfig) -> Result<(Vec<RiccatiSample>, Hit)> {
    let rhs = |y: f64| -a * (-2.0 * y).exp();
    let (mut t, mut y, mut yp) = (0.0_f64, y0, y0p);
    let mut trace = vec![RiccatiSample { t, y, yp }];
    let sqrt_a = a.sqrt();
    // steps are counted so that t lands on multiples of dt in the regular regime
    let mut k: u64 = 0;
    while t < cfg.t_max {
        let next_grid = ((k + 1) as f64 * cfg.dt).min(cfg.t_max);
        let scale = (1.0 / yp.abs()).min(y.exp() / sqrt_a);
        let capped = SCALE_FRACTION * scale;
        let h = if next_grid - t <= capped { next_grid - t } else { capped };

        let (k1y, k1v) = (yp, rhs(y));
        let (k2y, k2v) = (yp + 0.5 * h * k1v, rhs(y + 0.5 * h * k1y));
        let (k3y, k3v) = (yp + 0.5 * h * k2v, rhs(y + 0.5 * h * k2y));
        let (k4y, k4v) = (yp + h * k3v, rhs(y + h * k3y));
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        yp += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        t = if h == next_grid - t {
            k += 1;
            next_grid
        } else {
            t + h
        };
        if !(y.is_finite() && yp.is_finite()) || yp >= cfg.overflow_guard {
            return Err(GeomError::StepOverflow { t });
        }
        trace.push(RiccatiSample { t, y, yp });
        if y <= cfg.blowup_threshold {
            return Ok((trace, Some((t, BlowUpTrigger::Threshold))));
        }
        if yp <= -cfg.overflow_guard {
            return Ok((trace, Some((t, BlowUpTrigger::SlopeGuard))));
        }
    }
    Ok((trace, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn tracks_log_cos() {
        let rep = riccati_obstruction(1.0, 0.0, 0.0, 3.0).unwrap();
        let err = rep
            .trace
            .iter()
            .filter(|s| s.t <= 1.45)
            .map(|s| (s.y - s.t.cos().ln()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "{err:e}");
        assert!(rep.blow_up);
        assert!((rep.blow_up_time.unwrap() - FRAC_PI_2).abs() < 1e-6);
        assert_eq!(rep.direction, Some(TimeDirection::Forward));
    }

    #[test]
    fn blow_up_time_is_stable_under_step_halving() {
        for dt in [1e-3, 5e-4] {
            let mut cfg = RiccatiConfig::new(3.0);
            cfg.dt = dt;
            let rep = riccati_obstruction_with(1.0, 0.0, 0.0, &cfg).unwrap();
            assert!((rep.blow_up_time.unwrap() - FRAC_PI_2).abs() < 1e-3);
        }
    }

    #[test]
    fn rejects_nonpositive_coefficient() {
        assert!(riccati_obstruction(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(riccati_obstruction(-1.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn steep_initial_growth_blows_up_backward() {
        let rep = riccati_obstruction(1.0, 0.0, 10.0, 50.0).unwrap();
        assert!(rep.blow_up);
        assert_eq!(rep.direction, Some(TimeDirection::Backward));
        let s = 99f64.sqrt();
        let exact = -(s.asinh() / s);
        assert!((rep.blow_up_time.unwrap() - exact).abs() < 1e-6);
        // forward the slope settles near √99 and the solution escapes upward
        let last = rep.trace.last().unwrap();
        assert!((last.yp - s).abs() < 1e-6 && last.t == 50.0);
    }

    #[test]
    fn forward_only_reports_no_blow_up_for_escaping_solution() {
        let mut cfg = RiccatiConfig::new(5.0);
        cfg.backward = false;
        let rep = riccati_obstruction_with(1.0, 0.0, 10.0, &cfg).unwrap();
        assert!(!rep.blow_up && rep.backward_trace.is_empty());
    }
}
