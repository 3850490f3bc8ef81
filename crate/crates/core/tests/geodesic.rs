use cdsplit_core::builtins::{polar_plane, sine_sphere};
use cdsplit_core::chart::{DensitySpec, ScalarField};
use cdsplit_core::geodesic::{
    clairaut_constant, completeness_diagnostic, default_directions, geodesic_integrate, normalize_velocity,
    write_trace_csv,
};
use cdsplit_core::warped::{riccati_obstruction, riccati_obstruction_with, BlowUpTrigger, RiccatiConfig};

#[test]
fn split_space_conservation() {
    let s = sine_sphere(0.5).unwrap();
    for (p, v) in [([0.0, 0.2, -0.1], [1.0, 0.05, 0.02]), ([-3.0, 0.0, 0.5], [0.8, -0.05, 0.05])] {
        let v = normalize_velocity(s.metric(), &p, &v).unwrap();
        let tr = geodesic_integrate(s.metric(), &p, &v, 10.0, 1e-3).unwrap();
        assert!(tr.truncated.is_none());
        assert!(tr.speed_drift < 1e-6, "{:e}", tr.speed_drift);
        let c = clairaut_constant(&s, &tr).unwrap();
        assert!(c.drift < 1e-8, "{:e}", c.drift);
    }
}

#[test]
fn speed_drift_is_fourth_order() {
    let s = sine_sphere(0.5).unwrap();
    let p = [0.0, 0.2, -0.1];
    let v = normalize_velocity(s.metric(), &p, &[1.0, 0.5, 0.2]).unwrap();
    let coarse = geodesic_integrate(s.metric(), &p, &v, 10.0, 0.1).unwrap().speed_drift;
    let fine = geodesic_integrate(s.metric(), &p, &v, 10.0, 0.05).unwrap().speed_drift;
    assert!(coarse / fine >= 8.0, "{coarse:e} / {fine:e}");
}

#[test]
fn polar_geodesics_are_lines() {
    let m = polar_plane();
    let tr = geodesic_integrate(m.metric(), &[2.0, 0.0], &[-0.6, 0.4], 3.0, 1e-3).unwrap();
    let (x0, y0) = (2.0, 0.0);
    let (vx, vy) = (-0.6, 0.8);
    for s in &tr.samples {
        let (x, y) = (s.position[0] * s.position[1].cos(), s.position[0] * s.position[1].sin());
        assert!((x - (x0 + vx * s.t)).abs() < 1e-6 && (y - (y0 + vy * s.t)).abs() < 1e-6);
    }
}

#[test]
fn trace_csv_layout() {
    let m = polar_plane();
    let tr = geodesic_integrate(m.metric(), &[1.0, 0.0], &[1.0, 0.0], 0.5, 0.1).unwrap();
    let mut out = Vec::new();
    write_trace_csv(&mut out, &tr, None, None).unwrap();
    let text = String::from_utf8(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,q0,q1,v0,v1,clairaut,f_gamma");
    assert_eq!(lines.next().unwrap().split(',').count(), 7);
    assert!(!text.contains('\r'));
}

#[test]
fn bounded_potential_grows_linearly() {
    let s = sine_sphere(0.5).unwrap();
    let f = DensitySpec::Gradient(ScalarField::new(|p| 0.5 * p[0].sin()));
    let dirs = default_directions(s.metric(), &[0.0, 0.0, 0.0], 6, 42).unwrap();
    let tab = completeness_diagnostic(s.metric(), &f, &[0.0, 0.0, 0.0], &dirs, 4.0, 1e-2, 4).unwrap();
    // |f_γ| ≤ 1, so I(r) ≥ r e^{-1}
    for (r, v) in tab.checkpoints.iter().zip(&tab.min_per_checkpoint) {
        if let Some(v) = v {
            assert!(*v >= r * (-1.0f64).exp() - 1e-9);
        }
    }
}

#[test]
fn riccati_log_cos_and_blow_up() {
    let rep = riccati_obstruction(1.0, 0.0, 0.0, 3.0).unwrap();
    let err = rep
        .trace
        .iter()
        .filter(|s| s.t <= 1.45)
        .map(|s| (s.y - s.t.cos().ln()).abs())
        .fold(0.0_f64, f64::max);
    assert!(err < 1e-6, "{err:e}");
    let t = rep.blow_up_time.unwrap();
    assert!((t - std::f64::consts::FRAC_PI_2).abs() < 1e-3, "{t}");
}

#[test]
fn riccati_backward_blow_up_for_steep_data() {
    let mut cfg = RiccatiConfig::new(2.0);
    cfg.backward = true;
    let rep = riccati_obstruction_with(1.0, 0.0, 10.0, &cfg).unwrap();
    let exact = -(99.0f64.sqrt()).asinh() / 99.0f64.sqrt();
    let t = rep.blow_up_time.unwrap();
    assert!((t - exact).abs() < 1e-5, "{t} vs {exact}");
    assert!(matches!(rep.trigger, Some(BlowUpTrigger::Threshold) | Some(BlowUpTrigger::SlopeGuard)));
}
