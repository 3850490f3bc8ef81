//! Subcommand runners and exit-code policy.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;

use cdsplit_core::chart::{ricci_numeric, BilinearForm, MetricSpec};
use cdsplit_core::comparison::{
    bochner_inequality_margin, bochner_residual, radial_comparison_check, riccati_comparison_trace, rigidity_check,
    write_comparison_csv, RiccatiComparisonSample,
};
use cdsplit_core::export::write_csv;
use cdsplit_core::geodesic::{
    clairaut_constant, completeness_diagnostic, default_directions, f_along_geodesic, geodesic_integrate,
    normalize_velocity, write_trace_csv, GeodesicTrace,
};
use cdsplit_core::warped::{riccati_obstruction_with, split_cd_threshold, BlowUpTrigger, RiccatiConfig, TimeDirection};
use cdsplit_core::weighted::{cd_verify, generalized_ricci, linspace, ExtendedReal, SampleGrid};
use cdsplit_core::GeomError;

use crate::expr::{chart_vars, Expr};
use crate::manifest::{DensityDecl, Manifest, RawManifest};
use crate::model::{is_violation, Model};
use crate::report::{coord_header, fmt_point, sha256_hex, Header, Report};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Relative error allowed between numeric and closed-form Ricci tensors.
pub const CURVATURE_TOL: f64 = 1e-5;
pub const SPEED_DRIFT_TOL: f64 = 1e-6;
pub const CLAIRAUT_TOL: f64 = 1e-8;
pub const SLACK_TOL: f64 = 1e-8;
pub const RICCATI_RESIDUAL_TOL: f64 = 1e-3;
pub const RIGIDITY_LAP_TOL: f64 = 1e-6;
pub const RIGIDITY_HESS_TOL: f64 = 1e-5;
pub const RIGIDITY_RIC_TOL: f64 = 1e-6;
pub const BOCHNER_TOL: f64 = 1e-4;
pub const RIGIDITY_POINTS: usize = 200;
pub const COMPLETENESS_DIRECTIONS: usize = 8;
pub const COMPLETENESS_CHECKPOINTS: usize = 10;
/// Upper bound on samples along a comparison ray.
const TRACE_STEPS: usize = 1000;
/// Default test function for the Bochner identity.
const DEFAULT_BOCHNER_H: &str = "r^3/6 + r*y1 - y1^2/2";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sub {
    Curvature,
    VerifyCd,
    Threshold,
    Riccati,
    Geodesic,
    Compare,
    Bochner,
    Suite,
}

impl Sub {
    pub fn name(self) -> &'static str {
        match self {
            Sub::Curvature => "curvature",
            Sub::VerifyCd => "verify-cd",
            Sub::Threshold => "threshold",
            Sub::Riccati => "riccati",
            Sub::Geodesic => "geodesic",
            Sub::Compare => "compare",
            Sub::Bochner => "bochner",
            Sub::Suite => "suite",
        }
    }

    /// The checks run by `suite`, in order.
    pub const CHECKS: [Sub; 7] = [
        Sub::Curvature,
        Sub::VerifyCd,
        Sub::Threshold,
        Sub::Riccati,
        Sub::Geodesic,
        Sub::Compare,
        Sub::Bochner,
    ];
}

#[derive(Debug, Clone)]
pub struct Options {
    pub manifest: PathBuf,
    pub out: PathBuf,
    pub seed: u64,
    pub overrides: Vec<String>,
}

struct Ctx {
    manifest: Manifest,
    model: Model,
    seed: u64,
}

enum Failure {
    NotApplicable(String),
    Geom(GeomError),
}

impl From<GeomError> for Failure {
    fn from(e: GeomError) -> Self {
        Failure::Geom(e)
    }
}

type Res = Result<Report, Failure>;

/// Run one subcommand; returns the process exit code.
pub fn execute(sub: Sub, opts: &Options, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let (ctx, header) = match load(opts) {
        Ok(v) => v,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_USAGE;
        }
    };
    let (reports, code) = if sub == Sub::Suite {
        suite(&ctx)
    } else {
        match run_check(sub, &ctx) {
            Ok(r) => {
                let code = if r.passed { EXIT_PASS } else { EXIT_VIOLATION };
                (vec![r], code)
            }
            Err(Failure::NotApplicable(msg)) => {
                let _ = writeln!(stderr, "error: {} does not apply: {msg}", sub.name());
                return EXIT_USAGE;
            }
            Err(Failure::Geom(e)) if is_violation(&e) => (vec![violation_report(sub, &e)], EXIT_VIOLATION),
            Err(Failure::Geom(e)) => {
                let _ = writeln!(stderr, "error: {e}");
                return EXIT_USAGE;
            }
        }
    };
    for r in &reports {
        if let Err(e) = r.write(&header, &opts.out) {
            let _ = writeln!(stderr, "error: writing {}: {e}", opts.out.display());
            return EXIT_USAGE;
        }
    }
    if let Some(last) = reports.last() {
        let _ = stdout.write_all(last.render(&header).as_bytes());
    }
    code
}

fn load(opts: &Options) -> Result<(Ctx, Header), String> {
    let bytes = fs::read(&opts.manifest).map_err(|e| format!("{}: {e}", opts.manifest.display()))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| "manifest is not valid UTF-8".to_string())?;
    let mut raw = RawManifest::parse(&text).map_err(|e| e.to_string())?;
    for o in &opts.overrides {
        raw.apply_override(o).map_err(|e| e.to_string())?;
    }
    let manifest = crate::manifest::validate(&raw).map_err(|e| e.to_string())?;
    let model = Model::build(&manifest).map_err(|e| e.to_string())?;
    let header = Header {
        manifest_name: manifest.name.clone(),
        manifest_sha256: sha256_hex(&bytes),
        seed: opts.seed,
    };
    Ok((
        Ctx {
            manifest,
            model,
            seed: opts.seed,
        },
        header,
    ))
}

fn violation_report(sub: Sub, e: &GeomError) -> Report {
    let mut r = Report::new(sub.name());
    r.line("violation", e.to_string());
    r.passed = false;
    r
}

fn run_check(sub: Sub, ctx: &Ctx) -> Res {
    match sub {
        Sub::Curvature => curvature(ctx),
        Sub::VerifyCd => verify_cd(ctx),
        Sub::Threshold => threshold(ctx),
        Sub::Riccati => riccati(ctx),
        Sub::Geodesic => geodesic(ctx),
        Sub::Compare => compare(ctx),
        Sub::Bochner => bochner(ctx),
        Sub::Suite => Err(Failure::NotApplicable("suite does not nest".into())),
    }
}

fn suite(ctx: &Ctx) -> (Vec<Report>, i32) {
    let mut summary = Report::new("suite");
    let mut reports = Vec::new();
    for sub in Sub::CHECKS {
        match run_check(sub, ctx) {
            Ok(r) => {
                summary.check(sub.name(), r.passed);
                reports.push(r);
            }
            Err(Failure::NotApplicable(msg)) => summary.line(sub.name(), format!("skipped ({msg})")),
            Err(Failure::Geom(e)) => {
                summary.passed = false;
                summary.line(sub.name(), format!("fail ({e})"));
                reports.push(violation_report(sub, &e));
            }
        }
    }
    let code = if summary.passed { EXIT_PASS } else { EXIT_VIOLATION };
    reports.push(summary);
    (reports, code)
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> cdsplit_core::Result<()>) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn upper_entries(form: &BilinearForm) -> impl Iterator<Item = Option<f64>> + '_ {
    let n = form.dim();
    (0..n).flat_map(move |i| (i..n).map(move |j| Some(form.get(i, j))))
}

fn upper_names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).flat_map(|i| (i..n).map(move |j| format!("{prefix}_{i}{j}"))).collect()
}

fn curvature(ctx: &Ctx) -> Res {
    let m = &ctx.manifest;
    let n = m.dim;
    let (metric, density) = (ctx.model.metric(), ctx.model.density());
    let grid = match &m.curvature_points {
        Some(p) => SampleGrid::Points(p.clone()),
        None => SampleGrid::random_in(&ctx.model.sample_box(m)?, m.curvature_count, ctx.seed),
    };
    let points = grid.points()?;
    let rows = points
        .par_iter()
        .map(|p| {
            let ric = ricci_numeric(&metric, p)?;
            let weighted = generalized_ricci(&metric, &density, m.n_param, p)?;
            let analytic = ctx.model.analytic_ricci(p).transpose()?;
            let chol = metric.factor(p)?;
            let rel = analytic.as_ref().map(|a| ric.relative_error(a, &chol));
            let mut row: Vec<Option<f64>> = p.iter().map(|v| Some(*v)).collect();
            row.extend(upper_entries(&ric));
            row.extend(upper_entries(&weighted));
            match &analytic {
                Some(a) => row.extend(upper_entries(a)),
                None => row.extend(std::iter::repeat(None).take(n * (n + 1) / 2)),
            }
            row.push(rel);
            Ok((row, rel))
        })
        .collect::<cdsplit_core::Result<Vec<_>>>()?;
    let mut header = coord_header(n);
    header.extend(upper_names("ric", n));
    header.extend(upper_names("ric_weighted", n));
    header.extend(upper_names("ric_analytic", n));
    header.push("rel_error".into());
    let table: Vec<Vec<Option<f64>>> = rows.iter().map(|(r, _)| r.clone()).collect();

    let mut r = Report::new("curvature");
    r.grid = grid.describe();
    r.tol("relative_error", CURVATURE_TOL);
    r.line("manifold", format!("{} (dimension {n})", m.kind.name()));
    r.line("weighted Ricci", format!("N = {}", m.n_param));
    r.line("points", points.len().to_string());
    let rels: Vec<f64> = rows.iter().filter_map(|(_, e)| *e).collect();
    if rels.is_empty() {
        r.line("closed-form Ricci", "unavailable for this manifold kind");
    } else {
        let worst = rels.iter().cloned().fold(0.0_f64, f64::max);
        r.num("max relative error", worst);
        r.check("numeric vs closed form", worst <= CURVATURE_TOL);
    }
    r.attach("curvature.csv", csv_bytes(|b| write_csv(b, &header, &table))?);
    Ok(r)
}

fn verify_cd(ctx: &Ctx) -> Res {
    let m = &ctx.manifest;
    let grid = ctx.model.cd_grid(m)?;
    let metric = ctx.model.metric();
    let rep = cd_verify(&metric, &ctx.model.density(), m.lambda, m.n_param, &grid, m.numeric.tol_cd)?;
    let mut header = coord_header(m.dim);
    header.push("min_eigenvalue".into());
    let table: Vec<Vec<Option<f64>>> = rep
        .samples
        .iter()
        .map(|s| {
            let mut row: Vec<Option<f64>> = s.point.iter().map(|v| Some(*v)).collect();
            row.push(Some(s.min_eigenvalue));
            row
        })
        .collect();
    let mut r = Report::new("verify-cd");
    r.grid = rep.grid_spec.clone();
    r.tol("tol_cd", rep.tol);
    r.line("condition", format!("Ric^N >= lambda g with N = {}, lambda = {}", m.n_param, m.lambda));
    r.line("points", rep.samples.len().to_string());
    r.num("min eigenvalue of Ric^N - lambda g", rep.min);
    r.line("witness", fmt_point(&rep.witness));
    r.line("verdict", rep.verdict_label());
    r.passed = rep.passed();
    r.attach("verify-cd.csv", csv_bytes(|b| write_csv(b, &header, &table))?);
    Ok(r)
}

fn threshold(ctx: &Ctx) -> Res {
    let Model::Split(split) = &ctx.model else {
        return Err(Failure::NotApplicable("needs a split manifold".into()));
    };
    let m = &ctx.manifest;
    let (lo, hi, count) = (m.grid.r_min, m.grid.r_max, m.numeric.threshold_samples);
    let thr = split_cd_threshold(split, lo, hi, count)?;
    let table: Vec<Vec<Option<f64>>> = linspace(lo, hi, count)
        .into_iter()
        .map(|t| vec![Some(t), Some(split.threshold_integrand(t))])
        .collect();
    let mut r = Report::new("threshold");
    r.grid = format!("r: {count} pts in [{lo}, {hi}], golden-section refinement");
    r.tol("tol_cd", m.numeric.tol_cd);
    r.num("threshold", thr.value);
    r.num("argmax", thr.argmax);
    r.line("divergent", if thr.divergent { "yes" } else { "no" });
    r.check("attained on the sampled range", !thr.divergent);
    if matches!(&m.density, DensityDecl::FiberPotential(e) if !e.is_const()) {
        r.line("fiber", "carries a potential; compare the threshold with its weighted Ricci lower bound");
    } else {
        match split.fiber().einstein_constant() {
            Some(e) => {
                r.num("fiber Einstein constant", e);
                r.check("fiber constant >= threshold", e + m.numeric.tol_cd >= thr.value);
            }
            None => r.line("fiber", "no Einstein constant declared; nothing to compare"),
        }
    }
    let header = vec!["r".to_string(), "integrand".to_string()];
    r.attach("threshold.csv", csv_bytes(|b| write_csv(b, &header, &table))?);
    Ok(r)
}

fn riccati(ctx: &Ctx) -> Res {
    let m = &ctx.manifest;
    let rb = &m.riccati;
    let cfg = RiccatiConfig {
        dt: m.numeric.dt,
        t_max: rb.t_max,
        blowup_threshold: m.numeric.blowup_threshold,
        overflow_guard: m.numeric.overflow_guard,
        backward: true,
    };
    let rep = riccati_obstruction_with(rb.a, rb.y0, rb.y0p, &cfg)?;
    let table: Vec<Vec<Option<f64>>> = rep
        .backward_trace
        .iter()
        .skip(1)
        .rev()
        .chain(rep.trace.iter())
        .map(|s| vec![Some(s.t), Some(s.y), Some(s.yp)])
        .collect();
    let mut r = Report::new("riccati");
    r.grid = format!("t in [-{0}, {0}], dt <= {1}", rb.t_max, cfg.dt);
    r.tol("blowup_threshold", cfg.blowup_threshold);
    r.tol("overflow_guard", cfg.overflow_guard);
    r.line("equation", format!("y'' = -a e^(-2y) with a = {}", rb.a));
    r.line("initial data", format!("y(0) = {}, y'(0) = {}", rb.y0, rb.y0p));
    r.num("energy", rep.energy);
    match rep.blow_up_time {
        Some(t) => r.num("blow_up_time", t),
        None => r.line("blow_up_time", "none"),
    }
    if let Some(tr) = rep.trigger {
        r.line(
            "trigger",
            match tr {
                BlowUpTrigger::Threshold => "y below threshold",
                BlowUpTrigger::SlopeGuard => "slope guard",
            },
        );
    }
    if let Some(d) = rep.direction {
        r.line(
            "direction",
            match d {
                TimeDirection::Forward => "forward",
                TimeDirection::Backward => "backward",
            },
        );
    }
    r.check("blow_up", rep.blow_up);
    let header = vec!["t".to_string(), "y".to_string(), "yp".to_string()];
    r.attach("riccati.csv", csv_bytes(|b| write_csv(b, &header, &table))?);
    Ok(r)
}

fn start_and_velocity(ctx: &Ctx, metric: &MetricSpec) -> Result<(Vec<f64>, Vec<f64>), Failure> {
    let m = &ctx.manifest;
    let start = m.geodesic.start.clone().unwrap_or_else(|| m.grid_center());
    let velocity = match &m.geodesic.velocity {
        Some(v) => normalize_velocity(metric, &start, v)?,
        None => default_directions(metric, &start, 1, ctx.seed)?.remove(0),
    };
    Ok((start, velocity))
}

fn geodesic(ctx: &Ctx) -> Res {
    let m = &ctx.manifest;
    let (metric, density) = (ctx.model.metric(), ctx.model.density());
    let (start, velocity) = start_and_velocity(ctx, &metric)?;
    let (length, dt) = (m.geodesic.length, m.numeric.dt);
    let trace = geodesic_integrate(&metric, &start, &velocity, length, dt)?;
    let f_gamma = f_along_geodesic(&metric, &density, &trace)?;
    let clairaut = match &ctx.model {
        Model::Split(s) => Some(clairaut_constant(s, &trace)?),
        _ => None,
    };
    let dirs = default_directions(&metric, &start, COMPLETENESS_DIRECTIONS, ctx.seed)?;
    let table = completeness_diagnostic(&metric, &density, &start, &dirs, length, dt, COMPLETENESS_CHECKPOINTS)?;

    let mut r = Report::new("geodesic");
    r.grid = format!("RK4, dt <= {dt}, length {length}");
    r.tol("speed_drift", SPEED_DRIFT_TOL);
    if clairaut.is_some() {
        r.tol("clairaut_drift", CLAIRAUT_TOL);
    }
    r.line("start", fmt_point(&start));
    r.line("velocity", fmt_point(&velocity));
    r.line("samples", trace.samples.len().to_string());
    if let Some(end) = trace.end() {
        r.num("reached", end.t);
        r.line("end point", fmt_point(&end.position));
    }
    if let Some(e) = &trace.truncated {
        r.line("truncated", e.to_string());
    }
    r.num("speed drift", trace.speed_drift);
    r.check("unit speed kept", trace.speed_drift <= SPEED_DRIFT_TOL);
    if let Some(c) = &clairaut {
        r.num("clairaut constant", c.initial);
        r.num("clairaut drift", c.drift);
        r.check("clairaut constant kept", c.drift <= CLAIRAUT_TOL);
    }
    match table.min_per_checkpoint.last().copied().flatten() {
        Some(v) => r.num("completeness min at full length", v),
        None => r.line("completeness min at full length", "no direction reached it"),
    }
    r.line("completeness note", table.note);

    let cl_values = clairaut.as_ref().map(|c| c.values.as_slice());
    let trace_csv = csv_bytes(|b| write_trace_csv(b, &trace, cl_values, Some(&f_gamma)))?;
    r.attach("geodesic.csv", trace_csv);
    let mut header = vec!["r".to_string(), "min".to_string()];
    header.extend((0..table.directions.len()).map(|k| format!("d{k}")));
    let rows: Vec<Vec<Option<f64>>> = table
        .checkpoints
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut row = vec![Some(*c), table.min_per_checkpoint[i]];
            row.extend(table.directions.iter().map(|d| d.values[i]));
            row
        })
        .collect();
    r.attach("completeness.csv", csv_bytes(|b| write_csv(b, &header, &rows))?);
    Ok(r)
}

fn straight_trace(ctx: &Ctx, start: Vec<f64>, length: f64) -> Result<GeodesicTrace, Failure> {
    let metric = ctx.model.metric();
    let mut e0 = vec![0.0; start.len()];
    e0[0] = 1.0;
    let v = normalize_velocity(&metric, &start, &e0)?;
    let dt = (length / TRACE_STEPS as f64).max(ctx.manifest.numeric.dt);
    Ok(geodesic_integrate(&metric, &start, &v, length, dt)?)
}

fn riccati_lines(r: &mut Report, samples: &[RiccatiComparisonSample]) -> Result<Vec<u8>, Failure> {
    let worst = samples.iter().map(|s| s.residual).fold(f64::NEG_INFINITY, f64::max);
    r.num("max Riccati residual along the ray", worst);
    r.check("Riccati inequality", worst <= RICCATI_RESIDUAL_TOL);
    let header: Vec<String> = ["t", "lambda", "lambda_dot", "residual"].iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<Option<f64>>> = samples
        .iter()
        .map(|s| vec![Some(s.t), Some(s.lambda), Some(s.lambda_dot), Some(s.residual)])
        .collect();
    csv_bytes(|b| write_csv(b, &header, &rows))
}

fn compare(ctx: &Ctx) -> Res {
    let m = &ctx.manifest;
    let mut r = Report::new("compare");
    r.tol("riccati_residual", RICCATI_RESIDUAL_TOL);
    match &ctx.model {
        Model::Radial(model) => {
            let g = &m.grid;
            let rhos = linspace(g.rho_min, g.rho_max, g.rho_count);
            let samples = radial_comparison_check(model, &rhos)?;
            r.grid = format!("rho: {} pts in [{}, {}]", g.rho_count, g.rho_min, g.rho_max);
            r.tol("slack", SLACK_TOL);
            let min_slack = samples.iter().map(|s| s.slack).fold(f64::INFINITY, f64::min);
            let worst_lap = samples
                .iter()
                .map(|s| (s.lap_f_r - s.lap_f_r_numeric).abs())
                .fold(0.0_f64, f64::max);
            r.num("min slack", min_slack);
            r.num("max |closed form - numeric| of weighted Laplacian", worst_lap);
            r.check("weighted Laplacian below the bound", min_slack >= -SLACK_TOL);
            r.attach("compare.csv", csv_bytes(|b| write_comparison_csv(b, &samples))?);
            let mut start = vec![0.0; m.dim];
            start[0] = g.rho_min;
            let trace = straight_trace(ctx, start, g.rho_max - g.rho_min)?;
            let dist = ctx.model.distance_field().expect("radial distance");
            let rc = riccati_comparison_trace(&ctx.model.metric(), &ctx.model.density(), &dist, &trace)?;
            let bytes = riccati_lines(&mut r, &rc)?;
            r.attach("riccati-comparison.csv", bytes);
        }
        Model::Split(split) => {
            let grid = SampleGrid::random_in(&ctx.model.sample_box(m)?, RIGIDITY_POINTS, ctx.seed);
            let rep = rigidity_check(split, &grid)?;
            r.grid = grid.describe();
            r.tol("laplacian", RIGIDITY_LAP_TOL);
            r.tol("hessian", RIGIDITY_HESS_TOL);
            r.tol("ricci_radial", RIGIDITY_RIC_TOL);
            r.num("max ||grad r| - 1|", rep.grad_deviation);
            r.num("max |weighted Laplacian of r|", rep.lap_f);
            r.num("max Hessian residual", rep.hess_residual);
            r.num("max |Ric_f^1(grad r, grad r)|", rep.ricci_radial);
            r.num("max Busemann residual", rep.busemann);
            r.check("harmonic distance", rep.lap_f <= RIGIDITY_LAP_TOL);
            r.check("Hessian splitting", rep.hess_residual <= RIGIDITY_HESS_TOL);
            r.check("radial Ricci vanishes", rep.ricci_radial <= RIGIDITY_RIC_TOL);
            let mut start = m.grid_center();
            start[0] = m.grid.r_min;
            let length = m.numeric.t_max.min(m.grid.r_max - m.grid.r_min);
            let trace = straight_trace(ctx, start, length)?;
            let dist = split.distance_field();
            let rc = riccati_comparison_trace(&ctx.model.metric(), &ctx.model.density(), &dist, &trace)?;
            let bytes = riccati_lines(&mut r, &rc)?;
            r.attach("riccati-comparison.csv", bytes);
        }
        _ => {
            return Err(Failure::NotApplicable(
                "needs a split manifold or a radial model".into(),
            ))
        }
    }
    Ok(r)
}

fn bochner(ctx: &Ctx) -> Res {
    let m = &ctx.manifest;
    let n = m.dim;
    let h = match &m.bochner_h {
        Some(h) => h.clone(),
        None => Expr::parse(DEFAULT_BOCHNER_H, &chart_vars(n))
            .map_err(|e| GeomError::InvalidArgument(format!("default test function: {e}")))?,
    };
    let field = h.to_field(n);
    let (metric, density) = (ctx.model.metric(), ctx.model.density());
    let grid = SampleGrid::random_in(&ctx.model.sample_box(m)?, m.bochner_samples, ctx.seed);
    let points = grid.points()?;
    let dist = ctx.model.distance_field();
    let margin_checked = dist.is_some() && m.lambda == 0.0 && m.n_param == ExtendedReal::Finite(1.0);
    let rows = points
        .par_iter()
        .map(|p| {
            let t = bochner_residual(&metric, &density, &field, p)?;
            let rel = t.residual.abs() / t.lhs.abs().max(1.0);
            let margin = match &dist {
                Some(d) => Some(bochner_inequality_margin(&metric, &density, 0.0, n as f64 - 1.0, d, p)?),
                None => None,
            };
            let mut row: Vec<Option<f64>> = p.iter().map(|v| Some(*v)).collect();
            row.extend([Some(t.lhs), Some(t.hess_sq), Some(t.ricci), Some(t.gradient_term), Some(t.residual), Some(rel), margin]);
            Ok((row, rel, margin))
        })
        .collect::<cdsplit_core::Result<Vec<_>>>()?;
    let worst = rows.iter().map(|(_, e, _)| *e).fold(0.0_f64, f64::max);
    let min_margin = rows.iter().filter_map(|(_, _, g)| *g).fold(f64::INFINITY, f64::min);

    let mut r = Report::new("bochner");
    r.grid = grid.describe();
    r.tol("relative_residual", BOCHNER_TOL);
    r.line("test function", h.display(&chart_vars(n)).to_string());
    r.num("max relative residual", worst);
    r.check("weighted Bochner identity", worst <= BOCHNER_TOL);
    if dist.is_some() {
        r.num("min inequality margin for the distance function", min_margin);
        if margin_checked {
            r.tol("margin", BOCHNER_TOL);
            r.check("Bochner inequality under CD(0,1)", min_margin >= -BOCHNER_TOL);
        } else {
            r.line("inequality margin", "informational: the manifest does not declare CD(0,1)");
        }
    }
    let mut header = coord_header(n);
    header.extend(
        ["lhs", "hess_sq", "ricci", "gradient_term", "residual", "relative_residual", "margin"]
            .iter()
            .map(|s| s.to_string()),
    );
    let table: Vec<Vec<Option<f64>>> = rows.into_iter().map(|(row, _, _)| row).collect();
    r.attach("bochner.csv", csv_bytes(|b| write_csv(b, &header, &table))?);
    Ok(r)
}
