//! Acceptance criteria 1-10, one PASS/FAIL line each. Exits nonzero if any fail.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cdsplit_core::builtins::{hyperbolic3, polar_plane, radial_log_model, random_twisted, sine_sphere, vector_field_example};
use cdsplit_core::chart::{ricci_numeric, ChartDomain, DensitySpec, MetricSpec, ScalarField};
use cdsplit_core::comparison::{bochner_residual, comparison_bound, radial_comparison_check, rigidity_check};
use cdsplit_core::geodesic::{clairaut_constant, geodesic_integrate, normalize_velocity};
use cdsplit_core::warped::{radial_identity_n, riccati_obstruction, split_cd_threshold, twisted_ricci_analytic, TwistedProduct};
use cdsplit_core::weighted::{
    cd_verify, drift_field, generalized_ricci_gradient, generalized_ricci_vector, linspace, ExtendedReal, SampleGrid,
    Verdict, TOL_CD,
};

type Outcome = Result<(bool, String), String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn random_points(lo: Vec<f64>, hi: Vec<f64>, count: usize, seed: u64) -> Result<Vec<Vec<f64>>, String> {
    SampleGrid::random_in(&ChartDomain::new(lo, hi).map_err(err)?, count, seed)
        .points()
        .map_err(err)
}

fn curvature() -> Outcome {
    let mut cases: Vec<(String, TwistedProduct, Vec<f64>, Vec<f64>)> = Vec::new();
    for dim in 2..=4 {
        for seed in 0..2 {
            let mut lo = vec![-2.5];
            let mut hi = vec![2.5];
            lo.extend(vec![-1.5; dim - 1]);
            hi.extend(vec![1.5; dim - 1]);
            cases.push((format!("random dim {dim}"), random_twisted(dim, seed).map_err(err)?, lo, hi));
        }
    }
    cases.push(("hyperbolic".into(), hyperbolic3(), vec![-2.0, -3.0, -3.0], vec![2.0, 3.0, 3.0]));
    cases.push(("polar".into(), polar_plane(), vec![0.3, 0.0], vec![5.0, 6.0]));
    let split = sine_sphere(0.2).map_err(err)?.as_twisted();
    cases.push(("sine sphere".into(), split, vec![-3.0, -2.0, -2.0], vec![3.0, 2.0, 2.0]));
    for n in [3, 4] {
        let ex = vector_field_example(n, 0.3).map_err(err)?;
        cases.push((format!("vector example n={n}"), ex.space, vec![-2.0; n], vec![2.0; n]));
    }
    let (mut points, mut worst) = (0, 0.0_f64);
    for (k, (_, tw, lo, hi)) in cases.iter().enumerate() {
        for p in random_points(lo.clone(), hi.clone(), 20, 100 + k as u64)? {
            let analytic = twisted_ricci_analytic(tw, &p).map_err(err)?;
            let numeric = ricci_numeric(tw.metric(), &p).map_err(err)?;
            let chol = tw.metric().factor(&p).map_err(err)?;
            worst = worst.max(numeric.relative_error(&analytic, &chol));
            points += 1;
        }
    }
    Ok((
        points >= 200 && worst <= 1e-5,
        format!("{points} points on {} manifolds, max relative error {worst:.2e}", cases.len()),
    ))
}

fn riccati() -> Outcome {
    let rep = riccati_obstruction(1.0, 0.0, 0.0, 3.0).map_err(err)?;
    let worst = rep
        .trace
        .iter()
        .filter(|s| s.t <= 1.45)
        .map(|s| (s.y - s.t.cos().ln()).abs())
        .fold(0.0_f64, f64::max);
    let t = rep.blow_up_time.ok_or("no blow-up detected")?;
    Ok((
        worst <= 1e-6 && (t - FRAC_PI_2).abs() <= 1e-3,
        format!("max |y - log cos t| on [0, 1.45] {worst:.2e}, blow-up at {t:.9} (pi/2 = {FRAC_PI_2:.9})"),
    ))
}

fn threshold() -> Outcome {
    // brute force: sup over s = sin r in [-1, 1] of -s e^s / 2
    let oracle = linspace(-1.0, 1.0, 2_000_001)
        .into_iter()
        .map(|s| -s * s.exp() / 2.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let thr = split_cd_threshold(&sine_sphere(1.0).map_err(err)?, -10.0, 10.0, 2001).map_err(err)?;
    let mut ok = (thr.value - oracle).abs() <= 1e-6 && !thr.divergent;
    let mut detail = format!("threshold {:.10} vs oracle {oracle:.10}", thr.value);
    for (lam, expect) in [(thr.value + 0.01, Verdict::Pass), (thr.value - 0.01, Verdict::Fail)] {
        let s = sine_sphere(lam).map_err(err)?;
        let grid = SampleGrid::split(-10.0, 10.0, 201, s.fiber().safe_box(), 3);
        let rep = cd_verify(s.metric(), &s.density(), 0.0, ExtendedReal::Finite(1.0), &grid, TOL_CD).map_err(err)?;
        ok &= rep.verdict == expect;
        detail.push_str(&format!("; fiber {lam:.4}: {}", rep.verdict_label()));
        if expect == Verdict::Fail {
            let r = rep.witness[0];
            ok &= (r.sin() + 1.0).abs() < 0.05;
            detail.push_str(&format!(" (witness r = {r:.4}, sin r = {:.4})", r.sin()));
        }
    }
    Ok((ok, detail))
}

fn comparison() -> Outcome {
    let mut exact = true;
    for n in 2..=5 {
        for r in [0.5, 1.0, 3.7] {
            let samples: Vec<(f64, f64)> = linspace(0.0, r, 11).into_iter().map(|t| (t, 1.3)).collect();
            exact &= comparison_bound(&samples, n, r).map_err(err)? == (n as f64 - 1.0) / r;
        }
    }
    let samples = radial_comparison_check(&radial_log_model(3), &linspace(0.1, 10.0, 100)).map_err(err)?;
    let min_slack = samples.iter().map(|s| s.slack).fold(f64::INFINITY, f64::min);
    Ok((
        exact && samples.len() == 100 && min_slack >= -1e-8,
        format!(
            "constant density gives (n-1)/r exactly: {exact}; radial model min slack {min_slack:.3e} at {} radii",
            samples.len()
        ),
    ))
}

fn random_cubic(rng: &mut ChaCha8Rng, n: usize) -> ScalarField {
    let c: Vec<f64> = (0..n * n * n + n * n + n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    ScalarField::new(move |x| {
        let mut s = 0.0;
        let mut k = 0;
        for i in 0..n {
            s += c[k] * x[i];
            k += 1;
            for j in 0..n {
                s += 0.5 * c[k] * x[i] * x[j];
                k += 1;
                for l in 0..n {
                    s += c[k] * x[i] * x[j] * x[l] / 6.0;
                    k += 1;
                }
            }
        }
        s
    })
}

fn bochner() -> Outcome {
    let half_norm_sq = || ScalarField::new(|x: &[f64]| 0.5 * x.iter().map(|v| v * v).sum::<f64>());
    let mut hand = 0.0_f64;
    for n in 2..=4 {
        let m = MetricSpec::euclidean(n);
        let p: Vec<f64> = (0..n).map(|k| 0.4 - 0.3 * k as f64).collect();
        let t = bochner_residual(&m, &DensitySpec::zero(n), &half_norm_sq(), &p).map_err(err)?;
        hand = hand.max((t.lhs - n as f64).abs()).max(t.residual.abs());
        let a: Vec<f64> = (0..n).map(|k| 0.5 + 0.25 * k as f64).collect();
        let ax: f64 = a.iter().zip(&p).map(|(a, x)| a * x).sum();
        let f = ScalarField::new(move |x| a.iter().zip(x).map(|(a, x)| a * x).sum());
        let t = bochner_residual(&m, &DensitySpec::Gradient(f), &half_norm_sq(), &p).map_err(err)?;
        hand = hand.max((t.lhs - (n as f64 - ax)).abs()).max(t.residual.abs());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let split = sine_sphere(0.5).map_err(err)?;
    let hyper = hyperbolic3();
    let mut worst = 0.0_f64;
    for trial in 0..100 {
        let h = random_cubic(&mut rng, 3);
        let (a, b) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let p: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let t = match trial % 3 {
            0 => {
                let f = ScalarField::new(move |x| a * x[0] * x[1] + b * x[2].cos());
                bochner_residual(&MetricSpec::euclidean(3), &DensitySpec::Gradient(f), &h, &p)
            }
            1 => {
                let f = ScalarField::new(move |x| x[0].sin() + a * x[1] * x[2] + b * x[1]);
                bochner_residual(split.metric(), &DensitySpec::Gradient(f), &h, &p)
            }
            _ => {
                let f = ScalarField::new(move |x| a * x[0] * x[0] + b * x[1] * x[2]);
                bochner_residual(hyper.metric(), &DensitySpec::Gradient(f), &h, &p)
            }
        }
        .map_err(err)?;
        worst = worst.max(t.residual.abs());
    }
    Ok((
        hand <= 1e-4 && worst <= 1e-4,
        format!("hand cases max error {hand:.2e}; 100 random triples (flat, sine-warped, hyperbolic) max residual {worst:.2e}"),
    ))
}

fn rigidity() -> Outcome {
    let split = sine_sphere(0.5).map_err(err)?;
    let domain = ChartDomain::new(vec![-5.0, -2.5, -2.5], vec![5.0, 2.5, 2.5]).map_err(err)?;
    let rep = rigidity_check(&split, &SampleGrid::random_in(&domain, 200, 17)).map_err(err)?;
    Ok((
        rep.points >= 200 && rep.lap_f <= 1e-6 && rep.hess_residual <= 1e-5 && rep.ricci_radial <= 1e-6,
        format!(
            "{} points: |lap_f r| {:.2e}, Hessian residual {:.2e}, |Ric_f^1(dr,dr)| {:.2e}",
            rep.points, rep.lap_f, rep.hess_residual, rep.ricci_radial
        ),
    ))
}

fn radial_identity() -> Outcome {
    let s = sine_sphere(0.5).map_err(err)?;
    let mut worst = 0.0_f64;
    for n in [-5.0, -1.0, 0.0, 0.5, 1.0] {
        for p in [[0.3, 0.1, -0.2], [-2.0, 1.0, 0.5], [4.0, -0.7, 0.0], [1.2, 2.0, -1.5]] {
            let id = radial_identity_n(&s, ExtendedReal::Finite(n), &p).map_err(err)?;
            worst = worst.max((id.analytic - id.numeric).abs());
        }
    }
    Ok((worst <= 1e-6, format!("N in {{-5, -1, 0, 0.5, 1}} at 4 points, max deviation {worst:.2e}")))
}

fn vector_example() -> Outcome {
    let mut row = 0.0_f64;
    let mut points = 0;
    for n in [3, 4] {
        let ex = vector_field_example(n, 0.1).map_err(err)?;
        for p in random_points(vec![-2.0; n], vec![2.0; n], 50, 9 + n as u64)? {
            let ric = generalized_ricci_vector(ex.space.metric(), &ex.field, ExtendedReal::Finite(1.0), &p).map_err(err)?;
            row = (0..n).map(|j| ric.get(0, j).abs()).fold(row, f64::max);
            points += 1;
        }
    }
    let ex = vector_field_example(4, 0.1).map_err(err)?;
    let m = ex.space.metric();
    let grad = DensitySpec::Gradient(ex.phi.clone());
    let x = drift_field(m, &grad);
    let mut reduce = 0.0_f64;
    for p in random_points(vec![-2.0; 4], vec![2.0; 4], 10, 3)? {
        for n_param in [ExtendedReal::Finite(1.0), ExtendedReal::Finite(0.0), ExtendedReal::PosInfinity] {
            let a = generalized_ricci_vector(m, &x, n_param, &p).map_err(err)?;
            let b = generalized_ricci_gradient(m, &ex.phi, n_param, &p).map_err(err)?;
            reduce = reduce.max(a.sub(&b).max_abs());
        }
    }
    Ok((
        row <= 1e-5 && reduce <= 1e-5,
        format!("{points} points: max |Ric_X^1(dr, .)| {row:.2e}; gradient reduction max deviation {reduce:.2e}"),
    ))
}

fn geodesics() -> Outcome {
    let s = sine_sphere(0.5).map_err(err)?;
    let (mut speed, mut clairaut) = (0.0_f64, 0.0_f64);
    for (p, v) in [([0.0, 0.2, -0.1], [1.0, 0.05, 0.02]), ([-3.0, 0.0, 0.5], [0.8, -0.05, 0.05])] {
        let v = normalize_velocity(s.metric(), &p, &v).map_err(err)?;
        let tr = geodesic_integrate(s.metric(), &p, &v, 10.0, 1e-3).map_err(err)?;
        if let Some(e) = tr.truncated {
            return Ok((false, format!("trace truncated: {e}")));
        }
        speed = speed.max(tr.speed_drift);
        clairaut = clairaut.max(clairaut_constant(&s, &tr).map_err(err)?.drift);
    }
    let polar = polar_plane();
    let mut line = 0.0_f64;
    for (theta, dir) in [(0.0, 2.2), (1.0, -0.4), (4.0, 3.0)] {
        let (r0, t0) = (2.0, theta % TAU);
        let (vx, vy) = (f64::cos(dir), f64::sin(dir));
        // polar components of the Cartesian unit velocity
        let v = [vx * t0.cos() + vy * t0.sin(), (-vx * t0.sin() + vy * t0.cos()) / r0];
        let tr = geodesic_integrate(polar.metric(), &[r0, t0], &v, 1.5, 1e-3).map_err(err)?;
        let (x0, y0) = (r0 * t0.cos(), r0 * t0.sin());
        for smp in &tr.samples {
            let (r, t) = (smp.position[0], smp.position[1]);
            line = line.max((r * t.cos() - (x0 + vx * smp.t)).abs()).max((r * t.sin() - (y0 + vy * smp.t)).abs());
        }
    }
    Ok((
        speed <= 1e-6 && clairaut <= 1e-8 && line <= 1e-6,
        format!("T = 10, dt = 1e-3: speed drift {speed:.2e}, Clairaut drift {clairaut:.2e}; polar vs straight line {line:.2e}"),
    ))
}

fn read_dir_sorted(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).map_err(err)? {
        let e = e.map_err(err)?;
        out.push((e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).map_err(err)?));
    }
    out.sort();
    Ok(out)
}

fn determinism() -> Outcome {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("manifests/sphere-above.manifest");
    let tmp = tempfile::tempdir().map_err(err)?;
    let mut runs = Vec::new();
    for (k, threads) in ["1", "4"].iter().enumerate() {
        let out = tmp.path().join(format!("run{k}"));
        let status = Command::new(env!("CARGO_BIN_EXE_cdsplit"))
            .args(["suite", "--seed", "7", "--manifest"])
            .arg(&manifest)
            .arg("--out")
            .arg(&out)
            .env("CDSPLIT_THREADS", threads)
            .output()
            .map_err(err)?;
        if status.status.code() != Some(0) {
            return Ok((false, format!("suite exited with {:?}", status.status.code())));
        }
        runs.push((status.stdout, read_dir_sorted(&out)?));
    }
    let same = runs[0] == runs[1];
    let files = runs[0].1.len();
    Ok((
        same && files > 1,
        format!("two suite runs (1 and 4 threads, seed 7): {files} files, identical: {same}"),
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("analytic vs numeric curvature", curvature),
        ("Riccati exact solution", riccati),
        ("split-space threshold", threshold),
        ("Laplacian comparison", comparison),
        ("weighted Bochner identity", bochner),
        ("rigidity identities", rigidity),
        ("radial identity for N <= 1", radial_identity),
        ("non-gradient vector field", vector_example),
        ("geodesic conservation", geodesics),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {name}: {detail} ({:.1}s)",
            k + 1,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
