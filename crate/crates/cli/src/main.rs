use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cdsplit_cli::{execute, Options, Sub};

/// Sampled curvature-dimension checks for weighted and split manifolds.
#[derive(Parser)]
#[command(name = "cdsplit", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Numeric, weighted and closed-form Ricci tensors at sample points.
    Curvature(Common),
    /// Decide Ric^N >= lambda g on the manifest grid.
    VerifyCd(Common),
    /// Warping threshold for split manifolds.
    Threshold(Common),
    /// Integrate the Riccati obstruction equation.
    Riccati(Common),
    /// Geodesic trace, conservation checks and completeness table.
    Geodesic(Common),
    /// Laplacian comparison and rigidity.
    Compare(Common),
    /// Weighted Bochner identity and inequality.
    Bochner(Common),
    /// Every applicable check.
    Suite(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value = "cdsplit-out")]
    out: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// `key=value` for a [grid] key, or `section.key=value`.
    #[arg(long = "grid-override", value_name = "KEY=VALUE")]
    grid_override: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("CDSPLIT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let (sub, c) = match cli.cmd {
        Cmd::Curvature(c) => (Sub::Curvature, c),
        Cmd::VerifyCd(c) => (Sub::VerifyCd, c),
        Cmd::Threshold(c) => (Sub::Threshold, c),
        Cmd::Riccati(c) => (Sub::Riccati, c),
        Cmd::Geodesic(c) => (Sub::Geodesic, c),
        Cmd::Compare(c) => (Sub::Compare, c),
        Cmd::Bochner(c) => (Sub::Bochner, c),
        Cmd::Suite(c) => (Sub::Suite, c),
    };
    let opts = Options {
        manifest: c.manifest,
        out: c.out,
        seed: c.seed,
        overrides: c.grid_override,
    };
    let code = execute(sub, &opts, &mut io::stdout(), &mut io::stderr());
    ExitCode::from(code as u8)
}
