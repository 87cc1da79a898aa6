use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dvlab_cli::{emit, run_experiment, ExperimentConfig};

/// Run a dvlab experiment preset and write its CSVs and summary.json.
#[derive(Debug, Parser)]
#[command(name = "dvlab", version)]
struct Args {
    /// Preset name (exp-weights, exp-nu-gamma, exp-lacunary, exp-lp-identity,
    /// exp-schatten, exp-compactness, exp-radicality, exp-functionals) or `custom`.
    preset: String,
    /// JSON experiment configuration; its `name` must match the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` from the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed; overrides `seed` from the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

fn run(args: Args) -> dvlab_cli::Result<bool> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::new(&args.preset),
    };
    if cfg.name != args.preset {
        return Err(dvlab_cli::CliError::Config(format!(
            "configuration is for `{}` but `{}` was requested",
            cfg.name, args.preset
        )));
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = args
        .out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(format!("dvlab-out/{}", cfg.name)));
    let report = run_experiment(&cfg)?;
    let summary = emit(&report, &out)?;
    for a in &summary.assertions {
        println!("{} {}: {}", if a.passed { "PASS" } else { "FAIL" }, a.name, a.claim);
    }
    println!("wrote {} files to {}", summary.files.len() + 1, out.display());
    Ok(summary.passed)
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("dvlab: {e}");
            ExitCode::from(2)
        }
    }
}
