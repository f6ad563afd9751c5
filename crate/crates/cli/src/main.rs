use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod config;
mod pipeline;
mod report;

use config::SurfaceSpec;
use pipeline::{Failure, Options};

#[derive(Parser)]
#[command(name = "bryant-forge", version, about = "Synthesize and analyze CMC-1 surfaces from holomorphic data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Surface configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output file: the report (default stdout), or the PLY mesh for synth.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Restrict lifting and meshing to one named chart.
    #[arg(long)]
    chart: Option<String>,
    /// Multiply every pass/fail tolerance.
    #[arg(long, default_value_t = 1.0)]
    tolerance_scale: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Check the data for pole/zero mismatches and metric degeneracies.
    Validate(Common),
    /// Lift, immerse and write PLY meshes.
    Synth(Common),
    /// Run every check and write the consolidated report.
    Analyze(Common),
    /// Omitted values of the hyperbolic Gauss map.
    Coverage(Common),
}

fn configure_threads() {
    if let Some(n) = std::env::var("BRYANT_FORGE_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            // fails only if a pool already exists, which cannot happen here
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let (name, common) = match &cli.command {
        Command::Validate(c) => ("validate", c),
        Command::Synth(c) => ("synth", c),
        Command::Analyze(c) => ("analyze", c),
        Command::Coverage(c) => ("coverage", c),
    };
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", common.config.display())))?;
    let spec = SurfaceSpec::parse(&text)?;
    if !(common.tolerance_scale.is_finite() && common.tolerance_scale > 0.0) {
        return Err(Failure::Config("tolerance scale must be positive".into()));
    }
    let opts = Options {
        chart: common.chart.clone(),
        tolerance_scale: common.tolerance_scale,
    };
    let mut report_out = common.out.clone();
    let report = match &cli.command {
        Command::Validate(_) => pipeline::validate(&spec)?,
        Command::Synth(_) => {
            let mesh = common.out.clone().unwrap_or_else(|| PathBuf::from(format!("{}.ply", spec.name)));
            report_out = None;
            pipeline::synth(&spec, &opts, &mesh)?
        }
        Command::Analyze(_) => pipeline::analyze(&spec, &opts)?,
        Command::Coverage(_) => pipeline::run_coverage(&spec)?,
    };
    let rendered = report.render(name, &spec.name, spec.provenance.as_deref(), &text);
    match report_out {
        Some(path) => std::fs::write(&path, rendered).map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{rendered}"),
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("bryant-forge: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
