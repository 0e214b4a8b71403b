//! `hotspot`: stability tables, wavemode selection, branch coefficients,
//! simulations, sweeps and verification oracles for two urban-crime
//! reaction-advection-diffusion models.

use clap::{Parser, Subcommand};
use hotspot_cli::config::RunConfig;
use hotspot_cli::error::Result;
use hotspot_cli::output::resolve_out_dir;
use hotspot_cli::commands;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "hotspot",
    about = "Numerical laboratory for crime-hotspot pattern formation",
    version
)]
struct Cli {
    /// Run configuration file (flat `key = value` format).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides `output.dir` from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for parallel sections (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// RNG seed for noise initial conditions; overrides `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bifurcation thresholds per mode, with the argmax flagged.
    StabilityTable,
    /// Threshold-maximizing wavemode(s) across domain sizes.
    Wavemode,
    /// Applicability conditions, branch coefficients and stability verdict
    /// for one bifurcation point.
    Bifurcation,
    /// Integrate one run to steady state and write snapshots + reports.
    Simulate,
    /// Dispatch independent runs across an eps or domain-size axis.
    Sweep,
    /// Run the built-in verification oracles.
    Verify,
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if threads > 0 {
            builder = builder.num_threads(threads);
        }
        // A pool may already exist when invoked from tests; that is fine.
        let _ = builder.build_global();
    }

    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }

    let default_dir = match cli.command {
        Command::StabilityTable => "out/stability-table",
        Command::Wavemode => "out/wavemode",
        Command::Bifurcation => "out/bifurcation",
        Command::Simulate => "out/simulate",
        Command::Sweep => "out/sweep",
        Command::Verify => "out/verify",
    };
    let out_dir = resolve_out_dir(cli.out.as_deref(), cfg.out_dir.as_deref(), default_dir);

    match cli.command {
        Command::StabilityTable => commands::stability_table(&cfg, &out_dir),
        Command::Wavemode => commands::wavemode(&cfg, &out_dir),
        Command::Bifurcation => commands::bifurcation(&cfg, &out_dir),
        Command::Simulate => {
            let summary = commands::simulate(&cfg, &out_dir)?;
            println!(
                "outcome {:?} at t = {:.3} ({} steps); dominant mode {}, {} spike(s), amplitude {:.4}",
                summary.outcome,
                summary.t_final,
                summary.steps,
                summary
                    .dominant_mode
                    .map(|m| m.to_string())
                    .unwrap_or_else(|| "-".to_string()),
                summary.spike_count,
                summary.amplitude,
            );
            Ok(())
        }
        Command::Sweep => commands::sweep(&cfg, &out_dir),
        Command::Verify => commands::verify(&cfg, &out_dir).map(|_| ()),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
