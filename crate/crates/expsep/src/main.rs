use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use expsep::commands::{cmd_baseline, cmd_bench, cmd_plotdata, cmd_recover, cmd_synth};
use expsep::formats::BENCH_HEADER;
use expsep::{Error, Experiment, ExperimentConfig, Result};

#[derive(Parser)]
#[command(name = "expsep", version, about = "Localized-kernel recovery of exponential sums")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Base seed; overrides `noise.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for trial-level parallelism.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the ground truth, per-line sample CSVs and a seed manifest.
    Synth(Common),
    /// Run the full pipeline and write recovery, match and spectrum files.
    Recover {
        #[command(flatten)]
        common: Common,
        /// Read samples from a directory written by `synth` instead of
        /// synthesizing them.
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Seeded SNR sweep; writes bench.csv.
    Bench(Common),
    /// Kernel profiles, thresholded spectrum and Hankel singular values.
    Plotdata(Common),
    /// ESPRIT / MUSIC on a univariate dataset.
    Baseline(Common),
}

struct Setup {
    exp: Experiment,
    seed: u64,
    out: PathBuf,
}

fn setup(c: &Common) -> Result<Setup> {
    let config = ExperimentConfig::load(&c.config)?;
    if let Some(k) = c.threads {
        if k == 0 {
            return Err(Error::config("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Error::config(e.to_string()))?;
    }
    let seed = c.seed.unwrap_or(config.noise.seed);
    let out = c
        .out
        .clone()
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok(Setup {
        exp: Experiment::new(config)?,
        seed,
        out,
    })
}

fn report(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(c) => {
            let s = setup(&c)?;
            report(&cmd_synth(&s.exp, s.seed, &s.out)?);
        }
        Command::Recover { common, samples } => {
            let s = setup(&common)?;
            report(&cmd_recover(&s.exp, s.seed, samples.as_deref().map(Path::new), &s.out)?);
        }
        Command::Bench(c) => {
            let s = setup(&c)?;
            let (paths, rows) = cmd_bench(&s.exp, s.seed, &s.out)?;
            println!("{}", BENCH_HEADER.join("  "));
            for r in &rows {
                println!(
                    "{:>6} {:>9} {:>7} {:>6} {:>8.2} {:>10.3e} {:>10.3e} {:>8.3}",
                    r.snr_db,
                    r.method,
                    r.samples,
                    r.total_points,
                    r.recuperated_mean,
                    r.rmse_mean,
                    r.rmse_std,
                    r.runtime_s
                );
            }
            report(&paths);
        }
        Command::Plotdata(c) => {
            let s = setup(&c)?;
            report(&cmd_plotdata(&s.exp, s.seed, &s.out)?);
        }
        Command::Baseline(c) => {
            let s = setup(&c)?;
            report(&cmd_baseline(&s.exp, s.seed, &s.out)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("expsep: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
