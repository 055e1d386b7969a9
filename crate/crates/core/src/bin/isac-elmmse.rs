//! Command-line front end: `run` executes a scenario, `trace` exports one
//! optimizer's convergence history.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use isac_elmmse::experiments::{self, Algorithm, ExperimentConfig};
use isac_elmmse::Error;

#[derive(Parser)]
#[command(name = "isac-elmmse", version, about = "ELMMSE precoding experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment config (flat TOML).
    config: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Use the 64 x 32 antenna setup instead of the config's.
    #[arg(long)]
    full_scale: bool,
    /// Output file (overrides `output_path`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgArg {
    Sca,
    Sgp,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario and write the results CSV.
    Run(Common),
    /// Export a convergence trace CSV.
    Trace {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "sca")]
        algorithm: AlgArg,
        /// Index into `sweep`.
        #[arg(long, default_value_t = 0)]
        point: usize,
    },
}

fn load(common: &Common) -> Result<ExperimentConfig, Error> {
    let mut cfg = experiments::parse_config(&common.config)?;
    if let Some(seed) = common.seed {
        cfg = cfg.with_seed(seed);
    }
    if common.full_scale {
        cfg = cfg.full_scale();
    }
    if let Some(out) = &common.out {
        cfg.output_path = out.clone();
    }
    Ok(cfg)
}

fn pool(threads: Option<usize>) -> rayon::ThreadPool {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n);
    }
    b.build().expect("thread pool")
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run(common) => {
            let cfg = load(&common)?;
            let table = pool(common.threads).install(|| experiments::run_experiment(&cfg))?;
            eprintln!(
                "wrote {} rows to {}",
                table.rows.len(),
                cfg.output_path.display()
            );
        }
        Command::Trace {
            common,
            algorithm,
            point,
        } => {
            let cfg = load(&common)?;
            let alg = match algorithm {
                AlgArg::Sca => Algorithm::Sca,
                AlgArg::Sgp => Algorithm::Sgp,
            };
            let trace =
                pool(common.threads).install(|| experiments::run_trace(&cfg, alg, point))?;
            experiments::export_trace(&trace, &cfg.output_path)?;
            eprintln!(
                "wrote {} iterations to {} ({:.3} s)",
                trace.iterations(),
                cfg.output_path.display(),
                trace.wall_clock
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config { .. }
                | Error::InvalidParameter(_)
                | Error::InfeasibleOrthogonality { .. } => 2,
                Error::NumericalFailure(_) => 3,
                Error::Io(_) | Error::Csv(_) => 1,
            })
        }
    }
}
