use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use romcert::pipeline;
use romcert::scenario::ScenarioConfig;
use romcert::{Error, ErrorClass};

/// Certified data-driven reduced-order models for linear plants.
#[derive(Debug, Parser)]
#[command(name = "romcert", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario file end to end and write its artifact bundle.
    Run {
        config: PathBuf,
        /// Override the data-collection seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Where to write artifacts; defaults to the config's `output_dir`, then `out/<name>`.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// `exact` or `fd`.
        #[arg(long)]
        derivative_mode: Option<String>,
        /// Override the sampling period of the collected data.
        #[arg(long)]
        tau: Option<f64>,
        /// Override the number of samples T.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// List the built-in benchmarks.
    List,
    /// Recheck a bundle written by `run`.
    Reverify { dir: PathBuf },
}

// Write errors (a closed pipe, say) must not turn a finished run into a panic.
macro_rules! out {
    ($($t:tt)*) => {
        let _ = writeln!(std::io::stdout(), $($t)*);
    };
}

fn exit_for(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(match e.class() {
        ErrorClass::Configuration => 2,
        ErrorClass::Infeasibility => 3,
        ErrorClass::Failure => 1,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            out!("name, n, n_hat, specification, samples");
            for row in pipeline::list_benchmarks() {
                out!("{row}");
            }
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            seed,
            out_dir,
            derivative_mode,
            tau,
            samples,
        } => {
            let mut cfg = match ScenarioConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return exit_for(&e),
            };
            if let Some(s) = seed {
                cfg.data.seed = s;
            }
            if let Some(m) = derivative_mode {
                cfg.data.derivative_mode = m;
            }
            if let Some(t) = tau {
                cfg.data.tau = t;
            }
            if let Some(t) = samples {
                cfg.data.samples = t;
            }
            let dir = out_dir
                .or_else(|| cfg.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
            match pipeline::run_scenario(&cfg, Some(&dir)) {
                Ok(outcome) => {
                    let _ = write!(std::io::stdout(), "{}", outcome.summary());
                    out!("artifacts written to {}", dir.display());
                    ExitCode::from(outcome.exit_code() as u8)
                }
                Err(e) => exit_for(&e),
            }
        }
        Command::Reverify { dir } => match pipeline::reverify(&dir) {
            Ok(r) => {
                for c in &r.report.checks {
                    out!("{}", c.line());
                }
                if r.recorded.is_empty() {
                    out!("no recorded verdicts to compare against");
                } else if r.matches_recorded() {
                    out!("verdicts match the recorded run");
                } else {
                    out!("verdicts differ from the recorded run");
                }
                ExitCode::from(r.exit_code() as u8)
            }
            Err(e) => exit_for(&e),
        },
    }
}
