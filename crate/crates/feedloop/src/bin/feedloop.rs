use std::path::PathBuf;
use std::process;

use clap::{Parser, Subcommand};
use feedloop::experiment::{run_experiment, thread_pool};
use feedloop::verify::{run_suite, Suite};
use feedloop::{plot, CliError, ExitCode};

/// Simulate data feedback loops and check their bias-amplification bounds.
#[derive(Debug, Parser)]
#[command(name = "feedloop", version)]
struct Cli {
    /// Worker threads for replicate runs. Results do not depend on it.
    #[arg(long, global = true, env = "FEEDLOOP_THREADS")]
    threads: Option<usize>,
    /// Replace `feedback.base_seed` from the config.
    #[arg(long, global = true)]
    seed_override: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment config and write its CSV, report and chart.
    Run { config: PathBuf },
    /// Run a property suite and print a pass/fail table.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
    /// Render a trajectory CSV as an SVG chart.
    Plot { csv: PathBuf, svg: PathBuf },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config } => {
            let out = run_experiment(&config, cli.threads, cli.seed_override)?;
            let r = &out.report;
            let delta0 = r.delta0.map_or("n/a".to_string(), |d| format!("{d:.6}"));
            println!(
                "{} rounds x {} replicates; delta0 {delta0}; final mean amplification {:.6}",
                r.rounds, r.replicates, r.final_amplification_mean
            );
            Ok(())
        }
        Command::Verify { suite } => {
            let report = thread_pool(cli.threads)?.install(|| run_suite(suite))?;
            print!("{}", report.table());
            if report.passed() {
                Ok(())
            } else {
                let failed: Vec<_> = report.failures().map(|r| r.params.clone()).collect();
                Err(CliError::Verify(format!("{suite}: {}", failed.join("; "))))
            }
        }
        Command::Plot { csv, svg } => plot::plot_file(&csv, &svg),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { ExitCode::InvalidInput } else { ExitCode::Success };
            let _ = e.print();
            process::exit(code as i32);
        }
    };
    if let Err(e) = execute(cli) {
        eprintln!("error: {e}");
        process::exit(e.exit_code() as i32);
    }
}
