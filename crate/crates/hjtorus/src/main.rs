use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hjtorus::commands;
use hjtorus::{CliError, ExperimentConfig, Overrides};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "hjtorus", version, about = "Hamilton-Jacobi experiments on the circle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment config; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Comma-separated times.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    t: Option<Vec<f64>>,
    /// Comma-separated second times.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    s: Option<Vec<f64>>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Evolve u0 and dump the solution at each record time.
    Solve,
    /// Compare the scheme for p^2/2 with the Hopf-Lax formula.
    Oracle,
    /// Commutation defect of H and G on the (t, s) grid.
    Defect,
    /// Large-time critical value.
    Critical,
    /// Sampled sup of the Poisson bracket {H, G}.
    Bracket,
    /// Push the derivative graph of u0 by the Hamiltonian flow.
    Flow,
    /// Semiconcavity and semiconvexity constants of the solution.
    Regularity,
    /// Pendulum nonexistence bundle.
    PendulumDemo,
}

// A closed stdout (e.g. `| head`) is not an error of the experiment.
fn emit(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    emit(&serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let overrides = Overrides { n: cli.n, t: cli.t, s: cli.s, out: cli.out };
    let cfg = ExperimentConfig::load(cli.config.as_deref(), &overrides)?;
    match cli.command {
        Command::Solve => {
            let slab = commands::solve(&cfg)?;
            emit(&format!("wrote {} frames to {}", slab.len(), cfg.out.display()));
            Ok(())
        }
        Command::Oracle => print_json(&commands::oracle(&cfg)?),
        Command::Defect => print_json(&commands::defect(&cfg)?),
        Command::Critical => print_json(&commands::critical(&cfg)?),
        Command::Bracket => print_json(&commands::bracket(&cfg)?),
        Command::Flow => print_json(&commands::flow(&cfg)?),
        Command::Regularity => print_json(&commands::regularity(&cfg)?),
        Command::PendulumDemo => print_json(&commands::pendulum_demo(&cfg)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(std::io::stderr().lock(), "error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
