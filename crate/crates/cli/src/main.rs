use std::path::PathBuf;
use std::process::ExitCode;

use circle_pattern::commands::{
    CheckMethod, FlowArgs, FlowMethodArg, IntegratorArg, SolveArgs, EXIT_IO,
};
use circle_pattern::{cmd_check, cmd_flow, cmd_report, cmd_solve, cmd_validate, Io};
use clap::{Parser, Subcommand};

/// Solve for generalized hyperbolic circle patterns with prescribed
/// curvature. Set CIRCLE_PATTERN_LOG (e.g. `debug`) for solver logging.
#[derive(Parser)]
#[command(name = "circle-pattern", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a problem file.
    Validate { problem: PathBuf },
    /// Decide whether the target curvature is attainable.
    Check {
        problem: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        method: CheckMethod,
    },
    /// Solve for the radii (closed form for epsilon = 0, Newton otherwise).
    Solve {
        problem: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        /// Result file; standard output if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the Ricci or Calabi flow.
    Flow {
        problem: PathBuf,
        #[arg(long, value_enum)]
        method: Option<FlowMethodArg>,
        #[arg(long, value_enum)]
        integrator: Option<IntegratorArg>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        sample_every: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize and re-verify a result file.
    Report { result: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CIRCLE_PATTERN_LOG", "warn"))
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_IO as u8 } else { 0 });
        }
    };
    let (mut out, mut err) = (std::io::stdout().lock(), std::io::stderr().lock());
    let mut io = Io {
        out: &mut out,
        err: &mut err,
    };
    let code = match cli.command {
        Command::Validate { problem } => cmd_validate(&problem, &mut io),
        Command::Check { problem, method } => cmd_check(&problem, method, &mut io),
        Command::Solve {
            problem,
            tol,
            max_iter,
            out,
        } => cmd_solve(&problem, &SolveArgs { tol, max_iter, out }, &mut io),
        Command::Flow {
            problem,
            method,
            integrator,
            dt,
            t_max,
            tol,
            sample_every,
            out,
        } => cmd_flow(
            &problem,
            &FlowArgs {
                method,
                integrator,
                dt,
                t_max,
                tol,
                sample_every,
                out,
            },
            &mut io,
        ),
        Command::Report { result } => cmd_report(&result, &mut io),
    };
    ExitCode::from(code as u8)
}
