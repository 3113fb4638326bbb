mod commands;
mod report;
mod verify;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::report::RunReport;

#[derive(Parser, Debug)]
#[command(name = "ordstat", version, about = "Correlation of order statistics from finite populations")]
struct Cli {
    /// Add elapsed_ms to the report (makes output time-dependent).
    #[arg(long, global = true)]
    timing: bool,

    #[command(subcommand)]
    command: Command,
}

/// Where the population comes from. Exactly one is required.
#[derive(Args, Debug, Clone)]
pub struct PopArgs {
    /// Uniform population on {1, ..., N}.
    #[arg(long = "N", value_name = "N")]
    pub big_n: Option<usize>,
    /// Population file: JSON {"values": [...], "probs": [...]} or one value per line.
    #[arg(long)]
    pub pop: Option<std::path::PathBuf>,
    /// Masses on {1, ..., len}, comma separated (fractions like 1/4 allowed).
    #[arg(long, value_name = "P1,P2,...")]
    pub p: Option<String>,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct PairArgs {
    #[arg(long, default_value_t = 1)]
    pub i: usize,
    #[arg(long, default_value_t = 2)]
    pub j: usize,
    /// Sample size.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form bounds: the uniform-grid bound (--N), the continuous
    /// pair bound (--i/--j/--n), the rational-mass bound (--p).
    Bound {
        #[arg(long = "N", value_name = "N")]
        big_n: Option<usize>,
        #[arg(long)]
        i: Option<usize>,
        #[arg(long)]
        j: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_name = "P1,P2,...")]
        p: Option<String>,
    },
    /// Exact Pearson correlation of (X_{i:n}, X_{j:n}).
    Rho {
        #[command(flatten)]
        pop: PopArgs,
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Maximal correlation of (X_{i:n}, X_{j:n}) with its extremal transforms.
    Maxcorr {
        #[command(flatten)]
        pop: PopArgs,
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Best correlation of (g(X_{i:n}), g(X_{j:n})) over a common transform g.
    Search {
        #[command(flatten)]
        pop: PopArgs,
        #[command(flatten)]
        pair: PairArgs,
        /// Restrict to nondecreasing g.
        #[arg(long)]
        monotone: bool,
        #[arg(long, default_value_t = ordstat::optimize::DEFAULT_RESTARTS)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Global minimum of (lambda + |x|^2)^2 - (gamma_1 x_2 + sum gamma_k x_k x_{k+1})^2.
    Quartic {
        #[arg(long, requires = "gamma", conflicts_with = "from_n")]
        lambda: Option<f64>,
        #[arg(long, value_name = "G1,G2,...", requires = "lambda")]
        gamma: Option<String>,
        /// Use the parameters generated by the uniform population on {1..N}.
        #[arg(long = "from-N", value_name = "N")]
        from_n: Option<usize>,
        #[arg(long, default_value_t = ordstat::optimize::DEFAULT_QUARTIC_RESTARTS)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the fixture and property suite.
    Verify {
        /// Leave out the (1,3:3) same-transform checks, which fail for N >= 4.
        #[arg(long)]
        no_conjecture: bool,
        #[arg(long, default_value_t = ordstat::optimize::DEFAULT_RESTARTS)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// rho, bound and maximal correlation of the uniform grid over a range of N.
    Sweep {
        #[arg(long = "from-N", value_name = "N", default_value_t = 3)]
        from_n: usize,
        #[arg(long = "to-N", value_name = "N", default_value_t = 50)]
        to_n: usize,
        /// Also write the table as CSV to this path.
        #[arg(long)]
        csv: Option<std::path::PathBuf>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(ordstat::Error),
}

impl From<ordstat::Error> for CliError {
    fn from(e: ordstat::Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

fn dispatch(cmd: Command) -> Result<RunReport, CliError> {
    let joint = commands::joint_options()?;
    match cmd {
        Command::Bound { big_n, i, j, n, p } => commands::bound(big_n, i, j, n, p.as_deref()),
        Command::Rho { pop, pair } => commands::rho(&pop, pair, &joint),
        Command::Maxcorr { pop, pair } => commands::maxcorr(&pop, pair, &joint),
        Command::Search { pop, pair, monotone, restarts, seed } => {
            commands::search(&pop, pair, monotone, restarts, seed, &joint)
        }
        Command::Quartic { lambda, gamma, from_n, restarts, seed } => {
            commands::quartic(lambda, gamma.as_deref(), from_n, restarts, seed)
        }
        Command::Verify { no_conjecture, restarts, seed } => Ok(verify::run(!no_conjecture, restarts, seed)),
        Command::Sweep { from_n, to_n, csv } => commands::sweep(from_n, to_n, csv.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let start = Instant::now();
    match dispatch(cli.command) {
        Ok(mut report) => {
            if cli.timing {
                report.elapsed_ms = Some(start.elapsed().as_millis());
            }
            println!("{}", report.render());
            if report.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
