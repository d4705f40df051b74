//! `vanishforge` command-line front end.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vanishforge::context::{parse_threshold, DEFAULT_PRECISION};
use vanishforge::{Error, PrecisionContext};

#[derive(Debug, Parser)]
#[command(name = "vanishforge", version, about = "Eisenstein series with prescribed vanishing critical L-values")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Working precision in bits (at least 64)
    #[arg(long, global = true, env = "VANISHFORGE_PRECISION", default_value_t = DEFAULT_PRECISION)]
    pub precision: u32,
    /// Relative size below which a value counts as zero, e.g. 2^-100 or 1e-30
    #[arg(long, global = true, default_value = "2^-100", value_parser = threshold)]
    pub vanish_threshold: f64,
    /// Relative pivot size below which a matrix column counts as dependent
    #[arg(long, global = true, default_value = "2^-64", value_parser = threshold)]
    pub rank_threshold: f64,
    /// Write the JSON document here
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Human,
}

fn threshold(s: &str) -> Result<f64, String> {
    parse_threshold(s).map_err(|e| e.to_string())
}

/// Comma-separated integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexList(pub Vec<i64>);

fn list(s: &str) -> Result<IndexList, String> {
    if s.trim().is_empty() {
        return Ok(IndexList(Vec::new()));
    }
    s.split(',').map(|t| t.trim().parse::<i64>().map_err(|e| format!("'{t}': {e}"))).collect::<Result<_, _>>().map(IndexList)
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Order-graded basis alpha_0..alpha_{N-3} of W_N^0
    Basis {
        #[arg(long)]
        level: usize,
        /// Skip the character layer; any level N >= 3
        #[arg(long)]
        raw: bool,
    },
    /// Vanishing order at zero of a weak function
    Order {
        #[arg(long)]
        input: PathBuf,
        /// Entry to use when the input is a basis file
        #[arg(long)]
        index: Option<usize>,
    },
    /// Build a vanishing space and its certificate
    Construct {
        #[arg(long)]
        p1: u64,
        #[arg(long)]
        p2: u64,
        #[arg(long)]
        k: u32,
        /// Indices l with L(f; l+1) = 0, comma separated
        #[arg(long, value_parser = list, conflicts_with_all = ["l1", "l2"])]
        vanish_set: Option<IndexList>,
        #[arg(long, requires = "l2")]
        l1: Option<usize>,
        #[arg(long, requires = "l1")]
        l2: Option<usize>,
    },
    /// Re-check a certificate at the current precision
    Verify {
        #[arg(long)]
        certificate: PathBuf,
        /// Extra points to report on (not counted as claims)
        #[arg(long, value_parser = list)]
        recheck_points: Option<IndexList>,
    },
    /// Cotangent power sum sum_j beta(j) cot^u(pi j/N)
    Cotsum {
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        power: usize,
        /// Weak-function file providing beta
        #[arg(long, conflicts_with = "ones")]
        beta: Option<PathBuf>,
        /// beta = 1 everywhere
        #[arg(long)]
        ones: bool,
    },
    /// Dimension counts
    Dims {
        #[arg(long)]
        p1: u64,
        #[arg(long)]
        p2: u64,
        #[arg(long)]
        k: u32,
        #[arg(long, value_parser = list, conflicts_with_all = ["l1", "l2"])]
        vanish_set: Option<IndexList>,
        #[arg(long, requires = "l2")]
        l1: Option<usize>,
        #[arg(long, requires = "l1")]
        l2: Option<usize>,
    },
}

/// 0 ok, 1 hypothesis or input problem, 2 ambiguity, 3 failed verification.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Ambiguous(_) => 2,
        Error::Verification(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let ctx = match PrecisionContext::new(cli.global.precision, cli.global.vanish_threshold, cli.global.rank_threshold) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match commands::run(&cli, &ctx) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
