//! `acfkit`: verification, transference tables, constant estimation, and
//! martingale realization from the command line.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on bad
//! input or configuration.

mod config;
mod estimate;
mod mds;
mod report;
mod transfer;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use acfkit::estimator::ConstantKind;
use acfkit::NormedSpaceSpec;
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use config::{read_config_file, resolve, FlagSet};
use report::{write_atomic, Envelope};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
}

#[derive(Parser, Debug)]
#[command(name = "acfkit", version, about = "Conjugate functions on the infinite torus and martingale transforms")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Master seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for report files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tolerance override for every check.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Config file (JSON, key=value lines, or a previous report).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact identities, Parseval, multiplier oracle, and transference.
    Verify,
    /// Truncated multiplier values and tail bounds.
    Transfer(TransferArgs),
    /// Lower bounds for operator constants.
    Estimate(EstimateArgs),
    /// Torus realization of a dyadic martingale difference sequence.
    Mds(MdsArgs),
}

#[derive(Args, Debug)]
struct TransferArgs {
    /// Frequencies, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    lambdas: Option<Vec<f64>>,
    /// Truncations, comma separated.
    #[arg(long, value_delimiter = ',')]
    ns: Option<Vec<f64>>,
    #[arg(long)]
    quad_points: Option<usize>,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    /// conjugate, martingale_transform, or truncated_hilbert.
    #[arg(long)]
    constant: Option<ConstantKind>,
    #[arg(long)]
    p: Option<f64>,
    /// Target space, e.g. `d=2,q=inf`.
    #[arg(long)]
    space: Option<NormedSpaceSpec>,
    /// Number of ratio evaluations.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    torus_dim: Option<usize>,
    #[arg(long)]
    degree: Option<i64>,
    #[arg(long)]
    ascent_steps: Option<usize>,
    /// Transference weights, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    weights: Option<Vec<i64>>,
    #[arg(long)]
    truncation: Option<f64>,
    /// Also run the block-sign consistency checks.
    #[arg(long)]
    check_consistency: bool,
    #[arg(long)]
    consistency_instances: Option<usize>,
    #[arg(long)]
    eps_samples: Option<usize>,
}

#[derive(Args, Debug)]
struct MdsArgs {
    /// Sequence file; a random sequence is drawn when absent.
    #[arg(long)]
    mds: Option<String>,
    /// Sequence file to compare the realization against.
    #[arg(long)]
    against: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    space: Option<NormedSpaceSpec>,
    /// Sign series truncation; lowered automatically to bound the expansion.
    #[arg(long)]
    truncation: Option<usize>,
    /// Write the source sequence to this file.
    #[arg(long)]
    write_mds: Option<String>,
}

struct Outcome {
    json: String,
    passed: bool,
    extra: Vec<(&'static str, String)>,
}

fn layered<C: Serialize + DeserializeOwned + Default>(
    common: &Common,
    command: &str,
    mut flags: FlagSet,
) -> Result<C, CliError> {
    let file = common.config.as_deref().map(|p| read_config_file(p, command)).transpose()?;
    flags.set("seed", &common.seed).set("tol", &common.tol);
    resolve(file, flags.into_map())
}

fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let common = &cli.common;
    match &cli.command {
        Command::Verify => {
            let cfg: verify::VerifyConfig = layered(common, "verify", FlagSet::default())?;
            let result = verify::run(&cfg)?;
            let passed = result.checks.iter().all(|c| c.passed);
            Ok(Outcome { json: Envelope::new("verify", &cfg, passed, &result).to_json(), passed, extra: vec![] })
        }
        Command::Transfer(a) => {
            let mut flags = FlagSet::default();
            flags.set("lambdas", &a.lambdas).set("ns", &a.ns).set("quad_points", &a.quad_points);
            let cfg: transfer::TransferConfig = layered(common, "transfer", flags)?;
            let result = transfer::run(&cfg)?;
            let passed = result.failures == 0;
            Ok(Outcome { json: Envelope::new("transfer", &cfg, passed, &result).to_json(), passed, extra: vec![] })
        }
        Command::Estimate(a) => {
            let mut flags = FlagSet::default();
            flags
                .set("constant", &a.constant)
                .set("p", &a.p)
                .set("space", &a.space)
                .set("budget", &a.budget)
                .set("torus_dim", &a.torus_dim)
                .set("degree", &a.degree)
                .set("ascent_steps", &a.ascent_steps)
                .set("weights", &a.weights)
                .set("truncation", &a.truncation)
                .flag("check_consistency", a.check_consistency)
                .set("consistency_instances", &a.consistency_instances)
                .set("eps_samples", &a.eps_samples);
            let cfg: estimate::EstimateConfig = layered(common, "estimate", flags)?;
            let result = estimate::run(&cfg)?;
            let passed = result.passed();
            Ok(Outcome {
                json: Envelope::new("estimate", &cfg, passed, &result).to_json(),
                passed,
                extra: vec![("estimate.csv", result.csv())],
            })
        }
        Command::Mds(a) => {
            let mut flags = FlagSet::default();
            flags
                .set("mds", &a.mds)
                .set("against", &a.against)
                .set("n", &a.n)
                .set("space", &a.space)
                .set("truncation", &a.truncation)
                .set("write_mds", &a.write_mds);
            let cfg: mds::MdsConfig = layered(common, "mds", flags)?;
            let (result, source) = mds::run(&cfg)?;
            if let Some(path) = &cfg.write_mds {
                mds::write_mds(path, &source)?;
            }
            let passed = result.passed();
            Ok(Outcome { json: Envelope::new("mds", &cfg, passed, &result).to_json(), passed, extra: vec![] })
        }
    }
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Verify => "verify",
        Command::Transfer(_) => "transfer",
        Command::Estimate(_) => "estimate",
        Command::Mds(_) => "mds",
    }
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let outcome = execute(cli)?;
    print!("{}", outcome.json);
    if let Some(dir) = &cli.common.out {
        write_atomic(dir, &format!("{}.json", command_name(&cli.command)), &outcome.json)?;
        for (name, contents) in &outcome.extra {
            write_atomic(dir, name, contents)?;
        }
    }
    Ok(outcome.passed)
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
    if let Some(jobs) = cli.common.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
