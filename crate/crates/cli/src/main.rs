use std::path::PathBuf;
use std::process::ExitCode;

use boxnorm_cli::{run, CliError, ExperimentConfig, ExperimentReport, RunOptions, Scenario};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "boxnorm", version, about = "Box norms, PET induction and solution-count experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run PET on a family and print the trace; `--out` receives JSON.
    Pet {
        #[command(flatten)]
        common: Common,
        /// Inline family member, repeatable (used when no config is given).
        #[arg(long = "family")]
        family: Vec<String>,
        #[arg(long, default_value_t = 1)]
        dim: usize,
    },
    /// Box norms of a constructed function.
    Norm(Common),
    /// Counting operator and δ.
    CountOp(Common),
    /// δ against the norms along the theorem's target boxes.
    Theorem15Check(Common),
    /// Averaged degree-1 norms against the concatenated box.
    ConcatCheck(Common),
    /// Solution-count sweeps; `{"kind": "fixtures"}` writes oracle constants.
    EquidistSweep(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, conflicts_with = "sample")]
    exact: bool,
    #[arg(long)]
    sample: bool,
    /// Samples per estimate in sample mode.
    #[arg(long, default_value_t = 2000)]
    samples: u64,
    #[arg(long)]
    max_states: Option<u128>,
}

fn load(common: &Common, scenario: Scenario) -> Result<ExperimentConfig, CliError> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config(format!("{} needs --config", scenario.name())))?;
    let cfg = ExperimentConfig::load(path)?;
    if cfg.scenario != scenario {
        return Err(CliError::Config(format!(
            "config is for {}, not {}",
            cfg.scenario.name(),
            scenario.name()
        )));
    }
    Ok(cfg)
}

fn options(common: &Common) -> RunOptions {
    let defaults = RunOptions::default();
    RunOptions {
        seed: common.seed,
        exact: !common.sample,
        samples: common.samples,
        max_states: common.max_states.unwrap_or(defaults.max_states),
    }
}

fn emit(report: &ExperimentReport, common: &Common) -> Result<(), CliError> {
    if !report.log.is_empty() {
        eprint!("{}", report.log);
    }
    eprintln!("{}: {} ms", report.scenario, report.runtime_ms);
    let body = match &report.json {
        Some(v) => {
            let mut s = serde_json::to_string_pretty(v).expect("serializable");
            s.push('\n');
            s
        }
        None => report.to_csv(),
    };
    match &common.out {
        Some(path) => std::fs::write(path, body)?,
        None => print!("{body}"),
    }
    if !report.failures.is_empty() {
        return Err(CliError::Assertion(report.failures.join("; ")));
    }
    Ok(())
}

fn main_inner(cli: Cli) -> Result<(), CliError> {
    let (common, cfg) = match &cli.command {
        Command::Pet { common, family, dim } => {
            let cfg = if common.config.is_none() && !family.is_empty() {
                let v = serde_json::json!({ "scenario": "pet", "dim": dim, "family": family });
                ExperimentConfig::from_json(&v.to_string())?
            } else {
                load(common, Scenario::Pet)?
            };
            (common, cfg)
        }
        Command::Norm(c) => (c, load(c, Scenario::Norm)?),
        Command::CountOp(c) => (c, load(c, Scenario::CountOp)?),
        Command::Theorem15Check(c) => (c, load(c, Scenario::Theorem15Check)?),
        Command::ConcatCheck(c) => (c, load(c, Scenario::ConcatCheck)?),
        Command::EquidistSweep(c) => (c, load(c, Scenario::EquidistSweep)?),
    };
    let report = run(&cfg, &options(common))?;
    emit(&report, common)
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
