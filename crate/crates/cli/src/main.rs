use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use simrepair_core::generation::OperatorWhitelist;
use simrepair_core::grammar::{grammar_for, ExecLimits, ExecStatus};
use simrepair_core::harness::{
    cmd_repair, run_experiment, BundleFiles, RepairConfig, RepairSettings, RepairStatus,
};
use simrepair_core::similarity::CombinationStrategy;
use simrepair_core::validation::{instrument, StopMode, TestSuite, ValidationOptions};
use simrepair_core::Error;

const EXIT_NO_PLAUSIBLE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NO_SUSPICIOUS: u8 = 3;
const EXIT_NOTHING_TO_REPAIR: u8 = 4;
const EXIT_INTERNAL: u8 = 70;

#[derive(Parser)]
#[command(name = "simrepair", version, about = "Insertion-based program repair with similarity-ranked patches")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Repair one program and write the ranked list, validation log and patch.
    Repair(RepairArgs),
    /// Run every corpus bundle under every selected strategy and write reports.
    Experiment(ExperimentArgs),
    /// Run a test suite on a program and print its coverage matrix.
    Coverage(CoverageArgs),
    /// Run a program under the bundled interpreter with stdin as input.
    Run(RunArgs),
}

#[derive(Args)]
struct Common {
    /// Operator whitelist file (TOML); the bundled ten-entry list by default.
    #[arg(long)]
    whitelist: Option<PathBuf>,
    /// Maximum number of ranked candidates to validate.
    #[arg(long)]
    budget: Option<usize>,
    /// n-gram size for the Jaccard index.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    ngram: u64,
    /// Per-test timeout in milliseconds, overriding the suite's values.
    #[arg(long)]
    timeout_ms: Option<u64>,
    /// Variants validated concurrently.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct RepairArgs {
    /// Buggy program.
    source: PathBuf,
    /// Test-suite manifest (TOML).
    #[arg(long)]
    tests: PathBuf,
    /// Coverage matrix; regenerated from the test suite when omitted.
    #[arg(long)]
    coverage: Option<PathBuf>,
    /// Developer fix used to tell correct from merely plausible patches.
    #[arg(long)]
    fixed: Option<PathBuf>,
    /// One of com-cs, com-ned, com-js, ssba, lba, csba, jsba, nba.
    #[arg(long, default_value = "com-cs")]
    strategy: String,
    /// first-correct or exhaustive.
    #[arg(long, default_value = "first-correct")]
    stop: String,
    #[arg(long, default_value = "mini")]
    grammar: String,
    #[arg(long, short, default_value = "simrepair-out")]
    out: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Directory of bug bundles, one per subdirectory.
    corpus: PathBuf,
    /// Comma-separated strategies, or "all".
    #[arg(long, default_value = "all")]
    strategies: String,
    /// first-correct or exhaustive.
    #[arg(long, default_value = "exhaustive")]
    stop: String,
    #[arg(long, short, default_value = "simrepair-report")]
    out: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct CoverageArgs {
    source: PathBuf,
    #[arg(long)]
    tests: PathBuf,
    #[arg(long, default_value = "mini")]
    grammar: String,
    /// Write the matrix here instead of stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    source: PathBuf,
    #[arg(long, default_value = "mini")]
    grammar: String,
    #[arg(long, default_value_t = 2000)]
    timeout_ms: u64,
}

fn settings(common: &Common, stop: &str) -> Result<RepairSettings, Error> {
    let whitelist = match &common.whitelist {
        Some(p) => OperatorWhitelist::load(p)?,
        None => OperatorWhitelist::reference(),
    };
    let mut validation = ValidationOptions {
        budget: common.budget,
        stop: stop.parse::<StopMode>()?,
        ..ValidationOptions::default()
    };
    if let Some(j) = common.jobs {
        validation.workers = j.max(1);
    }
    Ok(RepairSettings {
        whitelist,
        ngram: common.ngram as usize,
        validation,
        timeout: common.timeout_ms.map(Duration::from_millis),
    })
}

fn parse_strategies(text: &str) -> Result<Vec<CombinationStrategy>, Error> {
    if text.trim().eq_ignore_ascii_case("all") {
        return Ok(CombinationStrategy::ALL.to_vec());
    }
    let mut out = Vec::new();
    for part in text.split(',') {
        let s: CombinationStrategy = part.trim().parse()?;
        if !out.contains(&s) {
            out.push(s);
        }
    }
    Ok(out)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NoSuspiciousNode => EXIT_NO_SUSPICIOUS,
        Error::NothingToRepair => EXIT_NOTHING_TO_REPAIR,
        Error::InvalidMutation(_) => EXIT_INTERNAL,
        Error::Parse(_)
        | Error::Config(_)
        | Error::UnknownLine(_)
        | Error::Coverage(_)
        | Error::Suite(_)
        | Error::Bundle { .. }
        | Error::Io { .. } => EXIT_CONFIG,
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "program".into(), |s| s.to_string_lossy().into_owned())
}

fn repair(args: RepairArgs) -> Result<u8, Error> {
    let config = RepairConfig {
        files: BundleFiles {
            id: stem(&args.source),
            grammar: args.grammar,
            source: args.source,
            tests: args.tests,
            fixed: args.fixed,
            coverage: args.coverage,
            description: None,
        },
        strategy: args.strategy.parse()?,
        settings: settings(&args.common, &args.stop)?,
        out_dir: args.out,
    };
    let outcome = cmd_repair(&config)?;
    match outcome.status {
        RepairStatus::Repaired { rank, candidate, correct } => {
            println!(
                "repaired: candidate {candidate} at rank {rank} of {} ({}), {} validated",
                outcome.total_patches,
                if correct { "correct" } else { "plausible" },
                outcome.validated
            );
            print!("{}", outcome.diff.unwrap_or_default());
            Ok(0)
        }
        RepairStatus::NoPlausible => {
            println!(
                "no plausible patch among {} validated of {} candidates",
                outcome.validated, outcome.total_patches
            );
            Ok(EXIT_NO_PLAUSIBLE)
        }
    }
}

fn experiment(args: ExperimentArgs) -> Result<u8, Error> {
    let strategies = parse_strategies(&args.strategies)?;
    let settings = settings(&args.common, &args.stop)?;
    let output = run_experiment(&args.corpus, &strategies, &settings)?;
    output.write(&args.out)?;
    print!("{}", output.report.to_text());
    for (dir, reason) in &output.skipped {
        eprintln!("skipped {}: {reason}", dir.display());
    }
    Ok(0)
}

fn coverage(args: CoverageArgs) -> Result<u8, Error> {
    let grammar = grammar_for(&args.grammar)?;
    let source = std::fs::read_to_string(&args.source).map_err(|e| Error::Io {
        path: args.source.clone(),
        source: e,
    })?;
    let tree = grammar.parse(&source)?;
    let suite = TestSuite::load(&args.tests)?;
    let matrix = instrument(&tree, &suite, grammar.as_ref(), ExecLimits::default().max_steps)?;
    match args.out {
        Some(p) => std::fs::write(&p, matrix.to_text()).map_err(|e| Error::Io { path: p, source: e })?,
        None => print!("{}", matrix.to_text()),
    }
    Ok(0)
}

fn run(args: RunArgs) -> anyhow::Result<u8> {
    let grammar = grammar_for(&args.grammar)?;
    let source = std::fs::read_to_string(&args.source).with_context(|| args.source.display().to_string())?;
    let tree = grammar.parse(&source)?;
    let mut stdin = String::new();
    std::io::stdin().read_to_string(&mut stdin)?;
    let exec = grammar.executor().context("grammar has no interpreter")?;
    let limits = ExecLimits {
        timeout: Duration::from_millis(args.timeout_ms),
        ..ExecLimits::default()
    };
    let result = exec.run(&tree, &stdin, &limits);
    print!("{}", result.stdout);
    match result.status {
        ExecStatus::Completed => Ok(0),
        ExecStatus::RuntimeError(msg) => {
            eprintln!("runtime error: {msg}");
            Ok(1)
        }
        ExecStatus::TimedOut => {
            eprintln!("timed out");
            Ok(1)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Repair(a) => repair(a),
        Command::Experiment(a) => experiment(a),
        Command::Coverage(a) => coverage(a),
        Command::Run(a) => {
            return match run(a) {
                Ok(code) => ExitCode::from(code),
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(EXIT_CONFIG)
                }
            }
        }
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
