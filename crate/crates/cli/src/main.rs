use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ksc_core::exact::{exact_cover, max_utility, Algorithm};
use ksc_core::harness::{
    aggregate, generate_coverage, generate_nonmonotone_tabular, generate_separable, parse_instance,
    render_table, run_bench, run_experiment, BenchInstance, BenchSpec, BoundSource,
    ExperimentConfig, GuessSource, MonotoneSource, RunStatus, TauSource,
};
use ksc_core::oracle::verify::{check_lemma1_exhaustive, verify_structure, VerifierReport};
use ksc_core::solver::Selection;
use ksc_core::Error;

const EXIT_ERROR: u8 = 1;
const EXIT_INPUT: u8 = 4;

/// Streaming bicriteria solvers for weighted k-submodular cover
#[derive(Parser, Debug)]
#[command(name = "ksc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the structural verifiers on an instance
    Verify(VerifyArgs),
    /// Run one streaming algorithm
    Solve(SolveArgs),
    /// Solve exactly by enumeration
    Exact(ExactArgs),
    /// Generate a seeded instance
    Gen(GenArgs),
    /// Sweep instances × ε × algorithm × stream order
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct VerifyArgs {
    instance: PathBuf,
    /// Also check the first-order upper bound over every comparable pair
    #[arg(long)]
    lemma1: bool,
    /// Write the JSON result here instead of stdout
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct TauArgs {
    /// Utility target
    #[arg(long)]
    tau: Option<f64>,
    /// Utility target as a fraction of the largest achievable utility
    #[arg(long)]
    tau_fraction: Option<f64>,
}

impl TauArgs {
    fn source(&self) -> TauSource {
        match (self.tau, self.tau_fraction) {
            (Some(t), _) => TauSource::Absolute(t),
            (None, Some(f)) => TauSource::FractionOfMax(f),
            (None, None) => unreachable!("clap requires one of the two"),
        }
    }
}

#[derive(Args, Debug)]
#[group(multiple = false)]
struct MonotoneArgs {
    /// Treat the utility as monotone
    #[arg(long)]
    monotone: bool,
    /// Treat the utility as non-monotone
    #[arg(long)]
    non_monotone: bool,
    /// Decide monotonicity with the verifier
    #[arg(long)]
    auto_monotone: bool,
}

impl MonotoneArgs {
    fn source(&self) -> MonotoneSource {
        if self.monotone {
            MonotoneSource::Declared(true)
        } else if self.non_monotone {
            MonotoneSource::Declared(false)
        } else if self.auto_monotone {
            MonotoneSource::Auto
        } else {
            MonotoneSource::FromInstance
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SelectionArg {
    Default,
    PaperLiteral,
}

impl From<SelectionArg> for Selection {
    fn from(s: SelectionArg) -> Selection {
        match s {
            SelectionArg::Default => Selection::Default,
            SelectionArg::PaperLiteral => Selection::PaperLiteral,
        }
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    instance: PathBuf,
    #[command(flatten)]
    tau: TauArgs,
    #[arg(long)]
    epsilon: f64,
    /// 1: known guess, 2: two passes, 3: single pass with bound B
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    algorithm: u8,
    #[command(flatten)]
    monotone: MonotoneArgs,
    /// Guess of the optimal cost for algorithm 1: a number or "exact"
    #[arg(long, value_parser = parse_guess)]
    guess: Option<GuessSource>,
    /// Upper bound on the optimal cost for algorithm 3: a number or "n-wmax"
    #[arg(long = "upper-bound-B", value_parser = parse_bound)]
    upper_bound: Option<BoundSource>,
    #[arg(long, value_enum, default_value_t = SelectionArg::Default)]
    selection: SelectionArg,
    /// Shuffle the stream with this seed instead of using file order
    #[arg(long)]
    permute_seed: Option<u64>,
    /// Run the exact baseline and attach bound verdicts
    #[arg(long)]
    exact: bool,
    /// Record wall-clock time in the report
    #[arg(long)]
    timing: bool,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExactArgs {
    instance: PathBuf,
    #[command(flatten)]
    tau: TauArgs,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Family {
    Coverage,
    Separable,
    Nonmonotone,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(value_enum)]
    family: Family,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    n: usize,
    #[arg(short, long)]
    k: usize,
    /// Universe size for coverage families
    #[arg(long, default_value_t = 8)]
    universe: usize,
    /// Probability that a pair covers a given universe item
    #[arg(long, default_value_t = 0.4)]
    density: f64,
    /// Rejection-sampling budget for the non-monotone family
    #[arg(long, default_value_t = 10_000)]
    max_attempts: usize,
    /// Output path; stdout if omitted
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(required = true)]
    instances: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.3, 0.5])]
    epsilons: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3],
          value_parser = clap::value_parser!(u8).range(1..=3))]
    algorithms: Vec<u8>,
    #[arg(long, value_delimiter = ',', value_enum, default_values_t = [SelectionArg::Default, SelectionArg::PaperLiteral])]
    selections: Vec<SelectionArg>,
    /// Stream orders to try; file order is always included
    #[arg(long, value_delimiter = ',')]
    permute_seeds: Vec<u64>,
    #[arg(long, default_value_t = 0.8)]
    tau_fraction: f64,
    #[command(flatten)]
    monotone: MonotoneArgs,
    /// Write every cell report as a JSON array here
    #[arg(long)]
    report: Option<PathBuf>,
}

fn parse_guess(s: &str) -> Result<GuessSource, String> {
    match s {
        "exact" => Ok(GuessSource::FromExact),
        _ => s
            .parse()
            .map(GuessSource::Value)
            .map_err(|_| format!("expected a number or \"exact\", got {s:?}")),
    }
}

fn parse_bound(s: &str) -> Result<BoundSource, String> {
    match s {
        "n-wmax" => Ok(BoundSource::NTimesWmax),
        _ => s
            .parse()
            .map(BoundSource::Value)
            .map_err(|_| format!("expected a number or \"n-wmax\", got {s:?}")),
    }
}

fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json values serialize");
    s.push('\n');
    s
}

fn load(path: &Path) -> Result<ksc_core::harness::Instance> {
    parse_instance(path).with_context(|| format!("loading {}", path.display()))
}

fn verifier_json(r: &VerifierReport) -> serde_json::Value {
    json!({
        "property": r.property,
        "holds": r.holds(),
        "checked": r.checked,
        "violations": r.violation_count,
        "worst_slack": r.worst_slack(),
    })
}

fn verify(args: &VerifyArgs) -> Result<u8> {
    let inst = load(&args.instance)?;
    let (n, k) = (inst.ground_size(), inst.arity());
    let structure = verify_structure(&inst.oracle, n, k)?;
    let mut out = json!({
        "n": n,
        "k": k,
        "ksubmodular": structure.is_ksubmodular(),
        "monotone": structure.monotone.holds(),
        "properties": structure.reports().iter().map(|r| verifier_json(r)).collect::<Vec<_>>(),
    });
    let mut ok = structure.is_ksubmodular();
    if inst.declared_monotone == Some(true) && !structure.monotone.holds() {
        ok = false;
    }
    if args.lemma1 {
        let (checked, failures) = check_lemma1_exhaustive(&inst.oracle, n, k)?;
        ok &= failures.is_empty();
        out["lemma1"] = json!({ "checked": checked, "failures": failures.len() });
    }
    emit(&pretty(&out), args.report.as_deref())?;
    Ok(if ok {
        0
    } else {
        RunStatus::ContractViolation.exit_code() as u8
    })
}

fn solve(args: &SolveArgs) -> Result<u8> {
    let inst = load(&args.instance)?;
    let algorithm = Algorithm::from_number(args.algorithm).expect("clap checks the range");
    let mut cfg = ExperimentConfig::new(algorithm, args.epsilon, args.tau.source());
    cfg.monotone = args.monotone.source();
    cfg.guess = args.guess;
    cfg.upper_bound = args.upper_bound;
    cfg.selection = args.selection.into();
    cfg.permute_seed = args.permute_seed;
    cfg.run_exact = args.exact;
    cfg.timing = args.timing;
    let report = run_experiment(&inst, &cfg)?;
    emit(&report.to_json(), args.report.as_deref())?;
    if report.status != RunStatus::Success {
        eprintln!("status: {:?}", report.status);
        for note in &report.notes {
            eprintln!("note: {note}");
        }
    }
    Ok(report.status.exit_code() as u8)
}

fn exact(args: &ExactArgs) -> Result<u8> {
    let inst = load(&args.instance)?;
    let max = max_utility(&inst.oracle)?;
    let tau = match args.tau.source() {
        TauSource::Absolute(t) => t,
        TauSource::FractionOfMax(f) => f * max,
    };
    let v = exact_cover(&inst.oracle, &inst.weights, tau)?;
    let solution: Vec<_> = v
        .solution
        .pairs()
        .map(|(x, i)| json!({ "element": inst.name(x), "position": i }))
        .collect();
    let out = json!({
        "tau": tau,
        "max_utility": max,
        "feasible": v.feasible,
        "weight": v.weight,
        "utility": v.utility,
        "solution": solution,
    });
    emit(&pretty(&out), args.report.as_deref())?;
    Ok(if v.feasible {
        0
    } else {
        RunStatus::Infeasible.exit_code() as u8
    })
}

fn generate(args: &GenArgs) -> Result<u8> {
    let file = match args.family {
        Family::Coverage => {
            generate_coverage(args.seed, args.n, args.k, args.universe, args.density)?
        }
        Family::Separable => {
            generate_separable(args.seed, args.n, args.k, args.universe, args.density)?
        }
        Family::Nonmonotone => {
            generate_nonmonotone_tabular(args.seed, args.n, args.k, args.max_attempts)?
        }
    };
    emit(&file.to_json(), args.output.as_deref())?;
    Ok(0)
}

fn bench(args: &BenchArgs) -> Result<u8> {
    let instances = args
        .instances
        .iter()
        .map(|p| {
            Ok(BenchInstance {
                label: p.display().to_string(),
                instance: load(p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let spec = BenchSpec {
        epsilons: args.epsilons.clone(),
        algorithms: args
            .algorithms
            .iter()
            .map(|&a| Algorithm::from_number(a).expect("clap checks the range"))
            .collect(),
        selections: args.selections.iter().map(|&s| s.into()).collect(),
        permute_seeds: std::iter::once(None)
            .chain(args.permute_seeds.iter().copied().map(Some))
            .collect(),
        tau: TauSource::FractionOfMax(args.tau_fraction),
        monotone: args.monotone.source(),
    };
    let cells = run_bench(&instances, &spec)?;
    if let Some(path) = &args.report {
        let mut text = serde_json::to_string_pretty(&cells)?;
        text.push('\n');
        emit(&text, Some(path))?;
    }
    print!("{}", render_table(&aggregate(&cells)));
    let violated = cells
        .iter()
        .any(|c| c.report.status == RunStatus::BoundViolation);
    Ok(if violated { EXIT_ERROR } else { 0 })
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(
            Error::Parse { .. }
            | Error::Validation(_)
            | Error::Io(_)
            | Error::Config(_)
            | Error::Instance(_),
        ) => EXIT_INPUT,
        _ => EXIT_ERROR,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Verify(a) => verify(a),
        Command::Solve(a) => solve(a),
        Command::Exact(a) => exact(a),
        Command::Gen(a) => generate(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn guess_and_bound_parsing() {
        assert_eq!(parse_guess("exact"), Ok(GuessSource::FromExact));
        assert_eq!(parse_guess("2.5"), Ok(GuessSource::Value(2.5)));
        assert!(parse_guess("lots").is_err());
        assert_eq!(parse_bound("n-wmax"), Ok(BoundSource::NTimesWmax));
        assert_eq!(parse_bound("4"), Ok(BoundSource::Value(4.0)));
    }
}
