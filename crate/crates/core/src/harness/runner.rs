//! Runs one algorithm on one instance, optionally certifies it against the
//! exact baseline, and packages everything into a [`RunReport`].

use std::time::Instant;

use super::generate::permutation;
use super::instance::Instance;
use super::report::{solution_pairs, ConfigEcho, ExactEcho, RunReport, RunStatus};
use crate::error::{Error, Result};
use crate::exact::{
    check_bicriteria, exact_cover, max_utility, theorem_factors, Algorithm, ExactSolution,
};
use crate::kset::{ElementId, KSet};
use crate::oracle::verify::verify_monotone;
use crate::oracle::UtilityOracle;
use crate::solver::{
    algorithm1, run_single_pass, run_two_pass, GuessRecord, ProblemConfig, Selection, StreamStats,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TauSource {
    Absolute(f64),
    /// A fraction of `max_s g(s)`, computed by enumeration.
    FractionOfMax(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MonotoneSource {
    /// Taken from the caller.
    Declared(bool),
    /// Derived by running the monotonicity verifier.
    Auto,
    /// The instance file's `declared_monotone`.
    FromInstance,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GuessSource {
    Value(f64),
    /// `w(v)` from the exact baseline.
    FromExact,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundSource {
    Value(f64),
    /// `n · max_x w(x)`.
    NTimesWmax,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub epsilon: f64,
    pub tau: TauSource,
    pub monotone: MonotoneSource,
    pub guess: Option<GuessSource>,
    pub upper_bound: Option<BoundSource>,
    pub selection: Selection,
    pub permute_seed: Option<u64>,
    /// Run the exact baseline and attach bound verdicts.
    pub run_exact: bool,
    /// Record wall-clock time. Makes reports non-reproducible.
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn new(algorithm: Algorithm, epsilon: f64, tau: TauSource) -> Self {
        ExperimentConfig {
            algorithm,
            epsilon,
            tau,
            monotone: MonotoneSource::FromInstance,
            guess: None,
            upper_bound: None,
            selection: Selection::Default,
            permute_seed: None,
            run_exact: false,
            timing: false,
        }
    }
}

/// Per-instance quantities that do not depend on `ε` or the algorithm.
#[derive(Clone, Debug, PartialEq)]
pub struct Baseline {
    pub tau: f64,
    pub monotone: bool,
    /// Verifier verdict on monotonicity, when it was run.
    pub monotone_verified: Option<bool>,
    pub max_utility: Option<f64>,
    pub exact: Option<ExactSolution>,
}

fn needs_exact(cfg: &ExperimentConfig) -> bool {
    cfg.run_exact || matches!(cfg.guess, Some(GuessSource::FromExact))
}

/// Computes `τ`, the monotonicity flag, and (when requested) the exact
/// baseline.
pub fn prepare(instance: &Instance, cfg: &ExperimentConfig) -> Result<Baseline> {
    let exact_needed = needs_exact(cfg);
    let max = if exact_needed || matches!(cfg.tau, TauSource::FractionOfMax(_)) {
        Some(max_utility(&instance.oracle)?)
    } else {
        None
    };
    let tau = match cfg.tau {
        TauSource::Absolute(t) => t,
        TauSource::FractionOfMax(f) => f * max.expect("computed above"),
    };
    let (n, k) = (instance.ground_size(), instance.arity());
    let verified = || -> Result<bool> { Ok(verify_monotone(&instance.oracle, n, k)?.holds()) };
    let (monotone, monotone_verified) =
        match cfg.monotone {
            MonotoneSource::Auto => {
                let m = verified()?;
                (m, Some(m))
            }
            MonotoneSource::Declared(m) => (m, None),
            MonotoneSource::FromInstance => match instance.declared_monotone {
                Some(m) => (m, None),
                None => return Err(Error::config(
                    "the instance does not declare monotonicity; pass it explicitly or derive it",
                )),
            },
        };
    let monotone_verified = match monotone_verified {
        None if exact_needed && monotone => Some(verified()?),
        v => v,
    };
    let exact = if exact_needed {
        Some(exact_cover(&instance.oracle, &instance.weights, tau)?)
    } else {
        None
    };
    Ok(Baseline {
        tau,
        monotone,
        monotone_verified,
        max_utility: max,
        exact,
    })
}

/// [`prepare`] followed by [`run_prepared`].
pub fn run_experiment(instance: &Instance, cfg: &ExperimentConfig) -> Result<RunReport> {
    let baseline = prepare(instance, cfg)?;
    run_prepared(instance, cfg, &baseline)
}

struct SolverRun {
    solution: KSet,
    solver_weight: f64,
    feasible: bool,
    selected: Option<u32>,
    guesses: Vec<GuessRecord>,
    stats: StreamStats,
}

/// Runs the configured algorithm against a precomputed [`Baseline`].
pub fn run_prepared(
    instance: &Instance,
    cfg: &ExperimentConfig,
    baseline: &Baseline,
) -> Result<RunReport> {
    let mut notes = Vec::new();
    let mut contract_ok = true;
    let mut problem = ProblemConfig::new(baseline.tau, cfg.epsilon, baseline.monotone)?;
    if baseline.monotone && baseline.monotone_verified == Some(false) {
        contract_ok = false;
        notes.push("utility declared monotone but the verifier found a witness against it".into());
    }
    let exact = baseline.exact.as_ref();
    let optimum = exact.filter(|e| e.feasible).map(|e| e.weight);
    let exact_infeasible = exact.is_some_and(|e| !e.feasible);

    let mut guess = None;
    let mut upper_bound = None;
    match cfg.algorithm {
        Algorithm::KnownGuess => {
            let source = cfg
                .guess
                .ok_or_else(|| Error::config("algorithm 1 needs a guess of the optimal cost"))?;
            guess = match source {
                GuessSource::Value(g) => Some(g),
                GuessSource::FromExact => optimum,
            };
        }
        Algorithm::SinglePass => {
            let source = cfg
                .upper_bound
                .ok_or_else(|| Error::config("algorithm 3 needs an upper bound B"))?;
            upper_bound = Some(match source {
                BoundSource::Value(b) => b,
                BoundSource::NTimesWmax => {
                    let w_max = instance
                        .weights
                        .as_slice()
                        .iter()
                        .copied()
                        .fold(0.0, f64::max);
                    instance.ground_size() as f64 * w_max
                }
            });
            problem = problem.with_upper_bound(upper_bound.expect("set above"))?;
        }
        Algorithm::TwoPass => {}
    }
    if let (Some(opt), Some(g)) = (optimum, guess.or(upper_bound)) {
        if g < opt {
            contract_ok = false;
            notes.push(format!(
                "{} {g} is below the optimal cost {opt}",
                if guess.is_some() {
                    "guess"
                } else {
                    "upper bound B"
                }
            ));
        }
    }

    let order: Vec<ElementId> = match cfg.permute_seed {
        Some(seed) => permutation(seed, instance.ground_size()),
        None => (0..instance.ground_size()).collect(),
    }
    .into_iter()
    .map(ElementId::from)
    .collect();

    let started = Instant::now();
    let run = match cfg.algorithm {
        Algorithm::KnownGuess => match guess {
            // τ is unreachable, so there is no optimal cost to guess
            None => None,
            Some(g) => {
                problem = problem.with_guess(g)?;
                let out = algorithm1(
                    order.iter().copied(),
                    &problem,
                    &instance.oracle,
                    &instance.weights,
                )?;
                Some(SolverRun {
                    feasible: out.utility >= problem.utility_target(),
                    solution: out.solution,
                    solver_weight: out.weight,
                    selected: None,
                    guesses: Vec::new(),
                    stats: out.stats,
                })
            }
        },
        Algorithm::TwoPass => Some(ladder_run(
            run_two_pass(
                || order.iter().copied(),
                &problem,
                &instance.oracle,
                &instance.weights,
            )?,
            instance.arity(),
        )),
        Algorithm::SinglePass => Some(ladder_run(
            run_single_pass(
                order.iter().copied(),
                &problem,
                cfg.selection,
                &instance.oracle,
                &instance.weights,
            )?,
            instance.arity(),
        )),
    };
    let elapsed = started.elapsed();
    let run = run.unwrap_or_else(|| SolverRun {
        solution: KSet::empty(instance.arity()),
        solver_weight: 0.0,
        feasible: false,
        selected: None,
        guesses: Vec::new(),
        stats: StreamStats::default(),
    });

    let weight = instance.weights.kset_weight(&run.solution)?;
    let utility = instance.oracle.value(&run.solution);
    if (weight - run.solver_weight).abs() > 1e-9 * weight.max(1.0) {
        return Err(Error::validation(format!(
            "solver tracked weight {} but the solution weighs {weight}",
            run.solver_weight
        )));
    }

    let factors = theorem_factors(cfg.epsilon, baseline.monotone, cfg.algorithm)?;
    let verdict = match exact {
        Some(e) if e.feasible && run.feasible => Some(check_bicriteria(
            &run.solution,
            e,
            factors,
            guess.filter(|_| cfg.algorithm == Algorithm::KnownGuess),
            baseline.tau,
            &instance.oracle,
            &instance.weights,
        )?),
        _ => None,
    };

    let status = if !contract_ok {
        RunStatus::ContractViolation
    } else if exact_infeasible {
        notes.push(format!(
            "tau {} exceeds the largest achievable utility",
            baseline.tau
        ));
        RunStatus::Infeasible
    } else if !run.feasible {
        if optimum.is_some() {
            notes.push("no candidate reached the utility bar although tau is achievable".into());
            RunStatus::BoundViolation
        } else {
            RunStatus::Infeasible
        }
    } else if verdict.is_some_and(|v| !v.pass) {
        RunStatus::BoundViolation
    } else {
        RunStatus::Success
    };

    let report = RunReport {
        algorithm: cfg.algorithm.number(),
        selection: (cfg.algorithm == Algorithm::SinglePass).then_some(cfg.selection),
        config: ConfigEcho {
            tau: baseline.tau,
            epsilon: cfg.epsilon,
            r: problem.r(),
            monotone: baseline.monotone,
            guess,
            upper_bound,
            permute_seed: cfg.permute_seed,
        },
        status,
        infeasible: !run.feasible || exact_infeasible,
        solution: solution_pairs(instance, &run.solution),
        weight,
        utility,
        selected_rung: run.selected,
        stats: run.stats,
        guesses: run.guesses,
        exact: exact.map(|e| ExactEcho {
            feasible: e.feasible,
            weight: e.weight,
            utility: e.utility,
            max_utility: baseline.max_utility.unwrap_or(0.0),
            solution: solution_pairs(instance, &e.solution),
        }),
        verdict,
        notes,
        wall_clock_ms: cfg.timing.then(|| elapsed.as_secs_f64() * 1e3),
    };
    report.self_check(instance)?;
    Ok(report)
}

fn ladder_run(result: crate::solver::LadderResult, arity: usize) -> SolverRun {
    match result {
        Ok(out) => SolverRun {
            solution: out.solution,
            solver_weight: out.weight,
            feasible: true,
            selected: Some(out.selected),
            guesses: out.guesses,
            stats: out.stats,
        },
        Err(fail) => SolverRun {
            solution: KSet::empty(arity),
            solver_weight: 0.0,
            feasible: false,
            selected: None,
            guesses: fail.guesses,
            stats: fail.stats,
        },
    }
}
