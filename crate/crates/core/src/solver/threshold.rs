use super::{ProblemConfig, Step, StreamStats, StreamTracker, TraceRecord};
use crate::error::{Error, Result};
use crate::kset::{ElementId, KSet, Position, WeightTable};
use crate::oracle::{best_marginal, best_singleton, CountingOracle, UtilityOracle};

/// One threshold-greedy instance driven by a fixed guess of the optimal cost.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdState {
    tau: f64,
    guess: f64,
    theta: f64,
    budget: f64,
    solution: KSet,
    weight: f64,
    utility: f64,
    found_big: bool,
}

impl ThresholdState {
    /// `θ = ετ/guess`, `A = (3-ε)/(2ε)·guess` (monotone) or `(4-ε)/(3ε)·guess`.
    pub fn new(cfg: &ProblemConfig, guess: f64, arity: usize) -> Result<Self> {
        if !(guess.is_finite() && guess > 0.0) {
            return Err(Error::config(format!(
                "guess must be positive, got {guess}"
            )));
        }
        Ok(ThresholdState {
            tau: cfg.tau(),
            guess,
            theta: cfg.epsilon() * cfg.tau() / guess,
            budget: cfg.budget_factor() * guess,
            solution: KSet::empty(arity),
            weight: 0.0,
            utility: 0.0,
            found_big: false,
        })
    }

    pub fn guess(&self) -> f64 {
        self.guess
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn solution(&self) -> &KSet {
        &self.solution
    }

    /// Running `w(x)`, accumulated in insertion order.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// `g(x)` as last returned by the oracle.
    pub fn utility(&self) -> f64 {
        self.utility
    }

    pub fn found_big(&self) -> bool {
        self.found_big
    }

    pub fn into_solution(self) -> KSet {
        self.solution
    }

    /// Feeds one element. Makes at most `2k` oracle queries.
    pub fn process_element<O: UtilityOracle + ?Sized>(
        &mut self,
        oracle: &O,
        weights: &WeightTable,
        x: ElementId,
    ) -> Result<Step> {
        let w = weights.weight(x)?;
        let singleton = best_singleton(oracle, x);
        self.process_with_singleton(oracle, w, x, singleton)
    }

    /// Same as [`process_element`](Self::process_element) with the best
    /// singleton `(i', g((x,i')))` already known; at most `k` further queries.
    pub fn process_with_singleton<O: UtilityOracle + ?Sized>(
        &mut self,
        oracle: &O,
        w: f64,
        x: ElementId,
        (best_position, best_value): (Position, f64),
    ) -> Result<Step> {
        if self.solution.contains(x) {
            return Err(Error::instance(format!(
                "element {x} arrived twice in the stream"
            )));
        }
        if w <= self.budget && best_value >= self.tau {
            self.solution = KSet::empty(self.solution.arity());
            self.solution.assign(x, best_position)?;
            self.weight = w;
            self.utility = best_value;
            self.found_big = true;
            return Ok(Step::Big {
                position: best_position,
                value: best_value,
            });
        }
        let m = best_marginal(oracle, &self.solution, self.utility, x)?;
        if m.gain / w >= self.theta && self.weight + w <= self.budget {
            self.solution.assign(x, m.position)?;
            self.weight += w;
            self.utility = m.value;
            debug_assert!(self.weight <= self.budget);
            Ok(Step::Inserted {
                position: m.position,
                gain: m.gain,
            })
        } else {
            Ok(Step::Rejected {
                position: m.position,
                gain: m.gain,
            })
        }
    }
}

/// Output of [`algorithm1`].
#[derive(Clone, Debug, PartialEq)]
pub struct Algorithm1Outcome {
    pub solution: KSet,
    pub weight: f64,
    pub utility: f64,
    pub theta: f64,
    pub budget: f64,
    pub stats: StreamStats,
    pub trace: Vec<TraceRecord>,
}

/// Single pass with a known guess `≥ w(v)` taken from `cfg`.
///
/// Returns whatever the instance holds at the end of the stream; an empty
/// stream yields the empty k-set and deciding feasibility is up to the caller.
pub fn algorithm1<I, O>(
    stream: I,
    cfg: &ProblemConfig,
    oracle: &O,
    weights: &WeightTable,
) -> Result<Algorithm1Outcome>
where
    I: IntoIterator<Item = ElementId>,
    O: UtilityOracle + ?Sized,
{
    run(stream, cfg, oracle, weights, false)
}

/// [`algorithm1`] plus one [`TraceRecord`] per element.
pub fn algorithm1_with_trace<I, O>(
    stream: I,
    cfg: &ProblemConfig,
    oracle: &O,
    weights: &WeightTable,
) -> Result<Algorithm1Outcome>
where
    I: IntoIterator<Item = ElementId>,
    O: UtilityOracle + ?Sized,
{
    run(stream, cfg, oracle, weights, true)
}

fn run<I, O>(
    stream: I,
    cfg: &ProblemConfig,
    oracle: &O,
    weights: &WeightTable,
    trace: bool,
) -> Result<Algorithm1Outcome>
where
    I: IntoIterator<Item = ElementId>,
    O: UtilityOracle + ?Sized,
{
    let guess = cfg
        .guessed_opt()
        .ok_or_else(|| Error::config("algorithm 1 needs a guess of the optimal cost"))?;
    let oracle = CountingOracle::new(oracle);
    let mut state = ThresholdState::new(cfg, guess, oracle.arity())?;
    let mut tracker = StreamTracker::new(oracle.ground_size());
    let mut records = Vec::new();
    for x in stream {
        let w = tracker.admit(x, weights, &oracle)?;
        let singleton = tracker.singleton(&oracle, x, w);
        let step = state.process_with_singleton(&oracle, w, x, singleton)?;
        tracker.finish_element(&oracle, 1, state.solution.len());
        if trace {
            records.push(TraceRecord {
                element: x,
                step,
                running_weight: state.weight,
                running_utility: state.utility,
            });
        }
    }
    let stats = tracker.finish(&oracle);
    Ok(Algorithm1Outcome {
        weight: state.weight,
        utility: state.utility,
        theta: state.theta,
        budget: state.budget,
        solution: state.into_solution(),
        stats,
        trace: records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::CoverageOracle;

    const A: ElementId = ElementId(0);
    const B: ElementId = ElementId(1);
    const C: ElementId = ElementId(2);

    fn p(i: usize) -> Position {
        Position::new(i).unwrap()
    }

    fn i0() -> (CoverageOracle, WeightTable) {
        let g = CoverageOracle::new(
            2,
            vec![1.0; 3],
            vec![vec![vec![0, 1], vec![0]], vec![vec![2], vec![1, 2]]],
        )
        .unwrap();
        (g, WeightTable::new(vec![1.0, 2.0]).unwrap())
    }

    /// I₀ plus an element c (w=1) whose first position covers everything.
    fn i0_with_big() -> (CoverageOracle, WeightTable) {
        let g = CoverageOracle::new(
            2,
            vec![1.0; 3],
            vec![
                vec![vec![0, 1], vec![0]],
                vec![vec![2], vec![1, 2]],
                vec![vec![0, 1, 2], vec![]],
            ],
        )
        .unwrap();
        (g, WeightTable::new(vec![1.0, 2.0, 1.0]).unwrap())
    }

    #[test]
    fn initial_state_formulas() {
        let mono = ProblemConfig::new(10.0, 0.5, true).unwrap();
        let s = ThresholdState::new(&mono, 20.0, 2).unwrap();
        assert_eq!((s.theta(), s.budget()), (0.25, 50.0));

        let mono = ProblemConfig::new(3.0, 0.5, true).unwrap();
        let s = ThresholdState::new(&mono, 3.0, 2).unwrap();
        assert_eq!((s.theta(), s.budget()), (0.5, 7.5));
        assert!(s.solution().is_empty());

        let non = ProblemConfig::new(3.0, 0.5, false).unwrap();
        let s = ThresholdState::new(&non, 3.0, 2).unwrap();
        assert_eq!(s.theta(), 0.5);
        assert!((s.budget() - 7.0).abs() < 1e-12);

        assert!(matches!(
            ThresholdState::new(&mono, 0.0, 2).unwrap_err(),
            Error::Config(_)
        ));
    }

    #[test]
    fn process_element_trace_on_i0() {
        let (g, w) = i0();
        let cfg = ProblemConfig::new(3.0, 0.5, true).unwrap();
        let mut s = ThresholdState::new(&cfg, 3.0, 2).unwrap();
        let counted = CountingOracle::new(&g);

        let step = s.process_element(&counted, &w, A).unwrap();
        assert_eq!(
            step,
            Step::Inserted {
                position: p(1),
                gain: 2.0
            }
        );
        assert_eq!(counted.queries(), 4);

        let step = s.process_element(&counted, &w, B).unwrap();
        assert_eq!(
            step,
            Step::Inserted {
                position: p(1),
                gain: 1.0
            }
        );
        assert_eq!(counted.queries(), 8);

        assert_eq!(s.weight(), 3.0);
        assert_eq!(s.utility(), 3.0);
        assert!(!s.found_big());
        let expected = KSet::from_pairs(2, [(A, p(1)), (B, p(1))]).unwrap();
        assert_eq!(s.solution(), &expected);
    }

    #[test]
    fn big_element_replaces_solution() {
        let (g, w) = i0_with_big();
        let cfg = ProblemConfig::new(3.0, 0.5, true).unwrap();
        let mut s = ThresholdState::new(&cfg, 3.0, 2).unwrap();
        s.process_element(&g, &w, A).unwrap();
        s.process_element(&g, &w, B).unwrap();
        let counted = CountingOracle::new(&g);
        let step = s.process_element(&counted, &w, C).unwrap();
        assert_eq!(
            step,
            Step::Big {
                position: p(1),
                value: 3.0
            }
        );
        assert_eq!(counted.queries(), 2);
        assert_eq!(s.solution(), &KSet::from_pairs(2, [(C, p(1))]).unwrap());
        assert_eq!((s.weight(), s.utility()), (1.0, 3.0));
        assert!(s.found_big());
    }

    #[test]
    fn duplicate_element_is_rejected() {
        let (g, w) = i0();
        let cfg = ProblemConfig::new(3.0, 0.5, true).unwrap();
        let mut s = ThresholdState::new(&cfg, 3.0, 2).unwrap();
        s.process_element(&g, &w, A).unwrap();
        assert!(matches!(
            s.process_element(&g, &w, A).unwrap_err(),
            Error::Instance(_)
        ));
        let stream = [A, B, A];
        let cfg = cfg.with_guess(3.0).unwrap();
        assert!(matches!(
            algorithm1(stream, &cfg, &g, &w).unwrap_err(),
            Error::Instance(_)
        ));
    }

    #[test]
    fn budget_blocks_insertion() {
        let (g, w) = i0();
        // guess 0.5: θ = 3, A = 1.25; a passes (gain 2/1 < 3 fails) -> rejected on ratio
        let cfg = ProblemConfig::new(3.0, 0.5, true).unwrap();
        let mut s = ThresholdState::new(&cfg, 0.5, 2).unwrap();
        assert!(matches!(
            s.process_element(&g, &w, A).unwrap(),
            Step::Rejected { .. }
        ));
        // guess 1: θ = 1.5, A = 2.5; a inserted (2 ≥ 1.5), b would exceed budget 1+2 > 2.5
        let mut s = ThresholdState::new(&cfg, 1.0, 2).unwrap();
        assert!(matches!(
            s.process_element(&g, &w, A).unwrap(),
            Step::Inserted { .. }
        ));
        assert!(matches!(
            s.process_element(&g, &w, B).unwrap(),
            Step::Rejected { .. }
        ));
        assert!(s.weight() <= s.budget());
    }

    #[test]
    fn algorithm1_on_i0() {
        let (g, w) = i0();
        let cfg = ProblemConfig::new(3.0, 0.5, true)
            .unwrap()
            .with_guess(3.0)
            .unwrap();
        let out = algorithm1_with_trace([A, B], &cfg, &g, &w).unwrap();
        assert_eq!(
            out.solution,
            KSet::from_pairs(2, [(A, p(1)), (B, p(1))]).unwrap()
        );
        assert_eq!((out.weight, out.utility), (3.0, 3.0));
        assert!(out.utility >= cfg.utility_target());
        assert_eq!(out.stats.oracle_queries, 8);
        assert_eq!(out.stats.peak_stored_pairs, 2);
        assert_eq!((out.stats.w_min, out.stats.w_max), (1.0, 2.0));
        assert_eq!(out.stats.kappa, 2.0);
        assert_eq!(out.trace.len(), 2);
        assert_eq!(out.trace[1].running_weight, 3.0);
    }

    #[test]
    fn algorithm1_empty_stream_and_missing_guess() {
        let (g, w) = i0();
        let cfg = ProblemConfig::new(3.0, 0.5, true).unwrap();
        assert!(matches!(
            algorithm1([], &cfg, &g, &w).unwrap_err(),
            Error::Config(_)
        ));
        let out = algorithm1([], &cfg.with_guess(3.0).unwrap(), &g, &w).unwrap();
        assert!(out.solution.is_empty());
        assert_eq!(out.utility, 0.0);
        assert_eq!(out.stats.elements_seen, 0);
    }
}
