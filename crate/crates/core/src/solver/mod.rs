//! Streaming bicriteria solvers for weighted k-submodular cover.
//!
//! * [`algorithm1`]: single pass with a known upper guess of the optimal cost.
//! * [`algorithm2`]: two passes; the first finds the weight range, the second
//!   runs one threshold instance per rung of a geometric guess ladder.
//! * [`algorithm3`]: single pass with a caller-supplied upper bound `B`; the
//!   ladder is grown and pruned while the stream is read.

mod single_pass;
mod threshold;
mod two_pass;

use serde::{Deserialize, Serialize};

pub(crate) use single_pass::run_single_pass;
pub use single_pass::{algorithm3, max_live_instances_bound, GuessLadder};
pub use threshold::{algorithm1, algorithm1_with_trace, Algorithm1Outcome, ThresholdState};
pub(crate) use two_pass::run_two_pass;
pub use two_pass::{algorithm2, build_guess_set, ladder_length, weight_extremes};

use crate::error::{Error, Result};
use crate::kset::{ElementId, KSet, Position, WeightTable};
use crate::oracle::{best_singleton, CountingOracle, UtilityOracle};

/// Inputs shared by all three solvers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProblemConfig {
    tau: f64,
    epsilon: f64,
    monotone: bool,
    upper_bound: Option<f64>,
    guessed_opt: Option<f64>,
}

impl ProblemConfig {
    pub fn new(tau: f64, epsilon: f64, monotone: bool) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::config(format!("tau must be positive, got {tau}")));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::config(format!(
                "epsilon must lie in (0, 1), got {epsilon}"
            )));
        }
        Ok(ProblemConfig {
            tau,
            epsilon,
            monotone,
            upper_bound: None,
            guessed_opt: None,
        })
    }

    /// Upper guess of the optimal cost, required by [`algorithm1`].
    pub fn with_guess(mut self, guess: f64) -> Result<Self> {
        self.guessed_opt = Some(positive("guess", guess)?);
        Ok(self)
    }

    /// Upper bound `B` on the optimal cost, required by [`algorithm3`].
    pub fn with_upper_bound(mut self, bound: f64) -> Result<Self> {
        self.upper_bound = Some(positive("upper bound B", bound)?);
        Ok(self)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn monotone(&self) -> bool {
        self.monotone
    }

    pub fn upper_bound(&self) -> Option<f64> {
        self.upper_bound
    }

    pub fn guessed_opt(&self) -> Option<f64> {
        self.guessed_opt
    }

    /// 2 for monotone utilities, 3 otherwise.
    pub fn r(&self) -> u32 {
        if self.monotone {
            2
        } else {
            3
        }
    }

    /// The utility bar `(1-ε)τ/r` a candidate must reach.
    pub fn utility_target(&self) -> f64 {
        (1.0 - self.epsilon) * self.tau / self.r() as f64
    }

    /// Cost budget per unit of guess: `(3-ε)/(2ε)` or `(4-ε)/(3ε)`.
    pub fn budget_factor(&self) -> f64 {
        let e = self.epsilon;
        if self.monotone {
            (3.0 - e) / (2.0 * e)
        } else {
            (4.0 - e) / (3.0 * e)
        }
    }
}

fn positive(what: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::config(format!("{what} must be positive, got {v}")))
    }
}

/// Which ladder instance the single-pass solver returns.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    /// Minimum weight among instances reaching the utility bar.
    #[default]
    Default,
    /// Maximum utility over the live ladder.
    PaperLiteral,
}

/// What happened to one element inside one threshold instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "branch", rename_all = "snake_case")]
pub enum Step {
    /// Singleton reached `τ` within budget; the solution was replaced by it.
    Big {
        position: Position,
        value: f64,
    },
    Inserted {
        position: Position,
        gain: f64,
    },
    Rejected {
        position: Position,
        gain: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRecord {
    pub element: ElementId,
    #[serde(flatten)]
    pub step: Step,
    pub running_weight: f64,
    pub running_utility: f64,
}

/// Measurements collected while a solver consumes its stream.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StreamStats {
    pub w_min: f64,
    pub w_max: f64,
    /// `w_min / w_max`.
    pub gamma: f64,
    /// `max g((x,i)) / w(x)` over the stream.
    pub kappa: f64,
    pub elements_seen: u64,
    /// Peak of the total number of pairs held across live instances.
    pub peak_stored_pairs: u64,
    pub live_instances_max: u64,
    pub oracle_queries: u64,
    /// Largest number of queries spent on a single element.
    pub max_element_queries: u64,
    /// Largest per-element query count divided by the number of live
    /// instances at that element (at least one).
    pub max_element_queries_per_instance: f64,
}

/// Per-element bookkeeping shared by the solvers.
pub(crate) struct StreamTracker {
    seen: Vec<bool>,
    stats: StreamStats,
    queries_before: u64,
}

impl StreamTracker {
    pub(crate) fn new(ground_size: usize) -> Self {
        StreamTracker {
            seen: vec![false; ground_size],
            stats: StreamStats {
                w_min: f64::INFINITY,
                w_max: f64::NEG_INFINITY,
                ..StreamStats::default()
            },
            queries_before: 0,
        }
    }

    /// Validates `x`, updates weight statistics, and returns `w(x)`.
    pub(crate) fn admit<O: UtilityOracle>(
        &mut self,
        x: ElementId,
        weights: &WeightTable,
        oracle: &CountingOracle<O>,
    ) -> Result<f64> {
        let Some(seen) = self.seen.get_mut(x.index()) else {
            return Err(Error::instance(format!(
                "element {x} is outside the ground set of size {}",
                oracle.ground_size()
            )));
        };
        if *seen {
            return Err(Error::instance(format!(
                "element {x} appears twice in the stream"
            )));
        }
        *seen = true;
        let w = weights.weight(x)?;
        self.stats.elements_seen += 1;
        self.stats.w_min = self.stats.w_min.min(w);
        self.stats.w_max = self.stats.w_max.max(w);
        self.queries_before = oracle.queries();
        Ok(w)
    }

    pub(crate) fn singleton<O: UtilityOracle>(
        &mut self,
        oracle: &CountingOracle<O>,
        x: ElementId,
        w: f64,
    ) -> (Position, f64) {
        let best = best_singleton(oracle, x);
        self.stats.kappa = self.stats.kappa.max(best.1 / w);
        best
    }

    pub(crate) fn finish_element<O: UtilityOracle>(
        &mut self,
        oracle: &CountingOracle<O>,
        live: usize,
        stored_pairs: usize,
    ) {
        let spent = oracle.queries() - self.queries_before;
        let s = &mut self.stats;
        s.max_element_queries = s.max_element_queries.max(spent);
        s.max_element_queries_per_instance = s
            .max_element_queries_per_instance
            .max(spent as f64 / live.max(1) as f64);
        s.live_instances_max = s.live_instances_max.max(live as u64);
        s.peak_stored_pairs = s.peak_stored_pairs.max(stored_pairs as u64);
    }

    pub(crate) fn finish<O: UtilityOracle>(mut self, oracle: &CountingOracle<O>) -> StreamStats {
        let s = &mut self.stats;
        s.oracle_queries = oracle.queries();
        if s.elements_seen == 0 {
            s.w_min = 0.0;
            s.w_max = 0.0;
        } else {
            s.gamma = s.w_min / s.w_max;
        }
        self.stats
    }
}

/// Result of one threshold instance on a guess ladder.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GuessRecord {
    /// Rung index `j` in `λ_j = (1-ε)^j · base`.
    pub index: u32,
    pub guess: f64,
    pub weight: f64,
    pub utility: f64,
    pub qualifies: bool,
}

/// Output of the ladder-based solvers.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderOutcome {
    pub solution: KSet,
    pub weight: f64,
    pub utility: f64,
    /// Rung of the returned solution.
    pub selected: u32,
    /// Every instance alive at the end of the stream, in rung order.
    pub guesses: Vec<GuessRecord>,
    pub stats: StreamStats,
}

/// A ladder run in which no instance qualified.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct LadderFailure {
    pub(crate) required: f64,
    pub(crate) guesses: Vec<GuessRecord>,
    pub(crate) stats: StreamStats,
}

impl LadderFailure {
    fn into_error(self) -> Error {
        Error::Infeasible {
            required: self.required,
            best: self.guesses.iter().map(|g| g.utility).fold(0.0, f64::max),
        }
    }
}

pub(crate) type LadderResult = std::result::Result<LadderOutcome, LadderFailure>;

pub(crate) fn select(guesses: &[GuessRecord], selection: Selection) -> Option<&GuessRecord> {
    match selection {
        Selection::Default => guesses.iter().filter(|r| r.qualifies).reduce(|best, r| {
            if r.weight < best.weight {
                r
            } else {
                best
            }
        }),
        Selection::PaperLiteral => guesses
            .iter()
            .reduce(|best, r| if r.utility > best.utility { r } else { best })
            .filter(|r| r.qualifies),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(ProblemConfig::new(0.0, 0.5, true).is_err());
        assert!(ProblemConfig::new(1.0, 0.0, true).is_err());
        assert!(ProblemConfig::new(1.0, 1.0, true).is_err());
        assert!(ProblemConfig::new(f64::NAN, 0.5, true).is_err());
        let cfg = ProblemConfig::new(3.0, 0.5, true).unwrap();
        assert!(cfg.with_guess(0.0).is_err());
        assert!(cfg.with_upper_bound(-1.0).is_err());
        assert_eq!(cfg.r(), 2);
        assert_eq!(cfg.utility_target(), 0.75);
        let non = ProblemConfig::new(3.0, 0.5, false).unwrap();
        assert_eq!(non.r(), 3);
        assert_eq!(non.utility_target(), 0.5);
    }

    fn record(index: u32, weight: f64, utility: f64, qualifies: bool) -> GuessRecord {
        GuessRecord {
            index,
            guess: 1.0,
            weight,
            utility,
            qualifies,
        }
    }

    #[test]
    fn selection_rules() {
        let gs = [
            record(0, 5.0, 9.0, true),
            record(1, 2.0, 4.0, true),
            record(2, 1.0, 1.0, false),
            record(3, 2.0, 4.0, true),
        ];
        assert_eq!(select(&gs, Selection::Default).unwrap().index, 1);
        assert_eq!(select(&gs, Selection::PaperLiteral).unwrap().index, 0);
        let none = [record(0, 1.0, 0.5, false)];
        assert!(select(&none, Selection::Default).is_none());
        assert!(select(&none, Selection::PaperLiteral).is_none());
        assert!(select(&[], Selection::PaperLiteral).is_none());
    }
}
