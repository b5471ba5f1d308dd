use std::collections::BTreeMap;

use super::two_pass::rung;
use super::{
    select, GuessRecord, LadderFailure, LadderOutcome, LadderResult, ProblemConfig, Selection,
    StreamTracker,
};
use crate::error::{Error, Result};
use crate::kset::{ElementId, Position, WeightTable};
use crate::oracle::{CountingOracle, UtilityOracle};
use crate::solver::ThresholdState;

/// Refuse to grow a ladder past this many rungs.
const MAX_RUNGS: u32 = 1_000_000;

/// The dynamic guess set `Λ = {(1-ε)^j·B : L ≤ (1-ε)^j·B ≤ U}` with one
/// threshold instance per live rung.
///
/// `L` starts undefined and is first set by an element with a positive best
/// singleton; until then the ladder is empty. `U` starts at `B` and only
/// moves down to rungs whose instance reached the utility bar.
#[derive(Clone, Debug)]
pub struct GuessLadder {
    cfg: ProblemConfig,
    arity: usize,
    base: f64,
    lower: Option<f64>,
    upper_index: u32,
    instances: BTreeMap<u32, ThresholdState>,
}

impl GuessLadder {
    pub fn new(cfg: ProblemConfig, base: f64, arity: usize) -> Result<Self> {
        if !(base.is_finite() && base > 0.0) {
            return Err(Error::config(format!(
                "ladder base must be positive, got {base}"
            )));
        }
        Ok(GuessLadder {
            cfg,
            arity,
            base,
            lower: None,
            upper_index: 0,
            instances: BTreeMap::new(),
        })
    }

    /// `L`, or `None` while no element has had a positive singleton value.
    pub fn lower(&self) -> Option<f64> {
        self.lower
    }

    /// `U`.
    pub fn upper(&self) -> f64 {
        self.guess(self.upper_index)
    }

    pub fn guess(&self, j: u32) -> f64 {
        rung(self.base, self.cfg.epsilon(), j)
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Live rungs in ascending `j` (descending guess).
    pub fn live(&self) -> impl Iterator<Item = (u32, &ThresholdState)> {
        self.instances.iter().map(|(&j, s)| (j, s))
    }

    pub fn stored_pairs(&self) -> usize {
        self.instances.values().map(|s| s.solution().len()).sum()
    }

    /// Lowers `L` to `ετ·w(x)/g((x,i'))` when `g((x,i'))/w(x) > ετ/L`, then
    /// opens instances for every rung newly inside `[L, U]`. Returns whether
    /// `L` moved.
    pub fn update_lower_bound(&mut self, best_singleton_value: f64, w: f64) -> Result<bool> {
        let et = self.cfg.epsilon() * self.cfg.tau();
        let passes = match self.lower {
            None => best_singleton_value > 0.0,
            Some(lower) => best_singleton_value / w > et / lower,
        };
        if passes {
            self.lower = Some(et * w / best_singleton_value);
            self.regenerate()?;
        }
        Ok(passes)
    }

    /// Largest `j` with `λ_j ≥ L`.
    fn lowest_rung(&self) -> Option<u32> {
        let lower = self.lower?;
        if self.guess(0) < lower {
            return None;
        }
        let estimate = ((lower / self.base).ln() / (1.0 - self.cfg.epsilon()).ln()).floor();
        let mut j = estimate.clamp(0.0, MAX_RUNGS as f64) as u32;
        while j < MAX_RUNGS && self.guess(j + 1) >= lower {
            j += 1;
        }
        while j > 0 && self.guess(j) < lower {
            j -= 1;
        }
        Some(j)
    }

    fn regenerate(&mut self) -> Result<()> {
        let Some(bottom) = self.lowest_rung() else {
            return Ok(());
        };
        if bottom >= MAX_RUNGS {
            return Err(Error::config(format!(
                "guess ladder would exceed {MAX_RUNGS} rungs"
            )));
        }
        let first_new = self
            .instances
            .keys()
            .next_back()
            .map_or(self.upper_index, |&j| j + 1)
            .max(self.upper_index);
        for j in first_new..=bottom {
            let state = ThresholdState::new(&self.cfg, self.guess(j), self.arity)?;
            self.instances.insert(j, state);
        }
        Ok(())
    }

    /// Feeds `x` to every live instance, then moves `U` to the smallest
    /// qualifying guess and drops the rungs above it.
    pub fn process<O: UtilityOracle + ?Sized>(
        &mut self,
        oracle: &O,
        w: f64,
        x: ElementId,
        singleton: (Position, f64),
    ) -> Result<()> {
        let target = self.cfg.utility_target();
        let mut new_upper = None;
        for (&j, state) in self.instances.iter_mut() {
            state.process_with_singleton(oracle, w, x, singleton)?;
            if state.utility() >= target {
                new_upper = Some(j);
            }
        }
        if let Some(j) = new_upper {
            if j > self.upper_index {
                self.upper_index = j;
                self.instances = self.instances.split_off(&j);
            }
        }
        Ok(())
    }

    fn records(&self) -> Vec<GuessRecord> {
        let target = self.cfg.utility_target();
        self.live()
            .map(|(j, s)| GuessRecord {
                index: j,
                guess: s.guess(),
                weight: s.weight(),
                utility: s.utility(),
                qualifies: s.utility() >= target,
            })
            .collect()
    }
}

/// `⌈ln(ετ/(Bκ)) / ln(1-ε)⌉ + 1`, floored at zero: the most rungs the
/// single-pass ladder can hold once `L` has reached `ετ/κ`.
pub fn max_live_instances_bound(epsilon: f64, tau: f64, upper_bound: f64, kappa: f64) -> u64 {
    if kappa <= 0.0 {
        return 0;
    }
    let x = (epsilon * tau / (upper_bound * kappa)).ln() / (1.0 - epsilon).ln();
    (x.ceil() + 1.0).max(0.0) as u64
}

/// One pass with the upper bound `B` from `cfg`.
pub fn algorithm3<I, O>(
    stream: I,
    cfg: &ProblemConfig,
    selection: Selection,
    oracle: &O,
    weights: &WeightTable,
) -> Result<LadderOutcome>
where
    I: IntoIterator<Item = ElementId>,
    O: UtilityOracle + ?Sized,
{
    run_single_pass(stream, cfg, selection, oracle, weights)?.map_err(LadderFailure::into_error)
}

pub(crate) fn run_single_pass<I, O>(
    stream: I,
    cfg: &ProblemConfig,
    selection: Selection,
    oracle: &O,
    weights: &WeightTable,
) -> Result<LadderResult>
where
    I: IntoIterator<Item = ElementId>,
    O: UtilityOracle + ?Sized,
{
    let bound = cfg
        .upper_bound()
        .ok_or_else(|| Error::config("algorithm 3 needs an upper bound B on the optimal cost"))?;
    let oracle = CountingOracle::new(oracle);
    let mut ladder = GuessLadder::new(*cfg, bound, oracle.arity())?;
    let mut tracker = StreamTracker::new(oracle.ground_size());
    for x in stream {
        let w = tracker.admit(x, weights, &oracle)?;
        let singleton = tracker.singleton(&oracle, x, w);
        ladder.update_lower_bound(singleton.1, w)?;
        let live = ladder.len();
        ladder.process(&oracle, w, x, singleton)?;
        let stored = ladder.stored_pairs();
        tracker.finish_element(&oracle, live, stored);
    }
    let stats = tracker.finish(&oracle);

    let guesses = ladder.records();
    let Some(chosen) = select(&guesses, selection).cloned() else {
        return Ok(Err(LadderFailure {
            required: cfg.utility_target(),
            guesses,
            stats,
        }));
    };
    let solution = ladder
        .instances
        .remove(&chosen.index)
        .expect("selected rung is live")
        .into_solution();
    Ok(Ok(LadderOutcome {
        solution,
        weight: chosen.weight,
        utility: chosen.utility,
        selected: chosen.index,
        guesses,
        stats,
    }))
}
