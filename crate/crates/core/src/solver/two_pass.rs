use super::{
    select, GuessRecord, LadderFailure, LadderOutcome, LadderResult, ProblemConfig, Selection,
    StreamTracker,
};
use crate::error::{Error, Result};
use crate::kset::{ElementId, WeightTable};
use crate::oracle::{CountingOracle, UtilityOracle};
use crate::solver::ThresholdState;

/// Ratios this close to an integer are treated as that integer when counting rungs.
const RUNG_SNAP: f64 = 1e-9;

/// Exact `(w_min, w_max)` of a stream, in one pass.
pub fn weight_extremes<I>(stream: I, weights: &WeightTable) -> Result<(f64, f64)>
where
    I: IntoIterator<Item = ElementId>,
{
    let (w_min, w_max, _) = scan(stream, weights)?;
    Ok((w_min, w_max))
}

fn scan<I>(stream: I, weights: &WeightTable) -> Result<(f64, f64, usize)>
where
    I: IntoIterator<Item = ElementId>,
{
    let mut w_min = f64::INFINITY;
    let mut w_max = f64::NEG_INFINITY;
    let mut count = 0;
    for x in stream {
        let w = weights.weight(x)?;
        w_min = w_min.min(w);
        w_max = w_max.max(w);
        count += 1;
    }
    if count == 0 {
        return Err(Error::instance("the stream is empty"));
    }
    Ok((w_min, w_max, count))
}

/// `⌈l⌉ + 1` with `l = ln(γ/n) / ln(1-ε)`, the number of rungs from `n·w_max`
/// down to the first rung `≤ w_min`.
pub fn ladder_length(w_min: f64, w_max: f64, n: usize, epsilon: f64) -> usize {
    let gamma = w_min / w_max;
    let l = (gamma / n as f64).ln() / (1.0 - epsilon).ln();
    let rounded = l.round();
    let steps = if (l - rounded).abs() < RUNG_SNAP {
        rounded
    } else {
        l.ceil()
    };
    steps.max(0.0) as usize + 1
}

pub(crate) fn rung(base: f64, epsilon: f64, j: u32) -> f64 {
    base * (1.0 - epsilon).powi(j as i32)
}

/// Guesses `λ_j = (1-ε)^j · n · w_max` for `j = 0..=⌈l⌉`.
pub fn build_guess_set(w_min: f64, w_max: f64, n: usize, epsilon: f64) -> Vec<f64> {
    let base = n as f64 * w_max;
    (0..ladder_length(w_min, w_max, n, epsilon) as u32)
        .map(|j| rung(base, epsilon, j))
        .collect()
}

/// Two passes over `stream()`: weight range first, then one threshold
/// instance per guess. Returns the cheapest instance reaching `(1-ε)τ/r`.
pub fn algorithm2<F, I, O>(
    stream: F,
    cfg: &ProblemConfig,
    oracle: &O,
    weights: &WeightTable,
) -> Result<LadderOutcome>
where
    F: Fn() -> I,
    I: IntoIterator<Item = ElementId>,
    O: UtilityOracle + ?Sized,
{
    run_two_pass(stream, cfg, oracle, weights)?.map_err(LadderFailure::into_error)
}

pub(crate) fn run_two_pass<F, I, O>(
    stream: F,
    cfg: &ProblemConfig,
    oracle: &O,
    weights: &WeightTable,
) -> Result<LadderResult>
where
    F: Fn() -> I,
    I: IntoIterator<Item = ElementId>,
    O: UtilityOracle + ?Sized,
{
    let (w_min, w_max, n) = scan(stream(), weights)?;
    let base = n as f64 * w_max;
    let oracle = CountingOracle::new(oracle);
    let mut instances = (0..ladder_length(w_min, w_max, n, cfg.epsilon()) as u32)
        .map(|j| {
            let guess = rung(base, cfg.epsilon(), j);
            ThresholdState::new(cfg, guess, oracle.arity()).map(|s| (j, s))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut tracker = StreamTracker::new(oracle.ground_size());
    for x in stream() {
        let w = tracker.admit(x, weights, &oracle)?;
        let singleton = tracker.singleton(&oracle, x, w);
        for (_, state) in instances.iter_mut() {
            state.process_with_singleton(&oracle, w, x, singleton)?;
        }
        let stored = instances.iter().map(|(_, s)| s.solution().len()).sum();
        tracker.finish_element(&oracle, instances.len(), stored);
    }
    let stats = tracker.finish(&oracle);
    if stats.elements_seen as usize != n {
        return Err(Error::instance(format!(
            "second pass saw {} elements, first pass saw {n}",
            stats.elements_seen
        )));
    }

    let target = cfg.utility_target();
    let guesses: Vec<GuessRecord> = instances
        .iter()
        .map(|(j, s)| GuessRecord {
            index: *j,
            guess: s.guess(),
            weight: s.weight(),
            utility: s.utility(),
            qualifies: s.utility() >= target,
        })
        .collect();
    let Some(chosen) = select(&guesses, Selection::Default).cloned() else {
        return Ok(Err(LadderFailure {
            required: target,
            guesses,
            stats,
        }));
    };
    let solution = instances
        .into_iter()
        .find(|(j, _)| *j == chosen.index)
        .map(|(_, s)| s.into_solution())
        .expect("selected rung exists");
    Ok(Ok(LadderOutcome {
        solution,
        weight: chosen.weight,
        utility: chosen.utility,
        selected: chosen.index,
        guesses,
        stats,
    }))
}
