use super::{ItemSet, UtilityOracle};
use crate::error::{Error, Result};
use crate::kset::KSet;

/// Weighted coverage over pairs: `g(s)` is the total weight of the union of the
/// cover sets of all pairs `(x, i)` in `s`. Monotone.
#[derive(Clone, Debug)]
pub struct CoverageOracle {
    arity: usize,
    universe_weights: Vec<f64>,
    /// Indexed `[element][position - 1]`.
    covers: Vec<Vec<ItemSet>>,
}

impl CoverageOracle {
    /// `covers[x][i - 1]` lists the universe items covered by the pair `(x, i)`.
    pub fn new(
        arity: usize,
        universe_weights: Vec<f64>,
        covers: Vec<Vec<Vec<usize>>>,
    ) -> Result<Self> {
        if arity == 0 {
            return Err(Error::config("arity k must be at least 1"));
        }
        if let Some(u) = universe_weights
            .iter()
            .position(|w| !(w.is_finite() && *w >= 0.0))
        {
            return Err(Error::validation(format!(
                "universe item {u} has weight {}; universe weights must be non-negative",
                universe_weights[u]
            )));
        }
        let universe = universe_weights.len();
        let covers = covers
            .iter()
            .enumerate()
            .map(|(x, per_position)| {
                if per_position.len() != arity {
                    return Err(Error::validation(format!(
                        "element {x} lists {} cover sets, expected one per position ({arity})",
                        per_position.len()
                    )));
                }
                per_position
                    .iter()
                    .map(|items| ItemSet::from_items(universe, items))
                    .collect()
            })
            .collect::<Result<Vec<Vec<ItemSet>>>>()?;
        Ok(CoverageOracle {
            arity,
            universe_weights,
            covers,
        })
    }

    pub fn universe_size(&self) -> usize {
        self.universe_weights.len()
    }
}

impl UtilityOracle for CoverageOracle {
    fn arity(&self) -> usize {
        self.arity
    }

    fn ground_size(&self) -> usize {
        self.covers.len()
    }

    fn value(&self, s: &KSet) -> f64 {
        let mut covered = ItemSet::with_capacity(self.universe_weights.len());
        for (x, i) in s.pairs() {
            covered.union_with(&self.covers[x.index()][i.index() - 1]);
        }
        covered.weight(&self.universe_weights)
    }
}
