use super::{ItemSet, UtilityOracle};
use crate::error::{Error, Result};
use crate::kset::KSet;

/// One weighted-coverage set function `f_i` over its own universe.
#[derive(Clone, Debug)]
pub struct PositionCoverage {
    universe_weights: Vec<f64>,
    /// Indexed by element.
    covers: Vec<ItemSet>,
}

impl PositionCoverage {
    pub fn new(universe_weights: Vec<f64>, covers: Vec<Vec<usize>>) -> Result<Self> {
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
            .map(|items| ItemSet::from_items(universe, items))
            .collect::<Result<_>>()?;
        Ok(PositionCoverage {
            universe_weights,
            covers,
        })
    }
}

/// `g(s) = Σ_i f_i(S_i)` with each `f_i` a weighted coverage function.
#[derive(Clone, Debug)]
pub struct SeparableOracle {
    ground_size: usize,
    positions: Vec<PositionCoverage>,
}

impl SeparableOracle {
    pub fn new(positions: Vec<PositionCoverage>) -> Result<Self> {
        let Some(first) = positions.first() else {
            return Err(Error::config(
                "a separable instance needs at least one position",
            ));
        };
        let ground_size = first.covers.len();
        if let Some(i) = positions.iter().position(|f| f.covers.len() != ground_size) {
            return Err(Error::validation(format!(
                "position {} lists {} elements, expected {ground_size}",
                i + 1,
                positions[i].covers.len()
            )));
        }
        Ok(SeparableOracle {
            ground_size,
            positions,
        })
    }
}

impl UtilityOracle for SeparableOracle {
    fn arity(&self) -> usize {
        self.positions.len()
    }

    fn ground_size(&self) -> usize {
        self.ground_size
    }

    fn value(&self, s: &KSet) -> f64 {
        let mut covered: Vec<ItemSet> = self
            .positions
            .iter()
            .map(|f| ItemSet::with_capacity(f.universe_weights.len()))
            .collect();
        for (x, i) in s.pairs() {
            let slot = i.index() - 1;
            covered[slot].union_with(&self.positions[slot].covers[x.index()]);
        }
        covered
            .iter()
            .zip(&self.positions)
            .map(|(c, f)| c.weight(&f.universe_weights))
            .sum()
    }
}
