use super::UtilityOracle;
use crate::error::{Error, Result};
use crate::kset::{KSet, KSetSpace};

/// Largest table accepted, in entries.
pub const TABLE_BUDGET: u128 = 1_000_000;

/// An explicit value for every k-set over a small ground set, stored in the
/// lexicographic order of [`KSetSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct TabularOracle {
    space: KSetSpace,
    /// `(k+1)^(n-1-x)` for element `x`.
    strides: Vec<usize>,
    values: Vec<f64>,
}

impl TabularOracle {
    pub fn new(ground_size: usize, arity: usize, values: Vec<f64>) -> Result<Self> {
        let space = KSetSpace::new(ground_size, arity, TABLE_BUDGET)?;
        if values.len() != space.count() {
            return Err(Error::validation(format!(
                "table has {} entries, expected (k+1)^n = {}",
                values.len(),
                space.count()
            )));
        }
        if values[0] != 0.0 {
            return Err(Error::validation(format!(
                "table entry for the empty k-set is {}, must be 0",
                values[0]
            )));
        }
        if let Some(idx) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::validation(format!(
                "table entry {:?} has value {}; values must be non-negative",
                space.decode(idx),
                values[idx]
            )));
        }
        let mut strides = vec![1usize; ground_size];
        for x in (0..ground_size.saturating_sub(1)).rev() {
            strides[x] = strides[x + 1] * (arity + 1);
        }
        Ok(TabularOracle {
            space,
            strides,
            values,
        })
    }

    /// Tabulates any oracle over its full k-set space.
    pub fn from_oracle<O: UtilityOracle + ?Sized>(oracle: &O) -> Result<Self> {
        let space = KSetSpace::new(oracle.ground_size(), oracle.arity(), TABLE_BUDGET)?;
        let values = space.iter().map(|s| oracle.value(&s)).collect();
        TabularOracle::new(oracle.ground_size(), oracle.arity(), values)
    }

    pub fn space(&self) -> &KSetSpace {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    fn index(&self, s: &KSet) -> usize {
        s.pairs()
            .map(|(x, i)| i.index() * self.strides[x.index()])
            .sum()
    }
}

impl UtilityOracle for TabularOracle {
    fn arity(&self) -> usize {
        self.space.arity()
    }

    fn ground_size(&self) -> usize {
        self.space.ground_size()
    }

    fn value(&self, s: &KSet) -> f64 {
        self.values[self.index(s)]
    }
}
