//! Value-query access to non-negative, normalized k-submodular utilities.
//!
//! Algorithms only ever see a [`UtilityOracle`]; query complexity is measured
//! by wrapping an oracle in a [`CountingOracle`].

mod coverage;
mod separable;
mod tabular;
pub mod verify;

use std::sync::atomic::{AtomicU64, Ordering};

pub use coverage::CoverageOracle;
pub use separable::{PositionCoverage, SeparableOracle};
pub use tabular::{TabularOracle, TABLE_BUDGET};

use crate::error::{Error, Result};
use crate::kset::{ElementId, KSet, Position};

pub trait UtilityOracle: Sync {
    /// Number of positions `k`.
    fn arity(&self) -> usize;

    /// Ground-set size `n`.
    fn ground_size(&self) -> usize;

    /// `g(s)` without compatibility checks. Callers must pass a k-set of the
    /// oracle's arity whose elements are all `< ground_size()`.
    fn value(&self, s: &KSet) -> f64;
}

impl<T: UtilityOracle + ?Sized> UtilityOracle for &T {
    fn arity(&self) -> usize {
        (**self).arity()
    }

    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }

    fn value(&self, s: &KSet) -> f64 {
        (**self).value(s)
    }
}

impl<T: UtilityOracle + ?Sized> UtilityOracle for Box<T> {
    fn arity(&self) -> usize {
        (**self).arity()
    }

    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }

    fn value(&self, s: &KSet) -> f64 {
        (**self).value(s)
    }
}

pub(crate) fn check_compatible<O: UtilityOracle + ?Sized>(oracle: &O, s: &KSet) -> Result<()> {
    if s.arity() != oracle.arity() {
        return Err(Error::config(format!(
            "k-set arity {} does not match oracle arity {}",
            s.arity(),
            oracle.arity()
        )));
    }
    if let Some(x) = s.max_element() {
        if x.index() >= oracle.ground_size() {
            return Err(Error::config(format!(
                "element {x} is outside the ground set of size {}",
                oracle.ground_size()
            )));
        }
    }
    Ok(())
}

fn check_element<O: UtilityOracle + ?Sized>(oracle: &O, x: ElementId) -> Result<()> {
    if x.index() >= oracle.ground_size() {
        return Err(Error::config(format!(
            "element {x} is outside the ground set of size {}",
            oracle.ground_size()
        )));
    }
    Ok(())
}

/// Checked `g(s)`.
pub fn eval<O: UtilityOracle + ?Sized>(oracle: &O, s: &KSet) -> Result<f64> {
    check_compatible(oracle, s)?;
    Ok(oracle.value(s))
}

/// `Δ_{x,i} g(s) = g(s ⊔ (x,i)) − g(s)`; may be negative for non-monotone `g`.
pub fn marginal_gain<O: UtilityOracle + ?Sized>(
    oracle: &O,
    s: &KSet,
    x: ElementId,
    i: Position,
) -> Result<f64> {
    check_compatible(oracle, s)?;
    check_element(oracle, x)?;
    let extended = s.insert(x, i)?;
    Ok(oracle.value(&extended) - oracle.value(s))
}

/// `argmax_i g((x,i))` and its value. Exactly `k` queries; ties go to the
/// smallest position.
pub fn best_singleton<O: UtilityOracle + ?Sized>(oracle: &O, x: ElementId) -> (Position, f64) {
    let k = oracle.arity();
    let mut best = (Position::FIRST, f64::NEG_INFINITY);
    for i in Position::all(k) {
        let mut s = KSet::empty(k);
        s.assign(x, i).expect("fresh k-set");
        let v = oracle.value(&s);
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

/// Result of [`best_marginal`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Marginal {
    pub position: Position,
    /// `Δ_{x,position} g(s)`.
    pub gain: f64,
    /// `g(s ⊔ (x,position))`, as returned by the oracle.
    pub value: f64,
}

/// `argmax_i Δ_{x,i} g(s)` given the already-known `g(s)`.
///
/// Makes exactly `k` queries. Ties go to the smallest position.
pub fn best_marginal<O: UtilityOracle + ?Sized>(
    oracle: &O,
    s: &KSet,
    s_value: f64,
    x: ElementId,
) -> Result<Marginal> {
    if s.contains(x) {
        return Err(Error::precondition(format!(
            "element {x} is already in the k-set"
        )));
    }
    let mut best: Option<Marginal> = None;
    let mut extended = s.clone();
    for i in Position::all(oracle.arity()) {
        extended.assign(x, i)?;
        let value = oracle.value(&extended);
        let gain = value - s_value;
        if best.map_or(true, |b| gain > b.gain) {
            best = Some(Marginal {
                position: i,
                gain,
                value,
            });
        }
        extended = s.clone();
    }
    best.ok_or_else(|| Error::config("oracle arity is zero"))
}

/// Forwards every query to `inner` and counts it.
#[derive(Debug)]
pub struct CountingOracle<O> {
    inner: O,
    queries: AtomicU64,
}

impl<O: UtilityOracle> CountingOracle<O> {
    pub fn new(inner: O) -> Self {
        CountingOracle {
            inner,
            queries: AtomicU64::new(0),
        }
    }

    pub fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.queries.store(0, Ordering::Relaxed);
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: UtilityOracle> UtilityOracle for CountingOracle<O> {
    fn arity(&self) -> usize {
        self.inner.arity()
    }

    fn ground_size(&self) -> usize {
        self.inner.ground_size()
    }

    fn value(&self, s: &KSet) -> f64 {
        self.queries.fetch_add(1, Ordering::Relaxed);
        self.inner.value(s)
    }
}

/// Wraps a closure as an oracle. Mostly useful for tests and ad-hoc functions.
pub struct FnOracle<F> {
    arity: usize,
    ground_size: usize,
    f: F,
}

impl<F> FnOracle<F>
where
    F: Fn(&KSet) -> f64 + Sync,
{
    pub fn new(arity: usize, ground_size: usize, f: F) -> Self {
        FnOracle {
            arity,
            ground_size,
            f,
        }
    }
}

impl<F> UtilityOracle for FnOracle<F>
where
    F: Fn(&KSet) -> f64 + Sync,
{
    fn arity(&self) -> usize {
        self.arity
    }

    fn ground_size(&self) -> usize {
        self.ground_size
    }

    fn value(&self, s: &KSet) -> f64 {
        (self.f)(s)
    }
}

/// Fixed-capacity bitset over universe items, shared by the coverage families.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct ItemSet {
    words: Vec<u64>,
}

impl ItemSet {
    pub(crate) fn with_capacity(universe: usize) -> Self {
        ItemSet {
            words: vec![0; universe.div_ceil(64)],
        }
    }

    pub(crate) fn from_items(universe: usize, items: &[usize]) -> Result<Self> {
        let mut set = ItemSet::with_capacity(universe);
        for &u in items {
            if u >= universe {
                return Err(Error::validation(format!(
                    "universe item {u} is out of range (universe size {universe})"
                )));
            }
            set.words[u / 64] |= 1 << (u % 64);
        }
        Ok(set)
    }

    pub(crate) fn union_with(&mut self, other: &ItemSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub(crate) fn items(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &bits)| {
            (0..64)
                .filter(move |b| bits & (1 << b) != 0)
                .map(move |b| w * 64 + b)
        })
    }

    pub(crate) fn weight(&self, universe_weights: &[f64]) -> f64 {
        self.items().map(|u| universe_weights[u]).sum()
    }
}
