//! k-sets: partial assignments of ground-set elements to one of `k` positions.
//!
//! A k-set `s = (S_1, ..., S_k)` is stored as a map from element to position.
//! Position 0 ("not in any part") is never stored; it is implied by absence,
//! so the parts are disjoint by construction and memory is proportional to
//! the support size.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense index of a ground-set element, `0..n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementId(pub u32);

impl ElementId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for ElementId {
    fn from(i: usize) -> Self {
        ElementId(i as u32)
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An assigned position in `1..=k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Position(u8);

impl Position {
    pub const FIRST: Position = Position(1);

    /// Returns `None` for 0 (the unassigned sentinel) or anything above `u8::MAX`.
    pub fn new(index: usize) -> Option<Position> {
        match u8::try_from(index) {
            Ok(0) | Err(_) => None,
            Ok(i) => Some(Position(i)),
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Positions `1..=k` in ascending order.
    pub fn all(k: usize) -> impl Iterator<Item = Position> {
        (1..=k).filter_map(Position::new)
    }
}

impl TryFrom<u8> for Position {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, Self::Error> {
        Position::new(v as usize).ok_or_else(|| "position 0 is reserved for unassigned".to_string())
    }
}

impl From<Position> for u8 {
    fn from(p: Position) -> u8 {
        p.0
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KSet {
    arity: usize,
    pairs: BTreeMap<ElementId, Position>,
}

impl KSet {
    /// The empty k-set **0**.
    pub fn empty(arity: usize) -> KSet {
        KSet {
            arity,
            pairs: BTreeMap::new(),
        }
    }

    pub fn from_pairs<I>(arity: usize, pairs: I) -> Result<KSet>
    where
        I: IntoIterator<Item = (ElementId, Position)>,
    {
        let mut s = KSet::empty(arity);
        for (x, i) in pairs {
            s.assign(x, i)?;
        }
        Ok(s)
    }

    /// Builds a k-set from a position vector (`0` = unassigned), element `x` at index `x`.
    pub fn from_assignment(arity: usize, assignment: &[u8]) -> Result<KSet> {
        let mut s = KSet::empty(arity);
        for (x, &p) in assignment.iter().enumerate() {
            if p == 0 {
                continue;
            }
            if p as usize > arity {
                return Err(Error::config(format!(
                    "position {p} of element {x} exceeds arity {arity}"
                )));
            }
            s.pairs.insert(ElementId::from(x), Position(p));
        }
        Ok(s)
    }

    /// Position vector of length `n`; panics if an element is `>= n`.
    pub fn to_assignment(&self, n: usize) -> Vec<u8> {
        let mut v = vec![0u8; n];
        for (&x, &i) in &self.pairs {
            v[x.index()] = i.0;
        }
        v
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Number of assigned pairs, `|E(s)|`.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn position_of(&self, x: ElementId) -> Option<Position> {
        self.pairs.get(&x).copied()
    }

    pub fn contains(&self, x: ElementId) -> bool {
        self.pairs.contains_key(&x)
    }

    /// Assigned pairs in ascending element order.
    pub fn pairs(&self) -> impl Iterator<Item = (ElementId, Position)> + '_ {
        self.pairs.iter().map(|(&x, &i)| (x, i))
    }

    /// Largest assigned element, if any.
    pub fn max_element(&self) -> Option<ElementId> {
        self.pairs.keys().next_back().copied()
    }

    /// `s ⊔ (x, i)` as a new value.
    pub fn insert(&self, x: ElementId, i: Position) -> Result<KSet> {
        let mut s = self.clone();
        s.assign(x, i)?;
        Ok(s)
    }

    /// In-place `s ⊔ (x, i)`.
    pub fn assign(&mut self, x: ElementId, i: Position) -> Result<()> {
        if i.index() > self.arity {
            return Err(Error::config(format!(
                "position {i} exceeds arity {}",
                self.arity
            )));
        }
        if let Some(prev) = self.pairs.get(&x) {
            return Err(Error::precondition(format!(
                "element {x} is already assigned to position {prev}"
            )));
        }
        self.pairs.insert(x, i);
        Ok(())
    }

    /// Coordinate-wise intersection.
    pub fn meet(&self, other: &KSet) -> Result<KSet> {
        self.same_arity(other)?;
        let pairs = self
            .pairs
            .iter()
            .filter(|&(x, i)| other.pairs.get(x) == Some(i))
            .map(|(&x, &i)| (x, i))
            .collect();
        Ok(KSet {
            arity: self.arity,
            pairs,
        })
    }

    /// Coordinate-wise union with elements claimed by two different positions dropped.
    pub fn join(&self, other: &KSet) -> Result<KSet> {
        self.same_arity(other)?;
        let mut pairs = BTreeMap::new();
        for (&x, &i) in &self.pairs {
            match other.pairs.get(&x) {
                Some(&j) if j != i => {}
                _ => {
                    pairs.insert(x, i);
                }
            }
        }
        for (&x, &j) in &other.pairs {
            if !self.pairs.contains_key(&x) {
                pairs.insert(x, j);
            }
        }
        Ok(KSet {
            arity: self.arity,
            pairs,
        })
    }

    /// The partial order `s ⊑ t`: every pair of `s` appears in `t`.
    pub fn precedes(&self, other: &KSet) -> Result<bool> {
        self.same_arity(other)?;
        Ok(self.pairs.len() <= other.pairs.len()
            && self
                .pairs
                .iter()
                .all(|(x, i)| other.pairs.get(x) == Some(i)))
    }

    /// `E(s)`.
    pub fn support(&self) -> BTreeSet<ElementId> {
        self.pairs.keys().copied().collect()
    }

    fn same_arity(&self, other: &KSet) -> Result<()> {
        if self.arity != other.arity {
            return Err(Error::config(format!(
                "arity mismatch: {} vs {}",
                self.arity, other.arity
            )));
        }
        Ok(())
    }
}

impl fmt::Display for KSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (n, (x, i)) in self.pairs().enumerate() {
            if n > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({x},{i})")?;
        }
        f.write_str("}")
    }
}

/// Strictly positive per-element costs, indexed by `ElementId`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightTable {
    weights: Vec<f64>,
}

impl WeightTable {
    pub fn new(weights: Vec<f64>) -> Result<WeightTable> {
        for (x, &w) in weights.iter().enumerate() {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::validation(format!(
                    "element {x} has weight {w}; weights must be finite and strictly positive"
                )));
            }
        }
        Ok(WeightTable { weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn get(&self, x: ElementId) -> Option<f64> {
        self.weights.get(x.index()).copied()
    }

    pub fn weight(&self, x: ElementId) -> Result<f64> {
        self.get(x)
            .ok_or_else(|| Error::instance(format!("no weight entry for element {x}")))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    /// `w(s)`, summed in ascending element order.
    pub fn kset_weight(&self, s: &KSet) -> Result<f64> {
        s.pairs().map(|(x, _)| self.weight(x)).sum()
    }
}

/// The `(k+1)^n` k-sets over a ground set of size `n`, in lexicographic order of
/// their position vectors (element 0 most significant, positions varying fastest).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KSetSpace {
    n: usize,
    k: usize,
    count: usize,
}

impl KSetSpace {
    pub fn new(n: usize, k: usize, budget: u128) -> Result<KSetSpace> {
        if k == 0 {
            return Err(Error::config("arity k must be at least 1"));
        }
        let required = (k as u128 + 1).checked_pow(n as u32).unwrap_or(u128::MAX);
        if required > budget {
            return Err(Error::BudgetExceeded { required, budget });
        }
        Ok(KSetSpace {
            n,
            k,
            count: required as usize,
        })
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub fn arity(&self) -> usize {
        self.k
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Writes the position vector of `index` into `out` (length `n`).
    pub fn decode_into(&self, mut index: usize, out: &mut [u8]) {
        let base = self.k + 1;
        for slot in out.iter_mut().rev() {
            *slot = (index % base) as u8;
            index /= base;
        }
    }

    pub fn decode(&self, index: usize) -> Vec<u8> {
        let mut v = vec![0; self.n];
        self.decode_into(index, &mut v);
        v
    }

    pub fn encode(&self, assignment: &[u8]) -> usize {
        let base = self.k + 1;
        assignment
            .iter()
            .fold(0usize, |acc, &p| acc * base + p as usize)
    }

    pub fn kset(&self, index: usize) -> KSet {
        KSet::from_assignment(self.k, &self.decode(index)).expect("decoded positions are in range")
    }

    pub fn index_of(&self, s: &KSet) -> usize {
        self.encode(&s.to_assignment(self.n))
    }

    pub fn iter(&self) -> impl Iterator<Item = KSet> + '_ {
        (0..self.count).map(move |i| self.kset(i))
    }
}
