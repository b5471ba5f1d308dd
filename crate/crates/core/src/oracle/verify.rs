//! Exhaustive checks of the structural properties of a utility function at
//! desk scale: k-submodularity, orthant submodularity, pairwise monotonicity,
//! monotonicity, and the first-order upper bound over comparable pairs.
//!
//! Every verifier tabulates `g` once over all `(k+1)^n` k-sets and then works
//! on position vectors, so the oracle is queried exactly `(k+1)^n` times.

use std::fmt;

use serde::Serialize;

use super::tabular::TABLE_BUDGET;
use super::{check_compatible, UtilityOracle};
use crate::error::{Error, Result};
use crate::kset::{ElementId, KSet, KSetSpace, Position};

/// An inequality counts as violated only when its slack is below `-TOLERANCE`.
pub const TOLERANCE: f64 = 1e-9;

/// Upper limit on the number of elementary checks a single verifier may run.
pub const CHECK_BUDGET: u128 = 100_000_000;

/// Violations beyond this many are counted but not recorded.
pub const MAX_RECORDED: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    KSubmodular,
    OrthantSubmodular,
    PairwiseMonotone,
    Monotone,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Property::KSubmodular => "k-submodular",
            Property::OrthantSubmodular => "orthant submodular",
            Property::PairwiseMonotone => "pairwise monotone",
            Property::Monotone => "monotone",
        })
    }
}

/// A single failed inequality.
///
/// `s` and `t` are the k-sets involved (for pairwise monotonicity `t` is
/// unused and equal to `s`); `element`/`positions` identify the marginal
/// gains where relevant. `slack` is negative.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub s: KSet,
    pub t: KSet,
    pub element: Option<ElementId>,
    pub positions: Vec<Position>,
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifierReport {
    pub property: Property,
    pub ground_size: usize,
    pub arity: usize,
    /// Number of inequalities evaluated.
    pub checked: u64,
    pub violation_count: u64,
    /// The first [`MAX_RECORDED`] violations in enumeration order.
    pub violations: Vec<Violation>,
}

impl VerifierReport {
    pub fn holds(&self) -> bool {
        self.violation_count == 0
    }

    pub fn worst_slack(&self) -> Option<f64> {
        self.violations.iter().map(|v| v.slack).reduce(f64::min)
    }
}

/// `g` materialized over the whole k-set space, with position vectors cached.
struct Table {
    space: KSetSpace,
    n: usize,
    k: usize,
    values: Vec<f64>,
    digits: Vec<u8>,
    strides: Vec<usize>,
}

impl Table {
    fn build<O: UtilityOracle + ?Sized>(oracle: &O, n: usize, k: usize) -> Result<Table> {
        if oracle.arity() != k || oracle.ground_size() != n {
            return Err(Error::config(format!(
                "oracle is declared over (n={}, k={}) but verification asked for (n={n}, k={k})",
                oracle.ground_size(),
                oracle.arity()
            )));
        }
        let space = KSetSpace::new(n, k, TABLE_BUDGET)?;
        let mut digits = vec![0u8; space.count() * n];
        let mut values = Vec::with_capacity(space.count());
        for idx in 0..space.count() {
            let row = &mut digits[idx * n..(idx + 1) * n];
            space.decode_into(idx, row);
            let s = KSet::from_assignment(k, row)?;
            check_compatible(oracle, &s)?;
            values.push(oracle.value(&s));
        }
        let mut strides = vec![1usize; n];
        for x in (0..n.saturating_sub(1)).rev() {
            strides[x] = strides[x + 1] * (k + 1);
        }
        Ok(Table {
            space,
            n,
            k,
            values,
            digits,
            strides,
        })
    }

    fn row(&self, idx: usize) -> &[u8] {
        &self.digits[idx * self.n..(idx + 1) * self.n]
    }

    fn kset(&self, idx: usize) -> KSet {
        KSet::from_assignment(self.k, self.row(idx)).expect("cached rows are valid")
    }

    /// Indices of every `s ⊑ t`, including `t` itself.
    fn below(&self, t: usize, out: &mut Vec<usize>) {
        out.clear();
        out.push(0);
        for x in 0..self.n {
            let p = self.row(t)[x] as usize;
            if p == 0 {
                continue;
            }
            let step = p * self.strides[x];
            for j in 0..out.len() {
                out.push(out[j] + step);
            }
        }
    }
}

fn guard(required: u128) -> Result<()> {
    if required > CHECK_BUDGET {
        return Err(Error::BudgetExceeded {
            required,
            budget: CHECK_BUDGET,
        });
    }
    Ok(())
}

fn pow(base: usize, exp: usize) -> u128 {
    (base as u128).checked_pow(exp as u32).unwrap_or(u128::MAX)
}

struct Collector {
    report: VerifierReport,
    stop_at_first: bool,
}

impl Collector {
    fn new(property: Property, n: usize, k: usize, stop_at_first: bool) -> Self {
        Collector {
            report: VerifierReport {
                property,
                ground_size: n,
                arity: k,
                checked: 0,
                violation_count: 0,
                violations: Vec::new(),
            },
            stop_at_first,
        }
    }

    /// Returns `true` when enumeration should stop.
    fn check(&mut self, slack: f64, witness: impl FnOnce() -> Violation) -> bool {
        self.report.checked += 1;
        if slack >= -TOLERANCE {
            return false;
        }
        self.report.violation_count += 1;
        if self.report.violations.len() < MAX_RECORDED {
            self.report.violations.push(witness());
        }
        self.stop_at_first
    }
}

fn ksubmodular(table: &Table, stop_at_first: bool) -> VerifierReport {
    let (n, k) = (table.n, table.k);
    let mut out = Collector::new(Property::KSubmodular, n, k, stop_at_first);
    let count = table.space.count();
    'outer: for s in 0..count {
        let ds = table.row(s);
        for t in s + 1..count {
            let dt = table.row(t);
            let (mut meet, mut join) = (0usize, 0usize);
            for x in 0..n {
                let (a, b) = (ds[x] as usize, dt[x] as usize);
                if a == b {
                    meet += a * table.strides[x];
                    join += a * table.strides[x];
                } else if a == 0 || b == 0 {
                    join += (a + b) * table.strides[x];
                }
            }
            let slack = table.values[s] + table.values[t] - table.values[meet] - table.values[join];
            let stop = out.check(slack, || Violation {
                s: table.kset(s),
                t: table.kset(t),
                element: None,
                positions: Vec::new(),
                slack,
            });
            if stop {
                break 'outer;
            }
        }
    }
    out.report
}

fn orthant(table: &Table, stop_at_first: bool) -> VerifierReport {
    let (n, k) = (table.n, table.k);
    let mut out = Collector::new(Property::OrthantSubmodular, n, k, stop_at_first);
    let mut lower = Vec::new();
    'outer: for t in 0..table.space.count() {
        table.below(t, &mut lower);
        for &s in &lower {
            if s == t {
                continue;
            }
            for x in 0..n {
                if table.row(t)[x] != 0 {
                    continue;
                }
                for i in 1..=k {
                    let step = i * table.strides[x];
                    let gain_s = table.values[s + step] - table.values[s];
                    let gain_t = table.values[t + step] - table.values[t];
                    let slack = gain_s - gain_t;
                    let stop = out.check(slack, || Violation {
                        s: table.kset(s),
                        t: table.kset(t),
                        element: Some(ElementId::from(x)),
                        positions: Position::new(i).into_iter().collect(),
                        slack,
                    });
                    if stop {
                        break 'outer;
                    }
                }
            }
        }
    }
    out.report
}

fn pairwise(table: &Table, stop_at_first: bool) -> VerifierReport {
    let (n, k) = (table.n, table.k);
    let mut out = Collector::new(Property::PairwiseMonotone, n, k, stop_at_first);
    'outer: for s in 0..table.space.count() {
        for x in 0..n {
            if table.row(s)[x] != 0 {
                continue;
            }
            let base = table.values[s];
            for i in 1..=k {
                let gain_i = table.values[s + i * table.strides[x]] - base;
                for j in i + 1..=k {
                    let gain_j = table.values[s + j * table.strides[x]] - base;
                    let slack = gain_i + gain_j;
                    let stop = out.check(slack, || Violation {
                        s: table.kset(s),
                        t: table.kset(s),
                        element: Some(ElementId::from(x)),
                        positions: [i, j].into_iter().filter_map(Position::new).collect(),
                        slack,
                    });
                    if stop {
                        break 'outer;
                    }
                }
            }
        }
    }
    out.report
}

fn monotone(table: &Table, stop_at_first: bool) -> VerifierReport {
    let (n, k) = (table.n, table.k);
    let mut out = Collector::new(Property::Monotone, n, k, stop_at_first);
    let mut lower = Vec::new();
    'outer: for t in 0..table.space.count() {
        table.below(t, &mut lower);
        for &s in &lower {
            if s == t {
                continue;
            }
            let slack = table.values[t] - table.values[s];
            let stop = out.check(slack, || Violation {
                s: table.kset(s),
                t: table.kset(t),
                element: None,
                positions: Vec::new(),
                slack,
            });
            if stop {
                break 'outer;
            }
        }
    }
    out.report
}

/// `g(s) + g(t) ≥ g(s ⊓ t) + g(s ⊔ t)` over all unordered pairs.
pub fn verify_ksubmodular<O: UtilityOracle + ?Sized>(
    oracle: &O,
    n: usize,
    k: usize,
) -> Result<VerifierReport> {
    guard(pow(k + 1, 2 * n))?;
    Ok(ksubmodular(&Table::build(oracle, n, k)?, false))
}

/// `Δ_{x,i} g(s) ≥ Δ_{x,i} g(t)` for all `s ⊑ t`, `x ∉ E(t)`, `i ∈ [k]`.
pub fn verify_orthant_submodular<O: UtilityOracle + ?Sized>(
    oracle: &O,
    n: usize,
    k: usize,
) -> Result<VerifierReport> {
    guard(pow(2 * k + 1, n).saturating_mul((n * k) as u128))?;
    Ok(orthant(&Table::build(oracle, n, k)?, false))
}

/// `Δ_{x,i} g(s) + Δ_{x,j} g(s) ≥ 0` for all `x ∉ E(s)` and `i ≠ j`.
pub fn verify_pairwise_monotone<O: UtilityOracle + ?Sized>(
    oracle: &O,
    n: usize,
    k: usize,
) -> Result<VerifierReport> {
    guard(pow(k + 1, n).saturating_mul((n * k * k) as u128))?;
    Ok(pairwise(&Table::build(oracle, n, k)?, false))
}

/// `g(s) ≤ g(t)` for all `s ⊑ t`.
pub fn verify_monotone<O: UtilityOracle + ?Sized>(
    oracle: &O,
    n: usize,
    k: usize,
) -> Result<VerifierReport> {
    guard(pow(2 * k + 1, n))?;
    Ok(monotone(&Table::build(oracle, n, k)?, false))
}

/// Outcome of running every verifier on one oracle.
#[derive(Clone, Debug)]
pub struct StructureReport {
    pub ksubmodular: VerifierReport,
    pub orthant_submodular: VerifierReport,
    pub pairwise_monotone: VerifierReport,
    pub monotone: VerifierReport,
}

impl StructureReport {
    /// k-submodular, orthant submodular, and pairwise monotone.
    pub fn is_ksubmodular(&self) -> bool {
        self.ksubmodular.holds()
            && self.orthant_submodular.holds()
            && self.pairwise_monotone.holds()
    }

    pub fn reports(&self) -> [&VerifierReport; 4] {
        [
            &self.ksubmodular,
            &self.orthant_submodular,
            &self.pairwise_monotone,
            &self.monotone,
        ]
    }
}

/// All four verifiers over a single tabulation of `g`.
pub fn verify_structure<O: UtilityOracle + ?Sized>(
    oracle: &O,
    n: usize,
    k: usize,
) -> Result<StructureReport> {
    guard(pow(k + 1, 2 * n))?;
    let table = Table::build(oracle, n, k)?;
    Ok(StructureReport {
        ksubmodular: ksubmodular(&table, false),
        orthant_submodular: orthant(&table, false),
        pairwise_monotone: pairwise(&table, false),
        monotone: monotone(&table, false),
    })
}

/// Fast accept/reject for rejection sampling: is `g` k-submodular (all three
/// structural properties) and does it fail monotonicity? Stops at the first
/// decisive violation.
pub(crate) fn is_nonmonotone_ksubmodular<O: UtilityOracle + ?Sized>(
    oracle: &O,
    n: usize,
    k: usize,
) -> Result<bool> {
    guard(pow(k + 1, 2 * n))?;
    let table = Table::build(oracle, n, k)?;
    Ok(!monotone(&table, true).holds()
        && pairwise(&table, true).holds()
        && orthant(&table, true).holds()
        && ksubmodular(&table, true).holds())
}

/// `g(t) ≤ g(s) + Σ_{x ∈ E(t)\E(s)} Δ_{x,t(x)} g(s)` for `s ⊑ t`, within [`TOLERANCE`].
pub fn check_lemma1<O: UtilityOracle + ?Sized>(oracle: &O, s: &KSet, t: &KSet) -> Result<bool> {
    check_compatible(oracle, s)?;
    check_compatible(oracle, t)?;
    if !s.precedes(t)? {
        return Err(Error::precondition(format!("{s} does not precede {t}")));
    }
    let base = oracle.value(s);
    let mut bound = base;
    for (x, i) in t.pairs() {
        if s.contains(x) {
            continue;
        }
        bound += oracle.value(&s.insert(x, i)?) - base;
    }
    Ok(oracle.value(t) <= bound + TOLERANCE)
}

/// Runs [`check_lemma1`] over every comparable pair; returns the number of pairs
/// checked and the failing ones.
pub fn check_lemma1_exhaustive<O: UtilityOracle + ?Sized>(
    oracle: &O,
    n: usize,
    k: usize,
) -> Result<(u64, Vec<(KSet, KSet)>)> {
    guard(pow(2 * k + 1, n).saturating_mul(n as u128 + 1))?;
    let space = KSetSpace::new(n, k, TABLE_BUDGET)?;
    let table = Table::build(oracle, n, k)?;
    let mut lower = Vec::new();
    let mut checked = 0;
    let mut failures = Vec::new();
    for t in 0..space.count() {
        table.below(t, &mut lower);
        let tk = space.kset(t);
        for &s in &lower {
            checked += 1;
            let sk = space.kset(s);
            if !check_lemma1(oracle, &sk, &tk)? {
                failures.push((sk, tk.clone()));
            }
        }
    }
    Ok((checked, failures))
}
