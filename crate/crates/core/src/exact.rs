//! Exact baseline by enumeration of all `(k+1)^n` k-sets, plus the bicriteria
//! bound checker used to certify solver output against it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kset::{KSet, KSetSpace, WeightTable};
use crate::oracle::UtilityOracle;

/// Largest number of k-sets an exact computation may enumerate.
pub const ENUMERATION_BUDGET: u128 = 1_000_000;

/// Slack allowed in bound verdicts.
pub const BOUND_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct ExactSolution {
    pub solution: KSet,
    pub weight: f64,
    pub utility: f64,
    pub feasible: bool,
}

fn space_for<O: UtilityOracle + ?Sized>(oracle: &O, weights: &WeightTable) -> Result<KSetSpace> {
    if weights.len() != oracle.ground_size() {
        return Err(Error::instance(format!(
            "{} weights for a ground set of size {}",
            weights.len(),
            oracle.ground_size()
        )));
    }
    KSetSpace::new(oracle.ground_size(), oracle.arity(), ENUMERATION_BUDGET)
}

/// Minimum-weight k-set with `g ≥ τ`. Ties go to the lexicographically
/// smallest position vector. When nothing reaches `τ` the result is the empty
/// k-set with `feasible = false`.
pub fn exact_cover<O: UtilityOracle + ?Sized>(
    oracle: &O,
    weights: &WeightTable,
    tau: f64,
) -> Result<ExactSolution> {
    let space = space_for(oracle, weights)?;
    let mut best: Option<ExactSolution> = None;
    for s in space.iter() {
        let utility = oracle.value(&s);
        if utility < tau {
            continue;
        }
        let weight = weights.kset_weight(&s)?;
        if best.as_ref().map_or(true, |b| weight < b.weight) {
            best = Some(ExactSolution {
                solution: s,
                weight,
                utility,
                feasible: true,
            });
        }
    }
    Ok(best.unwrap_or_else(|| ExactSolution {
        solution: KSet::empty(oracle.arity()),
        weight: 0.0,
        utility: 0.0,
        feasible: false,
    }))
}

/// `max_s g(s)` over every k-set.
pub fn max_utility<O: UtilityOracle + ?Sized>(oracle: &O) -> Result<f64> {
    let space = KSetSpace::new(oracle.ground_size(), oracle.arity(), ENUMERATION_BUDGET)?;
    Ok(space.iter().map(|s| oracle.value(&s)).fold(0.0, f64::max))
}

/// `(α, β)`: output weight at most `α` times the reference cost and utility
/// at least `β·τ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundFactors {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Algorithm {
    #[serde(rename = "1")]
    KnownGuess,
    #[serde(rename = "2")]
    TwoPass,
    #[serde(rename = "3")]
    SinglePass,
}

impl Algorithm {
    pub fn number(self) -> u8 {
        match self {
            Algorithm::KnownGuess => 1,
            Algorithm::TwoPass => 2,
            Algorithm::SinglePass => 3,
        }
    }

    pub fn from_number(n: u8) -> Option<Algorithm> {
        match n {
            1 => Some(Algorithm::KnownGuess),
            2 => Some(Algorithm::TwoPass),
            3 => Some(Algorithm::SinglePass),
            _ => None,
        }
    }
}

/// Guarantee factors. For the known-guess algorithm `α` multiplies the guess;
/// for the ladder algorithms it multiplies the optimal cost `w(v)`.
pub fn theorem_factors(epsilon: f64, monotone: bool, algorithm: Algorithm) -> Result<BoundFactors> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::config(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let (base, r) = if monotone {
        ((3.0 - epsilon) / (2.0 * epsilon), 2.0)
    } else {
        ((4.0 - epsilon) / (3.0 * epsilon), 3.0)
    };
    let alpha = match algorithm {
        Algorithm::KnownGuess => base,
        Algorithm::TwoPass | Algorithm::SinglePass => base / (1.0 - epsilon),
    };
    Ok(BoundFactors {
        alpha,
        beta: (1.0 - epsilon) / r,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundVerdict {
    pub weight: f64,
    pub weight_bound: f64,
    /// `weight_bound - weight`.
    pub weight_slack: f64,
    pub utility: f64,
    pub utility_bound: f64,
    /// `utility - utility_bound`.
    pub utility_slack: f64,
    pub pass: bool,
}

/// Checks `w(x) ≤ α·reference` and `g(x) ≥ β·τ` within [`BOUND_TOLERANCE`].
///
/// `reference` is the guess for the known-guess algorithm and `exact.weight`
/// otherwise; pass `None` to use `exact.weight`.
pub fn check_bicriteria<O: UtilityOracle + ?Sized>(
    result: &KSet,
    exact: &ExactSolution,
    factors: BoundFactors,
    reference: Option<f64>,
    tau: f64,
    oracle: &O,
    weights: &WeightTable,
) -> Result<BoundVerdict> {
    if !exact.feasible {
        return Err(Error::precondition(
            "bicriteria check needs a feasible exact solution",
        ));
    }
    crate::oracle::check_compatible(oracle, result)?;
    let weight = weights.kset_weight(result)?;
    let utility = oracle.value(result);
    let weight_bound = factors.alpha * reference.unwrap_or(exact.weight);
    let utility_bound = factors.beta * tau;
    let weight_slack = weight_bound - weight;
    let utility_slack = utility - utility_bound;
    Ok(BoundVerdict {
        weight,
        weight_bound,
        weight_slack,
        utility,
        utility_bound,
        utility_slack,
        pass: weight_slack >= -BOUND_TOLERANCE && utility_slack >= -BOUND_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kset::{ElementId, Position};
    use crate::oracle::{CoverageOracle, FnOracle};

    fn i0() -> (CoverageOracle, WeightTable) {
        let g = CoverageOracle::new(
            2,
            vec![1.0; 3],
            vec![vec![vec![0, 1], vec![0]], vec![vec![2], vec![1, 2]]],
        )
        .unwrap();
        (g, WeightTable::new(vec![1.0, 2.0]).unwrap())
    }

    fn p(i: usize) -> Position {
        Position::new(i).unwrap()
    }

    #[test]
    fn exact_cover_examples() {
        let (g, w) = i0();
        let v = exact_cover(&g, &w, 3.0).unwrap();
        assert!(v.feasible);
        assert_eq!(v.weight, 3.0);
        assert_eq!(v.utility, 3.0);
        // (a,1),(b,1) is lexicographically first among the weight-3 covers
        assert_eq!(
            v.solution,
            KSet::from_pairs(2, [(ElementId(0), p(1)), (ElementId(1), p(1))]).unwrap()
        );

        let zero = exact_cover(&g, &w, 0.0).unwrap();
        assert!(zero.feasible);
        assert!(zero.solution.is_empty());
        assert_eq!(zero.weight, 0.0);

        let none = exact_cover(&g, &w, 3.5).unwrap();
        assert!(!none.feasible);
    }

    #[test]
    fn max_utility_examples() {
        let (g, _) = i0();
        assert_eq!(max_utility(&g).unwrap(), 3.0);
        let zero = FnOracle::new(2, 3, |_: &KSet| 0.0);
        assert_eq!(max_utility(&zero).unwrap(), 0.0);
        let single = FnOracle::new(2, 1, |s: &KSet| match s.position_of(ElementId(0)) {
            Some(i) if i.index() == 2 => 1.5,
            Some(_) => 0.5,
            None => 0.0,
        });
        assert_eq!(max_utility(&single).unwrap(), 1.5);
    }

    #[test]
    fn budget_guard() {
        let g = FnOracle::new(3, 12, |_: &KSet| 0.0);
        let w = WeightTable::new(vec![1.0; 12]).unwrap();
        assert!(matches!(
            exact_cover(&g, &w, 1.0).unwrap_err(),
            Error::BudgetExceeded { .. }
        ));
        assert!(max_utility(&g).is_err());
    }

    #[test]
    fn factor_examples() {
        let f = theorem_factors(0.5, true, Algorithm::TwoPass).unwrap();
        assert_eq!((f.alpha, f.beta), (5.0, 0.25));
        let f = theorem_factors(0.5, false, Algorithm::KnownGuess).unwrap();
        assert!((f.alpha - 3.5 / 1.5).abs() < 1e-12);
        assert!((f.beta - 1.0 / 6.0).abs() < 1e-12);
        let f = theorem_factors(1e-9, true, Algorithm::SinglePass).unwrap();
        assert!((f.beta - 0.5).abs() < 1e-8);
        assert!(theorem_factors(1.0, true, Algorithm::TwoPass).is_err());
    }

    #[test]
    fn bicriteria_examples() {
        let (g, w) = i0();
        let v = exact_cover(&g, &w, 3.0).unwrap();
        let f = theorem_factors(0.5, true, Algorithm::KnownGuess).unwrap();
        let out = KSet::from_pairs(2, [(ElementId(0), p(1)), (ElementId(1), p(1))]).unwrap();
        let verdict = check_bicriteria(&out, &v, f, Some(3.0), 3.0, &g, &w).unwrap();
        assert!(verdict.pass);
        assert_eq!((verdict.weight_bound, verdict.utility_bound), (7.5, 0.75));

        let weak = KSet::empty(2);
        let verdict = check_bicriteria(&weak, &v, f, Some(3.0), 3.0, &g, &w).unwrap();
        assert!(!verdict.pass);
        assert!(verdict.utility_slack < 0.0);

        let f2 = theorem_factors(0.5, true, Algorithm::TwoPass).unwrap();
        assert!(
            check_bicriteria(&v.solution, &v, f2, None, 3.0, &g, &w)
                .unwrap()
                .pass
        );

        let infeasible = exact_cover(&g, &w, 10.0).unwrap();
        assert!(matches!(
            check_bicriteria(&out, &infeasible, f, None, 10.0, &g, &w).unwrap_err(),
            Error::Precondition(_)
        ));
    }
}
