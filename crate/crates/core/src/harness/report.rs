//! Machine-readable run reports.

use serde::Serialize;

use super::instance::Instance;
use crate::error::{Error, Result};
use crate::exact::BoundVerdict;
use crate::kset::{KSet, Position};
use crate::solver::{GuessRecord, Selection, StreamStats};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Success,
    /// No candidate reached the utility bar, or `τ` exceeds the largest
    /// achievable utility.
    Infeasible,
    /// A caller-supplied precondition (guess, `B`, monotonicity flag) was
    /// found false after the fact; bounds were not asserted.
    ContractViolation,
    /// The exact baseline ran and the output broke a guarantee.
    BoundViolation,
}

impl RunStatus {
    /// Process exit code for a run with this status.
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Success => 0,
            RunStatus::Infeasible => 2,
            RunStatus::ContractViolation => 3,
            RunStatus::BoundViolation => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub tau: f64,
    pub epsilon: f64,
    pub r: u32,
    pub monotone: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guess: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub permute_seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolutionPair {
    pub element: String,
    pub position: Position,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactEcho {
    pub feasible: bool,
    pub weight: f64,
    pub utility: f64,
    pub max_utility: f64,
    pub solution: Vec<SolutionPair>,
}

/// One solver run. Everything except `wall_clock_ms` is a deterministic
/// function of the instance, the configuration, and the permutation seed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub algorithm: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selection: Option<Selection>,
    pub config: ConfigEcho,
    pub status: RunStatus,
    pub infeasible: bool,
    pub solution: Vec<SolutionPair>,
    pub weight: f64,
    pub utility: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selected_rung: Option<u32>,
    pub stats: StreamStats,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub guesses: Vec<GuessRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactEcho>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<BoundVerdict>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_ms: Option<f64>,
}

pub(crate) fn solution_pairs(instance: &Instance, s: &KSet) -> Vec<SolutionPair> {
    s.pairs()
        .map(|(x, position)| SolutionPair {
            element: instance.name(x).to_owned(),
            position,
        })
        .collect()
}

impl RunReport {
    /// Rebuilds the solution from element names.
    pub fn solution_kset(&self, instance: &Instance) -> Result<KSet> {
        let lookup = instance.lookup();
        let pairs = self
            .solution
            .iter()
            .map(|p| {
                lookup
                    .get(p.element.as_str())
                    .map(|&x| (x, p.position))
                    .ok_or_else(|| {
                        Error::validation(format!("report names unknown element {:?}", p.element))
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        KSet::from_pairs(instance.arity(), pairs)
    }

    /// Recomputes weight and utility from the reported solution and requires
    /// exact agreement.
    pub fn self_check(&self, instance: &Instance) -> Result<()> {
        let s = self.solution_kset(instance)?;
        let weight = instance.weights.kset_weight(&s)?;
        let utility = crate::oracle::eval(&instance.oracle, &s)?;
        if weight != self.weight || utility != self.utility {
            return Err(Error::validation(format!(
                "report claims weight {} and utility {}, recomputed {weight} and {utility}",
                self.weight, self.utility
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }
}
