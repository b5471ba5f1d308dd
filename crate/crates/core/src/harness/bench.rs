//! Sweeps instances × ε × algorithm × permutation seed. Cells run in parallel
//! but results come back in cell-key order, so the merged output is
//! reproducible.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use super::instance::Instance;
use super::report::{RunReport, RunStatus};
use super::runner::{
    prepare, run_prepared, Baseline, BoundSource, ExperimentConfig, GuessSource, MonotoneSource,
    TauSource,
};
use crate::error::Result;
use crate::exact::Algorithm;
use crate::solver::Selection;

pub struct BenchInstance {
    pub label: String,
    pub instance: Instance,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchSpec {
    pub epsilons: Vec<f64>,
    pub algorithms: Vec<Algorithm>,
    /// Selection modes tried for the single-pass algorithm.
    pub selections: Vec<Selection>,
    /// `None` streams elements in file order.
    pub permute_seeds: Vec<Option<u64>>,
    pub tau: TauSource,
    pub monotone: MonotoneSource,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchCell {
    pub instance: String,
    pub epsilon: f64,
    pub algorithm: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selection: Option<Selection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub permute_seed: Option<u64>,
    pub report: RunReport,
}

impl BenchSpec {
    fn configs(&self) -> Vec<ExperimentConfig> {
        let mut out = Vec::new();
        for &epsilon in &self.epsilons {
            for &algorithm in &self.algorithms {
                let selections = match algorithm {
                    Algorithm::SinglePass => self.selections.clone(),
                    _ => vec![Selection::Default],
                };
                for &selection in &selections {
                    for &permute_seed in &self.permute_seeds {
                        let mut cfg = ExperimentConfig::new(algorithm, epsilon, self.tau);
                        cfg.monotone = self.monotone;
                        cfg.guess = Some(GuessSource::FromExact);
                        cfg.upper_bound = Some(BoundSource::NTimesWmax);
                        cfg.selection = selection;
                        cfg.permute_seed = permute_seed;
                        cfg.run_exact = true;
                        out.push(cfg);
                    }
                }
            }
        }
        out
    }
}

/// Runs every cell with the exact baseline attached.
pub fn run_bench(instances: &[BenchInstance], spec: &BenchSpec) -> Result<Vec<BenchCell>> {
    let configs = spec.configs();
    let Some(first) = configs.first() else {
        return Ok(Vec::new());
    };
    let baselines: Vec<Baseline> = instances
        .par_iter()
        .map(|b| prepare(&b.instance, first))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, &ExperimentConfig)> = (0..instances.len())
        .flat_map(|i| configs.iter().map(move |c| (i, c)))
        .collect();
    jobs.par_iter()
        .map(|&(i, cfg)| {
            let report = run_prepared(&instances[i].instance, cfg, &baselines[i])?;
            Ok(BenchCell {
                instance: instances[i].label.clone(),
                epsilon: cfg.epsilon,
                algorithm: cfg.algorithm.number(),
                selection: (cfg.algorithm == Algorithm::SinglePass).then_some(cfg.selection),
                permute_seed: cfg.permute_seed,
                report,
            })
        })
        .collect()
}

/// Summary of all cells sharing an algorithm, selection mode, and `ε`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AggregateRow {
    pub algorithm: u8,
    pub selection: Option<Selection>,
    pub epsilon: f64,
    pub cells: usize,
    pub success: usize,
    pub infeasible: usize,
    pub contract_violation: usize,
    pub bound_violation: usize,
    /// Largest `w(x) / w(v)` over feasible cells.
    pub max_weight_ratio: f64,
    /// Smallest `g(x) / τ` over feasible cells.
    pub min_utility_ratio: f64,
    pub max_live_instances: u64,
    pub max_oracle_queries: u64,
}

pub fn aggregate(cells: &[BenchCell]) -> Vec<AggregateRow> {
    let mut rows: Vec<AggregateRow> = Vec::new();
    for cell in cells {
        let idx = match rows.iter().position(|r| {
            r.algorithm == cell.algorithm
                && r.selection == cell.selection
                && r.epsilon == cell.epsilon
        }) {
            Some(idx) => idx,
            None => {
                rows.push(AggregateRow {
                    algorithm: cell.algorithm,
                    selection: cell.selection,
                    epsilon: cell.epsilon,
                    cells: 0,
                    success: 0,
                    infeasible: 0,
                    contract_violation: 0,
                    bound_violation: 0,
                    max_weight_ratio: 0.0,
                    min_utility_ratio: f64::INFINITY,
                    max_live_instances: 0,
                    max_oracle_queries: 0,
                });
                rows.len() - 1
            }
        };
        let row = &mut rows[idx];
        let r = &cell.report;
        row.cells += 1;
        match r.status {
            RunStatus::Success => row.success += 1,
            RunStatus::Infeasible => row.infeasible += 1,
            RunStatus::ContractViolation => row.contract_violation += 1,
            RunStatus::BoundViolation => row.bound_violation += 1,
        }
        if let Some(exact) = r.exact.as_ref().filter(|e| e.feasible) {
            if !r.infeasible {
                row.max_weight_ratio = row.max_weight_ratio.max(r.weight / exact.weight);
                row.min_utility_ratio = row.min_utility_ratio.min(r.utility / r.config.tau);
            }
        }
        row.max_live_instances = row.max_live_instances.max(r.stats.live_instances_max);
        row.max_oracle_queries = row.max_oracle_queries.max(r.stats.oracle_queries);
    }
    rows.sort_by(|a, b| {
        (
            a.algorithm,
            a.selection.map(|s| s == Selection::PaperLiteral),
        )
            .cmp(&(
                b.algorithm,
                b.selection.map(|s| s == Selection::PaperLiteral),
            ))
            .then(a.epsilon.total_cmp(&b.epsilon))
    });
    rows
}

/// Fixed-width text table of [`aggregate`] rows.
pub fn render_table(rows: &[AggregateRow]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:<5} {:<13} {:>5} {:>6} {:>6} {:>6} {:>6} {:>6} {:>10} {:>10} {:>6} {:>9}",
        "alg",
        "selection",
        "eps",
        "cells",
        "ok",
        "infeas",
        "contr",
        "bound",
        "max w/opt",
        "min g/tau",
        "live",
        "queries"
    )
    .expect("writing to a string");
    for r in rows {
        let selection = match r.selection {
            None => "-",
            Some(Selection::Default) => "default",
            Some(Selection::PaperLiteral) => "paper-literal",
        };
        let min_utility = if r.min_utility_ratio.is_finite() {
            format!("{:.4}", r.min_utility_ratio)
        } else {
            "-".to_owned()
        };
        writeln!(
            out,
            "{:<5} {:<13} {:>5} {:>6} {:>6} {:>6} {:>6} {:>6} {:>10.4} {:>10} {:>6} {:>9}",
            r.algorithm,
            selection,
            r.epsilon,
            r.cells,
            r.success,
            r.infeasible,
            r.contract_violation,
            r.bound_violation,
            r.max_weight_ratio,
            min_utility,
            r.max_live_instances,
            r.max_oracle_queries
        )
        .expect("writing to a string");
    }
    out
}
