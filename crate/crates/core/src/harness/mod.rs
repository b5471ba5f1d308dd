//! Instance files, seeded generators, the experiment runner, reports, and the
//! bench sweep.

pub mod bench;
pub mod generate;
pub mod instance;
pub mod report;
pub mod runner;

pub use bench::{
    aggregate, render_table, run_bench, AggregateRow, BenchCell, BenchInstance, BenchSpec,
};
pub use generate::{
    generate_coverage, generate_nonmonotone_tabular, generate_separable, permutation,
};
pub use instance::{parse_instance, Instance, InstanceFile};
pub use report::{RunReport, RunStatus};
pub use runner::{
    prepare, run_experiment, run_prepared, Baseline, BoundSource, ExperimentConfig, GuessSource,
    MonotoneSource, TauSource,
};
