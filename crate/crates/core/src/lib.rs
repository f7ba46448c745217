//! Neutrality-based iterated local search (NILS) for the permutation
//! flowshop problem with makespan objective, plus landscape probes and an
//! experiment harness.
//!
//! ```
//! use nils_core::{run_nils, taillard_first, NilsConfig};
//!
//! let instance = taillard_first(20, 5).unwrap();
//! let report = run_nils(&instance, &NilsConfig::new(10, 20_000, 1)).unwrap();
//! assert_eq!(report.evals_used, 20_000);
//! assert!(report.final_best.value() >= 1278);
//! ```

pub mod error;
pub mod experiment;
pub mod instance;
pub mod landscape;
pub mod makespan;
pub mod neighborhood;
pub mod rng;
pub mod search;
pub mod stats;

pub use error::{ExperimentError, InstanceError, SolverError, StatsError};
pub use experiment::{
    aggregate, emit_reports, run_experiment, run_experiment_on, write_csv, write_csv_rows, write_json, AggregateReport,
    ExperimentConfig, ExperimentOutput, InstanceSource, MnsSummary, ReportFormat, RunOptions, RunRecord,
};
pub use instance::{
    generate_taillard, parse_instance, parse_instances, taillard_first, validate, write_instance, write_instances,
    Instance, Time, Violation,
};
pub use landscape::{neutral_degree, probe, random_neutral_walk, NeutralWalk, NeutralityProbe};
pub use makespan::{evaluate, evaluate_insertion_scan, simulate_schedule, Fitness, InsertionScanner, Permutation};
pub use neighborhood::{
    apply_exchange, apply_insertion, canonical_insertion_moves, shuffled_scan, ExchangeMove, InsertionMove, ScanOrder,
};
pub use rng::{derive_seed, seeded, SearchRng};
pub use search::{fihc, kick, nwp, run_nils, FihcOutcome, NilsConfig, NwpKind, NwpOutcome, RunReport, SearchState};
pub use stats::{mann_whitney_u, median_and_quartiles, MannWhitney, Quartiles};
