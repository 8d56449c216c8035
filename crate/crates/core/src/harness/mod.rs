//! Monte-Carlo experiments, dataset ingestion, kernel MSE benchmarks and
//! report emission.

pub mod dataset;
pub mod experiments;
pub mod report;
pub mod stats;

pub use dataset::{bandwidth_heuristic, load_dataset, synthetic_normal, Dataset, LoadOptions};
pub use experiments::{
    bias_table, mc_sweep, mse_experiment, variance_table, McSetup, MseSetup, DEFAULT_P_GRID,
    DEFAULT_REPEATS,
};
pub use report::{emit_report, ExperimentReport, Format, Quantity, Record, ZGrid};
pub use stats::{
    draw_weights, empirical_moments, kernel_replicates, mc_covariance, pair_at_distance, Estimate,
    Moments,
};
