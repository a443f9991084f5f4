//! Signal generation, trial orchestration and reporting.

pub mod checks;
pub mod config;
pub mod signal;
pub mod trials;

pub use config::HarnessConfig;
pub use signal::{gen_signal, HeadShape, SignalSpec, TailShape};
pub use trials::{
    csv_bytes, json_bytes, normalization_scale, run_trials, schedule_seed, score_trial, summarize,
    workers_from_env, write_file, Quantiles, Summary, TrialReport, WORKERS_ENV,
};
pub use checks::{
    decoy_count, expansion_check, expansion_scheme, isolation_check, isolation_scheme, neighborhood_check, pv_planted,
    rs_fuzz, FuzzReport, NeighborhoodReport,
};
