//! Decoding: weak estimation, identification and the multi-round loop.

pub mod identify;
pub mod toplevel;
pub mod weak;

pub use identify::{build_recovered_graph, decode_chunk, decode_heavy_chunks, identify, IdentifyStats, Identified, RecoveredGraph};
pub use toplevel::{toplevel_recover, Recovery, RoundReport, PRUNE_FACTOR};
pub use weak::{bucket_estimates, estimate_all, lower_median, recover_heavy_buckets, top_by_magnitude, weak_estimate};
