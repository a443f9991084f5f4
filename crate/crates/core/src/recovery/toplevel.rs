//! Multi-round recovery: identify, estimate, subtract, repeat.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sketch::{add_round, Schedule, Signal, Sketch};

use super::identify::{identify, IdentifyStats};
use super::weak::{top_by_magnitude, weak_estimate};

/// What one round saw and contributed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundReport {
    pub round: usize,
    pub s: u64,
    pub eta_ident: f64,
    pub eta_est: f64,
    pub identify: IdentifyStats,
    /// Entries added to the running approximation.
    pub estimated: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recovery {
    pub approx: Signal,
    pub rounds: Vec<RoundReport>,
    /// Candidate set produced by identification in each round.
    pub candidates: Vec<Vec<u64>>,
}

/// Entries kept in the final approximation, as a multiple of `k`.
pub const PRUNE_FACTOR: usize = 2;

/// Recover an approximation of the sketched signal.
pub fn toplevel_recover(schedule: &Schedule, sketch: &Sketch) -> Result<Recovery> {
    if sketch.digest != schedule.digest() {
        return Err(Error::DigestMismatch);
    }
    if sketch.values.len() != schedule.measurement_count() {
        return Err(Error::Format("sketch length does not match the schedule".into()));
    }
    let n = schedule.n();
    let mut residual = sketch.values.clone();
    let mut approx: BTreeMap<u64, f64> = BTreeMap::new();
    let mut reports = Vec::with_capacity(schedule.rounds().len());
    let mut candidates = Vec::with_capacity(schedule.rounds().len());
    for (j, rp) in schedule.rounds().iter().enumerate() {
        let found = identify(rp, &residual);
        let update = if found.indices.is_empty() {
            Vec::new()
        } else {
            weak_estimate(rp, &residual, &found.indices, rp.spec.s as usize)
        };
        for &(i, v) in &update {
            *approx.entry(i).or_default() += v;
        }
        let delta = Signal::new(n, update.clone())?;
        for later in &schedule.rounds()[j + 1..] {
            add_round(later, &delta, -1.0, &mut residual)?;
        }
        reports.push(RoundReport {
            round: j,
            s: rp.spec.s,
            eta_ident: rp.spec.eta_ident,
            eta_est: rp.spec.eta_est,
            identify: found.stats,
            estimated: update.len(),
        });
        candidates.push(found.indices);
    }
    let keep = PRUNE_FACTOR * schedule.k() as usize;
    let pruned = top_by_magnitude(approx.into_iter().collect(), keep);
    Ok(Recovery { approx: Signal::new(n, pruned)?, rounds: reports, candidates })
}
