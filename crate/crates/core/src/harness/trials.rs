//! Seeded batches of sketch-and-recover trials with ground-truth scoring.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expanders::prf;
use crate::recovery::{toplevel_recover, RoundReport};
use crate::sketch::{apply_sketch, RoundSpec, Schedule, Signal};

use super::config::HarnessConfig;
use super::signal::{gen_signal, SignalSpec};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "SPARSE_L1_WORKERS";

/// Worker count from [`WORKERS_ENV`], defaulting to the available parallelism.
pub fn workers_from_env() -> Result<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(w) if w > 0 => Ok(w),
            _ => Err(Error::Parameter(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Seed of the measurement schedule used for the trial with signal seed `seed`.
pub fn schedule_seed(seed: u64) -> u64 {
    prf(seed, 0x5c4e_d01e, 0, 0)
}

/// One row of results. Errors are in the signal's original units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub seed: u64,
    pub n: u64,
    pub k: usize,
    pub eps: f64,
    pub measurements: usize,
    /// Factor applied to the signal before sketching.
    pub scale: f64,
    pub tail_l1: f64,
    pub l1_error: f64,
    /// `l1_error / tail_l1`, or 0 when the tail is zero.
    pub ratio: f64,
    /// `l1_error / ||x||_1`, or 0 for the zero signal.
    pub rel_error: f64,
    /// Fraction of the top-k entries found in some round's candidate set.
    pub recall: f64,
    /// Top-k entries found by the first round's identification.
    pub round0_hits: usize,
    /// Positions whose normalized error is at least `eps / (4k)`.
    pub decoys: usize,
    pub chunks_decoded: usize,
    pub rs_failures: usize,
    pub collisions: usize,
    pub pv_list_max: usize,
    pub candidates: usize,
    pub error: Option<String>,
    #[serde(skip)]
    pub rounds: Vec<RoundReport>,
    /// Sketch plus recovery time. Kept out of the written reports so they
    /// stay reproducible.
    #[serde(skip)]
    pub wall_ms: f64,
}

impl TrialReport {
    fn failed(cfg: &HarnessConfig, seed: u64, e: Error) -> Self {
        TrialReport {
            seed,
            n: cfg.n,
            k: cfg.k,
            eps: cfg.eps,
            measurements: 0,
            scale: 0.0,
            tail_l1: 0.0,
            l1_error: 0.0,
            ratio: 0.0,
            rel_error: 0.0,
            recall: 0.0,
            round0_hits: 0,
            decoys: 0,
            chunks_decoded: 0,
            rs_failures: 0,
            collisions: 0,
            pv_list_max: 0,
            candidates: 0,
            error: Some(e.to_string()),
            rounds: Vec::new(),
            wall_ms: 0.0,
        }
    }

    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Entries where `a` and `b` differ by at least `threshold`.
fn count_decoys(a: &Signal, b: &Signal, threshold: f64) -> usize {
    let mut support: Vec<u64> = a.entries.iter().chain(&b.entries).map(|e| e.0).collect();
    support.sort_unstable();
    support.dedup();
    support.iter().filter(|&&i| (a.get(i) - b.get(i)).abs() >= threshold).count()
}

/// Scale factor bringing the tail of `x` to unit mass (1 when the tail is zero).
pub fn normalization_scale(x: &Signal, k: usize) -> f64 {
    let tail = x.tail_norm(k);
    if tail > 0.0 {
        1.0 / tail
    } else {
        1.0
    }
}

/// Sketch `x`, recover, and score against `x`. `recover_with` is the
/// schedule handed to the decoder; it normally equals `schedule`.
pub fn score_trial(
    cfg: &HarnessConfig,
    seed: u64,
    x: &Signal,
    schedule: &Schedule,
    recover_with: &Schedule,
) -> Result<TrialReport> {
    let k = cfg.k;
    let scale = if cfg.normalize { normalization_scale(x, k) } else { 1.0 };
    let start = Instant::now();
    let sketch = apply_sketch(schedule, &x.scale(scale))?;
    let rec = toplevel_recover(recover_with, &sketch)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let approx = rec.approx.scale(1.0 / scale);

    let tail_l1 = x.tail_norm(k);
    let l1_error = approx.l1_distance(x);
    let norm = x.l1_norm();
    let head: Vec<u64> = x.top(k).entries.iter().map(|e| e.0).collect();
    let seen: HashSet<u64> = rec.candidates.iter().flatten().copied().collect();
    let round0: HashSet<u64> = rec.candidates.first().into_iter().flatten().copied().collect();
    let recall = if head.is_empty() {
        1.0
    } else {
        head.iter().filter(|i| seen.contains(i)).count() as f64 / head.len() as f64
    };
    let threshold = cfg.eps / (4.0 * k.max(1) as f64);
    let sum = |f: fn(&RoundReport) -> usize| rec.rounds.iter().map(f).sum::<usize>();
    Ok(TrialReport {
        seed,
        n: cfg.n,
        k,
        eps: cfg.eps,
        measurements: schedule.measurement_count(),
        scale,
        tail_l1,
        l1_error,
        ratio: if tail_l1 > 0.0 { l1_error / tail_l1 } else { 0.0 },
        rel_error: if norm > 0.0 { l1_error / norm } else { 0.0 },
        recall,
        round0_hits: head.iter().filter(|i| round0.contains(i)).count(),
        decoys: count_decoys(&x.scale(scale), &rec.approx, threshold),
        chunks_decoded: sum(|r| r.identify.chunks_decoded),
        rs_failures: sum(|r| r.identify.rs_failures),
        collisions: sum(|r| r.identify.collisions),
        pv_list_max: rec.rounds.iter().map(|r| r.identify.pv_list_max).max().unwrap_or(0),
        candidates: sum(|r| r.identify.candidates),
        error: None,
        rounds: rec.rounds,
        wall_ms,
    })
}

fn run_one(cfg: &HarnessConfig, seed: u64) -> Result<TrialReport> {
    let schedule = Schedule::new(cfg.n, cfg.k as u64, cfg.eps, &cfg.sketch, schedule_seed(seed))?;
    let spec = SignalSpec {
        n: cfg.n,
        k: cfg.k,
        head: cfg.head.clone(),
        tail: cfg.tail.clone(),
        tail_mass: cfg.tail_mass,
        seed,
    };
    let x = gen_signal(&spec, Some(&schedule))?;
    if cfg.recover_seed_offset == 0 {
        score_trial(cfg, seed, &x, &schedule, &schedule)
    } else {
        let other = Schedule::new(
            cfg.n,
            cfg.k as u64,
            cfg.eps,
            &cfg.sketch,
            schedule_seed(seed).wrapping_add(cfg.recover_seed_offset),
        )?;
        score_trial(cfg, seed, &x, &schedule, &other)
    }
}

/// Run `cfg.trials` trials with seeds `cfg.seed, cfg.seed + 1, ...` on a pool
/// of `workers` threads. Reports come back sorted by seed; a failing trial
/// yields a report with `error` set.
pub fn run_trials(cfg: &HarnessConfig, workers: usize) -> Result<Vec<TrialReport>> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Internal(e.to_string()))?;
    let seeds: Vec<u64> = (0..cfg.trials as u64).map(|t| cfg.seed.wrapping_add(t)).collect();
    let mut reports: Vec<TrialReport> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&seed| run_one(cfg, seed).unwrap_or_else(|e| TrialReport::failed(cfg, seed, e)))
            .collect()
    });
    reports.sort_by_key(|r| r.seed);
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub mean: f64,
    pub median: f64,
    pub p90: f64,
    pub max: f64,
}

impl Quantiles {
    /// Nearest-rank quantiles; all zeros for an empty sample.
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Quantiles { mean: 0.0, median: 0.0, p90: 0.0, max: 0.0 };
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let rank = |q: f64| v[((q * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1];
        Quantiles {
            mean: v.iter().sum::<f64>() / v.len() as f64,
            median: rank(0.5),
            p90: rank(0.9),
            max: v[v.len() - 1],
        }
    }
}

/// Batch aggregate. Every statistic is a function of the per-trial rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config: BTreeMap<String, String>,
    /// Round parameters of the first trial's schedule.
    pub rounds: Vec<RoundSpec>,
    pub measurements: usize,
    pub trials: usize,
    pub failed: usize,
    pub ratio: Quantiles,
    /// Trials with `ratio <= 1 + 2 eps`.
    pub within_one_plus_two_eps: usize,
    /// Trials with `rel_error <= 1e-6`.
    pub exact: usize,
    pub recall: Quantiles,
    pub decoys: Quantiles,
    pub per_round: Vec<Vec<RoundReport>>,
}

pub fn summarize(cfg: &HarnessConfig, reports: &[TrialReport]) -> Result<Summary> {
    let schedule = Schedule::new(cfg.n, cfg.k as u64, cfg.eps, &cfg.sketch, schedule_seed(cfg.seed))?;
    let good: Vec<&TrialReport> = reports.iter().filter(|r| r.ok()).collect();
    let col = |f: fn(&TrialReport) -> f64| good.iter().map(|r| f(r)).collect::<Vec<f64>>();
    Ok(Summary {
        config: cfg.pairs().into_iter().collect(),
        rounds: schedule.specs(),
        measurements: schedule.measurement_count(),
        trials: reports.len(),
        failed: reports.len() - good.len(),
        ratio: Quantiles::of(&col(|r| r.ratio)),
        within_one_plus_two_eps: good.iter().filter(|r| r.ratio <= 1.0 + 2.0 * cfg.eps).count(),
        exact: good.iter().filter(|r| r.rel_error <= 1e-6).count(),
        recall: Quantiles::of(&col(|r| r.recall)),
        decoys: Quantiles::of(&col(|r| r.decoys as f64)),
        per_round: reports.iter().map(|r| r.rounds.clone()).collect(),
    })
}

pub fn csv_bytes(reports: &[TrialReport]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in reports {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

pub fn json_bytes(summary: &Summary) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(summary).map_err(|e| Error::Format(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}
