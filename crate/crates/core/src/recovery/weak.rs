//! Median estimation from one-layer buckets and first-layer bucket values.

use crate::sketch::RoundParams;

/// Lower median of a non-empty slice (sorted in place).
pub fn lower_median(vals: &mut [f64]) -> f64 {
    vals.sort_by(f64::total_cmp);
    vals[(vals.len() - 1) / 2]
}

/// Largest `m` entries by magnitude, ties by smaller key; zeros dropped.
pub fn top_by_magnitude(mut entries: Vec<(u64, f64)>, m: usize) -> Vec<(u64, f64)> {
    entries.retain(|&(_, v)| v != 0.0);
    entries.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
    entries.truncate(m);
    entries
}

/// Median estimate of every candidate in `candidates` from the round's
/// estimation block, without truncation.
pub fn estimate_all(rp: &RoundParams, values: &[f64], candidates: &[u64]) -> Vec<(u64, f64)> {
    let d = rp.spec.d_est as usize;
    let mut buf = vec![0.0; d];
    candidates
        .iter()
        .map(|&i| {
            for (rep, slot) in buf.iter_mut().enumerate() {
                *slot = values[rp.est_cell(rep, rp.est.hash(rep, i))];
            }
            (i, lower_median(&mut buf))
        })
        .collect()
}

/// Estimates for the candidate set, keeping the `2s` largest by magnitude.
pub fn weak_estimate(rp: &RoundParams, values: &[f64], candidates: &[u64], s: usize) -> Vec<(u64, f64)> {
    let mut cands = candidates.to_vec();
    cands.sort_unstable();
    cands.dedup();
    top_by_magnitude(estimate_all(rp, values, &cands), 2 * s)
}

/// Value estimate of every first-layer bucket of row `r`.
///
/// A gadget pair's two rows sum to the bucket value, so each repetition
/// contributes the pair sum averaged over bit positions; the estimate is
/// the lower median over repetitions.
pub fn bucket_estimates(rp: &RoundParams, values: &[f64], r: usize) -> Vec<f64> {
    let d2 = rp.spec.d2 as usize;
    let b2 = rp.spec.b2;
    let w = rp.w_bits();
    // Pair-sum averages per (j, second-layer bucket).
    let mut avg = vec![0.0; d2 * b2 as usize];
    for j in 0..d2 {
        for c in 0..b2 {
            let base = rp.ident_cell(r, j, c, 0, 0);
            let sum: f64 = values[base..base + 2 * w].iter().sum();
            avg[j * b2 as usize + c as usize] = sum / w as f64;
        }
    }
    let mut buf = vec![0.0; d2];
    (0..rp.spec.b1)
        .map(|b| {
            for (j, slot) in buf.iter_mut().enumerate() {
                *slot = avg[j * b2 as usize + rp.two_layer.inner(r, j, b) as usize];
            }
            lower_median(&mut buf)
        })
        .collect()
}

/// The `count` heaviest first-layer buckets of row `r` as `(bucket, estimate)`.
pub fn recover_heavy_buckets(rp: &RoundParams, values: &[f64], r: usize, count: usize) -> Vec<(u64, f64)> {
    let est = bucket_estimates(rp, values, r);
    top_by_magnitude(est.into_iter().enumerate().map(|(b, v)| (b as u64, v)).collect(), count)
}
