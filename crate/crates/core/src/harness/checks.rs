//! Self-contained checks shared by the CLI and the acceptance suite.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::codes::{pv_encode, pv_list_decode, rs_decode_bw, rs_encode, to_received, PVParams, PVSymbol, RSParams};
use crate::error::Result;
use crate::expanders::{
    gen_one_layer, gen_out_regular_digraph, gen_two_layer, neighborhood_profile, verify_expansion_with_mode,
    verify_isolation, CheckMode, CheckReport, OneLayerScheme, TwoLayerScheme,
};
use crate::recovery::estimate_all;
use crate::sketch::{Schedule, SketchConfig};

use super::signal::{gen_signal, HeadShape, SignalSpec, TailShape};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzReport {
    pub trials: usize,
    pub failures: usize,
}

impl FuzzReport {
    pub fn pass(&self) -> bool {
        self.failures == 0
    }
}

/// Berlekamp-Welch round trips over GF(2^8) with `msg_len` message and
/// `code_len` code symbols; each trial corrupts up to `t` random positions.
pub fn rs_fuzz(msg_len: usize, code_len: usize, t: usize, trials: usize, seed: u64) -> Result<FuzzReport> {
    let p = RSParams::standard(8, msg_len, code_len)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..trials {
        let msg: Vec<u32> = (0..msg_len).map(|_| rng.gen_range(0..256)).collect();
        let mut cw = rs_encode(&msg, &p)?;
        let errors = rng.gen_range(0..=t);
        for pos in sample(&mut rng, code_len, errors) {
            cw[pos] ^= rng.gen_range(1..256);
        }
        if rs_decode_bw(&to_received(&cw, &p), &p, t).ok().as_deref() != Some(&msg[..]) {
            failures += 1;
        }
    }
    Ok(FuzzReport { trials, failures })
}

/// Planted list recovery: one index contributes `ceil(alpha d1)` correct
/// symbols in random rows and random junk fills the input up to `points`
/// distinct points. A trial fails unless the index is listed.
pub fn pv_planted(params: &PVParams, alpha: f64, points: usize, trials: usize, seed: u64) -> Result<FuzzReport> {
    let d1 = params.n_points();
    let agreement = params.agreement(alpha);
    let q = params.field().size() as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..trials {
        let i = rng.gen_range(0..params.universe());
        let enc = pv_encode(i, params)?;
        let mut pts: Vec<(usize, PVSymbol)> = sample(&mut rng, d1, agreement)
            .into_iter()
            .map(|r| (r, enc[r].clone()))
            .collect();
        while pts.len() < points {
            let r = rng.gen_range(0..d1);
            let ys = (0..params.m_vars()).map(|_| rng.gen_range(0..q)).collect();
            pts.push((r, PVSymbol { x: params.x_points()[r], ys }));
        }
        if !pv_list_decode(&pts, params, agreement)?.contains(&i) {
            failures += 1;
        }
    }
    Ok(FuzzReport { trials, failures })
}

/// Two-layer scheme sized for `(4k, eps)` expansion:
/// `B1 = 4k/eps^2`, `d1 = ceil((2/eps) ln(N/k) / ln(B1/k))`, `B2 = 8k/eps`,
/// `d2 = ceil(ln(B1/k))`.
pub fn expansion_scheme(n: u64, k: usize, eps: f64, seed: u64) -> Result<TwoLayerScheme> {
    let k = k as f64;
    let b1 = (4.0 * k / (eps * eps)).ceil();
    let ratio = (b1 / k).ln();
    let d1 = ((2.0 / eps) * (n as f64 / k).ln().max(1.0) / ratio).ceil().max(1.0);
    let b2 = (8.0 * k / eps).ceil();
    let d2 = ratio.ceil().max(1.0);
    gen_two_layer(n, b1 as u64, d1 as usize, b2 as u64, d2 as usize, seed)
}

/// Check `(4k, eps)` expansion of [`expansion_scheme`].
pub fn expansion_check(n: u64, k: usize, eps: f64, seed: u64, mode: Option<CheckMode>) -> Result<CheckReport> {
    let g = expansion_scheme(n, k, eps, seed)?;
    Ok(verify_expansion_with_mode(&g, 4 * k, eps, seed, mode))
}

/// One-layer scheme sized for `(ell, eta, zeta)` isolation:
/// `B = ceil(ell / (eta zeta))`, `d = ceil(ln(N/ell) / zeta)`.
pub fn isolation_scheme(n: u64, ell: usize, eta: f64, zeta: f64, seed: u64) -> Result<OneLayerScheme> {
    let b = (ell as f64 / (eta * zeta)).ceil() as u64;
    let d = ((n as f64 / ell as f64).ln().max(1.0) / zeta).ceil() as usize;
    gen_one_layer(n, b, d, seed)
}

pub fn isolation_check(n: u64, ell: usize, eta: f64, zeta: f64, seed: u64) -> Result<CheckReport> {
    let g = isolation_scheme(n, ell, eta, zeta, seed)?;
    Ok(verify_isolation(&g, ell, eta, zeta, seed))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighborhoodReport {
    pub nodes: usize,
    pub out_degree: usize,
    pub depth: usize,
    /// Start nodes reaching at least `unique_fraction * nodes` distinct endpoints.
    pub good_starts: usize,
    pub min_unique: usize,
}

/// Walk-endpoint profile of a random `d`-out-regular digraph on `l` nodes at
/// depth `ceil(log_d(3l))`.
pub fn neighborhood_check(l: usize, d: usize, unique_fraction: f64, seed: u64) -> NeighborhoodReport {
    let depth = ((3.0 * l as f64).ln() / (d.max(2) as f64).ln() - 1e-9).ceil() as usize;
    let g = gen_out_regular_digraph(l, d, seed);
    let prof = neighborhood_profile(&g, depth);
    let need = unique_fraction * l as f64;
    NeighborhoodReport {
        nodes: l,
        out_degree: d,
        depth,
        good_starts: prof.iter().filter(|p| p.0 as f64 >= need).count(),
        min_unique: prof.iter().map(|p| p.0).min().unwrap_or(0),
    }
}

/// Positions of a weak-system instance whose median estimate errs by at
/// least `eta / (4s)`, using the estimation block of the first round of a
/// schedule for `s` heavy hitters. The instance has `s` unit heads and a
/// dense tail of mass `tail_mass`.
pub fn decoy_count(n: u64, s: usize, eps: f64, tail_mass: f64, seed: u64) -> Result<usize> {
    let schedule = Schedule::new(n, s as u64, eps, &SketchConfig::default(), seed)?;
    let x = gen_signal(
        &SignalSpec {
            n,
            k: s,
            head: HeadShape::Flat { value: 1.0 },
            tail: TailShape::Uniform { support: None },
            tail_mass,
            seed,
        },
        None,
    )?;
    // Only the estimation block is read, so only it is filled.
    let rp = &schedule.rounds()[0];
    let mut values = vec![0.0; schedule.measurement_count()];
    for rep in 0..rp.spec.d_est as usize {
        for &(i, v) in &x.entries {
            values[rp.est_cell(rep, rp.est.hash(rep, i))] += v;
        }
    }
    let all: Vec<u64> = (0..n).collect();
    let threshold = rp.spec.eta_est / (4.0 * s as f64);
    let dense = x.to_dense();
    Ok(estimate_all(rp, &values, &all)
        .iter()
        .filter(|&&(i, est)| (dense[i as usize] - est).abs() >= threshold)
        .count())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rs_fuzz_small() {
        assert!(rs_fuzz(8, 16, 4, 50, 1).unwrap().pass());
        // beyond the radius some trials must fail
        assert!(!rs_fuzz(8, 16, 8, 50, 1).unwrap().pass());
    }

    #[test]
    fn pv_planted_small() {
        let p = PVParams::design(256, 4, 12, 0.75, 1.2, 1).unwrap();
        assert!(pv_planted(&p, 0.75, 12, 10, 2).unwrap().pass());
    }

    #[test]
    fn scheme_sizes() {
        let g = expansion_scheme(20, 2, 0.25, 0).unwrap();
        assert_eq!((g.b1, g.d1, g.b2, g.d2), (128, 5, 64, 5));
        let h = isolation_scheme(1 << 15, 16, 0.25, 0.25, 0).unwrap();
        assert_eq!((h.b, h.d), (256, 31));
    }

    #[test]
    fn neighborhood_depth() {
        let r = neighborhood_check(1024, 8, 0.8, 0);
        assert_eq!(r.depth, 4);
        assert!(r.good_starts <= 1024 && r.min_unique <= 1024);
    }
}
