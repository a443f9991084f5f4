//! Per-round parameterization and the stacked sketch layout.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::codes::{BitEncoder, PVParams, RSParams};
use crate::error::{Error, Result};
use crate::expanders::{gen_regular_expander, prf, OneLayerScheme, RegularGraph, TwoLayerScheme};
use crate::ffield::{GfField, Poly};

/// Tunable constants of the default parameterization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SketchConfig {
    /// `B1 = next_pow2(c1 s / eta^2)`.
    pub c1: f64,
    /// `d1 = ceil(c2 (1/eta) ln(N/s) / ln(B1/s))`.
    pub c2: f64,
    /// `B2 = ceil(c3 s / eta)`.
    pub c3: f64,
    /// Inner RS redundancy `ceil(c4 log2(B1/s))` symbols.
    pub c4: f64,
    /// `B_est = ceil(c5 s / eta_est)`.
    pub c5: f64,
    /// `d_est = ceil(c6 (1/eta_est) ln(N/s))`.
    pub c6: f64,
    /// Candidate cap `c7 (s/eps) d1`.
    pub c7: f64,
    /// Heavy first-layer buckets decoded per row, `ceil(c_heavy s / eta)`.
    pub c_heavy: f64,
    /// Geometric decay of the per-round distortion budgets.
    pub round_decay: f64,
    /// Fraction of rows a list-decoded index must agree with.
    pub upfal_alpha: f64,
    /// Fraction of linking-graph nodes that may be corrupted.
    pub zeta: f64,
    /// Degree of the linking expander.
    pub delta: usize,
    /// Exponent `c`: BFS depth `c log_delta d1`, BFS cap and PV capacity `d1^c`.
    pub bfs_c: f64,
}

impl Default for SketchConfig {
    fn default() -> Self {
        SketchConfig {
            c1: 1.0,
            c2: 1.0,
            c3: 1.0,
            c4: 1.0,
            c5: 1.0,
            c6: 1.0,
            c7: 4.0,
            c_heavy: 1.0,
            round_decay: 0.75,
            upfal_alpha: 0.3,
            zeta: 0.05,
            delta: 8,
            bfs_c: 1.0,
        }
    }
}

impl SketchConfig {
    /// Set a constant by name; used by config files and CLI overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = || -> Result<f64> {
            value
                .parse::<f64>()
                .map_err(|_| Error::Parameter(format!("{key}: not a number: {value}")))
        };
        match key {
            "c1" => self.c1 = num()?,
            "c2" => self.c2 = num()?,
            "c3" => self.c3 = num()?,
            "c4" => self.c4 = num()?,
            "c5" => self.c5 = num()?,
            "c6" => self.c6 = num()?,
            "c7" => self.c7 = num()?,
            "c_heavy" => self.c_heavy = num()?,
            "round_decay" => self.round_decay = num()?,
            "upfal_alpha" => self.upfal_alpha = num()?,
            "zeta" => self.zeta = num()?,
            "bfs_c" => self.bfs_c = num()?,
            "delta" => {
                self.delta = value
                    .parse()
                    .map_err(|_| Error::Parameter(format!("delta: not an integer: {value}")))?
            }
            _ => return Err(Error::Parameter(format!("unknown sketch constant {key}"))),
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            self.c1, self.c2, self.c3, self.c4, self.c5, self.c6, self.c7, self.c_heavy, self.bfs_c,
        ];
        if positive.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
            return Err(Error::Parameter("sketch constants must be positive".into()));
        }
        if !(0.0 < self.round_decay && self.round_decay < 1.0) {
            return Err(Error::Parameter("round_decay must be in (0, 1)".into()));
        }
        if !(0.0 < self.upfal_alpha && self.upfal_alpha <= 1.0) {
            return Err(Error::Parameter("upfal_alpha must be in (0, 1]".into()));
        }
        if self.delta < 4 || !self.delta.is_multiple_of(2) {
            return Err(Error::Parameter("delta must be even and at least 4".into()));
        }
        Ok(())
    }
}

/// Plain-data description of one round, sufficient to rebuild every
/// scheme and code. This is what the sketch file stores and what the
/// parameter digest covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundSpec {
    pub n: u64,
    pub k: u64,
    pub eps: f64,
    pub round: u64,
    pub s: u64,
    pub eta_ident: f64,
    pub eta_est: f64,
    pub b1: u64,
    pub d1: u64,
    pub b2: u64,
    pub d2: u64,
    pub b_est: u64,
    pub d_est: u64,
    pub delta: u64,
    pub hash_seed: u64,
    pub est_seed: u64,
    pub graph_seed: u64,
    pub pv_h: u64,
    pub pv_m: u64,
    pub pv_dx: u64,
    /// Coefficients of the PV modulus `E`, lowest degree first.
    pub pv_modulus: Vec<u32>,
    pub inner_w: u64,
    pub inner_msg_len: u64,
    pub heavy_count: u64,
    pub bfs_depth: u64,
    pub bfs_cap: u64,
    pub agreement: u64,
    pub candidate_cap: u64,
}

impl RoundSpec {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        let ints = [
            self.n,
            self.k,
            self.eps.to_bits(),
            self.round,
            self.s,
            self.eta_ident.to_bits(),
            self.eta_est.to_bits(),
            self.b1,
            self.d1,
            self.b2,
            self.d2,
            self.b_est,
            self.d_est,
            self.delta,
            self.hash_seed,
            self.est_seed,
            self.graph_seed,
            self.pv_h,
            self.pv_m,
            self.pv_dx,
            self.inner_w,
            self.inner_msg_len,
            self.heavy_count,
            self.bfs_depth,
            self.bfs_cap,
            self.agreement,
            self.candidate_cap,
            self.pv_modulus.len() as u64,
        ];
        for v in ints {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for c in &self.pv_modulus {
            out.extend_from_slice(&c.to_le_bytes());
        }
        out
    }

    /// Parse one spec from the front of `bytes`, returning bytes consumed.
    pub fn from_bytes(bytes: &[u8]) -> Result<(RoundSpec, usize)> {
        const FIELDS: usize = 28;
        let short = || Error::Format("truncated round parameters".into());
        if bytes.len() < FIELDS * 8 {
            return Err(short());
        }
        let v: Vec<u64> = bytes[..FIELDS * 8]
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        let mod_len = v[27] as usize;
        let end = FIELDS * 8 + mod_len * 4;
        if mod_len > 64 || bytes.len() < end {
            return Err(short());
        }
        let pv_modulus = bytes[FIELDS * 8..end]
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        let spec = RoundSpec {
            n: v[0],
            k: v[1],
            eps: f64::from_bits(v[2]),
            round: v[3],
            s: v[4],
            eta_ident: f64::from_bits(v[5]),
            eta_est: f64::from_bits(v[6]),
            b1: v[7],
            d1: v[8],
            b2: v[9],
            d2: v[10],
            b_est: v[11],
            d_est: v[12],
            delta: v[13],
            hash_seed: v[14],
            est_seed: v[15],
            graph_seed: v[16],
            pv_h: v[17],
            pv_m: v[18],
            pv_dx: v[19],
            pv_modulus,
            inner_w: v[20],
            inner_msg_len: v[21],
            heavy_count: v[22],
            bfs_depth: v[23],
            bfs_cap: v[24],
            agreement: v[25],
            candidate_cap: v[26],
        };
        Ok((spec, end))
    }

    /// Bits per PV field element and per link, `log2 B1`.
    pub fn w_pv(&self) -> u32 {
        self.b1.trailing_zeros()
    }

    /// Chunk length in bits: PV symbol plus `delta` links.
    pub fn beta(&self) -> usize {
        (self.pv_m as usize + 1 + self.delta as usize) * self.w_pv() as usize
    }

    pub fn ident_cells(&self) -> usize {
        (self.d1 * self.d2 * self.b2 * self.inner_w * 2) as usize
    }

    pub fn est_cells(&self) -> usize {
        (self.d_est * self.b_est) as usize
    }
}

/// One round with all of its schemes and codes materialized.
#[derive(Debug, Clone)]
pub struct RoundParams {
    pub spec: RoundSpec,
    pub two_layer: TwoLayerScheme,
    pub est: OneLayerScheme,
    pub graph: RegularGraph,
    pub pv: PVParams,
    pub inner: RSParams,
    pub encoder: BitEncoder,
    /// Offset of this round's identification block in the flat sketch.
    pub ident_offset: usize,
    /// Offset of this round's estimation block.
    pub est_offset: usize,
}

impl RoundParams {
    pub fn from_spec(spec: RoundSpec, offset: usize) -> Result<Self> {
        if !spec.b1.is_power_of_two() || spec.b1 < 4 {
            return Err(Error::Parameter("B1 must be a power of two >= 4".into()));
        }
        let two_layer = TwoLayerScheme {
            n: spec.n,
            b1: spec.b1,
            d1: spec.d1 as usize,
            b2: spec.b2,
            d2: spec.d2 as usize,
            seed: spec.hash_seed,
        };
        let est = OneLayerScheme {
            n: spec.n,
            b: spec.b_est,
            d: spec.d_est as usize,
            seed: spec.est_seed,
        };
        let graph = gen_regular_expander(spec.d1 as usize, spec.delta as usize, spec.graph_seed)?;
        let field = GfField::get(spec.w_pv() as u8)?;
        let modulus = Poly::from_coeffs(field, spec.pv_modulus.clone());
        let pv = PVParams::new(
            modulus,
            spec.pv_h as u32,
            spec.pv_m as usize,
            spec.pv_dx as usize,
            spec.d1 as usize,
            spec.n,
        )?;
        let inner = RSParams::standard(spec.inner_w as u8, spec.inner_msg_len as usize, spec.d2 as usize)?;
        if spec.beta() > inner.msg_len() * spec.inner_w as usize {
            return Err(Error::Parameter("chunk does not fit the inner code".into()));
        }
        let encoder = BitEncoder::new(spec.beta(), &inner)?;
        let ident_offset = offset;
        let est_offset = offset + spec.ident_cells();
        Ok(RoundParams { spec, two_layer, est, graph, pv, inner, encoder, ident_offset, est_offset })
    }

    pub fn total_cells(&self) -> usize {
        self.spec.ident_cells() + self.spec.est_cells()
    }

    pub fn w_bits(&self) -> usize {
        self.spec.inner_w as usize
    }

    /// Flat index of identification cell `(r, j, bucket, bit, side)`.
    #[inline]
    pub fn ident_cell(&self, r: usize, j: usize, bucket: u64, bit: usize, side: usize) -> usize {
        let d2 = self.spec.d2 as usize;
        let b2 = self.spec.b2 as usize;
        self.ident_offset + ((((r * d2 + j) * b2 + bucket as usize) * self.w_bits() + bit) * 2 + side)
    }

    /// Flat index of estimation cell `(rep, bucket)`.
    #[inline]
    pub fn est_cell(&self, rep: usize, bucket: u64) -> usize {
        self.est_offset + rep * self.spec.b_est as usize + bucket as usize
    }
}

/// Coordinates of a flat cell index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellCoord {
    Ident { round: usize, r: usize, j: usize, bucket: u64, bit: usize, side: usize },
    Est { round: usize, rep: usize, bucket: u64 },
}

/// The full multi-round parameterization.
#[derive(Debug, Clone)]
pub struct Schedule {
    rounds: Vec<RoundParams>,
    digest: [u8; 32],
}

fn next_pow2_f(x: f64) -> u64 {
    let v = x.ceil().max(4.0);
    if v >= (1u64 << 62) as f64 {
        return 1u64 << 62;
    }
    (v as u64).next_power_of_two()
}

fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// Rounds `j = 0..=ceil(log2 k)`.
pub fn round_count(k: u64) -> usize {
    ceil_log2(k) as usize + 1
}

impl Schedule {
    /// Default parameterization for universe `n`, sparsity `k` and
    /// accuracy `eps`, with every seed derived from `seed`.
    pub fn new(n: u64, k: u64, eps: f64, config: &SketchConfig, seed: u64) -> Result<Self> {
        Schedule::from_specs(Schedule::plan(n, k, eps, config, seed)?)
    }

    /// Resolve the per-round specs without building schemes.
    pub fn plan(n: u64, k: u64, eps: f64, config: &SketchConfig, seed: u64) -> Result<Vec<RoundSpec>> {
        config.validate()?;
        if n < 2 || k == 0 || k >= n {
            return Err(Error::Parameter(format!("need 0 < k < N (N={n}, k={k})")));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Parameter("eps must be in (0, 1)".into()));
        }
        let a = config.round_decay;
        (0..round_count(k))
            .map(|j| {
                let s = k.div_ceil(1 << j);
                let eta_ident = eps * (1.0 - a) * a.powi(j as i32);
                let eta_est = eps * a.powi(j as i32 + 1);
                plan_round(n, k, eps, j as u64, s, eta_ident, eta_est, config, seed)
            })
            .collect()
    }

    pub fn from_specs(specs: Vec<RoundSpec>) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::Parameter("schedule needs at least one round".into()));
        }
        let digest = specs_digest(&specs);
        let mut offset = 0;
        let mut rounds = Vec::with_capacity(specs.len());
        for spec in specs {
            let rp = RoundParams::from_spec(spec, offset)?;
            offset += rp.total_cells();
            rounds.push(rp);
        }
        Ok(Schedule { rounds, digest })
    }

    pub fn rounds(&self) -> &[RoundParams] {
        &self.rounds
    }

    pub fn specs(&self) -> Vec<RoundSpec> {
        self.rounds.iter().map(|r| r.spec.clone()).collect()
    }

    pub fn digest(&self) -> [u8; 32] {
        self.digest
    }

    pub fn n(&self) -> u64 {
        self.rounds[0].spec.n
    }

    pub fn k(&self) -> u64 {
        self.rounds[0].spec.k
    }

    pub fn eps(&self) -> f64 {
        self.rounds[0].spec.eps
    }

    /// Total number of measurements (cells) across all rounds.
    pub fn measurement_count(&self) -> usize {
        self.rounds.iter().map(RoundParams::total_cells).sum()
    }

    /// Inverse of the layout: which round/repetition/bucket a cell belongs to.
    pub fn cell_coord(&self, mut idx: usize) -> Option<CellCoord> {
        for (round, rp) in self.rounds.iter().enumerate() {
            let ident = rp.spec.ident_cells();
            if idx < ident {
                let side = idx % 2;
                idx /= 2;
                let bit = idx % rp.w_bits();
                idx /= rp.w_bits();
                let bucket = (idx % rp.spec.b2 as usize) as u64;
                idx /= rp.spec.b2 as usize;
                let j = idx % rp.spec.d2 as usize;
                let r = idx / rp.spec.d2 as usize;
                return Some(CellCoord::Ident { round, r, j, bucket, bit, side });
            }
            idx -= ident;
            let est = rp.spec.est_cells();
            if idx < est {
                let rep = idx / rp.spec.b_est as usize;
                let bucket = (idx % rp.spec.b_est as usize) as u64;
                return Some(CellCoord::Est { round, rep, bucket });
            }
            idx -= est;
        }
        None
    }
}

/// SHA-256 over the serialized round specs.
pub fn specs_digest(specs: &[RoundSpec]) -> [u8; 32] {
    let mut h = Sha256::new();
    for s in specs {
        h.update(s.to_bytes());
    }
    h.finalize().into()
}

#[allow(clippy::too_many_arguments)]
fn plan_round(
    n: u64,
    k: u64,
    eps: f64,
    round: u64,
    s: u64,
    eta_ident: f64,
    eta_est: f64,
    cfg: &SketchConfig,
    seed: u64,
) -> Result<RoundSpec> {
    let sf = s as f64;
    let nf = n as f64;
    let log_ratio = (nf / sf).ln().max(1.0);
    let mut b1 = next_pow2_f(cfg.c1 * sf / (eta_ident * eta_ident));
    let d1_for = |b1: u64| -> u64 {
        let spread = ((b1 as f64) / sf).ln().max(std::f64::consts::LN_2);
        (cfg.c2 / eta_ident * log_ratio / spread).ceil() as u64
    };
    let mut d1 = d1_for(b1).max(cfg.delta as u64 + 1);
    while b1 <= d1 {
        b1 *= 2;
        d1 = d1_for(b1).max(cfg.delta as u64 + 1);
    }
    let w_pv = b1.trailing_zeros() as u8;
    if w_pv > crate::ffield::gf::MAX_W {
        return Err(Error::Parameter("first-layer width exceeds supported field size".into()));
    }
    let pv_seed = prf(seed, 0x5eed, round, 4);
    // Raise d1 until the list-decoding conditions can be met.
    let pv = loop {
        if b1 <= d1 {
            return Err(Error::Parameter(format!(
                "no feasible list-decoding parameters below d1 = {d1} for B1 = {b1}"
            )));
        }
        match PVParams::design(n, w_pv, d1 as usize, cfg.upfal_alpha, cfg.bfs_c, pv_seed) {
            Ok(pv) => break pv,
            Err(Error::Parameter(_)) => d1 += 1,
            Err(e) => return Err(e),
        }
    };
    let b2 = (cfg.c3 * sf / eta_ident).ceil().max(1.0) as u64;
    let beta = (pv.m_vars() + 1 + cfg.delta) * w_pv as usize;
    let redundancy = (cfg.c4 * ((b1 as f64) / sf).log2()).ceil().max(2.0) as usize;
    // The inner field must hold d2 evaluation points; widen until stable.
    let mut inner_w = 8usize;
    let (msg_len, d2) = loop {
        let msg_len = beta.div_ceil(inner_w);
        let d2 = msg_len + redundancy;
        if (d2 as u64) < (1u64 << inner_w) {
            break (msg_len, d2);
        }
        inner_w += 1;
    };
    let b_est = (cfg.c5 * sf / eta_est).ceil().max(1.0) as u64;
    let d_est = (cfg.c6 / eta_est * log_ratio).ceil().max(1.0) as u64;
    let heavy_count = ((cfg.c_heavy * sf / eta_ident).ceil() as u64).clamp(1, b1);
    let d1f = d1 as f64;
    let bfs_depth = (cfg.bfs_c * d1f.ln() / (cfg.delta as f64).ln()).ceil().max(1.0) as u64;
    let bfs_cap = (d1f.powf(cfg.bfs_c).floor() as u64).max(1);
    let agreement = pv.agreement(cfg.upfal_alpha) as u64;
    let candidate_cap = (cfg.c7 * sf / eps * d1f).ceil() as u64;
    Ok(RoundSpec {
        n,
        k,
        eps,
        round,
        s,
        eta_ident,
        eta_est,
        b1,
        d1,
        b2,
        d2: d2 as u64,
        b_est,
        d_est,
        delta: cfg.delta as u64,
        hash_seed: prf(seed, 0x5eed, round, 1),
        est_seed: prf(seed, 0x5eed, round, 2),
        graph_seed: prf(seed, 0x5eed, round, 3),
        pv_h: pv.h() as u64,
        pv_m: pv.m_vars() as u64,
        pv_dx: pv.d_x() as u64,
        pv_modulus: pv.modulus().coeffs().to_vec(),
        inner_w: inner_w as u64,
        inner_msg_len: msg_len as u64,
        heavy_count,
        bfs_depth,
        bfs_cap,
        agreement,
        candidate_cap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schedule() -> Schedule {
        Schedule::new(1 << 12, 4, 0.3, &SketchConfig::default(), 7).unwrap()
    }

    #[test]
    fn rounds_and_budgets() {
        let s = schedule();
        assert_eq!(s.rounds().len(), 3);
        let sizes: Vec<u64> = s.rounds().iter().map(|r| r.spec.s).collect();
        assert_eq!(sizes, vec![4, 2, 1]);
        for (j, r) in s.rounds().iter().enumerate() {
            let a: f64 = 0.75;
            assert!((r.spec.eta_ident - 0.3 * 0.25 * a.powi(j as i32)).abs() < 1e-15);
            assert!((r.spec.eta_est - 0.3 * a.powi(j as i32 + 1)).abs() < 1e-15);
            assert!(r.spec.b1 > r.spec.d1);
            r.pv.check_properties(0.3, 1.0).unwrap();
            assert!(r.pv.capacity() as u64 > r.spec.bfs_cap);
        }
    }

    #[test]
    fn spec_bytes_round_trip() {
        for spec in schedule().specs() {
            let bytes = spec.to_bytes();
            let (back, used) = RoundSpec::from_bytes(&bytes).unwrap();
            assert_eq!(used, bytes.len());
            assert_eq!(back, spec);
        }
        assert!(RoundSpec::from_bytes(&[0u8; 10]).is_err());
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let a = schedule();
        let b = schedule();
        assert_eq!(a.digest(), b.digest());
        let c = Schedule::new(1 << 12, 4, 0.3, &SketchConfig::default(), 8).unwrap();
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn cell_layout_is_a_bijection() {
        let s = Schedule::new(256, 2, 0.5, &SketchConfig::default(), 1).unwrap();
        let total = s.measurement_count();
        let mut seen = vec![false; total];
        for (round, rp) in s.rounds().iter().enumerate() {
            for r in 0..rp.spec.d1 as usize {
                for j in 0..rp.spec.d2 as usize {
                    for bucket in 0..rp.spec.b2 {
                        for bit in 0..rp.w_bits() {
                            for side in 0..2 {
                                let idx = rp.ident_cell(r, j, bucket, bit, side);
                                assert!(!seen[idx]);
                                seen[idx] = true;
                                assert_eq!(
                                    s.cell_coord(idx),
                                    Some(CellCoord::Ident { round, r, j, bucket, bit, side })
                                );
                            }
                        }
                    }
                }
            }
            for rep in 0..rp.spec.d_est as usize {
                for bucket in 0..rp.spec.b_est {
                    let idx = rp.est_cell(rep, bucket);
                    assert!(!seen[idx]);
                    seen[idx] = true;
                    assert_eq!(s.cell_coord(idx), Some(CellCoord::Est { round, rep, bucket }));
                }
            }
        }
        assert!(seen.iter().all(|&b| b));
        assert_eq!(s.cell_coord(total), None);
    }

    #[test]
    fn config_overrides() {
        let mut c = SketchConfig::default();
        c.set("c3", "2.5").unwrap();
        c.set("delta", "6").unwrap();
        assert_eq!((c.c3, c.delta), (2.5, 6));
        assert!(c.set("c9", "1").is_err());
        assert!(c.set("c1", "abc").is_err());
    }

    #[test]
    fn invalid_inputs() {
        let c = SketchConfig::default();
        assert!(Schedule::new(100, 0, 0.2, &c, 0).is_err());
        assert!(Schedule::new(100, 100, 0.2, &c, 0).is_err());
        assert!(Schedule::new(100, 2, 1.5, &c, 0).is_err());
    }
}
