//! Sparse signals and linear application of the sketch.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::chunk::{chunk_symbols, chunk_symbols_into, ChunkScratch};
use super::params::{RoundParams, Schedule};

/// A sparse real vector over `[0, n)`: sorted, distinct, nonzero entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    pub n: u64,
    pub entries: Vec<(u64, f64)>,
}

impl Signal {
    /// Sorts the entries and drops zeros; duplicate or out-of-range indices
    /// and non-finite values are rejected.
    pub fn new(n: u64, mut entries: Vec<(u64, f64)>) -> Result<Self> {
        entries.retain(|&(_, v)| v != 0.0);
        entries.sort_by_key(|&(i, _)| i);
        if let Some(&(i, _)) = entries.iter().find(|&&(i, _)| i >= n) {
            return Err(Error::Parameter(format!("index {i} outside universe of size {n}")));
        }
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Parameter("duplicate signal index".into()));
        }
        if entries.iter().any(|&(_, v)| !v.is_finite()) {
            return Err(Error::Parameter("signal values must be finite".into()));
        }
        Ok(Signal { n, entries })
    }

    pub fn zero(n: u64) -> Self {
        Signal { n, entries: Vec::new() }
    }

    pub fn from_dense(values: &[f64]) -> Result<Self> {
        Signal::new(
            values.len() as u64,
            values.iter().enumerate().map(|(i, &v)| (i as u64, v)).collect(),
        )
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n as usize];
        for &(i, v) in &self.entries {
            out[i as usize] = v;
        }
        out
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: u64) -> f64 {
        self.entries
            .binary_search_by_key(&i, |&(j, _)| j)
            .map_or(0.0, |p| self.entries[p].1)
    }

    pub fn l1_norm(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v.abs()).sum()
    }

    pub fn scale(&self, c: f64) -> Signal {
        Signal::new(self.n, self.entries.iter().map(|&(i, v)| (i, v * c)).collect())
            .expect("scaling keeps indices valid")
    }

    /// Entries ordered by decreasing magnitude, ties by smaller index.
    pub fn by_magnitude(&self) -> Vec<(u64, f64)> {
        let mut e = self.entries.clone();
        e.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
        e
    }

    /// The `k` largest-magnitude entries.
    pub fn top(&self, k: usize) -> Signal {
        let mut e = self.by_magnitude();
        e.truncate(k);
        Signal::new(self.n, e).expect("subset of a valid signal")
    }

    /// `||x - x_{(k)}||_1`, the l1 mass outside the top `k` entries.
    pub fn tail_norm(&self, k: usize) -> f64 {
        self.by_magnitude().iter().skip(k).map(|&(_, v)| v.abs()).sum()
    }

    /// `||self - other||_1`.
    pub fn l1_distance(&self, other: &Signal) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut p, mut q, mut acc) = (0, 0, 0.0);
        while p < a.len() || q < b.len() {
            match (a.get(p), b.get(q)) {
                (Some(&(i, u)), Some(&(j, v))) if i == j => {
                    acc += (u - v).abs();
                    p += 1;
                    q += 1;
                }
                (Some(&(i, u)), Some(&(j, _))) if i < j => {
                    acc += u.abs();
                    p += 1;
                }
                (Some(&(_, u)), None) => {
                    acc += u.abs();
                    p += 1;
                }
                (_, Some(&(_, v))) => {
                    acc += v.abs();
                    q += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        acc
    }
}

/// Measurement vector tagged with the digest of the schedule that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Sketch {
    pub digest: [u8; 32],
    pub values: Vec<f64>,
}

impl Sketch {
    pub fn zeros(schedule: &Schedule) -> Self {
        Sketch { digest: schedule.digest(), values: vec![0.0; schedule.measurement_count()] }
    }

    fn check(&self, schedule: &Schedule) -> Result<()> {
        if self.digest != schedule.digest() {
            return Err(Error::DigestMismatch);
        }
        if self.values.len() != schedule.measurement_count() {
            return Err(Error::Format(format!(
                "sketch has {} values, schedule expects {}",
                self.values.len(),
                schedule.measurement_count()
            )));
        }
        Ok(())
    }

    /// Streaming update `x_i += v`.
    pub fn update(&mut self, schedule: &Schedule, i: u64, v: f64) -> Result<()> {
        self.check(schedule)?;
        if i >= schedule.n() {
            return Err(Error::Parameter(format!("index {i} outside universe")));
        }
        for rp in schedule.rounds() {
            let symbols = chunk_symbols(i, rp)?;
            for (r, row) in symbols.iter().enumerate() {
                let bucket1 = rp.two_layer.outer(r, i);
                for (j, &sym) in row.iter().enumerate() {
                    let c = rp.two_layer.inner(r, j, bucket1);
                    for bit in 0..rp.w_bits() {
                        let side = (sym >> bit & 1) as usize;
                        self.values[rp.ident_cell(r, j, c, bit, side)] += v;
                    }
                }
            }
            for rep in 0..rp.spec.d_est as usize {
                self.values[rp.est_cell(rep, rp.est.hash(rep, i))] += v;
            }
        }
        Ok(())
    }
}

const BLOCK: usize = 256;

/// Add `scale * x` into one round's cells. Every cell receives its
/// contributions in ascending index order, matching repeated
/// [`Sketch::update`] calls bit for bit.
pub fn add_round(rp: &RoundParams, x: &Signal, scale: f64, values: &mut [f64]) -> Result<()> {
    let d1 = rp.spec.d1 as usize;
    let d2 = rp.spec.d2 as usize;
    let w = rp.w_bits();
    let mut scratch = ChunkScratch::default();
    let mut buckets = vec![0u64; BLOCK * d1];
    let mut symbols = vec![0u32; BLOCK * d1 * d2];
    for block in x.entries.chunks(BLOCK) {
        for (k, &(i, _)) in block.iter().enumerate() {
            chunk_symbols_into(i, rp, &mut scratch, &mut symbols[k * d1 * d2..(k + 1) * d1 * d2])?;
            buckets[k * d1..(k + 1) * d1].copy_from_slice(scratch.buckets());
        }
        for r in 0..d1 {
            for j in 0..d2 {
                let base = rp.ident_cell(r, j, 0, 0, 0);
                for (k, &(_, v)) in block.iter().enumerate() {
                    let v = v * scale;
                    let c = rp.two_layer.inner(r, j, buckets[k * d1 + r]) as usize;
                    let sym = symbols[(k * d1 + r) * d2 + j];
                    let cell = &mut values[base + c * w * 2..][..w * 2];
                    for bit in 0..w {
                        cell[2 * bit + (sym >> bit & 1) as usize] += v;
                    }
                }
            }
        }
    }
    for rep in 0..rp.spec.d_est as usize {
        for &(i, v) in &x.entries {
            values[rp.est_cell(rep, rp.est.hash(rep, i))] += v * scale;
        }
    }
    Ok(())
}

/// Linear sketch of `x` under `schedule`.
pub fn apply_sketch(schedule: &Schedule, x: &Signal) -> Result<Sketch> {
    if x.n != schedule.n() {
        return Err(Error::Parameter(format!(
            "signal length {} does not match schedule universe {}",
            x.n,
            schedule.n()
        )));
    }
    let mut sketch = Sketch::zeros(schedule);
    for rp in schedule.rounds() {
        add_round(rp, x, 1.0, &mut sketch.values)?;
    }
    Ok(sketch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::SketchConfig;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn schedule() -> Schedule {
        Schedule::new(512, 2, 0.5, &SketchConfig::default(), 11).unwrap()
    }

    fn random_signal(n: u64, nnz: usize, seed: u64) -> Signal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let idx = rand::seq::index::sample(&mut rng, n as usize, nnz);
        Signal::new(n, idx.iter().map(|i| (i as u64, rng.gen_range(-1.0..1.0))).collect()).unwrap()
    }

    #[test]
    fn streaming_matches_batch_bit_for_bit() {
        let s = schedule();
        let x = random_signal(512, 300, 1);
        let batch = apply_sketch(&s, &x).unwrap();
        let mut stream = Sketch::zeros(&s);
        for &(i, v) in &x.entries {
            stream.update(&s, i, v).unwrap();
        }
        assert!(batch.values.iter().zip(&stream.values).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn linear_up_to_rounding() {
        let s = schedule();
        let x = random_signal(512, 40, 2);
        let y = random_signal(512, 40, 3);
        let mut sum = x.to_dense();
        for (a, b) in sum.iter_mut().zip(y.to_dense()) {
            *a = 2.0 * *a - 3.0 * b;
        }
        let lhs = apply_sketch(&s, &Signal::from_dense(&sum).unwrap()).unwrap();
        let ax = apply_sketch(&s, &x).unwrap();
        let ay = apply_sketch(&s, &y).unwrap();
        for ((l, a), b) in lhs.values.iter().zip(&ax.values).zip(&ay.values) {
            assert!((l - (2.0 * a - 3.0 * b)).abs() <= 1e-9);
        }
    }

    #[test]
    fn each_entry_hits_one_row_of_every_pair() {
        let s = schedule();
        let x = Signal::new(512, vec![(77, 1.0)]).unwrap();
        let sk = apply_sketch(&s, &x).unwrap();
        let mut expected = 0;
        for rp in s.rounds() {
            expected += rp.spec.d1 * rp.spec.d2 * rp.spec.inner_w + rp.spec.d_est;
        }
        let ones = sk.values.iter().filter(|&&v| v == 1.0).count() as u64;
        assert_eq!(ones, expected);
        assert_eq!(sk.values.iter().filter(|&&v| v != 0.0).count() as u64, expected);
    }

    #[test]
    fn signal_helpers() {
        let x = Signal::new(10, vec![(3, -2.0), (1, 5.0), (7, 0.0), (9, 2.0)]).unwrap();
        assert_eq!(x.entries, vec![(1, 5.0), (3, -2.0), (9, 2.0)]);
        assert_eq!(x.top(2).entries, vec![(1, 5.0), (3, -2.0)]);
        assert_eq!(x.tail_norm(1), 4.0);
        assert_eq!(x.get(3), -2.0);
        assert_eq!(x.get(4), 0.0);
        let y = Signal::new(10, vec![(1, 4.0), (2, 1.0)]).unwrap();
        assert_eq!(x.l1_distance(&y), 1.0 + 1.0 + 2.0 + 2.0);
        assert!(Signal::new(10, vec![(10, 1.0)]).is_err());
        assert!(Signal::new(10, vec![(1, 1.0), (1, 2.0)]).is_err());
    }

    #[test]
    fn digest_mismatch_rejected() {
        let s = schedule();
        let other = Schedule::new(512, 2, 0.5, &SketchConfig::default(), 12).unwrap();
        let mut sk = Sketch::zeros(&other);
        assert!(matches!(sk.update(&s, 1, 1.0), Err(Error::DigestMismatch)));
    }
}
