//! One- and two-layer hashing schemes backed by a counter-based PRF.
//!
//! Every hash value is recomputed on demand from `(seed, layer, rep, x)`, so
//! schemes take O(1) memory and are reproducible for any universe size.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Keyed 64-bit pseudorandom value.
#[inline]
pub fn prf(seed: u64, layer: u64, rep: u64, x: u64) -> u64 {
    let k = mix64(seed ^ layer.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let k = mix64(k ^ rep.wrapping_add(0x632b_e59b_d9b4_e019));
    mix64(k ^ x.wrapping_mul(0xd6e8_feb8_6659_fd93))
}

/// Map a 64-bit value onto `[0, b)` by multiply-high.
#[inline]
pub fn reduce(h: u64, b: u64) -> u64 {
    ((h as u128 * b as u128) >> 64) as u64
}

const LAYER_ONE: u64 = 1;
const LAYER_OUTER: u64 = 2;
const LAYER_INNER: u64 = 3;

/// A bipartite graph with left side `[0, left_size)` and `degree` edges per
/// left node, one per repetition.
pub trait Bipartite: Sync {
    fn left_size(&self) -> u64;
    fn degree(&self) -> usize;
    /// Right endpoints of `x`'s edges, cleared and written into `out`.
    fn neighbors(&self, x: u64, out: &mut Vec<u64>);
}

/// `d` independent hash functions `[N] -> [B]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneLayerScheme {
    pub n: u64,
    pub b: u64,
    pub d: usize,
    pub seed: u64,
}

impl OneLayerScheme {
    #[inline]
    pub fn hash(&self, rep: usize, x: u64) -> u64 {
        reduce(prf(self.seed, LAYER_ONE, rep as u64, x), self.b)
    }
}

impl Bipartite for OneLayerScheme {
    fn left_size(&self) -> u64 {
        self.n
    }

    fn degree(&self) -> usize {
        self.d
    }

    fn neighbors(&self, x: u64, out: &mut Vec<u64>) {
        out.clear();
        out.extend((0..self.d).map(|r| r as u64 * self.b + self.hash(r, x)));
    }
}

pub fn gen_one_layer(n: u64, b: u64, d: usize, seed: u64) -> Result<OneLayerScheme> {
    if n == 0 || b == 0 || d == 0 {
        return Err(Error::Parameter("one-layer scheme sizes must be positive".into()));
    }
    Ok(OneLayerScheme { n, b, d, seed })
}

/// Outer maps `g_r: [N] -> [B1]` for `r < d1`, inner maps
/// `h_{r,j}: [B1] -> [B2]` for `j < d2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoLayerScheme {
    pub n: u64,
    pub b1: u64,
    pub d1: usize,
    pub b2: u64,
    pub d2: usize,
    pub seed: u64,
}

impl TwoLayerScheme {
    /// First-layer bucket `g_r(x)`.
    #[inline]
    pub fn outer(&self, r: usize, x: u64) -> u64 {
        reduce(prf(self.seed, LAYER_OUTER, r as u64, x), self.b1)
    }

    /// Second-layer bucket `h_{r,j}(bucket)`.
    #[inline]
    pub fn inner(&self, r: usize, j: usize, bucket: u64) -> u64 {
        let rep = (r as u64) * self.d2 as u64 + j as u64;
        reduce(prf(self.seed, LAYER_INNER, rep, bucket), self.b2)
    }

    #[inline]
    pub fn hash(&self, r: usize, j: usize, x: u64) -> u64 {
        self.inner(r, j, self.outer(r, x))
    }
}

impl Bipartite for TwoLayerScheme {
    fn left_size(&self) -> u64 {
        self.n
    }

    fn degree(&self) -> usize {
        self.d1 * self.d2
    }

    fn neighbors(&self, x: u64, out: &mut Vec<u64>) {
        out.clear();
        for r in 0..self.d1 {
            let b = self.outer(r, x);
            for j in 0..self.d2 {
                let rep = (r * self.d2 + j) as u64;
                out.push(rep * self.b2 + self.inner(r, j, b));
            }
        }
    }
}

pub fn gen_two_layer(n: u64, b1: u64, d1: usize, b2: u64, d2: usize, seed: u64) -> Result<TwoLayerScheme> {
    if n == 0 || b1 == 0 || d1 == 0 || b2 == 0 || d2 == 0 {
        return Err(Error::Parameter("two-layer scheme sizes must be positive".into()));
    }
    Ok(TwoLayerScheme { n, b1, d1, b2, d2, seed })
}

/// A bipartite graph given by an explicit table, `table[x][rep]` in `[0, b)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitScheme {
    pub b: u64,
    pub table: Vec<Vec<u64>>,
}

impl Bipartite for ExplicitScheme {
    fn left_size(&self) -> u64 {
        self.table.len() as u64
    }

    fn degree(&self) -> usize {
        self.table.first().map_or(0, Vec::len)
    }

    fn neighbors(&self, x: u64, out: &mut Vec<u64>) {
        out.clear();
        out.extend(
            self.table[x as usize]
                .iter()
                .enumerate()
                .map(|(r, &h)| r as u64 * self.b + h),
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_bucket() {
        let s = gen_one_layer(100, 1, 1, 7).unwrap();
        assert!((0..100).all(|x| s.hash(0, x) == 0));
    }

    #[test]
    fn deterministic() {
        let a = gen_two_layer(1000, 64, 4, 16, 3, 9).unwrap();
        let b = gen_two_layer(1000, 64, 4, 16, 3, 9).unwrap();
        for x in 0..1000 {
            assert_eq!(a.hash(3, 2, x), b.hash(3, 2, x));
        }
        let c = gen_two_layer(1000, 64, 4, 16, 3, 10).unwrap();
        assert!((0..1000).any(|x| a.hash(0, 0, x) != c.hash(0, 0, x)));
    }

    #[test]
    fn bucket_loads_within_four_sigma() {
        // Binomial(N, 1/B) loads.
        let (n, b) = (1u64 << 15, 1u64 << 7);
        let mean = n as f64 / b as f64;
        let sigma = (mean * (1.0 - 1.0 / b as f64)).sqrt();
        for seed in 0..3 {
            let s = gen_one_layer(n, b, 2, seed).unwrap();
            for rep in 0..2 {
                let mut load = vec![0u32; b as usize];
                for x in 0..n {
                    load[s.hash(rep, x) as usize] += 1;
                }
                for &l in &load {
                    assert!((l as f64 - mean).abs() <= 4.0 * sigma, "load {l}");
                }
            }
        }
    }

    #[test]
    fn inner_maps_depend_only_on_bucket() {
        let s = gen_two_layer(5000, 8, 2, 32, 3, 1).unwrap();
        for x in 0..5000 {
            for y in [x + 1, x * 3 + 7] {
                if s.outer(1, x) == s.outer(1, y) {
                    assert_eq!(s.hash(1, 2, x), s.hash(1, 2, y));
                }
            }
        }
    }

    #[test]
    fn neighbors_are_tagged_by_repetition() {
        let s = gen_two_layer(10, 4, 2, 5, 3, 0).unwrap();
        let mut out = Vec::new();
        s.neighbors(3, &mut out);
        assert_eq!(out.len(), 6);
        for (rep, &v) in out.iter().enumerate() {
            assert_eq!(v / 5, rep as u64);
        }
    }
}
