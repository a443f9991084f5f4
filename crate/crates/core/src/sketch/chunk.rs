//! Chunk messages: a PV symbol plus the first-layer buckets of the index's
//! neighbors in the linking graph.

use crate::codes::{pv_encode, PVSymbol};
use crate::error::Result;

use super::params::RoundParams;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Chunk {
    pub pv: PVSymbol,
    /// `links[j]` is the first-layer bucket of the index in row `v_j(r)`.
    pub links: Vec<u64>,
}

impl Chunk {
    /// Bit layout `[x, ys[0..m], links[0..delta]]`, `w_pv` bits each, LSB first.
    pub fn to_bits(&self, w_pv: u32) -> Vec<bool> {
        let words = std::iter::once(self.pv.x as u64)
            .chain(self.pv.ys.iter().map(|&y| y as u64))
            .chain(self.links.iter().copied());
        words
            .flat_map(|v| (0..w_pv).map(move |b| v >> b & 1 == 1))
            .collect()
    }

    pub fn from_bits(bits: &[bool], w_pv: u32, m_vars: usize, delta: usize) -> Chunk {
        let w = w_pv as usize;
        let word = |k: usize| -> u64 {
            bits[k * w..(k + 1) * w]
                .iter()
                .enumerate()
                .fold(0u64, |acc, (b, &set)| acc | (set as u64) << b)
        };
        Chunk {
            pv: PVSymbol {
                x: word(0) as u32,
                ys: (1..=m_vars).map(|k| word(k) as u32).collect(),
            },
            links: (0..delta).map(|j| word(1 + m_vars + j)).collect(),
        }
    }
}

/// Chunks of index `i` for every row of the round.
pub fn make_chunks(i: u64, rp: &RoundParams) -> Result<Vec<Chunk>> {
    let symbols = pv_encode(i, &rp.pv)?;
    Ok(symbols
        .into_iter()
        .enumerate()
        .map(|(r, pv)| Chunk {
            pv,
            links: rp
                .graph
                .neighbors(r)
                .iter()
                .map(|&v| rp.two_layer.outer(v, i))
                .collect(),
        })
        .collect())
}

#[inline]
fn put_bits(words: &mut [u64], offset: usize, value: u64) {
    let (q, r) = (offset / 64, offset % 64);
    words[q] |= value << r;
    if r != 0 && q + 1 < words.len() {
        words[q + 1] |= value >> (64 - r);
    }
}

/// Reusable buffers for [`chunk_symbols_into`].
#[derive(Debug, Default)]
pub struct ChunkScratch {
    buckets: Vec<u64>,
    words: Vec<u64>,
}

/// Inner-code symbols of index `i` for every row, written row-major into
/// `out[r * d2 + j]`. `buckets[r]` receives the first-layer bucket `g_r(i)`.
pub fn chunk_symbols_into(i: u64, rp: &RoundParams, scratch: &mut ChunkScratch, out: &mut [u32]) -> Result<()> {
    let d1 = rp.spec.d1 as usize;
    let d2 = rp.spec.d2 as usize;
    let w = rp.spec.w_pv() as usize;
    let symbols = pv_encode(i, &rp.pv)?;
    scratch.buckets.clear();
    scratch.buckets.extend((0..d1).map(|r| rp.two_layer.outer(r, i)));
    scratch.words.resize(rp.spec.beta().div_ceil(64) + 1, 0);
    for (r, pv) in symbols.iter().enumerate() {
        let words = &mut scratch.words;
        words.fill(0);
        put_bits(words, 0, pv.x as u64);
        let mut offset = w;
        for &y in &pv.ys {
            put_bits(words, offset, y as u64);
            offset += w;
        }
        for &v in rp.graph.neighbors(r) {
            put_bits(words, offset, scratch.buckets[v]);
            offset += w;
        }
        rp.encoder.encode_words(words, &mut out[r * d2..(r + 1) * d2]);
    }
    Ok(())
}

/// First-layer buckets computed by the last [`chunk_symbols_into`] call.
impl ChunkScratch {
    pub fn buckets(&self) -> &[u64] {
        &self.buckets
    }
}

/// Inner-code symbols of index `i`, `out[r][j]` for row `r` and repetition `j`.
pub fn chunk_symbols(i: u64, rp: &RoundParams) -> Result<Vec<Vec<u32>>> {
    let d2 = rp.spec.d2 as usize;
    let mut flat = vec![0u32; rp.spec.d1 as usize * d2];
    chunk_symbols_into(i, rp, &mut ChunkScratch::default(), &mut flat)?;
    Ok(flat.chunks(d2).map(<[u32]>::to_vec).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::{Schedule, SketchConfig};

    #[test]
    fn bits_round_trip() {
        let c = Chunk {
            pv: PVSymbol { x: 5, ys: vec![1023, 0, 77] },
            links: vec![3, 900, 1, 0],
        };
        let bits = c.to_bits(10);
        assert_eq!(bits.len(), 8 * 10);
        assert_eq!(Chunk::from_bits(&bits, 10, 3, 4), c);
    }

    #[test]
    fn chunks_point_at_neighbor_buckets() {
        let s = Schedule::new(1 << 10, 2, 0.4, &SketchConfig::default(), 3).unwrap();
        let rp = &s.rounds()[0];
        let chunks = make_chunks(123, rp).unwrap();
        assert_eq!(chunks.len(), rp.spec.d1 as usize);
        for (r, c) in chunks.iter().enumerate() {
            assert_eq!(c.pv, rp.pv.symbol(123, r).unwrap());
            for (j, &v) in rp.graph.neighbors(r).iter().enumerate() {
                assert_eq!(c.links[j], rp.two_layer.outer(v, 123));
            }
            let bits = c.to_bits(rp.spec.w_pv());
            assert_eq!(bits.len(), rp.spec.beta());
            let direct = crate::codes::gadget_encode_layout(&bits, &rp.inner).unwrap();
            assert_eq!(chunk_symbols(123, rp).unwrap()[r], direct);
        }
    }
}
