//! Per-bit measurement gadgets carried by an inner Reed-Solomon code.
//!
//! A chunk's bit string is packed into `msg_len` inner symbols (LSB-first,
//! `w` bits each) and RS-encoded to one symbol per repetition. Each bit of a
//! repetition's symbol selects which of two rows receives the signal value:
//! row 0 for bit 0, row 1 for bit 1.

use super::rs::{rs_encode, RSParams};
use crate::error::{Error, Result};

/// Pack bits LSB-first into `msg_len` symbols of `w` bits.
pub fn pack_bits(bits: &[bool], w: u8, msg_len: usize) -> Result<Vec<u32>> {
    let w = w as usize;
    if bits.len() > msg_len * w {
        return Err(Error::Parameter(format!(
            "{} bits do not fit in {msg_len} symbols of {w} bits",
            bits.len()
        )));
    }
    let mut out = vec![0u32; msg_len];
    for (k, &b) in bits.iter().enumerate() {
        if b {
            out[k / w] |= 1 << (k % w);
        }
    }
    Ok(out)
}

/// Inverse of [`pack_bits`], keeping the first `len` bits.
pub fn unpack_bits(symbols: &[u32], w: u8, len: usize) -> Vec<bool> {
    let w = w as usize;
    (0..len).map(|k| symbols[k / w] >> (k % w) & 1 == 1).collect()
}

/// Inner-code symbol carried by each repetition for this chunk.
pub fn gadget_encode_layout(chunk_bits: &[bool], inner: &RSParams) -> Result<Vec<u32>> {
    let msg = pack_bits(chunk_bits, inner.w(), inner.msg_len())?;
    rs_encode(&msg, inner)
}

/// Read one bit from a gadget row pair: 0 if `|a| > |b|`, otherwise 1.
pub fn gadget_decode_bit(a: f64, b: f64) -> bool {
    a.abs() <= b.abs()
}

/// Read a `w`-bit symbol from `w` consecutive row pairs `[a0, b0, a1, b1, ...]`.
pub fn gadget_decode_symbol(pairs: &[f64], w: u8) -> u32 {
    (0..w as usize).fold(0u32, |acc, l| {
        acc | (gadget_decode_bit(pairs[2 * l], pairs[2 * l + 1]) as u32) << l
    })
}

/// Table-driven form of [`gadget_encode_layout`]. Encoding is GF(2)-linear
/// in the message bits, so each 8-bit slice of the bit string selects one
/// of 256 precomputed codewords and the results are XORed.
#[derive(Debug, Clone)]
pub struct BitEncoder {
    bits: usize,
    code_len: usize,
    table: Vec<u32>,
}

impl BitEncoder {
    pub fn new(bits: usize, inner: &RSParams) -> Result<Self> {
        let n = inner.code_len();
        let slices = bits.div_ceil(8);
        let mut table = vec![0u32; slices * 256 * n];
        for s in 0..slices {
            // Codewords of the single bits in this slice.
            let mut units = Vec::with_capacity(8);
            for b in 0..8 {
                let pos = s * 8 + b;
                let mut v = vec![false; bits];
                if pos < bits {
                    v[pos] = true;
                }
                units.push(gadget_encode_layout(&v, inner)?);
            }
            for byte in 1..256usize {
                let low = byte & byte.wrapping_neg();
                let prev = (byte ^ low) * n;
                let unit = &units[low.trailing_zeros() as usize];
                let base = (s * 256) * n;
                for k in 0..n {
                    table[base + byte * n + k] = table[base + prev + k] ^ unit[k];
                }
            }
        }
        Ok(BitEncoder { bits, code_len: n, table })
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    /// Encode a bit string given as LSB-first bytes; writes `code_len` symbols.
    pub fn encode_bytes(&self, bytes: &[u8], out: &mut [u32]) {
        let n = self.code_len;
        out[..n].fill(0);
        for (s, &byte) in bytes.iter().enumerate().take(self.bits.div_ceil(8)) {
            if byte != 0 {
                self.xor_row(s, byte, out);
            }
        }
    }

    /// Encode a bit string given as LSB-first 64-bit words.
    pub fn encode_words(&self, words: &[u64], out: &mut [u32]) {
        out[..self.code_len].fill(0);
        for s in 0..self.bits.div_ceil(8) {
            let byte = (words[s / 8] >> (8 * (s % 8))) as u8;
            if byte != 0 {
                self.xor_row(s, byte, out);
            }
        }
    }

    #[inline]
    fn xor_row(&self, slice: usize, byte: u8, out: &mut [u32]) {
        let n = self.code_len;
        let row = &self.table[(slice * 256 + byte as usize) * n..][..n];
        for (o, &t) in out.iter_mut().zip(row) {
            *o ^= t;
        }
    }

    pub fn encode(&self, bits: &[bool]) -> Vec<u32> {
        let mut bytes = vec![0u8; self.bits.div_ceil(8)];
        for (k, &b) in bits.iter().enumerate().take(self.bits) {
            bytes[k / 8] |= (b as u8) << (k % 8);
        }
        let mut out = vec![0; self.code_len];
        self.encode_bytes(&bytes, &mut out);
        out
    }
}
