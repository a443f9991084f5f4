//! Binary extension fields GF(2^w) for 1 <= w <= 32.
//!
//! Elements are stored as `u32` with bit `i` holding the coefficient of
//! `x^i`. Each width uses a fixed reduction polynomial: the numerically
//! smallest irreducible polynomial of degree `w` over GF(2). Widths up to 16
//! multiply through log/antilog tables; wider fields use carry-less
//! multiplication followed by reduction. Both paths are always available so
//! they can be cross-checked.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Largest supported field width.
pub const MAX_W: u8 = 32;

/// Widths at or below this use log/antilog tables.
pub const TABLE_MAX_W: u8 = 16;

/// Carry-less product of two polynomials over GF(2) of degree < 32.
#[inline]
pub(crate) fn clmul(a: u64, b: u64) -> u64 {
    let mut acc = 0u64;
    let mut a = a;
    let mut b = b;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        a <<= 1;
        b >>= 1;
    }
    acc
}

#[inline]
fn degree2(p: u64) -> i32 {
    63 - p.leading_zeros() as i32
}

/// Remainder of `a` modulo `m` in GF(2)[x].
#[inline]
pub(crate) fn polymod2(mut a: u64, m: u64) -> u64 {
    let dm = degree2(m);
    while a != 0 && degree2(a) >= dm {
        a ^= m << (degree2(a) - dm);
    }
    a
}

fn gcd2(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = polymod2(a, b);
        a = b;
        b = r;
    }
    a
}

fn mulmod2(a: u64, b: u64, m: u64) -> u64 {
    // Operands are reduced, so deg(a), deg(b) < 32 and the product fits.
    polymod2(clmul(a, b), m)
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Rabin irreducibility test for a degree-`w` polynomial over GF(2).
pub(crate) fn is_irreducible_gf2(p: u64) -> bool {
    let w = degree2(p);
    if w < 1 {
        return false;
    }
    if w == 1 {
        return true;
    }
    // x^(2^j) mod p for j = 0..=w
    let mut frob = Vec::with_capacity(w as usize + 1);
    let mut t = polymod2(0b10, p);
    frob.push(t);
    for _ in 0..w {
        t = mulmod2(t, t, p);
        frob.push(t);
    }
    if frob[w as usize] != polymod2(0b10, p) {
        return false;
    }
    for q in prime_factors(w as u64) {
        let j = (w as u64 / q) as usize;
        let g = gcd2(p, frob[j] ^ 0b10);
        if g != 1 {
            return false;
        }
    }
    true
}

/// The fixed reduction polynomial for GF(2^w): the numerically smallest
/// irreducible of degree `w`, including the leading bit.
pub fn reduction_poly(w: u8) -> u64 {
    assert!((1..=MAX_W).contains(&w), "field width out of range");
    let lo = 1u64 << w;
    (lo..lo << 1)
        .find(|&p| is_irreducible_gf2(p))
        .expect("irreducible polynomials exist in every degree")
}

/// A binary field GF(2^w) with precomputed tables where applicable.
#[derive(Debug)]
pub struct GfField {
    w: u8,
    modulus: u64,
    mask: u32,
    generator: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl PartialEq for GfField {
    fn eq(&self, other: &Self) -> bool {
        self.w == other.w
    }
}

impl Eq for GfField {}

static FIELDS: [OnceLock<GfField>; MAX_W as usize + 1] = [const { OnceLock::new() }; MAX_W as usize + 1];

impl GfField {
    /// Shared, lazily built field of width `w`.
    pub fn get(w: u8) -> Result<&'static GfField> {
        if !(1..=MAX_W).contains(&w) {
            return Err(Error::Parameter(format!("field width {w} not in 1..=32")));
        }
        Ok(FIELDS[w as usize].get_or_init(|| GfField::build(w)))
    }

    fn build(w: u8) -> GfField {
        let modulus = reduction_poly(w);
        let mask = if w == 32 { u32::MAX } else { (1u32 << w) - 1 };
        let mut f = GfField {
            w,
            modulus,
            mask,
            generator: 0,
            exp: Vec::new(),
            log: Vec::new(),
        };
        f.generator = f.find_generator();
        if w <= TABLE_MAX_W {
            let order = (1usize << w) - 1;
            let mut exp = vec![0u32; 2 * order.max(1)];
            let mut log = vec![0u32; 1usize << w];
            let mut x = 1u32;
            for (e, slot) in exp.iter_mut().take(order).enumerate() {
                *slot = x;
                log[x as usize] = e as u32;
                x = f.mul_clmul(x, f.generator);
            }
            for e in order..2 * order {
                exp[e] = exp[e - order];
            }
            f.exp = exp;
            f.log = log;
        }
        f
    }

    fn find_generator(&self) -> u32 {
        let order = self.order();
        if order == 1 {
            return 1;
        }
        let factors = prime_factors(order);
        (2..=self.mask)
            .find(|&g| factors.iter().all(|&p| self.pow_clmul(g, order / p) != 1))
            .expect("multiplicative group is cyclic")
    }

    pub fn w(&self) -> u8 {
        self.w
    }

    /// Reduction polynomial including the leading `x^w` term.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Number of elements, `2^w`.
    pub fn size(&self) -> u64 {
        1u64 << self.w
    }

    /// Order of the multiplicative group, `2^w - 1`.
    pub fn order(&self) -> u64 {
        self.size() - 1
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    /// Smallest primitive element.
    pub fn generator(&self) -> u32 {
        self.generator
    }

    pub fn has_tables(&self) -> bool {
        !self.exp.is_empty()
    }

    #[inline]
    pub fn contains(&self, a: u32) -> bool {
        a & !self.mask == 0
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if self.exp.is_empty() {
            self.mul_clmul(a, b)
        } else {
            self.mul_table(a, b)
        }
    }

    /// Table multiply; panics if the field has no tables.
    #[inline]
    pub fn mul_table(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    #[inline]
    pub fn mul_clmul(&self, a: u32, b: u32) -> u32 {
        polymod2(clmul(a as u64, b as u64), self.modulus) as u32
    }

    #[inline]
    pub fn square(&self, a: u32) -> u32 {
        self.mul(a, a)
    }

    /// `dst[j] += c * src[j]` over the shorter of the two slices.
    pub fn axpy(&self, dst: &mut [u32], src: &[u32], c: u32) {
        if c == 0 {
            return;
        }
        if self.exp.is_empty() {
            for (d, &s) in dst.iter_mut().zip(src) {
                *d ^= self.mul_clmul(s, c);
            }
            return;
        }
        let lc = self.log[c as usize];
        for (d, &s) in dst.iter_mut().zip(src) {
            if s != 0 {
                *d ^= self.exp[(self.log[s as usize] + lc) as usize];
            }
        }
    }

    fn pow_clmul(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a;
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_clmul(acc, base);
            }
            base = self.mul_clmul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn pow(&self, a: u32, e: u64) -> u32 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        if self.has_tables() {
            let l = self.log[a as usize] as u64;
            return self.exp[((l * (e % self.order())) % self.order()) as usize];
        }
        self.pow_clmul(a, e)
    }

    /// Multiplicative inverse; `None` for zero.
    #[inline]
    pub fn inv(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        if self.has_tables() {
            let order = self.order() as u32;
            let l = self.log[a as usize];
            return Some(self.exp[((order - l) % order) as usize]);
        }
        Some(self.pow_clmul(a, self.order() - 1))
    }

    #[inline]
    pub fn div(&self, a: u32, b: u32) -> Option<u32> {
        self.inv(b).map(|ib| self.mul(a, ib))
    }

    /// Discrete log to the field generator; `None` for zero or untabled fields.
    pub fn log(&self, a: u32) -> Option<u32> {
        if a == 0 || !self.has_tables() {
            return None;
        }
        Some(self.log[a as usize])
    }

    /// Absolute trace to GF(2): `a + a^2 + ... + a^(2^(w-1))`.
    pub fn trace(&self, a: u32) -> u32 {
        let mut t = a;
        let mut acc = a;
        for _ in 1..self.w {
            t = self.square(t);
            acc ^= t;
        }
        acc
    }
}

/// An element of GF(2^w) carrying its width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u32,
    w: u8,
}

impl FieldElement {
    pub fn new(value: u32, w: u8) -> Result<Self> {
        let field = GfField::get(w)?;
        if !field.contains(value) {
            return Err(Error::Parameter(format!("value {value:#x} does not fit in {w} bits")));
        }
        Ok(FieldElement { value, w })
    }

    pub fn zero(w: u8) -> Self {
        FieldElement { value: 0, w }
    }

    pub fn one(w: u8) -> Self {
        FieldElement { value: 1, w }
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn w(self) -> u8 {
        self.w
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn field(self) -> &'static GfField {
        GfField::get(self.w).expect("width validated at construction")
    }
}

fn same_width(a: FieldElement, b: FieldElement) -> Result<u8> {
    if a.w != b.w {
        return Err(Error::Parameter(format!(
            "mismatched field widths {} and {}",
            a.w, b.w
        )));
    }
    Ok(a.w)
}

pub fn gf_add(a: FieldElement, b: FieldElement) -> Result<FieldElement> {
    let w = same_width(a, b)?;
    Ok(FieldElement { value: a.value ^ b.value, w })
}

pub fn gf_mul(a: FieldElement, b: FieldElement) -> Result<FieldElement> {
    let w = same_width(a, b)?;
    Ok(FieldElement {
        value: a.field().mul(a.value, b.value),
        w,
    })
}

pub fn gf_inv(a: FieldElement) -> Result<FieldElement> {
    let value = a.field().inv(a.value).ok_or(Error::DivisionByZero { w: a.w })?;
    Ok(FieldElement { value, w: a.w })
}
