//! Arithmetic in GF(2^w)[x]/E(x) with dense residues, plus root finding for
//! polynomials whose coefficients live in that field.

use rand::SeedableRng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::gf::GfField;
use super::poly::Poly;
use super::quotient::QuotientRing;
use crate::error::{Error, Result};

/// Residue of degree `< e`, stored as exactly `e` base-field coefficients.
pub type ExtElem = Vec<u32>;

/// The field GF(2^w)[x]/E(x) for an irreducible monic `E` of degree `e`.
#[derive(Debug, Clone)]
pub struct ExtField {
    ring: QuotientRing,
    base: &'static GfField,
    modulus: Vec<u32>,
    e: usize,
}

impl ExtField {
    /// Irreducibility of `modulus` is the caller's responsibility.
    pub fn new(modulus: &Poly) -> Result<Self> {
        let ring = QuotientRing::new(modulus.clone())?;
        let e = ring.degree();
        Ok(ExtField {
            base: modulus.field(),
            modulus: modulus.coeffs().to_vec(),
            e,
            ring,
        })
    }

    pub fn base(&self) -> &'static GfField {
        self.base
    }

    pub fn degree(&self) -> usize {
        self.e
    }

    pub fn modulus(&self) -> &Poly {
        self.ring.modulus()
    }

    /// log2 of the field size.
    pub fn bits(&self) -> u32 {
        self.base.w() as u32 * self.e as u32
    }

    pub fn zero(&self) -> ExtElem {
        vec![0; self.e]
    }

    pub fn one(&self) -> ExtElem {
        let mut v = self.zero();
        v[0] = 1;
        v
    }

    pub fn is_zero(a: &[u32]) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub fn from_poly(&self, p: &Poly) -> ExtElem {
        let r = self.ring.reduce(p);
        let mut v = r.into_coeffs();
        v.resize(self.e, 0);
        v
    }

    pub fn to_poly(&self, a: &[u32]) -> Poly {
        Poly::from_coeffs(self.base, a.to_vec())
    }

    /// Element whose coefficients are the base-2^w digits of `idx`.
    pub fn from_index(&self, mut idx: u64) -> ExtElem {
        let w = self.base.w() as u32;
        let mut v = self.zero();
        for c in v.iter_mut() {
            *c = (idx & self.base.mask() as u64) as u32;
            idx = idx.checked_shr(w).unwrap_or(0);
        }
        v
    }

    pub fn to_index(&self, a: &[u32]) -> u64 {
        let w = self.base.w() as u32;
        a.iter()
            .rev()
            .fold(0u64, |acc, &c| acc.checked_shl(w).unwrap_or(0) | c as u64)
    }

    pub fn add(&self, a: &[u32], b: &[u32]) -> ExtElem {
        a.iter().zip(b).map(|(x, y)| x ^ y).collect()
    }

    pub fn mul(&self, a: &[u32], b: &[u32]) -> ExtElem {
        let f = self.base;
        let e = self.e;
        let mut prod = vec![0u32; 2 * e - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] ^= f.mul(x, y);
            }
        }
        // Reduce by the monic modulus from the top down.
        for k in (e..prod.len()).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            for (j, &m) in self.modulus[..e].iter().enumerate() {
                prod[k - e + j] ^= f.mul(c, m);
            }
            prod[k] = 0;
        }
        prod.truncate(e);
        prod
    }

    pub fn square(&self, a: &[u32]) -> ExtElem {
        self.mul(a, a)
    }

    pub fn pow(&self, a: &[u32], mut e: u64) -> ExtElem {
        let mut acc = self.one();
        let mut base = a.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.square(&base);
            }
        }
        acc
    }

    pub fn inv(&self, a: &[u32]) -> Option<ExtElem> {
        if Self::is_zero(a) {
            return None;
        }
        let p = self.ring.inv(&self.to_poly(a))?;
        Some(self.from_poly(&p))
    }

    /// Absolute trace to GF(2): sum of `a^(2^i)` for `i < bits`.
    pub fn trace(&self, a: &[u32]) -> ExtElem {
        let mut acc = a.to_vec();
        let mut t = a.to_vec();
        for _ in 1..self.bits() {
            t = self.square(&t);
            acc = self.add(&acc, &t);
        }
        acc
    }
}

/// Polynomials over an [`ExtField`], lowest degree first, trimmed.
type EPoly = Vec<ExtElem>;

fn trim(p: &mut EPoly) {
    while p.last().is_some_and(|c| ExtField::is_zero(c)) {
        p.pop();
    }
}

fn make_monic(k: &ExtField, p: &mut EPoly) {
    if let Some(lead) = p.last() {
        let inv = k.inv(lead).expect("trimmed leading coefficient is nonzero");
        for c in p.iter_mut() {
            *c = k.mul(c, &inv);
        }
    }
}

/// Remainder of `a` modulo a monic `m`.
fn rem_monic(k: &ExtField, a: &mut EPoly, m: &EPoly) {
    let dm = m.len() - 1;
    while a.len() > dm {
        let lead = a.pop().expect("nonempty");
        if !ExtField::is_zero(&lead) {
            let off = a.len() - dm;
            for (j, mc) in m[..dm].iter().enumerate() {
                let t = k.mul(&lead, mc);
                a[off + j] = k.add(&a[off + j], &t);
            }
        }
    }
    trim(a);
}

/// Quotient of `a` by monic `m` when the division is exact.
fn div_monic(k: &ExtField, a: &EPoly, m: &EPoly) -> EPoly {
    let dm = m.len() - 1;
    let mut rem = a.clone();
    let mut quot = vec![k.zero(); a.len() - dm];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dm].clone();
        if ExtField::is_zero(&c) {
            continue;
        }
        for (j, mc) in m.iter().enumerate() {
            let t = k.mul(&c, mc);
            rem[i + j] = k.add(&rem[i + j], &t);
        }
        quot[i] = c;
    }
    trim(&mut quot);
    quot
}

fn gcd_monic(k: &ExtField, a: &EPoly, b: &EPoly) -> EPoly {
    let mut a = a.clone();
    let mut b = b.clone();
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        make_monic(k, &mut b);
        rem_monic(k, &mut a, &b);
        std::mem::swap(&mut a, &mut b);
    }
    make_monic(k, &mut a);
    a
}

/// `p^2 mod m` using the Frobenius identity `(sum c_i z^i)^2 = sum c_i^2 z^(2i)`.
fn square_mod(k: &ExtField, p: &EPoly, m: &EPoly) -> EPoly {
    let mut out = vec![k.zero(); (2 * p.len()).saturating_sub(1)];
    for (i, c) in p.iter().enumerate() {
        out[2 * i] = k.square(c);
    }
    rem_monic(k, &mut out, m);
    out
}

fn add_poly(k: &ExtField, a: &EPoly, b: &EPoly) -> EPoly {
    let n = a.len().max(b.len());
    let zero = k.zero();
    let mut out: EPoly = (0..n)
        .map(|i| k.add(a.get(i).unwrap_or(&zero), b.get(i).unwrap_or(&zero)))
        .collect();
    trim(&mut out);
    out
}

/// Split a monic squarefree product of distinct linear factors.
fn split(k: &ExtField, g: EPoly, rng: &mut ChaCha8Rng, out: &mut Vec<ExtElem>) {
    match g.len() {
        0 | 1 => return,
        2 => {
            // z + c has root c in characteristic two.
            out.push(g[0].clone());
            return;
        }
        _ => {}
    }
    let bits = k.bits();
    loop {
        let beta: ExtElem = (0..k.degree())
            .map(|_| rng.gen::<u32>() & k.base().mask())
            .collect();
        if ExtField::is_zero(&beta) {
            continue;
        }
        // T(z) = sum_i (beta z)^(2^i) mod g; gcd(g, T) is the product over
        // roots a with Tr(beta a) = 0.
        let mut u: EPoly = vec![k.zero(), beta];
        rem_monic(k, &mut u, &g);
        let mut acc = u.clone();
        for _ in 1..bits {
            u = square_mod(k, &u, &g);
            acc = add_poly(k, &acc, &u);
        }
        let h = gcd_monic(k, &g, &acc);
        if h.len() > 1 && h.len() < g.len() {
            let rest = div_monic(k, &g, &h);
            split(k, h, rng, out);
            split(k, rest, rng, out);
            return;
        }
    }
}

/// Distinct roots in `K` of the polynomial with coefficients `q` (lowest
/// degree first), sorted by [`ExtField::to_index`].
pub fn factor_roots(k: &ExtField, q: &[ExtElem]) -> Result<Vec<ExtElem>> {
    let mut q: EPoly = q.to_vec();
    trim(&mut q);
    if q.is_empty() {
        return Err(Error::DegenerateInput("zero polynomial has every element as a root".into()));
    }
    if q.iter().any(|c| c.len() != k.degree()) {
        return Err(Error::Parameter("coefficient of wrong extension degree".into()));
    }
    make_monic(k, &mut q);
    if q.len() == 1 {
        return Ok(Vec::new());
    }
    // r = z^|K| mod q by repeated squaring of z.
    let mut r: EPoly = vec![k.zero(), k.one()];
    rem_monic(k, &mut r, &q);
    for _ in 0..k.bits() {
        r = square_mod(k, &r, &q);
    }
    let z: EPoly = vec![k.zero(), k.one()];
    let g = gcd_monic(k, &q, &add_poly(k, &r, &z));
    let mut rng = ChaCha8Rng::seed_from_u64(0x005e_ed0f_700f);
    let mut roots = Vec::with_capacity(g.len().saturating_sub(1));
    split(k, g, &mut rng, &mut roots);
    roots.sort_by_key(|a| k.to_index(a));
    Ok(roots)
}

/// Evaluate a polynomial over `K` at `a` (Horner).
pub fn eval_ext(k: &ExtField, q: &[ExtElem], a: &[u32]) -> ExtElem {
    q.iter()
        .rev()
        .fold(k.zero(), |acc, c| k.add(&k.mul(&acc, a), c))
}

/// Multiply two polynomials over `K` (used by tests and the decoder oracle).
pub fn mul_ext_poly(k: &ExtField, a: &[ExtElem], b: &[ExtElem]) -> Vec<ExtElem> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![k.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            let t = k.mul(x, y);
            out[i + j] = k.add(&out[i + j], &t);
        }
    }
    trim(&mut out);
    out
}
