use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gf::GfField;
use super::poly::Poly;
use crate::error::{Error, Result};

/// The ring F[x]/E(x) for a monic modulus `E` of degree at least one.
///
/// When `E` is irreducible this is the extension field of size `|F|^deg E`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientRing {
    modulus: Poly,
}

impl QuotientRing {
    pub fn new(modulus: Poly) -> Result<Self> {
        match modulus.degree() {
            Some(d) if d >= 1 => {}
            _ => return Err(Error::Parameter("modulus must have degree >= 1".into())),
        }
        if !modulus.is_monic() {
            return Err(Error::Parameter("modulus must be monic".into()));
        }
        Ok(QuotientRing { modulus })
    }

    pub fn modulus(&self) -> &Poly {
        &self.modulus
    }

    pub fn field(&self) -> &'static GfField {
        self.modulus.field()
    }

    /// Degree of the modulus; residues have this many coefficients.
    pub fn degree(&self) -> usize {
        self.modulus.degree().expect("validated")
    }

    pub fn reduce(&self, p: &Poly) -> Poly {
        p.rem(&self.modulus).expect("modulus is nonzero")
    }

    pub fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        self.reduce(&a.mul(b))
    }

    /// Square-and-multiply exponentiation.
    pub fn pow(&self, f: &Poly, mut e: u64) -> Poly {
        let mut acc = Poly::one(self.field());
        let mut base = self.reduce(f);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// `a^(|F|)`, i.e. `w` successive squarings.
    pub fn frobenius(&self, a: &Poly) -> Poly {
        let mut t = self.reduce(a);
        for _ in 0..self.field().w() {
            t = self.mul(&t, &t);
        }
        t
    }

    /// Inverse by the extended Euclidean algorithm; `None` if not a unit.
    pub fn inv(&self, a: &Poly) -> Option<Poly> {
        let f = self.field();
        let a = self.reduce(a);
        if a.is_zero() {
            return None;
        }
        let (mut r0, mut r1) = (self.modulus.clone(), a);
        let (mut t0, mut t1) = (Poly::zero(f), Poly::one(f));
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1).ok()?;
            let t = t0.add(&q.mul(&t1));
            r0 = r1;
            r1 = r;
            t0 = t1;
            t1 = t;
        }
        if r0.degree() != Some(0) {
            return None;
        }
        let c = f.inv(r0.leading())?;
        Some(self.reduce(&t0.scale(c)))
    }

    pub fn element(&self, residue: Poly) -> QuotientElement<'_> {
        QuotientElement {
            residue: self.reduce(&residue),
            ring: self,
        }
    }
}

/// A residue class of F[x]/E(x).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientElement<'a> {
    residue: Poly,
    ring: &'a QuotientRing,
}

impl<'a> QuotientElement<'a> {
    pub fn residue(&self) -> &Poly {
        &self.residue
    }

    pub fn mul(&self, other: &QuotientElement<'a>) -> QuotientElement<'a> {
        self.ring.element(self.ring.mul(&self.residue, &other.residue))
    }

    pub fn add(&self, other: &QuotientElement<'a>) -> QuotientElement<'a> {
        self.ring.element(self.residue.add(&other.residue))
    }

    pub fn pow(&self, e: u64) -> QuotientElement<'a> {
        self.ring.element(self.ring.pow(&self.residue, e))
    }

    pub fn inv(&self) -> Option<QuotientElement<'a>> {
        self.ring.inv(&self.residue).map(|r| self.ring.element(r))
    }
}

/// `f^e mod E` by square-and-multiply.
pub fn quotient_pow(f: &Poly, e: u64, modulus: &Poly) -> Result<Poly> {
    let ring = QuotientRing::new(modulus.clone())?;
    Ok(ring.pow(f, e))
}

fn prime_divisors(mut n: usize) -> Vec<usize> {
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

/// Rabin's test over GF(2^w): `x^(q^d) = x mod E` and
/// `gcd(x^(q^(d/p)) - x, E) = 1` for every prime `p | d`.
pub fn is_irreducible(e: &Poly) -> bool {
    let d = match e.degree() {
        Some(d) if d >= 1 => d,
        _ => return false,
    };
    if d == 1 {
        return true;
    }
    let ring = match QuotientRing::new(e.monic()) {
        Ok(r) => r,
        Err(_) => return false,
    };
    let f = e.field();
    let x = ring.reduce(&Poly::x(f));
    let mut frob = Vec::with_capacity(d + 1);
    frob.push(x.clone());
    for j in 1..=d {
        let next = ring.frobenius(&frob[j - 1]);
        frob.push(next);
    }
    if frob[d] != x {
        return false;
    }
    prime_divisors(d).into_iter().all(|p| {
        let t = frob[d / p].add(&x);
        t.gcd(ring.modulus()).degree() == Some(0)
    })
}

/// A monic irreducible polynomial of the given degree over GF(2^w),
/// drawn from a deterministic sequence keyed by `seed`.
pub fn find_irreducible(w: u8, degree: usize, seed: u64) -> Result<Poly> {
    if degree == 0 {
        return Err(Error::Parameter("degree must be >= 1".into()));
    }
    let field = GfField::get(w)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((w as u64) << 56) ^ ((degree as u64) << 40));
    let draw = |rng: &mut ChaCha8Rng| -> Poly {
        let mut coeffs: Vec<u32> = (0..degree).map(|_| rng.gen::<u32>() & field.mask()).collect();
        coeffs.push(1);
        Poly::from_coeffs(field, coeffs)
    };
    if degree == 1 {
        return Ok(draw(&mut rng));
    }
    // A random monic polynomial is irreducible with probability about
    // 1/degree, so this bound is never approached in practice.
    for _ in 0..100_000 {
        let cand = draw(&mut rng);
        if cand.coeff(0) != 0 && is_irreducible(&cand) {
            return Ok(cand);
        }
    }
    Err(Error::Internal(format!(
        "no irreducible of degree {degree} found over GF(2^{w})"
    )))
}
