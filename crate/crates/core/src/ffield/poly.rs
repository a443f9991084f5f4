use std::fmt;

use super::gf::{FieldElement, GfField};
use crate::error::{Error, Result};

/// Univariate polynomial over GF(2^w), lowest degree first.
///
/// Trailing zero coefficients are always trimmed, so the zero polynomial has
/// an empty coefficient vector.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    field: &'static GfField,
    coeffs: Vec<u32>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly[GF(2^{})]{:?}", self.field.w(), self.coeffs)
    }
}

impl Poly {
    pub fn zero(field: &'static GfField) -> Self {
        Poly { field, coeffs: Vec::new() }
    }

    pub fn one(field: &'static GfField) -> Self {
        Poly::constant(field, 1)
    }

    pub fn constant(field: &'static GfField, c: u32) -> Self {
        Poly::from_coeffs(field, vec![c])
    }

    /// The identity polynomial `x`.
    pub fn x(field: &'static GfField) -> Self {
        Poly::from_coeffs(field, vec![0, 1])
    }

    /// Monomial `c * x^deg`.
    pub fn monomial(field: &'static GfField, c: u32, deg: usize) -> Self {
        let mut coeffs = vec![0; deg + 1];
        coeffs[deg] = c;
        Poly::from_coeffs(field, coeffs)
    }

    pub fn from_coeffs(field: &'static GfField, mut coeffs: Vec<u32>) -> Self {
        debug_assert!(coeffs.iter().all(|&c| field.contains(c)));
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Poly { field, coeffs }
    }

    /// Checked constructor from field elements.
    pub fn from_elements(elems: &[FieldElement]) -> Result<Self> {
        let w = elems
            .first()
            .map(|e| e.w())
            .ok_or_else(|| Error::Parameter("empty coefficient list".into()))?;
        if elems.iter().any(|e| e.w() != w) {
            return Err(Error::Parameter("mixed field widths".into()));
        }
        let field = GfField::get(w)?;
        Ok(Poly::from_coeffs(field, elems.iter().map(|e| e.value()).collect()))
    }

    pub fn field(&self) -> &'static GfField {
        self.field
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<u32> {
        self.coeffs
    }

    /// Coefficient of `x^i` (zero past the end).
    pub fn coeff(&self, i: usize) -> u32 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> u32 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == 1
    }

    fn check_field(&self, other: &Poly) {
        assert!(
            std::ptr::eq(self.field, other.field),
            "polynomials over different fields"
        );
    }

    /// Horner evaluation.
    pub fn eval(&self, x: u32) -> u32 {
        let f = self.field;
        self.coeffs.iter().rev().fold(0, |acc, &c| f.mul(acc, x) ^ c)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        self.check_field(other);
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i) ^ other.coeff(i)).collect();
        Poly::from_coeffs(self.field, coeffs)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        self.check_field(other);
        if self.is_zero() || other.is_zero() {
            return Poly::zero(self.field);
        }
        let f = self.field;
        let mut out = vec![0u32; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] ^= f.mul(a, b);
            }
        }
        Poly::from_coeffs(f, out)
    }

    pub fn scale(&self, c: u32) -> Poly {
        let f = self.field;
        Poly::from_coeffs(f, self.coeffs.iter().map(|&a| f.mul(a, c)).collect())
    }

    /// Quotient and remainder; errors on a zero divisor.
    pub fn divrem(&self, divisor: &Poly) -> Result<(Poly, Poly)> {
        self.check_field(divisor);
        let f = self.field;
        let dd = divisor
            .degree()
            .ok_or(Error::DivisionByZero { w: f.w() })?;
        let inv_lead = f.inv(divisor.leading()).expect("nonzero leading coefficient");
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Poly::zero(f), self.clone()));
        }
        let mut quot = vec![0u32; rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = rem[k + dd];
            if c == 0 {
                continue;
            }
            let q = f.mul(c, inv_lead);
            quot[k] = q;
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] ^= f.mul(q, d);
            }
        }
        rem.truncate(dd);
        Ok((Poly::from_coeffs(f, quot), Poly::from_coeffs(f, rem)))
    }

    pub fn rem(&self, divisor: &Poly) -> Result<Poly> {
        Ok(self.divrem(divisor)?.1)
    }

    /// Scale to leading coefficient one (zero stays zero).
    pub fn monic(&self) -> Poly {
        match self.field.inv(self.leading()) {
            Some(inv) => self.scale(inv),
            None => self.clone(),
        }
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Formal derivative; in characteristic 2 only odd-degree terms survive.
    pub fn derivative(&self) -> Poly {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| if i % 2 == 1 { c } else { 0 })
            .collect();
        Poly::from_coeffs(self.field, coeffs)
    }
}

/// Evaluate `p` at `x`; the widths must match.
pub fn poly_eval(p: &Poly, x: FieldElement) -> Result<FieldElement> {
    if x.w() != p.field.w() {
        return Err(Error::Parameter("evaluation point from a different field".into()));
    }
    FieldElement::new(p.eval(x.value()), x.w())
}

/// Lagrange interpolation through `(xs[i], ys[i])`; xs must be distinct.
pub fn interpolate(field: &'static GfField, xs: &[u32], ys: &[u32]) -> Result<Poly> {
    assert_eq!(xs.len(), ys.len());
    let mut acc = Poly::zero(field);
    for (i, (&xi, &yi)) in xs.iter().zip(ys).enumerate() {
        if yi == 0 {
            continue;
        }
        let mut basis = Poly::one(field);
        let mut denom = 1u32;
        for (j, &xj) in xs.iter().enumerate() {
            if i == j {
                continue;
            }
            basis = basis.mul(&Poly::from_coeffs(field, vec![xj, 1]));
            denom = field.mul(denom, xi ^ xj);
        }
        let inv = field
            .inv(denom)
            .ok_or_else(|| Error::Parameter("interpolation points are not distinct".into()))?;
        acc = acc.add(&basis.scale(field.mul(yi, inv)));
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(w: u8) -> &'static GfField {
        GfField::get(w).unwrap()
    }

    #[test]
    fn trims_trailing_zeros() {
        let p = Poly::from_coeffs(gf(4), vec![1, 2, 0, 0]);
        assert_eq!(p.degree(), Some(1));
        assert!(Poly::from_coeffs(gf(4), vec![0, 0]).is_zero());
        assert_eq!(Poly::zero(gf(4)).degree(), None);
    }

    #[test]
    fn eval_constant_and_identity() {
        let f = gf(5);
        let c = Poly::constant(f, 7);
        let id = Poly::x(f);
        for a in 0..32 {
            assert_eq!(c.eval(a), 7);
            assert_eq!(id.eval(a), a);
        }
    }

    #[test]
    fn eval_matches_power_and_reduce() {
        // x^2 + 1 at x = 0b010 over GF(8); oracle: square by hand then reduce.
        let f = gf(3);
        let p = Poly::from_coeffs(f, vec![1, 0, 1]);
        let x = 0b010u32;
        let sq = super::super::gf::polymod2(super::super::gf::clmul(x as u64, x as u64), f.modulus()) as u32;
        assert_eq!(p.eval(x), sq ^ 1);
        let got = poly_eval(&p, FieldElement::new(x, 3).unwrap()).unwrap();
        assert_eq!(got.value(), f.mul(0b010, 0b010) ^ 1);
    }

    #[test]
    fn divrem_reconstructs() {
        let f = gf(8);
        let a = Poly::from_coeffs(f, vec![3, 9, 200, 17, 5, 1]);
        let b = Poly::from_coeffs(f, vec![7, 0, 33]);
        let (q, r) = a.divrem(&b).unwrap();
        assert!(r.degree().unwrap_or(0) < 2);
        assert_eq!(q.mul(&b).add(&r), a);
        assert!(a.divrem(&Poly::zero(f)).is_err());
    }

    #[test]
    fn gcd_of_products() {
        let f = gf(8);
        let common = Poly::from_coeffs(f, vec![5, 1]);
        let a = common.mul(&Poly::from_coeffs(f, vec![9, 1]));
        let b = common.mul(&Poly::from_coeffs(f, vec![77, 1]));
        assert_eq!(a.gcd(&b), common);
    }

    #[test]
    fn interpolation_recovers_polynomial() {
        let f = gf(8);
        let p = Poly::from_coeffs(f, vec![4, 0, 99, 12]);
        let xs: Vec<u32> = (1..=4).collect();
        let ys: Vec<u32> = xs.iter().map(|&x| p.eval(x)).collect();
        assert_eq!(interpolate(f, &xs, &ys).unwrap(), p);
        assert!(interpolate(f, &[1, 1], &[2, 3]).is_err());
    }
}
