use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::ffield::linalg::kernel_vector;
use crate::ffield::{factor_roots, find_irreducible, is_irreducible, ExtElem, ExtField, GfField, Poly};

/// Largest number of wrapped polynomials tried by [`PVParams::design`].
const MAX_M_VARS: usize = 64;

/// One Parvaresh-Vardy codeword symbol `(x, f(x), (f^h mod E)(x), ...)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PVSymbol {
    pub x: u32,
    pub ys: Vec<u32>,
}

/// Parvaresh-Vardy code over GF(2^w) with `n_points` evaluation points
/// `x_r = r`, indexing a universe of size `n`.
#[derive(Debug, Clone)]
pub struct PVParams {
    ext: ExtField,
    h: u32,
    m_vars: usize,
    d_x: usize,
    x_points: Vec<u32>,
    n: u64,
}

/// Smallest `e >= 1` with `2^(w e) >= n`.
pub fn extension_degree(w: u8, n: u64) -> usize {
    let bits = 64 - n.saturating_sub(1).leading_zeros() as usize;
    bits.div_ceil(w as usize).max(1)
}

impl PVParams {
    pub fn new(modulus: Poly, h: u32, m_vars: usize, d_x: usize, n_points: usize, n: u64) -> Result<Self> {
        let field = modulus.field();
        if h < 2 || m_vars == 0 {
            return Err(Error::Parameter("need h >= 2 and at least one wrapped polynomial".into()));
        }
        if n_points == 0 || n_points as u64 > field.size() {
            return Err(Error::Parameter(format!(
                "{n_points} evaluation points do not fit in GF(2^{})",
                field.w()
            )));
        }
        if !modulus.is_monic() || !is_irreducible(&modulus) {
            return Err(Error::Parameter("modulus must be monic irreducible".into()));
        }
        let ext = ExtField::new(&modulus)?;
        if n == 0 || (ext.bits() < 64 && n > 1u64 << ext.bits()) {
            return Err(Error::Parameter(format!(
                "universe {n} exceeds the {}-bit message space",
                ext.bits()
            )));
        }
        Ok(PVParams {
            ext,
            h,
            m_vars,
            d_x,
            x_points: (0..n_points as u32).collect(),
            n,
        })
    }

    /// Pick the smallest `m_vars`, then the smallest `h`, such that
    /// `(h-1) m e < alpha d1` and `(alpha d1 - (h-1) m e) h^m > d1^c`, with
    /// `d_x = floor(alpha d1 - (h-1) m e)`.
    pub fn design(n: u64, w: u8, d1: usize, alpha: f64, c: f64, seed: u64) -> Result<Self> {
        let field = GfField::get(w)?;
        if d1 as u64 >= field.size() {
            return Err(Error::Parameter(format!("need |F| = 2^{w} > d1 = {d1}")));
        }
        let e = extension_degree(w, n);
        let budget = alpha * d1 as f64;
        let target = (d1 as f64).powf(c);
        let mut choice = None;
        'search: for m in 1..=MAX_M_VARS {
            let mut h = 2u32;
            loop {
                let slack = budget - ((h - 1) as usize * m * e) as f64;
                if slack <= 0.0 {
                    break;
                }
                if slack * (h as f64).powi(m as i32) > target {
                    choice = Some((m, h, slack.floor() as usize));
                    break 'search;
                }
                h += 1;
            }
        }
        let (m, h, d_x) = choice.ok_or_else(|| {
            Error::Parameter(format!(
                "no (m, h) satisfies the list-decoding conditions for d1={d1}, alpha={alpha}, c={c}, e={e}"
            ))
        })?;
        let modulus = if e == 1 {
            // Any linear modulus works; keep its root off the evaluation points.
            Poly::from_coeffs(field, vec![d1 as u32, 1])
        } else {
            find_irreducible(w, e, seed)?
        };
        PVParams::new(modulus, h, m, d_x, d1, n)
    }

    pub fn field(&self) -> &'static GfField {
        self.ext.base()
    }

    pub fn ext(&self) -> &ExtField {
        &self.ext
    }

    pub fn modulus(&self) -> &Poly {
        self.ext.modulus()
    }

    /// Degree of the modulus `E`.
    pub fn e(&self) -> usize {
        self.ext.degree()
    }

    pub fn h(&self) -> u32 {
        self.h
    }

    pub fn m_vars(&self) -> usize {
        self.m_vars
    }

    pub fn d_x(&self) -> usize {
        self.d_x
    }

    pub fn n_points(&self) -> usize {
        self.x_points.len()
    }

    pub fn x_points(&self) -> &[u32] {
        &self.x_points
    }

    pub fn universe(&self) -> u64 {
        self.n
    }

    /// Number of monomials `x^a y_0^b_0 ... y_{m-1}^b_{m-1}` available to the
    /// interpolation polynomial, `(d_x + 1) h^m` (saturating).
    pub fn capacity(&self) -> usize {
        let mut cap = (self.d_x + 1) as u128;
        for _ in 0..self.m_vars {
            cap = cap.saturating_mul(self.h as u128);
            if cap > usize::MAX as u128 {
                return usize::MAX;
            }
        }
        cap as usize
    }

    /// `ceil(alpha * d1)`.
    pub fn agreement(&self, alpha: f64) -> usize {
        (alpha * self.n_points() as f64 - 1e-9).ceil() as usize
    }

    /// Check `B1 > d1`, `(h-1) m e < alpha d1` and
    /// `(alpha d1 - (h-1) m e) h^m > d1^c`.
    pub fn check_properties(&self, alpha: f64, c: f64) -> Result<()> {
        let d1 = self.n_points() as f64;
        if self.field().size() as f64 <= d1 {
            return Err(Error::Parameter("field must be larger than d1".into()));
        }
        let slack = alpha * d1 - ((self.h - 1) as usize * self.m_vars * self.e()) as f64;
        if slack <= 0.0 {
            return Err(Error::Parameter("(h-1) m e must be below alpha d1".into()));
        }
        if slack * (self.h as f64).powi(self.m_vars as i32) <= d1.powf(c) {
            return Err(Error::Parameter("interpolation capacity must exceed d1^c".into()));
        }
        Ok(())
    }

    /// `f, f^h mod E, ..., f^(h^(m-1)) mod E` for the message polynomial of `i`.
    fn wrapped(&self, i: u64) -> Vec<ExtElem> {
        let mut out = Vec::with_capacity(self.m_vars);
        let mut cur = self.ext.from_index(i);
        for t in 0..self.m_vars {
            if t > 0 {
                cur = self.ext.pow(&cur, self.h as u64);
            }
            out.push(cur.clone());
        }
        out
    }

    fn eval_residue(&self, p: &[u32], x: u32) -> u32 {
        let f = self.field();
        p.iter().rev().fold(0, |acc, &c| f.mul(acc, x) ^ c)
    }

    /// Symbol of index `i` at evaluation point `r`.
    pub fn symbol(&self, i: u64, r: usize) -> Result<PVSymbol> {
        self.check_index(i)?;
        let x = *self
            .x_points
            .get(r)
            .ok_or_else(|| Error::Parameter(format!("row {r} out of range")))?;
        let ys = self.wrapped(i).iter().map(|p| self.eval_residue(p, x)).collect();
        Ok(PVSymbol { x, ys })
    }

    fn check_index(&self, i: u64) -> Result<()> {
        if i >= self.n {
            return Err(Error::Parameter(format!("index {i} outside universe of size {}", self.n)));
        }
        Ok(())
    }
}

/// All `d1` symbols of index `i`.
pub fn pv_encode(i: u64, params: &PVParams) -> Result<Vec<PVSymbol>> {
    params.check_index(i)?;
    let wrapped = params.wrapped(i);
    Ok(params
        .x_points
        .iter()
        .map(|&x| PVSymbol {
            x,
            ys: wrapped.iter().map(|p| params.eval_residue(p, x)).collect(),
        })
        .collect())
}

/// Diagnostic output of [`pv_list_decode_verbose`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ListDecodeOutcome {
    /// Indices passing the agreement filter, ascending.
    pub indices: Vec<u64>,
    /// Degree of the univariate polynomial that was factored.
    pub qstar_degree: usize,
    /// Roots of that polynomial that decode to an index in the universe.
    pub candidates: usize,
}

/// Every index whose encoding matches at least `agreement` of the supplied
/// `(row, symbol)` pairs (counted over distinct rows). Any index with that
/// many correct rows is guaranteed to be present when the number of distinct
/// points stays below [`PVParams::capacity`].
pub fn pv_list_decode(points: &[(usize, PVSymbol)], params: &PVParams, agreement: usize) -> Result<Vec<u64>> {
    Ok(pv_list_decode_verbose(points, params, agreement)?.indices)
}

pub fn pv_list_decode_verbose(
    points: &[(usize, PVSymbol)],
    params: &PVParams,
    agreement: usize,
) -> Result<ListDecodeOutcome> {
    if points.is_empty() {
        return Ok(ListDecodeOutcome { indices: Vec::new(), qstar_degree: 0, candidates: 0 });
    }
    if points.iter().any(|(_, s)| s.ys.len() != params.m_vars) {
        return Err(Error::Parameter("symbol has the wrong number of coordinates".into()));
    }
    let f = params.field();
    let mut distinct: Vec<&PVSymbol> = points.iter().map(|(_, s)| s).collect();
    distinct.sort_unstable();
    distinct.dedup();
    let total = params.capacity();
    if distinct.len() >= total {
        return Err(Error::Parameter(format!(
            "{} distinct points reach the interpolation capacity {total}",
            distinct.len()
        )));
    }
    // Columns ordered by y-degree D = sum b_t h^t, then x-degree. Only the
    // first rows+1 columns can be reached by the kernel search.
    let per_d = params.d_x + 1;
    let cols = total.min(distinct.len() + 1);
    let n_d = cols.div_ceil(per_d);
    let h = params.h as usize;
    let matrix: Vec<Vec<u32>> = distinct
        .iter()
        .map(|s| {
            let ypow: Vec<Vec<u32>> = s
                .ys
                .iter()
                .map(|&y| {
                    let mut p = Vec::with_capacity(h);
                    let mut acc = 1u32;
                    for _ in 0..h {
                        p.push(acc);
                        acc = f.mul(acc, y);
                    }
                    p
                })
                .collect();
            let mut xpow = Vec::with_capacity(per_d);
            let mut acc = 1u32;
            for _ in 0..per_d {
                xpow.push(acc);
                acc = f.mul(acc, s.x);
            }
            let mut row = Vec::with_capacity(cols);
            for d in 0..n_d {
                let mut rest = d;
                let mut ymono = 1u32;
                for yp in &ypow {
                    ymono = f.mul(ymono, yp[rest % h]);
                    rest /= h;
                }
                for &xp in &xpow {
                    if row.len() == cols {
                        break;
                    }
                    row.push(f.mul(ymono, xp));
                }
            }
            row
        })
        .collect();
    let v = kernel_vector(f, &matrix, cols)
        .ok_or_else(|| Error::Internal("interpolation system has no nonzero solution".into()))?;
    if v.iter().all(|&c| c == 0) {
        return Err(Error::Internal("interpolation kernel vector is zero".into()));
    }
    let mut coeffs: Vec<Poly> = (0..n_d)
        .map(|d| {
            let lo = d * per_d;
            let hi = ((d + 1) * per_d).min(cols);
            Poly::from_coeffs(f, v[lo..hi].to_vec())
        })
        .collect();
    // Strip common factors of E so the reduction below is nonzero.
    let modulus = params.modulus();
    while coeffs.iter().all(|c| c.rem(modulus).expect("nonzero modulus").is_zero()) {
        coeffs = coeffs
            .iter()
            .map(|c| c.divrem(modulus).expect("nonzero modulus").0)
            .collect();
    }
    let k = params.ext();
    let qstar: Vec<ExtElem> = coeffs.iter().map(|c| k.from_poly(c)).collect();
    let qstar_degree = qstar
        .iter()
        .rposition(|c| !ExtField::is_zero(c))
        .expect("some coefficient is not divisible by E");
    let roots = factor_roots(k, &qstar)?;
    let candidates: Vec<u64> = roots
        .iter()
        .map(|r| k.to_index(r))
        .filter(|&i| i < params.n)
        .collect();

    let mut by_row: HashMap<usize, Vec<&PVSymbol>> = HashMap::new();
    for (r, s) in points {
        by_row.entry(*r).or_default().push(s);
    }
    let mut indices = Vec::new();
    for &i in &candidates {
        let enc = pv_encode(i, params)?;
        let agree = by_row
            .iter()
            .filter(|(&r, syms)| enc.get(r).is_some_and(|e| syms.contains(&e)))
            .count();
        if agree >= agreement {
            indices.push(i);
        }
    }
    indices.sort_unstable();
    indices.dedup();
    Ok(ListDecodeOutcome { indices, qstar_degree, candidates: candidates.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::quotient_pow;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small() -> PVParams {
        // GF(16), e = 2, N = 256, d1 = 12 -> m = 2, h = 2, d_x = 5
        PVParams::design(256, 4, 12, 0.75, 1.2, 1).unwrap()
    }

    #[test]
    fn extension_degree_cases() {
        assert_eq!(extension_degree(10, 1 << 14), 2);
        assert_eq!(extension_degree(10, 1024), 1);
        assert_eq!(extension_degree(10, 1025), 2);
        assert_eq!(extension_degree(4, 1), 1);
    }

    #[test]
    fn design_picks_smallest_m_then_h() {
        let p = PVParams::design(1 << 14, 10, 64, 0.3, 1.5, 0).unwrap();
        assert_eq!((p.e(), p.m_vars(), p.h(), p.d_x()), (2, 7, 2, 5));
        p.check_properties(0.3, 1.5).unwrap();
        assert!(p.capacity() > 512);
        // infeasible combination
        assert!(PVParams::design(1 << 14, 10, 64, 0.3, 2.0, 0).is_err());
    }

    #[test]
    fn zero_index_encodes_to_zero() {
        let p = small();
        assert!(pv_encode(0, &p).unwrap().iter().all(|s| s.ys.iter().all(|&y| y == 0)));
    }

    #[test]
    fn single_variable_is_reed_solomon() {
        let f = GfField::get(8).unwrap();
        let e = find_irreducible(8, 2, 0).unwrap();
        let p = PVParams::new(e, 2, 1, 3, 20, 1 << 16).unwrap();
        let i = 0xbeefu64;
        let msg = Poly::from_coeffs(f, vec![(i & 0xff) as u32, (i >> 8) as u32]);
        for (r, s) in pv_encode(i, &p).unwrap().iter().enumerate() {
            assert_eq!(s.x, r as u32);
            assert_eq!(s.ys, vec![msg.eval(r as u32)]);
        }
    }

    #[test]
    fn coordinates_match_quotient_pow_chain() {
        let p = small();
        let f = p.field();
        for i in [1u64, 37, 255] {
            let msg = Poly::from_coeffs(f, vec![(i & 15) as u32, (i >> 4) as u32]);
            let enc = pv_encode(i, &p).unwrap();
            for t in 0..p.m_vars() {
                let wrapped = quotient_pow(&msg, (p.h() as u64).pow(t as u32), p.modulus()).unwrap();
                for s in &enc {
                    assert_eq!(s.ys[t], wrapped.eval(s.x));
                }
            }
        }
    }

    #[test]
    fn encoding_is_injective() {
        let p = PVParams::design(1 << 12, 6, 16, 0.5, 0.9, 2).unwrap();
        let mut seen = std::collections::HashSet::new();
        for i in 0..1u64 << 12 {
            assert!(seen.insert(pv_encode(i, &p).unwrap()), "collision at {i}");
        }
    }

    #[test]
    fn out_of_range_index() {
        assert!(pv_encode(256, &small()).is_err());
    }

    #[test]
    fn clean_codeword_lists_its_index() {
        let p = small();
        for i in [0u64, 5, 200] {
            let pts: Vec<_> = pv_encode(i, &p).unwrap().into_iter().enumerate().collect();
            let out = pv_list_decode(&pts, &p, p.agreement(0.75)).unwrap();
            assert!(out.contains(&i));
        }
        assert!(pv_list_decode(&[], &p, 1).unwrap().is_empty());
    }

    #[test]
    fn two_planted_indices_with_junk() {
        let p = small();
        let a = p.agreement(0.75);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let i = rng.gen_range(0..256u64);
            let j = (i + 1 + rng.gen_range(0..255u64)) % 256;
            let mut pts: Vec<(usize, PVSymbol)> = Vec::new();
            let ei = pv_encode(i, &p).unwrap();
            let ej = pv_encode(j, &p).unwrap();
            for r in 0..a {
                pts.push((r, ei[r].clone()));
                pts.push((11 - r, ej[11 - r].clone()));
            }
            while pts.len() < 22 {
                let r = rng.gen_range(0..12);
                let ys = (0..p.m_vars()).map(|_| rng.gen_range(0..16)).collect();
                pts.push((r, PVSymbol { x: r as u32, ys }));
            }
            let out = pv_list_decode_verbose(&pts, &p, a).unwrap();
            assert!(out.indices.contains(&i) && out.indices.contains(&j));
            assert!(out.indices.len() <= out.qstar_degree);
        }
    }

    #[test]
    fn capacity_is_enforced() {
        let p = small();
        let pts: Vec<(usize, PVSymbol)> = (0..p.capacity() as u64)
            .map(|k| {
                let r = (k % 12) as usize;
                let ys = (0..p.m_vars()).map(|t| ((k >> (4 * t)) & 15) as u32).collect();
                (r, PVSymbol { x: r as u32, ys })
            })
            .collect();
        assert!(matches!(pv_list_decode(&pts, &p, 1), Err(Error::Parameter(_))));
    }
}
