use crate::error::{Error, Result};
use crate::ffield::linalg::kernel_vector;
use crate::ffield::{interpolate, GfField, Poly};

/// Reed-Solomon code: messages of `msg_len` symbols are the coefficients of
/// a polynomial evaluated at `eval_points`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RSParams {
    field: &'static GfField,
    msg_len: usize,
    eval_points: Vec<u32>,
}

impl RSParams {
    pub fn new(w: u8, msg_len: usize, eval_points: Vec<u32>) -> Result<Self> {
        let field = GfField::get(w)?;
        if msg_len == 0 || msg_len > eval_points.len() {
            return Err(Error::Parameter(format!(
                "message length {msg_len} must be in 1..={}",
                eval_points.len()
            )));
        }
        if eval_points.len() as u64 > field.size() {
            return Err(Error::Parameter(format!(
                "{} evaluation points exceed field size {}",
                eval_points.len(),
                field.size()
            )));
        }
        let mut sorted = eval_points.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|p| p[0] == p[1]) || !sorted.iter().all(|&x| field.contains(x)) {
            return Err(Error::Parameter("evaluation points must be distinct field elements".into()));
        }
        Ok(RSParams { field, msg_len, eval_points })
    }

    /// Code of length `code_len` evaluated at `0, 1, ..., code_len - 1`.
    pub fn standard(w: u8, msg_len: usize, code_len: usize) -> Result<Self> {
        if code_len as u64 > 1u64 << w.min(32) {
            return Err(Error::Parameter(format!("code length {code_len} exceeds GF(2^{w})")));
        }
        RSParams::new(w, msg_len, (0..code_len as u32).collect())
    }

    pub fn field(&self) -> &'static GfField {
        self.field
    }

    pub fn w(&self) -> u8 {
        self.field.w()
    }

    pub fn msg_len(&self) -> usize {
        self.msg_len
    }

    pub fn code_len(&self) -> usize {
        self.eval_points.len()
    }

    pub fn eval_points(&self) -> &[u32] {
        &self.eval_points
    }

    /// Largest number of errors correctable with no erasures.
    pub fn max_errors(&self) -> usize {
        (self.code_len() - self.msg_len) / 2
    }
}

/// One received codeword position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Received {
    pub point: u32,
    pub value: u32,
    pub erased: bool,
}

impl Received {
    pub fn new(point: u32, value: u32) -> Self {
        Received { point, value, erased: false }
    }

    pub fn erasure(point: u32) -> Self {
        Received { point, value: 0, erased: true }
    }
}

/// Codeword `f(eval_points[j])` where `f` has coefficients `msg`.
pub fn rs_encode(msg: &[u32], params: &RSParams) -> Result<Vec<u32>> {
    if msg.len() != params.msg_len {
        return Err(Error::Parameter(format!(
            "message has {} symbols, expected {}",
            msg.len(),
            params.msg_len
        )));
    }
    let f = params.field;
    if !msg.iter().all(|&c| f.contains(c)) {
        return Err(Error::Parameter("message symbol outside the field".into()));
    }
    Ok(params
        .eval_points
        .iter()
        .map(|&x| msg.iter().rev().fold(0, |acc, &c| f.mul(acc, x) ^ c))
        .collect())
}

/// Pair the codeword with its evaluation points.
pub fn to_received(codeword: &[u32], params: &RSParams) -> Vec<Received> {
    params
        .eval_points
        .iter()
        .zip(codeword)
        .map(|(&p, &v)| Received::new(p, v))
        .collect()
}

/// Berlekamp-Welch decoding with up to `t` errors among the non-erased
/// positions.
///
/// Solves `g(x_k) = y_k psi(x_k)` for `deg g < m + t`, `deg psi <= t`,
/// interpolates the message through `m` positions where `psi` is nonzero and
/// accepts it only if it re-encodes to within `t` disagreements.
pub fn rs_decode_bw(received: &[Received], params: &RSParams, t: usize) -> Result<Vec<u32>> {
    let f = params.field;
    let m = params.msg_len;
    let live: Vec<(u32, u32)> = received
        .iter()
        .filter(|r| !r.erased)
        .map(|r| (r.point, r.value))
        .collect();
    let needed = m + 2 * t;
    if live.len() < needed {
        return Err(Error::InsufficientData { needed, available: live.len() });
    }
    // Unknowns: g_0..g_{m+t-1} then psi_0..psi_t.
    let cols = m + 2 * t + 1;
    let matrix: Vec<Vec<u32>> = live
        .iter()
        .map(|&(x, y)| {
            let mut row = Vec::with_capacity(cols);
            let mut p = 1u32;
            for _ in 0..m + t {
                row.push(p);
                p = f.mul(p, x);
            }
            let mut p = y;
            for _ in 0..=t {
                row.push(p);
                p = f.mul(p, x);
            }
            row
        })
        .collect();
    let v = kernel_vector(f, &matrix, cols)
        .ok_or_else(|| Error::DecodeFailure("key equation has only the trivial solution".into()))?;
    let psi = Poly::from_coeffs(f, v[m + t..].to_vec());
    if psi.is_zero() {
        return Err(Error::DecodeFailure("error locator vanished".into()));
    }
    let (xs, ys): (Vec<u32>, Vec<u32>) = live
        .iter()
        .filter(|&&(x, _)| psi.eval(x) != 0)
        .take(m)
        .copied()
        .unzip();
    if xs.len() < m {
        return Err(Error::DecodeFailure("too few positions outside the error locator".into()));
    }
    let msg_poly = interpolate(f, &xs, &ys)?;
    let mut msg = msg_poly.into_coeffs();
    msg.resize(m, 0);
    let wrong = live
        .iter()
        .filter(|&&(x, y)| msg.iter().rev().fold(0, |acc, &c| f.mul(acc, x) ^ c) != y)
        .count();
    if wrong > t {
        return Err(Error::DecodeFailure(format!(
            "candidate disagrees with {wrong} positions, more than {t}"
        )));
    }
    Ok(msg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::index::sample;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_message_gives_constant_codeword() {
        let p = RSParams::standard(8, 1, 10).unwrap();
        assert_eq!(rs_encode(&[77], &p).unwrap(), vec![77; 10]);
    }

    #[test]
    fn identity_message_returns_points() {
        let p = RSParams::new(8, 2, vec![3, 9, 17, 200]).unwrap();
        assert_eq!(rs_encode(&[0, 1], &p).unwrap(), vec![3, 9, 17, 200]);
    }

    #[test]
    fn encode_matches_poly_eval() {
        let p = RSParams::standard(3, 2, 4).unwrap();
        let f = GfField::get(3).unwrap();
        let msg = [5, 3];
        let poly = Poly::from_coeffs(f, msg.to_vec());
        let expect: Vec<u32> = (0..4).map(|x| poly.eval(x)).collect();
        assert_eq!(rs_encode(&msg, &p).unwrap(), expect);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(RSParams::new(8, 3, vec![1, 1, 2]).is_err());
        assert!(RSParams::new(2, 1, vec![0, 1, 2, 3, 4]).is_err());
        assert!(RSParams::standard(8, 5, 4).is_err());
        let p = RSParams::standard(8, 2, 4).unwrap();
        assert!(rs_encode(&[1], &p).is_err());
    }

    #[test]
    fn clean_codeword_decodes() {
        let p = RSParams::standard(8, 8, 16).unwrap();
        let msg: Vec<u32> = (1..=8).collect();
        let cw = rs_encode(&msg, &p).unwrap();
        assert_eq!(rs_decode_bw(&to_received(&cw, &p), &p, 4).unwrap(), msg);
    }

    #[test]
    fn four_errors_match_subset_interpolation_oracle() {
        // Oracle: the message is the polynomial interpolated through the
        // uncorrupted positions (any 8 of them agree).
        let p = RSParams::standard(8, 8, 16).unwrap();
        let f = p.field();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let msg: Vec<u32> = (0..8).map(|_| rng.gen::<u32>() & 0xff).collect();
            let mut rx = to_received(&rs_encode(&msg, &p).unwrap(), &p);
            let bad = sample(&mut rng, 16, 4).into_vec();
            for &k in &bad {
                rx[k].value ^= rng.gen_range(1..256);
            }
            let clean: Vec<&Received> = rx.iter().enumerate().filter(|(k, _)| !bad.contains(k)).map(|(_, r)| r).collect();
            let xs: Vec<u32> = clean[..8].iter().map(|r| r.point).collect();
            let ys: Vec<u32> = clean[..8].iter().map(|r| r.value).collect();
            let mut oracle = interpolate(f, &xs, &ys).unwrap().into_coeffs();
            oracle.resize(8, 0);
            assert_eq!(oracle, msg);
            assert_eq!(rs_decode_bw(&rx, &p, 4).unwrap(), msg);
        }
    }

    #[test]
    fn erasures_and_errors() {
        let p = RSParams::standard(8, 4, 16).unwrap();
        let msg = vec![9, 8, 7, 6];
        let mut rx = to_received(&rs_encode(&msg, &p).unwrap(), &p);
        for r in rx.iter_mut().take(4) {
            *r = Received::erasure(r.point);
        }
        rx[10].value ^= 1;
        rx[12].value ^= 3;
        rx[15].value ^= 200;
        assert_eq!(rs_decode_bw(&rx, &p, 4).unwrap(), msg);
    }

    #[test]
    fn too_few_points() {
        let p = RSParams::standard(8, 8, 16).unwrap();
        let rx = to_received(&rs_encode(&[0; 8], &p).unwrap(), &p);
        assert!(matches!(
            rs_decode_bw(&rx[..15], &p, 4),
            Err(Error::InsufficientData { needed: 16, available: 15 })
        ));
    }

    #[test]
    fn too_many_errors_never_silently_wrong() {
        let p = RSParams::standard(8, 8, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let msg: Vec<u32> = (0..8).map(|_| rng.gen::<u32>() & 0xff).collect();
            let mut rx = to_received(&rs_encode(&msg, &p).unwrap(), &p);
            for k in sample(&mut rng, 16, 5).into_vec() {
                rx[k].value ^= rng.gen_range(1..256);
            }
            if let Ok(out) = rs_decode_bw(&rx, &p, 4) {
                // Only acceptable if the output really is within distance 4.
                let cw = rs_encode(&out, &p).unwrap();
                let dist = cw.iter().zip(&rx).filter(|(a, r)| **a != r.value).count();
                assert!(dist <= 4);
                assert_ne!(out, msg);
            }
        }
    }
}
