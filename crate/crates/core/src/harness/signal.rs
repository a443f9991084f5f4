//! Synthetic head-plus-tail signals.

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sketch::{Schedule, Signal};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeadShape {
    /// Every head entry has magnitude `value`.
    Flat { value: f64 },
    /// Magnitudes `start * ratio^t` for `t < k`.
    Geometric { start: f64, ratio: f64 },
    /// Explicit magnitudes; the list length must equal `k`.
    Spikes { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailShape {
    /// I.i.d. uniform magnitudes with random signs on `support` positions
    /// (all non-head positions when `None`).
    Uniform { support: Option<usize> },
    /// Magnitudes proportional to `ratio^t` on `support` positions.
    Geometric { ratio: f64, support: Option<usize> },
    /// `per_head` equal-magnitude entries sharing a round-0 first-layer
    /// bucket with each head entry, drawn from randomly ordered rows.
    AdversarialSameBucket { per_head: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub n: u64,
    pub k: usize,
    pub head: HeadShape,
    pub tail: TailShape,
    pub tail_mass: f64,
    pub seed: u64,
}

fn random_sign(rng: &mut ChaCha8Rng) -> f64 {
    if rng.gen::<bool>() {
        1.0
    } else {
        -1.0
    }
}

impl SignalSpec {
    fn head_magnitudes(&self) -> Result<Vec<f64>> {
        let mags: Vec<f64> = match &self.head {
            HeadShape::Flat { value } => vec![*value; self.k],
            HeadShape::Geometric { start, ratio } => (0..self.k).map(|t| start * ratio.powi(t as i32)).collect(),
            HeadShape::Spikes { values } => {
                if values.len() != self.k {
                    return Err(Error::Parameter(format!(
                        "{} spike values given for k = {}",
                        values.len(),
                        self.k
                    )));
                }
                values.iter().map(|v| v.abs()).collect()
            }
        };
        if mags.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(Error::Parameter("head magnitudes must be positive and finite".into()));
        }
        Ok(mags)
    }
}

/// Generate the signal described by `spec`. The adversarial tail needs the
/// schedule whose round-0 hashing it targets.
pub fn gen_signal(spec: &SignalSpec, schedule: Option<&Schedule>) -> Result<Signal> {
    let n = spec.n;
    if spec.k as u64 >= n {
        return Err(Error::Parameter(format!("need k < N (k={}, N={n})", spec.k)));
    }
    if !(spec.tail_mass >= 0.0 && spec.tail_mass.is_finite()) {
        return Err(Error::Parameter("tail mass must be finite and non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mags = spec.head_magnitudes()?;
    let head_pos: Vec<u64> = sample(&mut rng, n as usize, spec.k).iter().map(|i| i as u64).collect();
    let mut entries: Vec<(u64, f64)> = head_pos
        .iter()
        .zip(&mags)
        .map(|(&i, &m)| (i, m * random_sign(&mut rng)))
        .collect();
    let mut is_head = std::collections::HashSet::new();
    is_head.extend(head_pos.iter().copied());
    let free = n as usize - spec.k;

    let tail: Vec<(u64, f64)> = if spec.tail_mass == 0.0 {
        Vec::new()
    } else {
        let (positions, raw): (Vec<u64>, Vec<f64>) = match &spec.tail {
            TailShape::Uniform { support } | TailShape::Geometric { support, .. } => {
                let count = support.unwrap_or(free);
                if count == 0 || count > free {
                    return Err(Error::Parameter(format!("tail support {count} not in 1..={free}")));
                }
                let pos: Vec<u64> = if count == free {
                    (0..n).filter(|i| !is_head.contains(i)).collect()
                } else {
                    let mut picked = Vec::with_capacity(count);
                    let mut taken = std::collections::HashSet::new();
                    while picked.len() < count {
                        let i = rng.gen_range(0..n);
                        if !is_head.contains(&i) && taken.insert(i) {
                            picked.push(i);
                        }
                    }
                    picked
                };
                let raw = match &spec.tail {
                    TailShape::Geometric { ratio, .. } => {
                        if !(0.0 < *ratio && *ratio < 1.0) {
                            return Err(Error::Parameter("tail ratio must be in (0, 1)".into()));
                        }
                        (0..count).map(|t| ratio.powi(t as i32)).collect()
                    }
                    _ => (0..count).map(|_| 1.0 - rng.gen::<f64>()).collect(),
                };
                (pos, raw)
            }
            TailShape::AdversarialSameBucket { per_head } => {
                let schedule = schedule.ok_or_else(|| {
                    Error::Parameter("the adversarial tail needs the target schedule".into())
                })?;
                let rp = &schedule.rounds()[0];
                let mut pos = Vec::new();
                let mut taken = std::collections::HashSet::new();
                for &h in &head_pos {
                    let mut rows: Vec<usize> = (0..rp.spec.d1 as usize).collect();
                    rows.shuffle(&mut rng);
                    let mut found = 0;
                    for r in rows {
                        if found == *per_head {
                            break;
                        }
                        let target = rp.two_layer.outer(r, h);
                        let mut pool: Vec<u64> = (0..n)
                            .filter(|i| !is_head.contains(i) && !taken.contains(i) && rp.two_layer.outer(r, *i) == target)
                            .collect();
                        pool.shuffle(&mut rng);
                        for i in pool.into_iter().take(*per_head - found) {
                            taken.insert(i);
                            pos.push(i);
                            found += 1;
                        }
                    }
                }
                if pos.is_empty() {
                    return Err(Error::Parameter("no colliding tail positions found".into()));
                }
                let raw = vec![1.0; pos.len()];
                (pos, raw)
            }
        };
        let total: f64 = raw.iter().sum();
        positions
            .into_iter()
            .zip(raw)
            .map(|(i, m)| (i, m / total * spec.tail_mass * random_sign(&mut rng)))
            .filter(|&(_, v)| v != 0.0)
            .collect()
    };
    let min_head = mags.iter().copied().fold(f64::INFINITY, f64::min);
    if tail.iter().any(|&(_, v)| v.abs() >= min_head) {
        return Err(Error::Parameter(
            "tail entries must be smaller than every head entry".into(),
        ));
    }
    entries.extend(tail);
    Signal::new(n, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::SketchConfig;

    fn spec(head: HeadShape, tail: TailShape, mass: f64) -> SignalSpec {
        SignalSpec { n: 4096, k: 6, head, tail, tail_mass: mass, seed: 9 }
    }

    #[test]
    fn pure_noise() {
        let mut s = spec(HeadShape::Flat { value: 1.0 }, TailShape::Uniform { support: None }, 1.0);
        s.k = 0;
        let x = gen_signal(&s, None).unwrap();
        assert!((x.l1_norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn flat_head_no_tail() {
        let x = gen_signal(&spec(HeadShape::Flat { value: 2.5 }, TailShape::Uniform { support: None }, 0.0), None)
            .unwrap();
        assert_eq!(x.len(), 6);
        assert!(x.entries.iter().all(|&(_, v)| v.abs() == 2.5));
    }

    #[test]
    fn declared_tail_mass_is_exact() {
        for tail in [
            TailShape::Uniform { support: None },
            TailShape::Uniform { support: Some(50) },
            TailShape::Geometric { ratio: 0.9, support: Some(200) },
        ] {
            let x = gen_signal(&spec(HeadShape::Geometric { start: 1.0, ratio: 0.8 }, tail, 1.3), None).unwrap();
            assert!((x.tail_norm(6) - 1.3).abs() <= 1e-9 * 1.3);
        }
    }

    #[test]
    fn geometric_tail_is_not_flat() {
        let s = spec(
            HeadShape::Flat { value: 1.0 },
            TailShape::Geometric { ratio: 0.5, support: Some(40) },
            0.9,
        );
        let x = gen_signal(&s, None).unwrap();
        let tail: Vec<f64> = x.by_magnitude()[6..].iter().map(|e| e.1.abs()).collect();
        // Each entry is half the previous one; the largest carries about half the mass.
        for w in tail.windows(2).take(20) {
            assert!((w[1] / w[0] - 0.5).abs() < 1e-9);
        }
        assert!(tail[0] > 0.44);
    }

    #[test]
    fn deterministic_from_seed() {
        let s = spec(HeadShape::Flat { value: 1.0 }, TailShape::Uniform { support: Some(100) }, 1.0);
        assert_eq!(gen_signal(&s, None).unwrap(), gen_signal(&s, None).unwrap());
        let mut t = s.clone();
        t.seed += 1;
        assert_ne!(gen_signal(&s, None).unwrap(), gen_signal(&t, None).unwrap());
    }

    #[test]
    fn infeasible_specs() {
        // tail entry larger than the head
        let s = spec(HeadShape::Flat { value: 0.1 }, TailShape::Uniform { support: Some(2) }, 1.0);
        assert!(gen_signal(&s, None).is_err());
        let mut s = spec(HeadShape::Flat { value: 1.0 }, TailShape::Uniform { support: None }, 1.0);
        s.k = 4096;
        assert!(gen_signal(&s, None).is_err());
        let s = spec(HeadShape::Spikes { values: vec![1.0; 3] }, TailShape::Uniform { support: None }, 0.0);
        assert!(gen_signal(&s, None).is_err());
        let s = spec(HeadShape::Flat { value: 1.0 }, TailShape::AdversarialSameBucket { per_head: 2 }, 0.5);
        assert!(gen_signal(&s, None).is_err());
    }

    #[test]
    fn adversarial_tail_shares_buckets() {
        let sched = Schedule::new(4096, 6, 0.3, &SketchConfig::default(), 2).unwrap();
        let s = spec(HeadShape::Flat { value: 1.0 }, TailShape::AdversarialSameBucket { per_head: 3 }, 0.5);
        let x = gen_signal(&s, Some(&sched)).unwrap();
        let rp = &sched.rounds()[0];
        let head: Vec<u64> = x.top(6).entries.iter().map(|e| e.0).collect();
        let tail: Vec<u64> = x.by_magnitude()[6..].iter().map(|e| e.0).collect();
        assert_eq!(tail.len(), 18);
        for t in tail {
            assert!(head
                .iter()
                .any(|&h| (0..rp.spec.d1 as usize).any(|r| rp.two_layer.outer(r, h) == rp.two_layer.outer(r, t))));
        }
    }
}
