use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const MAX_ATTEMPTS: u32 = 64;
const POWER_ITERATIONS: usize = 200;

/// Undirected δ-regular multigraph stored as adjacency lists.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularGraph {
    n: usize,
    deg: usize,
    adj: Vec<Vec<usize>>,
    seed: u64,
    lambda: f64,
}

impl RegularGraph {
    /// The complete graph `K_n` (degree `n - 1`).
    pub fn complete(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Parameter("complete graph needs at least two nodes".into()));
        }
        let adj = (0..n).map(|u| (0..n).filter(|&v| v != u).collect()).collect();
        RegularGraph::from_adjacency(adj, 0)
    }

    /// Wrap explicit adjacency lists; every list must have the same length
    /// and the relation must be symmetric with multiplicity.
    pub fn from_adjacency(adj: Vec<Vec<usize>>, seed: u64) -> Result<Self> {
        let n = adj.len();
        let deg = adj.first().map_or(0, Vec::len);
        if n == 0 || adj.iter().any(|a| a.len() != deg || a.iter().any(|&v| v >= n)) {
            return Err(Error::Parameter("adjacency is not regular".into()));
        }
        let count = |u: usize, v: usize| adj[u].iter().filter(|&&x| x == v).count();
        for (u, list) in adj.iter().enumerate() {
            for &v in list {
                if u != v && count(u, v) != count(v, u) {
                    return Err(Error::Parameter("adjacency is not symmetric".into()));
                }
            }
        }
        let mut g = RegularGraph { n, deg, adj, seed, lambda: 0.0 };
        g.lambda = g.second_eigenvalue(seed);
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.deg
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adj
    }

    /// Power-iteration estimate of the largest nontrivial |eigenvalue|.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (u, o) in out.iter_mut().enumerate() {
            *o = self.adj[u].iter().map(|&v| x[v]).sum();
        }
    }

    /// Power iteration on the complement of the all-ones eigenvector.
    fn second_eigenvalue(&self, seed: u64) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x001a_4bda);
        let mut x: Vec<f64> = (0..self.n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut y = vec![0.0; self.n];
        let deflate_and_normalize = |v: &mut [f64]| -> f64 {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            v.iter_mut().for_each(|a| *a -= mean);
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm > 0.0 {
                v.iter_mut().for_each(|a| *a /= norm);
            }
            norm
        };
        deflate_and_normalize(&mut x);
        let mut estimate = 0.0;
        for _ in 0..POWER_ITERATIONS {
            self.apply(&x, &mut y);
            estimate = deflate_and_normalize(&mut y);
            if estimate == 0.0 {
                return 0.0;
            }
            std::mem::swap(&mut x, &mut y);
        }
        estimate
    }

    pub fn is_connected(&self) -> bool {
        self.reachable_within(0, usize::MAX, &vec![true; self.n]) == self.n
    }

    /// Nodes reachable from `start` in at most `depth` steps through nodes
    /// with `alive[v]`.
    pub fn reachable_within(&self, start: usize, depth: usize, alive: &[bool]) -> usize {
        if !alive[start] {
            return 0;
        }
        let mut dist = vec![usize::MAX; self.n];
        dist[start] = 0;
        let mut queue = VecDeque::from([start]);
        let mut seen = 1;
        while let Some(u) = queue.pop_front() {
            if dist[u] == depth {
                continue;
            }
            for &v in &self.adj[u] {
                if alive[v] && dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    seen += 1;
                    queue.push_back(v);
                }
            }
        }
        seen
    }
}

/// One configuration-model pairing with self-loops removed by switching.
fn configuration_model(n: usize, deg: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut stubs: Vec<usize> = (0..n).flat_map(|u| std::iter::repeat_n(u, deg)).collect();
    stubs.shuffle(rng);
    let mut pairs: Vec<(usize, usize)> = stubs.chunks(2).map(|p| (p[0], p[1])).collect();
    // Replace each loop (u,u) together with a random pair (a,b) by (u,a),(u,b).
    for _ in 0..pairs.len() * 4 {
        let Some(k) = pairs.iter().position(|&(a, b)| a == b) else { break };
        let other = rng.gen_range(0..pairs.len());
        let (u, _) = pairs[k];
        let (a, b) = pairs[other];
        if other == k || a == u || b == u {
            continue;
        }
        pairs[k] = (u, a);
        pairs[other] = (u, b);
    }
    let mut adj = vec![Vec::with_capacity(deg); n];
    for (a, b) in pairs {
        adj[a].push(b);
        adj[b].push(a);
    }
    adj
}

/// Random δ-regular graph on `n` nodes, regenerated until it is connected
/// and its second eigenvalue estimate is at most `3 sqrt(δ)`.
pub fn gen_regular_expander(n: usize, deg: usize, seed: u64) -> Result<RegularGraph> {
    if deg < 4 || !(n * deg).is_multiple_of(2) || n <= deg {
        return Err(Error::Parameter(format!(
            "need degree >= 4, n > degree and n*degree even (n={n}, degree={deg})"
        )));
    }
    let threshold = 3.0 * (deg as f64).sqrt();
    let mut best = f64::INFINITY;
    for attempt in 0..MAX_ATTEMPTS {
        let sub = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(attempt as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(sub);
        let adj = configuration_model(n, deg, &mut rng);
        let mut g = RegularGraph { n, deg, adj, seed, lambda: 0.0 };
        g.lambda = g.second_eigenvalue(sub);
        if !g.is_connected() {
            continue;
        }
        best = best.min(g.lambda);
        if g.lambda <= threshold {
            return Ok(g);
        }
    }
    Err(Error::ConstructionFailure {
        attempts: MAX_ATTEMPTS,
        best_lambda: best,
        threshold,
    })
}
