//! Desk-scale checks of expansion, isolation, neighbourhood growth and
//! robustness of the linking graph under node removal.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::graph::RegularGraph;
use super::hashing::{prf, Bipartite};

/// Random sets drawn in Monte-Carlo mode.
pub const MC_SETS: usize = 100_000;

/// Exact enumeration is used when it needs at most this many subsets.
const EXACT_BUDGET: u128 = 5_000_000;

/// Sets per deterministic Monte-Carlo work unit.
const MC_BLOCK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckMode {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub pass: bool,
    pub mode: CheckMode,
    pub sets_checked: u64,
    /// Smallest ratio of the checked quantity to its requirement.
    pub worst_ratio: f64,
    /// A violating set, if one was found.
    pub witness: Option<Vec<u64>>,
}

fn subsets_up_to(n: u64, ell: usize) -> u128 {
    let mut total = 0u128;
    let mut c = 1u128;
    for s in 1..=ell.min(n as usize) as u128 {
        c = c * (n as u128 - s + 1) / s;
        total = total.saturating_add(c);
        if total > EXACT_BUDGET {
            return total;
        }
    }
    total
}

fn use_exact(n: u64, ell: usize) -> bool {
    (n <= 24 || ell <= 3) && subsets_up_to(n, ell) <= EXACT_BUDGET
}

/// Visit every subset of `[0, n)` with `1..=ell` elements.
fn for_each_subset(n: u64, ell: usize, mut f: impl FnMut(&[u64])) {
    let mut stack: Vec<u64> = Vec::with_capacity(ell);
    fn rec(start: u64, n: u64, ell: usize, stack: &mut Vec<u64>, f: &mut impl FnMut(&[u64])) {
        for x in start..n {
            stack.push(x);
            f(stack);
            if stack.len() < ell {
                rec(x + 1, n, ell, stack, f);
            }
            stack.pop();
        }
    }
    rec(0, n, ell, &mut stack, &mut f);
}

/// Ratio score of one set, lower is worse; `>= 1` means the set passes.
type SetScore<'a> = dyn Fn(&[u64], &mut Scratch) -> f64 + Sync + 'a;

#[derive(Default)]
struct Scratch {
    edges: Vec<(u64, u32)>,
    nb: Vec<u64>,
}

fn run_check(n: u64, ell: usize, seed: u64, mode: Option<CheckMode>, score: &SetScore<'_>) -> CheckReport {
    let exact = match mode {
        Some(m) => m == CheckMode::Exact,
        None => use_exact(n, ell),
    };
    if exact {
        let mut scratch = Scratch::default();
        let mut worst = f64::INFINITY;
        let mut witness = None;
        let mut count = 0u64;
        for_each_subset(n, ell, |s| {
            count += 1;
            let r = score(s, &mut scratch);
            if r < worst {
                worst = r;
                if r < 1.0 {
                    witness = Some(s.to_vec());
                }
            }
        });
        return CheckReport {
            pass: worst >= 1.0,
            mode: CheckMode::Exact,
            sets_checked: count,
            worst_ratio: worst,
            witness,
        };
    }
    let blocks = MC_SETS.div_ceil(MC_BLOCK);
    let results: Vec<(f64, Option<Vec<u64>>)> = (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let mut rng = ChaCha8Rng::seed_from_u64(prf(seed, 0x5e7, blk as u64, 0));
            let mut scratch = Scratch::default();
            let mut worst = (f64::INFINITY, None);
            let todo = MC_BLOCK.min(MC_SETS - blk * MC_BLOCK);
            for _ in 0..todo {
                let size = rng.gen_range(1..=ell.min(n as usize));
                let set: Vec<u64> = sample(&mut rng, n as usize, size)
                    .into_iter()
                    .map(|x| x as u64)
                    .collect();
                let r = score(&set, &mut scratch);
                if r < worst.0 {
                    worst = (r, (r < 1.0).then_some(set));
                }
            }
            worst
        })
        .collect();
    // Blocks are combined in index order so the witness is deterministic.
    let (worst, witness) = results
        .into_iter()
        .fold((f64::INFINITY, None), |acc, r| if r.0 < acc.0 { r } else { acc });
    CheckReport {
        pass: worst >= 1.0,
        mode: CheckMode::MonteCarlo,
        sets_checked: MC_SETS as u64,
        worst_ratio: worst,
        witness,
    }
}

/// Collect `(right node, left member index)` for every edge out of `set`,
/// sorted by right node.
fn gather_edges<G: Bipartite>(g: &G, set: &[u64], scratch: &mut Scratch) {
    scratch.edges.clear();
    for (k, &x) in set.iter().enumerate() {
        g.neighbors(x, &mut scratch.nb);
        scratch.edges.extend(scratch.nb.iter().map(|&v| (v, k as u32)));
    }
    scratch.edges.sort_unstable();
}

/// Check `|Γ(S)| >= (1 - eps) d |S|` for all `|S| <= ell`: exhaustively when
/// feasible, otherwise on [`MC_SETS`] random sets.
pub fn verify_expansion<G: Bipartite>(g: &G, ell: usize, eps: f64, seed: u64) -> CheckReport {
    verify_expansion_with_mode(g, ell, eps, seed, None)
}

/// [`verify_expansion`] with the mode forced instead of chosen by size.
pub fn verify_expansion_with_mode<G: Bipartite>(
    g: &G,
    ell: usize,
    eps: f64,
    seed: u64,
    mode: Option<CheckMode>,
) -> CheckReport {
    let exact = match mode {
        Some(m) => m == CheckMode::Exact,
        None => use_exact(g.left_size(), ell),
    };
    if exact {
        return exact_expansion(g, ell, eps);
    }
    let d = g.degree() as f64;
    let score = |set: &[u64], scratch: &mut Scratch| {
        gather_edges(g, set, scratch);
        let mut distinct = 0usize;
        let mut prev = None;
        for &(v, _) in &scratch.edges {
            if prev != Some(v) {
                distinct += 1;
                prev = Some(v);
            }
        }
        distinct as f64 / ((1.0 - eps) * d * set.len() as f64)
    };
    run_check(g.left_size(), ell, seed, mode, &score)
}

/// Exhaustive expansion check maintaining right-node hit counts while the
/// subsets are enumerated depth-first.
fn exact_expansion<G: Bipartite>(g: &G, ell: usize, eps: f64) -> CheckReport {
    let n = g.left_size() as usize;
    let mut ids = std::collections::HashMap::new();
    let mut nb = Vec::new();
    let adj: Vec<Vec<usize>> = (0..n as u64)
        .map(|x| {
            g.neighbors(x, &mut nb);
            nb.iter()
                .map(|v| {
                    let next = ids.len();
                    *ids.entry(*v).or_insert(next)
                })
                .collect()
        })
        .collect();
    let mut st = DfsState {
        counts: vec![0; ids.len()],
        distinct: 0,
        stack: Vec::with_capacity(ell),
        worst: f64::INFINITY,
        witness: None,
        checked: 0,
    };
    st.run(0, &adj, ell, (1.0 - eps) * g.degree() as f64);
    CheckReport {
        pass: st.worst >= 1.0,
        mode: CheckMode::Exact,
        sets_checked: st.checked,
        worst_ratio: st.worst,
        witness: st.witness,
    }
}

struct DfsState {
    counts: Vec<u32>,
    distinct: usize,
    stack: Vec<u64>,
    worst: f64,
    witness: Option<Vec<u64>>,
    checked: u64,
}

impl DfsState {
    fn run(&mut self, start: usize, adj: &[Vec<usize>], ell: usize, denom: f64) {
        for x in start..adj.len() {
            for &v in &adj[x] {
                if self.counts[v] == 0 {
                    self.distinct += 1;
                }
                self.counts[v] += 1;
            }
            self.stack.push(x as u64);
            self.checked += 1;
            let r = self.distinct as f64 / (denom * self.stack.len() as f64);
            if r < self.worst {
                self.worst = r;
                if r < 1.0 {
                    self.witness = Some(self.stack.clone());
                }
            }
            if self.stack.len() < ell {
                self.run(x + 1, adj, ell, denom);
            }
            self.stack.pop();
            for &v in &adj[x] {
                self.counts[v] -= 1;
                if self.counts[v] == 0 {
                    self.distinct -= 1;
                }
            }
        }
    }
}

/// Per member of `set`, the number of its edges whose right endpoint is not
/// shared with any other member.
pub fn unique_neighbor_counts<G: Bipartite>(g: &G, set: &[u64]) -> Vec<usize> {
    let mut scratch = Scratch::default();
    unique_counts(g, set, &mut scratch)
}

fn unique_counts<G: Bipartite>(g: &G, set: &[u64], scratch: &mut Scratch) -> Vec<usize> {
    gather_edges(g, set, scratch);
    let mut counts = vec![0usize; set.len()];
    let e = &scratch.edges;
    let mut i = 0;
    while i < e.len() {
        let mut j = i + 1;
        while j < e.len() && e[j].0 == e[i].0 {
            j += 1;
        }
        if e[i..j].iter().all(|&(_, k)| k == e[i].1) {
            counts[e[i].1 as usize] += j - i;
        }
        i = j;
    }
    counts
}

/// Check that every `S` with `|S| <= ell` has at least `(1 - eta)|S|`
/// members with `>= (1 - zeta) d` unique neighbours.
pub fn verify_isolation<G: Bipartite>(g: &G, ell: usize, eta: f64, zeta: f64, seed: u64) -> CheckReport {
    let need = (1.0 - zeta) * g.degree() as f64;
    let score = |set: &[u64], scratch: &mut Scratch| {
        let counts = unique_counts(g, set, scratch);
        let isolated = counts.iter().filter(|&&c| c as f64 >= need - 1e-9).count();
        let required = (1.0 - eta) * set.len() as f64;
        if required <= 0.0 {
            f64::INFINITY
        } else {
            isolated as f64 / required
        }
    };
    run_check(g.left_size(), ell, seed, None, &score)
}

/// Directed graph where every node has `d` uniformly random out-arcs.
pub fn gen_out_regular_digraph(n: usize, d: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (0..d).map(|_| rng.gen_range(0..n)).collect())
        .collect()
}

/// Per start node: (distinct endpoints of walks of length `depth`, number of
/// such walks).
pub fn neighborhood_profile(out_arcs: &[Vec<usize>], depth: usize) -> Vec<(usize, u64)> {
    let n = out_arcs.len();
    (0..n)
        .into_par_iter()
        .map(|start| {
            let mut count = vec![0u64; n];
            count[start] = 1;
            let mut frontier = vec![start];
            let mut next_count = vec![0u64; n];
            for _ in 0..depth {
                let mut next = Vec::new();
                for &u in &frontier {
                    let c = count[u];
                    for &v in &out_arcs[u] {
                        if next_count[v] == 0 {
                            next.push(v);
                        }
                        next_count[v] += c;
                    }
                }
                for &u in &frontier {
                    count[u] = 0;
                }
                std::mem::swap(&mut count, &mut next_count);
                frontier = next;
            }
            let paths = frontier.iter().map(|&v| count[v]).sum();
            (frontier.len(), paths)
        })
        .collect()
}

/// Outcome of the node-removal robustness check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemovalReport {
    pub trials: usize,
    pub passed: usize,
    /// Smallest best-reach fraction seen over all trials.
    pub worst_fraction: f64,
}

/// Remove `zeta n` random nodes `trials` times and check that some surviving
/// node reaches at least `alpha n` survivors within `ceil(c log_δ n)` steps.
pub fn removal_check(g: &RegularGraph, zeta: f64, alpha: f64, c: f64, trials: usize, seed: u64) -> RemovalReport {
    let n = g.n();
    let depth = (c * (n as f64).ln() / (g.degree() as f64).ln()).ceil().max(1.0) as usize;
    let removed = (zeta * n as f64).floor() as usize;
    let fractions: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(prf(seed, 0xdead, t as u64, 0));
            let mut alive = vec![true; n];
            for v in sample(&mut rng, n, removed) {
                alive[v] = false;
            }
            let best = (0..n)
                .filter(|&v| alive[v])
                .map(|v| g.reachable_within(v, depth, &alive))
                .max()
                .unwrap_or(0);
            best as f64 / n as f64
        })
        .collect();
    RemovalReport {
        trials,
        passed: fractions.iter().filter(|&&f| f >= alpha).count(),
        worst_fraction: fractions.iter().copied().fold(f64::INFINITY, f64::min),
    }
}
