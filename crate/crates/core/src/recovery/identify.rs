//! Identification: heavy buckets, inner decoding, the recovered graph and
//! clustered outer list decoding.

use std::collections::{HashMap, HashSet, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codes::{gadget_decode_symbol, pv_encode, pv_list_decode, rs_decode_bw, unpack_bits, Received};
use crate::error::{Error, Result};
use crate::sketch::{Chunk, RoundParams};

use super::weak::recover_heavy_buckets;

/// Inner-decode the chunk stored for first-layer bucket `b` of row `r`.
pub fn decode_chunk(rp: &RoundParams, values: &[f64], r: usize, b: u64) -> Result<Chunk> {
    if b >= rp.spec.b1 {
        return Err(Error::Parameter(format!("bucket {b} out of range")));
    }
    let chunk = read_chunk(rp, values, r, b)?;
    if !row_matches(rp, &chunk, r) {
        return Err(Error::DecodeFailure(format!(
            "chunk in row {r} carries evaluation point {}",
            chunk.pv.x
        )));
    }
    Ok(chunk)
}

fn row_matches(rp: &RoundParams, chunk: &Chunk, r: usize) -> bool {
    chunk.pv.x == rp.pv.x_points()[r]
}

/// Gadget reads plus inner RS decoding, without the row check.
fn read_chunk(rp: &RoundParams, values: &[f64], r: usize, b: u64) -> Result<Chunk> {
    let w = rp.w_bits();
    let received: Vec<Received> = (0..rp.spec.d2 as usize)
        .map(|j| {
            let base = rp.ident_cell(r, j, rp.two_layer.inner(r, j, b), 0, 0);
            Received::new(j as u32, gadget_decode_symbol(&values[base..base + 2 * w], w as u8))
        })
        .collect();
    let t = (rp.inner.code_len() - rp.inner.msg_len()) / 2;
    let msg = rs_decode_bw(&received, &rp.inner, t)?;
    let bits = unpack_bits(&msg, w as u8, rp.spec.beta());
    Ok(Chunk::from_bits(&bits, rp.spec.w_pv(), rp.spec.pv_m as usize, rp.spec.delta as usize))
}

/// Decoded chunks as nodes `(row, bucket)` with arcs along the linking graph.
#[derive(Debug, Clone, Default)]
pub struct RecoveredGraph {
    nodes: Vec<(usize, u64)>,
    chunks: Vec<Chunk>,
    index: HashMap<(usize, u64), usize>,
    /// Arc targets per node, `(v_j(r), links[j])`, possibly dangling.
    arcs: Vec<Vec<(usize, u64)>>,
}

impl RecoveredGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: usize) -> (usize, u64) {
        self.nodes[id]
    }

    pub fn chunk(&self, id: usize) -> &Chunk {
        &self.chunks[id]
    }

    pub fn find(&self, r: usize, b: u64) -> Option<usize> {
        self.index.get(&(r, b)).copied()
    }

    pub fn arcs(&self, id: usize) -> &[(usize, u64)] {
        &self.arcs[id]
    }

    /// Out-neighbors of `id` that are nodes of the graph.
    pub fn successors(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        self.arcs[id].iter().filter_map(|key| self.index.get(key).copied())
    }

    /// Breadth-first search along out-arcs, at most `depth` steps and `cap`
    /// nodes. Returns node ids in ascending order.
    pub fn bfs(&self, start: usize, depth: usize, cap: usize) -> Vec<usize> {
        let mut dist = HashMap::from([(start, 0usize)]);
        let mut order = vec![start];
        let mut queue = VecDeque::from([start]);
        'outer: while let Some(u) = queue.pop_front() {
            let du = dist[&u];
            if du == depth {
                continue;
            }
            for v in self.successors(u) {
                if order.len() >= cap {
                    break 'outer;
                }
                if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(v) {
                    e.insert(du + 1);
                    order.push(v);
                    queue.push_back(v);
                }
            }
        }
        order.truncate(cap.max(1));
        order.sort_unstable();
        order
    }
}

/// Build the graph from decoded chunks keyed by `(row, bucket)`.
pub fn build_recovered_graph(rp: &RoundParams, mut decoded: Vec<((usize, u64), Chunk)>) -> RecoveredGraph {
    decoded.sort_by_key(|&(key, _)| key);
    decoded.dedup_by_key(|(key, _)| *key);
    let mut g = RecoveredGraph::default();
    for (id, ((r, b), chunk)) in decoded.into_iter().enumerate() {
        let arcs = rp
            .graph
            .neighbors(r)
            .iter()
            .zip(&chunk.links)
            .map(|(&v, &link)| (v, link))
            .collect();
        g.index.insert((r, b), id);
        g.nodes.push((r, b));
        g.chunks.push(chunk);
        g.arcs.push(arcs);
    }
    g
}

/// Per-round decode statistics.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IdentifyStats {
    pub heavy_buckets: usize,
    pub chunks_decoded: usize,
    pub rs_failures: usize,
    pub row_mismatches: usize,
    /// Pairs of nodes in one row carrying the same PV symbol.
    pub collisions: usize,
    pub clusters: usize,
    pub pv_list_total: usize,
    pub pv_list_max: usize,
    pub pv_errors: usize,
    pub candidates: usize,
    pub truncated: bool,
}

/// Candidate set together with the statistics of the run that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Identified {
    /// Distinct candidate indices, ascending.
    pub indices: Vec<u64>,
    pub stats: IdentifyStats,
}

/// Per row: heavy bucket count, decoded chunks, RS failures, row mismatches.
type RowDecode = (usize, Vec<((usize, u64), Chunk)>, usize, usize);

/// Decode every heavy bucket of every row.
pub fn decode_heavy_chunks(rp: &RoundParams, values: &[f64], stats: &mut IdentifyStats) -> Vec<((usize, u64), Chunk)> {
    let per_row: Vec<RowDecode> = (0..rp.spec.d1 as usize)
        .into_par_iter()
        .map(|r| {
            let heavy = recover_heavy_buckets(rp, values, r, rp.spec.heavy_count as usize);
            let (mut ok, mut rs_fail, mut mismatch) = (Vec::new(), 0, 0);
            for &(b, _) in &heavy {
                match read_chunk(rp, values, r, b) {
                    Ok(c) if row_matches(rp, &c, r) => ok.push(((r, b), c)),
                    Ok(_) => mismatch += 1,
                    Err(_) => rs_fail += 1,
                }
            }
            (heavy.len(), ok, rs_fail, mismatch)
        })
        .collect();
    let mut out = Vec::new();
    for (heavy, ok, rs_fail, mismatch) in per_row {
        stats.heavy_buckets += heavy;
        stats.rs_failures += rs_fail;
        stats.row_mismatches += mismatch;
        out.extend(ok);
    }
    stats.chunks_decoded = out.len();
    out
}

/// Candidate indices for one round of the sketch.
pub fn identify(rp: &RoundParams, values: &[f64]) -> Identified {
    let mut stats = IdentifyStats::default();
    let decoded = decode_heavy_chunks(rp, values, &mut stats);
    let mut seen: HashMap<(usize, &crate::codes::PVSymbol), usize> = HashMap::new();
    for ((r, _), c) in &decoded {
        let count = seen.entry((*r, &c.pv)).or_default();
        stats.collisions += *count;
        *count += 1;
    }
    let graph = build_recovered_graph(rp, decoded);
    let depth = rp.spec.bfs_depth as usize;
    let cap = rp.spec.bfs_cap as usize;
    let mut clusters: Vec<Vec<usize>> = (0..graph.node_count())
        .into_par_iter()
        .map(|start| graph.bfs(start, depth, cap))
        .collect();
    clusters.sort_unstable();
    clusters.dedup();
    stats.clusters = clusters.len();

    let agreement = rp.spec.agreement as usize;
    let lists: Vec<Result<Vec<(u64, usize)>>> = clusters
        .par_iter()
        .map(|cluster| {
            let points: Vec<(usize, crate::codes::PVSymbol)> = cluster
                .iter()
                .map(|&id| (graph.node(id).0, graph.chunk(id).pv.clone()))
                .collect();
            let found = pv_list_decode(&points, &rp.pv, agreement)?;
            found
                .into_iter()
                .map(|i| {
                    let enc = pv_encode(i, &rp.pv)?;
                    let rows: HashSet<usize> = points
                        .iter()
                        .filter(|(r, s)| enc[*r] == *s)
                        .map(|(r, _)| *r)
                        .collect();
                    Ok((i, rows.len()))
                })
                .collect()
        })
        .collect();

    let mut score: HashMap<u64, usize> = HashMap::new();
    for list in lists {
        match list {
            Ok(found) => {
                stats.pv_list_total += found.len();
                stats.pv_list_max = stats.pv_list_max.max(found.len());
                for (i, agree) in found {
                    let e = score.entry(i).or_default();
                    *e = (*e).max(agree);
                }
            }
            Err(_) => stats.pv_errors += 1,
        }
    }
    let mut ranked: Vec<(u64, usize)> = score.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let cap = rp.spec.candidate_cap as usize;
    if ranked.len() > cap {
        ranked.truncate(cap);
        stats.truncated = true;
    }
    let mut indices: Vec<u64> = ranked.into_iter().map(|(i, _)| i).collect();
    indices.sort_unstable();
    stats.candidates = indices.len();
    Identified { indices, stats }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::{apply_sketch, make_chunks, Schedule, Signal, SketchConfig};

    fn schedule() -> Schedule {
        Schedule::new(1 << 12, 4, 0.3, &SketchConfig::default(), 21).unwrap()
    }

    #[test]
    fn isolated_spike_decodes_exactly() {
        let s = schedule();
        let x = Signal::new(1 << 12, vec![(1000, -3.0)]).unwrap();
        let sk = apply_sketch(&s, &x).unwrap();
        let rp = &s.rounds()[0];
        let chunks = make_chunks(1000, rp).unwrap();
        for (r, chunk) in chunks.iter().enumerate() {
            let b = rp.two_layer.outer(r, 1000);
            assert_eq!(&decode_chunk(rp, &sk.values, r, b).unwrap(), chunk);
        }
    }

    #[test]
    fn corrupted_symbols_within_radius_still_decode() {
        let s = schedule();
        let x = Signal::new(1 << 12, vec![(77, 1.0)]).unwrap();
        let mut sk = apply_sketch(&s, &x).unwrap();
        let rp = &s.rounds()[0];
        let r = 3;
        let b = rp.two_layer.outer(r, 77);
        let t = (rp.inner.code_len() - rp.inner.msg_len()) / 2;
        // Flip bit 0 of t repetitions by swapping the pair's rows.
        for j in 0..t {
            let c = rp.two_layer.inner(r, j, b);
            let (a, z) = (rp.ident_cell(r, j, c, 0, 0), rp.ident_cell(r, j, c, 0, 1));
            sk.values.swap(a, z);
        }
        assert_eq!(decode_chunk(rp, &sk.values, r, b).unwrap(), make_chunks(77, rp).unwrap()[r]);
    }

    #[test]
    fn clean_copy_is_isomorphic_to_the_linking_graph() {
        let s = schedule();
        let x = Signal::new(1 << 12, vec![(5, 2.0)]).unwrap();
        let sk = apply_sketch(&s, &x).unwrap();
        let rp = &s.rounds()[0];
        let mut stats = IdentifyStats::default();
        let g = build_recovered_graph(rp, decode_heavy_chunks(rp, &sk.values, &mut stats));
        assert_eq!(g.node_count(), rp.spec.d1 as usize);
        for id in 0..g.node_count() {
            let (r, _) = g.node(id);
            let succ_rows: Vec<usize> = g.successors(id).map(|v| g.node(v).0).collect();
            assert_eq!(succ_rows, rp.graph.neighbors(r));
        }
    }

    #[test]
    fn empty_sketch_gives_empty_graph_and_no_candidates() {
        let s = schedule();
        let values = vec![0.0; s.measurement_count()];
        let out = identify(&s.rounds()[0], &values);
        assert!(out.indices.is_empty());
        assert_eq!(out.stats.chunks_decoded, 0);
    }

    #[test]
    fn planted_spikes_are_identified() {
        let s = schedule();
        let head = [(10u64, 1.0), (900, -0.8), (2000, 0.6), (4095, 0.5)];
        let x = Signal::new(1 << 12, head.to_vec()).unwrap();
        let sk = apply_sketch(&s, &x).unwrap();
        let out = identify(&s.rounds()[0], &sk.values);
        for (i, _) in head {
            assert!(out.indices.contains(&i), "{i} missing: {:?}", out.stats);
        }
    }

    #[test]
    fn bfs_respects_depth_and_cap() {
        let s = schedule();
        let x = Signal::new(1 << 12, vec![(5, 2.0)]).unwrap();
        let sk = apply_sketch(&s, &x).unwrap();
        let rp = &s.rounds()[0];
        let mut stats = IdentifyStats::default();
        let g = build_recovered_graph(rp, decode_heavy_chunks(rp, &sk.values, &mut stats));
        assert_eq!(g.bfs(0, 0, 100), vec![0]);
        assert_eq!(g.bfs(0, 1, 100).len(), 1 + rp.graph.neighbors(g.node(0).0).iter().collect::<HashSet<_>>().len());
        assert_eq!(g.bfs(0, 10, 5).len(), 5);
    }
}
