//! Single-source shortest paths driven by a relaxed priority queue.
//!
//! The loop pops a `(vertex, distance)` pair, skips it if a shorter distance
//! was found meanwhile, and relaxes the out-edges, using `decrease_key` for
//! vertices already in the queue. A binary-heap Dijkstra serves as oracle.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::sched::{SchedError, Scheduler, SchedulerConfig, SchedulerTrace};

pub type VertexId = u32;
pub type Weight = u64;

/// Distance of an unreachable vertex.
pub const UNREACHABLE: Weight = Weight::MAX;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("graph has no vertices")]
    Empty,
    #[error("vertex {vertex} out of range for {n} vertices")]
    VertexOutOfRange { vertex: u64, n: usize },
    #[error("edge {u} -> {v} has nonpositive weight")]
    NonPositiveWeight { u: VertexId, v: VertexId },
    #[error("cannot place {m} distinct arcs on {n} vertices")]
    TooManyEdges { n: usize, m: usize },
}

/// Directed graph with strictly positive integer weights, stored as CSR.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedDigraph {
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
    weights: Vec<Weight>,
    source: VertexId,
}

impl WeightedDigraph {
    pub fn from_edges(
        n: usize,
        edges: &[(VertexId, VertexId, Weight)],
        source: VertexId,
    ) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        if source as usize >= n {
            return Err(GraphError::VertexOutOfRange {
                vertex: u64::from(source),
                n,
            });
        }
        let mut degree = vec![0usize; n + 1];
        for &(u, v, w) in edges {
            for x in [u, v] {
                if x as usize >= n {
                    return Err(GraphError::VertexOutOfRange {
                        vertex: u64::from(x),
                        n,
                    });
                }
            }
            if w == 0 {
                return Err(GraphError::NonPositiveWeight { u, v });
            }
            degree[u as usize + 1] += 1;
        }
        for i in 0..n {
            degree[i + 1] += degree[i];
        }
        let offsets = degree;
        let mut fill = offsets.clone();
        let mut targets = vec![0; edges.len()];
        let mut weights = vec![0; edges.len()];
        for &(u, v, w) in edges {
            let slot = &mut fill[u as usize];
            targets[*slot] = v;
            weights[*slot] = w;
            *slot += 1;
        }
        Ok(Self {
            offsets,
            targets,
            weights,
            source,
        })
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn with_source(mut self, source: VertexId) -> Result<Self, GraphError> {
        if source as usize >= self.n() {
            return Err(GraphError::VertexOutOfRange {
                vertex: u64::from(source),
                n: self.n(),
            });
        }
        self.source = source;
        Ok(self)
    }

    pub fn out_edges(&self, u: VertexId) -> impl Iterator<Item = (VertexId, Weight)> + '_ {
        let range = self.offsets[u as usize]..self.offsets[u as usize + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, Weight)> + '_ {
        (0..self.n() as VertexId).flat_map(move |u| self.out_edges(u).map(move |(v, w)| (u, v, w)))
    }
}

/// `G(n, m)`: `m` distinct arcs without self-loops, weights uniform in
/// `[1, max_weight]`, source 0.
pub fn random_graph(n: usize, m: usize, max_weight: Weight, seed: u64) -> Result<WeightedDigraph, GraphError> {
    if n == 0 {
        return Err(GraphError::Empty);
    }
    if m as u128 > (n as u128) * (n as u128 - 1) {
        return Err(GraphError::TooManyEdges { n, m });
    }
    let max_weight = max_weight.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arcs: Vec<(VertexId, VertexId)> = Vec::with_capacity(m);
    while arcs.len() < m {
        while arcs.len() < m {
            let u = rng.random_range(0..n as VertexId);
            let v = rng.random_range(0..n as VertexId);
            if u != v {
                arcs.push((u, v));
            }
        }
        arcs.sort_unstable();
        arcs.dedup();
    }
    let edges: Vec<_> = arcs
        .into_iter()
        .map(|(u, v)| (u, v, rng.random_range(1..=max_weight)))
        .collect();
    WeightedDigraph::from_edges(n, &edges, 0)
}

/// How repeated improvements of a queued vertex are handled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum DuplicateMode {
    /// One entry per vertex, lowered in place.
    #[default]
    DecreaseKey,
    /// A fresh entry per improvement; outdated entries become stale pops.
    InsertOnly,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PopStats {
    pub total_pops: u64,
    /// Pops whose distance exceeds the vertex's current tentative distance.
    pub stale_pops: u64,
    /// Non-stale pops of a vertex whose distance was not yet final.
    pub premature_pops: u64,
    pub reachable: u64,
    pub d_max: Weight,
    /// Smallest weight on an edge leaving a reachable vertex.
    pub w_min: Option<Weight>,
    /// `bucket_sizes[i]` counts reachable vertices with `i = floor(d / w_min)`.
    pub bucket_sizes: Vec<u64>,
}

impl PopStats {
    /// `floor(d_max / w_min) + 1`.
    pub fn bucket_count(&self) -> u64 {
        self.bucket_sizes.len() as u64
    }

    /// `reachable + c * k^2 * bucket_count`.
    pub fn pop_bound(&self, k: u32, c: f64) -> f64 {
        let k = f64::from(k);
        self.reachable as f64 + c * k * k * self.bucket_count() as f64
    }

    /// Pops relative to the exact scheduler's one pop per reachable vertex.
    pub fn overhead_ratio(&self) -> f64 {
        if self.reachable == 0 {
            1.0
        } else {
            self.total_pops as f64 / self.reachable as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SsspError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Sched(#[from] SchedError),
}

#[derive(Clone, Debug)]
pub struct SsspRun {
    pub dist: Vec<Weight>,
    pub stats: PopStats,
    pub trace: SchedulerTrace,
}

pub fn relaxed_sssp(
    graph: &WeightedDigraph,
    config: &SchedulerConfig,
    mode: DuplicateMode,
) -> Result<SsspRun, SsspError> {
    let n = graph.n();
    let mut sched = Scheduler::new(*config)?;
    let mut dist = vec![UNREACHABLE; n];
    let mut in_q = vec![false; n];
    // InsertOnly entries get fresh ids; `owner[id]` is the vertex
    let mut owner: Vec<VertexId> = Vec::new();
    let s = graph.source();
    dist[s as usize] = 0;
    enqueue(&mut sched, mode, &mut in_q, &mut owner, s, 0)?;

    let mut total_pops = 0u64;
    let mut stale_pops = 0u64;
    while !sched.empty() {
        let (id, cur) = sched.approx_get_min()?;
        sched.delete_task(id)?;
        total_pops += 1;
        let u = match mode {
            DuplicateMode::DecreaseKey => id,
            DuplicateMode::InsertOnly => owner[id as usize],
        };
        in_q[u as usize] = false;
        if cur > dist[u as usize] {
            stale_pops += 1;
            continue;
        }
        for (v, w) in graph.out_edges(u) {
            let nd = cur + w;
            if nd < dist[v as usize] {
                dist[v as usize] = nd;
                enqueue(&mut sched, mode, &mut in_q, &mut owner, v, nd)?;
            }
        }
    }
    let mut stats = bucket_stats(&dist, graph).stats;
    stats.total_pops = total_pops;
    stats.stale_pops = stale_pops;
    stats.premature_pops = total_pops - stale_pops - stats.reachable;
    Ok(SsspRun {
        dist,
        stats,
        trace: sched.finalize_trace(),
    })
}

fn enqueue(
    sched: &mut Scheduler,
    mode: DuplicateMode,
    in_q: &mut [bool],
    owner: &mut Vec<VertexId>,
    v: VertexId,
    d: Weight,
) -> Result<(), SchedError> {
    match mode {
        DuplicateMode::DecreaseKey if in_q[v as usize] => sched.decrease_key(v, d),
        DuplicateMode::DecreaseKey => {
            in_q[v as usize] = true;
            sched.insert(v, d)
        }
        DuplicateMode::InsertOnly => {
            owner.push(v);
            sched.insert(owner.len() as u32 - 1, d)
        }
    }
}

/// Textbook binary-heap Dijkstra.
pub fn dijkstra_oracle(graph: &WeightedDigraph) -> Vec<Weight> {
    let mut dist = vec![UNREACHABLE; graph.n()];
    let mut heap = BinaryHeap::new();
    dist[graph.source() as usize] = 0;
    heap.push(Reverse((0, graph.source())));
    while let Some(Reverse((d, u))) = heap.pop() {
        if d > dist[u as usize] {
            continue;
        }
        for (v, w) in graph.out_edges(u) {
            if d + w < dist[v as usize] {
                dist[v as usize] = d + w;
                heap.push(Reverse((d + w, v)));
            }
        }
    }
    dist
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BucketReport {
    /// Bucket fields filled; pop counters zero.
    pub stats: PopStats,
    /// Shortest-path parent of each reachable non-source vertex.
    pub parent: Vec<Option<VertexId>>,
}

impl BucketReport {
    pub fn bucket_of(&self, d: Weight) -> u64 {
        self.stats.w_min.map_or(0, |w| d / w)
    }

    /// Checks that buckets strictly increase along the parent-pointer path
    /// of each vertex in `vertices`; returns the vertices that fail.
    pub fn check_paths(&self, dist: &[Weight], vertices: &[VertexId]) -> Vec<VertexId> {
        let mut bad = Vec::new();
        for &v in vertices {
            if dist[v as usize] == UNREACHABLE {
                continue;
            }
            let mut cur = v;
            let mut ok = true;
            while let Some(p) = self.parent[cur as usize] {
                if self.bucket_of(dist[p as usize]) >= self.bucket_of(dist[cur as usize]) {
                    ok = false;
                    break;
                }
                cur = p;
            }
            if !ok {
                bad.push(v);
            }
        }
        bad
    }
}

/// Bucket partition and shortest-path tree of a distance vector.
pub fn bucket_stats(dist: &[Weight], graph: &WeightedDigraph) -> BucketReport {
    let reachable: Vec<VertexId> = (0..graph.n() as VertexId)
        .filter(|&v| dist[v as usize] != UNREACHABLE)
        .collect();
    let w_min = reachable
        .iter()
        .flat_map(|&u| graph.out_edges(u).map(|(_, w)| w))
        .min();
    let d_max = reachable.iter().map(|&v| dist[v as usize]).max().unwrap_or(0);
    let count = w_min.map_or(1, |w| d_max / w + 1);
    let mut bucket_sizes = vec![0u64; count as usize];
    for &v in &reachable {
        bucket_sizes[w_min.map_or(0, |w| dist[v as usize] / w) as usize] += 1;
    }
    let mut parent = vec![None; graph.n()];
    for &u in &reachable {
        for (v, w) in graph.out_edges(u) {
            if v != graph.source() && parent[v as usize].is_none() && dist[u as usize] + w == dist[v as usize] {
                parent[v as usize] = Some(u);
            }
        }
    }
    BucketReport {
        stats: PopStats {
            reachable: reachable.len() as u64,
            d_max,
            w_min,
            bucket_sizes,
            ..Default::default()
        },
        parent,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sched::AdversaryStrategy;

    fn path() -> WeightedDigraph {
        WeightedDigraph::from_edges(3, &[(0, 1, 1), (1, 2, 1)], 0).unwrap()
    }

    #[test]
    fn path_graph_exact() {
        let run = relaxed_sssp(&path(), &SchedulerConfig::exact(), DuplicateMode::DecreaseKey).unwrap();
        assert_eq!(run.dist, [0, 1, 2]);
        assert_eq!(run.stats.total_pops, 3);
        assert_eq!(run.stats.stale_pops, 0);
        assert_eq!(run.stats.bucket_sizes, [1, 1, 1]);
    }

    #[test]
    fn diamond_any_scheduler() {
        let g = WeightedDigraph::from_edges(3, &[(0, 1, 1), (0, 2, 5), (1, 2, 1)], 0).unwrap();
        let configs = [
            SchedulerConfig::exact(),
            SchedulerConfig::adversarial(3, AdversaryStrategy::MaxRank, 1),
            SchedulerConfig::multiqueue(4, 2),
        ];
        for cfg in configs {
            for mode in [DuplicateMode::DecreaseKey, DuplicateMode::InsertOnly] {
                assert_eq!(relaxed_sssp(&g, &cfg, mode).unwrap().dist[2], 2);
            }
        }
    }

    #[test]
    fn oracle_edge_cases() {
        let single = WeightedDigraph::from_edges(1, &[], 0).unwrap();
        assert_eq!(dijkstra_oracle(&single), [0]);
        let split = WeightedDigraph::from_edges(3, &[(0, 1, 4)], 0).unwrap();
        assert_eq!(dijkstra_oracle(&split), [0, 4, UNREACHABLE]);
    }

    #[test]
    fn invalid_graphs_rejected() {
        assert_eq!(
            WeightedDigraph::from_edges(2, &[(0, 1, 0)], 0),
            Err(GraphError::NonPositiveWeight { u: 0, v: 1 })
        );
        assert!(WeightedDigraph::from_edges(2, &[(0, 2, 1)], 0).is_err());
        assert!(WeightedDigraph::from_edges(0, &[], 0).is_err());
        assert!(random_graph(3, 7, 10, 0).is_err());
    }

    #[test]
    fn uniform_weight_buckets_are_hops() {
        // 0 -> 1 -> 2, 0 -> 3 -> 2, all weight 7
        let g = WeightedDigraph::from_edges(4, &[(0, 1, 7), (1, 2, 7), (0, 3, 7), (3, 2, 7)], 0).unwrap();
        let dist = dijkstra_oracle(&g);
        let b = bucket_stats(&dist, &g);
        assert_eq!(b.stats.bucket_sizes, [1, 2, 1]);
        assert_eq!(b.bucket_of(dist[2]), 2);
        assert!(b.check_paths(&dist, &[0, 1, 2, 3]).is_empty());
    }

    #[test]
    fn random_graph_is_simple() {
        let g = random_graph(50, 400, 100, 3).unwrap();
        let mut arcs: Vec<_> = g.edges().map(|(u, v, _)| (u, v)).collect();
        assert_eq!(arcs.len(), 400);
        assert!(arcs.iter().all(|&(u, v)| u != v));
        arcs.dedup();
        assert_eq!(arcs.len(), 400);
        assert!(g.edges().all(|(_, _, w)| (1..=100).contains(&w)));
    }
}
