//! Asymptotically-optimal planners over any scenario: sPRM*, its lazy
//! variant, and RRT*, each parameterized by a radial or k-NN connection
//! strategy and an exact nearest-neighbor backend. Every primitive call a
//! planner makes flows through the run's [`PrimitiveLedger`].

mod prm;
mod rrt;

pub use prm::{lazy_sprm_star, sprm_star};
pub use rrt::{rrt_star, RrtParams};

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use crate::collision::{Checker, LpKind, PrimitiveLedger, Scenario};
use crate::error::SpaceError;
use crate::nn::{IndexKind, NnIndex};
use crate::space::{Point, StateSpace};
use crate::volume::{connection_radius, effective_radius, knn_count, RadiusParams};

/// Validation state of a roadmap edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeStatus {
    Unknown,
    Free,
    Blocked,
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub to: usize,
    pub weight: f64,
    pub status: EdgeStatus,
}

/// Undirected graph over configurations; every edge is stored in both
/// adjacency lists with equal weight and status.
#[derive(Debug, Default)]
pub struct Roadmap {
    pub nodes: Vec<Point>,
    pub adj: Vec<Vec<Edge>>,
}

impl Roadmap {
    pub fn add_node(&mut self, p: Point) -> usize {
        self.nodes.push(p);
        self.adj.push(Vec::new());
        self.nodes.len() - 1
    }

    pub fn add_edge(&mut self, u: usize, v: usize, weight: f64, status: EdgeStatus) {
        self.adj[u].push(Edge {
            to: v,
            weight,
            status,
        });
        self.adj[v].push(Edge {
            to: u,
            weight,
            status,
        });
    }

    /// Updates an edge's status in both directions.
    pub fn set_status(&mut self, u: usize, v: usize, status: EdgeStatus) {
        for e in &mut self.adj[u] {
            if e.to == v {
                e.status = status;
            }
        }
        for e in &mut self.adj[v] {
            if e.to == u {
                e.status = status;
            }
        }
    }

    pub fn status(&self, u: usize, v: usize) -> Option<EdgeStatus> {
        self.adj[u].iter().find(|e| e.to == v).map(|e| e.status)
    }

    /// Unordered edge counts by status.
    pub fn edge_counts(&self) -> (usize, usize, usize) {
        let (mut unknown, mut free, mut blocked) = (0, 0, 0);
        for (u, edges) in self.adj.iter().enumerate() {
            for e in edges {
                if e.to > u {
                    match e.status {
                        EdgeStatus::Unknown => unknown += 1,
                        EdgeStatus::Free => free += 1,
                        EdgeStatus::Blocked => blocked += 1,
                    }
                }
            }
        }
        (unknown, free, blocked)
    }
}

/// How a node's neighbor set is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum ConnectionStrategy {
    Radial {
        eta: f64,
        /// Known free-space measure; ambient measure when `None`.
        mu_free: Option<f64>,
        /// Project to the larger factor when the radius spills out of a
        /// thin compound factor.
        heuristic: bool,
    },
    Knn { multiplier: f64 },
}

impl ConnectionStrategy {
    pub fn radial(eta: f64) -> Self {
        ConnectionStrategy::Radial {
            eta,
            mu_free: None,
            heuristic: false,
        }
    }

    pub fn knn() -> Self {
        ConnectionStrategy::Knn { multiplier: 1.0 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ConnectionStrategy::Radial {
                heuristic: false, ..
            } => "radial",
            ConnectionStrategy::Radial {
                heuristic: true, ..
            } => "radial+heuristic",
            ConnectionStrategy::Knn { .. } => "knn",
        }
    }
}

/// A strategy resolved at a given node count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Resolved {
    Radius(f64),
    Count(usize),
}

/// Resolves a connection strategy for `n` nodes over `space`: the connection
/// radius (optionally through the thin-factor projection heuristic) or the
/// neighbor count.
pub fn resolve_strategy(
    strategy: &ConnectionStrategy,
    space: &StateSpace,
    n: usize,
) -> Result<Resolved, SpaceError> {
    match strategy {
        ConnectionStrategy::Radial {
            eta,
            mu_free,
            heuristic,
        } => {
            let params = RadiusParams::for_space(space, *eta, *mu_free)?;
            if *heuristic && qualifies_for_projection(space) {
                let (r, _) = effective_radius(space, n, &params)?;
                Ok(Resolved::Radius(r))
            } else {
                Ok(Resolved::Radius(connection_radius(n, &params)?))
            }
        }
        ConnectionStrategy::Knn { multiplier } => {
            let k = (multiplier * knn_count(n, space.dimension()) as f64).ceil() as usize;
            Ok(Resolved::Count(k.max(1)))
        }
    }
}

fn qualifies_for_projection(space: &StateSpace) -> bool {
    match space {
        StateSpace::Compound { p, children, .. } => {
            *p == 1.0 && children.len() == 2 && children[0].measure() >= children[1].measure()
        }
        _ => false,
    }
}

/// Aggregate facts about a finished run.
#[derive(Debug, Clone, Default)]
pub struct RoadmapStats {
    /// Collision-free configurations in the roadmap (planner nodes).
    pub n_free: usize,
    /// Total configurations sampled, including rejected ones.
    pub n_sampled: usize,
    pub edges_unknown: usize,
    pub edges_free: usize,
    pub edges_blocked: usize,
    /// Neighbors returned across all connection queries (self excluded).
    pub neighbors_reported: u64,
    /// Planner iterations (RRT*) or node count (batch planners).
    pub iterations: u64,
    /// Successful tree extensions (RRT*).
    pub extensions: u64,
}

/// Outcome of one planner run.
#[derive(Debug)]
pub struct PlanResult {
    pub success: bool,
    pub path: Vec<Point>,
    pub cost: f64,
    pub ledger: PrimitiveLedger,
    pub stats: RoadmapStats,
}

impl PlanResult {
    pub(crate) fn failure(ledger: PrimitiveLedger, stats: RoadmapStats) -> Self {
        PlanResult {
            success: false,
            path: Vec::new(),
            cost: f64::INFINITY,
            ledger,
            stats,
        }
    }
}

/// Nearest-neighbor index whose operations are timed into a ledger.
pub(crate) struct TimedIndex {
    pub idx: NnIndex,
}

impl TimedIndex {
    pub fn new(kind: IndexKind, space: StateSpace) -> Self {
        TimedIndex {
            idx: NnIndex::new(kind, space),
        }
    }

    pub fn insert(&mut self, ledger: &mut PrimitiveLedger, p: Point) -> usize {
        let t0 = Instant::now();
        let id = self.idx.insert(p).expect("planner inserts valid points");
        ledger.t_nn += t0.elapsed();
        id
    }

    pub fn nearest(&self, ledger: &mut PrimitiveLedger, q: &Point) -> usize {
        let t0 = Instant::now();
        let best = self.idx.k_nearest_unchecked(q, 1)[0].0;
        ledger.t_nn += t0.elapsed();
        ledger.nn += 1;
        best
    }

    pub fn radius_near(
        &self,
        ledger: &mut PrimitiveLedger,
        q: &Point,
        r: f64,
    ) -> Vec<(usize, f64)> {
        let t0 = Instant::now();
        let out = self.idx.radius_near_unchecked(q, r);
        ledger.t_nn += t0.elapsed();
        ledger.rnn += 1;
        out
    }

    pub fn k_nearest(
        &self,
        ledger: &mut PrimitiveLedger,
        q: &Point,
        k: usize,
    ) -> Vec<(usize, f64)> {
        let t0 = Instant::now();
        let out = self.idx.k_nearest_unchecked(q, k);
        ledger.t_nn += t0.elapsed();
        ledger.knn += 1;
        out
    }
}

/// Dijkstra over edges passing `filter`. Returns the node-id path and its
/// cost, or `None` when `dst` is unreachable; `src == dst` yields an empty
/// path of cost zero. Equal-cost ties resolve to the lexicographically
/// smallest id sequence.
pub fn shortest_path(
    roadmap: &Roadmap,
    src: usize,
    dst: usize,
    filter: impl Fn(&Edge) -> bool,
) -> Option<(Vec<usize>, f64)> {
    if src == dst {
        return Some((Vec::new(), 0.0));
    }
    let n = roadmap.nodes.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(HeapEntry {
        cost: 0.0,
        node: src,
    });

    while let Some(HeapEntry { cost, node }) = heap.pop() {
        if cost > dist[node] {
            continue;
        }
        for e in &roadmap.adj[node] {
            if !filter(e) {
                continue;
            }
            let nc = cost + e.weight;
            if nc < dist[e.to] {
                dist[e.to] = nc;
                parent[e.to] = Some(node);
                heap.push(HeapEntry {
                    cost: nc,
                    node: e.to,
                });
            } else if nc == dist[e.to] && tie_prefers(&parent, src, node, e.to) {
                parent[e.to] = Some(node);
                heap.push(HeapEntry {
                    cost: nc,
                    node: e.to,
                });
            }
        }
    }
    if dist[dst].is_infinite() {
        return None;
    }
    let mut path = Vec::new();
    let mut v = dst;
    while v != src {
        path.push(v);
        v = parent[v].expect("finite distance implies a parent chain");
    }
    path.push(src);
    path.reverse();
    Some((path, dist[dst]))
}

/// True when routing `v` through `candidate` gives a lexicographically
/// smaller id sequence than its current parent chain.
fn tie_prefers(parent: &[Option<usize>], src: usize, candidate: usize, v: usize) -> bool {
    let chain = |mut node: usize| {
        let mut ids = vec![node];
        while node != src {
            node = parent[node].expect("chain reaches src");
            ids.push(node);
        }
        ids.reverse();
        ids
    };
    let Some(current) = parent[v] else {
        return true;
    };
    let mut a = chain(candidate);
    a.push(v);
    let mut b = chain(current);
    b.push(v);
    a < b
}

struct HeapEntry {
    cost: f64,
    node: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cost == other.cost && self.node == other.node
    }
}
impl Eq for HeapEntry {}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed for a min-heap; smaller node id first on equal cost
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.node.cmp(&self.node))
    }
}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Re-validates a returned path with a fresh local-planning pass at the
/// given resolution; used by tests and the acceptance suite.
pub fn revalidate_path(scenario: &Scenario, path: &[Point], step: f64) -> bool {
    if path.is_empty() {
        return false;
    }
    let mut sc = scenario.clone();
    sc.step = step;
    let mut ck = Checker::new(&sc);
    if !ck.is_valid(&path[0]) {
        return false;
    }
    path.windows(2)
        .all(|w| ck.local_plan(&w[0], &w[1], LpKind::Extension))
}

/// Sum of metric edge lengths along a path.
pub fn path_cost(space: &StateSpace, path: &[Point]) -> f64 {
    path.windows(2)
        .map(|w| space.distance_unchecked(&w[0], &w[1]))
        .sum()
}
