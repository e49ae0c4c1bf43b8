//! Exact nearest-neighbor indexes over any [`StateSpace`] metric.
//!
//! Two interchangeable backends: a linear-scan oracle and a GNAT-style
//! metric tree with pivot range tables for pruning. Both answer NN, K-NN and
//! R-NN queries with identical results (same id sets, same orderings), so
//! the tree can be validated against the scan and either can back a planner
//! run. Search is exact; pruning bounds are padded by a small epsilon so
//! floating-point triangle-inequality noise can never drop a result.

use crate::error::SpaceError;
use crate::space::{Point, StateSpace};

/// Inclusive boundary slack for radius queries: a point at distance
/// `r + 1e-12` still counts as within `r`.
pub const RADIUS_SLACK: f64 = 1e-12;

/// Pruning-bound padding against floating-point triangle violations.
const PRUNE_EPS: f64 = 1e-9;

/// GNAT branching factor.
const BRANCHING: usize = 8;
/// Pivot candidates examined per split.
const PIVOT_POOL: usize = 32;
/// Subsets at most this large stay as leaves.
const LEAF_SIZE: usize = 16;

/// Which backend an [`NnIndex`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexKind {
    LinearScan,
    MetricTree,
}

impl IndexKind {
    pub fn name(&self) -> &'static str {
        match self {
            IndexKind::LinearScan => "linear",
            IndexKind::MetricTree => "tree",
        }
    }
}

/// Append-only point index over a metric space. Ids are dense `0..count`.
pub struct NnIndex {
    kind: IndexKind,
    space: StateSpace,
    points: Vec<Point>,
    /// Root over points built into the tree; `None` until the first build.
    root: Option<Node>,
    built_count: usize,
}

enum Node {
    Leaf {
        ids: Vec<usize>,
    },
    Inner {
        pivots: Vec<usize>,
        children: Vec<Node>,
        /// `ranges[i][j]` is the (min, max) distance from pivot `i` to any
        /// point stored under child `j`.
        ranges: Vec<Vec<(f64, f64)>>,
    },
}

impl NnIndex {
    pub fn new(kind: IndexKind, space: StateSpace) -> Self {
        NnIndex {
            kind,
            space,
            points: Vec::new(),
            root: None,
            built_count: 0,
        }
    }

    pub fn kind(&self) -> IndexKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, id: usize) -> &Point {
        &self.points[id]
    }

    /// Inserts a point, returning its id. The tree backend keeps new points
    /// in a linearly scanned pending buffer and rebuilds once the buffer
    /// exceeds `max(64, built/2)`.
    pub fn insert(&mut self, p: Point) -> Result<usize, SpaceError> {
        self.space.check_point(&p)?;
        let id = self.points.len();
        self.points.push(p);
        if self.kind == IndexKind::MetricTree {
            let pending = self.points.len() - self.built_count;
            if pending > 64.max(self.built_count / 2) {
                self.rebuild();
            }
        }
        Ok(id)
    }

    fn rebuild(&mut self) {
        let ids: Vec<usize> = (0..self.points.len()).collect();
        self.root = Some(self.build_node(ids));
        self.built_count = self.points.len();
    }

    fn dist(&self, a: usize, q: &Point) -> f64 {
        self.space.distance_unchecked(&self.points[a], q)
    }

    fn build_node(&self, ids: Vec<usize>) -> Node {
        if ids.len() <= LEAF_SIZE {
            return Node::Leaf { ids };
        }
        // candidate pool: evenly strided sample of the subset
        let stride = (ids.len() / PIVOT_POOL).max(1);
        let pool: Vec<usize> = ids.iter().step_by(stride).copied().take(PIVOT_POOL).collect();

        // greedy max-min pivot selection
        let mut pivots = vec![pool[0]];
        while pivots.len() < BRANCHING.min(pool.len()) {
            let mut best = None;
            let mut best_score = -1.0;
            for &c in &pool {
                if pivots.contains(&c) {
                    continue;
                }
                let score = pivots
                    .iter()
                    .map(|&p| self.dist(p, &self.points[c]))
                    .fold(f64::INFINITY, f64::min);
                if score > best_score {
                    best_score = score;
                    best = Some(c);
                }
            }
            match best {
                Some(c) => pivots.push(c),
                None => break,
            }
        }

        let k = pivots.len();
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); k];
        let mut ranges = vec![vec![(f64::INFINITY, f64::NEG_INFINITY); k]; k];
        for &id in &ids {
            let dists: Vec<f64> = pivots.iter().map(|&p| self.dist(p, &self.points[id])).collect();
            let mut nearest = 0;
            for (i, d) in dists.iter().enumerate() {
                if *d < dists[nearest] {
                    nearest = i;
                }
            }
            buckets[nearest].push(id);
            for (i, d) in dists.iter().enumerate() {
                let (lo, hi) = &mut ranges[i][nearest];
                *lo = lo.min(*d);
                *hi = hi.max(*d);
            }
        }
        // a degenerate split (all points in one bucket) would recurse forever
        if buckets.iter().filter(|b| !b.is_empty()).count() <= 1 {
            return Node::Leaf { ids };
        }
        let children = buckets.into_iter().map(|b| self.build_node(b)).collect();
        Node::Inner {
            pivots,
            children,
            ranges,
        }
    }

    /// Id of the point nearest to `q`; ties break toward the smaller id.
    pub fn nearest(&self, q: &Point) -> Result<usize, SpaceError> {
        if self.points.is_empty() {
            return Err(SpaceError::EmptyIndex);
        }
        self.space.check_point(q)?;
        Ok(self.k_nearest_unchecked(q, 1)[0].0)
    }

    /// Ids of the `min(k, len)` nearest points, sorted by `(distance, id)`.
    pub fn k_nearest(&self, q: &Point, k: usize) -> Result<Vec<usize>, SpaceError> {
        self.space.check_point(q)?;
        Ok(self
            .k_nearest_unchecked(q, k)
            .into_iter()
            .map(|(id, _)| id)
            .collect())
    }

    /// K-NN with distances, sorted by `(distance, id)`.
    pub fn k_nearest_unchecked(&self, q: &Point, k: usize) -> Vec<(usize, f64)> {
        if k == 0 || self.points.is_empty() {
            return Vec::new();
        }
        let mut heap = KBest::new(k);
        match self.kind {
            IndexKind::LinearScan => {
                for id in 0..self.points.len() {
                    heap.offer(id, self.dist(id, q));
                }
            }
            IndexKind::MetricTree => {
                if let Some(root) = &self.root {
                    self.knn_node(root, q, &mut heap);
                }
                for id in self.built_count..self.points.len() {
                    heap.offer(id, self.dist(id, q));
                }
            }
        }
        heap.into_sorted()
    }

    fn knn_node(&self, node: &Node, q: &Point, heap: &mut KBest) {
        match node {
            Node::Leaf { ids } => {
                for &id in ids {
                    heap.offer(id, self.dist(id, q));
                }
            }
            Node::Inner {
                pivots,
                children,
                ranges,
            } => {
                let pivot_dists: Vec<f64> =
                    pivots.iter().map(|&p| self.dist(p, q)).collect();
                // visit children closest-pivot-first for fast bound shrink
                let mut order: Vec<usize> = (0..children.len()).collect();
                order.sort_by(|&a, &b| pivot_dists[a].partial_cmp(&pivot_dists[b]).unwrap());
                for j in order {
                    let bound = heap.bound();
                    let prunable = pivot_dists.iter().enumerate().any(|(i, &dq)| {
                        let (lo, hi) = ranges[i][j];
                        lo > hi // empty child
                            || dq - bound > hi + PRUNE_EPS
                            || dq + bound < lo - PRUNE_EPS
                    });
                    if !prunable {
                        self.knn_node(&children[j], q, heap);
                    }
                }
            }
        }
    }

    /// Ids of all points within `r` (inclusive with slack), sorted by id.
    pub fn radius_near(&self, q: &Point, r: f64) -> Result<Vec<usize>, SpaceError> {
        self.space.check_point(q)?;
        Ok(self
            .radius_near_unchecked(q, r)
            .into_iter()
            .map(|(id, _)| id)
            .collect())
    }

    /// R-NN with distances, sorted by id.
    pub fn radius_near_unchecked(&self, q: &Point, r: f64) -> Vec<(usize, f64)> {
        let cutoff = r + RADIUS_SLACK;
        let mut out = Vec::new();
        match self.kind {
            IndexKind::LinearScan => {
                for id in 0..self.points.len() {
                    let d = self.dist(id, q);
                    if d <= cutoff {
                        out.push((id, d));
                    }
                }
            }
            IndexKind::MetricTree => {
                if let Some(root) = &self.root {
                    self.radius_node(root, q, cutoff, &mut out);
                }
                for id in self.built_count..self.points.len() {
                    let d = self.dist(id, q);
                    if d <= cutoff {
                        out.push((id, d));
                    }
                }
                out.sort_by_key(|(id, _)| *id);
            }
        }
        out
    }

    fn radius_node(&self, node: &Node, q: &Point, cutoff: f64, out: &mut Vec<(usize, f64)>) {
        match node {
            Node::Leaf { ids } => {
                for &id in ids {
                    let d = self.dist(id, q);
                    if d <= cutoff {
                        out.push((id, d));
                    }
                }
            }
            Node::Inner {
                pivots,
                children,
                ranges,
            } => {
                let pivot_dists: Vec<f64> = pivots.iter().map(|&p| self.dist(p, q)).collect();
                for (j, child) in children.iter().enumerate() {
                    let prunable = pivot_dists.iter().enumerate().any(|(i, &dq)| {
                        let (lo, hi) = ranges[i][j];
                        lo > hi
                            || dq - cutoff > hi + PRUNE_EPS
                            || dq + cutoff < lo - PRUNE_EPS
                    });
                    if !prunable {
                        self.radius_node(child, q, cutoff, out);
                    }
                }
            }
        }
    }
}

/// Bounded best-k collector ordered by `(distance, id)`.
struct KBest {
    k: usize,
    // max-heap on (distance, id) via sorted Vec; k is small in practice
    items: Vec<(usize, f64)>,
}

impl KBest {
    fn new(k: usize) -> Self {
        KBest {
            k,
            items: Vec::with_capacity(k + 1),
        }
    }

    /// Current k-th distance bound, infinite until the collector is full.
    fn bound(&self) -> f64 {
        if self.items.len() < self.k {
            f64::INFINITY
        } else {
            self.items.last().unwrap().1
        }
    }

    fn offer(&mut self, id: usize, d: f64) {
        if self.items.len() == self.k {
            let (wid, wd) = *self.items.last().unwrap();
            if d > wd || (d == wd && id > wid) {
                return;
            }
        }
        let pos = self
            .items
            .partition_point(|&(pid, pd)| pd < d || (pd == d && pid < id));
        self.items.insert(pos, (id, d));
        if self.items.len() > self.k {
            self.items.pop();
        }
    }

    fn into_sorted(self) -> Vec<(usize, f64)> {
        self.items
    }
}

/// All unordered pairs `(i, j)` with `i < j` at distance at most `r`
/// (inclusive with slack), sorted lexicographically. Equivalent to `n`
/// radius queries deduplicated.
pub fn all_pairs_near(
    points: &[Point],
    space: &StateSpace,
    r: f64,
) -> Result<Vec<(usize, usize)>, SpaceError> {
    for p in points {
        space.check_point(p)?;
    }
    let cutoff = r + RADIUS_SLACK;
    let mut out = Vec::new();
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            if space.distance_unchecked(&points[i], &points[j]) <= cutoff {
                out.push((i, j));
            }
        }
    }
    Ok(out)
}
