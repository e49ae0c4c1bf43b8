//! Scenario definitions, configuration validity, resolution-stepped local
//! planning, and the instrumented ledger behind the NN-to-CD time ratio.
//!
//! A collision check answers whether one configuration is valid; a local
//! plan subdivides the geodesic between two configurations into
//! `ceil(distance / step)` checked configurations (endpoint included, start
//! excluded since planners validate nodes before connecting them). The
//! ledger brackets each primitive call with a monotonic clock; timer
//! overhead is part of the measured cost, matching a wall-time methodology.

use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::SpaceError;
use crate::space::{Point, StateSpace};

/// Default obstacle inflation radius for segment soups; gives zero-measure
/// segments positive measure for a point robot.
pub const DEFAULT_INFLATION: f64 = 0.02;
/// Default local-planning resolution as a fraction of the space extent.
pub const DEFAULT_RES_FRACTION: f64 = 0.01;
/// Start/goal inset from exact corners, which lie on the boundary.
const CORNER_EPS: f64 = 1e-6;

/// A 2-D segment obstacle.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub a: (f64, f64),
    pub b: (f64, f64),
}

impl Segment {
    /// Euclidean distance from a point to the segment.
    pub fn distance_to(&self, x: f64, y: f64) -> f64 {
        let (ax, ay) = self.a;
        let (bx, by) = self.b;
        let (dx, dy) = (bx - ax, by - ay);
        let len2 = dx * dx + dy * dy;
        let t = if len2 > 0.0 {
            (((x - ax) * dx + (y - ay) * dy) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let (px, py) = (ax + t * dx, ay + t * dy);
        ((x - px) * (x - px) + (y - py) * (y - py)).sqrt()
    }
}

/// The obstacle set of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum ObstacleSet {
    /// Centered axis-aligned box of measure `mu` inside the unit hypercube:
    /// a configuration collides iff every Euclidean coordinate lies within
    /// `mu^(1/d) / 2` of 0.5.
    HypercubeBox { mu: f64 },
    /// Inflated 2-D segments checked by an unaccelerated scan, so a single
    /// check costs time linear in the segment count.
    SegmentSoup2D {
        segments: Vec<Segment>,
        inflation: f64,
    },
    /// Free strip `[0, length] x [0, 1]`: valid iff the first two Euclidean
    /// coordinates are inside.
    RectangleStrip { length: f64 },
    /// No obstacles.
    Freespace,
}

/// A planning problem: space, obstacles, endpoints and LP resolution.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub space: StateSpace,
    pub obstacles: ObstacleSet,
    pub start: Point,
    pub goal: Point,
    /// LP resolution in absolute distance units.
    pub step: f64,
    /// When set, `step = res_fraction * extent(space)`.
    pub res_fraction: Option<f64>,
    /// Free-space measure when the obstacle measure is known exactly;
    /// otherwise radius computations fall back to the ambient measure.
    pub mu_free: Option<f64>,
}

impl Scenario {
    /// Builds a scenario and validates that start and goal are collision-free.
    pub fn new(
        space: StateSpace,
        obstacles: ObstacleSet,
        start: Point,
        goal: Point,
        res_fraction: f64,
    ) -> Result<Self, SpaceError> {
        space.validate()?;
        space.check_point(&start)?;
        space.check_point(&goal)?;
        let mut sc = Scenario {
            space,
            obstacles,
            start,
            goal,
            step: 0.0,
            res_fraction: Some(res_fraction),
            mu_free: None,
        };
        sc.step = res_fraction * sc.space.extent();
        if !sc.valid_uncounted(&sc.start) || !sc.valid_uncounted(&sc.goal) {
            return Err(SpaceError::InvalidSpace(
                "start or goal configuration is in collision".into(),
            ));
        }
        Ok(sc)
    }

    /// Sets the LP resolution as a fraction of the extent.
    pub fn set_res_fraction(&mut self, f: f64) {
        self.res_fraction = Some(f);
        self.step = f * self.space.extent();
    }

    /// Validity predicate without ledger accounting (setup and tests).
    pub fn valid_uncounted(&self, x: &Point) -> bool {
        match &self.obstacles {
            ObstacleSet::HypercubeBox { mu } => {
                if *mu == 0.0 {
                    return true;
                }
                let d = euclidean_coord_count(&self.space);
                let half = 0.5 * mu.powf(1.0 / d as f64);
                // collides iff every euclidean coordinate is inside the box
                !every_euclidean_coord(&self.space, &x.0, &mut |c| (c - 0.5).abs() <= half)
            }
            ObstacleSet::SegmentSoup2D {
                segments,
                inflation,
            } => {
                let (px, py) = first_plane_coords(&self.space, &x.0);
                // deliberate theta(m) scan: check cost scales with obstacle
                // complexity
                let mut hit = false;
                for s in segments {
                    if s.distance_to(px, py) <= *inflation {
                        hit = true;
                    }
                }
                !hit
            }
            ObstacleSet::RectangleStrip { length } => {
                let (px, py) = first_plane_coords(&self.space, &x.0);
                px >= 0.0 && px <= *length && py >= 0.0 && py <= 1.0
            }
            ObstacleSet::Freespace => true,
        }
    }

    /// Known free-space measure, if the obstacle measure is exact.
    pub fn known_mu_free(&self) -> Option<f64> {
        self.mu_free
    }
}

/// Counts Euclidean coordinates across the space tree.
fn euclidean_coord_count(space: &StateSpace) -> usize {
    match space {
        StateSpace::L2 { d, .. } | StateSpace::L1 { d, .. } => *d,
        StateSpace::Compound { children, .. } => {
            children.iter().map(euclidean_coord_count).sum()
        }
        _ => 0,
    }
}

/// Applies `f` to every Euclidean coordinate; true iff all pass.
fn every_euclidean_coord(space: &StateSpace, xs: &[f64], f: &mut impl FnMut(f64) -> bool) -> bool {
    fn walk(space: &StateSpace, xs: &[f64], off: &mut usize, f: &mut impl FnMut(f64) -> bool) -> bool {
        match space {
            StateSpace::L2 { d, .. } | StateSpace::L1 { d, .. } => {
                let ok = xs[*off..*off + d].iter().all(|c| f(*c));
                *off += space.layout_len();
                ok
            }
            StateSpace::Compound { children, .. } => {
                let mut ok = true;
                for c in children {
                    ok &= walk(c, xs, off, f);
                }
                ok
            }
            other => {
                *off += other.layout_len();
                true
            }
        }
    }
    let mut off = 0;
    walk(space, xs, &mut off, f)
}

/// First two coordinates of the first planar Euclidean leaf.
fn first_plane_coords(space: &StateSpace, xs: &[f64]) -> (f64, f64) {
    fn find(space: &StateSpace, off: usize) -> Option<usize> {
        match space {
            StateSpace::L2 { d, .. } | StateSpace::L1 { d, .. } if *d >= 2 => Some(off),
            StateSpace::Compound { children, .. } => {
                let mut o = off;
                for c in children {
                    if let Some(found) = find(c, o) {
                        return Some(found);
                    }
                    o += c.layout_len();
                }
                None
            }
            _ => None,
        }
    }
    let off = find(space, 0).expect("scenario space has no planar Euclidean leaf");
    (xs[off], xs[off + 1])
}

/// Counters and accumulated wall time for the primitive operations of one
/// planner run. `cd` counts standalone validity checks; `cd_in_lp` counts
/// checks performed inside local plans (disjoint tallies). `t_cd` covers
/// both kinds; `t_nn` covers the four query types plus index maintenance.
#[derive(Debug, Clone, Default)]
pub struct PrimitiveLedger {
    pub nn: u64,
    pub rnn: u64,
    pub knn: u64,
    pub ap: u64,
    pub cd: u64,
    pub lp: u64,
    pub lp_a: u64,
    pub lp_b: u64,
    pub cd_in_lp: u64,
    pub t_nn: Duration,
    pub t_cd: Duration,
}

impl PrimitiveLedger {
    /// Ratio of NN wall time to CD wall time.
    pub fn chi(&self) -> Result<f64, SpaceError> {
        if self.t_cd.is_zero() {
            return Err(SpaceError::UndefinedRatio);
        }
        Ok(self.t_nn.as_secs_f64() / self.t_cd.as_secs_f64())
    }

    pub fn t_nn_ns(&self) -> u64 {
        self.t_nn.as_nanos() as u64
    }

    pub fn t_cd_ns(&self) -> u64 {
        self.t_cd.as_nanos() as u64
    }
}

/// A scenario paired with the ledger of one planner run; routes every
/// primitive call through the timers.
pub struct Checker<'a> {
    pub scenario: &'a Scenario,
    pub ledger: PrimitiveLedger,
    scratch: Point,
}

/// Which planner phase issued a local plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpKind {
    /// Batch planners and RRT* tree extension.
    Extension,
    /// RRT* choose-parent / rewire / goal connection.
    Rewire,
}

impl<'a> Checker<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        Checker {
            scenario,
            ledger: PrimitiveLedger::default(),
            scratch: Point(vec![0.0; scenario.space.layout_len()]),
        }
    }

    /// Standalone collision check: one CD.
    pub fn is_valid(&mut self, x: &Point) -> bool {
        let t0 = Instant::now();
        let ok = self.scenario.valid_uncounted(x);
        self.ledger.t_cd += t0.elapsed();
        self.ledger.cd += 1;
        ok
    }

    /// Local plan between two configurations: one LP, `ceil(d / step)`
    /// interior checks recorded as CD-in-LP. All interior configurations are
    /// evaluated so the recorded count always matches the work performed.
    pub fn local_plan(&mut self, x: &Point, y: &Point, kind: LpKind) -> bool {
        let t0 = Instant::now();
        let space = &self.scenario.space;
        let d = space.distance_unchecked(x, y);
        // the relative epsilon keeps ceil from bumping an intended integer
        // ratio up by one over fp noise in the distance
        let k = ((d / self.scenario.step) * (1.0 - 1e-12)).ceil() as u64;
        let mut ok = true;
        for i in 1..=k {
            let t = i as f64 / k as f64;
            space.interpolate_into(x, y, t, &mut self.scratch);
            ok &= self.scenario.valid_uncounted(&self.scratch);
        }
        self.ledger.t_cd += t0.elapsed();
        self.ledger.lp += 1;
        match kind {
            LpKind::Extension => self.ledger.lp_a += 1,
            LpKind::Rewire => self.ledger.lp_b += 1,
        }
        self.ledger.cd_in_lp += k;
        ok
    }
}

/// Scenario families exposed by the harness.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioKind {
    /// `[0,1]^d` with the centered box obstacle; start and goal near the
    /// opposite corners.
    Hypercube { d: usize, mu: f64 },
    /// Unit square with `m` inflated polygon-edge segments.
    SegmentSoup { m: usize, inflation: f64 },
    /// Long free strip crossed with a lightly weighted circle; the thin
    /// factor makes full-space connection radii spill out of the circle.
    Strip { length: f64, w2: f64 },
    /// Obstacle-free unit cube.
    Freespace { d: usize },
}

/// Builds a scenario from a family descriptor. Segment soups are
/// rejection-resampled (up to 100 rounds) until start and goal are valid and
/// a coarse-grid path exists between them.
pub fn make_scenario(kind: &ScenarioKind, seed: u64) -> Result<Scenario, SpaceError> {
    match kind {
        ScenarioKind::Hypercube { d, mu } => {
            if !(0.0..1.0).contains(mu) {
                return Err(SpaceError::Domain(format!("mu = {mu} outside [0, 1)")));
            }
            let space = StateSpace::unit_cube(*d);
            let start = Point(vec![CORNER_EPS; *d]);
            let goal = Point(vec![1.0 - CORNER_EPS; *d]);
            let mut sc = Scenario::new(
                space,
                ObstacleSet::HypercubeBox { mu: *mu },
                start,
                goal,
                DEFAULT_RES_FRACTION,
            )?;
            sc.mu_free = Some(1.0 - mu);
            Ok(sc)
        }
        ScenarioKind::SegmentSoup { m, inflation } => make_soup(*m, *inflation, seed),
        ScenarioKind::Strip { length, w2 } => {
            let space = StateSpace::compound(
                vec![
                    StateSpace::l2(vec![(0.0, *length), (0.0, 1.0)]),
                    StateSpace::circle(),
                ],
                vec![1.0, *w2],
                1.0,
            );
            let start = Point(vec![CORNER_EPS, 0.5, 0.0]);
            let goal = Point(vec![length - CORNER_EPS, 0.5, 0.0]);
            Scenario::new(
                space,
                ObstacleSet::RectangleStrip { length: *length },
                start,
                goal,
                DEFAULT_RES_FRACTION,
            )
        }
        ScenarioKind::Freespace { d } => {
            let space = StateSpace::unit_cube(*d);
            let start = Point(vec![CORNER_EPS; *d]);
            let goal = Point(vec![1.0 - CORNER_EPS; *d]);
            Scenario::new(
                space,
                ObstacleSet::Freespace,
                start,
                goal,
                DEFAULT_RES_FRACTION,
            )
        }
    }
}

/// Segment soup generation: edges of random convex polygons (vertices at
/// sorted angles on a circle), truncated to exactly `m` segments. Polygon
/// radii shrink as `m` grows so free space stays usable.
fn make_soup(m: usize, inflation: f64, seed: u64) -> Result<Scenario, SpaceError> {
    let space = StateSpace::unit_cube(2);
    let start = Point(vec![0.02, 0.02]);
    let goal = Point(vec![0.98, 0.98]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius_scale = (100.0 / (m.max(1) as f64)).sqrt().clamp(0.25, 1.0);

    for _round in 0..100 {
        let mut segments = Vec::with_capacity(m);
        'outer: while segments.len() < m {
            let cx: f64 = rng.gen_range(0.12..0.88);
            let cy: f64 = rng.gen_range(0.12..0.88);
            let radius: f64 = rng.gen_range(0.03..0.08) * radius_scale;
            let verts: usize = rng.gen_range(5..=9);
            let mut angles: Vec<f64> = (0..verts)
                .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
                .collect();
            angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let ring: Vec<(f64, f64)> = angles
                .iter()
                .map(|a| (cx + radius * a.cos(), cy + radius * a.sin()))
                .collect();
            for i in 0..ring.len() {
                segments.push(Segment {
                    a: ring[i],
                    b: ring[(i + 1) % ring.len()],
                });
                if segments.len() == m {
                    break 'outer;
                }
            }
        }
        let sc = Scenario {
            space: space.clone(),
            obstacles: ObstacleSet::SegmentSoup2D {
                segments,
                inflation,
            },
            start: start.clone(),
            goal: goal.clone(),
            step: DEFAULT_RES_FRACTION * space.extent(),
            res_fraction: Some(DEFAULT_RES_FRACTION),
            mu_free: None,
        };
        if sc.valid_uncounted(&sc.start)
            && sc.valid_uncounted(&sc.goal)
            && coarse_grid_connected(&sc, 64)
        {
            return Ok(sc);
        }
    }
    Err(SpaceError::GenerationFailed(100))
}

/// 4-neighbor BFS over cell centers; a cheap feasibility filter for
/// generated scenarios.
fn coarse_grid_connected(sc: &Scenario, g: usize) -> bool {
    let cell = |v: f64| (((v * g as f64) as usize).min(g - 1), ());
    let idx = |i: usize, j: usize| i * g + j;
    let mut free = vec![false; g * g];
    let mut p = Point(vec![0.0, 0.0]);
    for i in 0..g {
        for j in 0..g {
            p.0[0] = (i as f64 + 0.5) / g as f64;
            p.0[1] = (j as f64 + 0.5) / g as f64;
            free[idx(i, j)] = sc.valid_uncounted(&p);
        }
    }
    let (si, sj) = (cell(sc.start.0[0]).0, cell(sc.start.0[1]).0);
    let (gi, gj) = (cell(sc.goal.0[0]).0, cell(sc.goal.0[1]).0);
    if !free[idx(si, sj)] || !free[idx(gi, gj)] {
        return false;
    }
    let mut seen = vec![false; g * g];
    let mut queue = std::collections::VecDeque::new();
    seen[idx(si, sj)] = true;
    queue.push_back((si, sj));
    while let Some((i, j)) = queue.pop_front() {
        if (i, j) == (gi, gj) {
            return true;
        }
        let push = |ni: usize, nj: usize, seen: &mut Vec<bool>, queue: &mut std::collections::VecDeque<(usize, usize)>| {
            if free[idx(ni, nj)] && !seen[idx(ni, nj)] {
                seen[idx(ni, nj)] = true;
                queue.push_back((ni, nj));
            }
        };
        if i > 0 {
            push(i - 1, j, &mut seen, &mut queue);
        }
        if i + 1 < g {
            push(i + 1, j, &mut seen, &mut queue);
        }
        if j > 0 {
            push(i, j - 1, &mut seen, &mut queue);
        }
        if j + 1 < g {
            push(i, j + 1, &mut seen, &mut queue);
        }
    }
    false
}
