//! RRT* with radial or k-NN rewiring neighborhoods.
//!
//! Per iteration: draw a sample (one CD), find the nearest tree node (one
//! NN), steer toward the sample up to the cap, and attempt the extension
//! with one LP. Successful extensions trigger a neighborhood query (one
//! R-NN or K-NN), choose-parent and rewiring with one LP per attempted
//! candidate, and a lazy goal connection whenever the new node falls within
//! the current connection radius of the goal.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::collision::{Checker, LpKind, Scenario};
use crate::error::SpaceError;
use crate::nn::IndexKind;
use crate::space::Point;
use crate::volume::{connection_radius, RadiusParams};

use super::{
    resolve_strategy, ConnectionStrategy, PlanResult, Resolved, RoadmapStats, TimedIndex,
};

/// Knobs specific to the incremental planner.
#[derive(Debug, Clone)]
pub struct RrtParams {
    /// Maximal extension length; `None` means `0.2 * extent(space)`.
    pub steer_cap: Option<f64>,
    /// Probability of sampling the goal configuration instead of uniformly.
    pub goal_bias: f64,
}

impl Default for RrtParams {
    fn default() -> Self {
        RrtParams {
            steer_cap: None,
            goal_bias: 0.0,
        }
    }
}

struct Tree {
    nodes: Vec<Point>,
    parent: Vec<usize>,
    edge_len: Vec<f64>,
    cost: Vec<f64>,
    children: Vec<Vec<usize>>,
}

impl Tree {
    fn new(root: Point) -> Self {
        Tree {
            nodes: vec![root],
            parent: vec![0],
            edge_len: vec![0.0],
            cost: vec![0.0],
            children: vec![Vec::new()],
        }
    }

    fn add(&mut self, p: Point, parent: usize, edge_len: f64) -> usize {
        let id = self.nodes.len();
        self.nodes.push(p);
        self.parent.push(parent);
        self.edge_len.push(edge_len);
        self.cost.push(self.cost[parent] + edge_len);
        self.children.push(Vec::new());
        self.children[parent].push(id);
        id
    }

    /// Reparents `node` and refreshes cost-to-come through its subtree.
    fn rewire(&mut self, node: usize, new_parent: usize, edge_len: f64) {
        let old = self.parent[node];
        self.children[old].retain(|&c| c != node);
        self.parent[node] = new_parent;
        self.edge_len[node] = edge_len;
        self.children[new_parent].push(node);
        let mut stack = vec![node];
        while let Some(u) = stack.pop() {
            self.cost[u] = self.cost[self.parent[u]] + self.edge_len[u];
            stack.extend(&self.children[u]);
        }
    }

    fn path_from_root(&self, mut node: usize) -> Vec<Point> {
        let mut ids = vec![node];
        while node != 0 {
            node = self.parent[node];
            ids.push(node);
        }
        ids.reverse();
        ids.into_iter().map(|i| self.nodes[i].clone()).collect()
    }
}

/// Runs RRT* for a fixed number of iterations.
pub fn rrt_star(
    scenario: &Scenario,
    iterations: usize,
    strategy: &ConnectionStrategy,
    nn_kind: IndexKind,
    seed: u64,
    params: &RrtParams,
) -> Result<PlanResult, SpaceError> {
    if iterations == 0 {
        return Err(SpaceError::Domain("need at least one iteration".into()));
    }
    let space = &scenario.space;
    let steer_cap = params.steer_cap.unwrap_or(0.2 * space.extent());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ck = Checker::new(scenario);
    let mut tree = Tree::new(scenario.start.clone());
    let mut index = TimedIndex::new(nn_kind, space.clone());
    index.insert(&mut ck.ledger, scenario.start.clone());

    // goal radius always follows the radial rule, whatever the rewiring
    // strategy; eta comes from the strategy when it has one
    let eta = match strategy {
        ConnectionStrategy::Radial { eta, .. } => *eta,
        ConnectionStrategy::Knn { .. } => 1.0,
    };
    let radius_params = RadiusParams::for_space(space, eta, scenario.known_mu_free())?;

    let mut goal_links: Vec<(usize, f64)> = Vec::new();
    let mut stats = RoadmapStats {
        n_sampled: iterations,
        iterations: iterations as u64,
        ..RoadmapStats::default()
    };

    for _ in 0..iterations {
        let sample = if params.goal_bias > 0.0 && rng.gen_bool(params.goal_bias) {
            scenario.goal.clone()
        } else {
            space.sample_uniform(&mut rng)
        };
        // the sample tally: one CD per iteration, mirroring how batch
        // planners account for their samples; the steered endpoint is
        // validated by the extension LP below
        let _ = ck.is_valid(&sample);

        let nearest = index.nearest(&mut ck.ledger, &sample);
        let d_near = space.distance_unchecked(&tree.nodes[nearest], &sample);
        let x_new = if d_near <= steer_cap {
            sample
        } else {
            space
                .interpolate(&tree.nodes[nearest], &sample, steer_cap / d_near)
                .expect("steering stays in space")
        };
        let d_new = d_near.min(steer_cap);

        let extended = ck.local_plan(&tree.nodes[nearest], &x_new, LpKind::Extension);
        if !extended || d_new < 1e-12 {
            continue;
        }

        // neighborhood of the new node over the current tree
        let t = tree.nodes.len();
        let r_n = if t < 2 {
            steer_cap
        } else {
            connection_radius(t, &radius_params)?.min(steer_cap)
        };
        let candidates = match resolve_strategy(strategy, space, t.max(2))? {
            Resolved::Radius(_) => {
                // the rewiring ball uses the same capped radius as the goal
                // connection
                index.radius_near(&mut ck.ledger, &x_new, r_n)
            }
            Resolved::Count(k) => index.k_nearest(&mut ck.ledger, &x_new, k),
        };
        stats.neighbors_reported += candidates.len() as u64;

        // choose parent: candidates in ascending potential-cost order; the
        // first collision-free improvement over the validated nearest wins
        let mut best_parent = nearest;
        let mut best_cost = tree.cost[nearest] + d_new;
        let mut order: Vec<(usize, f64)> = candidates.clone();
        order.sort_by(|a, b| {
            (tree.cost[a.0] + a.1, a.0)
                .partial_cmp(&(tree.cost[b.0] + b.1, b.0))
                .unwrap()
        });
        for &(j, dj) in &order {
            let potential = tree.cost[j] + dj;
            if potential + 1e-12 >= best_cost {
                break;
            }
            if j == nearest {
                continue;
            }
            if ck.local_plan(&tree.nodes[j], &x_new, LpKind::Rewire) {
                best_parent = j;
                best_cost = potential;
                break;
            }
        }
        let new_id = tree.add(x_new.clone(), best_parent, best_cost - tree.cost[best_parent]);
        index.insert(&mut ck.ledger, x_new.clone());
        stats.extensions += 1;

        // rewire the neighborhood through the new node
        for &(j, dj) in &candidates {
            if j == best_parent {
                continue;
            }
            let through = tree.cost[new_id] + dj;
            if through + 1e-12 < tree.cost[j]
                && ck.local_plan(&x_new, &tree.nodes[j], LpKind::Rewire)
            {
                tree.rewire(j, new_id, dj);
            }
        }

        // lazy goal connection
        let d_goal = space.distance_unchecked(&x_new, &scenario.goal);
        if d_goal <= r_n && ck.local_plan(&x_new, &scenario.goal, LpKind::Rewire) {
            goal_links.push((new_id, d_goal));
        }
    }

    stats.n_free = tree.nodes.len();
    let best = goal_links
        .iter()
        .map(|&(id, d)| (tree.cost[id] + d, id, d))
        .min_by(|a, b| a.partial_cmp(b).unwrap());

    #[cfg(debug_assertions)]
    {
        for u in 1..tree.nodes.len() {
            let expect = tree.cost[tree.parent[u]] + tree.edge_len[u];
            debug_assert!((tree.cost[u] - expect).abs() < 1e-9);
        }
    }

    match best {
        Some((cost, id, _d)) => {
            let mut path = tree.path_from_root(id);
            path.push(scenario.goal.clone());
            stats.n_free += 1;
            Ok(PlanResult {
                success: true,
                path,
                cost,
                ledger: ck.ledger,
                stats,
            })
        }
        None => Ok(PlanResult::failure(ck.ledger, stats)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::{make_scenario, ObstacleSet, ScenarioKind};
    use crate::planner::{path_cost, revalidate_path};
    use crate::space::StateSpace;

    fn freespace_2d() -> Scenario {
        Scenario::new(
            StateSpace::unit_cube(2),
            ObstacleSet::Freespace,
            Point(vec![0.1, 0.1]),
            Point(vec![0.9, 0.9]),
            0.01,
        )
        .unwrap()
    }

    #[test]
    fn freespace_run_is_near_optimal() {
        let sc = freespace_2d();
        let res = rrt_star(
            &sc,
            2000,
            &ConnectionStrategy::radial(1.0),
            IndexKind::MetricTree,
            3,
            &RrtParams::default(),
        )
        .unwrap();
        assert!(res.success);
        let direct = sc.space.distance_unchecked(&sc.start, &sc.goal);
        assert!(
            res.cost <= 1.15 * direct,
            "cost = {} vs direct {}",
            res.cost,
            direct
        );
        assert!((path_cost(&sc.space, &res.path) - res.cost).abs() < 1e-9);
        assert!(revalidate_path(&sc, &res.path, sc.step / 2.0));
    }

    #[test]
    fn extension_lp_count_equals_iterations() {
        let sc = freespace_2d();
        let res = rrt_star(
            &sc,
            500,
            &ConnectionStrategy::radial(1.0),
            IndexKind::LinearScan,
            1,
            &RrtParams::default(),
        )
        .unwrap();
        assert_eq!(res.ledger.lp_a, 500);
        assert_eq!(res.ledger.cd, 500);
        assert_eq!(res.ledger.nn, 500);
        // free space: every iteration extends
        assert_eq!(res.stats.extensions, 500);
    }

    #[test]
    fn obstacle_failures_reduce_extensions() {
        let sc = make_scenario(&ScenarioKind::Hypercube { d: 2, mu: 0.25 }, 0).unwrap();
        let res = rrt_star(
            &sc,
            800,
            &ConnectionStrategy::radial(1.0),
            IndexKind::MetricTree,
            2,
            &RrtParams::default(),
        )
        .unwrap();
        assert!(res.stats.extensions < res.stats.iterations);
        assert!(res.success);
        assert!(revalidate_path(&sc, &res.path, sc.step));
    }

    #[test]
    fn runs_are_deterministic() {
        let sc = make_scenario(&ScenarioKind::Hypercube { d: 3, mu: 0.25 }, 0).unwrap();
        let run = || {
            rrt_star(
                &sc,
                400,
                &ConnectionStrategy::radial(1.0),
                IndexKind::MetricTree,
                9,
                &RrtParams::default(),
            )
            .unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a.success, b.success);
        assert_eq!(a.cost, b.cost);
        assert_eq!(a.ledger.lp_b, b.ledger.lp_b);
        assert_eq!(a.ledger.cd_in_lp, b.ledger.cd_in_lp);
        assert_eq!(a.stats.extensions, b.stats.extensions);
    }

    #[test]
    fn knn_strategy_works() {
        let sc = freespace_2d();
        let res = rrt_star(
            &sc,
            1000,
            &ConnectionStrategy::knn(),
            IndexKind::MetricTree,
            4,
            &RrtParams::default(),
        )
        .unwrap();
        assert!(res.success);
        assert!(res.ledger.knn > 0);
        assert_eq!(res.ledger.rnn, 0);
    }

    #[test]
    fn goal_bias_flag_accepted() {
        let sc = freespace_2d();
        let res = rrt_star(
            &sc,
            300,
            &ConnectionStrategy::radial(1.0),
            IndexKind::LinearScan,
            5,
            &RrtParams {
                steer_cap: None,
                goal_bias: 0.05,
            },
        )
        .unwrap();
        assert!(res.success);
    }
}
