//! Batch roadmap planners: sPRM* validates every candidate edge up front,
//! Lazy-sPRM* defers validation to the query loop.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::collision::{Checker, LpKind, Scenario};
use crate::error::SpaceError;
use crate::nn::IndexKind;
use crate::space::Point;

use super::{
    path_cost, resolve_strategy, shortest_path, ConnectionStrategy, EdgeStatus, PlanResult,
    Resolved, Roadmap, RoadmapStats, TimedIndex,
};

const START: usize = 0;
const GOAL: usize = 1;

/// Samples until `n_target` collision-free configurations are collected,
/// connects every node to its radial or k-NN neighbor set, and returns the
/// graph with all candidate edges still unvalidated.
fn build_graph<'a>(
    scenario: &'a Scenario,
    n_target: usize,
    strategy: &ConnectionStrategy,
    nn_kind: IndexKind,
    seed: u64,
) -> Result<(Roadmap, Checker<'a>, TimedIndex, RoadmapStats), SpaceError> {
    if n_target < 2 {
        return Err(SpaceError::Domain(format!(
            "need n_target >= 2, got {n_target}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ck = Checker::new(scenario);
    let mut roadmap = Roadmap::default();
    let mut stats = RoadmapStats::default();

    // start and goal are ordinary nodes
    roadmap.add_node(scenario.start.clone());
    roadmap.add_node(scenario.goal.clone());
    let mut attempts = 0usize;
    while roadmap.nodes.len() < n_target + 2 {
        attempts += 1;
        let p = scenario.space.sample_uniform(&mut rng);
        if ck.is_valid(&p) {
            roadmap.add_node(p);
        }
    }
    let n = roadmap.nodes.len();
    stats.n_free = n;
    stats.n_sampled = attempts;
    stats.iterations = n as u64;

    let mut index = TimedIndex::new(nn_kind, scenario.space.clone());
    for node in &roadmap.nodes {
        index.insert(&mut ck.ledger, node.clone());
    }

    match resolve_strategy(strategy, &scenario.space, n)? {
        Resolved::Radius(r) => {
            // one R-NN query per node; each undirected pair surfaces twice
            // and is kept once
            for i in 0..n {
                let found = index.radius_near(&mut ck.ledger, index.idx.point(i), r);
                stats.neighbors_reported += (found.len() as u64).saturating_sub(1);
                for (j, d) in found {
                    if j > i {
                        roadmap.add_edge(i, j, d, EdgeStatus::Unknown);
                    }
                }
            }
        }
        Resolved::Count(k) => {
            // fetch k+1 and drop the node itself; keep an edge when either
            // endpoint selects the other
            let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
            for i in 0..n {
                let found = index.k_nearest(&mut ck.ledger, index.idx.point(i), k + 1);
                stats.neighbors_reported += found.iter().filter(|(j, _)| *j != i).count() as u64;
                for (j, d) in found {
                    if j != i {
                        let (a, b) = if i < j { (i, j) } else { (j, i) };
                        pairs.push((a, b, d));
                    }
                }
            }
            pairs.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
            pairs.dedup_by_key(|e| (e.0, e.1));
            for (a, b, d) in pairs {
                roadmap.add_edge(a, b, d, EdgeStatus::Unknown);
            }
        }
    }
    Ok((roadmap, ck, index, stats))
}

fn finish(
    scenario: &Scenario,
    roadmap: &Roadmap,
    ck: Checker<'_>,
    mut stats: RoadmapStats,
    path_ids: Option<Vec<usize>>,
) -> PlanResult {
    let (unknown, free, blocked) = roadmap.edge_counts();
    stats.edges_unknown = unknown;
    stats.edges_free = free;
    stats.edges_blocked = blocked;
    match path_ids {
        Some(ids) => {
            let path: Vec<Point> = ids.iter().map(|&i| roadmap.nodes[i].clone()).collect();
            let cost = path_cost(&scenario.space, &path);
            PlanResult {
                success: true,
                path,
                cost,
                ledger: ck.ledger,
                stats,
            }
        }
        None => PlanResult::failure(ck.ledger, stats),
    }
}

/// sPRM*: every candidate edge is validated by the local planner, then the
/// shortest free path is extracted. A missing path is a result, not an error.
pub fn sprm_star(
    scenario: &Scenario,
    n_target: usize,
    strategy: &ConnectionStrategy,
    nn_kind: IndexKind,
    seed: u64,
) -> Result<PlanResult, SpaceError> {
    let (mut roadmap, mut ck, _index, stats) =
        build_graph(scenario, n_target, strategy, nn_kind, seed)?;

    // validate every edge once, in deterministic id order
    for u in 0..roadmap.nodes.len() {
        let targets: Vec<(usize, EdgeStatus)> = roadmap.adj[u]
            .iter()
            .filter(|e| e.to > u)
            .map(|e| (e.to, e.status))
            .collect();
        for (v, status) in targets {
            if status == EdgeStatus::Unknown {
                let ok = ck.local_plan(&roadmap.nodes[u], &roadmap.nodes[v], LpKind::Extension);
                roadmap.set_status(
                    u,
                    v,
                    if ok { EdgeStatus::Free } else { EdgeStatus::Blocked },
                );
            }
        }
    }

    let found = shortest_path(&roadmap, START, GOAL, |e| e.status == EdgeStatus::Free)
        .map(|(ids, _)| ids);
    Ok(finish(scenario, &roadmap, ck, stats, found))
}

/// Lazy-sPRM*: builds the same graph with zero local-planning calls, then
/// alternates shortest-path queries over non-blocked edges with validation
/// of the unknown edges on the returned path until a fully free path
/// survives or start and goal fall into different components.
pub fn lazy_sprm_star(
    scenario: &Scenario,
    n_target: usize,
    strategy: &ConnectionStrategy,
    nn_kind: IndexKind,
    seed: u64,
) -> Result<PlanResult, SpaceError> {
    let (mut roadmap, mut ck, _index, stats) =
        build_graph(scenario, n_target, strategy, nn_kind, seed)?;

    loop {
        let Some((ids, _)) =
            shortest_path(&roadmap, START, GOAL, |e| e.status != EdgeStatus::Blocked)
        else {
            return Ok(finish(scenario, &roadmap, ck, stats, None));
        };
        let mut all_free = true;
        for w in ids.windows(2) {
            let (u, v) = (w[0], w[1]);
            if roadmap.status(u, v) == Some(EdgeStatus::Unknown) {
                let ok = ck.local_plan(&roadmap.nodes[u], &roadmap.nodes[v], LpKind::Extension);
                roadmap.set_status(
                    u,
                    v,
                    if ok { EdgeStatus::Free } else { EdgeStatus::Blocked },
                );
                all_free &= ok;
            }
        }
        if all_free {
            return Ok(finish(scenario, &roadmap, ck, stats, Some(ids)));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::{make_scenario, ObstacleSet, ScenarioKind};
    use crate::planner::revalidate_path;
    use crate::space::StateSpace;

    fn radial_known(mu_free: f64) -> ConnectionStrategy {
        ConnectionStrategy::Radial {
            eta: 1.0,
            mu_free: Some(mu_free),
            heuristic: false,
        }
    }

    #[test]
    fn two_close_nodes_connect_directly() {
        // start and goal within the connection radius: the straight edge is
        // the shortest path
        let space = StateSpace::unit_cube(2);
        let sc = Scenario::new(
            space,
            ObstacleSet::Freespace,
            Point(vec![0.40, 0.40]),
            Point(vec![0.50, 0.50]),
            0.01,
        )
        .unwrap();
        let res = sprm_star(&sc, 2, &radial_known(1.0), IndexKind::LinearScan, 5).unwrap();
        assert!(res.success);
        let direct = sc.space.distance_unchecked(&sc.start, &sc.goal);
        assert!((res.cost - direct).abs() < 1e-12);
        assert_eq!(res.path.len(), 2);
    }

    #[test]
    fn free_diagonal_near_optimal() {
        let sc = make_scenario(&ScenarioKind::Hypercube { d: 2, mu: 0.0 }, 0).unwrap();
        let res = sprm_star(&sc, 500, &radial_known(1.0), IndexKind::LinearScan, 7).unwrap();
        assert!(res.success);
        let optimal = 2.0_f64.sqrt();
        assert!(
            res.cost >= optimal - 1e-9 && res.cost <= 1.10 * optimal,
            "cost = {}",
            res.cost
        );
        assert!(revalidate_path(&sc, &res.path, sc.step / 2.0));
    }

    #[test]
    fn ledger_counts_are_deterministic() {
        let sc = make_scenario(&ScenarioKind::Hypercube { d: 2, mu: 0.25 }, 0).unwrap();
        let run = || {
            sprm_star(&sc, 300, &radial_known(0.75), IndexKind::MetricTree, 3)
                .unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a.ledger.cd, b.ledger.cd);
        assert_eq!(a.ledger.rnn, b.ledger.rnn);
        assert_eq!(a.ledger.lp, b.ledger.lp);
        assert_eq!(a.ledger.cd_in_lp, b.ledger.cd_in_lp);
        assert_eq!(a.cost, b.cost);
        assert_eq!(a.stats.n_sampled, b.stats.n_sampled);
    }

    #[test]
    fn lazy_matches_sprm_cost_with_fewer_checks() {
        let sc = make_scenario(&ScenarioKind::Hypercube { d: 2, mu: 0.25 }, 0).unwrap();
        let full = sprm_star(&sc, 800, &radial_known(0.75), IndexKind::LinearScan, 11).unwrap();
        let lazy =
            lazy_sprm_star(&sc, 800, &radial_known(0.75), IndexKind::LinearScan, 11).unwrap();
        assert!(full.success && lazy.success);
        assert!((full.cost - lazy.cost).abs() < 1e-9);
        assert!(lazy.ledger.cd_in_lp < full.ledger.cd_in_lp);
        assert!(lazy.ledger.lp < full.ledger.lp);
    }

    #[test]
    fn lazy_freespace_validates_exactly_the_path() {
        let sc = make_scenario(&ScenarioKind::Freespace { d: 2 }, 0).unwrap();
        let res = lazy_sprm_star(&sc, 200, &radial_known(1.0), IndexKind::LinearScan, 2).unwrap();
        assert!(res.success);
        // no blocked edges anywhere: lp count equals path edge count
        assert_eq!(res.ledger.lp, (res.path.len() - 1) as u64);
        assert_eq!(res.stats.edges_blocked, 0);
    }

    #[test]
    fn knn_strategy_builds_symmetrized_graph() {
        let sc = make_scenario(&ScenarioKind::Freespace { d: 2 }, 0).unwrap();
        let res = sprm_star(&sc, 150, &ConnectionStrategy::knn(), IndexKind::MetricTree, 4)
            .unwrap();
        assert!(res.success);
        assert!(res.ledger.knn as usize == 152);
        assert_eq!(res.ledger.rnn, 0);
    }

    #[test]
    fn failure_is_a_result_with_full_ledger() {
        // a tiny roadmap in a cluttered box cannot connect the corners
        let sc = make_scenario(&ScenarioKind::Hypercube { d: 2, mu: 0.5 }, 0).unwrap();
        let res = sprm_star(&sc, 2, &radial_known(0.5), IndexKind::LinearScan, 1).unwrap();
        assert!(!res.success);
        assert!(res.cost.is_infinite());
        assert!(res.ledger.cd > 0);
    }
}
