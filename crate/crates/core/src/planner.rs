//! The high-level planner: grows a team communication tree by repeatedly
//! selecting a node, drawing a random planning order and extending every
//! agent's path over several adaptive expansion rounds.

use crate::comm::{first_collision_time, tcomm, CommModel};
use crate::error::{Error, Result};
use crate::geom::{Point, POS_EPS};
use crate::heuristics::HeuristicField;
use crate::path::{MotionSegment, TimedPath};
use crate::problem::{Instance, Solution, Stats, Status};
use crate::sapf::{CommRequirement, SapfParams, SingleAgentQuery};
use crate::tct::{init_tree, HMode, Tct};
use crate::world::NavGraph;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    /// Total wall-clock budget.
    pub t_ds: f64,
    /// Budget of one single-agent search.
    pub t_sa: f64,
    /// Expansion rounds per iteration.
    pub m: usize,
    pub alpha: f64,
    /// Reselection penalty.
    pub c: f64,
    pub v_c: f64,
    pub d_c: f64,
    pub dt_comm: f64,
    pub seed: u64,
    pub max_iterations: Option<usize>,
    /// Per-search expansion cap; with a generous wall clock this makes runs
    /// reproducible.
    pub max_expansions: Option<usize>,
    pub h_mode: HMode,
    pub reinsert_closed: bool,
    pub union_coverage: bool,
    pub resolution: f64,
    pub min_cell_size: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            t_ds: 5.0,
            t_sa: 0.2,
            m: 5,
            alpha: 0.1,
            c: 0.05,
            v_c: 1.0,
            d_c: 0.5,
            dt_comm: 0.25,
            seed: 0,
            max_iterations: None,
            max_expansions: None,
            h_mode: HMode::Bookkeeping,
            reinsert_closed: false,
            union_coverage: true,
            resolution: 1.0,
            min_cell_size: 0.25,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("t_ds", self.t_ds),
            ("t_sa", self.t_sa),
            ("alpha", self.alpha),
            ("c", self.c),
            ("v_c", self.v_c),
            ("d_c", self.d_c),
            ("dt_comm", self.dt_comm),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.m == 0 {
            return Err(Error::InvalidConfig("m must be at least 1".into()));
        }
        Ok(())
    }

    pub fn sapf(&self, instance: &Instance) -> SapfParams {
        SapfParams {
            v_c: instance.v_c,
            d_c: instance.d_c,
            dt_comm: self.dt_comm,
            t_sa: self.t_sa,
            max_expansions: self.max_expansions,
            reinsert_closed: self.reinsert_closed,
            union_coverage: self.union_coverage,
        }
    }
}

/// Graph, heuristic fields and comm model shared by every planner.
pub struct Prepared<'a> {
    pub instance: &'a Instance,
    pub graph: NavGraph,
    pub fields: Vec<HeuristicField>,
    pub model: CommModel<'a>,
}

impl<'a> Prepared<'a> {
    pub fn new(instance: &'a Instance, config: &PlannerConfig) -> Result<Self> {
        if instance.starts.len() != instance.goals.len() {
            return Err(Error::InvalidConfig("starts and goals differ in length".into()));
        }
        let graph = NavGraph::from_world(&instance.world, config.resolution, config.min_cell_size)?;
        for p in &instance.starts {
            graph.locate(*p).ok_or(Error::PointBlocked { x: p.x, y: p.y })?;
        }
        let fields = instance
            .goals
            .iter()
            .map(|g| HeuristicField::for_goal(&graph, *g).ok_or(Error::PointBlocked { x: g.x, y: g.y }))
            .collect::<Result<Vec<_>>>()?;
        let model = CommModel::new(instance.comm, &instance.world);
        if !tcomm(&instance.starts, &model) {
            return Err(Error::StartsDisconnected);
        }
        if !tcomm(&instance.goals, &model) {
            return Err(Error::GoalsDisconnected);
        }
        Ok(Prepared {
            instance,
            graph,
            fields,
            model,
        })
    }

    /// True if some agent cannot reach its goal even alone.
    pub fn infeasible(&self) -> bool {
        self.instance
            .starts
            .iter()
            .zip(&self.fields)
            .any(|(s, f)| !f.at_point(*s, &self.graph, &self.instance.world).is_finite())
    }

    pub fn n(&self) -> usize {
        self.instance.n()
    }
}

pub fn random_order(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order
}

/// Single-waypoint paths at `state`, flagged where an agent sits on its goal.
pub fn init_paths(state: &[Point], t: f64, goals: &[Point]) -> Vec<TimedPath> {
    state
        .iter()
        .zip(goals)
        .map(|(p, g)| {
            let mut path = TimedPath::stationary(*p, t);
            path.reached_goal = p.approx_eq(*g, POS_EPS);
            path
        })
        .collect()
}

/// Collision-at-goal repair for `agent`, which has just arrived at its
/// goal. If another path later comes within `d_c` of the parked agent, every
/// path that runs past that moment is cut back to it. Returns true when no
/// such conflict exists.
pub fn modify_if_overlap(agent: usize, paths: &mut [TimedPath], goals: &[Point], d_c: f64) -> bool {
    let end = paths[agent].end();
    let mut t_c = f64::INFINITY;
    for (k, p) in paths.iter().enumerate() {
        if k == agent || p.end_time() <= end.t {
            continue;
        }
        let hold = MotionSegment::new(end.p, end.t, end.p, p.end_time());
        if let Some(t) = first_collision_time(&hold, p, d_c) {
            t_c = t_c.min(t);
        }
    }
    if !t_c.is_finite() {
        return true;
    }
    // stop a hair before contact so the cut ends are clear of the parked agent
    let cut = (t_c - 1e-6).max(end.t);
    for (k, p) in paths.iter_mut().enumerate() {
        if k != agent && p.end_time() > cut {
            p.trim_to(cut);
            p.reached_goal = p.end_pos().approx_eq(goals[k], POS_EPS);
        }
    }
    false
}

/// Runs the planner on `instance`.
pub fn solve(instance: &Instance, config: &PlannerConfig) -> Result<Solution> {
    let clock = Instant::now();
    config.validate()?;
    let prep = Prepared::new(instance, config)?;
    let (sol, _) = solve_prepared(&prep, config, clock)?;
    Ok(sol)
}

/// Like [`solve`], also returning the final tree.
pub fn solve_with_tree(instance: &Instance, config: &PlannerConfig) -> Result<(Solution, Tct)> {
    let clock = Instant::now();
    config.validate()?;
    let prep = Prepared::new(instance, config)?;
    solve_prepared(&prep, config, clock)
}

pub fn solve_prepared(prep: &Prepared, config: &PlannerConfig, clock: Instant) -> Result<(Solution, Tct)> {
    let inst = prep.instance;
    let n = prep.n();
    let mut tree = init_tree(&inst.starts, &inst.goals, &prep.fields, &prep.graph, &prep.model, config.alpha)?;
    let mut stats = Stats::default();
    let finish = |status, tree: &Tct, id: usize, mut stats: Stats| {
        stats.runtime = clock.elapsed().as_secs_f64();
        stats.tct_nodes = tree.len();
        Solution::new("maapgdl", status, tree.get_paths(id), stats)
    };
    if let Some(id) = tree.find_all_at_goal() {
        let sol = finish(Status::AllReachGoal, &tree, id, stats);
        return Ok((sol, tree));
    }
    if prep.infeasible() {
        let sol = finish(Status::Infeasible, &tree, 0, stats);
        return Ok((sol, tree));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let base_params = config.sapf(inst);
    loop {
        if clock.elapsed().as_secs_f64() >= config.t_ds {
            let id = tree.closest_node_to_goal();
            let sol = finish(Status::Timeout, &tree, id, stats);
            return Ok((sol, tree));
        }
        if config.max_iterations.is_some_and(|m| stats.iterations >= m) {
            let id = tree.closest_node_to_goal();
            let sol = finish(Status::Partial, &tree, id, stats);
            return Ok((sol, tree));
        }
        stats.iterations += 1;
        let v = tree.select_node(config.c);
        let order = random_order(n, &mut rng);
        let node = tree.node(v);
        let mut paths = init_paths(&node.state, node.t, &inst.goals);
        let mut rounds = 0;
        for _ in 0..config.m {
            rounds += 1;
            let mut all_rg = true;
            for &j in &order {
                if paths[j].reached_goal {
                    continue;
                }
                let remaining = config.t_ds - clock.elapsed().as_secs_f64();
                let mut params = base_params;
                params.t_sa = params.t_sa.min(remaining.max(0.0));
                let r = SingleAgentQuery {
                    agent: j,
                    goal: inst.goals[j],
                    graph: &prep.graph,
                    world: &inst.world,
                    planned: &paths,
                    field: &prep.fields[j],
                    model: &prep.model,
                    params,
                    requirement: CommRequirement::Dynamic,
                    guides: &[],
                }
                .run()?;
                paths[j].extend_with(&r.segment);
                if r.reached_goal() {
                    paths[j].reached_goal = true;
                    all_rg &= modify_if_overlap(j, &mut paths, &inst.goals, inst.d_c);
                } else {
                    all_rg = false;
                }
            }
            if all_rg {
                break;
            }
        }
        stats.rounds_last = rounds;
        stats.rounds_max = stats.rounds_max.max(rounds);
        tree.expand_tree(&paths, v, &prep.fields, &prep.graph, &prep.model, config.h_mode);
        if let Some(id) = tree.find_all_at_goal() {
            let sol = finish(Status::AllReachGoal, &tree, id, stats);
            return Ok((sol, tree));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comm::CommKind;
    use crate::path::Waypoint;
    use crate::world::WorldMap;

    #[test]
    fn single_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(random_order(1, &mut rng), vec![0]);
        let a: Vec<_> = (0..5).map(|_| random_order(6, &mut rng)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        random_order(1, &mut rng);
        let b: Vec<_> = (0..5).map(|_| random_order(6, &mut rng)).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn overlap_trims_to_first_contact() {
        let goal = Point::new(5.0, 0.0);
        let mut parked = TimedPath::stationary(Point::new(4.0, 0.0), 0.0);
        parked.extend_with(&[Waypoint::new(goal, 1.0)]);
        parked.reached_goal = true;
        // passes over the goal along y = 0, starting at x = 0 at t = 0
        let crossing = TimedPath::from_waypoints(vec![
            Waypoint::new(Point::new(0.0, 3.0), 0.0),
            Waypoint::new(Point::new(5.0, 3.0), 5.0),
            Waypoint::new(Point::new(5.0, -3.0), 11.0),
        ]);
        let bystander = TimedPath::from_waypoints(vec![
            Waypoint::new(Point::new(0.0, 10.0), 0.0),
            Waypoint::new(Point::new(20.0, 10.0), 20.0),
        ]);
        let goals = [goal, Point::new(5.0, -3.0), Point::new(20.0, 10.0)];
        let mut paths = vec![parked, crossing, bystander];
        assert!(!modify_if_overlap(0, &mut paths, &goals, 0.5));
        // the crosser enters the 0.5 m disc at y = 0.5, t = 7.5
        let t_c = 7.5;
        assert!((paths[1].end_time() - t_c).abs() < 1e-5);
        assert!((paths[2].end_time() - t_c).abs() < 1e-5);
        assert!(!paths[1].reached_goal);
        assert!(modify_if_overlap(0, &mut paths, &goals, 0.5));
    }

    #[test]
    fn lone_agent_solved_in_one_iteration() {
        let w = WorldMap::empty(20.0, 20.0, "t").unwrap();
        let inst = Instance::new(w, vec![Point::new(1.5, 1.5)], vec![Point::new(17.2, 12.9)], CommKind::lcr(15.0));
        let sol = solve(&inst, &PlannerConfig::default()).unwrap();
        assert_eq!(sol.status, Status::AllReachGoal);
        assert_eq!(sol.stats.iterations, 1);
    }
}
