//! Platooning: a random leader plans freely, then each follower plans while
//! staying in communication with its predecessor in the order. Any failure
//! restarts from scratch with a new order.

use crate::comm::tcomm;
use crate::error::Result;
use crate::geom::Point;
use crate::planner::{init_paths, modify_if_overlap, random_order, PlannerConfig, Prepared};
use crate::problem::{Instance, Solution, Stats, Status};
use crate::sapf::{CommRequirement, SingleAgentQuery};
use crate::path::TimedPath;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

pub fn solve_plf(instance: &Instance, config: &PlannerConfig) -> Result<Solution> {
    let clock = Instant::now();
    config.validate()?;
    let prep = Prepared::new(instance, config)?;
    solve_plf_prepared(&prep, config, clock)
}

/// Team connectivity at every waypoint time of every path.
pub fn connected_at_waypoints(paths: &[TimedPath], model: &crate::comm::CommModel) -> bool {
    let mut times: Vec<f64> = paths.iter().flat_map(|p| p.waypoints.iter().map(|w| w.t)).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut pos: Vec<Point> = Vec::with_capacity(paths.len());
    times.iter().all(|&t| {
        pos.clear();
        pos.extend(paths.iter().map(|p| p.pos_at(t)));
        tcomm(&pos, model)
    })
}

/// One platoon attempt for a fixed order; `None` on failure.
pub fn plf_attempt(prep: &Prepared, config: &PlannerConfig, order: &[usize], clock: Instant) -> Result<Option<Vec<TimedPath>>> {
    let inst = prep.instance;
    let mut paths = init_paths(&inst.starts, 0.0, &inst.goals);
    let params = config.sapf(inst);
    for (k, &j) in order.iter().enumerate() {
        if paths[j].reached_goal {
            continue;
        }
        let guides: Vec<usize> = order[..k].iter().rev().copied().collect();
        let requirement = if k == 0 { CommRequirement::Exempt } else { CommRequirement::Platoon };
        let mut p = params;
        p.t_sa = p.t_sa.min((config.t_ds - clock.elapsed().as_secs_f64()).max(0.0));
        let r = SingleAgentQuery {
            agent: j,
            goal: inst.goals[j],
            graph: &prep.graph,
            world: &inst.world,
            planned: &paths,
            field: &prep.fields[j],
            model: &prep.model,
            params: p,
            requirement,
            guides: &guides,
        }
        .run()?;
        if !r.reached_goal() {
            return Ok(None);
        }
        paths[j].extend_with(&r.segment);
        paths[j].reached_goal = true;
        let mut probe = paths.clone();
        if !modify_if_overlap(j, &mut probe, &inst.goals, inst.d_c) {
            return Ok(None);
        }
    }
    Ok(connected_at_waypoints(&paths, &prep.model).then_some(paths))
}

pub fn solve_plf_prepared(prep: &Prepared, config: &PlannerConfig, clock: Instant) -> Result<Solution> {
    let inst = prep.instance;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut stats = Stats::default();
    let stationary = || init_paths(&inst.starts, 0.0, &inst.goals);
    if prep.infeasible() {
        stats.runtime = clock.elapsed().as_secs_f64();
        return Ok(Solution::new("plf", Status::Infeasible, stationary(), stats));
    }
    loop {
        if clock.elapsed().as_secs_f64() >= config.t_ds {
            stats.runtime = clock.elapsed().as_secs_f64();
            return Ok(Solution::new("plf", Status::Timeout, stationary(), stats));
        }
        if config.max_iterations.is_some_and(|m| stats.iterations >= m) {
            stats.runtime = clock.elapsed().as_secs_f64();
            return Ok(Solution::new("plf", Status::Partial, stationary(), stats));
        }
        stats.iterations += 1;
        let order = random_order(prep.n(), &mut rng);
        if let Some(paths) = plf_attempt(prep, config, &order, clock)? {
            stats.runtime = clock.elapsed().as_secs_f64();
            return Ok(Solution::new("plf", Status::AllReachGoal, paths, stats));
        }
    }
}
