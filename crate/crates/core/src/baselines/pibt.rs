//! PIBT with a communication filter. Agents advance in synchronized steps;
//! within a step they act in priority order with priority inheritance, and
//! every agent but the first to act must keep ACOMM with one that already
//! moved.

use super::push_move;
use crate::comm::{acomm_during_move, collision_during_move};
use crate::error::Result;
use crate::geom::POS_EPS;
use crate::heuristics::get_heuristic;
use crate::path::{MotionSegment, TimedPath};
use crate::planner::{PlannerConfig, Prepared};
use crate::problem::{Instance, Solution, Stats, Status};
use crate::world::AugmentedGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

/// Step limit when the wall clock does not stop the run first.
pub const MAX_STEPS: usize = 20_000;

pub fn solve_pibt_comm(instance: &Instance, config: &PlannerConfig) -> Result<Solution> {
    let clock = Instant::now();
    config.validate()?;
    let prep = Prepared::new(instance, config)?;
    solve_pibt_prepared(&prep, config, clock)
}

struct Step<'a> {
    aug: &'a AugmentedGraph<'a>,
    adj: &'a [Vec<(usize, f64)>],
    prep: &'a Prepared<'a>,
    h: &'a [Vec<f64>],
    cur: Vec<usize>,
    next: Vec<Option<usize>>,
    /// One-step motion of every decided agent, in decision order.
    moves: Vec<TimedPath>,
    decided: Vec<usize>,
    v_c: f64,
    d_c: f64,
    dt: f64,
}

impl Step<'_> {
    fn h(&self, agent: usize, v: usize) -> f64 {
        self.h[agent][v]
    }

    fn motion(&self, from: usize, to: usize) -> MotionSegment {
        let (p0, p1) = (self.aug.position(from), self.aug.position(to));
        MotionSegment::at_speed(p0, p1, 0.0, self.v_c)
    }

    fn path_of(&self, mv: &MotionSegment) -> TimedPath {
        let mut p = TimedPath::stationary(mv.p0, 0.0);
        push_move(&mut p, mv.p1, 0.0, self.v_c);
        p
    }

    fn clear_of_decided(&self, mv: &MotionSegment) -> bool {
        self.decided.iter().all(|&k| {
            let other = &self.moves[k];
            let hold = MotionSegment::new(mv.p1, mv.t1, mv.p1, mv.t1.max(other.end_time()));
            !collision_during_move(mv, other, self.d_c) && !collision_during_move(&hold, other, self.d_c)
        })
    }

    fn keeps_comm(&self, mv: &MotionSegment) -> bool {
        if self.decided.is_empty() {
            return true;
        }
        let span = self.decided.iter().map(|&k| self.moves[k].end_time()).fold(mv.t1, f64::max);
        self.decided.iter().any(|&k| {
            let o = &self.moves[k];
            acomm_during_move(mv, o, &self.prep.model, self.dt)
                && acomm_during_move(&MotionSegment::new(mv.p1, mv.t1, mv.p1, span), o, &self.prep.model, self.dt)
        })
    }

    /// Undecided agents whose current position the move would hit.
    fn blockers(&self, agent: usize, mv: &MotionSegment) -> Vec<usize> {
        (0..self.cur.len())
            .filter(|&k| k != agent && self.next[k].is_none())
            .filter(|&k| {
                let still = TimedPath::stationary(self.aug.position(self.cur[k]), 0.0);
                let hold = MotionSegment::new(mv.p1, mv.t1, mv.p1, mv.t1 + 1.0);
                collision_during_move(mv, &still, self.d_c) || collision_during_move(&hold, &still, self.d_c)
            })
            .collect()
    }

    fn commit(&mut self, agent: usize, to: usize, mv: &MotionSegment) {
        self.next[agent] = Some(to);
        self.moves[agent] = self.path_of(mv);
        self.decided.push(agent);
    }

    fn undo(&mut self, agent: usize) {
        self.next[agent] = None;
        self.decided.retain(|&k| k != agent);
    }

    /// Priority inheritance: decide `agent`, pushing a blocking agent if
    /// needed. `parent` is the agent that pushed this one.
    fn pibt(&mut self, agent: usize, parent: Option<usize>) -> bool {
        let from = self.cur[agent];
        let mut cands: Vec<(usize, usize)> = std::iter::once(from)
            .chain(self.adj[from].iter().map(|e| e.0))
            .enumerate()
            .collect();
        cands.sort_by(|a, b| {
            self.h(agent, a.1)
                .total_cmp(&self.h(agent, b.1))
                .then_with(|| a.0.cmp(&b.0))
        });
        for (_, to) in cands {
            if parent.is_some_and(|p| self.cur[p] == to) {
                continue;
            }
            if self.next.iter().any(|n| *n == Some(to)) {
                continue;
            }
            let mv = self.motion(from, to);
            if !self.clear_of_decided(&mv) || !self.keeps_comm(&mv) {
                continue;
            }
            let blockers = self.blockers(agent, &mv);
            if blockers.len() > 1 {
                continue;
            }
            self.commit(agent, to, &mv);
            match blockers.first() {
                None => return true,
                Some(&b) => {
                    if self.pibt(b, Some(agent)) {
                        return true;
                    }
                    self.undo(agent);
                }
            }
        }
        false
    }
}

pub fn solve_pibt_prepared(prep: &Prepared, config: &PlannerConfig, clock: Instant) -> Result<Solution> {
    let inst = prep.instance;
    let n = prep.n();
    let mut aug = AugmentedGraph::new(&prep.graph);
    let mut cur: Vec<usize> = inst.starts.iter().map(|p| aug.inject(*p)).collect::<Result<_>>()?;
    let goals: Vec<usize> = inst.goals.iter().map(|p| aug.inject(*p)).collect::<Result<_>>()?;
    let mut buf = Vec::new();
    let adj: Vec<Vec<(usize, f64)>> = (0..aug.len())
        .map(|v| {
            aug.neighbors_into(v, &mut buf);
            buf.clone()
        })
        .collect();
    let step_len = adj.iter().flatten().map(|e| e.1).fold(0.0, f64::max) / inst.v_c;
    let h: Vec<Vec<f64>> = prep
        .fields
        .iter()
        .map(|f| (0..aug.len()).map(|v| get_heuristic(v, &aug, f)).collect())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let eps: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let mut prio = eps.clone();
    let mut paths: Vec<TimedPath> = inst.starts.iter().map(|p| TimedPath::stationary(*p, 0.0)).collect();
    let mut stats = Stats::default();
    let mut t = 0.0;
    let status = if prep.infeasible() {
        Status::Infeasible
    } else {
        loop {
            if cur == goals {
                break Status::AllReachGoal;
            }
            if clock.elapsed().as_secs_f64() >= config.t_ds || stats.iterations >= MAX_STEPS {
                break Status::Timeout;
            }
            stats.iterations += 1;
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| prio[b].total_cmp(&prio[a]).then(a.cmp(&b)));
            let mut step = Step {
                aug: &aug,
                adj: &adj,
                prep,
                h: &h,
                cur: cur.clone(),
                next: vec![None; n],
                moves: vec![TimedPath::stationary(Default::default(), 0.0); n],
                decided: Vec::new(),
                v_c: inst.v_c,
                d_c: inst.d_c,
                dt: config.dt_comm,
            };
            let mut stuck = false;
            for &a in &order {
                if step.next[a].is_none() && !step.pibt(a, None) {
                    stuck = true;
                    break;
                }
            }
            if stuck {
                break Status::Stuck;
            }
            let next: Vec<usize> = step.next.iter().map(|x| x.expect("all decided")).collect();
            if next == cur {
                break Status::Stuck;
            }
            for j in 0..n {
                push_move(&mut paths[j], aug.position(next[j]), t, inst.v_c);
                if next[j] == goals[j] {
                    prio[j] = eps[j];
                } else {
                    prio[j] += 1.0;
                }
            }
            cur = next;
            t += step_len;
        }
    };
    for (j, p) in paths.iter_mut().enumerate() {
        p.reached_goal = p.end_pos().approx_eq(inst.goals[j], POS_EPS);
    }
    stats.runtime = clock.elapsed().as_secs_f64();
    Ok(Solution::new("pibt-comm", status, paths, stats))
}
