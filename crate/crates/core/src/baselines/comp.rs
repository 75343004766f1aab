//! Composite-state A*: one search over the joint positions of all agents.

use super::push_move;
use crate::comm::{collision_during_move, tcomm};
use crate::error::Result;
use crate::geom::Point;
use crate::heuristics::get_heuristic;
use crate::path::{MotionSegment, TimedPath, Waypoint};
use crate::planner::{PlannerConfig, Prepared};
use crate::problem::{Instance, Solution, Stats, Status};
use crate::world::AugmentedGraph;
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::time::Instant;

/// Joint states stored before the search gives up.
pub const MAX_JOINT_STATES: usize = 3_000_000;

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    f: f64,
    h: f64,
    seq: u32,
    idx: u32,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.h.total_cmp(&self.h))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn solve_comp(instance: &Instance, config: &PlannerConfig) -> Result<Solution> {
    let clock = Instant::now();
    config.validate()?;
    let prep = Prepared::new(instance, config)?;
    solve_comp_prepared(&prep, config, clock)
}

struct Search<'p> {
    prep: &'p Prepared<'p>,
    adj: Vec<Vec<(u32, f64)>>,
    aug: AugmentedGraph<'p>,
    v_c: f64,
    d_c: f64,
    dt: f64,
}

impl Search<'_> {
    fn h(&self, state: &[u32]) -> f64 {
        state
            .iter()
            .zip(&self.prep.fields)
            .map(|(&v, f)| get_heuristic(v as usize, &self.aug, f))
            .sum()
    }

    /// Every legal joint successor of `state`, as (positions, step time, cost).
    fn successors(&self, state: &[u32], mut emit: impl FnMut(&[u32], f64, f64) -> bool) -> bool {
        let n = state.len();
        let mut choice = vec![0usize; n];
        let mut dest = vec![0u32; n];
        let mut motion: Vec<TimedPath> = state
            .iter()
            .map(|&v| TimedPath::stationary(self.aug.position(v as usize), 0.0))
            .collect();
        let options: Vec<Vec<(u32, f64)>> = state
            .iter()
            .map(|&v| {
                let mut o = vec![(v, 0.0)];
                o.extend(self.adj[v as usize].iter().copied());
                o
            })
            .collect();
        let mut i = 0usize;
        loop {
            if choice[i] >= options[i].len() {
                if i == 0 {
                    return true;
                }
                choice[i] = 0;
                i -= 1;
                choice[i] += 1;
                continue;
            }
            let (u, d) = options[i][choice[i]];
            let p0 = self.aug.position(state[i] as usize);
            let p1 = self.aug.position(u as usize);
            let ti = d / self.v_c;
            motion[i] = if d > 0.0 {
                TimedPath::from_waypoints(vec![Waypoint::new(p0, 0.0), Waypoint::new(p1, ti)])
            } else {
                TimedPath::stationary(p0, 0.0)
            };
            let ok = (0..i).all(|j| {
                let tj = motion[j].end_time();
                let mv = MotionSegment::new(p0, 0.0, p1, ti);
                let hold = MotionSegment::new(p1, ti, p1, ti.max(tj));
                !collision_during_move(&mv, &motion[j], self.d_c)
                    && !collision_during_move(&hold, &motion[j], self.d_c)
            });
            if !ok {
                choice[i] += 1;
                continue;
            }
            dest[i] = u;
            if i + 1 < n {
                i += 1;
                choice[i] = 0;
                continue;
            }
            let step = motion.iter().map(TimedPath::end_time).fold(0.0, f64::max);
            // zero-length connector moves change the vertex but take no time
            if dest[..] != state[..] && self.transit_connected(&motion, step) {
                let cost: f64 = (0..n).map(|j| options[j][choice[j]].1).sum();
                if !emit(&dest, step, cost) {
                    return false;
                }
            }
            choice[i] += 1;
        }
    }

    fn transit_connected(&self, motion: &[TimedPath], step: f64) -> bool {
        let mut pos: Vec<Point> = motion.iter().map(|m| m.pos_at(step)).collect();
        if !tcomm(&pos, &self.prep.model) {
            return false;
        }
        let mut t = self.dt;
        while t < step - 1e-12 {
            for (p, m) in pos.iter_mut().zip(motion) {
                *p = m.pos_at(t);
            }
            if !tcomm(&pos, &self.prep.model) {
                return false;
            }
            t += self.dt;
        }
        true
    }
}

pub fn solve_comp_prepared(prep: &Prepared, config: &PlannerConfig, clock: Instant) -> Result<Solution> {
    let inst = prep.instance;
    let n = prep.n();
    let mut aug = AugmentedGraph::new(&prep.graph);
    let starts: Vec<u32> = inst.starts.iter().map(|p| aug.inject(*p).map(|v| v as u32)).collect::<Result<_>>()?;
    let goals: Vec<u32> = inst.goals.iter().map(|p| aug.inject(*p).map(|v| v as u32)).collect::<Result<_>>()?;
    let mut buf = Vec::new();
    let adj = (0..aug.len())
        .map(|v| {
            aug.neighbors_into(v, &mut buf);
            buf.iter().map(|&(u, d)| (u as u32, d)).collect()
        })
        .collect();
    let search = Search {
        prep,
        adj,
        aug,
        v_c: inst.v_c,
        d_c: inst.d_c,
        dt: config.dt_comm,
    };

    let mut states: Vec<u32> = starts.clone();
    let mut parent: Vec<u32> = vec![u32::MAX];
    let mut g: Vec<f64> = vec![0.0];
    let mut time: Vec<f64> = vec![0.0];
    let mut closed: Vec<bool> = vec![false];
    let mut index: HashMap<Box<[u32]>, u32> = HashMap::new();
    index.insert(starts.clone().into_boxed_slice(), 0);
    let mut open = BinaryHeap::new();
    let h0 = search.h(&starts);
    open.push(Entry { f: h0, h: h0, seq: 0, idx: 0 });
    let mut seq = 1u32;
    let mut stats = Stats::default();
    let mut found = None;
    let mut status = Status::Infeasible;
    let deadline = config.t_ds;
    let mut ticks = 0usize;

    if prep.infeasible() {
        open.clear();
    }
    while let Some(e) = open.pop() {
        let idx = e.idx as usize;
        if closed[idx] || g[idx] + e.h != e.f {
            continue;
        }
        let cur: Vec<u32> = states[idx * n..(idx + 1) * n].to_vec();
        if cur == goals {
            found = Some(idx);
            break;
        }
        if clock.elapsed().as_secs_f64() >= deadline || parent.len() >= MAX_JOINT_STATES {
            status = Status::Timeout;
            break;
        }
        closed[idx] = true;
        stats.iterations += 1;
        let (g0, t0) = (g[idx], time[idx]);
        let mut timed_out = false;
        search.successors(&cur, |dest, step, cost| {
            ticks += 1;
            if ticks % 4096 == 0 && clock.elapsed().as_secs_f64() >= deadline {
                timed_out = true;
                return false;
            }
            let ng = g0 + cost;
            match index.get(dest) {
                Some(&k) => {
                    let k = k as usize;
                    if !closed[k] && ng < g[k] - 1e-12 {
                        g[k] = ng;
                        time[k] = t0 + step;
                        parent[k] = idx as u32;
                        let h = search.h(dest);
                        open.push(Entry { f: ng + h, h, seq, idx: k as u32 });
                        seq = seq.wrapping_add(1);
                    }
                }
                None => {
                    let h = search.h(dest);
                    if !h.is_finite() {
                        return true;
                    }
                    let k = parent.len();
                    states.extend_from_slice(dest);
                    parent.push(idx as u32);
                    g.push(ng);
                    time.push(t0 + step);
                    closed.push(false);
                    index.insert(dest.to_vec().into_boxed_slice(), k as u32);
                    open.push(Entry { f: ng + h, h, seq, idx: k as u32 });
                    seq = seq.wrapping_add(1);
                }
            }
            true
        });
        if timed_out {
            status = Status::Timeout;
            break;
        }
    }

    let end = match found {
        Some(k) => {
            status = Status::AllReachGoal;
            k
        }
        None => {
            // report the stored state closest to the goals
            (0..parent.len())
                .min_by(|&a, &b| {
                    search
                        .h(&states[a * n..(a + 1) * n])
                        .total_cmp(&search.h(&states[b * n..(b + 1) * n]))
                })
                .unwrap_or(0)
        }
    };
    let mut chain = vec![end];
    while parent[*chain.last().unwrap()] != u32::MAX {
        chain.push(parent[*chain.last().unwrap()] as usize);
    }
    chain.reverse();
    let mut paths: Vec<TimedPath> = inst.starts.iter().map(|p| TimedPath::stationary(*p, 0.0)).collect();
    for w in chain.windows(2) {
        let (a, b) = (w[0], w[1]);
        for j in 0..n {
            let p = search.aug.position(states[b * n + j] as usize);
            push_move(&mut paths[j], p, time[a], inst.v_c);
        }
    }
    for (j, p) in paths.iter_mut().enumerate() {
        p.reached_goal = p.end_pos().approx_eq(inst.goals[j], crate::geom::POS_EPS);
    }
    stats.runtime = clock.elapsed().as_secs_f64();
    stats.tct_nodes = parent.len();
    Ok(Solution::new("comp", status, paths, stats))
}

/// Total joint cost of a solution: the summed travel of all agents.
pub fn joint_cost(sol: &Solution) -> f64 {
    sol.stats.travel.iter().sum()
}
