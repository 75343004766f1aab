//! Single-agent pathfinding with dynamic leading.
//!
//! A best-first search over the graph augmented with the agent's current
//! path end and its goal. Every action is checked against the paths already
//! planned for the other agents: it must be collision-free and, unless the
//! agent is currently the most progressive one, keep communication with them.

use crate::comm::{acomm_during_move, acomm_static, acomm_union_during_move, collision_during_move, CommModel};
use crate::error::{Error, Result};
use crate::geom::{Point, POS_EPS};
use crate::heuristics::{get_heuristic, HeuristicField};
use crate::path::{MotionSegment, TimedPath, Waypoint};
use crate::world::{AugmentedGraph, NavGraph, WorldMap};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

/// How the communication constraint applies to the planning agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommRequirement {
    /// Leader exemption for the most progressive agent, ACOMM with any planned
    /// path otherwise.
    Dynamic,
    /// Never constrained by communication.
    Exempt,
    /// Must keep ACOMM with the given agent's path.
    Guided(usize),
    /// Must keep ACOMM with the nearest guide still moving when the action
    /// starts, from a list ordered nearest first. The first guide is used once
    /// they have all stopped.
    Platoon,
}

#[derive(Debug, Clone, Copy)]
pub struct SapfParams {
    pub v_c: f64,
    pub d_c: f64,
    pub dt_comm: f64,
    /// Wall-clock budget per call.
    pub t_sa: f64,
    /// Optional cap on node expansions, for reproducible runs.
    pub max_expansions: Option<usize>,
    /// Put reopened closed nodes back into the open list.
    pub reinsert_closed: bool,
    /// Accept moves covered only by a changing set of neighbors.
    pub union_coverage: bool,
}

impl Default for SapfParams {
    fn default() -> Self {
        SapfParams {
            v_c: 1.0,
            d_c: 0.5,
            dt_comm: 0.25,
            t_sa: 0.2,
            max_expansions: None,
            reinsert_closed: false,
            union_coverage: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SapfStatus {
    ReachedGoal,
    /// Path to the best node seen.
    Partial,
    /// No valid action from the start.
    EmptyReturn,
}

#[derive(Debug, Clone)]
pub struct SapfResult {
    /// Waypoints after the start; empty for `EmptyReturn`.
    pub segment: Vec<Waypoint>,
    pub status: SapfStatus,
    pub expansions: usize,
    pub out_of_budget: bool,
}

impl SapfResult {
    pub fn reached_goal(&self) -> bool {
        self.status == SapfStatus::ReachedGoal
    }
}

/// Validity test for one action of `agent`, given everyone's planned paths.
pub struct ActionChecker<'a> {
    pub agent: usize,
    pub planned: &'a [TimedPath],
    pub model: &'a CommModel<'a>,
    pub d_c: f64,
    pub dt_comm: f64,
    pub requirement: CommRequirement,
    pub union_coverage: bool,
    pub guides: &'a [usize],
    max_other_end: f64,
}

impl<'a> ActionChecker<'a> {
    pub fn new(
        agent: usize,
        planned: &'a [TimedPath],
        model: &'a CommModel<'a>,
        d_c: f64,
        dt_comm: f64,
        requirement: CommRequirement,
    ) -> Self {
        let max_other_end = planned
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != agent)
            .map(|(_, p)| p.end_time())
            .fold(f64::NEG_INFINITY, f64::max);
        ActionChecker {
            agent,
            planned,
            model,
            d_c,
            dt_comm,
            requirement,
            union_coverage: true,
            guides: &[],
            max_other_end,
        }
    }

    fn others(&self) -> impl Iterator<Item = &'a TimedPath> + Clone + 'a {
        let agent = self.agent;
        self.planned.iter().enumerate().filter(move |(j, _)| *j != agent).map(|(_, p)| p)
    }

    /// True if the move ends later than every other planned path.
    pub fn is_most_progressive(&self, mv: &MotionSegment) -> bool {
        mv.t1 > self.max_other_end
    }

    pub fn is_valid(&self, mv: &MotionSegment) -> bool {
        let lead = match self.requirement {
            CommRequirement::Exempt => true,
            CommRequirement::Guided(_) | CommRequirement::Platoon => false,
            CommRequirement::Dynamic => self.is_most_progressive(mv) && self.is_comm_at_goal(mv),
        };
        if self.others().any(|o| collision_during_move(mv, o, self.d_c)) {
            return false;
        }
        lead || self.keeps_comm(mv)
    }

    fn keeps_comm(&self, mv: &MotionSegment) -> bool {
        match self.requirement {
            CommRequirement::Exempt => true,
            CommRequirement::Guided(j) => acomm_during_move(mv, &self.planned[j], self.model, self.dt_comm),
            CommRequirement::Platoon => {
                let Some(&first) = self.guides.first() else {
                    return true;
                };
                let guide = self
                    .guides
                    .iter()
                    .copied()
                    .find(|&j| self.planned[j].end_time() > mv.t0)
                    .unwrap_or(first);
                acomm_during_move(mv, &self.planned[guide], self.model, self.dt_comm)
            }
            CommRequirement::Dynamic => {
                let mut others = self.others().peekable();
                if others.peek().is_none() {
                    return true;
                }
                others.any(|o| acomm_during_move(mv, o, self.model, self.dt_comm))
                    || (self.union_coverage
                        && acomm_union_during_move(mv, self.others(), self.model, self.dt_comm))
            }
        }
    }

    /// The leader may not abandon neighbors that already parked at their goals.
    pub fn is_comm_at_goal(&self, mv: &MotionSegment) -> bool {
        let mut any_at_goal = false;
        for o in self.others() {
            if !o.reached_goal || !acomm_static(mv.p0, o.pos_at(mv.t0), self.model) {
                continue;
            }
            any_at_goal = true;
            if acomm_during_move(mv, o, self.model, self.dt_comm) {
                return true;
            }
        }
        !any_at_goal
    }
}

/// Action validity with dynamic leading, for a one-off check.
pub fn is_action_valid(
    agent: usize,
    planned: &[TimedPath],
    mv: &MotionSegment,
    model: &CommModel,
    d_c: f64,
    dt_comm: f64,
) -> bool {
    ActionChecker::new(agent, planned, model, d_c, dt_comm, CommRequirement::Dynamic).is_valid(mv)
}

/// The out-of-communication-at-goal guard on its own.
pub fn is_comm_at_goal(mv: &MotionSegment, planned: &[TimedPath], agent: usize, model: &CommModel, dt_comm: f64) -> bool {
    ActionChecker::new(agent, planned, model, 0.0, dt_comm, CommRequirement::Dynamic).is_comm_at_goal(mv)
}

#[derive(Debug, Clone, Copy)]
struct SearchNode {
    vertex: usize,
    t: f64,
    g: f64,
    h: f64,
    parent: u32,
    seq: u32,
    closed: bool,
}

impl SearchNode {
    fn f(&self) -> f64 {
        self.g + self.h
    }
}

#[derive(Clone, Copy, PartialEq)]
struct OpenEntry {
    f: f64,
    h: f64,
    seq: u32,
    node: u32,
}

impl Eq for OpenEntry {}

impl Ord for OpenEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed for a min-heap on (f, h, seq)
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.h.total_cmp(&self.h))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const NONE: u32 = u32::MAX;

fn better_best(cand: &SearchNode, best: &SearchNode) -> bool {
    let (fc, fb) = (cand.f(), best.f());
    if fc < fb - 1e-9 {
        return true;
    }
    if fc > fb + 1e-9 {
        return false;
    }
    if cand.h != best.h {
        return cand.h < best.h;
    }
    cand.seq < best.seq
}

pub struct SingleAgentQuery<'a> {
    pub agent: usize,
    pub goal: Point,
    pub graph: &'a NavGraph,
    pub world: &'a WorldMap,
    pub planned: &'a [TimedPath],
    pub field: &'a HeuristicField,
    pub model: &'a CommModel<'a>,
    pub params: SapfParams,
    pub requirement: CommRequirement,
    /// Guide order for [`CommRequirement::Platoon`].
    pub guides: &'a [usize],
}

/// Extends `planned[agent]` toward `goal`.
#[allow(clippy::too_many_arguments)]
pub fn plan_single(
    agent: usize,
    goal: Point,
    graph: &NavGraph,
    world: &WorldMap,
    planned: &[TimedPath],
    field: &HeuristicField,
    model: &CommModel,
    params: SapfParams,
) -> Result<SapfResult> {
    SingleAgentQuery {
        agent,
        goal,
        graph,
        world,
        planned,
        field,
        model,
        params,
        requirement: CommRequirement::Dynamic,
        guides: &[],
    }
    .run()
}

impl SingleAgentQuery<'_> {
    pub fn run(&self) -> Result<SapfResult> {
        let started = Instant::now();
        let budget = Duration::from_secs_f64(self.params.t_sa.max(0.0));
        let own = &self.planned[self.agent];
        let start = own.end();
        let empty = |expansions, out_of_budget| SapfResult {
            segment: Vec::new(),
            status: SapfStatus::EmptyReturn,
            expansions,
            out_of_budget,
        };
        if start.p.approx_eq(self.goal, POS_EPS) {
            return Ok(SapfResult {
                segment: Vec::new(),
                status: SapfStatus::ReachedGoal,
                expansions: 0,
                out_of_budget: false,
            });
        }
        let mut aug = AugmentedGraph::new(self.graph);
        let Some(start_anchor) = self.graph.locate_near(start.p, 1.0, self.world) else {
            return Ok(empty(0, false));
        };
        // sampled starts keep the plain connector; later ends may sit mid-edge
        let vs = if start.t > 0.0 {
            aug.inject_with_exits(start.p, start_anchor, self.world)
        } else {
            aug.inject_at(start.p, start_anchor)
        };
        let goal_anchor = self
            .graph
            .locate(self.goal)
            .ok_or(Error::PointBlocked { x: self.goal.x, y: self.goal.y })?;
        let vg = aug.inject_at(self.goal, goal_anchor);

        let mut checker = ActionChecker::new(
            self.agent,
            self.planned,
            self.model,
            self.params.d_c,
            self.params.dt_comm,
            self.requirement,
        );
        checker.union_coverage = self.params.union_coverage;
        checker.guides = self.guides;

        let mut nodes: Vec<SearchNode> = Vec::new();
        let mut node_of = vec![NONE; aug.len()];
        let mut open = BinaryHeap::new();
        let h0 = get_heuristic(vs, &aug, self.field);
        nodes.push(SearchNode {
            vertex: vs,
            t: start.t,
            g: 0.0,
            h: h0,
            parent: NONE,
            seq: 0,
            closed: false,
        });
        node_of[vs] = 0;
        open.push(OpenEntry { f: h0, h: h0, seq: 0, node: 0 });
        let mut best = 0usize;
        let mut seq = 1u32;
        let mut expansions = 0usize;
        let mut out_of_budget = false;
        let mut nbrs = Vec::new();
        let mut goal_node = None;

        'search: while let Some(e) = open.pop() {
            let vi = e.node as usize;
            if nodes[vi].closed || nodes[vi].f() != e.f {
                continue;
            }
            if nodes[vi].vertex == vg {
                goal_node = Some(vi);
                break;
            }
            if started.elapsed() >= budget || self.params.max_expansions.is_some_and(|m| expansions >= m) {
                out_of_budget = true;
                break;
            }
            expansions += 1;
            nodes[vi].closed = true;
            let v = nodes[vi];
            let pv = aug.position(v.vertex);
            aug.neighbors_into(v.vertex, &mut nbrs);
            for &(u, d) in &nbrs {
                if v.parent != NONE && nodes[v.parent as usize].vertex == u {
                    continue;
                }
                let pu = aug.position(u);
                let t = v.t + d / self.params.v_c;
                let g = v.g + d;
                let mv = MotionSegment::new(pv, v.t, pu, t);
                let ui = node_of[u];
                if ui == NONE {
                    if !checker.is_valid(&mv) {
                        continue;
                    }
                    let h = get_heuristic(u, &aug, self.field);
                    if !h.is_finite() {
                        continue;
                    }
                    let idx = nodes.len();
                    nodes.push(SearchNode {
                        vertex: u,
                        t,
                        g,
                        h,
                        parent: vi as u32,
                        seq,
                        closed: false,
                    });
                    node_of[u] = idx as u32;
                    open.push(OpenEntry { f: g + h, h, seq, node: idx as u32 });
                    seq += 1;
                    if better_best(&nodes[idx], &nodes[best]) {
                        best = idx;
                    }
                    if u == vg {
                        goal_node = Some(idx);
                        break 'search;
                    }
                    continue;
                }
                let ui = ui as usize;
                if g >= nodes[ui].g - 1e-12 || !checker.is_valid(&mv) {
                    continue;
                }
                let n = &mut nodes[ui];
                n.g = g;
                n.t = t;
                n.parent = vi as u32;
                let reopen = !n.closed || self.params.reinsert_closed;
                if reopen {
                    n.closed = false;
                    open.push(OpenEntry { f: g + n.h, h: n.h, seq: n.seq, node: ui as u32 });
                }
                if better_best(&nodes[ui], &nodes[best]) {
                    best = ui;
                }
            }
        }

        let target = goal_node.unwrap_or(best);
        let mut chain = Vec::new();
        let mut cur = target as u32;
        while cur != NONE {
            chain.push(nodes[cur as usize].vertex);
            cur = nodes[cur as usize].parent;
            if chain.len() > nodes.len() {
                // a reopened ancestor formed a loop; keep what precedes it
                break;
            }
        }
        chain.reverse();
        let (segment, full) = self.retime(&aug, &chain, start, &checker);
        let reached = goal_node.is_some() && full && segment.last().is_some_and(|w| w.p.approx_eq(self.goal, POS_EPS));
        let status = if reached {
            SapfStatus::ReachedGoal
        } else if segment.is_empty() {
            SapfStatus::EmptyReturn
        } else {
            SapfStatus::Partial
        };
        Ok(SapfResult {
            segment,
            status,
            expansions,
            out_of_budget,
        })
    }

    /// Rebuilds times along `chain` from the start and keeps the prefix whose
    /// moves still validate; the flag is false if the chain was cut.
    fn retime(&self, aug: &AugmentedGraph, chain: &[usize], start: Waypoint, checker: &ActionChecker) -> (Vec<Waypoint>, bool) {
        let mut out = Vec::with_capacity(chain.len());
        let mut prev = start;
        for &v in chain.iter().skip(1) {
            let p = aug.position(v);
            let d = prev.p.dist(p);
            if d <= POS_EPS {
                continue;
            }
            let w = Waypoint::new(p, prev.t + d / self.params.v_c);
            if !checker.is_valid(&MotionSegment::new(prev.p, prev.t, w.p, w.t)) {
                return (out, false);
            }
            out.push(w);
            prev = w;
        }
        (out, true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Rect;

    fn setup(w: &WorldMap) -> NavGraph {
        NavGraph::from_world(w, 1.0, 0.25).unwrap()
    }

    #[test]
    fn lone_agent_follows_field() {
        let w = WorldMap::from_rects(20.0, 20.0, &[Rect::new(5.0, 0.0, 6.0, 15.0)], "t").unwrap();
        let g = setup(&w);
        let model = CommModel::lcr(15.0, &w);
        let start = Point::new(1.3, 1.2);
        let goal = Point::new(18.4, 2.6);
        let field = HeuristicField::for_goal(&g, goal).unwrap();
        let planned = vec![TimedPath::stationary(start, 0.0)];
        let r = plan_single(0, goal, &g, &w, &planned, &field, &model, SapfParams { t_sa: 5.0, ..Default::default() })
            .unwrap();
        assert!(r.reached_goal());
        let mut p = planned[0].clone();
        p.extend_with(&r.segment);
        assert!((p.length() - field.at_point(start, &g, &w)).abs() < 1e-6);
        assert!(p.max_speed() <= 1.0 + 1e-9);
    }

    #[test]
    fn follower_stuck_behind_parked_leader() {
        // a 1 m wide corridor along y = 0.5 with a parked agent in the middle
        let w = WorldMap::from_rects(12.0, 3.0, &[Rect::new(0.0, 1.0, 12.0, 3.0)], "t").unwrap();
        let g = setup(&w);
        let model = CommModel::lcr(15.0, &w);
        let goal = Point::new(11.5, 0.5);
        let field = HeuristicField::for_goal(&g, goal).unwrap();
        let mut parked = TimedPath::stationary(Point::new(6.5, 0.5), 0.0);
        parked.reached_goal = true;
        let planned = vec![TimedPath::stationary(Point::new(0.5, 0.5), 0.0), parked];
        let r = plan_single(0, goal, &g, &w, &planned, &field, &model, SapfParams { t_sa: 5.0, ..Default::default() })
            .unwrap();
        assert_eq!(r.status, SapfStatus::Partial);
        let end = r.segment.last().unwrap().p;
        // the closest cell short of the blocker
        assert!(end.approx_eq(Point::new(5.5, 0.5), 1e-9));
    }

    #[test]
    fn single_agent_is_always_leader() {
        let w = WorldMap::empty(10.0, 10.0, "t").unwrap();
        let model = CommModel::lcr(1.0, &w);
        let planned = vec![TimedPath::stationary(Point::new(0.5, 0.5), 0.0)];
        let mv = MotionSegment::new(Point::new(0.5, 0.5), 0.0, Point::new(9.5, 9.5), 13.0);
        assert!(is_action_valid(0, &planned, &mv, &model, 0.5, 0.25));
    }

    #[test]
    fn leader_cannot_abandon_parked_neighbor() {
        let w = WorldMap::empty(40.0, 40.0, "t").unwrap();
        let model = CommModel::lcr(15.0, &w);
        let mut a2 = TimedPath::stationary(Point::new(10.0, 10.0), 0.0);
        a2.reached_goal = true;
        let planned = vec![TimedPath::stationary(Point::new(24.0, 10.0), 0.0), a2];
        let away = MotionSegment::new(Point::new(24.0, 10.0), 0.0, Point::new(26.0, 10.0), 2.0);
        assert!(!is_comm_at_goal(&away, &planned, 0, &model, 0.25));
        assert!(!is_action_valid(0, &planned, &away, &model, 0.5, 0.25));
        let along = MotionSegment::new(Point::new(24.0, 10.0), 0.0, Point::new(24.0, 12.0), 2.0);
        assert!(is_action_valid(0, &planned, &along, &model, 0.5, 0.25));
    }
}
