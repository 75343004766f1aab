//! Team communication tree.
//!
//! Each node is a timestamped team configuration that satisfies team
//! connectivity. Nodes are ranked by `f = alpha * g + (1 - alpha) * h` plus a
//! penalty that grows every time the node is selected.

use crate::comm::{tcomm, CommModel};
use crate::error::{Error, Result};
use crate::geom::{Point, POS_EPS};
use crate::heuristics::HeuristicField;
use crate::path::{TimedPath, Waypoint};
use crate::world::NavGraph;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HMode {
    /// Decremented cost-to-go bookkeeping along the expanded paths.
    #[default]
    Bookkeeping,
    /// Fresh heuristic field lookup at each interpolated position.
    FieldLookup,
}

#[derive(Debug, Clone, Serialize)]
pub struct TctNode {
    pub id: usize,
    pub parent: Option<usize>,
    pub state: Vec<Point>,
    pub t: f64,
    pub g: f64,
    pub h: f64,
    /// `alpha * g + (1 - alpha) * h`.
    pub cost: f64,
    pub penalty: f64,
    pub f: f64,
    pub all_at_goal: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Sel {
    f: f64,
    t: f64,
    id: usize,
}

impl Eq for Sel {}

impl Ord for Sel {
    fn cmp(&self, other: &Self) -> Ordering {
        // max-heap: smaller f, then larger t, then smaller id comes out first
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| self.t.total_cmp(&other.t))
            .then_with(|| other.id.cmp(&self.id))
    }
}

impl PartialOrd for Sel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone)]
pub struct Tct {
    nodes: Vec<TctNode>,
    frontier: BinaryHeap<Sel>,
    goals: Vec<Point>,
    alpha: f64,
}

fn all_at(state: &[Point], goals: &[Point]) -> bool {
    state.iter().zip(goals).all(|(p, g)| p.approx_eq(*g, POS_EPS))
}

/// Root tree for `starts`; fails if the starts are not team-connected.
pub fn init_tree(
    starts: &[Point],
    goals: &[Point],
    fields: &[HeuristicField],
    graph: &NavGraph,
    model: &CommModel,
    alpha: f64,
) -> Result<Tct> {
    if !tcomm(starts, model) {
        return Err(Error::StartsDisconnected);
    }
    let h: f64 = starts
        .iter()
        .zip(fields)
        .map(|(p, f)| f.at_point(*p, graph, model.world))
        .sum();
    let mut tree = Tct {
        nodes: Vec::new(),
        frontier: BinaryHeap::new(),
        goals: goals.to_vec(),
        alpha,
    };
    tree.push(None, starts.to_vec(), 0.0, 0.0, h);
    Ok(tree)
}

impl Tct {
    fn push(&mut self, parent: Option<usize>, state: Vec<Point>, t: f64, g: f64, h: f64) -> usize {
        let id = self.nodes.len();
        let cost = self.alpha * g + (1.0 - self.alpha) * h;
        let all_at_goal = all_at(&state, &self.goals);
        self.nodes.push(TctNode {
            id,
            parent,
            state,
            t,
            g,
            h,
            cost,
            penalty: 0.0,
            f: cost,
            all_at_goal,
        });
        self.frontier.push(Sel { f: cost, t, id });
        id
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn goals(&self) -> &[Point] {
        &self.goals
    }

    pub fn node(&self, id: usize) -> &TctNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[TctNode] {
        &self.nodes
    }

    pub fn root(&self) -> &TctNode {
        &self.nodes[0]
    }

    /// Lowest `f` node (larger `t`, then lower id on ties); its penalty then
    /// grows by `c`.
    pub fn select_node(&mut self, c: f64) -> usize {
        let top = self.frontier.pop().expect("tree is never empty");
        let n = &mut self.nodes[top.id];
        n.penalty += c;
        n.f = n.cost + n.penalty;
        self.frontier.push(Sel { f: n.f, t: n.t, id: n.id });
        top.id
    }

    /// Node with the lowest `h` (lower `t`, then lower id on ties).
    pub fn closest_node_to_goal(&self) -> usize {
        self.nodes
            .iter()
            .min_by(|a, b| {
                a.h.total_cmp(&b.h)
                    .then_with(|| a.t.total_cmp(&b.t))
                    .then_with(|| a.id.cmp(&b.id))
            })
            .map(|n| n.id)
            .expect("tree is never empty")
    }

    pub fn find_all_at_goal(&self) -> Option<usize> {
        self.nodes.iter().find(|n| n.all_at_goal).map(|n| n.id)
    }

    /// Ids from the root down to `id`.
    pub fn chain(&self, id: usize) -> Vec<usize> {
        let mut ids = vec![id];
        let mut cur = self.nodes[id].parent;
        while let Some(p) = cur {
            ids.push(p);
            cur = self.nodes[p].parent;
        }
        ids.reverse();
        ids
    }

    /// Per-agent paths from the root to `id`. Runs of equal positions collapse
    /// to their first and last waypoint, which leaves a hold in between.
    pub fn get_paths(&self, id: usize) -> Vec<TimedPath> {
        let chain = self.chain(id);
        let n = self.nodes[0].state.len();
        (0..n)
            .map(|j| {
                let mut wps: Vec<Waypoint> = Vec::with_capacity(chain.len());
                for &c in &chain {
                    let node = &self.nodes[c];
                    let w = Waypoint::new(node.state[j], node.t);
                    let len = wps.len();
                    if len >= 2 && wps[len - 1].p == w.p && wps[len - 2].p == w.p {
                        wps[len - 1] = w;
                    } else {
                        wps.push(w);
                    }
                }
                // a trailing hold is implied by the path end
                while wps.len() >= 2 && wps[wps.len() - 1].p == wps[wps.len() - 2].p {
                    wps.pop();
                }
                let mut p = TimedPath::from_waypoints(wps);
                p.reached_goal = p.end_pos().approx_eq(self.goals[j], POS_EPS);
                p
            })
            .collect()
    }

    /// Adds the nodes induced by one round of paths grown from node `v`.
    /// Returns the number of nodes added.
    pub fn expand_tree(
        &mut self,
        paths: &[TimedPath],
        v: usize,
        fields: &[HeuristicField],
        graph: &NavGraph,
        model: &CommModel,
        h_mode: HMode,
    ) -> usize {
        let base = self.nodes[v].clone();
        let mut times: Vec<f64> = paths
            .iter()
            .flat_map(|p| p.waypoints.iter().map(|w| w.t))
            .filter(|&t| t > base.t)
            .collect();
        times.sort_by(f64::total_cmp);
        times.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);

        let mut costogoal: Vec<f64> = paths
            .iter()
            .zip(fields)
            .map(|(p, f)| {
                let end = p.end_pos();
                let tail = if p.reached_goal { 0.0 } else { f.at_point(end, graph, model.world) };
                remaining_length(p, base.t) + tail
            })
            .collect();

        let mut parent = v;
        let mut prev = base.state.clone();
        let mut g = base.g;
        let mut added = 0;
        'times: for t in times {
            let mut state = Vec::with_capacity(paths.len());
            for p in paths {
                if t > p.end_time() && !p.reached_goal {
                    break 'times;
                }
                state.push(p.pos_at(t));
            }
            let mut h = 0.0;
            for j in 0..paths.len() {
                let step = state[j].dist(prev[j]);
                g += step;
                costogoal[j] -= step;
                h += match h_mode {
                    HMode::Bookkeeping => costogoal[j].max(0.0),
                    HMode::FieldLookup => fields[j].at_point(state[j], graph, model.world),
                };
            }
            if !tcomm(&state, model) {
                break;
            }
            prev.clone_from(&state);
            parent = self.push(Some(parent), state, t, g, h);
            added += 1;
        }
        added
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string(&self.nodes)
    }
}

/// Path length still ahead of time `t`.
fn remaining_length(p: &TimedPath, t: f64) -> f64 {
    let mut len = 0.0;
    let mut last = p.pos_at(t);
    for w in p.waypoints.iter().filter(|w| w.t > t) {
        len += last.dist(w.p);
        last = w.p;
    }
    len
}
