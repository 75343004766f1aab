//! Shortest-path distance fields from each goal over the base graph.

use crate::geom::{Point, POS_EPS};
use crate::world::{AugmentedGraph, NavGraph, WorldMap};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone)]
pub struct HeuristicField {
    /// Continuous goal point.
    pub goal: Point,
    /// Centroid vertex of the cell holding the goal.
    pub goal_vertex: usize,
    /// Connector length from the goal point to `goal_vertex`.
    pub offset: f64,
    dist: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra distances from `source` to every base vertex.
pub fn dijkstra(graph: &NavGraph, source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; graph.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Entry(0.0, source));
    while let Some(Entry(d, v)) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(u, w) in graph.neighbors(v) {
            let nd = d + w;
            let u = u as usize;
            if nd < dist[u] {
                dist[u] = nd;
                heap.push(Entry(nd, u));
            }
        }
    }
    dist
}

/// Field for a goal given as a base vertex (offset 0).
pub fn shortest_path_field(graph: &NavGraph, goal_vertex: usize) -> HeuristicField {
    HeuristicField {
        goal: graph.position(goal_vertex),
        goal_vertex,
        offset: 0.0,
        dist: dijkstra(graph, goal_vertex),
    }
}

impl HeuristicField {
    /// Field for a continuous goal point wired to the centroid of its cell.
    pub fn for_goal(graph: &NavGraph, goal: Point) -> Option<Self> {
        let v = graph.locate(goal)?;
        Some(HeuristicField {
            goal,
            goal_vertex: v,
            offset: goal.dist(graph.position(v)),
            dist: dijkstra(graph, v),
        })
    }

    /// Value at a base vertex, including the connector to the goal point.
    pub fn base(&self, v: usize) -> f64 {
        self.dist[v] + self.offset
    }

    /// Raw Dijkstra distance to the goal centroid.
    pub fn raw(&self, v: usize) -> f64 {
        self.dist[v]
    }

    /// Value at a continuous point, through the centroid of the cell `anchor`.
    pub fn via(&self, p: Point, anchor: usize, graph: &NavGraph) -> f64 {
        if p.approx_eq(self.goal, POS_EPS) {
            return 0.0;
        }
        self.base(anchor) + p.dist(graph.position(anchor))
    }

    /// Value at a continuous point, located in the base graph. Points outside
    /// every kept cell (cut mid-edge) go through the nearest visible centroid.
    pub fn at_point(&self, p: Point, graph: &NavGraph, world: &WorldMap) -> f64 {
        if p.approx_eq(self.goal, POS_EPS) {
            return 0.0;
        }
        match graph.locate_near(p, 2.0, world) {
            Some(c) => self.via(p, c, graph),
            None => f64::INFINITY,
        }
    }
}

/// Field value at a vertex of an augmented graph. Injected vertices add their
/// connector length; the goal point itself is 0.
pub fn get_heuristic(v: usize, graph: &AugmentedGraph, field: &HeuristicField) -> f64 {
    match graph.injected(v) {
        Some(inj) => field.via(inj.position, inj.anchor, graph.base()),
        None => field.base(v),
    }
}
