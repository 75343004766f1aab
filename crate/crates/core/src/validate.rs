//! Brute-force solution checker. Shares only the data types with the
//! planner: the geometry, interpolation and connectivity tests here are
//! written from scratch so that planner bugs do not cancel out.

use crate::comm::CommKind;
use crate::error::{Error, Result};
use crate::geom::{Point, Rect};
use crate::path::TimedPath;
use crate::problem::{Instance, Solution};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, VecDeque};

pub const GOAL_TOL: f64 = 1e-6;
pub const SPEED_TOL: f64 = 1e-9;
pub const DIST_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Start,
    Goal,
    Speed,
    Collision,
    TcommNodeTime,
    /// Informational; no `ok_*` flag depends on it.
    TcommSampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub time: f64,
    pub agents: Vec<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok_starts: bool,
    pub ok_goals: bool,
    pub ok_speed: bool,
    pub ok_collision: bool,
    pub ok_tcomm_node_times: bool,
    pub tcomm_sampled_coverage: f64,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    /// Every graded check passed; sampled coverage is not graded.
    pub fn is_valid(&self) -> bool {
        self.ok_starts && self.ok_goals && self.ok_speed && self.ok_collision && self.ok_tcomm_node_times
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }
}

/// Piecewise-linear position with holds before the first and after the last
/// waypoint.
fn position(path: &TimedPath, t: f64) -> Point {
    let w = &path.waypoints;
    if w.is_empty() {
        return Point::default();
    }
    if t <= w[0].t {
        return w[0].p;
    }
    for k in 1..w.len() {
        if t <= w[k].t {
            let (a, b) = (w[k - 1], w[k]);
            let span = b.t - a.t;
            if span <= 0.0 {
                return b.p;
            }
            let s = (t - a.t) / span;
            return Point::new(a.p.x + (b.p.x - a.p.x) * s, a.p.y + (b.p.y - a.p.y) * s);
        }
    }
    w[w.len() - 1].p
}

/// Obstacle rectangles bucketed on a coarse grid.
struct Occluders {
    rects: Vec<Rect>,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl Occluders {
    fn new(rects: Vec<Rect>, width: f64, height: f64) -> Self {
        let cell = 8.0;
        let nx = (width / cell).ceil().max(1.0) as usize;
        let ny = (height / cell).ceil().max(1.0) as usize;
        let mut buckets = vec![Vec::new(); nx * ny];
        for (k, r) in rects.iter().enumerate() {
            let (i0, i1) = (Self::idx(r.min.x, cell, nx), Self::idx(r.max.x, cell, nx));
            let (j0, j1) = (Self::idx(r.min.y, cell, ny), Self::idx(r.max.y, cell, ny));
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[j * nx + i].push(k as u32);
                }
            }
        }
        Occluders {
            rects,
            cell,
            nx,
            ny,
            buckets,
        }
    }

    fn idx(v: f64, cell: f64, n: usize) -> usize {
        ((v / cell).floor().max(0.0) as usize).min(n - 1)
    }

    /// Open segment against open rectangle by separating axes: x, y and the
    /// segment normal.
    fn separated(r: &Rect, p: Point, q: Point) -> bool {
        if p.x.max(q.x) <= r.min.x || p.x.min(q.x) >= r.max.x || p.y.max(q.y) <= r.min.y || p.y.min(q.y) >= r.max.y {
            return true;
        }
        let (nx, ny) = (p.y - q.y, q.x - p.x);
        let scale = nx.hypot(ny);
        if scale == 0.0 {
            return true;
        }
        let eps = 1e-12 * scale * (1.0 + r.max.x.abs().max(r.max.y.abs()));
        let corners = [r.min, Point::new(r.max.x, r.min.y), r.max, Point::new(r.min.x, r.max.y)];
        let proj = corners.map(|c| nx * (c.x - p.x) + ny * (c.y - p.y));
        proj.iter().all(|&c| c >= -eps) || proj.iter().all(|&c| c <= eps)
    }

    fn visible(&self, p: Point, q: Point) -> bool {
        let (i0, i1) = (Self::idx(p.x.min(q.x), self.cell, self.nx), Self::idx(p.x.max(q.x), self.cell, self.nx));
        let (j0, j1) = (Self::idx(p.y.min(q.y), self.cell, self.ny), Self::idx(p.y.max(q.y), self.cell, self.ny));
        for j in j0..=j1 {
            for i in i0..=i1 {
                for &k in &self.buckets[j * self.nx + i] {
                    if !Self::separated(&self.rects[k as usize], p, q) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

struct Linker<'a> {
    comm: CommKind,
    occ: &'a Occluders,
}

impl Linker<'_> {
    fn linked(&self, p: Point, q: Point) -> bool {
        match self.comm {
            CommKind::Lcr { range } => {
                let (dx, dy) = (p.x - q.x, p.y - q.y);
                (dx * dx + dy * dy).sqrt() <= range + DIST_TOL
            }
            CommKind::Los => self.occ.visible(p, q),
        }
    }

    /// Breadth-first search over the communication graph.
    fn connected(&self, pos: &[Point]) -> bool {
        let n = pos.len();
        if n <= 1 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(a) = queue.pop_front() {
            for b in 0..n {
                if !seen[b] && self.linked(pos[a], pos[b]) {
                    seen[b] = true;
                    count += 1;
                    queue.push_back(b);
                }
            }
        }
        count == n
    }
}

/// Smallest distance between two agents over `[a, b]`, with its time.
fn min_distance(pi: &TimedPath, pj: &TimedPath, a: f64, b: f64) -> (f64, f64) {
    let (ia, ja) = (position(pi, a), position(pj, a));
    let (ib, jb) = (position(pi, b), position(pj, b));
    let (rx, ry) = (ia.x - ja.x, ia.y - ja.y);
    let span = b - a;
    if span <= 0.0 {
        return (rx.hypot(ry), a);
    }
    let (wx, wy) = ((ib.x - jb.x - rx) / span, (ib.y - jb.y - ry) / span);
    let ww = wx * wx + wy * wy;
    let s = if ww > 0.0 { (-(rx * wx + ry * wy) / ww).clamp(0.0, span) } else { 0.0 };
    ((rx + wx * s).hypot(ry + wy * s), a + s)
}

pub fn validate(instance: &Instance, solution: &Solution, dt: f64) -> Result<ValidationReport> {
    let n = instance.starts.len();
    if solution.paths.len() != n || instance.goals.len() != n {
        return Err(Error::MismatchedInstance {
            instance: n,
            solution: solution.paths.len(),
        });
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidConfig(format!("dt must be positive, got {dt}")));
    }
    let paths = &solution.paths;
    let mut violations = Vec::new();
    let t_max = paths
        .iter()
        .filter_map(|p| p.waypoints.last().map(|w| w.t))
        .fold(0.0, f64::max);

    for (j, p) in paths.iter().enumerate() {
        let Some(first) = p.waypoints.first() else {
            violations.push(Violation { kind: ViolationKind::Start, time: 0.0, agents: vec![j], value: f64::INFINITY });
            violations.push(Violation { kind: ViolationKind::Goal, time: 0.0, agents: vec![j], value: f64::INFINITY });
            continue;
        };
        let d = first.p.dist(instance.starts[j]);
        if d > GOAL_TOL {
            violations.push(Violation { kind: ViolationKind::Start, time: first.t, agents: vec![j], value: d });
        }
        let last = p.waypoints[p.waypoints.len() - 1];
        let d = last.p.dist(instance.goals[j]);
        if d > GOAL_TOL {
            violations.push(Violation { kind: ViolationKind::Goal, time: last.t, agents: vec![j], value: d });
        }
        for w in p.waypoints.windows(2) {
            let len = w[0].p.dist(w[1].p);
            let span = w[1].t - w[0].t;
            let speed = if span > 0.0 {
                len / span
            } else if len > 0.0 || span < 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            if speed > instance.v_c + SPEED_TOL {
                violations.push(Violation { kind: ViolationKind::Speed, time: w[0].t, agents: vec![j], value: speed });
            }
        }
    }

    let times_of = |p: &TimedPath| p.waypoints.iter().map(|w| w.t).collect::<Vec<_>>();
    for i in 0..n {
        for j in i + 1..n {
            let mut ts: Vec<f64> = times_of(&paths[i]);
            ts.extend(times_of(&paths[j]));
            ts.push(0.0);
            ts.push(t_max);
            ts.retain(|t| (0.0..=t_max).contains(t));
            ts.sort_by(f64::total_cmp);
            ts.dedup();
            let mut inside = false;
            for w in ts.windows(2) {
                let (d, t) = min_distance(&paths[i], &paths[j], w[0], w[1]);
                let hit = d < instance.d_c - DIST_TOL;
                if hit && !inside {
                    violations.push(Violation { kind: ViolationKind::Collision, time: t, agents: vec![i, j], value: d });
                }
                inside = hit;
            }
            if ts.len() == 1 {
                let (d, t) = min_distance(&paths[i], &paths[j], ts[0], ts[0]);
                if d < instance.d_c - DIST_TOL {
                    violations.push(Violation { kind: ViolationKind::Collision, time: t, agents: vec![i, j], value: d });
                }
            }
        }
    }

    let occ = Occluders::new(
        instance.world.obstacle_rects().copied().collect(),
        instance.world.width(),
        instance.world.height(),
    );
    let linker = Linker { comm: instance.comm, occ: &occ };
    let snapshot = |t: f64| paths.iter().map(|p| position(p, t)).collect::<Vec<_>>();

    let mut node_times: Vec<f64> = paths.iter().flat_map(times_of).collect();
    node_times.sort_by(f64::total_cmp);
    node_times.dedup();
    let mut cache: HashMap<u64, bool> = HashMap::new();
    for &t in &node_times {
        let ok = *cache.entry(t.to_bits()).or_insert_with(|| linker.connected(&snapshot(t)));
        if !ok {
            violations.push(Violation { kind: ViolationKind::TcommNodeTime, time: t, agents: (0..n).collect(), value: 0.0 });
        }
    }

    let steps = (t_max / dt + 1e-9).floor() as usize;
    let mut good = 0usize;
    let mut was_ok = true;
    for k in 0..=steps {
        let t = k as f64 * dt;
        let ok = linker.connected(&snapshot(t));
        if ok {
            good += 1;
        } else if was_ok {
            violations.push(Violation { kind: ViolationKind::TcommSampled, time: t, agents: (0..n).collect(), value: 0.0 });
        }
        was_ok = ok;
    }
    let coverage = good as f64 / (steps + 1) as f64;

    let none = |k: ViolationKind| !violations.iter().any(|v| v.kind == k);
    Ok(ValidationReport {
        ok_starts: none(ViolationKind::Start),
        ok_goals: none(ViolationKind::Goal),
        ok_speed: none(ViolationKind::Speed),
        ok_collision: none(ViolationKind::Collision),
        ok_tcomm_node_times: none(ViolationKind::TcommNodeTime),
        tcomm_sampled_coverage: coverage,
        violations,
    })
}
