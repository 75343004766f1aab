//! Communication models, pairwise communication and collision predicates over
//! timed motion, and team connectivity.

use crate::geom::{closest_approach, first_time_within, within_radius_interval, Point};
use crate::path::{MotionSegment, TimedPath};
use crate::world::WorldMap;
use serde::{Deserialize, Serialize};

/// Slack for the inclusive range test and the strict collision test.
pub const COMM_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CommKind {
    /// Limited communication range.
    Lcr { range: f64 },
    /// Line of sight.
    Los,
}

impl CommKind {
    pub const fn lcr(range: f64) -> Self {
        CommKind::Lcr { range }
    }

    pub fn label(&self) -> &'static str {
        match self {
            CommKind::Lcr { .. } => "lcr",
            CommKind::Los => "los",
        }
    }
}

impl Default for CommKind {
    fn default() -> Self {
        CommKind::Lcr { range: 15.0 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CommModel<'w> {
    pub kind: CommKind,
    pub world: &'w WorldMap,
}

impl<'w> CommModel<'w> {
    pub fn new(kind: CommKind, world: &'w WorldMap) -> Self {
        CommModel { kind, world }
    }

    pub fn lcr(range: f64, world: &'w WorldMap) -> Self {
        CommModel::new(CommKind::Lcr { range }, world)
    }

    pub fn los(world: &'w WorldMap) -> Self {
        CommModel::new(CommKind::Los, world)
    }

    pub fn acomm_static(&self, p: Point, q: Point) -> bool {
        acomm_static(p, q, self)
    }
}

pub fn acomm_static(p: Point, q: Point, model: &CommModel) -> bool {
    match model.kind {
        CommKind::Lcr { range } => p.dist(q) <= range + COMM_EPS,
        CommKind::Los => !model.world.segment_blocked(p, q),
    }
}

/// Sample times `t0, t0 + dt, ..., t1` with both ends included.
fn for_each_sample(t0: f64, t1: f64, dt: f64, mut f: impl FnMut(f64) -> bool) -> bool {
    if !f(t0) {
        return false;
    }
    if t1 <= t0 {
        return true;
    }
    let k = ((t1 - t0) / dt).floor() as usize;
    for i in 1..=k {
        let t = t0 + i as f64 * dt;
        if t >= t1 - 1e-12 {
            break;
        }
        if !f(t) {
            return false;
        }
    }
    f(t1)
}

/// Does the mover keep ACOMM with `other` throughout the move?
///
/// Under a range model the test is exact: relative distance is convex on each
/// linear piece, so the piece ends bound it. Line of sight is sampled every
/// `dt_comm` seconds.
pub fn acomm_during_move(mover: &MotionSegment, other: &TimedPath, model: &CommModel, dt_comm: f64) -> bool {
    match model.kind {
        CommKind::Lcr { range } => {
            let r2 = (range + COMM_EPS) * (range + COMM_EPS);
            other.for_each_piece(mover.t0, mover.t1, |ta, tb, pa, pb| {
                (mover.pos_at(ta) - pa).norm_sq() <= r2 && (mover.pos_at(tb) - pb).norm_sq() <= r2
            })
        }
        CommKind::Los => for_each_sample(mover.t0, mover.t1, dt_comm, |t| {
            !model.world.segment_blocked(mover.pos_at(t), other.pos_at(t))
        }),
    }
}

/// Per-instant variant: at every instant some path of `others` is in
/// communication with the mover, possibly a different one over time.
pub fn acomm_union_during_move<'a>(
    mover: &MotionSegment,
    others: impl Iterator<Item = &'a TimedPath> + Clone,
    model: &CommModel,
    dt_comm: f64,
) -> bool {
    match model.kind {
        CommKind::Lcr { range } => {
            let mut spans: Vec<(f64, f64)> = Vec::new();
            let v = mover.velocity();
            for o in others {
                o.for_each_piece(mover.t0, mover.t1, |ta, tb, pa, pb| {
                    let span = tb - ta;
                    let w = if span > 0.0 { (pb - pa) * (1.0 / span) - v } else { Point::default() };
                    let r0 = pa - mover.pos_at(ta);
                    if let Some((lo, hi)) = within_radius_interval(r0, w, span, range + COMM_EPS) {
                        spans.push((ta + lo, ta + hi));
                    }
                    true
                });
            }
            covers(&mut spans, mover.t0, mover.t1)
        }
        CommKind::Los => for_each_sample(mover.t0, mover.t1, dt_comm, |t| {
            let p = mover.pos_at(t);
            others.clone().any(|o| !model.world.segment_blocked(p, o.pos_at(t)))
        }),
    }
}

fn covers(spans: &mut [(f64, f64)], t0: f64, t1: f64) -> bool {
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut reach = t0;
    for &(lo, hi) in spans.iter() {
        if lo > reach + 1e-9 {
            return false;
        }
        reach = reach.max(hi);
        if reach >= t1 - 1e-9 {
            return true;
        }
    }
    reach >= t1 - 1e-9
}

/// Relative motion of `other` with respect to the mover over one piece.
#[inline]
fn relative(mover: &MotionSegment, ta: f64, tb: f64, pa: Point, pb: Point) -> (Point, Point, f64) {
    let span = tb - ta;
    let r0 = pa - mover.pos_at(ta);
    let w = if span > 0.0 { (pb - mover.pos_at(tb) - r0) * (1.0 / span) } else { Point::default() };
    (r0, w, span)
}

/// True iff the two agents come closer than `d_c` at some instant of the move.
pub fn collision_during_move(mover: &MotionSegment, other: &TimedPath, d_c: f64) -> bool {
    let lim = d_c - COMM_EPS;
    let lim2 = lim * lim;
    !other.for_each_piece(mover.t0, mover.t1, |ta, tb, pa, pb| {
        let (r0, w, span) = relative(mover, ta, tb, pa, pb);
        closest_approach(r0, w, span).1 >= lim2
    })
}

/// Earliest instant in the move at which the agents are closer than `d_c`.
pub fn first_collision_time(mover: &MotionSegment, other: &TimedPath, d_c: f64) -> Option<f64> {
    let mut hit = None;
    other.for_each_piece(mover.t0, mover.t1, |ta, tb, pa, pb| {
        let (r0, w, span) = relative(mover, ta, tb, pa, pb);
        match first_time_within(r0, w, span, d_c - COMM_EPS) {
            Some(s) => {
                hit = Some(ta + s);
                false
            }
            None => true,
        }
    });
    hit
}

#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    sets: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
            sets: n,
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        self.sets -= 1;
        true
    }

    pub fn sets(&self) -> usize {
        self.sets
    }
}

/// Team connectivity: the pairwise ACOMM graph over `positions` is connected.
pub fn tcomm(positions: &[Point], model: &CommModel) -> bool {
    let n = positions.len();
    if n <= 1 {
        return true;
    }
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if uf.find(i) != uf.find(j) && acomm_static(positions[i], positions[j], model) {
                uf.union(i, j);
                if uf.sets() == 1 {
                    return true;
                }
            }
        }
    }
    uf.sets() == 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Rect;
    use crate::path::Waypoint;

    fn open() -> WorldMap {
        WorldMap::empty(100.0, 100.0, "open").unwrap()
    }

    #[test]
    fn static_boundary_inclusive() {
        let w = open();
        let m = CommModel::lcr(15.0, &w);
        assert!(m.acomm_static(Point::new(10.0, 10.0), Point::new(25.0, 10.0)));
        assert!(!m.acomm_static(Point::new(10.0, 10.0), Point::new(25.1, 10.0)));
        let p = Point::new(3.0, 3.0);
        assert!(m.acomm_static(p, p));
        let walled = WorldMap::from_rects(10.0, 10.0, &[Rect::new(4.0, 0.0, 5.0, 10.0)], "w").unwrap();
        let los = CommModel::los(&walled);
        assert!(los.acomm_static(p, p));
        assert!(!los.acomm_static(Point::new(2.0, 5.0), Point::new(8.0, 5.0)));
    }

    #[test]
    fn chain_connectivity() {
        let w = open();
        let m = CommModel::lcr(15.0, &w);
        let chain = |gap: f64| (0..5).map(|i| Point::new(5.0 + gap * i as f64, 50.0)).collect::<Vec<_>>();
        assert!(tcomm(&chain(14.0), &m));
        assert!(!tcomm(&chain(16.0), &m));
        assert!(tcomm(&[Point::new(1.0, 1.0)], &m));
    }

    #[test]
    fn swap_collides() {
        let a = MotionSegment::new(Point::new(0.0, 0.0), 0.0, Point::new(2.0, 0.0), 2.0);
        let b = TimedPath::from_waypoints(vec![
            Waypoint::new(Point::new(2.0, 0.0), 0.0),
            Waypoint::new(Point::new(0.0, 0.0), 2.0),
        ]);
        assert!(collision_during_move(&a, &b, 0.5));
        let t = first_collision_time(&a, &b, 0.5).unwrap();
        assert!((t - 0.75).abs() < 1e-6);
    }

    #[test]
    fn parallel_out_of_range() {
        let w = open();
        let m = CommModel::lcr(15.0, &w);
        let a = MotionSegment::new(Point::new(0.0, 0.0), 0.0, Point::new(10.0, 0.0), 10.0);
        let b = TimedPath::from_waypoints(vec![
            Waypoint::new(Point::new(0.0, 20.0), 0.0),
            Waypoint::new(Point::new(10.0, 20.0), 10.0),
        ]);
        assert!(!acomm_during_move(&a, &b, &m, 0.25));
        let mid = TimedPath::stationary(Point::new(5.0, 0.0), 0.0);
        assert!(acomm_during_move(&a, &mid, &m, 0.25));
    }

    #[test]
    fn union_covers_handoff() {
        let w = open();
        let m = CommModel::lcr(5.0, &w);
        // mover passes a near b first, then c; neither covers the whole move
        let a = MotionSegment::new(Point::new(0.0, 0.0), 0.0, Point::new(16.0, 0.0), 16.0);
        let b = TimedPath::stationary(Point::new(2.0, 3.0), 0.0);
        let c = TimedPath::stationary(Point::new(10.0, 3.0), 0.0);
        assert!(!acomm_during_move(&a, &b, &m, 0.25));
        assert!(!acomm_during_move(&a, &c, &m, 0.25));
        let short = MotionSegment::new(Point::new(0.0, 0.0), 0.0, Point::new(12.0, 0.0), 12.0);
        assert!(acomm_union_during_move(&short, [&b, &c].into_iter(), &m, 0.25));
        assert!(!acomm_union_during_move(&a, [&b, &c].into_iter(), &m, 0.25));
        let los = CommModel::los(&w);
        assert!(acomm_union_during_move(&a, [&b, &c].into_iter(), &los, 0.25));
    }
}
