//! Timed piecewise-linear agent paths.

use crate::geom::{Point, POS_EPS};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Waypoint {
    pub p: Point,
    pub t: f64,
}

impl Waypoint {
    pub const fn new(p: Point, t: f64) -> Self {
        Waypoint { p, t }
    }
}

impl From<[f64; 3]> for Waypoint {
    fn from(a: [f64; 3]) -> Self {
        Waypoint::new(Point::new(a[0], a[1]), a[2])
    }
}

impl From<Waypoint> for [f64; 3] {
    fn from(w: Waypoint) -> Self {
        [w.p.x, w.p.y, w.t]
    }
}

/// One straight move `p0 -> p1` during `[t0, t1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionSegment {
    pub p0: Point,
    pub p1: Point,
    pub t0: f64,
    pub t1: f64,
}

impl MotionSegment {
    pub fn new(p0: Point, t0: f64, p1: Point, t1: f64) -> Self {
        MotionSegment { p0, p1, t0, t1 }
    }

    /// Move at speed `v` starting at `t0`.
    pub fn at_speed(p0: Point, p1: Point, t0: f64, v: f64) -> Self {
        let t1 = t0 + p0.dist(p1) / v;
        MotionSegment { p0, p1, t0, t1 }
    }

    pub fn duration(&self) -> f64 {
        self.t1 - self.t0
    }

    pub fn length(&self) -> f64 {
        self.p0.dist(self.p1)
    }

    /// Constant velocity; zero for a stop.
    pub fn velocity(&self) -> Point {
        let d = self.duration();
        if d <= 0.0 {
            Point::default()
        } else {
            (self.p1 - self.p0) * (1.0 / d)
        }
    }

    pub fn pos_at(&self, t: f64) -> Point {
        let d = self.duration();
        if d <= 0.0 || t <= self.t0 {
            return self.p0;
        }
        if t >= self.t1 {
            return self.p1;
        }
        self.p0.lerp(self.p1, (t - self.t0) / d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedPath {
    pub waypoints: Vec<Waypoint>,
    pub reached_goal: bool,
    #[serde(default, skip_serializing)]
    pub costogoal: f64,
}

impl TimedPath {
    pub fn stationary(p: Point, t: f64) -> Self {
        TimedPath {
            waypoints: vec![Waypoint::new(p, t)],
            reached_goal: false,
            costogoal: 0.0,
        }
    }

    pub fn from_waypoints(waypoints: Vec<Waypoint>) -> Self {
        assert!(!waypoints.is_empty(), "a path needs at least one waypoint");
        TimedPath {
            waypoints,
            reached_goal: false,
            costogoal: 0.0,
        }
    }

    pub fn start(&self) -> Waypoint {
        self.waypoints[0]
    }

    pub fn end(&self) -> Waypoint {
        *self.waypoints.last().expect("non-empty path")
    }

    pub fn start_time(&self) -> f64 {
        self.waypoints[0].t
    }

    pub fn end_time(&self) -> f64 {
        self.end().t
    }

    pub fn end_pos(&self) -> Point {
        self.end().p
    }

    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| w[0].p.dist(w[1].p)).sum()
    }

    pub fn segments(&self) -> impl Iterator<Item = MotionSegment> + '_ {
        self.waypoints
            .windows(2)
            .map(|w| MotionSegment::new(w[0].p, w[0].t, w[1].p, w[1].t))
    }

    /// Position at `t`, holding the first position before the start and the
    /// last position after the end.
    pub fn pos_at(&self, t: f64) -> Point {
        let w = &self.waypoints;
        if t <= w[0].t {
            return w[0].p;
        }
        let last = w.len() - 1;
        if t >= w[last].t {
            return w[last].p;
        }
        // first index with time > t; it is in 1..=last
        let i = w.partition_point(|x| x.t <= t);
        MotionSegment::new(w[i - 1].p, w[i - 1].t, w[i].p, w[i].t).pos_at(t)
    }

    /// Calls `f(ta, tb, pa, pb)` for each linear piece of the path restricted
    /// to `[t0, t1]`, including the holds before the start and after the end.
    /// Pieces are visited in time order and tile the interval.
    pub fn for_each_piece(&self, t0: f64, t1: f64, mut f: impl FnMut(f64, f64, Point, Point) -> bool) -> bool {
        let w = &self.waypoints;
        let mut t = t0;
        let mut p = self.pos_at(t0);
        let mut i = w.partition_point(|x| x.t <= t0);
        while i < w.len() && w[i].t < t1 {
            if w[i].t > t {
                if !f(t, w[i].t, p, w[i].p) {
                    return false;
                }
                t = w[i].t;
            }
            p = w[i].p;
            i += 1;
        }
        if t1 > t || t0 == t1 {
            return f(t, t1, p, self.pos_at(t1));
        }
        true
    }

    /// Appends a segment that starts where this path ends. Zero-duration
    /// duplicates of the end waypoint are dropped.
    pub fn extend_with(&mut self, segment: &[Waypoint]) {
        for &w in segment {
            let end = self.end();
            if w.t <= end.t + 1e-12 && w.p.approx_eq(end.p, POS_EPS) {
                continue;
            }
            self.waypoints.push(w);
        }
    }

    /// Cuts the path at time `t`; the new end is the interpolated position.
    pub fn trim_to(&mut self, t: f64) {
        if t >= self.end_time() {
            return;
        }
        let p = self.pos_at(t);
        let keep = self.waypoints.partition_point(|x| x.t < t).max(1);
        self.waypoints.truncate(keep);
        let end = self.end();
        if end.t < t || !end.p.approx_eq(p, POS_EPS) {
            self.waypoints.push(Waypoint::new(p, t.max(end.t)));
        }
    }

    pub fn max_speed(&self) -> f64 {
        self.segments()
            .map(|s| {
                let d = s.duration();
                if d > 0.0 {
                    s.length() / d
                } else if s.length() > POS_EPS {
                    f64::INFINITY
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Interpolated position; `t` must lie within the path's time span.
pub fn get_pos_at_time(path: &TimedPath, t: f64) -> Point {
    debug_assert!(t >= path.start_time() - 1e-9 && t <= path.end_time() + 1e-9);
    path.pos_at(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> TimedPath {
        TimedPath::from_waypoints(vec![
            Waypoint::new(Point::new(0.0, 0.0), 0.0),
            Waypoint::new(Point::new(2.0, 0.0), 2.0),
            Waypoint::new(Point::new(2.0, 1.0), 3.0),
        ])
    }

    #[test]
    fn interpolation() {
        let p = line();
        assert_eq!(get_pos_at_time(&p, 2.0), Point::new(2.0, 0.0));
        assert!(get_pos_at_time(&p, 1.0).approx_eq(Point::new(1.0, 0.0), 1e-12));
        assert_eq!(p.pos_at(10.0), Point::new(2.0, 1.0));
        assert_eq!(p.pos_at(-1.0), Point::new(0.0, 0.0));
    }

    #[test]
    fn pieces_tile_the_interval() {
        let p = line();
        let mut spans = Vec::new();
        p.for_each_piece(-1.0, 4.0, |a, b, _, _| {
            spans.push((a, b));
            true
        });
        assert_eq!(spans, vec![(-1.0, 0.0), (0.0, 2.0), (2.0, 3.0), (3.0, 4.0)]);
        spans.clear();
        p.for_each_piece(0.5, 1.5, |a, b, pa, pb| {
            spans.push((a, b));
            assert!(pa.approx_eq(Point::new(0.5, 0.0), 1e-12));
            assert!(pb.approx_eq(Point::new(1.5, 0.0), 1e-12));
            true
        });
        assert_eq!(spans, vec![(0.5, 1.5)]);
    }

    #[test]
    fn trim_mid_segment() {
        let mut p = line();
        p.trim_to(1.5);
        assert_eq!(p.waypoints.len(), 2);
        assert!(p.end_pos().approx_eq(Point::new(1.5, 0.0), 1e-12));
        assert_eq!(p.end_time(), 1.5);
        let mut q = line();
        q.trim_to(2.0);
        assert_eq!(q.waypoints.len(), 2);
    }

    #[test]
    fn waypoint_json_triplet() {
        let s = serde_json::to_string(&Waypoint::new(Point::new(1.0, 2.0), 3.5)).unwrap();
        assert_eq!(s, "[1.0,2.0,3.5]");
    }
}
