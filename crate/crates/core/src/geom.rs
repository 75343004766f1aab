use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

/// Positions closer than this are treated as the same point.
pub const POS_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// Linear interpolation, `s = 0` gives `self`.
    pub fn lerp(self, other: Point, s: f64) -> Point {
        Point::new(self.x + (other.x - self.x) * s, self.y + (other.y - self.y) * s)
    }

    pub fn approx_eq(self, other: Point, tol: f64) -> bool {
        self.dist(other) <= tol
    }
}

impl From<[f64; 2]> for Point {
    fn from(a: [f64; 2]) -> Self {
        Point::new(a[0], a[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

/// Axis-aligned rectangle stored by its min and max corners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect {
            min: Point::new(x0.min(x1), y0.min(y1)),
            max: Point::new(x0.max(x1), y0.max(y1)),
        }
    }

    /// From the `[x, y, w, h]` form used in map files.
    pub fn from_xywh(x: f64, y: f64, w: f64, h: f64) -> Self {
        Rect::new(x, y, x + w, y + h)
    }

    pub fn to_xywh(self) -> [f64; 4] {
        [self.min.x, self.min.y, self.width(), self.height()]
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point {
        Point::new(
            0.5 * (self.min.x + self.max.x),
            0.5 * (self.min.y + self.max.y),
        )
    }

    /// Closed containment with tolerance.
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        p.x >= self.min.x - tol
            && p.x <= self.max.x + tol
            && p.y >= self.min.y - tol
            && p.y <= self.max.y + tol
    }

    /// Strict interior containment.
    pub fn interior_contains(&self, p: Point) -> bool {
        p.x > self.min.x && p.x < self.max.x && p.y > self.min.y && p.y < self.max.y
    }

    /// True if the interiors overlap with positive area.
    pub fn overlaps_interior(&self, other: &Rect) -> bool {
        self.min.x < other.max.x
            && other.min.x < self.max.x
            && self.min.y < other.max.y
            && other.min.y < self.max.y
    }

    /// True if the closed rectangles share at least one point.
    pub fn touches(&self, other: &Rect, tol: f64) -> bool {
        self.min.x <= other.max.x + tol
            && other.min.x <= self.max.x + tol
            && self.min.y <= other.max.y + tol
            && other.min.y <= self.max.y + tol
    }

    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        let r = Rect {
            min: Point::new(self.min.x.max(other.min.x), self.min.y.max(other.min.y)),
            max: Point::new(self.max.x.min(other.max.x), self.max.y.min(other.max.y)),
        };
        (r.min.x < r.max.x && r.min.y < r.max.y).then_some(r)
    }

    /// Exact slab test: does the open segment `(p, q)` pass through the open
    /// interior of this rectangle?
    ///
    /// Grazing contacts (running along an edge, touching a corner) are not
    /// intersections. Overlaps shorter than `1e-12` of the segment parameter are
    /// treated as grazing.
    pub fn segment_hits_interior(&self, p: Point, q: Point) -> bool {
        let d = q - p;
        let mut lo = 0.0_f64;
        let mut hi = 1.0_f64;
        for (origin, dir, min, max) in [
            (p.x, d.x, self.min.x, self.max.x),
            (p.y, d.y, self.min.y, self.max.y),
        ] {
            if dir == 0.0 {
                if origin <= min || origin >= max {
                    return false;
                }
            } else {
                let a = (min - origin) / dir;
                let b = (max - origin) / dir;
                let (a, b) = if a < b { (a, b) } else { (b, a) };
                lo = lo.max(a);
                hi = hi.min(b);
                if hi - lo <= 1e-12 {
                    return false;
                }
            }
        }
        hi - lo > 1e-12
    }
}

/// Time of closest approach and squared distance for relative motion
/// `r(s) = r0 + w * s`, `s` restricted to `[0, span]`.
pub fn closest_approach(r0: Point, w: Point, span: f64) -> (f64, f64) {
    let ww = w.norm_sq();
    let s = if ww <= 0.0 || span <= 0.0 {
        0.0
    } else {
        (-r0.dot(w) / ww).clamp(0.0, span)
    };
    (s, (r0 + w * s).norm_sq())
}

/// Sub-interval of `[0, span]` where `|r0 + w s| <= radius`, if any.
pub fn within_radius_interval(r0: Point, w: Point, span: f64, radius: f64) -> Option<(f64, f64)> {
    let a = w.norm_sq();
    let b = 2.0 * r0.dot(w);
    let c = r0.norm_sq() - radius * radius;
    if a <= 1e-18 || span <= 0.0 {
        return (c <= 0.0).then_some((0.0, span.max(0.0)));
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let s0 = (-b - sq) / (2.0 * a);
    let s1 = (-b + sq) / (2.0 * a);
    let lo = s0.max(0.0);
    let hi = s1.min(span);
    (lo <= hi).then_some((lo, hi))
}

/// First `s` in `[0, span]` with `|r0 + w s| < radius`, if any.
pub fn first_time_within(r0: Point, w: Point, span: f64, radius: f64) -> Option<f64> {
    if r0.norm_sq() < radius * radius {
        return Some(0.0);
    }
    let (s, d2) = closest_approach(r0, w, span);
    if d2 >= radius * radius {
        return None;
    }
    // the entry root lies in (0, s]
    let a = w.norm_sq();
    let b = 2.0 * r0.dot(w);
    let c = r0.norm_sq() - radius * radius;
    let disc = (b * b - 4.0 * a * c).max(0.0);
    let root = (-b - disc.sqrt()) / (2.0 * a);
    Some(root.clamp(0.0, s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slab_grazing_is_not_blocking() {
        let r = Rect::new(1.0, 0.0, 2.0, 1.0);
        // along the top edge
        assert!(!r.segment_hits_interior(Point::new(0.0, 1.0), Point::new(3.0, 1.0)));
        // through the corner only
        assert!(!r.segment_hits_interior(Point::new(0.5, 0.5), Point::new(1.5, 1.5)));
        // through the middle
        assert!(r.segment_hits_interior(Point::new(0.0, 0.5), Point::new(3.0, 0.5)));
        // endpoint on the boundary, rest outside
        assert!(!r.segment_hits_interior(Point::new(0.0, 0.5), Point::new(1.0, 0.5)));
        // vertical through interior
        assert!(r.segment_hits_interior(Point::new(1.5, -1.0), Point::new(1.5, 2.0)));
    }

    #[test]
    fn closest_approach_head_on() {
        let (s, d2) = closest_approach(Point::new(-2.0, 0.0), Point::new(1.0, 0.0), 5.0);
        assert!((s - 2.0).abs() < 1e-12);
        assert!(d2 < 1e-24);
        let t = first_time_within(Point::new(-2.0, 0.0), Point::new(1.0, 0.0), 5.0, 0.5).unwrap();
        assert!((t - 1.5).abs() < 1e-12);
    }

    #[test]
    fn radius_interval_matches_roots() {
        let (a, b) =
            within_radius_interval(Point::new(-3.0, 1.0), Point::new(1.0, 0.0), 10.0, 2.0).unwrap();
        let h = 3.0_f64.sqrt();
        assert!((a - (3.0 - h)).abs() < 1e-12 && (b - (3.0 + h)).abs() < 1e-12);
        assert!(within_radius_interval(Point::new(-3.0, 5.0), Point::new(1.0, 0.0), 10.0, 2.0)
            .is_none());
    }
}
