use mapf_tct::comm::{acomm_during_move, collision_during_move, first_collision_time, tcomm, CommModel};
use mapf_tct::path::{get_pos_at_time, MotionSegment, TimedPath, Waypoint};
use mapf_tct::world::{segment_blocked, subdivide};
use mapf_tct::{Point, Rect, WorldMap};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pt(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Point {
    Point::new(rng.gen_range(lo..hi), rng.gen_range(lo..hi))
}

fn strictly_inside(r: &Rect, p: Point, margin: f64) -> bool {
    p.x > r.min.x + margin && p.x < r.max.x - margin && p.y > r.min.y + margin && p.y < r.max.y - margin
}

/// Dense sampling at 1 mm; `margin` shrinks (> 0) or grows (< 0) the rectangle.
fn sampled_hit(r: &Rect, p: Point, q: Point, margin: f64) -> bool {
    let steps = (p.dist(q) / 1e-3).ceil().max(1.0) as usize;
    (1..steps).any(|k| strictly_inside(r, p.lerp(q, k as f64 / steps as f64), margin))
}

#[test]
fn segment_blocked_matches_point_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut compared = 0;
    let mut blocked = 0;
    while compared < 100 {
        let c = pt(&mut rng, 3.0, 7.0);
        let (w, h) = (rng.gen_range(0.3..3.0), rng.gen_range(0.3..3.0));
        let r = Rect::new(c.x - w / 2.0, c.y - h / 2.0, c.x + w / 2.0, c.y + h / 2.0);
        let world = WorldMap::from_rects(10.0, 10.0, &[r], "s").unwrap();
        let (p, q) = (pt(&mut rng, 0.0, 10.0), pt(&mut rng, 0.0, 10.0));
        if strictly_inside(&r, p, -1e-3) || strictly_inside(&r, q, -1e-3) {
            continue;
        }
        // guard band: skip segments that only graze the rectangle
        let inner = sampled_hit(&r, p, q, 2e-3);
        let outer = sampled_hit(&r, p, q, -2e-3);
        if inner != outer {
            continue;
        }
        assert_eq!(segment_blocked(p, q, &world), inner, "{p:?} -> {q:?} vs {r:?}");
        compared += 1;
        blocked += inner as usize;
    }
    assert!(blocked > 10 && blocked < 90, "fixture mix too one-sided: {blocked}");
}

fn random_path(rng: &mut ChaCha8Rng, t_end: f64) -> TimedPath {
    let mut t = 0.0;
    let mut p = pt(rng, 0.0, 6.0);
    let mut wps = vec![Waypoint::new(p, 0.0)];
    while t < t_end {
        if rng.gen_bool(0.2) {
            t += rng.gen_range(0.3..1.5);
        } else {
            let q = pt(rng, 0.0, 6.0);
            // at or below 1 m/s
            t += p.dist(q) * rng.gen_range(1.0..2.0) + 1e-3;
            p = q;
        }
        wps.push(Waypoint::new(p, t));
    }
    TimedPath::from_waypoints(wps)
}

#[test]
fn collision_matches_millisecond_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let d_c = 0.5;
    let mut compared = 0;
    let mut hits = 0;
    while compared < 200 {
        let p0 = pt(&mut rng, 0.0, 6.0);
        let p1 = pt(&mut rng, 0.0, 6.0);
        let t0 = rng.gen_range(0.0..2.0);
        let mover = MotionSegment::at_speed(p0, p1, t0, 1.0);
        let other = random_path(&mut rng, t0 + mover.duration() + 1.0);
        let steps = ((mover.t1 - mover.t0) / 1e-3).ceil().max(1.0) as usize;
        let dmin = (0..=steps)
            .map(|k| {
                let t = mover.t0 + (mover.t1 - mover.t0) * k as f64 / steps as f64;
                mover.pos_at(t).dist(other.pos_at(t))
            })
            .fold(f64::INFINITY, f64::min);
        // the sampled minimum can overshoot the true one by one step of relative motion
        if (dmin - d_c).abs() < 3e-3 {
            continue;
        }
        let oracle = dmin < d_c;
        assert_eq!(collision_during_move(&mover, &other, d_c), oracle, "dmin {dmin}");
        assert_eq!(first_collision_time(&mover, &other, d_c).is_some(), oracle);
        compared += 1;
        hits += oracle as usize;
    }
    assert!(hits > 5, "only {hits} colliding pairs");
}

#[test]
fn first_collision_time_matches_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut checked = 0;
    while checked < 50 {
        let mover = MotionSegment::at_speed(pt(&mut rng, 0.0, 6.0), pt(&mut rng, 0.0, 6.0), 0.0, 1.0);
        let other = random_path(&mut rng, mover.t1 + 1.0);
        let Some(tc) = first_collision_time(&mover, &other, 0.5) else { continue };
        let steps = (mover.t1 / 1e-4).ceil() as usize;
        let first = (0..=steps)
            .map(|k| mover.t1 * k as f64 / steps as f64)
            .find(|&t| mover.pos_at(t).dist(other.pos_at(t)) < 0.5 - 1e-9)
            .unwrap();
        assert!((first - tc).abs() < 2e-3, "{first} vs {tc}");
        checked += 1;
    }
}

#[test]
fn range_acomm_matches_closed_form_extremes() {
    let world = WorldMap::empty(100.0, 100.0, "e").unwrap();
    let model = CommModel::lcr(15.0, &world);
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..50 {
        let a = MotionSegment::at_speed(pt(&mut rng, 30.0, 70.0), pt(&mut rng, 30.0, 70.0), 0.0, 1.0);
        let b0 = pt(&mut rng, 30.0, 70.0);
        let b1 = pt(&mut rng, 30.0, 70.0);
        let other = TimedPath::from_waypoints(vec![Waypoint::new(b0, 0.0), Waypoint::new(b1, a.t1)]);
        // relative distance is convex in t on a shared linear piece, so its
        // maximum is at an end; sample the interior to confirm
        let ends = a.p0.dist(b0).max(a.p1.dist(b1));
        let dense = (0..=2000)
            .map(|k| {
                let t = a.t1 * k as f64 / 2000.0;
                a.pos_at(t).dist(other.pos_at(t))
            })
            .fold(0.0, f64::max);
        assert!((dense - ends).abs() < 1e-9);
        if (ends - 15.0).abs() > 1e-6 {
            assert_eq!(acomm_during_move(&a, &other, &model, 0.25), ends <= 15.0);
        }
    }
    // a 14.9 m closest approach is not enough when the ends are out of range
    let a = MotionSegment::at_speed(Point::new(40.0, 50.0), Point::new(50.0, 50.0), 0.0, 1.0);
    let other = TimedPath::from_waypoints(vec![Waypoint::new(Point::new(45.0, 64.9), 0.0), Waypoint::new(Point::new(45.0, 64.9), 10.0)]);
    assert!(!acomm_during_move(&a, &other, &model, 0.25));
    let b = TimedPath::from_waypoints(vec![Waypoint::new(Point::new(50.0, 60.0), 0.0), Waypoint::new(Point::new(40.0, 60.0), 10.0)]);
    assert!(acomm_during_move(&a, &b, &model, 0.25));
}

fn bfs_connected(pts: &[Point], r: f64) -> bool {
    if pts.is_empty() {
        return true;
    }
    let mut seen = vec![false; pts.len()];
    let mut queue = vec![0];
    seen[0] = true;
    while let Some(i) = queue.pop() {
        for j in 0..pts.len() {
            if !seen[j] && pts[i].dist(pts[j]) <= r {
                seen[j] = true;
                queue.push(j);
            }
        }
    }
    seen.iter().all(|&s| s)
}

#[test]
fn tcomm_matches_bfs() {
    let world = WorldMap::empty(60.0, 60.0, "e").unwrap();
    let model = CommModel::lcr(15.0, &world);
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut connected = 0;
    for _ in 0..100 {
        let spread = rng.gen_range(15.0..60.0);
        let pts: Vec<Point> = (0..10).map(|_| pt(&mut rng, 0.0, spread)).collect();
        let oracle = bfs_connected(&pts, 15.0);
        assert_eq!(tcomm(&pts, &model), oracle);
        connected += oracle as usize;
    }
    assert!(connected > 10 && connected < 90, "{connected}");
}

#[test]
fn subdivision_keeps_free_half() {
    let world = WorldMap::from_rects(1.0, 1.0, &[Rect::new(0.0, 0.0, 0.5, 1.0)], "h").unwrap();
    let sub = subdivide(&world, 1.0, 0.25).unwrap();
    let free = rasterized_free_area(&world, 64);
    assert!((free - 0.5).abs() < 1e-12);
    assert!((sub.kept_area() - free).abs() <= 0.0625 + 1e-12);
    assert!(sub.cells.iter().all(|c| c.min.x >= 0.5 - 1e-12));
}

fn rasterized_free_area(world: &WorldMap, per_meter: usize) -> f64 {
    let h = 1.0 / per_meter as f64;
    let nx = (world.width() * per_meter as f64).round() as usize;
    let ny = (world.height() * per_meter as f64).round() as usize;
    let mut free = 0usize;
    for i in 0..nx {
        for j in 0..ny {
            let c = Point::new((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
            if !world.obstacle_rects().any(|r| r.contains(c, 0.0)) {
                free += 1;
            }
        }
    }
    free as f64 * h * h
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn subdivision_conserves_area(rects in prop::collection::vec((0.0f64..9.0, 0.0f64..9.0, 0.2f64..3.0, 0.2f64..3.0), 0..6)) {
        let rs: Vec<Rect> = rects.iter().map(|&(x, y, w, h)| Rect::new(x, y, (x + w).min(10.0), (y + h).min(10.0))).collect();
        let world = WorldMap::from_rects(10.0, 10.0, &rs, "p").unwrap();
        let sub = subdivide(&world, 1.0, 0.25).unwrap();
        let free = rasterized_free_area(&world, 64);
        let tol: f64 = rs.iter().map(|r| 2.0 * (r.width() + r.height())).sum::<f64>() / 64.0 + 1e-9;
        // kept cells never overlap an obstacle interior
        for c in &sub.cells {
            prop_assert!(!world.rect_blocked(c));
        }
        // everything not kept is either solid or a discarded fragment
        let covered = sub.kept_area() + sub.discarded_area();
        prop_assert!((covered - 100.0).abs() < 1e-9, "cells cover {covered}");
        prop_assert!(sub.kept_area() <= free + tol);
        prop_assert!(sub.kept_area() >= free - sub.discarded_area() - tol);
    }

    #[test]
    fn interpolation_respects_speed(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = 0.0;
        let mut p = pt(&mut rng, 0.0, 10.0);
        let mut wps = vec![Waypoint::new(p, 0.0)];
        for _ in 0..6 {
            let q = pt(&mut rng, 0.0, 10.0);
            t += p.dist(q);
            p = q;
            wps.push(Waypoint::new(p, t));
        }
        let path = TimedPath::from_waypoints(wps.clone());
        for _ in 0..20 {
            let s = rng.gen_range(0.0..t);
            let x = get_pos_at_time(&path, s);
            let k = wps.iter().rposition(|w| w.t <= s).unwrap().min(wps.len() - 2);
            let (a, b) = (wps[k], wps[k + 1]);
            // on the segment, and moved |x - a| in s - a.t at unit speed
            prop_assert!((a.p.dist(x) + x.dist(b.p) - a.p.dist(b.p)).abs() < 1e-9);
            prop_assert!((a.p.dist(x) - (s - a.t)).abs() < 1e-9);
        }
    }
}
