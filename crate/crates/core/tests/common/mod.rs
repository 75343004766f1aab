#![allow(dead_code)]

use mapf_tct::path::{TimedPath, Waypoint};
use mapf_tct::{CommKind, Instance, Point, Rect, WorldMap};
use std::sync::{Mutex, MutexGuard};

static CLOCK: Mutex<()> = Mutex::new(());

/// Wall-clock budgets are only meaningful one run at a time.
pub fn timed() -> MutexGuard<'static, ()> {
    CLOCK.lock().unwrap_or_else(|e| e.into_inner())
}

/// `count` baffles along a corridor `[y0, y0 + h]`, one every 2 m from `x0`,
/// each leaving a 1 m gap on alternating sides.
pub fn baffles(x0: f64, count: usize, y0: f64, h: f64) -> Vec<Rect> {
    (0..count)
        .map(|k| {
            let x = x0 + 2.0 * k as f64;
            if k % 2 == 0 {
                Rect::new(x, y0, x + 1.0, y0 + h - 1.0)
            } else {
                Rect::new(x, y0 + 1.0, x + 1.0, y0 + h)
            }
        })
        .collect()
}

/// Two parallel corridors split by a 1 m wall. The north one has a serpentine
/// early and the south one late, so whichever agent leads the whole way
/// outruns the other.
pub fn two_serpentines(count: usize, range: f64) -> Instance {
    let len = 2.0 * count as f64;
    let w = 6.0 + len + 6.0 + len + 6.0;
    let mut rects = vec![Rect::new(0.0, 4.0, w, 5.0)];
    rects.extend(baffles(6.0, count, 5.0, 4.0));
    rects.extend(baffles(12.0 + len, count, 0.0, 4.0));
    let world = WorldMap::from_rects(w, 9.0, &rects, "two-serpentines").unwrap();
    Instance::new(
        world,
        vec![Point::new(1.5, 5.5), Point::new(1.5, 3.5)],
        vec![Point::new(w - 1.5, 5.5), Point::new(w - 1.5, 3.5)],
        CommKind::Lcr { range },
    )
}

/// A shared stem that forks into two corridors, again with serpentines at
/// different depths; goals sit in opposite corners.
pub fn fork(count: usize, range: f64) -> Instance {
    let len = 2.0 * count as f64;
    let w = 10.0 + len + 6.0 + len + 6.0;
    let mut rects = vec![Rect::new(8.0, 4.0, w, 5.0)];
    rects.extend(baffles(10.0, count, 5.0, 4.0));
    rects.extend(baffles(16.0 + len, count, 0.0, 4.0));
    let world = WorldMap::from_rects(w, 9.0, &rects, "fork").unwrap();
    Instance::new(
        world,
        vec![Point::new(2.5, 6.5), Point::new(2.5, 2.5)],
        vec![Point::new(w - 1.5, 7.5), Point::new(w - 1.5, 1.5)],
        CommKind::Lcr { range },
    )
}

/// A wall with a near gap in the west and a shortcut gap in the east. Agents
/// 1 and 2 park early; the shortcut for agent 0 leaves their range.
pub fn at_goal_detour() -> Instance {
    let rects = [Rect::new(0.0, 6.5, 5.0, 7.5), Rect::new(7.0, 6.5, 21.0, 7.5), Rect::new(23.0, 6.5, 30.0, 7.5)];
    let world = WorldMap::from_rects(30.0, 14.0, &rects, "at-goal").unwrap();
    Instance::new(
        world,
        vec![Point::new(17.2, 4.1), Point::new(10.3, 4.2), Point::new(13.4, 3.9)],
        vec![Point::new(16.2, 10.1), Point::new(10.1, 10.3), Point::new(12.3, 10.2)],
        CommKind::Lcr { range: 6.0 },
    )
}

pub const EAST_GAP: Rect = Rect {
    min: Point { x: 21.0, y: 6.5 },
    max: Point { x: 23.0, y: 7.5 },
};

/// A 2 m thick wall with a 1 m gate at y = 9..10 and a second gate far north.
/// Agents 0 and 1 cross eastward, agent 2 westward.
pub fn two_gates() -> Instance {
    let rects = [Rect::new(14.0, 0.0, 16.0, 9.0), Rect::new(14.0, 10.0, 16.0, 25.0), Rect::new(14.0, 26.0, 16.0, 30.0)];
    let world = WorldMap::from_rects(30.0, 30.0, &rects, "two-gates").unwrap();
    Instance::new(
        world,
        vec![Point::new(12.5, 9.5), Point::new(11.5, 9.5), Point::new(17.5, 9.5)],
        vec![Point::new(18.5, 10.5), Point::new(19.5, 9.5), Point::new(11.5, 10.5)],
        CommKind::Lcr { range: 8.0 },
    )
}

fn wp(x: f64, y: f64, t: f64) -> Waypoint {
    Waypoint::new(Point::new(x, y), t)
}

/// Hand-built plan for [`two_gates`]: agent 2 steps aside, the others pass
/// the near gate, then agent 2 goes through.
pub fn two_gates_witness() -> Vec<TimedPath> {
    let s10 = 10f64.sqrt();
    let s5 = 5f64.sqrt();
    vec![
        TimedPath::from_waypoints(vec![wp(12.5, 9.5, 0.0), wp(16.5, 9.5, 4.0), wp(18.5, 10.5, 4.0 + s5)]),
        TimedPath::from_waypoints(vec![wp(11.5, 9.5, 0.0), wp(16.5, 9.5, 5.0), wp(19.5, 9.5, 8.0)]),
        TimedPath::from_waypoints(vec![
            wp(17.5, 9.5, 0.0),
            wp(17.5, 12.5, 3.0),
            wp(17.5, 12.5, 8.0),
            wp(16.5, 9.5, 8.0 + s10),
            wp(13.5, 9.5, 11.0 + s10),
            wp(11.5, 10.5, 11.0 + s10 + s5),
        ]),
    ]
}
