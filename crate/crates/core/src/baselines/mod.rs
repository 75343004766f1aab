//! Comparison planners sharing the main planner's graph, comm models and
//! solution format.

pub mod comp;
pub mod pibt;
pub mod plf;

pub use comp::solve_comp;
pub use pibt::solve_pibt_comm;
pub use plf::solve_plf;

use crate::geom::{Point, POS_EPS};
use crate::path::{TimedPath, Waypoint};

/// Appends a move to `p` that starts at time `t` at speed `v_c`, holding
/// the current end until `t` first.
pub(crate) fn push_move(path: &mut TimedPath, p: Point, t: f64, v_c: f64) {
    let end = path.end();
    let d = end.p.dist(p);
    if d <= POS_EPS {
        return;
    }
    if end.t < t - 1e-12 {
        path.waypoints.push(Waypoint::new(end.p, t));
    }
    path.waypoints.push(Waypoint::new(p, t + d / v_c));
}
