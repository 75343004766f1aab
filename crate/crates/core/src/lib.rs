pub mod baselines;
pub mod bench;
pub mod comm;
pub mod envgen;
pub mod error;
pub mod geom;
pub mod heuristics;
pub mod path;
pub mod planner;
pub mod problem;
pub mod sapf;
pub mod tct;
pub mod trace;
pub mod validate;
pub mod world;

pub use comm::{CommKind, CommModel};
pub use error::{Error, Result};
pub use geom::{Point, Rect};
pub use path::{TimedPath, Waypoint};
pub use planner::{solve, PlannerConfig};
pub use problem::{Instance, Solution, Stats, Status};
pub use world::{NavGraph, WorldMap};
