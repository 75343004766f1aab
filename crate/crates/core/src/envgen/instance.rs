use super::families::MAZE_CELLS;
use super::Family;
use crate::comm::{acomm_static, tcomm, CommKind, CommModel};
use crate::error::{Error, Result};
use crate::geom::{Point, Rect};
use crate::problem::Instance;
use crate::world::{NavGraph, WorldMap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Draws allowed per sampled point.
pub const MAX_ATTEMPTS: usize = 10_000;

/// Shape of the start and goal areas on the two opposite sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    /// Full-width strips, 20 m deep at 114 m.
    #[default]
    Strip,
    /// Full-width strips, 8 m deep.
    LongThin,
    /// 40 m x 30 m, centered on the side.
    Rectangle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionSet {
    pub starts: Rect,
    pub goals: Rect,
}

pub fn default_regions(family: Family, size: f64, region: Region, seed: u64) -> RegionSet {
    let k = size / 114.0;
    match family {
        Family::Rings => {
            let c = size / 2.0;
            let h = 6.0 * k;
            let w = 25.0 * k;
            let corner = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed).gen_range(0..4);
            let (x0, y0) = match corner {
                0 => (0.0, 0.0),
                1 => (size - w, 0.0),
                2 => (0.0, size - w),
                _ => (size - w, size - w),
            };
            RegionSet {
                starts: Rect::new(c - h, c - h, c + h, c + h),
                goals: Rect::new(x0, y0, x0 + w, y0 + w),
            }
        }
        Family::Maze => {
            let depth = size / MAZE_CELLS as f64 - 1.0;
            RegionSet {
                starts: Rect::new(0.0, 0.0, size, depth),
                goals: Rect::new(0.0, size - depth, size, size),
            }
        }
        // the outer long hallways; the narrowest hallway still contains the band
        Family::Office => {
            let h = 3.5 * k;
            let (lo, hi) = (size / 6.0, 5.0 * size / 6.0);
            RegionSet {
                starts: Rect::new(0.0, lo - h, size, lo + h),
                goals: Rect::new(0.0, hi - h, size, hi + h),
            }
        }
        _ => {
            let (w, d) = match region {
                Region::Strip => (size, 20.0 * k),
                Region::LongThin => (size, 8.0 * k),
                Region::Rectangle => (40.0 * k, 30.0 * k),
            };
            let x0 = (size - w) / 2.0;
            RegionSet {
                starts: Rect::new(x0, 0.0, x0 + w, d),
                goals: Rect::new(x0, size - d, x0 + w, size),
            }
        }
    }
}

/// How a configuration is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    /// Whole configurations drawn uniformly until one is team-connected.
    Joint,
    /// Points added one at a time, each in reach of an earlier one.
    #[default]
    Sequential,
}

struct Sampler<'a> {
    world: &'a WorldMap,
    graph: &'a NavGraph,
    labels: Vec<usize>,
    largest: Option<usize>,
    area: Rect,
    d_c: f64,
}

impl Sampler<'_> {
    /// A free point on the largest component whose cell is not shared with
    /// and whose centroid keeps `d_c` from the points already chosen.
    fn draw(&self, taken: &[(Point, usize)], rng: &mut ChaCha8Rng) -> Option<(Point, usize)> {
        let a = self.area;
        let p = Point::new(rng.gen_range(a.min.x..a.max.x), rng.gen_range(a.min.y..a.max.y));
        if !self.world.in_bounds(p) || self.world.point_blocked(p) {
            return None;
        }
        let v = self.graph.locate(p)?;
        if Some(self.labels[v]) != self.largest {
            return None;
        }
        let c = self.graph.position(v);
        let d = self.d_c + 1e-9;
        let crowded = taken
            .iter()
            .any(|&(q, u)| u == v || q.dist(p) < d || q.dist(c) < d || p.dist(self.graph.position(u)) < d);
        (!crowded).then_some((p, v))
    }
}

/// Samples `n` points in `area` that are team-connected under both range-15
/// and line of sight. Every point is free, on the largest graph component and
/// at least `d_c` from the others; points also get distinct cells whose
/// centroids keep `d_c` from every other point, so no agent starts walled in
/// by a neighbor on its only edge.
pub fn sample_configuration(
    world: &WorldMap,
    graph: &NavGraph,
    area: Rect,
    n: usize,
    d_c: f64,
    mode: Sampling,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Point>> {
    let (labels, sizes) = graph.components();
    let largest = (0..sizes.len()).max_by_key(|&c| (sizes[c], usize::MAX - c));
    let sampler = Sampler {
        world,
        graph,
        labels,
        largest,
        area: area.intersection(&world.bounds()).unwrap_or(area),
        d_c,
    };
    let lcr = CommModel::lcr(15.0, world);
    let los = CommModel::los(world);
    let exhausted = Error::SamplingExhausted { attempts: MAX_ATTEMPTS };
    match mode {
        Sampling::Joint => {
            let mut taken: Vec<(Point, usize)> = Vec::with_capacity(n);
            for _ in 0..MAX_ATTEMPTS {
                taken.clear();
                for _ in 0..n {
                    // local rejections are cheap and do not count as attempts
                    let next = (0..MAX_ATTEMPTS).find_map(|_| sampler.draw(&taken, rng));
                    match next {
                        Some(x) => taken.push(x),
                        None => return Err(exhausted),
                    }
                }
                let pts: Vec<Point> = taken.iter().map(|x| x.0).collect();
                if tcomm(&pts, &lcr) && tcomm(&pts, &los) {
                    return Ok(pts);
                }
            }
            Err(exhausted)
        }
        Sampling::Sequential => {
            let mut taken: Vec<(Point, usize)> = Vec::with_capacity(n);
            for _ in 0..n {
                let next = (0..MAX_ATTEMPTS).find_map(|_| {
                    let (p, v) = sampler.draw(&taken, rng)?;
                    let reach = taken.is_empty()
                        || (taken.iter().any(|&(q, _)| acomm_static(p, q, &lcr))
                            && taken.iter().any(|&(q, _)| acomm_static(p, q, &los)));
                    reach.then_some((p, v))
                });
                taken.push(next.ok_or(Error::SamplingExhausted { attempts: MAX_ATTEMPTS })?);
            }
            Ok(taken.into_iter().map(|x| x.0).collect())
        }
    }
}

pub fn gen_instance_in(
    world: &WorldMap,
    graph: &NavGraph,
    regions: RegionSet,
    n: usize,
    seed: u64,
    d_c: f64,
    mode: Sampling,
) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts = sample_configuration(world, graph, regions.starts, n, d_c, mode, &mut rng)?;
    let goals = sample_configuration(world, graph, regions.goals, n, d_c, mode, &mut rng)?;
    let mut inst = Instance::new(world.clone(), starts, goals, CommKind::default());
    inst.d_c = d_c;
    inst.seed = seed;
    Ok(inst)
}

/// Instance with the family's default regions on the default 1 m graph.
pub fn gen_instance(world: &WorldMap, family: Family, n: usize, seed: u64, d_c: f64) -> Result<Instance> {
    let graph = NavGraph::from_world(world, 1.0, 0.25)?;
    let regions = default_regions(family, world.width(), Region::Strip, seed);
    gen_instance_in(world, &graph, regions, n, seed, d_c, Sampling::Sequential)
}
