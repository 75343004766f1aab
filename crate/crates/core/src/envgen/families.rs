use super::{Difficulty, EnvParams, Family, Raster};
use crate::comm::UnionFind;
use crate::geom::Rect;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

const RASTER: f64 = 0.5;

fn rng_for(params: &EnvParams) -> ChaCha8Rng {
    let tag = Family::ALL.iter().position(|f| *f == params.family).unwrap_or(0) as u64;
    ChaCha8Rng::seed_from_u64(params.seed ^ (tag << 56))
}

fn snap(x: f64) -> f64 {
    (x / RASTER).round() * RASTER
}

fn uniform_snapped(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let k = ((hi - lo) / RASTER).round() as i64;
    lo + rng.gen_range(0..=k) as f64 * RASTER
}

// ---------------------------------------------------------------- forest

pub(super) fn random_forest(params: &EnvParams) -> Vec<Rect> {
    let s = params.size;
    let mut rng = rng_for(params);
    let mut raster = Raster::new(s, s, RASTER);
    let total = s * s;
    let (lo, hi) = (0.10 * total, 0.11 * total);
    let mut tries = 0;
    while raster.solid_area() < lo && tries < 100_000 {
        tries += 1;
        let count = rng.gen_range(1..=4);
        let mut shape: Vec<Rect> = Vec::with_capacity(count);
        for k in 0..count {
            let w = uniform_snapped(&mut rng, 2.0, 8.0);
            let h = uniform_snapped(&mut rng, 2.0, 8.0);
            let (x0, y0) = if k == 0 {
                (uniform_snapped(&mut rng, 0.0, s - w), uniform_snapped(&mut rng, 0.0, s - h))
            } else {
                let prev: Rect = *shape.choose(&mut rng).unwrap();
                (
                    uniform_snapped(&mut rng, prev.min.x - w + RASTER, prev.max.x - RASTER),
                    uniform_snapped(&mut rng, prev.min.y - h + RASTER, prev.max.y - RASTER),
                )
            };
            let r = Rect::new(x0.max(0.0), y0.max(0.0), (x0 + w).min(s), (y0 + h).min(s));
            shape.push(r);
        }
        let mut next = raster.clone();
        for r in &shape {
            next.fill(r, true);
        }
        if next.solid_area() <= hi {
            raster = next;
        }
    }
    raster.to_rects()
}

// ---------------------------------------------------------------- office

/// Office layout knobs. Lengths in meters, ranges inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OfficeParams {
    pub room_width: f64,
    pub room_depth: (f64, f64),
    pub door_width: f64,
    pub wall: f64,
    pub hallway_width: (f64, f64),
    pub short_hallways: (usize, usize),
}

impl Default for OfficeParams {
    fn default() -> Self {
        OfficeParams {
            room_width: 7.0,
            room_depth: (9.0, 13.0),
            door_width: 2.0,
            wall: 1.0,
            hallway_width: (7.0, 9.0),
            short_hallways: (2, 3),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OfficeLayout {
    /// Long hallways as (y_lo, y_hi), bottom to top.
    pub long: Vec<(f64, f64)>,
    /// Short hallways as (x_lo, x_hi).
    pub short: Vec<(f64, f64)>,
    /// Free room interiors.
    pub rooms: Vec<Rect>,
    pub doors: Vec<Rect>,
}

pub fn office_layout(params: &EnvParams) -> OfficeLayout {
    let s = params.size;
    let o = params.office;
    let mut rng = rng_for(params);
    let long: Vec<(f64, f64)> = [s / 6.0, s / 2.0, 5.0 * s / 6.0]
        .iter()
        .map(|&c| {
            let w = uniform_snapped(&mut rng, o.hallway_width.0, o.hallway_width.1);
            (snap(c - w / 2.0), snap(c - w / 2.0) + w)
        })
        .collect();

    let k = rng.gen_range(o.short_hallways.0..=o.short_hallways.1.max(o.short_hallways.0));
    let sector = s / k as f64;
    let short = (0..k)
        .map(|i| {
            let w = uniform_snapped(&mut rng, o.hallway_width.0, o.hallway_width.1);
            let lo = i as f64 * sector + 2.0;
            let hi = (i + 1) as f64 * sector - w - 2.0;
            let x = if hi > lo { uniform_snapped(&mut rng, snap(lo), snap(hi)) } else { snap(lo) };
            (x, x + w)
        })
        .collect();

    // each hallway side gets a row of rooms, bounded by the midline to the
    // neighboring hallway or by the map edge
    let mut rooms = Vec::new();
    let mut doors = Vec::new();
    let count = (s / o.room_width).floor() as usize;
    let x_off = snap((s - count as f64 * o.room_width) / 2.0);
    for (h, &(y_lo, y_hi)) in long.iter().enumerate() {
        let below_limit = if h == 0 { 0.0 } else { (long[h - 1].1 + y_lo) / 2.0 + o.wall / 2.0 };
        let above_limit = if h + 1 == long.len() { s } else { (y_hi + long[h + 1].0) / 2.0 - o.wall / 2.0 };
        for r in 0..count {
            let xa = x_off + r as f64 * o.room_width;
            let (ix0, ix1) = (xa + o.wall / 2.0, xa + o.room_width - o.wall / 2.0);
            let xc = xa + o.room_width / 2.0;
            for side in [-1.0, 1.0] {
                let depth = uniform_snapped(&mut rng, o.room_depth.0, o.room_depth.1);
                let (edge, limit) = if side < 0.0 { (y_lo, below_limit) } else { (y_hi, above_limit) };
                let (a, b) = if side < 0.0 {
                    ((edge - depth).max(limit), edge - o.wall)
                } else {
                    (edge + o.wall, (edge + depth).min(limit))
                };
                if b - a < 2.0 {
                    continue;
                }
                rooms.push(Rect::new(ix0, a, ix1, b));
                let (d0, d1) = if side < 0.0 { (edge - o.wall, edge) } else { (edge, edge + o.wall) };
                doors.push(Rect::new(xc - o.door_width / 2.0, d0, xc + o.door_width / 2.0, d1));
            }
        }
    }
    OfficeLayout { long, short, rooms, doors }
}

pub(super) fn office(params: &EnvParams) -> Vec<Rect> {
    let s = params.size;
    let layout = office_layout(params);
    let mut raster = Raster::new(s, s, RASTER);
    raster.fill(&Rect::new(0.0, 0.0, s, s), true);
    for &(a, b) in &layout.long {
        raster.fill(&Rect::new(0.0, a, s, b), false);
    }
    for r in layout.rooms.iter().chain(&layout.doors) {
        raster.fill(r, false);
    }
    let (y0, y1) = (layout.long[0].0, layout.long[layout.long.len() - 1].1);
    for &(a, b) in &layout.short {
        raster.fill(&Rect::new(a, y0, b, y1), false);
    }
    raster.to_rects()
}

// ---------------------------------------------------------------- waves

pub const WAVE_COUNT: usize = 10;
pub const WAVE_THICKNESS: f64 = 2.0;
pub const WAVE_GAPS: usize = 2;

pub(super) fn waves(params: &EnvParams) -> Vec<Rect> {
    let s = params.size;
    let mut rng = rng_for(params);
    let spacing = s / WAVE_COUNT as f64;
    let mut raster = Raster::new(s, s, RASTER);
    for k in 0..WAVE_COUNT {
        let base = (k as f64 + 0.5) * spacing;
        let amp = 2.0;
        let wavelength = rng.gen_range(20.0..40.0);
        let phase = rng.gen_range(0.0..TAU);
        // one gap per equal horizontal sector keeps gaps apart
        let gaps: Vec<(f64, f64)> = (0..WAVE_GAPS)
            .map(|g| {
                let w = rng.gen_range(4.0..=8.0);
                let sec = s / WAVE_GAPS as f64;
                let x = rng.gen_range(g as f64 * sec..(g + 1) as f64 * sec - w);
                (x, x + w)
            })
            .collect();
        raster.fill_where(|x, y| {
            let c = base + amp * (TAU * x / wavelength + phase).sin();
            (y - c).abs() <= WAVE_THICKNESS / 2.0 && !gaps.iter().any(|&(a, b)| x >= a && x <= b)
        });
    }
    raster.to_rects()
}

// ---------------------------------------------------------------- rings

#[derive(Debug, Clone, Serialize)]
pub struct Ring {
    pub radius: f64,
    /// (center angle, width in meters at `radius`).
    pub breaks: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RingsLayout {
    pub center: (f64, f64),
    pub thickness: f64,
    pub separation: f64,
    pub rings: Vec<Ring>,
}

impl RingsLayout {
    /// True if the point lies on ring material.
    pub fn solid_at(&self, x: f64, y: f64) -> bool {
        let (dx, dy) = (x - self.center.0, y - self.center.1);
        let r = dx.hypot(dy);
        let theta = dy.atan2(dx);
        self.rings.iter().any(|ring| {
            (r - ring.radius).abs() <= self.thickness / 2.0
                && !ring.breaks.iter().any(|&(c, w)| {
                    let d = (theta - c + TAU / 2.0).rem_euclid(TAU) - TAU / 2.0;
                    d.abs() * ring.radius <= w / 2.0
                })
        })
    }
}

pub const RING_INNER_RADIUS: f64 = 10.0;

fn rings_tier(d: Difficulty) -> ((usize, usize), f64, (usize, usize)) {
    match d {
        Difficulty::Easy => ((4, 5), 8.0, (6, 7)),
        Difficulty::Medium => ((5, 5), 7.0, (5, 6)),
        Difficulty::Hard => ((6, 6), 5.5, (4, 5)),
    }
}

pub fn rings_layout(params: &EnvParams) -> RingsLayout {
    let mut rng = rng_for(params);
    let ((c0, c1), sep, (b0, b1)) = rings_tier(params.difficulty);
    let count = rng.gen_range(c0..=c1);
    let rings = (0..count)
        .map(|k| {
            let radius = RING_INNER_RADIUS + k as f64 * sep;
            let nb = rng.gen_range(b0..=b1);
            let sector = TAU / nb as f64;
            let rot = rng.gen_range(0.0..sector);
            let breaks = (0..nb)
                .map(|i| {
                    let w = rng.gen_range(6.0..=8.0);
                    let half = (w / 2.0) / radius;
                    let slack = (sector / 2.0 - half).max(0.0);
                    let c = rot + (i as f64 + 0.5) * sector + rng.gen_range(-slack..=slack) * 0.8;
                    (c.rem_euclid(TAU), w)
                })
                .collect();
            Ring { radius, breaks }
        })
        .collect();
    RingsLayout {
        center: (params.size / 2.0, params.size / 2.0),
        thickness: 1.0,
        separation: sep,
        rings,
    }
}

pub(super) fn rings(params: &EnvParams) -> Vec<Rect> {
    let layout = rings_layout(params);
    let mut raster = Raster::new(params.size, params.size, RASTER);
    raster.fill_where(|x, y| layout.solid_at(x, y));
    raster.to_rects()
}

// ---------------------------------------------------------------- maze

pub const MAZE_CELLS: usize = 14;
const MAZE_WALL: f64 = 1.0;

/// Kruskal spanning tree over the 14x14 cell grid. Each link joins cell
/// `a` and `b`, cells indexed `row * 14 + col`.
pub fn maze_links(seed: u64) -> Vec<(usize, usize)> {
    let n = MAZE_CELLS;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (4u64 << 56));
    let mut edges = Vec::new();
    for r in 0..n {
        for c in 0..n {
            if c + 1 < n {
                edges.push((r * n + c, r * n + c + 1));
            }
            if r + 1 < n {
                edges.push((r * n + c, (r + 1) * n + c));
            }
        }
    }
    edges.shuffle(&mut rng);
    let mut uf = UnionFind::new(n * n);
    edges.into_iter().filter(|&(a, b)| uf.union(a, b)).collect()
}

pub(super) fn maze(params: &EnvParams) -> Vec<Rect> {
    let n = MAZE_CELLS;
    let s = params.size;
    let p = s / n as f64;
    let links = maze_links(params.seed);
    let linked = |a: usize, b: usize| links.iter().any(|&(x, y)| (x, y) == (a.min(b), a.max(b)));
    let h = MAZE_WALL / 2.0;
    let mut out = Vec::new();
    for r in 0..n {
        for c in 0..n {
            let id = r * n + c;
            // wall to the right, dropped inside the top and bottom rows
            if c + 1 < n && r != 0 && r != n - 1 && !linked(id, id + 1) {
                let x = (c + 1) as f64 * p;
                out.push(Rect::new(x - h, (r as f64 * p - h).max(0.0), x + h, ((r + 1) as f64 * p + h).min(s)));
            }
            if r + 1 < n && !linked(id, id + n) {
                let y = (r + 1) as f64 * p;
                out.push(Rect::new((c as f64 * p - h).max(0.0), y - h, ((c + 1) as f64 * p + h).min(s), y + h));
            }
        }
    }
    out
}
