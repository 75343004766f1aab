//! Seeded environment generators and instance sampling.

mod families;
mod instance;

pub use families::{maze_links, office_layout, rings_layout, OfficeLayout, OfficeParams, Ring, RingsLayout, MAZE_CELLS, RING_INNER_RADIUS, WAVE_COUNT};
pub use instance::{default_regions, gen_instance, gen_instance_in, sample_configuration, Region, RegionSet, Sampling, MAX_ATTEMPTS};

use crate::comm::UnionFind;
use crate::error::{Error, Result};
use crate::geom::Rect;
use crate::world::{Obstacle, WorldMap};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    RandomForest,
    Office,
    Waves,
    Rings,
    Maze,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::RandomForest, Family::Office, Family::Waves, Family::Rings, Family::Maze];

    pub fn label(&self) -> &'static str {
        match self {
            Family::RandomForest => "random-forest",
            Family::Office => "office",
            Family::Waves => "waves",
            Family::Rings => "rings",
            Family::Maze => "maze",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "random-forest" | "randomforest" | "forest" | "rf" => Ok(Family::RandomForest),
            "office" => Ok(Family::Office),
            "waves" => Ok(Family::Waves),
            "rings" => Ok(Family::Rings),
            "maze" => Ok(Family::Maze),
            other => Err(Error::InvalidConfig(format!("unknown family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Difficulty {
    #[default]
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub fn label(&self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
        }
    }
}

impl FromStr for Difficulty {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "easy" => Ok(Difficulty::Easy),
            "medium" => Ok(Difficulty::Medium),
            "hard" => Ok(Difficulty::Hard),
            other => Err(Error::InvalidConfig(format!("unknown difficulty `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvParams {
    pub family: Family,
    pub size: f64,
    /// Rings only.
    pub difficulty: Difficulty,
    pub seed: u64,
    #[serde(default)]
    pub office: OfficeParams,
}

impl EnvParams {
    pub fn new(family: Family, seed: u64) -> Self {
        EnvParams {
            family,
            size: 114.0,
            difficulty: Difficulty::Easy,
            seed,
            office: OfficeParams::default(),
        }
    }

    pub fn with_size(mut self, size: f64) -> Self {
        self.size = size;
        self
    }

    pub fn with_difficulty(mut self, d: Difficulty) -> Self {
        self.difficulty = d;
        self
    }

    pub fn name(&self) -> String {
        match self.family {
            Family::Rings => format!("rings-{}-{}", self.difficulty.label(), self.seed),
            f => format!("{}-{}", f.label(), self.seed),
        }
    }
}

pub fn gen_env(params: &EnvParams) -> Result<WorldMap> {
    if !(params.size > 0.0) {
        return Err(Error::InvalidConfig(format!("size must be positive, got {}", params.size)));
    }
    let rects = match params.family {
        Family::RandomForest => families::random_forest(params),
        Family::Office => families::office(params),
        Family::Waves => families::waves(params),
        Family::Rings => families::rings(params),
        Family::Maze => families::maze(params),
    };
    WorldMap::new(params.size, params.size, group_rects(rects), params.name())
}

/// Groups rectangles into obstacles: rectangles that touch end up together.
pub fn group_rects(rects: Vec<Rect>) -> Vec<Obstacle> {
    let n = rects.len();
    let mut uf = UnionFind::new(n);
    // sweep by min.x to avoid the all-pairs scan on large rasters
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| rects[a].min.x.total_cmp(&rects[b].min.x));
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if rects[j].min.x > rects[i].max.x + 1e-9 {
                break;
            }
            if rects[i].touches(&rects[j], 1e-9) {
                uf.union(i, j);
            }
        }
    }
    let mut groups: Vec<Vec<Rect>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = uf.find(i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(rects[i]);
    }
    groups.into_iter().map(|rects| Obstacle { rects }).collect()
}

/// Boolean occupancy raster with square cells.
#[derive(Debug, Clone)]
pub struct Raster {
    pub cell: f64,
    pub nx: usize,
    pub ny: usize,
    pub solid: Vec<bool>,
}

impl Raster {
    pub fn new(size_x: f64, size_y: f64, cell: f64) -> Self {
        let nx = (size_x / cell).round() as usize;
        let ny = (size_y / cell).round() as usize;
        Raster {
            cell,
            nx,
            ny,
            solid: vec![false; nx * ny],
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        self.solid[j * self.nx + i] = v;
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.solid[j * self.nx + i]
    }

    /// Sets every cell whose center lies in `r`.
    pub fn fill(&mut self, r: &Rect, v: bool) {
        let i0 = ((r.min.x / self.cell).round().max(0.0) as usize).min(self.nx);
        let i1 = ((r.max.x / self.cell).round().max(0.0) as usize).min(self.nx);
        let j0 = ((r.min.y / self.cell).round().max(0.0) as usize).min(self.ny);
        let j1 = ((r.max.y / self.cell).round().max(0.0) as usize).min(self.ny);
        for j in j0..j1 {
            for i in i0..i1 {
                self.set(i, j, v);
            }
        }
    }

    pub fn fill_where(&mut self, mut pred: impl FnMut(f64, f64) -> bool) {
        for j in 0..self.ny {
            for i in 0..self.nx {
                let (x, y) = ((i as f64 + 0.5) * self.cell, (j as f64 + 0.5) * self.cell);
                if pred(x, y) {
                    self.set(i, j, true);
                }
            }
        }
    }

    pub fn solid_area(&self) -> f64 {
        self.solid.iter().filter(|&&s| s).count() as f64 * self.cell * self.cell
    }

    /// Row runs merged vertically into maximal stacks of equal runs.
    pub fn to_rects(&self) -> Vec<Rect> {
        let mut out = Vec::new();
        // open stacks keyed by (i0, i1) -> start row
        let mut open: Vec<(usize, usize, usize)> = Vec::new();
        for j in 0..=self.ny {
            let mut runs = Vec::new();
            if j < self.ny {
                let mut i = 0;
                while i < self.nx {
                    if self.get(i, j) {
                        let s = i;
                        while i < self.nx && self.get(i, j) {
                            i += 1;
                        }
                        runs.push((s, i));
                    } else {
                        i += 1;
                    }
                }
            }
            let mut next_open = Vec::new();
            for &(a, b, j0) in &open {
                if runs.contains(&(a, b)) {
                    next_open.push((a, b, j0));
                } else {
                    out.push(Rect::new(
                        a as f64 * self.cell,
                        j0 as f64 * self.cell,
                        b as f64 * self.cell,
                        j as f64 * self.cell,
                    ));
                }
            }
            for &(a, b) in &runs {
                if !next_open.iter().any(|&(x, y, _)| x == a && y == b) {
                    next_open.push((a, b, j));
                }
            }
            open = next_open;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raster_rects_cover_exactly() {
        let mut r = Raster::new(4.0, 4.0, 0.5);
        r.fill(&Rect::new(0.5, 0.5, 2.0, 3.0), true);
        r.fill(&Rect::new(2.0, 1.0, 3.5, 1.5), true);
        let rects = r.to_rects();
        let area: f64 = rects.iter().map(Rect::area).sum();
        assert!((area - r.solid_area()).abs() < 1e-12);
        assert_eq!(group_rects(rects).len(), 1);
    }

    #[test]
    fn family_names_parse() {
        for f in Family::ALL {
            assert_eq!(f.label().parse::<Family>().unwrap(), f);
        }
    }
}
