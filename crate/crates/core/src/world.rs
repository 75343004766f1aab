//! Continuous 2D worlds, their obstacle-aware subdivision and the navigation
//! graph that agents move on.
//!
//! Obstacles are unions of axis-aligned rectangles. The world is cut into a
//! regular grid; cells that overlap an obstacle are halved along their longest
//! side until they are clear or reach the minimum size, at which point the
//! fragment is discarded. Every kept cell becomes a graph vertex at its
//! centroid, and cells that share an edge or a corner are connected.

use crate::error::{Error, Result};
use crate::geom::{Point, Rect};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

const BUCKET_SIZE: f64 = 4.0;
const TOUCH_EPS: f64 = 1e-9;

/// One obstacle: a rectilinear union of rectangles.
#[derive(Debug, Clone, PartialEq)]
pub struct Obstacle {
    pub rects: Vec<Rect>,
}

/// On-disk map layout: `obstacles` holds one `[x, y, w, h]` list per obstacle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapFile {
    pub width: f64,
    pub height: f64,
    pub obstacles: Vec<Vec<[f64; 4]>>,
    pub name: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "MapFile", into = "MapFile")]
pub struct WorldMap {
    width: f64,
    height: f64,
    obstacles: Vec<Obstacle>,
    name: String,
    index: ObstacleIndex,
}

impl WorldMap {
    pub fn new(width: f64, height: f64, obstacles: Vec<Obstacle>, name: impl Into<String>) -> Result<Self> {
        if !(width > 0.0 && height > 0.0) || !width.is_finite() || !height.is_finite() {
            return Err(Error::InvalidMap(format!("bad extent {width} x {height}")));
        }
        let bounds = Rect::new(0.0, 0.0, width, height);
        for (i, o) in obstacles.iter().enumerate() {
            for r in &o.rects {
                if !(r.width() > 0.0 && r.height() > 0.0) {
                    return Err(Error::InvalidMap(format!("obstacle {i} has an empty rectangle")));
                }
                if !bounds.contains(r.min, 1e-9) || !bounds.contains(r.max, 1e-9) {
                    return Err(Error::InvalidMap(format!("obstacle {i} leaves the world bounds")));
                }
            }
        }
        let index = ObstacleIndex::build(width, height, &obstacles);
        Ok(WorldMap {
            width,
            height,
            obstacles,
            name: name.into(),
            index,
        })
    }

    pub fn empty(width: f64, height: f64, name: impl Into<String>) -> Result<Self> {
        WorldMap::new(width, height, Vec::new(), name)
    }

    /// Convenience constructor: each rectangle becomes its own obstacle.
    pub fn from_rects(width: f64, height: f64, rects: &[Rect], name: impl Into<String>) -> Result<Self> {
        let obstacles = rects.iter().map(|r| Obstacle { rects: vec![*r] }).collect();
        WorldMap::new(width, height, obstacles, name)
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn obstacles(&self) -> &[Obstacle] {
        &self.obstacles
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(0.0, 0.0, self.width, self.height)
    }

    pub fn obstacle_rects(&self) -> impl Iterator<Item = &Rect> {
        self.obstacles.iter().flat_map(|o| o.rects.iter())
    }

    pub fn in_bounds(&self, p: Point) -> bool {
        self.bounds().contains(p, 1e-9)
    }

    /// True if `p` lies strictly inside some obstacle rectangle.
    pub fn point_blocked(&self, p: Point) -> bool {
        self.index.point_blocked(p)
    }

    /// True if the rectangle overlaps the interior of some obstacle.
    pub fn rect_blocked(&self, r: &Rect) -> bool {
        self.index.rect_blocked(r)
    }

    /// True iff the open segment `(p, q)` crosses the interior of an obstacle.
    pub fn segment_blocked(&self, p: Point, q: Point) -> bool {
        segment_blocked(p, q, self)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

impl TryFrom<MapFile> for WorldMap {
    type Error = Error;
    fn try_from(f: MapFile) -> Result<Self> {
        let obstacles = f
            .obstacles
            .iter()
            .map(|o| Obstacle {
                rects: o.iter().map(|r| Rect::from_xywh(r[0], r[1], r[2], r[3])).collect(),
            })
            .collect();
        WorldMap::new(f.width, f.height, obstacles, f.name)
    }
}

impl From<WorldMap> for MapFile {
    fn from(w: WorldMap) -> Self {
        MapFile {
            width: w.width,
            height: w.height,
            obstacles: w
                .obstacles
                .iter()
                .map(|o| o.rects.iter().map(|r| r.to_xywh()).collect())
                .collect(),
            name: w.name,
        }
    }
}

/// Uniform bucket grid over obstacle rectangles.
#[derive(Debug, Clone)]
struct ObstacleIndex {
    rects: Vec<Rect>,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl ObstacleIndex {
    fn build(width: f64, height: f64, obstacles: &[Obstacle]) -> Self {
        let nx = ((width / BUCKET_SIZE).ceil() as usize).max(1);
        let ny = ((height / BUCKET_SIZE).ceil() as usize).max(1);
        let rects: Vec<Rect> = obstacles.iter().flat_map(|o| o.rects.iter().copied()).collect();
        let mut idx = ObstacleIndex {
            rects,
            nx,
            ny,
            buckets: vec![Vec::new(); nx * ny],
        };
        for (i, r) in idx.rects.iter().enumerate() {
            let (x0, y0) = idx.bucket_of(r.min);
            let (x1, y1) = idx.bucket_of(r.max);
            for by in y0..=y1 {
                for bx in x0..=x1 {
                    idx.buckets[by * nx + bx].push(i as u32);
                }
            }
        }
        idx
    }

    fn bucket_of(&self, p: Point) -> (usize, usize) {
        let bx = ((p.x / BUCKET_SIZE).floor().max(0.0) as usize).min(self.nx - 1);
        let by = ((p.y / BUCKET_SIZE).floor().max(0.0) as usize).min(self.ny - 1);
        (bx, by)
    }

    fn point_blocked(&self, p: Point) -> bool {
        let (bx, by) = self.bucket_of(p);
        self.buckets[by * self.nx + bx]
            .iter()
            .any(|&i| self.rects[i as usize].interior_contains(p))
    }

    fn rect_blocked(&self, r: &Rect) -> bool {
        let (x0, y0) = self.bucket_of(r.min);
        let (x1, y1) = self.bucket_of(r.max);
        for by in y0..=y1 {
            for bx in x0..=x1 {
                if self.buckets[by * self.nx + bx]
                    .iter()
                    .any(|&i| self.rects[i as usize].overlaps_interior(r))
                {
                    return true;
                }
            }
        }
        false
    }

    /// Walks the buckets crossed by segment `(p, q)`; stops early once `hit`
    /// returns true.
    fn segment_blocked(&self, p: Point, q: Point) -> bool {
        if self.rects.is_empty() {
            return false;
        }
        let test = |b: usize| {
            self.buckets[b]
                .iter()
                .any(|&i| self.rects[i as usize].segment_hits_interior(p, q))
        };
        let (mut ix, mut iy) = self.bucket_of(p);
        let (ex, ey) = self.bucket_of(q);
        if ix == ex && iy == ey {
            return test(iy * self.nx + ix);
        }
        let d = q - p;
        let step_x: i64 = if d.x > 0.0 { 1 } else if d.x < 0.0 { -1 } else { 0 };
        let step_y: i64 = if d.y > 0.0 { 1 } else if d.y < 0.0 { -1 } else { 0 };
        let next_boundary = |i: usize, step: i64| -> f64 {
            if step > 0 {
                (i + 1) as f64 * BUCKET_SIZE
            } else {
                i as f64 * BUCKET_SIZE
            }
        };
        let mut t_max_x = if step_x != 0 { (next_boundary(ix, step_x) - p.x) / d.x } else { f64::INFINITY };
        let mut t_max_y = if step_y != 0 { (next_boundary(iy, step_y) - p.y) / d.y } else { f64::INFINITY };
        let t_dx = if step_x != 0 { BUCKET_SIZE / d.x.abs() } else { f64::INFINITY };
        let t_dy = if step_y != 0 { BUCKET_SIZE / d.y.abs() } else { f64::INFINITY };
        let guard = self.nx + self.ny + 4;
        for _ in 0..guard {
            if test(iy * self.nx + ix) {
                return true;
            }
            if ix == ex && iy == ey {
                return false;
            }
            if t_max_x < t_max_y {
                if t_max_x > 1.0 {
                    break;
                }
                let nx = ix as i64 + step_x;
                if nx < 0 || nx as usize >= self.nx {
                    break;
                }
                ix = nx as usize;
                t_max_x += t_dx;
            } else {
                if t_max_y > 1.0 {
                    break;
                }
                let ny = iy as i64 + step_y;
                if ny < 0 || ny as usize >= self.ny {
                    break;
                }
                iy = ny as usize;
                t_max_y += t_dy;
            }
        }
        // rounding pushed the walk off its track: visit the end bucket too
        test(ey * self.nx + ex)
    }
}

/// Exact test of the open segment `(p, q)` against every obstacle interior.
pub fn segment_blocked(p: Point, q: Point, world: &WorldMap) -> bool {
    if p == q {
        return false;
    }
    world.index.segment_blocked(p, q)
}

/// Obstacle-free cells of a world.
#[derive(Debug, Clone)]
pub struct SubDivision {
    pub cells: Vec<Rect>,
    /// Fragments that still overlapped an obstacle at the minimum size.
    pub discarded: Vec<Rect>,
    /// Base grid cell each kept cell was cut from.
    base_of: Vec<usize>,
    pub resolution: f64,
    pub min_cell_size: f64,
    nx: usize,
    ny: usize,
}

impl SubDivision {
    pub fn kept_area(&self) -> f64 {
        self.cells.iter().map(Rect::area).sum()
    }

    pub fn discarded_area(&self) -> f64 {
        self.discarded.iter().map(Rect::area).sum()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

pub fn subdivide(world: &WorldMap, resolution: f64, min_cell_size: f64) -> Result<SubDivision> {
    if !(resolution > min_cell_size && min_cell_size > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "need resolution > min_cell_size > 0, got {resolution} and {min_cell_size}"
        )));
    }
    let nx = ((world.width / resolution - 1e-9).ceil() as usize).max(1);
    let ny = ((world.height / resolution - 1e-9).ceil() as usize).max(1);
    let mut sub = SubDivision {
        cells: Vec::new(),
        discarded: Vec::new(),
        base_of: Vec::new(),
        resolution,
        min_cell_size,
        nx,
        ny,
    };
    let mut stack = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let base = j * nx + i;
            let x0 = i as f64 * resolution;
            let y0 = j as f64 * resolution;
            let x1 = ((i + 1) as f64 * resolution).min(world.width);
            let y1 = ((j + 1) as f64 * resolution).min(world.height);
            stack.push(Rect::new(x0, y0, x1, y1));
            while let Some(cell) = stack.pop() {
                if !world.rect_blocked(&cell) {
                    sub.cells.push(cell);
                    sub.base_of.push(base);
                    continue;
                }
                let (w, h) = (cell.width(), cell.height());
                if w.max(h) <= min_cell_size + 1e-12 {
                    sub.discarded.push(cell);
                    continue;
                }
                // push the second half first so the lower/left half is emitted first
                if w >= h {
                    let mid = cell.min.x + 0.5 * w;
                    stack.push(Rect::new(mid, cell.min.y, cell.max.x, cell.max.y));
                    stack.push(Rect::new(cell.min.x, cell.min.y, mid, cell.max.y));
                } else {
                    let mid = cell.min.y + 0.5 * h;
                    stack.push(Rect::new(cell.min.x, mid, cell.max.x, cell.max.y));
                    stack.push(Rect::new(cell.min.x, cell.min.y, cell.max.x, mid));
                }
            }
        }
    }
    Ok(sub)
}

/// Navigation graph over subdivision centroids, in compressed adjacency form.
#[derive(Debug, Clone)]
pub struct NavGraph {
    positions: Vec<Point>,
    cells: Vec<Rect>,
    offsets: Vec<u32>,
    adjacency: Vec<(u32, f64)>,
    resolution: f64,
    nx: usize,
    ny: usize,
    by_base: Vec<Vec<u32>>,
}

pub fn build_graph(sub: &SubDivision) -> NavGraph {
    let mut by_base: Vec<Vec<u32>> = vec![Vec::new(); sub.nx * sub.ny];
    for (c, &b) in sub.base_of.iter().enumerate() {
        by_base[b].push(c as u32);
    }
    let n = sub.cells.len();
    let mut lists: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    let centers: Vec<Point> = sub.cells.iter().map(Rect::center).collect();
    for c in 0..n {
        let b = sub.base_of[c];
        let (bi, bj) = (b % sub.nx, b / sub.nx);
        for dj in -1i64..=1 {
            for di in -1i64..=1 {
                let (ni, nj) = (bi as i64 + di, bj as i64 + dj);
                if ni < 0 || nj < 0 || ni as usize >= sub.nx || nj as usize >= sub.ny {
                    continue;
                }
                for &o in &by_base[nj as usize * sub.nx + ni as usize] {
                    let o = o as usize;
                    if o <= c {
                        continue;
                    }
                    if sub.cells[c].touches(&sub.cells[o], TOUCH_EPS) {
                        let w = centers[c].dist(centers[o]);
                        lists[c].push((o as u32, w));
                        lists[o].push((c as u32, w));
                    }
                }
            }
        }
    }
    let mut offsets = Vec::with_capacity(n + 1);
    let mut adjacency = Vec::new();
    offsets.push(0);
    for mut l in lists {
        l.sort_by_key(|e| e.0);
        adjacency.extend(l);
        offsets.push(adjacency.len() as u32);
    }
    NavGraph {
        positions: centers,
        cells: sub.cells.clone(),
        offsets,
        adjacency,
        resolution: sub.resolution,
        nx: sub.nx,
        ny: sub.ny,
        by_base,
    }
}

impl NavGraph {
    /// Subdivides `world` and builds its graph in one go.
    pub fn from_world(world: &WorldMap, resolution: f64, min_cell_size: f64) -> Result<Self> {
        Ok(build_graph(&subdivide(world, resolution, min_cell_size)?))
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn position(&self, v: usize) -> Point {
        self.positions[v]
    }

    pub fn cell(&self, v: usize) -> &Rect {
        &self.cells[v]
    }

    pub fn neighbors(&self, v: usize) -> &[(u32, f64)] {
        &self.adjacency[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.adjacency.len() / 2
    }

    pub fn max_edge_length(&self) -> f64 {
        self.adjacency.iter().map(|e| e.1).fold(0.0, f64::max)
    }

    fn base_coords(&self, p: Point) -> (i64, i64) {
        (
            (p.x / self.resolution).floor() as i64,
            (p.y / self.resolution).floor() as i64,
        )
    }

    /// Vertex whose cell contains `p` (closed containment). The cell of the
    /// base square `p` falls into is preferred, so the answer is deterministic
    /// for points on shared boundaries.
    pub fn locate(&self, p: Point) -> Option<usize> {
        let (bi, bj) = self.base_coords(p);
        let order = [(0, 0), (-1, 0), (0, -1), (-1, -1), (1, 0), (0, 1), (1, 1), (1, -1), (-1, 1)];
        for (di, dj) in order {
            let (i, j) = (bi + di, bj + dj);
            if i < 0 || j < 0 || i as usize >= self.nx || j as usize >= self.ny {
                continue;
            }
            for &c in &self.by_base[j as usize * self.nx + i as usize] {
                if self.cells[c as usize].contains(p, TOUCH_EPS) {
                    return Some(c as usize);
                }
            }
        }
        None
    }

    /// Like [`locate`](Self::locate), but falls back to the nearest vertex
    /// within `radius` whose centroid is in line of sight. Used for path ends
    /// that were cut mid-edge.
    pub fn locate_near(&self, p: Point, radius: f64, world: &WorldMap) -> Option<usize> {
        if let Some(v) = self.locate(p) {
            return Some(v);
        }
        let (bi, bj) = self.base_coords(p);
        let reach = (radius / self.resolution).ceil() as i64 + 1;
        let mut best: Option<(f64, usize)> = None;
        for j in (bj - reach)..=(bj + reach) {
            for i in (bi - reach)..=(bi + reach) {
                if i < 0 || j < 0 || i as usize >= self.nx || j as usize >= self.ny {
                    continue;
                }
                for &c in &self.by_base[j as usize * self.nx + i as usize] {
                    let c = c as usize;
                    let d = self.positions[c].dist(p);
                    if d <= radius
                        && best.map_or(true, |(bd, _)| d < bd)
                        && !world.segment_blocked(p, self.positions[c])
                    {
                        best = Some((d, c));
                    }
                }
            }
        }
        best.map(|b| b.1)
    }

    /// Size of each connected component, indexed by a component label per vertex.
    pub fn components(&self) -> (Vec<usize>, Vec<usize>) {
        let mut label = vec![usize::MAX; self.len()];
        let mut sizes = Vec::new();
        let mut stack = Vec::new();
        for s in 0..self.len() {
            if label[s] != usize::MAX {
                continue;
            }
            let id = sizes.len();
            let mut size = 0;
            label[s] = id;
            stack.push(s);
            while let Some(v) = stack.pop() {
                size += 1;
                for &(u, _) in self.neighbors(v) {
                    if label[u as usize] == usize::MAX {
                        label[u as usize] = id;
                        stack.push(u as usize);
                    }
                }
            }
            sizes.push(size);
        }
        (label, sizes)
    }
}

/// A vertex injected on top of a base graph.
#[derive(Debug, Clone)]
pub struct Injected {
    pub position: Point,
    pub anchor: usize,
    /// Outgoing edges beyond the anchor.
    pub exits: Vec<(usize, f64)>,
}

/// Base graph plus continuous points wired to the centroid of their cell.
/// The base graph is borrowed and never modified; injected vertex ids follow
/// the base ids.
#[derive(Debug, Clone)]
pub struct AugmentedGraph<'g> {
    base: &'g NavGraph,
    injected: Vec<Injected>,
    by_anchor: HashMap<usize, Vec<usize>>,
}

impl<'g> AugmentedGraph<'g> {
    pub fn new(base: &'g NavGraph) -> Self {
        AugmentedGraph {
            base,
            injected: Vec::new(),
            by_anchor: HashMap::new(),
        }
    }

    pub fn base(&self) -> &'g NavGraph {
        self.base
    }

    pub fn len(&self) -> usize {
        self.base.len() + self.injected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_injected(&self, v: usize) -> bool {
        v >= self.base.len()
    }

    pub fn injected(&self, v: usize) -> Option<&Injected> {
        v.checked_sub(self.base.len()).and_then(|i| self.injected.get(i))
    }

    pub fn injected_ids(&self) -> std::ops::Range<usize> {
        self.base.len()..self.len()
    }

    pub fn position(&self, v: usize) -> Point {
        match self.injected(v) {
            Some(inj) => inj.position,
            None => self.base.position(v),
        }
    }

    /// Injects `p` wired to `anchor`; returns the new vertex id.
    pub fn inject_at(&mut self, p: Point, anchor: usize) -> usize {
        let id = self.len();
        self.injected.push(Injected {
            position: p,
            anchor,
            exits: Vec::new(),
        });
        self.by_anchor.entry(anchor).or_default().push(id);
        id
    }

    /// Like [`inject_at`](Self::inject_at), with extra outgoing edges to the
    /// anchor's neighbors in line of sight. A point left mid-edge can then
    /// leave in any direction instead of only through its anchor.
    pub fn inject_with_exits(&mut self, p: Point, anchor: usize, world: &WorldMap) -> usize {
        let id = self.inject_at(p, anchor);
        let exits = self
            .base
            .neighbors(anchor)
            .iter()
            .map(|&(u, _)| u as usize)
            .filter(|&u| !world.segment_blocked(p, self.base.position(u)))
            .map(|u| (u, p.dist(self.base.position(u))))
            .collect();
        self.injected.last_mut().unwrap().exits = exits;
        id
    }

    /// Injects `p` into the cell containing it.
    pub fn inject(&mut self, p: Point) -> Result<usize> {
        let anchor = self.base.locate(p).ok_or(Error::PointBlocked { x: p.x, y: p.y })?;
        Ok(self.inject_at(p, anchor))
    }

    /// Appends the neighbors of `v` with edge lengths to `out` (cleared first).
    pub fn neighbors_into(&self, v: usize, out: &mut Vec<(usize, f64)>) {
        out.clear();
        if let Some(inj) = self.injected(v) {
            out.push((inj.anchor, inj.position.dist(self.base.position(inj.anchor))));
            out.extend_from_slice(&inj.exits);
            return;
        }
        out.extend(self.base.neighbors(v).iter().map(|&(u, w)| (u as usize, w)));
        if let Some(extra) = self.by_anchor.get(&v) {
            let pv = self.base.position(v);
            out.extend(extra.iter().map(|&id| (id, self.position(id).dist(pv))));
        }
    }
}

/// Returns a graph augmented with one injected vertex per point, each wired
/// to the centroid of its containing cell.
pub fn add_nodes<'g>(graph: &'g NavGraph, points: &[Point]) -> Result<AugmentedGraph<'g>> {
    let mut g = AugmentedGraph::new(graph);
    for &p in points {
        g.inject(p)?;
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(w: f64, h: f64) -> NavGraph {
        NavGraph::from_world(&WorldMap::empty(w, h, "t").unwrap(), 1.0, 0.25).unwrap()
    }

    #[test]
    fn two_by_two_centers() {
        let sub = subdivide(&WorldMap::empty(2.0, 2.0, "t").unwrap(), 1.0, 0.25).unwrap();
        let mut c: Vec<(f64, f64)> = sub.cells.iter().map(|r| (r.center().x, r.center().y)).collect();
        c.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(c, vec![(0.5, 0.5), (0.5, 1.5), (1.5, 0.5), (1.5, 1.5)]);
    }

    #[test]
    fn center_of_three_by_three_has_degree_eight() {
        let g = grid(3.0, 3.0);
        let center = g.locate(Point::new(1.5, 1.5)).unwrap();
        assert_eq!(g.neighbors(center).len(), 8);
        assert_eq!(g.edge_count(), 20);
    }

    #[test]
    fn full_scale_grid_counts() {
        let sub = subdivide(&WorldMap::empty(114.0, 114.0, "t").unwrap(), 1.0, 0.25).unwrap();
        assert_eq!(sub.len(), 12_996);
        let g = build_graph(&sub);
        // 2*113*114 straight + 2*113*113 diagonal
        assert_eq!(g.edge_count(), 51_302);
    }

    #[test]
    fn corner_sharing_cells_get_one_edge() {
        // blocks (1,0)-(2,1) and (0,1)-(1,2), leaving two cells meeting at (1,1)
        let w = WorldMap::from_rects(
            2.0,
            2.0,
            &[Rect::new(1.0, 0.0, 2.0, 1.0), Rect::new(0.0, 1.0, 1.0, 2.0)],
            "t",
        )
        .unwrap();
        let g = NavGraph::from_world(&w, 1.0, 0.25).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.edge_count(), 1);
        let (_, len) = g.neighbors(0)[0];
        assert!((len - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn injected_points() {
        let g = grid(2.0, 2.0);
        let mut a = add_nodes(&g, &[Point::new(0.5, 0.5), Point::new(0.7, 0.5)]).unwrap();
        let mut out = Vec::new();
        let base_n = g.len();
        a.neighbors_into(base_n, &mut out);
        assert_eq!(out.len(), 1);
        assert!(out[0].1.abs() < 1e-12);
        a.neighbors_into(base_n + 1, &mut out);
        assert!((out[0].1 - 0.2).abs() < 1e-12);
        // the anchor sees both injected vertices
        a.neighbors_into(out[0].0, &mut out);
        assert_eq!(out.iter().filter(|e| e.0 >= base_n).count(), 2);
        assert_eq!(g.len(), base_n);
        assert!(a.inject(Point::new(5.0, 5.0)).is_err());
    }

    #[test]
    fn goal_inside_obstacle_is_rejected() {
        let w = WorldMap::from_rects(4.0, 4.0, &[Rect::new(1.0, 1.0, 3.0, 3.0)], "t").unwrap();
        let g = NavGraph::from_world(&w, 1.0, 0.25).unwrap();
        assert!(matches!(
            add_nodes(&g, &[Point::new(2.0, 2.0)]),
            Err(Error::PointBlocked { .. })
        ));
    }

    #[test]
    fn degenerate_segment_not_blocked() {
        let w = WorldMap::from_rects(4.0, 4.0, &[Rect::new(1.0, 1.0, 3.0, 3.0)], "t").unwrap();
        let p = Point::new(2.0, 2.0);
        assert!(!segment_blocked(p, p, &w));
        assert!(segment_blocked(Point::new(0.5, 2.0), Point::new(3.5, 2.0), &w));
        assert!(!segment_blocked(Point::new(0.5, 0.5), Point::new(3.5, 0.5), &w));
    }

    #[test]
    fn map_json_round_trip() {
        let w = WorldMap::from_rects(10.0, 8.0, &[Rect::from_xywh(1.0, 2.0, 3.0, 1.5)], "m").unwrap();
        let s = w.to_json().unwrap();
        let back: WorldMap = serde_json::from_str(&s).unwrap();
        assert_eq!(back.obstacles(), w.obstacles());
        assert_eq!(back.name(), "m");
        let bad = r#"{"width": 2, "height": 2, "obstacles": [[[1, 1, 5, 5]]], "name": "x"}"#;
        assert!(serde_json::from_str::<WorldMap>(bad).is_err());
    }
}
