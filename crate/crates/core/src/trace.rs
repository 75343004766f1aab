//! SVG rendering and time-sampled JSON traces of a solution.

use crate::comm::{acomm_static, CommModel};
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::problem::{Instance, Solution};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub const TRACE_DT: f64 = 0.1;
pub const DEFAULT_SNAPSHOTS: usize = 5;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceFrame {
    pub t: f64,
    pub positions: Vec<Point>,
    /// Pairs `(i, j)`, `i < j`, in communication at `t`.
    pub links: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trace {
    pub dt: f64,
    pub makespan: f64,
    pub reached: Vec<bool>,
    pub frames: Vec<TraceFrame>,
}

fn makespan(sol: &Solution) -> f64 {
    sol.paths.iter().map(|p| p.end_time()).fold(0.0, f64::max)
}

fn links(instance: &Instance, positions: &[Point]) -> Vec<(usize, usize)> {
    let model = CommModel::new(instance.comm, &instance.world);
    let mut out = Vec::new();
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            if acomm_static(positions[i], positions[j], &model) {
                out.push((i, j));
            }
        }
    }
    out
}

fn reached(instance: &Instance, sol: &Solution) -> Vec<bool> {
    sol.paths
        .iter()
        .zip(&instance.goals)
        .map(|(p, g)| p.end_pos().dist(*g) <= 1e-6)
        .collect()
}

fn check(instance: &Instance, sol: &Solution) -> Result<()> {
    if instance.n() != sol.paths.len() {
        return Err(Error::MismatchedInstance {
            instance: instance.n(),
            solution: sol.paths.len(),
        });
    }
    Ok(())
}

pub fn sample_trace(instance: &Instance, sol: &Solution, dt: f64) -> Result<Trace> {
    check(instance, sol)?;
    if !(dt > 0.0) {
        return Err(Error::InvalidConfig("trace dt must be positive".into()));
    }
    let end = makespan(sol);
    let steps = (end / dt).ceil() as usize;
    let frames = (0..=steps)
        .map(|k| {
            let t = (k as f64 * dt).min(end);
            let positions: Vec<Point> = sol.paths.iter().map(|p| p.pos_at(t)).collect();
            let links = links(instance, &positions);
            TraceFrame { t, positions, links }
        })
        .collect();
    Ok(Trace {
        dt,
        makespan: end,
        reached: reached(instance, sol),
        frames,
    })
}

pub fn render_svg(instance: &Instance, sol: &Solution, snapshots: usize) -> Result<String> {
    check(instance, sol)?;
    let w = instance.world.width();
    let h = instance.world.height();
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="-1 -1 {} {}" width="{}" height="{}">"#,
        w + 2.0,
        h + 2.0,
        (w + 2.0) * 6.0,
        (h + 2.0) * 6.0
    );
    // world y points up
    let _ = writeln!(s, r#"<g transform="translate(0 {h}) scale(1 -1)">"#);
    let _ = writeln!(s, r##"<rect class="bounds" x="0" y="0" width="{w}" height="{h}" fill="none" stroke="#000" stroke-width="0.2"/>"##);
    for r in instance.world.obstacle_rects() {
        let _ = writeln!(
            s,
            r##"<rect class="obstacle" x="{}" y="{}" width="{}" height="{}" fill="#444"/>"##,
            r.min.x,
            r.min.y,
            r.width(),
            r.height()
        );
    }
    let end = makespan(sol);
    let snaps = snapshots.max(1);
    for k in 0..snaps {
        let t = if snaps == 1 { 0.0 } else { end * k as f64 / (snaps - 1) as f64 };
        let pos: Vec<Point> = sol.paths.iter().map(|p| p.pos_at(t)).collect();
        for (i, j) in links(instance, &pos) {
            let _ = writeln!(
                s,
                r##"<line class="comm-edge" data-t="{t:.3}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#999" stroke-width="0.15" stroke-dasharray="0.6 0.4"/>"##,
                pos[i].x, pos[i].y, pos[j].x, pos[j].y
            );
        }
    }
    let done = reached(instance, sol);
    for (i, path) in sol.paths.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = path.waypoints.iter().map(|w| format!("{:.3},{:.3}", w.p.x, w.p.y)).collect();
        let _ = writeln!(
            s,
            r#"<polyline class="agent-path" data-agent="{i}" points="{}" fill="none" stroke="{color}" stroke-width="0.3"/>"#,
            pts.join(" ")
        );
        let st = instance.starts[i];
        let g = instance.goals[i];
        let _ = writeln!(s, r#"<circle class="start" cx="{}" cy="{}" r="0.5" fill="{color}"/>"#, st.x, st.y);
        let _ = writeln!(
            s,
            r#"<rect class="goal" x="{}" y="{}" width="1" height="1" fill="none" stroke="{color}" stroke-width="0.2"/>"#,
            g.x - 0.5,
            g.y - 0.5
        );
        if !done[i] {
            let e = path.end_pos();
            let _ = writeln!(
                s,
                r#"<path class="unfinished" d="M{} {} L{} {} M{} {} L{} {}" stroke="{color}" stroke-width="0.3"/>"#,
                e.x - 0.8,
                e.y - 0.8,
                e.x + 0.8,
                e.y + 0.8,
                e.x - 0.8,
                e.y + 0.8,
                e.x + 0.8,
                e.y - 0.8
            );
        }
    }
    s.push_str("</g>\n</svg>\n");
    Ok(s)
}

/// Writes `<out>.svg` and `<out>.trace.json`, replacing any extension of `out`.
pub fn emit_trace(instance: &Instance, sol: &Solution, out: &Path) -> Result<()> {
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(out.with_extension("svg"), render_svg(instance, sol, DEFAULT_SNAPSHOTS)?)?;
    let trace = sample_trace(instance, sol, TRACE_DT)?;
    fs::write(out.with_extension("trace.json"), serde_json::to_string(&trace)?)?;
    Ok(())
}
