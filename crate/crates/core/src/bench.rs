//! Benchmark sweeps: planner x family x agent count x seed, with the
//! success / runtime / distance metrics and failure penalties.

use crate::baselines::{solve_comp, solve_pibt_comm, solve_plf};
use crate::comm::CommKind;
use crate::envgen::{default_regions, gen_env, gen_instance_in, Difficulty, EnvParams, Family, Region, Sampling};
use crate::error::{Error, Result};
use crate::planner::{solve, PlannerConfig};
use crate::problem::{save_instance, write_map, Instance, Solution, Status};
use crate::validate::validate;
use crate::world::NavGraph;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::ops::Range;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Per-agent travel distance charged to a failed run.
pub const FAIL_DIST: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlannerKind {
    Maapgdl,
    Comp,
    Plf,
    PibtComm,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 4] = [PlannerKind::Maapgdl, PlannerKind::Comp, PlannerKind::Plf, PlannerKind::PibtComm];

    pub fn label(&self) -> &'static str {
        match self {
            PlannerKind::Maapgdl => "maapgdl",
            PlannerKind::Comp => "comp",
            PlannerKind::Plf => "plf",
            PlannerKind::PibtComm => "pibt-comm",
        }
    }

    pub fn run(&self, instance: &Instance, config: &PlannerConfig) -> Result<Solution> {
        match self {
            PlannerKind::Maapgdl => solve(instance, config),
            PlannerKind::Comp => solve_comp(instance, config),
            PlannerKind::Plf => solve_plf(instance, config),
            PlannerKind::PibtComm => solve_pibt_comm(instance, config),
        }
    }
}

impl FromStr for PlannerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "maapgdl" | "tct" => Ok(PlannerKind::Maapgdl),
            "comp" => Ok(PlannerKind::Comp),
            "plf" => Ok(PlannerKind::Plf),
            "pibt-comm" | "pibt" => Ok(PlannerKind::PibtComm),
            other => Err(Error::InvalidConfig(format!("unknown planner `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchConfig {
    pub planners: Vec<PlannerKind>,
    pub families: Vec<Family>,
    pub difficulty: Difficulty,
    pub agent_counts: Vec<usize>,
    pub seeds: Range<u64>,
    pub size: f64,
    pub comm: CommKind,
    pub region: Region,
    pub sampling: Sampling,
    pub planner: PlannerConfig,
    /// Where solution files and tables go; `None` keeps everything in memory.
    pub output_dir: Option<PathBuf>,
    pub workers: usize,
    /// Validator sampling step.
    pub dt: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            planners: vec![PlannerKind::Maapgdl],
            families: vec![Family::RandomForest],
            difficulty: Difficulty::Easy,
            agent_counts: vec![2],
            seeds: 0..1,
            size: 114.0,
            comm: CommKind::default(),
            region: Region::Strip,
            sampling: Sampling::Sequential,
            planner: PlannerConfig::default(),
            output_dir: None,
            workers: default_workers(),
            dt: 0.05,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.planners.is_empty() || self.families.is_empty() || self.agent_counts.is_empty() || self.seeds.is_empty() {
            return Err(Error::InvalidConfig("planners, families, agent counts and seeds must be non-empty".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }
        if self.agent_counts.contains(&0) {
            return Err(Error::InvalidConfig("agent counts must be positive".into()));
        }
        self.planner.validate()
    }
}

/// Worker count: `MAPF_TCT_WORKERS` if set, else the available cores.
pub fn default_workers() -> usize {
    std::env::var("MAPF_TCT_WORKERS")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .filter(|&w| w >= 1)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub planner: String,
    pub family: Family,
    pub n: usize,
    pub seed: u64,
    pub status: Option<Status>,
    pub success: bool,
    /// Penalised: t_ds on failure.
    pub runtime: f64,
    /// Mean per-agent distance, penalised: 300 m on failure.
    pub dist: f64,
    pub raw_runtime: Option<f64>,
    pub valid: Option<bool>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub planner: String,
    pub family: Family,
    pub n: usize,
    pub runs: usize,
    pub success_rate: f64,
    pub runtime_mean: f64,
    pub runtime_std: f64,
    pub dist_mean: f64,
    pub dist_std: f64,
}

/// Mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, Copy)]
struct Job {
    planner: usize,
    family: usize,
    n: usize,
    seed: u64,
}

pub fn make_instance(cfg: &BenchConfig, family: Family, n: usize, seed: u64) -> Result<Instance> {
    let params = EnvParams::new(family, seed).with_size(cfg.size).with_difficulty(cfg.difficulty);
    let world = gen_env(&params)?;
    let graph = NavGraph::from_world(&world, cfg.planner.resolution, cfg.planner.min_cell_size)?;
    let regions = default_regions(family, cfg.size, cfg.region, seed);
    let mut inst = gen_instance_in(&world, &graph, regions, n, seed, cfg.planner.d_c, cfg.sampling)?;
    inst.comm = cfg.comm;
    inst.v_c = cfg.planner.v_c;
    Ok(inst)
}

fn file_stem(planner: &str, family: Family, n: usize, seed: u64) -> String {
    format!("{planner}_{}_{n}_{seed}", family.label())
}

fn failure(cfg: &BenchConfig, planner: &str, job: &Job, family: Family, note: String) -> RunRecord {
    RunRecord {
        planner: planner.to_string(),
        family,
        n: job.n,
        seed: job.seed,
        status: None,
        success: false,
        runtime: cfg.planner.t_ds,
        dist: FAIL_DIST,
        raw_runtime: None,
        valid: None,
        note: Some(note),
    }
}

fn run_one<F>(cfg: &BenchConfig, job: &Job, planner: &F) -> RunRecord
where
    F: Fn(PlannerKind, &Instance, &PlannerConfig) -> Result<Solution> + Sync,
{
    let kind = cfg.planners[job.planner];
    let family = cfg.families[job.family];
    let label = kind.label();
    let inst = match make_instance(cfg, family, job.n, job.seed) {
        Ok(i) => i,
        Err(e) => return failure(cfg, label, job, family, format!("instance: {e}")),
    };
    let mut pcfg = cfg.planner.clone();
    pcfg.seed = job.seed;
    let outcome = catch_unwind(AssertUnwindSafe(|| planner(kind, &inst, &pcfg)));
    let sol = match outcome {
        Ok(Ok(s)) => s,
        Ok(Err(e)) => return failure(cfg, label, job, family, format!("planner: {e}")),
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            return failure(cfg, label, job, family, format!("panic: {msg}"));
        }
    };
    let report = match validate(&inst, &sol, cfg.dt) {
        Ok(r) => Some(r),
        Err(e) => return failure(cfg, label, job, family, format!("validate: {e}")),
    };
    let valid = report.as_ref().map(|r| r.is_valid());
    let in_time = sol.stats.runtime <= cfg.planner.t_ds;
    let success = sol.status == Status::AllReachGoal && valid == Some(true) && in_time;
    let mut note = None;
    if sol.status == Status::AllReachGoal && valid != Some(true) {
        note = Some("reported success failed validation".to_string());
    } else if sol.status == Status::AllReachGoal && !in_time {
        note = Some(format!("finished after the budget ({:.3} s)", sol.stats.runtime));
    }
    if let Some(dir) = &cfg.output_dir {
        let stem = file_stem(label, family, job.n, job.seed);
        let r = (|| -> Result<()> {
            // one writer per instance; every planner sees the same one
            if job.planner == 0 {
                let map_path = dir.join(format!("map_{}_{}.json", family.label(), job.seed));
                write_map(&inst.world, &map_path)?;
                save_instance(&inst, &dir.join(format!("inst_{}_{}_{}.json", family.label(), job.n, job.seed)), &map_path)?;
            }
            sol.save(&dir.join(format!("sol_{stem}.json")))
        })();
        if let Err(e) = r {
            note = Some(format!("io: {e}"));
        }
    }
    RunRecord {
        planner: label.to_string(),
        family,
        n: job.n,
        seed: job.seed,
        status: Some(sol.status),
        success,
        runtime: if success { sol.stats.runtime } else { cfg.planner.t_ds },
        dist: if success { sol.mean_travel() } else { FAIL_DIST },
        raw_runtime: Some(sol.stats.runtime),
        valid,
        note,
    }
}

/// Runs the sweep with the built-in planners.
pub fn run_suite(cfg: &BenchConfig) -> Result<(Vec<MetricsRow>, Vec<RunRecord>)> {
    run_suite_with(cfg, &|kind: PlannerKind, inst: &Instance, pc: &PlannerConfig| kind.run(inst, pc))
}

/// Runs the sweep with an injected planner. Rows follow the configured
/// planner, family and agent-count order; records add the seed order.
pub fn run_suite_with<F>(cfg: &BenchConfig, planner: &F) -> Result<(Vec<MetricsRow>, Vec<RunRecord>)>
where
    F: Fn(PlannerKind, &Instance, &PlannerConfig) -> Result<Solution> + Sync,
{
    cfg.validate()?;
    if let Some(dir) = &cfg.output_dir {
        fs::create_dir_all(dir)?;
    }
    let mut jobs = Vec::new();
    for p in 0..cfg.planners.len() {
        for f in 0..cfg.families.len() {
            for &n in &cfg.agent_counts {
                for seed in cfg.seeds.clone() {
                    jobs.push(Job { planner: p, family: f, n, seed });
                }
            }
        }
    }
    let records: Vec<RunRecord> = if cfg.workers <= 1 {
        jobs.iter().map(|j| run_one(cfg, j, planner)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
        pool.install(|| jobs.par_iter().map(|j| run_one(cfg, j, planner)).collect())
    };
    let rows = aggregate(&records);
    if let Some(dir) = &cfg.output_dir {
        fs::write(dir.join("metrics.csv"), metrics_csv(&rows))?;
        fs::write(dir.join("metrics.json"), serde_json::to_string_pretty(&rows)?)?;
        fs::write(dir.join("runs.json"), serde_json::to_string_pretty(&records)?)?;
    }
    Ok((rows, records))
}

/// Groups consecutive records by (planner, family, n).
pub fn aggregate(records: &[RunRecord]) -> Vec<MetricsRow> {
    let mut rows: Vec<MetricsRow> = Vec::new();
    let mut start = 0;
    while start < records.len() {
        let key = (&records[start].planner, records[start].family, records[start].n);
        let mut end = start;
        while end < records.len() && (&records[end].planner, records[end].family, records[end].n) == key {
            end += 1;
        }
        let group = &records[start..end];
        let runtimes: Vec<f64> = group.iter().map(|r| r.runtime).collect();
        let dists: Vec<f64> = group.iter().map(|r| r.dist).collect();
        let (rm, rs) = mean_std(&runtimes);
        let (dm, ds) = mean_std(&dists);
        rows.push(MetricsRow {
            planner: key.0.clone(),
            family: key.1,
            n: key.2,
            runs: group.len(),
            success_rate: group.iter().filter(|r| r.success).count() as f64 / group.len() as f64,
            runtime_mean: rm,
            runtime_std: rs,
            dist_mean: dm,
            dist_std: ds,
        });
        start = end;
    }
    rows
}

pub const CSV_HEADER: &str = "planner,family,n,runs,success_rate,runtime_mean,runtime_std,dist_mean,dist_std";

/// Six-decimal CSV. Standard deviations are population deviations.
pub fn metrics_csv(rows: &[MetricsRow]) -> String {
    let mut s = String::from("# std columns are population standard deviations\n");
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6}",
            r.planner,
            r.family.label(),
            r.n,
            r.runs,
            r.success_rate,
            r.runtime_mean,
            r.runtime_std,
            r.dist_mean,
            r.dist_std
        );
    }
    s
}

pub fn write_tables(rows: &[MetricsRow], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("metrics.csv"), metrics_csv(rows))?;
    fs::write(dir.join("metrics.json"), serde_json::to_string_pretty(rows)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn population_std() {
        let (m, s) = mean_std(&[10.0, 20.0]);
        assert_eq!(m, 15.0);
        assert_eq!(s, 5.0);
    }

    #[test]
    fn planner_labels_round_trip() {
        for p in PlannerKind::ALL {
            assert_eq!(p.label().parse::<PlannerKind>().unwrap(), p);
        }
    }
}
