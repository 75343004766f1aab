use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mapf_tct::bench::{run_suite, BenchConfig, PlannerKind};
use mapf_tct::envgen::{default_regions, gen_env, gen_instance_in, Difficulty, EnvParams, Family, Region, Sampling};
use mapf_tct::planner::solve_with_tree;
use mapf_tct::problem::{load_instance, save_instance, write_map};
use mapf_tct::trace::emit_trace;
use mapf_tct::validate::validate;
use mapf_tct::{CommKind, NavGraph, PlannerConfig, Solution};
use std::ops::Range;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mapf-tct", version, about = "Connectivity-constrained multi-agent path planning")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a map, and optionally an instance on it.
    Gen(GenArgs),
    /// Plan one instance.
    Solve(SolveArgs),
    /// Check a solution; exits with 1 if any check fails.
    Validate(ValidateArgs),
    /// Run a planner x family x n x seed sweep.
    Bench(BenchArgs),
    /// Render a solution to SVG plus a sampled JSON trace.
    Trace(TraceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum CommArg {
    Lcr,
    Los,
}

#[derive(Args, Clone)]
struct CommArgs {
    #[arg(long, value_enum, default_value = "lcr")]
    comm: CommArg,
    /// Range of the limited-range model, meters.
    #[arg(long, default_value_t = 15.0)]
    rc: f64,
}

impl CommArgs {
    fn kind(&self) -> CommKind {
        match self.comm {
            CommArg::Lcr => CommKind::Lcr { range: self.rc },
            CommArg::Los => CommKind::Los,
        }
    }
}

#[derive(Args, Clone)]
struct PlannerArgs {
    #[arg(long, default_value_t = 5.0)]
    tds: f64,
    #[arg(long, default_value_t = 0.2)]
    tsa: f64,
    #[arg(long, default_value_t = 5)]
    m: usize,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long = "penalty-c", default_value_t = 0.05)]
    penalty_c: f64,
    #[arg(long, default_value_t = 1.0)]
    vc: f64,
    #[arg(long, default_value_t = 0.5)]
    dc: f64,
    /// Planner RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl PlannerArgs {
    fn config(&self) -> PlannerConfig {
        PlannerConfig {
            t_ds: self.tds,
            t_sa: self.tsa,
            m: self.m,
            alpha: self.alpha,
            c: self.penalty_c,
            v_c: self.vc,
            d_c: self.dc,
            seed: self.seed,
            ..PlannerConfig::default()
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value = "random-forest")]
    family: Family,
    #[arg(long, default_value = "easy")]
    difficulty: Difficulty,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 114.0)]
    size: f64,
    /// Map output path.
    #[arg(long)]
    out: PathBuf,
    /// Also sample an instance with this many agents.
    #[arg(long)]
    n: Option<usize>,
    /// Instance output path; defaults to `<out stem>.inst.json`.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    dc: f64,
    #[arg(long, value_enum, default_value = "sequential")]
    sampling: SamplingArg,
    #[arg(long, value_enum, default_value = "strip")]
    region: RegionArg,
    #[command(flatten)]
    comm: CommArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum SamplingArg {
    Joint,
    Sequential,
}

impl From<SamplingArg> for Sampling {
    fn from(s: SamplingArg) -> Self {
        match s {
            SamplingArg::Joint => Sampling::Joint,
            SamplingArg::Sequential => Sampling::Sequential,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RegionArg {
    Strip,
    LongThin,
    Rectangle,
}

impl From<RegionArg> for Region {
    fn from(r: RegionArg) -> Self {
        match r {
            RegionArg::Strip => Region::Strip,
            RegionArg::LongThin => Region::LongThin,
            RegionArg::Rectangle => Region::Rectangle,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Solution output path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "maapgdl")]
    planner: PlannerKind,
    #[command(flatten)]
    planner_args: PlannerArgs,
    /// Dump the final search tree as JSON (main planner only).
    #[arg(long)]
    dump_tree: Option<PathBuf>,
    /// Also write `<out stem>.svg` and `<out stem>.trace.json`.
    #[arg(long)]
    svg: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    solution: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    dt: f64,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated planners.
    #[arg(long, value_delimiter = ',', default_value = "maapgdl")]
    planner: Vec<PlannerKind>,
    #[arg(long, value_delimiter = ',', default_value = "random-forest")]
    family: Vec<Family>,
    #[arg(long, default_value = "easy")]
    difficulty: Difficulty,
    /// Comma-separated agent counts.
    #[arg(long, value_delimiter = ',', default_value = "5")]
    n: Vec<usize>,
    /// Half-open seed range `a..b`.
    #[arg(long, default_value = "0..10", value_parser = parse_seeds)]
    seeds: Range<u64>,
    #[arg(long, default_value_t = 114.0)]
    size: f64,
    #[arg(long, value_enum, default_value = "sequential")]
    sampling: SamplingArg,
    #[arg(long, value_enum, default_value = "strip")]
    region: RegionArg,
    #[command(flatten)]
    comm: CommArgs,
    #[command(flatten)]
    planner_args: PlannerArgs,
    #[arg(long)]
    out: PathBuf,
    /// Render an SVG for every run.
    #[arg(long)]
    svg: bool,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    solution: PathBuf,
    /// Output stem for `.svg` and `.trace.json`.
    #[arg(long)]
    out: PathBuf,
}

fn parse_seeds(s: &str) -> Result<Range<u64>, String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected a..b, got `{s}`"))?;
    let a: u64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: u64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    if b <= a {
        return Err(format!("empty seed range `{s}`"));
    }
    Ok(a..b)
}

fn gen(a: GenArgs) -> Result<()> {
    let params = EnvParams::new(a.family, a.seed).with_size(a.size).with_difficulty(a.difficulty);
    let world = gen_env(&params)?;
    let hash = write_map(&world, &a.out)?;
    println!("map {} ({}) sha256 {hash}", a.out.display(), params.name());
    if let Some(n) = a.n {
        let cfg = PlannerConfig::default();
        let graph = NavGraph::from_world(&world, cfg.resolution, cfg.min_cell_size)?;
        let regions = default_regions(a.family, a.size, a.region.into(), a.seed);
        let mut inst = gen_instance_in(&world, &graph, regions, n, a.seed, a.dc, a.sampling.into())?;
        inst.comm = a.comm.kind();
        let path = a.instance.unwrap_or_else(|| a.out.with_extension("inst.json"));
        save_instance(&inst, &path, &a.out)?;
        println!("instance {} with {n} agents", path.display());
    }
    Ok(())
}

fn solve(a: SolveArgs) -> Result<()> {
    let inst = load_instance(&a.instance).with_context(|| format!("loading {}", a.instance.display()))?;
    let cfg = a.planner_args.config();
    let sol = if a.planner == PlannerKind::Maapgdl {
        let (sol, tree) = solve_with_tree(&inst, &cfg)?;
        if let Some(p) = &a.dump_tree {
            std::fs::write(p, tree.to_json()?)?;
        }
        sol
    } else {
        if a.dump_tree.is_some() {
            bail!("--dump-tree is only available for the maapgdl planner");
        }
        a.planner.run(&inst, &cfg)?
    };
    sol.save(&a.out)?;
    if a.svg {
        emit_trace(&inst, &sol, &a.out)?;
    }
    println!(
        "{:?} in {:.3} s, {} iterations, mean travel {:.3} m",
        sol.status,
        sol.stats.runtime,
        sol.stats.iterations,
        sol.mean_travel()
    );
    Ok(())
}

fn validate_cmd(a: ValidateArgs) -> Result<ExitCode> {
    let inst = load_instance(&a.instance)?;
    let sol = Solution::load(&a.solution)?;
    let report = validate(&inst, &sol, a.dt)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(if report.is_valid() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn bench(a: BenchArgs) -> Result<()> {
    let mut cfg = BenchConfig {
        planners: a.planner,
        families: a.family,
        difficulty: a.difficulty,
        agent_counts: a.n,
        seeds: a.seeds,
        size: a.size,
        comm: a.comm.kind(),
        region: a.region.into(),
        sampling: a.sampling.into(),
        planner: a.planner_args.config(),
        output_dir: Some(a.out.clone()),
        ..BenchConfig::default()
    };
    if let Some(w) = a.workers {
        cfg.workers = w;
    }
    let (rows, records) = run_suite(&cfg)?;
    if a.svg {
        for r in records.iter().filter(|r| r.status.is_some()) {
            let stem = format!("{}_{}_{}_{}", r.planner, r.family.label(), r.n, r.seed);
            let inst = load_instance(&a.out.join(format!("inst_{}_{}_{}.json", r.family.label(), r.n, r.seed)))?;
            let sol = Solution::load(&a.out.join(format!("sol_{stem}.json")))?;
            emit_trace(&inst, &sol, &a.out.join(format!("trace_{stem}")))?;
        }
    }
    for r in records.iter().filter(|r| r.note.is_some()) {
        eprintln!("{} {} n={} seed={}: {}", r.planner, r.family, r.n, r.seed, r.note.as_deref().unwrap_or(""));
    }
    println!("{:<10} {:<14} {:>4} {:>8} {:>10} {:>10}", "planner", "family", "n", "success", "runtime", "dist");
    for r in &rows {
        println!(
            "{:<10} {:<14} {:>4} {:>8.3} {:>10.3} {:>10.3}",
            r.planner,
            r.family.label(),
            r.n,
            r.success_rate,
            r.runtime_mean,
            r.dist_mean
        );
    }
    println!("tables in {}", a.out.display());
    Ok(())
}

fn trace(a: TraceArgs) -> Result<()> {
    let inst = load_instance(&a.instance)?;
    let sol = Solution::load(&a.solution)?;
    emit_trace(&inst, &sol, &a.out)?;
    Ok(())
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Gen(a) => gen(a)?,
        Cmd::Solve(a) => solve(a)?,
        Cmd::Validate(a) => return validate_cmd(a),
        Cmd::Bench(a) => bench(a)?,
        Cmd::Trace(a) => trace(a)?,
    }
    Ok(ExitCode::SUCCESS)
}
