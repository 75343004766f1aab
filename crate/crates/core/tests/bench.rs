mod common;

use mapf_tct::bench::{make_instance, mean_std, run_suite, run_suite_with, BenchConfig, PlannerKind, CSV_HEADER, FAIL_DIST};
use mapf_tct::envgen::Family;
use mapf_tct::heuristics::HeuristicField;
use mapf_tct::trace::{sample_trace, TRACE_DT};
use mapf_tct::{solve, CommModel, Error, Instance, NavGraph, PlannerConfig, Solution};

fn small(planners: Vec<PlannerKind>, n: usize) -> BenchConfig {
    BenchConfig {
        planners,
        families: vec![Family::RandomForest],
        agent_counts: vec![n],
        seeds: 0..4,
        size: 30.0,
        workers: 1,
        ..BenchConfig::default()
    }
}

fn never(_: PlannerKind, _: &Instance, _: &PlannerConfig) -> mapf_tct::Result<Solution> {
    Err(Error::InvalidConfig("stub".into()))
}

#[test]
fn always_failing_planner_costs_three_hundred_meters() {
    let cfg = small(vec![PlannerKind::Maapgdl, PlannerKind::Plf], 3);
    let (rows, records) = run_suite_with(&cfg, &never).unwrap();
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert_eq!(r.success_rate, 0.0);
        assert_eq!(r.dist_mean, FAIL_DIST);
        assert_eq!(r.dist_std, 0.0);
        assert_eq!(r.runtime_mean, cfg.planner.t_ds);
    }
    assert!(records.iter().all(|r| r.note.as_deref().is_some_and(|n| n.contains("stub"))));
}

#[test]
fn panicking_planner_is_recorded_not_propagated() {
    let cfg = small(vec![PlannerKind::Maapgdl], 2);
    let (rows, records) = run_suite_with(&cfg, &|_: PlannerKind, _: &Instance, _: &PlannerConfig| -> mapf_tct::Result<Solution> {
        panic!("boom")
    })
    .unwrap();
    assert_eq!(rows[0].dist_mean, FAIL_DIST);
    assert!(records.iter().all(|r| r.note.as_deref() == Some("panic: boom")));
}

#[test]
fn lone_agent_distance_is_the_field_value() {
    let _clock = common::timed();
    let cfg = small(vec![PlannerKind::Maapgdl], 1);
    let (rows, _) = run_suite(&cfg).unwrap();
    let mut expected = 0.0;
    for seed in cfg.seeds.clone() {
        let inst = make_instance(&cfg, Family::RandomForest, 1, seed).unwrap();
        let graph = NavGraph::from_world(&inst.world, 1.0, 0.25).unwrap();
        let field = HeuristicField::for_goal(&graph, inst.goals[0]).unwrap();
        expected += field.at_point(inst.starts[0], &graph, &inst.world);
    }
    expected /= cfg.seeds.end as f64;
    assert_eq!(rows[0].success_rate, 1.0);
    assert!((rows[0].dist_mean - expected).abs() < 1e-6, "{} vs {expected}", rows[0].dist_mean);
}

#[test]
fn population_standard_deviation() {
    assert_eq!(mean_std(&[10.0, 20.0]), (15.0, 5.0));
    assert_eq!(mean_std(&[7.0]), (7.0, 0.0));
}

fn strip_runtime(csv: &str) -> Vec<String> {
    let runtime_cols: Vec<usize> = CSV_HEADER
        .split(',')
        .enumerate()
        .filter(|(_, h)| h.starts_with("runtime"))
        .map(|(i, _)| i)
        .collect();
    csv.lines()
        .map(|l| {
            l.split(',')
                .enumerate()
                .filter(|(i, _)| l.starts_with('#') || !runtime_cols.contains(i))
                .map(|(_, c)| c)
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect()
}

#[test]
fn tables_repeat_except_for_runtime() {
    let _clock = common::timed();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut tables = Vec::new();
    for d in &dirs {
        let mut cfg = small(vec![PlannerKind::Maapgdl, PlannerKind::PibtComm], 3);
        cfg.output_dir = Some(d.path().to_path_buf());
        run_suite(&cfg).unwrap();
        let csv = std::fs::read_to_string(d.path().join("metrics.csv")).unwrap();
        assert!(csv.lines().any(|l| l == CSV_HEADER));
        tables.push(strip_runtime(&csv));
        for seed in 0..4 {
            assert!(d.path().join(format!("inst_random-forest_3_{seed}.json")).exists());
            assert!(d.path().join(format!("sol_pibt-comm_random-forest_3_{seed}.json")).exists());
        }
    }
    assert_eq!(tables[0], tables[1]);
}

#[test]
fn sampled_trace_stays_connected() {
    let _clock = common::timed();
    let cfg = small(vec![PlannerKind::Maapgdl], 3);
    for seed in 0..4 {
        let inst = make_instance(&cfg, Family::RandomForest, 3, seed).unwrap();
        let sol = solve(&inst, &PlannerConfig { seed, ..Default::default() }).unwrap();
        assert!(sol.is_success());
        let trace = sample_trace(&inst, &sol, TRACE_DT).unwrap();
        assert!(trace.reached.iter().all(|&r| r));
        let model = CommModel::new(inst.comm, &inst.world);
        for f in &trace.frames {
            // links must agree with the comm model and join all three agents
            for &(i, j) in &f.links {
                assert!(model.acomm_static(f.positions[i], f.positions[j]));
            }
            let mut reach = [true, false, false];
            for _ in 0..2 {
                for &(i, j) in &f.links {
                    if reach[i] || reach[j] {
                        reach[i] = true;
                        reach[j] = true;
                    }
                }
            }
            assert!(reach.iter().all(|&r| r), "seed {seed} t {}", f.t);
        }
    }
}
