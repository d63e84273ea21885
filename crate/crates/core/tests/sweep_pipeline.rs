//! Configuration → runs → analysis CSVs → plot scripts.

use std::fs;
use std::path::Path;

use pagecurve_core::ed::{EdConfig, EdEngine};
use pagecurve_core::io::sweep::execute;
use pagecurve_core::io::{analyze_sweep, emit_plots, read_timeseries, run_sweep, Config, RunManifest, SweepOptions, TimeSeriesWriter};

const FREE_SWEEP: &str = "\
L = 24
M = 3, 4, 5
V = 0
g = 0.5
dt = 0.05
t_max = 8
";

fn tree_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn free_sweep_end_to_end() {
    let cfg = Config::parse(FREE_SWEEP).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let outcomes = run_sweep(&cfg, dir.path(), SweepOptions { jobs: 2 }).unwrap();
    assert_eq!(outcomes.len(), 3);
    for o in &outcomes {
        assert_eq!(o.rows, 161);
        let ts = read_timeseries(&o.manifest.timeseries_path()).unwrap();
        assert_eq!(ts.records.len(), 161);
    }
    let analysis = analyze_sweep(dir.path()).unwrap();
    assert_eq!(analysis.groups.len(), 1);
    let g = &analysis.groups[0];
    assert!(g.decayed_fraction.is_some());
    assert!(g.critical_time.is_some());
    for name in ["kinks.csv", "page_times.csv", "regression.csv", "exponents.csv", "beta.csv", "beta_runs.csv"] {
        assert!(dir.path().join(name).is_file(), "{name}");
    }
    let regression = fs::read_to_string(dir.path().join("regression.csv")).unwrap();
    assert!(regression.starts_with("V,g,observable,intercept,intercept_stderr,slope,slope_stderr,r_squared,n\n"));
    assert_eq!(regression.lines().count(), 3);

    let scripts = emit_plots(dir.path()).unwrap();
    assert_eq!(scripts.len(), 5);
    let collapse = fs::read_to_string(dir.path().join("plots/collapse.py")).unwrap();
    for o in &outcomes {
        assert!(collapse.contains(&format!("\"{}\"", o.manifest.run_id)));
    }
    let schmidt = fs::read_to_string(dir.path().join("plots/schmidt_trajectories.py")).unwrap();
    let kinks = fs::read_to_string(dir.path().join("kinks.csv")).unwrap();
    let first_row = kinks.lines().nth(1).expect("at least one crossing");
    let t_c: f64 = first_row.split(',').nth(6).unwrap().parse().unwrap();
    assert!(schmidt.contains(&format!("{t_c:?}")), "kink marker missing");
}

#[test]
fn identical_configs_give_identical_bytes() {
    let cfg = Config::parse(FREE_SWEEP).unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_sweep(&cfg, a.path(), SweepOptions { jobs: 1 }).unwrap();
    analyze_sweep(a.path()).unwrap();
    run_sweep(&cfg, b.path(), SweepOptions { jobs: 3 }).unwrap();
    analyze_sweep(b.path()).unwrap();
    assert_eq!(tree_bytes(a.path()), tree_bytes(b.path()));
}

#[test]
fn ed_run_resumes_from_checkpoint() {
    let cfg = Config::parse("L = 12\nM = 3\nV = 0.8\ndt = 0.02\nt_max = 1\ncheckpoint_every = 10\n").unwrap();
    let spec = &cfg.runs().unwrap()[0];
    let fresh_dir = tempfile::tempdir().unwrap();
    let fresh = RunManifest::new(spec, &cfg, fresh_dir.path());
    let out = execute(&fresh).unwrap();
    assert_eq!(out.rows, 51);
    assert_eq!(out.resumed_from, None);
    assert!(!fresh.checkpoint_path().exists());
    let reference = fs::read(fresh.timeseries_path()).unwrap();

    // an interrupted run: checkpoint at step 20 plus a CSV with 23 rows
    let dir = tempfile::tempdir().unwrap();
    let m = RunManifest::new(spec, &cfg, dir.path());
    fs::create_dir_all(&m.dir).unwrap();
    let engine = EdEngine::new(&m.params, EdConfig::default()).unwrap();
    let mut state = engine.initial_state();
    let mut w = TimeSeriesWriter::create(&m.timeseries_path(), &m.orders, m.topk).unwrap();
    w.write(&engine.record(&state, 0.0, &m.orders, m.topk).unwrap()).unwrap();
    for k in 1..=22 {
        engine.step(&mut state, m.grid.dt).unwrap();
        w.write(&engine.record(&state, m.grid.time(k), &m.orders, m.topk).unwrap()).unwrap();
        if k == 20 {
            let mut f = fs::File::create(m.checkpoint_path()).unwrap();
            engine.checkpoint(&state, m.grid.dt).write_to(&mut f).unwrap();
        }
    }
    w.finish().unwrap();

    let out = execute(&m).unwrap();
    assert_eq!(out.resumed_from, Some(20));
    assert_eq!(out.rows, 51);
    assert_eq!(fs::read(m.timeseries_path()).unwrap(), reference);
}

#[test]
fn capacity_is_checked_before_anything_runs() {
    let cfg = Config::parse("L = 50\nM = 3, 7\nV = 0.4\n").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let err = run_sweep(&cfg, dir.path(), SweepOptions::default()).unwrap_err();
    assert!(err.to_string().contains("L = 50, M = 7"), "{err}");
    assert!(fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn plots_need_analysis_output() {
    let cfg = Config::parse(FREE_SWEEP).unwrap();
    let dir = tempfile::tempdir().unwrap();
    run_sweep(&cfg, dir.path(), SweepOptions::default()).unwrap();
    assert!(emit_plots(dir.path()).is_err());
}
