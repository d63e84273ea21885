//! Running a configuration and post-processing the resulting sweep.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::config::{Config, Engine, RunSpec};
use super::csv::{format_float, output_orders, read_table, read_timeseries, write_table, TimeSeriesWriter};
use super::IoError;
use crate::analysis::{
    detect_kinks, detect_page_time, fit_beta_records, fit_collapse, min_entropy_kinks, regress_to_tl, CollapseConfig,
    CollapseSeries,
};
use crate::ed::{Checkpoint, EdConfig, EdEngine, KrylovConfig, TrajectoryStats};
use crate::free::FreeEngine;
use crate::model::{ModelParams, QuenchGrid};
use crate::spectrum::{EntanglementRecord, RenyiOrder};
use crate::{Beta, Collapse, Kink, PageTime, Regression};

/// Threshold on second differences, relative to the local median, for the
/// min-entropy kink cross-check.
const SMIN_KINK_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SweepOptions {
    /// Worker threads for the sweep; 0 lets rayon decide.
    pub jobs: usize,
}

/// Everything that determines the output of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub run_id: String,
    pub engine: Engine,
    pub params: ModelParams<f64>,
    pub grid: QuenchGrid<f64>,
    pub orders: Vec<RenyiOrder>,
    pub topk: usize,
    pub krylov_tol: f64,
    pub capacity: usize,
    pub checkpoint_every: usize,
    pub dir: PathBuf,
}

fn canonical(engine: Engine, p: &ModelParams<f64>, grid: &QuenchGrid<f64>, orders: &[RenyiOrder], topk: usize, tol: f64) -> String {
    let orders: Vec<String> = orders.iter().map(|o| o.to_string()).collect();
    let mut s = format!(
        "engine={engine};M={};N={};V={:e};t_s={:e};t_e={:e};g={:e};dt={:e};steps={};renyi={};topk={topk}",
        p.m,
        p.n,
        p.v,
        p.t_s,
        p.t_e,
        p.g,
        grid.dt,
        grid.steps,
        orders.join(",")
    );
    if engine == Engine::Ed {
        s.push_str(&format!(";krylov_tol={tol:e}"));
    }
    s
}

/// First 12 hex digits of the SHA-256 of the canonical run description.
pub fn run_id(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().take(6).map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    pub fn new(spec: &RunSpec, cfg: &Config, sweep_dir: &Path) -> Self {
        let orders = output_orders(&cfg.renyi);
        let m = spec.params.m;
        let topk = if m < 20 { cfg.topk.min(1 << m) } else { cfg.topk };
        let id = run_id(&canonical(spec.engine, &spec.params, &spec.grid, &orders, topk, cfg.krylov_tol));
        Self {
            dir: sweep_dir.join(&id),
            run_id: id,
            engine: spec.engine,
            params: spec.params,
            grid: spec.grid,
            orders,
            topk,
            krylov_tol: cfg.krylov_tol,
            capacity: cfg.capacity,
            checkpoint_every: cfg.checkpoint_every,
        }
    }

    pub fn timeseries_path(&self) -> PathBuf {
        self.dir.join("timeseries.csv")
    }

    pub fn checkpoint_path(&self) -> PathBuf {
        self.dir.join("state.ckpt")
    }

    fn text(&self) -> String {
        let p = &self.params;
        let orders: Vec<String> = self.orders.iter().map(|o| o.to_string()).collect();
        format!(
            "run_id = {}\nengine = {}\nM = {}\nN = {}\nL = {}\nV = {}\nt_s = {}\nt_e = {}\ng = {}\ndt = {}\nt_max = {}\nsteps = {}\nrenyi = {}\ntopk = {}\nkrylov_tol = {:e}\n",
            self.run_id,
            self.engine,
            p.m,
            p.n,
            p.l(),
            p.v,
            p.t_s,
            p.t_e,
            p.g,
            self.grid.dt,
            self.grid.t_max,
            self.grid.steps,
            orders.join(", "),
            self.topk,
            self.krylov_tol
        )
    }
}

/// Result of one finished run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub rows: usize,
    pub stats: Option<TrajectoryStats>,
    /// Step the run resumed from, if a checkpoint was found.
    pub resumed_from: Option<usize>,
}

fn engine_error(m: &RunManifest, e: impl std::fmt::Display) -> IoError {
    IoError::Engine { run: m.run_id.clone(), msg: e.to_string() }
}

fn run_free(m: &RunManifest) -> Result<RunOutcome, IoError> {
    let engine = FreeEngine::new(&m.params).map_err(|e| engine_error(m, e))?;
    let mut w = TimeSeriesWriter::create(&m.timeseries_path(), &m.orders, m.topk)?;
    let mut failure = None;
    engine
        .run_with(&m.grid, &m.orders, m.topk, |r| {
            if failure.is_none() {
                if let Err(e) = w.write(&r) {
                    failure = Some(e);
                }
            }
        })
        .map_err(|e| engine_error(m, e))?;
    if let Some(e) = failure {
        return Err(e);
    }
    let rows = w.rows();
    w.finish()?;
    Ok(RunOutcome { manifest: m.clone(), rows, stats: None, resumed_from: None })
}

/// Records before the checkpoint step, if an earlier partial output is
/// consistent with it.
fn resumable(m: &RunManifest, engine: &EdEngine) -> Option<(crate::ed::SectorState, Vec<EntanglementRecord<f64>>)> {
    let file = fs::File::open(m.checkpoint_path()).ok()?;
    let cp = Checkpoint::read_from(std::io::BufReader::new(file)).ok()?;
    let state = engine.restore(cp, m.grid.dt).ok()?;
    let ts = read_timeseries(&m.timeseries_path()).ok()?;
    if ts.topk != m.topk || ts.orders != m.orders || ts.records.len() < state.step || state.step > m.grid.steps {
        return None;
    }
    let mut done = ts.records;
    done.truncate(state.step);
    Some((state, done))
}

fn write_checkpoint(m: &RunManifest, cp: &Checkpoint) -> Result<(), IoError> {
    let tmp = m.dir.join("state.ckpt.tmp");
    let file = fs::File::create(&tmp).map_err(|e| IoError::file(&tmp, e))?;
    let mut w = std::io::BufWriter::new(file);
    cp.write_to(&mut w).map_err(|e| engine_error(m, e))?;
    drop(w);
    fs::rename(&tmp, m.checkpoint_path()).map_err(|e| IoError::file(&m.checkpoint_path(), e))
}

fn run_ed(m: &RunManifest) -> Result<RunOutcome, IoError> {
    let config = EdConfig { capacity: m.capacity, krylov: KrylovConfig { tolerance: m.krylov_tol, ..KrylovConfig::default() } };
    let engine = EdEngine::new(&m.params, config).map_err(|e| engine_error(m, e))?;
    let (mut state, done) = match resumable(m, &engine) {
        Some(found) => found,
        None => (engine.initial_state(), Vec::new()),
    };
    let resumed_from = (!done.is_empty() || state.step > 0).then_some(state.step);
    let mut w = TimeSeriesWriter::create(&m.timeseries_path(), &m.orders, m.topk)?;
    for r in &done {
        w.write(r)?;
    }
    let every = m.checkpoint_every;
    let mut failure: Option<IoError> = None;
    let stats = engine
        .continue_with(&mut state, &m.grid, &m.orders, m.topk, |s, r| {
            let result = w.write(&r).and_then(|_| {
                if every > 0 && s.step > 0 && s.step % every == 0 && s.step < m.grid.steps {
                    write_checkpoint(m, &engine.checkpoint(s, m.grid.dt))
                } else {
                    Ok(())
                }
            });
            result.map_err(|e| {
                let msg = e.to_string();
                failure = Some(e);
                crate::ed::EdError::Numeric(msg)
            })
        })
        .map_err(|e| failure.take().unwrap_or_else(|| engine_error(m, e)))?;
    let rows = w.rows();
    w.finish()?;
    let ckpt = m.checkpoint_path();
    if ckpt.exists() {
        fs::remove_file(&ckpt).map_err(|e| IoError::file(&ckpt, e))?;
    }
    Ok(RunOutcome { manifest: m.clone(), rows, stats: Some(stats), resumed_from })
}

/// Execute one run into its own directory.
pub fn execute(m: &RunManifest) -> Result<RunOutcome, IoError> {
    fs::create_dir_all(&m.dir).map_err(|e| IoError::file(&m.dir, e))?;
    let path = m.dir.join("manifest.txt");
    fs::write(&path, m.text()).map_err(|e| IoError::file(&path, e))?;
    match m.engine {
        Engine::Free => run_free(m),
        Engine::Ed => run_ed(m),
    }
}

/// Run every point of `cfg` into `dir` using `options.jobs` workers, then
/// write `runs.csv`.
pub fn run_sweep(cfg: &Config, dir: &Path, options: SweepOptions) -> Result<Vec<RunOutcome>, IoError> {
    cfg.check_capacity()?;
    let manifests: Vec<RunManifest> = cfg.runs()?.iter().map(|s| RunManifest::new(s, cfg, dir)).collect();
    let mut ids = BTreeSet::new();
    for m in &manifests {
        if !ids.insert(m.run_id.clone()) {
            return Err(IoError::Config { line: 0, msg: format!("duplicate run (M = {}, V = {}, g = {})", m.params.m, m.params.v, m.params.g) });
        }
    }
    fs::create_dir_all(dir).map_err(|e| IoError::file(dir, e))?;
    let path = dir.join("config.txt");
    fs::write(&path, cfg.to_text()).map_err(|e| IoError::file(&path, e))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()
        .map_err(|e| IoError::Config { line: 0, msg: format!("cannot start {} workers: {e}", options.jobs) })?;
    let outcomes: Vec<RunOutcome> = pool.install(|| manifests.par_iter().map(execute).collect::<Result<_, _>>())?;

    let header = [
        "run_id", "engine", "M", "N", "L", "V", "t_s", "t_e", "g", "dt", "t_max", "steps", "rows", "max_krylov_dim", "max_norm_defect",
    ];
    let rows: Vec<Vec<String>> = outcomes
        .iter()
        .map(|o| {
            let (m, p) = (&o.manifest, &o.manifest.params);
            vec![
                m.run_id.clone(),
                m.engine.to_string(),
                p.m.to_string(),
                p.n.to_string(),
                p.l().to_string(),
                format_float(p.v),
                format_float(p.t_s),
                format_float(p.t_e),
                format_float(p.g),
                format_float(m.grid.dt),
                format_float(m.grid.t_max),
                m.grid.steps.to_string(),
                o.rows.to_string(),
                o.stats.map(|s| s.max_subspace_dim.to_string()).unwrap_or_default(),
                o.stats.map(|s| format_float(s.max_norm_defect)).unwrap_or_default(),
            ]
        })
        .collect();
    write_table(&dir.join("runs.csv"), &header, &rows)?;
    Ok(outcomes)
}

/// Per-run analysis results.
#[derive(Debug, Clone)]
pub struct RunAnalysis {
    pub run_id: String,
    pub m: usize,
    pub v: f64,
    pub g: f64,
    pub dt: f64,
    pub kinks: Vec<Kink>,
    /// Min-entropy slope discontinuities, cross-check for the crossings.
    pub s_min_kinks: Vec<f64>,
    pub page: Option<PageTime>,
    pub beta: Result<Beta, String>,
}

impl RunAnalysis {
    pub fn first_kink(&self) -> Option<&Kink> {
        self.kinks.iter().find(|k| k.pair == (1, 2))
    }
}

/// Fits over the system sizes that share `(V, g)`.
#[derive(Debug, Clone)]
pub struct GroupAnalysis {
    pub v: f64,
    pub g: f64,
    /// Indices into [`SweepAnalysis::runs`], ascending in `M`.
    pub runs: Vec<usize>,
    pub decayed_fraction: Option<Regression>,
    pub critical_time: Option<Regression>,
    pub collapse: Option<Collapse>,
    /// Unweighted means of `β` and `A` over the runs with a valid fit.
    pub beta: Option<(f64, f64, usize)>,
}

#[derive(Debug, Clone)]
pub struct SweepAnalysis {
    pub runs: Vec<RunAnalysis>,
    pub groups: Vec<GroupAnalysis>,
    /// Fits that could not be made and ordering violations.
    pub warnings: Vec<String>,
}

fn cell<T: std::str::FromStr>(rows: &[String], head: &[String], name: &str, path: &Path) -> Result<T, IoError> {
    let idx = head.iter().position(|h| h == name).ok_or_else(|| IoError::Csv {
        path: path.display().to_string(),
        line: 1,
        msg: format!("missing column `{name}`"),
    })?;
    rows[idx].parse().map_err(|_| IoError::Csv {
        path: path.display().to_string(),
        line: 0,
        msg: format!("bad `{name}` value `{}`", rows[idx]),
    })
}

fn opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

/// Analyse a finished sweep directory and write the summary CSVs.
pub fn analyze_sweep(dir: &Path) -> Result<SweepAnalysis, IoError> {
    let cfg = Config::load(&dir.join("config.txt"))?;
    let runs_path = dir.join("runs.csv");
    let (head, table) = read_table(&runs_path)?;
    let mut warnings = Vec::new();
    let mut runs = Vec::new();
    let mut series = Vec::new();
    for row in &table {
        let run_id: String = cell(row, &head, "run_id", &runs_path)?;
        let m: usize = cell(row, &head, "M", &runs_path)?;
        let v: f64 = cell(row, &head, "V", &runs_path)?;
        let g: f64 = cell(row, &head, "g", &runs_path)?;
        let dt: f64 = cell(row, &head, "dt", &runs_path)?;
        let ts = read_timeseries(&dir.join(&run_id).join("timeseries.csv"))?;
        let records = ts.records;
        let kinks = detect_kinks(&records, cfg.kink_pairs)?;
        let times: Vec<f64> = records.iter().map(|r| r.time).collect();
        let s_min: Vec<f64> = records.iter().map(|r| r.s_min).collect();
        let s_min_kinks = min_entropy_kinks(&times, &s_min, SMIN_KINK_THRESHOLD);
        let page = match detect_page_time(&records, m) {
            Ok(p) => Some(p),
            Err(e) => {
                warnings.push(format!("run {run_id}: no Page time: {e}"));
                None
            }
        };
        let first = kinks.iter().find(|k| k.pair == (1, 2)).cloned();
        let beta = match &first {
            Some(k) => fit_beta_records(&records, k.t_c, cfg.beta_window).map_err(|e| e.to_string()),
            None => Err("no level crossing".to_string()),
        };
        if let (Some(k), Some(p)) = (&first, &page) {
            if k.t_c > p.t_page {
                warnings.push(format!("run {run_id}: first crossing t_c = {} after the Page time {}", k.t_c, p.t_page));
            }
        }
        if let Some(p) = &page {
            if p.at_boundary {
                warnings.push(format!("run {run_id}: entropy maximum on the edge of the time window"));
            }
        }
        series.push(CollapseSeries {
            m,
            t_c: first.as_ref().map(|k| k.t_c).unwrap_or(f64::NAN),
            times,
            order: records.iter().map(|r| r.decayed_fraction).collect(),
            s_min,
        });
        runs.push(RunAnalysis { run_id, m, v, g, dt, kinks, s_min_kinks, page, beta });
    }

    // group by (V, g) in order of first appearance
    let mut groups: Vec<GroupAnalysis> = Vec::new();
    for (i, r) in runs.iter().enumerate() {
        match groups.iter_mut().find(|gr| gr.v == r.v && gr.g == r.g) {
            Some(gr) => gr.runs.push(i),
            None => groups.push(GroupAnalysis {
                v: r.v,
                g: r.g,
                runs: vec![i],
                decayed_fraction: None,
                critical_time: None,
                collapse: None,
                beta: None,
            }),
        }
    }
    let collapse_cfg = CollapseConfig { neighborhood: cfg.collapse_window, ..CollapseConfig::default() };
    for gr in groups.iter_mut() {
        gr.runs.sort_by_key(|&i| runs[i].m);
        let label = format!("V = {}, g = {}", gr.v, gr.g);
        let with_kink: Vec<usize> = gr.runs.iter().copied().filter(|&i| runs[i].first_kink().is_some()).collect();
        let df: Vec<(f64, f64)> = with_kink.iter().map(|&i| (1.0 / runs[i].m as f64, runs[i].first_kink().unwrap().decayed_fraction)).collect();
        let tc: Vec<(f64, f64)> = with_kink.iter().map(|&i| (1.0 / runs[i].m as f64, runs[i].first_kink().unwrap().t_c / runs[i].m as f64)).collect();
        match regress_to_tl(&df) {
            Ok(r) => gr.decayed_fraction = Some(r),
            Err(e) => warnings.push(format!("{label}: no decayed-fraction regression: {e}")),
        }
        match regress_to_tl(&tc) {
            Ok(r) => gr.critical_time = Some(r),
            Err(e) => warnings.push(format!("{label}: no critical-time regression: {e}")),
        }
        let group_series: Vec<CollapseSeries<f64>> = with_kink.iter().map(|&i| series[i].clone()).collect();
        match fit_collapse(&group_series, &collapse_cfg) {
            Ok(f) => gr.collapse = Some(f),
            Err(e) => warnings.push(format!("{label}: no scaling collapse: {e}")),
        }
        let fits: Vec<&Beta> = gr.runs.iter().filter_map(|&i| runs[i].beta.as_ref().ok()).collect();
        if fits.is_empty() {
            warnings.push(format!("{label}: no β fit"));
        } else {
            let n = fits.len() as f64;
            let beta = fits.iter().map(|f| f.beta).sum::<f64>() / n;
            let amp = fits.iter().map(|f| f.amplitude).sum::<f64>() / n;
            gr.beta = Some((beta, amp, fits.len()));
        }
    }

    let analysis = SweepAnalysis { runs, groups, warnings };
    write_analysis(dir, &analysis)?;
    Ok(analysis)
}

fn write_analysis(dir: &Path, a: &SweepAnalysis) -> Result<(), IoError> {
    let mut rows = Vec::new();
    for r in &a.runs {
        for k in &r.kinks {
            let nearest = if k.pair == (1, 2) {
                r.s_min_kinks.iter().copied().min_by(|x, y| (x - k.t_c).abs().total_cmp(&(y - k.t_c).abs()))
            } else {
                None
            };
            rows.push(vec![
                r.run_id.clone(),
                r.m.to_string(),
                format_float(r.v),
                format_float(r.g),
                format!("{}-{}", k.pair.0, k.pair.1),
                k.ordinal.to_string(),
                format_float(k.t_c),
                format_float(k.decayed_fraction),
                k.from_sector.to_string(),
                k.to_sector.to_string(),
                opt(nearest),
            ]);
        }
    }
    write_table(
        &dir.join("kinks.csv"),
        &["run_id", "M", "V", "g", "pair", "ordinal", "t_c", "decayed_fraction", "from_sector", "to_sector", "s_min_kink"],
        &rows,
    )?;

    let rows: Vec<Vec<String>> = a
        .runs
        .iter()
        .map(|r| {
            let t_c = r.first_kink().map(|k| k.t_c);
            vec![
                r.run_id.clone(),
                r.m.to_string(),
                format_float(r.v),
                format_float(r.g),
                opt(r.page.as_ref().map(|p| p.t_page)),
                opt(r.page.as_ref().map(|p| p.peak)),
                opt(r.page.as_ref().map(|p| p.peak_density)),
                r.page.as_ref().map(|p| p.at_boundary.to_string()).unwrap_or_default(),
                opt(t_c),
                match (t_c, &r.page) {
                    (Some(t), Some(p)) => (t <= p.t_page).to_string(),
                    _ => String::new(),
                },
            ]
        })
        .collect();
    write_table(
        &dir.join("page_times.csv"),
        &["run_id", "M", "V", "g", "t_page", "peak", "peak_density", "at_boundary", "first_t_c", "t_c_before_page"],
        &rows,
    )?;

    let mut rows = Vec::new();
    for gr in &a.groups {
        for (name, reg) in [("decayed_fraction_at_tc", &gr.decayed_fraction), ("t_c_over_M", &gr.critical_time)] {
            if let Some(r) = reg {
                rows.push(vec![
                    format_float(gr.v),
                    format_float(gr.g),
                    name.to_string(),
                    format_float(r.intercept),
                    format_float(r.intercept_stderr),
                    format_float(r.slope),
                    format_float(r.slope_stderr),
                    format_float(r.r_squared),
                    r.x.len().to_string(),
                ]);
            }
        }
    }
    write_table(
        &dir.join("regression.csv"),
        &["V", "g", "observable", "intercept", "intercept_stderr", "slope", "slope_stderr", "r_squared", "n"],
        &rows,
    )?;

    let rows: Vec<Vec<String>> = a
        .groups
        .iter()
        .filter_map(|gr| {
            gr.collapse.as_ref().map(|f| {
                vec![format_float(gr.v), format_float(gr.g), format_float(f.c), format_float(f.b), format_float(f.a), format_float(f.cost())]
            })
        })
        .collect();
    write_table(&dir.join("exponents.csv"), &["V", "g", "c", "b", "a", "cost"], &rows)?;

    let rows: Vec<Vec<String>> = a
        .groups
        .iter()
        .filter_map(|gr| gr.beta.map(|(b, amp, n)| vec![format_float(gr.v), format_float(gr.g), format_float(b), format_float(amp), n.to_string()]))
        .collect();
    write_table(&dir.join("beta.csv"), &["V", "g", "beta", "A", "runs"], &rows)?;

    let rows: Vec<Vec<String>> = a
        .runs
        .iter()
        .map(|r| {
            let mut row = vec![r.run_id.clone(), r.m.to_string(), format_float(r.v), format_float(r.g)];
            match &r.beta {
                Ok(f) => row.extend([
                    format_float(f.t_c),
                    format_float(f.window),
                    format_float(f.beta),
                    format_float(f.amplitude),
                    f.points.to_string(),
                    format_float(f.residual),
                    "ok".to_string(),
                ]),
                Err(e) => {
                    row.extend(std::iter::repeat_n(String::new(), 6));
                    row.push(e.clone());
                }
            }
            row
        })
        .collect();
    write_table(
        &dir.join("beta_runs.csv"),
        &["run_id", "M", "V", "g", "t_c", "window", "beta", "A", "points", "residual", "status"],
        &rows,
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_id_is_stable_and_short() {
        let a = run_id("engine=free;M=3");
        assert_eq!(a.len(), 12);
        assert_eq!(a, run_id("engine=free;M=3"));
        assert_ne!(a, run_id("engine=free;M=4"));
        // SHA-256("abc") starts with ba7816bf8f01
        assert_eq!(run_id("abc"), "ba7816bf8f01");
    }

    #[test]
    fn manifest_ids_depend_on_physics_only() {
        let cfg = Config::parse("N = 10\nM = 3\nV = 0, 0.4\n").unwrap();
        let specs = cfg.runs().unwrap();
        let a = RunManifest::new(&specs[0], &cfg, Path::new("x"));
        let b = RunManifest::new(&specs[0], &cfg, Path::new("y"));
        let c = RunManifest::new(&specs[1], &cfg, Path::new("x"));
        assert_eq!(a.run_id, b.run_id);
        assert_ne!(a.run_id, c.run_id);
        assert_eq!(a.topk, 4);
    }
}
