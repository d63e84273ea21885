//! Flat `key = value` run configuration.
//!
//! ```text
//! # free-fermion sweep
//! L = 50
//! M = 3, 4, 5, 6, 7
//! V = 0
//! g = 0.5
//! dt = 0.02
//! t_max = 40
//! ```
//!
//! `M`, `V` and `g` accept comma-separated lists; every combination becomes
//! one run. The environment size is given either as `N` or through the total
//! length `L` (then `N = L − M` for every `M`).

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use super::IoError;
use crate::ed::{binomial, DEFAULT_CAPACITY};
use crate::model::{ModelParams, QuenchGrid};
use crate::spectrum::RenyiOrder;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineChoice {
    Free,
    Ed,
    Auto,
}

impl EngineChoice {
    /// Engine for one run. `Auto` picks the free engine iff `V = 0`.
    pub fn resolve(self, v: f64) -> Result<Engine, String> {
        match self {
            Self::Free if v != 0.0 => Err(format!("the free engine needs V = 0, got V = {v}")),
            Self::Free => Ok(Engine::Free),
            Self::Ed => Ok(Engine::Ed),
            Self::Auto if v == 0.0 => Ok(Engine::Free),
            Self::Auto => Ok(Engine::Ed),
        }
    }
}

impl FromStr for EngineChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "free" => Ok(Self::Free),
            "ed" => Ok(Self::Ed),
            "auto" => Ok(Self::Auto),
            other => Err(format!("unknown engine `{other}` (expected free, ed or auto)")),
        }
    }
}

impl fmt::Display for EngineChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Free => "free",
            Self::Ed => "ed",
            Self::Auto => "auto",
        })
    }
}

/// Engine actually used for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Free,
    Ed,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Free => "free",
            Self::Ed => "ed",
        })
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "free" => Ok(Self::Free),
            "ed" => Ok(Self::Ed),
            other => Err(format!("unknown engine `{other}`")),
        }
    }
}

/// Parsed configuration: a sweep over `M × V × g` plus run and analysis
/// options.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub m: Vec<usize>,
    pub n: Option<usize>,
    pub l: Option<usize>,
    pub v: Vec<f64>,
    pub t_s: f64,
    pub t_e: f64,
    pub g: Vec<f64>,
    pub dt: f64,
    pub t_max: f64,
    pub engine: EngineChoice,
    pub topk: usize,
    pub renyi: Vec<RenyiOrder>,
    pub output: Option<String>,
    /// Width of the `β` fit window in raw time.
    pub beta_window: f64,
    /// Half-width of the collapse neighbourhood in raw time.
    pub collapse_window: f64,
    /// Schmidt-level pairs scanned for crossings.
    pub kink_pairs: usize,
    pub krylov_tol: f64,
    pub capacity: usize,
    /// Write an ED restart file every this many steps (0 = never).
    pub checkpoint_every: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            m: Vec::new(),
            n: None,
            l: None,
            v: vec![0.0],
            t_s: 1.0,
            t_e: 1.0,
            g: vec![0.5],
            dt: 0.02,
            t_max: 40.0,
            engine: EngineChoice::Auto,
            topk: 4,
            renyi: vec![RenyiOrder::VonNeumann, RenyiOrder::Finite(2.0), RenyiOrder::Min],
            output: None,
            beta_window: 0.5,
            collapse_window: 0.5,
            kink_pairs: 3,
            krylov_tol: 1e-12,
            capacity: DEFAULT_CAPACITY,
            checkpoint_every: 0,
        }
    }
}

/// One point of a sweep, fully validated.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub engine: Engine,
    pub params: ModelParams<f64>,
    pub grid: QuenchGrid<f64>,
}

fn list<T: FromStr>(value: &str) -> Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    let items: Vec<&str> = value.split(',').map(str::trim).collect();
    if items.iter().any(|s| s.is_empty()) {
        return Err("empty list entry".into());
    }
    items.into_iter().map(|s| s.parse::<T>().map_err(|e| format!("`{s}`: {e}"))).collect()
}

fn scalar<T: FromStr>(value: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    value.parse::<T>().map_err(|e| format!("`{value}`: {e}"))
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, IoError> {
        let mut cfg = Config::default();
        let mut seen: Vec<String> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| IoError::Config { line: line_no, msg };
            let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return Err(err(format!("missing value for `{key}`")));
            }
            if seen.iter().any(|k| k == key) {
                return Err(err(format!("duplicate key `{key}`")));
            }
            seen.push(key.to_string());
            match key {
                "M" => cfg.m = list(value).map_err(err)?,
                "N" => cfg.n = Some(scalar(value).map_err(err)?),
                "L" => cfg.l = Some(scalar(value).map_err(err)?),
                "V" => cfg.v = list(value).map_err(err)?,
                "t_s" => cfg.t_s = scalar(value).map_err(err)?,
                "t_e" => cfg.t_e = scalar(value).map_err(err)?,
                "g" => cfg.g = list(value).map_err(err)?,
                "dt" => cfg.dt = scalar(value).map_err(err)?,
                "t_max" => cfg.t_max = scalar(value).map_err(err)?,
                "engine" => cfg.engine = scalar(value).map_err(err)?,
                "topk" => cfg.topk = scalar(value).map_err(err)?,
                "renyi" => cfg.renyi = RenyiOrder::parse_list(value).map_err(|e| err(e.to_string()))?,
                "output" => cfg.output = Some(value.to_string()),
                "beta_window" => cfg.beta_window = scalar(value).map_err(err)?,
                "collapse_window" => cfg.collapse_window = scalar(value).map_err(err)?,
                "kink_pairs" => cfg.kink_pairs = scalar(value).map_err(err)?,
                "krylov_tol" => cfg.krylov_tol = scalar(value).map_err(err)?,
                "capacity" => cfg.capacity = scalar(value).map_err(err)?,
                "checkpoint_every" => cfg.checkpoint_every = scalar(value).map_err(err)?,
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        if cfg.m.is_empty() {
            return Err(IoError::Config { line: 0, msg: "missing required key `M`".into() });
        }
        if cfg.n.is_none() && cfg.l.is_none() {
            return Err(IoError::Config { line: 0, msg: "one of `N` or `L` is required".into() });
        }
        if cfg.n.is_some() && cfg.l.is_some() {
            return Err(IoError::Config { line: 0, msg: "give either `N` or `L`, not both".into() });
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        let text = std::fs::read_to_string(path).map_err(|e| IoError::file(path, e))?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<(), IoError> {
        let bad = |msg: String| IoError::Config { line: 0, msg };
        if self.topk == 0 {
            return Err(bad("`topk` must be >= 1".into()));
        }
        if self.renyi.is_empty() {
            return Err(bad("`renyi` needs at least one order".into()));
        }
        if !(self.beta_window > 0.0) || !(self.collapse_window > 0.0) {
            return Err(bad("fit windows must be positive".into()));
        }
        if !(self.krylov_tol > 0.0) {
            return Err(bad("`krylov_tol` must be positive".into()));
        }
        self.runs()?;
        Ok(())
    }

    fn environment(&self, m: usize) -> Result<usize, IoError> {
        match (self.n, self.l) {
            (Some(n), _) => Ok(n),
            (None, Some(l)) if l > m => Ok(l - m),
            (None, Some(l)) => Err(IoError::Config { line: 0, msg: format!("L = {l} leaves no environment for M = {m}") }),
            (None, None) => Err(IoError::Config { line: 0, msg: "one of `N` or `L` is required".into() }),
        }
    }

    /// Every `(M, V, g)` combination in `M`-major, then `V`, then `g` order.
    pub fn runs(&self) -> Result<Vec<RunSpec>, IoError> {
        let grid = QuenchGrid::new(self.dt, self.t_max)?;
        let mut out = Vec::new();
        for &m in &self.m {
            let n = self.environment(m)?;
            for &v in &self.v {
                for &g in &self.g {
                    let params = ModelParams::new(m, n, v, self.t_s, self.t_e, g)?;
                    let engine = self.engine.resolve(v).map_err(|msg| IoError::Config { line: 0, msg })?;
                    out.push(RunSpec { engine, params, grid });
                }
            }
        }
        Ok(out)
    }

    /// Reject ED runs whose sector would not fit before anything starts.
    pub fn check_capacity(&self) -> Result<(), IoError> {
        for run in self.runs()? {
            if run.engine == Engine::Ed {
                let (l, m) = (run.params.l(), run.params.m);
                if l > 64 {
                    return Err(IoError::Capacity { l, m, dim: u128::MAX, capacity: self.capacity });
                }
                let dim = binomial(l as u64, m as u64);
                if dim > self.capacity as u128 {
                    return Err(IoError::Capacity { l, m, dim, capacity: self.capacity });
                }
            }
        }
        Ok(())
    }

    /// Canonical text form; parsing it gives back the same configuration.
    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let mut s = String::new();
        s.push_str(&format!("M = {}\n", self.m.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")));
        if let Some(n) = self.n {
            s.push_str(&format!("N = {n}\n"));
        }
        if let Some(l) = self.l {
            s.push_str(&format!("L = {l}\n"));
        }
        s.push_str(&format!("V = {}\n", join(&self.v)));
        s.push_str(&format!("t_s = {}\nt_e = {}\n", self.t_s, self.t_e));
        s.push_str(&format!("g = {}\n", join(&self.g)));
        s.push_str(&format!("dt = {}\nt_max = {}\n", self.dt, self.t_max));
        s.push_str(&format!("engine = {}\ntopk = {}\n", self.engine, self.topk));
        s.push_str(&format!("renyi = {}\n", self.renyi.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(", ")));
        if let Some(o) = &self.output {
            s.push_str(&format!("output = {o}\n"));
        }
        s.push_str(&format!("beta_window = {}\ncollapse_window = {}\n", self.beta_window, self.collapse_window));
        s.push_str(&format!("kink_pairs = {}\nkrylov_tol = {:e}\n", self.kink_pairs, self.krylov_tol));
        s.push_str(&format!("capacity = {}\ncheckpoint_every = {}\n", self.capacity, self.checkpoint_every));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SWEEP: &str = "\
# free sweep
L = 50
M = 3, 4, 5, 6, 7
V = 0
g = 0.5   # coupling
dt = 0.02
t_max = 40
";

    #[test]
    fn parses_a_sweep() {
        let cfg = Config::parse(SWEEP).unwrap();
        assert_eq!(cfg.m, vec![3, 4, 5, 6, 7]);
        let runs = cfg.runs().unwrap();
        assert_eq!(runs.len(), 5);
        assert!(runs.iter().all(|r| r.params.l() == 50 && r.engine == Engine::Free));
        assert_eq!(runs[2].params.n, 45);
        assert_eq!(runs[0].grid.steps, 2000);
        assert_eq!(cfg.topk, 4);
    }

    #[test]
    fn auto_never_routes_interactions_to_the_free_engine() {
        let cfg = Config::parse("N = 10\nM = 3\nV = 0, 0.4\n").unwrap();
        let engines: Vec<Engine> = cfg.runs().unwrap().iter().map(|r| r.engine).collect();
        assert_eq!(engines, vec![Engine::Free, Engine::Ed]);
        assert!(Config::parse("N = 10\nM = 3\nV = 0.4\nengine = free\n").is_err());
    }

    #[test]
    fn zero_dt_is_rejected() {
        let err = Config::parse("N = 10\nM = 3\ndt = 0\n").unwrap_err();
        assert!(err.to_string().contains("dt"), "{err}");
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = Config::parse("N = 10\n\nM = 3\nfoo = 1\n").unwrap_err();
        assert!(matches!(err, IoError::Config { line: 4, .. }), "{err}");
        let err = Config::parse("N = 10\nM = three\n").unwrap_err();
        assert!(matches!(err, IoError::Config { line: 2, .. }), "{err}");
        let err = Config::parse("N = 10\nM 3\n").unwrap_err();
        assert!(matches!(err, IoError::Config { line: 2, .. }), "{err}");
        let err = Config::parse("N = 10\nM = 3\nM = 4\n").unwrap_err();
        assert!(matches!(err, IoError::Config { line: 3, .. }), "{err}");
    }

    #[test]
    fn environment_is_required() {
        assert!(Config::parse("M = 3\n").is_err());
        assert!(Config::parse("M = 3\nN = 0\n").is_err());
        assert!(Config::parse("M = 3\nL = 3\n").is_err());
        assert!(Config::parse("M = 3\nL = 10\nN = 7\n").is_err());
    }

    #[test]
    fn capacity_error_names_the_chain() {
        let cfg = Config::parse("L = 50\nM = 7\nV = 0.8\n").unwrap();
        match cfg.check_capacity().unwrap_err() {
            IoError::Capacity { l, m, .. } => assert_eq!((l, m), (50, 7)),
            other => panic!("{other}"),
        }
        let cfg = Config::parse("L = 50\nM = 7\nV = 0\n").unwrap();
        assert!(cfg.check_capacity().is_ok());
    }

    #[test]
    fn canonical_text_round_trips() {
        let mut cfg = Config::parse(SWEEP).unwrap();
        cfg.renyi = RenyiOrder::parse_list("1,2,3,inf").unwrap();
        cfg.output = Some("out/a".into());
        assert_eq!(Config::parse(&cfg.to_text()).unwrap(), cfg);
    }
}
