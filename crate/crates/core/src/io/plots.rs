//! Matplotlib scripts for a finished sweep.
//!
//! Each script reads the sweep CSVs by paths relative to its own location
//! (`<sweep>/plots/`), so the sweep directory can be moved as a whole.
//! Values from the analysis (kink times, fitted lines, exponents) are
//! written into the scripts as literals.

use std::fs;
use std::path::{Path, PathBuf};

use super::csv::read_table;
use super::IoError;

struct RunRow {
    run_id: String,
    m: usize,
    v: String,
    g: String,
}

fn column(head: &[String], name: &str, path: &Path) -> Result<usize, IoError> {
    head.iter().position(|h| h == name).ok_or_else(|| IoError::Csv {
        path: path.display().to_string(),
        line: 1,
        msg: format!("missing column `{name}`"),
    })
}

fn require(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), IoError> {
    if !path.is_file() {
        return Err(IoError::file(path, std::io::Error::new(std::io::ErrorKind::NotFound, "missing; run the analysis first")));
    }
    read_table(path)
}

const PRELUDE: &str = r#"import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = Path(__file__).resolve().parent
SWEEP = HERE.parent


def load(run_id):
    with open(SWEEP / run_id / "timeseries.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    return {k: [float(r[k]) for r in rows] for k in rows[0]}

"#;

fn py_str(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn runs_literal(runs: &[RunRow]) -> String {
    let items: Vec<String> = runs
        .iter()
        .map(|r| format!("    ({}, {}, {}, {}),", py_str(&r.run_id), r.m, r.v, r.g))
        .collect();
    format!("# (run_id, M, V, g)\nRUNS = [\n{}\n]\n", items.join("\n"))
}

fn entropy_vs_decayed_fraction(runs: &[RunRow]) -> String {
    format!(
        r#"{PRELUDE}{}
fig, axes = plt.subplots(1, 3, figsize=(13, 4))
for run_id, m, v, g in RUNS:
    d = load(run_id)
    label = f"M={{m}} V={{v}} g={{g}}"
    for ax, key in zip(axes, ["S_vN", "S_2", "S_min"]):
        ax.plot(d["decayed_fraction"], [s / m for s in d[key]], label=label)
for ax, key in zip(axes, ["S_vN", "S_2", "S_min"]):
    ax.set_xlabel("1 - m/M")
    ax.set_ylabel(f"{{key}} / M")
axes[0].legend(fontsize="small")
fig.tight_layout()
fig.savefig(HERE / "entropy_vs_decayed_fraction.png", dpi=150)
"#,
        runs_literal(runs)
    )
}

fn entropy_vs_scaled_time(runs: &[RunRow]) -> String {
    format!(
        r#"{PRELUDE}{}
fig, ax = plt.subplots(figsize=(6, 4))
for run_id, m, v, g in RUNS:
    d = load(run_id)
    ax.plot([t / m for t in d["t"]], [s / m for s in d["S_vN"]], label=f"M={{m}} V={{v}} g={{g}}")
ax.axhline(0.6931471805599453, color="grey", ls=":", lw=1)
ax.set_xlabel("t / M")
ax.set_ylabel("S_vN / M")
ax.legend(fontsize="small")
fig.tight_layout()
fig.savefig(HERE / "entropy_vs_scaled_time.png", dpi=150)
"#,
        runs_literal(runs)
    )
}

fn schmidt_trajectories(runs: &[RunRow], kinks: &[(String, f64)]) -> String {
    let mut lit = String::from("# first-crossing times per run from kinks.csv\nKINKS = {\n");
    for r in runs {
        let ts: Vec<String> = kinks.iter().filter(|(id, _)| *id == r.run_id).map(|(_, t)| format!("{t:?}")).collect();
        lit.push_str(&format!("    {}: [{}],\n", py_str(&r.run_id), ts.join(", ")));
    }
    lit.push_str("}\n");
    format!(
        r#"{PRELUDE}{}
{lit}
for run_id, m, v, g in RUNS:
    d = load(run_id)
    k = len([c for c in d if c.startswith("lambda_")])
    fig, axes = plt.subplots(1, 3, figsize=(13, 4))
    for i in range(1, k + 1):
        axes[0].plot(d["t"], d[f"lambda_{{i}}"], label=f"lambda_{{i}}")
        axes[1].plot(d["t"], d[f"eps_{{i}}"], label=f"eps_{{i}}")
    axes[2].plot(d["t"], d["S_min"], color="k")
    for t_c in KINKS[run_id]:
        for ax in axes:
            ax.axvline(t_c, color="r", ls="--", lw=0.8)
    axes[1].set_ylim(0, 12)
    for ax, name in zip(axes, ["Schmidt values", "entanglement levels", "S_min"]):
        ax.set_xlabel("t")
        ax.set_title(name)
    axes[0].legend(fontsize="small")
    fig.suptitle(f"M={{m}} V={{v}} g={{g}}")
    fig.tight_layout()
    fig.savefig(HERE / f"schmidt_{{run_id}}.png", dpi=150)
    plt.close(fig)
"#,
        runs_literal(runs)
    )
}

fn regression_lines(points: &[(String, String, usize, f64, f64)], lines: &[(String, String, String, f64, f64)]) -> String {
    let pts: Vec<String> = points.iter().map(|(v, g, m, df, tc)| format!("    ({v}, {g}, {m}, {df:?}, {tc:?}),")).collect();
    let fits: Vec<String> = lines.iter().map(|(v, g, obs, a, b)| format!("    ({v}, {g}, {}, {a:?}, {b:?}),", py_str(obs))).collect();
    format!(
        r#"import matplotlib

matplotlib.use("Agg")
from pathlib import Path

import matplotlib.pyplot as plt

HERE = Path(__file__).resolve().parent

# (V, g, M, decayed fraction at t_c, t_c) from kinks.csv
POINTS = [
{}
]
# (V, g, observable, intercept, slope) from regression.csv
FITS = [
{}
]

fig, axes = plt.subplots(1, 2, figsize=(11, 4))
panels = {{"decayed_fraction_at_tc": axes[0], "t_c_over_M": axes[1]}}
groups = sorted({{(v, g) for v, g, *_ in POINTS}})
for v, g in groups:
    pts = sorted((m, df, tc) for pv, pg, m, df, tc in POINTS if (pv, pg) == (v, g))
    x = [1.0 / m for m, _, _ in pts]
    line = axes[0].plot(x, [df for _, df, _ in pts], "o", label=f"V={{v}} g={{g}}")[0]
    axes[1].plot(x, [tc / m for m, _, tc in pts], "o", color=line.get_color())
    for fv, fg, obs, a, b in FITS:
        if (fv, fg) == (v, g):
            xs = [0.0, max(x)]
            panels[obs].plot(xs, [a + b * xi for xi in xs], "--", color=line.get_color())
axes[0].set_ylabel("1 - m(t_c)/M")
axes[1].set_ylabel("t_c / M")
for ax in axes:
    ax.set_xlabel("1 / M")
    ax.set_xlim(left=0)
axes[0].legend(fontsize="small")
fig.tight_layout()
fig.savefig(HERE / "regression.png", dpi=150)
"#,
        pts.join("\n"),
        fits.join("\n")
    )
}

fn collapse_panels(runs: &[RunRow], groups: &[(String, String, f64, f64, f64)], t_c: &[(String, f64)], window: f64) -> String {
    let exps: Vec<String> = groups.iter().map(|(v, g, c, b, a)| format!("    ({v}, {g}, {c:?}, {b:?}, {a:?}),")).collect();
    let tcs: Vec<String> = t_c.iter().map(|(id, t)| format!("    {}: {t:?},", py_str(id))).collect();
    format!(
        r#"{PRELUDE}{}
# (V, g, c, b, a) from exponents.csv
EXPONENTS = [
{}
]
# first crossing time per run
T_C = {{
{}
}}
WINDOW = {window:?}

for v, g, c, b, a in EXPONENTS:
    fig, axes = plt.subplots(2, 2, figsize=(10, 8))
    for run_id, m, rv, rg in RUNS:
        if (rv, rg) != (v, g) or run_id not in T_C:
            continue
        d = load(run_id)
        t_c = T_C[run_id]
        sel = [i for i, t in enumerate(d["t"]) if abs(t - t_c) <= WINDOW]
        tau = [d["t"][i] / m for i in sel]
        x = [(d["t"][i] - t_c) / m * m ** (1.0 / c) for i in sel]
        df = [d["decayed_fraction"][i] for i in sel]
        smin = [d["S_min"][i] / m for i in sel]
        axes[0][0].plot(tau, df, label=f"M={{m}}")
        axes[0][1].plot(tau, smin, label=f"M={{m}}")
        axes[1][0].plot(x, [y * m ** (b / c) for y in df], label=f"M={{m}}")
        axes[1][1].plot(x, [y * m ** a for y in smin], label=f"M={{m}}")
    axes[0][0].set_ylabel("1 - m/M")
    axes[0][1].set_ylabel("S_min / M")
    axes[1][0].set_ylabel("(1 - m/M) M^(b/c)")
    axes[1][1].set_ylabel("(S_min / M) M^a")
    for ax in axes[0]:
        ax.set_xlabel("t / M")
    for ax in axes[1]:
        ax.set_xlabel("(t - t_c)/M * M^(1/c)")
    axes[0][0].legend(fontsize="small")
    fig.suptitle(f"V={{v}} g={{g}}: c={{c:.3f}} b={{b:.3f}} a={{a:.3f}}")
    fig.tight_layout()
    fig.savefig(HERE / f"collapse_V{{v}}_g{{g}}.png", dpi=150)
    plt.close(fig)
"#,
        runs_literal(runs),
        exps.join("\n"),
        tcs.join("\n")
    )
}

/// Write the plot scripts into `<sweep>/plots/` and return their paths.
pub fn emit_plots(dir: &Path) -> Result<Vec<PathBuf>, IoError> {
    let runs_path = dir.join("runs.csv");
    let (head, table) = require(&runs_path)?;
    if table.is_empty() {
        return Err(IoError::Csv { path: runs_path.display().to_string(), line: 2, msg: "no runs".into() });
    }
    let (id_c, m_c, v_c, g_c) = (
        column(&head, "run_id", &runs_path)?,
        column(&head, "M", &runs_path)?,
        column(&head, "V", &runs_path)?,
        column(&head, "g", &runs_path)?,
    );
    let num = |s: &str, path: &Path| -> Result<f64, IoError> {
        s.parse::<f64>().map_err(|_| IoError::Csv { path: path.display().to_string(), line: 0, msg: format!("bad number `{s}`") })
    };
    let mut runs = Vec::new();
    for row in &table {
        let ts = dir.join(&row[id_c]).join("timeseries.csv");
        if !ts.is_file() {
            return Err(IoError::file(&ts, std::io::Error::new(std::io::ErrorKind::NotFound, "missing time series")));
        }
        runs.push(RunRow {
            run_id: row[id_c].clone(),
            m: row[m_c].parse().map_err(|_| IoError::Csv { path: runs_path.display().to_string(), line: 0, msg: "bad M".into() })?,
            v: format!("{:?}", num(&row[v_c], &runs_path)?),
            g: format!("{:?}", num(&row[g_c], &runs_path)?),
        });
    }

    let kinks_path = dir.join("kinks.csv");
    let (kh, kt) = require(&kinks_path)?;
    let (kid, kpair, kord, ktc, kdf) = (
        column(&kh, "run_id", &kinks_path)?,
        column(&kh, "pair", &kinks_path)?,
        column(&kh, "ordinal", &kinks_path)?,
        column(&kh, "t_c", &kinks_path)?,
        column(&kh, "decayed_fraction", &kinks_path)?,
    );
    let mut crossing_times = Vec::new();
    let mut first = Vec::new();
    let mut points = Vec::new();
    for row in &kt {
        if row[kpair] != "1-2" {
            continue;
        }
        let t = num(&row[ktc], &kinks_path)?;
        crossing_times.push((row[kid].clone(), t));
        if row[kord] == "1" {
            first.push((row[kid].clone(), t));
            if let Some(r) = runs.iter().find(|r| r.run_id == row[kid]) {
                points.push((r.v.clone(), r.g.clone(), r.m, num(&row[kdf], &kinks_path)?, t));
            }
        }
    }

    let reg_path = dir.join("regression.csv");
    let (rh, rt) = require(&reg_path)?;
    let (rv, rg, ro, ri, rs) = (
        column(&rh, "V", &reg_path)?,
        column(&rh, "g", &reg_path)?,
        column(&rh, "observable", &reg_path)?,
        column(&rh, "intercept", &reg_path)?,
        column(&rh, "slope", &reg_path)?,
    );
    let mut lines = Vec::new();
    for row in &rt {
        lines.push((
            format!("{:?}", num(&row[rv], &reg_path)?),
            format!("{:?}", num(&row[rg], &reg_path)?),
            row[ro].clone(),
            num(&row[ri], &reg_path)?,
            num(&row[rs], &reg_path)?,
        ));
    }

    let exp_path = dir.join("exponents.csv");
    let (eh, et) = require(&exp_path)?;
    let cols: Vec<usize> = ["V", "g", "c", "b", "a"].iter().map(|c| column(&eh, c, &exp_path)).collect::<Result<_, _>>()?;
    let mut groups = Vec::new();
    for row in &et {
        groups.push((
            format!("{:?}", num(&row[cols[0]], &exp_path)?),
            format!("{:?}", num(&row[cols[1]], &exp_path)?),
            num(&row[cols[2]], &exp_path)?,
            num(&row[cols[3]], &exp_path)?,
            num(&row[cols[4]], &exp_path)?,
        ));
    }
    let window = super::config::Config::load(&dir.join("config.txt")).map(|c| c.collapse_window).unwrap_or(0.5);

    let out = dir.join("plots");
    fs::create_dir_all(&out).map_err(|e| IoError::file(&out, e))?;
    let scripts = [
        ("entropy_vs_decayed_fraction.py", entropy_vs_decayed_fraction(&runs)),
        ("entropy_vs_scaled_time.py", entropy_vs_scaled_time(&runs)),
        ("schmidt_trajectories.py", schmidt_trajectories(&runs, &crossing_times)),
        ("regression.py", regression_lines(&points, &lines)),
        ("collapse.py", collapse_panels(&runs, &groups, &first, window)),
    ];
    let mut paths = Vec::new();
    for (name, body) in scripts {
        let p = out.join(name);
        fs::write(&p, body).map_err(|e| IoError::file(&p, e))?;
        paths.push(p);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_directory_is_a_file_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(emit_plots(dir.path()), Err(IoError::File { .. })));
    }

    #[test]
    fn python_string_literals_are_escaped() {
        assert_eq!(py_str("a\"b\\c"), "\"a\\\"b\\\\c\"");
    }
}
