//! `pagecurve`: run quench sweeps, analyse them and emit plot scripts.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use pagecurve_core::analysis::ansatz_crossing;
use pagecurve_core::io::{analyze_sweep, emit_plots, run_sweep, Config, SweepAnalysis, SweepOptions};
use pagecurve_core::spectrum::RenyiOrder;

#[derive(Parser)]
#[command(name = "pagecurve", version, about = "Entanglement dynamics of a fermion chain emitting into a bath")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every point of the sweep described by a config file, then analyse it.
    Simulate {
        config: PathBuf,
        /// Output directory (default: `output` from the config, else `<config stem>_out`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; 0 uses all cores.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Number of Schmidt values written per step.
        #[arg(long)]
        topk: Option<usize>,
        /// Rényi orders, e.g. `1,2,inf`.
        #[arg(long)]
        renyi: Option<String>,
    },
    /// Re-run the analysis of a finished sweep directory.
    Analyze { sweep_dir: PathBuf },
    /// Decayed fraction at the Schmidt crossing of the two-value ansatz, 1/(2M).
    Ansatz {
        #[arg(long = "M")]
        m: usize,
    },
    /// Write matplotlib scripts for an analysed sweep directory.
    Plots { sweep_dir: PathBuf },
}

fn output_dir(config: &Path, cfg: &Config, out: Option<PathBuf>) -> PathBuf {
    if let Some(o) = out {
        return o;
    }
    let base = config.parent().unwrap_or(Path::new("."));
    match &cfg.output {
        Some(o) => base.join(o),
        None => {
            let stem = config.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "sweep".into());
            base.join(format!("{stem}_out"))
        }
    }
}

fn print_summary(a: &SweepAnalysis) {
    for r in &a.runs {
        let kink = r.first_kink().map(|k| format!("t_c = {:.4}, 1-m/M = {:.4}", k.t_c, k.decayed_fraction));
        let page = r.page.as_ref().map(|p| format!("t_Page = {:.4}, S/M = {:.4}", p.t_page, p.peak_density));
        println!(
            "{}  M = {}  V = {}  g = {}  {}  {}",
            r.run_id,
            r.m,
            r.v,
            r.g,
            kink.unwrap_or_else(|| "no crossing".into()),
            page.unwrap_or_else(|| "no Page time".into())
        );
    }
    for gr in &a.groups {
        println!("V = {}, g = {} ({} runs)", gr.v, gr.g, gr.runs.len());
        if let Some(r) = &gr.decayed_fraction {
            println!(
                "  1-m/M at t_c vs 1/M: intercept {:.5} ± {:.5}, slope {:.5} ± {:.5}, R² {:.6}",
                r.intercept, r.intercept_stderr, r.slope, r.slope_stderr, r.r_squared
            );
        }
        if let Some(r) = &gr.critical_time {
            println!(
                "  t_c/M vs 1/M:        intercept {:.5} ± {:.5}, slope {:.5} ± {:.5}, R² {:.6}",
                r.intercept, r.intercept_stderr, r.slope, r.slope_stderr, r.r_squared
            );
        }
        if let Some(c) = &gr.collapse {
            println!("  collapse: c = {:.4}, b = {:.4}, a = {:.4}", c.c, c.b, c.a);
        }
        if let Some((beta, amp, n)) = gr.beta {
            println!("  beta = {beta:.4}, A = {amp:.4} (mean of {n} fits)");
        }
    }
    for w in &a.warnings {
        eprintln!("warning: {w}");
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, out, jobs, topk, renyi } => {
            let mut cfg = Config::load(&config)?;
            if let Some(k) = topk {
                anyhow::ensure!(k > 0, "--topk must be positive");
                cfg.topk = k;
            }
            if let Some(list) = renyi {
                cfg.renyi = RenyiOrder::parse_list(&list).context("--renyi")?;
            }
            let dir = output_dir(&config, &cfg, out);
            let outcomes = run_sweep(&cfg, &dir, SweepOptions { jobs })?;
            for o in &outcomes {
                if let Some(step) = o.resumed_from {
                    println!("{}: resumed from step {step}", o.manifest.run_id);
                }
            }
            println!("{} runs written to {}", outcomes.len(), dir.display());
            print_summary(&analyze_sweep(&dir)?);
        }
        Command::Analyze { sweep_dir } => print_summary(&analyze_sweep(&sweep_dir)?),
        Command::Ansatz { m } => println!("{:e}", ansatz_crossing::<f64>(m)?),
        Command::Plots { sweep_dir } => {
            for p in emit_plots(&sweep_dir)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
