//! Subcommand implementations. Every command is a pure function of the
//! effective configuration and flags.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use siqs_core::deterministic::{equilibria, integrate_ode, Equilibria};
use siqs_core::io::{write_histogram_csv, write_json, write_path_csv};
use siqs_core::mc::{path_seed, run_ensemble, EnsembleConfig, EnsembleSummary};
use siqs_core::model::Diagnostics;
use siqs_core::sde::{generate_noise, simulate_path};
use siqs_core::stats::mean_with_error;
use siqs_core::thresholds::{check_assumptions, AssumptionReport};
use siqs_core::{PathOutput, ThresholdReport, TimeGrid};

use crate::config::Config;
use crate::{Cli, Command, Format};

/// Written next to a simulated path.
#[derive(Debug, Serialize)]
struct PathSidecar {
    base_seed: u64,
    path_index: u64,
    seed: u64,
    dt: f64,
    t_end: f64,
    diagnostics: Diagnostics,
}

pub fn run(cli: &Cli) -> Result<()> {
    let preset = match &cli.command {
        Command::Reproduce { preset } => {
            if cli.preset.as_ref().is_some_and(|p| p != preset) {
                bail!("--preset {} conflicts with reproduce {preset}", cli.preset.as_deref().unwrap_or(""));
            }
            Some(preset.as_str())
        }
        _ => cli.preset.as_deref(),
    };
    let mut cfg = Config::load(preset, cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.run.seed = seed;
    }
    if let Some(dt) = cli.dt {
        cfg.run.dt = dt;
    }
    if let Some(t_end) = cli.t_end {
        cfg.run.t_end = t_end;
    }
    if let Some(paths) = cli.paths {
        cfg.run.paths = paths as usize;
    }

    match &cli.command {
        Command::Thresholds { n_max } => thresholds(&cfg, *n_max, cli.format, cli.out.as_deref()),
        Command::Simulate => simulate(&cfg, cli.format, cli.out.as_deref()),
        Command::Ensemble {
            extinction,
            auxiliary,
            threads,
            progress,
        } => {
            let mut ens = ensemble_config(&cfg)?;
            ens.extinction = *extinction;
            ens.auxiliary = *auxiliary;
            ens.threads = *threads;
            ens.progress = *progress;
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("siqs-ensemble"));
            ensemble(&cfg, &ens, &out)
        }
        Command::Ode => ode(&cfg, cli.format, cli.out.as_deref()),
        Command::Equilibria => {
            let eq = equilibria(&cfg.model);
            if cli.format == Some(Format::Json) {
                emit_json(&eq, cli.out.as_deref())
            } else {
                emit_text(&equilibria_text(&eq), cli.out.as_deref())
            }
        }
        Command::CheckAssumptions { n_max } => {
            let report = check_assumptions(&cfg.model, &cfg.noise, &cfg.levy, *n_max);
            if cli.format == Some(Format::Json) {
                emit_json(&report, cli.out.as_deref())
            } else {
                emit_text(&assumptions_text(&report), cli.out.as_deref())
            }
        }
        Command::Reproduce { preset } => {
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from(format!("siqs-{preset}")));
            reproduce(&cfg, &out)
        }
        Command::DumpConfig => emit_text(&cfg.to_toml()?, cli.out.as_deref()),
    }
}

fn grid(cfg: &Config) -> Result<TimeGrid> {
    Ok(TimeGrid::new(cfg.run.dt, cfg.run.t_end)?)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn emit_text(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => create(path)?.write_all(text.as_bytes())?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => write_json(create(path)?, value)?,
        None => write_json(io::stdout().lock(), value)?,
    }
    Ok(())
}

fn emit_path(path: &PathOutput, format: Option<Format>, out: Option<&Path>) -> Result<()> {
    match (format.unwrap_or(Format::Csv), out) {
        (Format::Csv, Some(p)) => write_path_csv(create(p)?, path)?,
        (Format::Csv, None) => write_path_csv(io::stdout().lock(), path)?,
        (Format::Json, out) => emit_json(path, out)?,
    }
    Ok(())
}

fn threshold_report(cfg: &Config, n_max: u32) -> ThresholdReport {
    ThresholdReport::compute(&cfg.model, &cfg.noise, &cfg.levy, n_max).with_paper_reported(cfg.paper_reported)
}

fn thresholds(cfg: &Config, n_max: u32, format: Option<Format>, out: Option<&Path>) -> Result<()> {
    let report = threshold_report(cfg, n_max);
    if format == Some(Format::Json) {
        return emit_json(&report, out);
    }
    print!("{report}");
    if let Some(path) = out {
        write_json(create(path)?, &report)?;
    }
    Ok(())
}

fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("diagnostics.json")
}

fn simulate_one(cfg: &Config) -> Result<(PathOutput, PathSidecar)> {
    let grid = grid(cfg)?;
    let seed = path_seed(cfg.run.seed, 0);
    let record = generate_noise(&cfg.levy, grid, seed);
    let path = simulate_path(&cfg.model, &cfg.noise, &cfg.levy, cfg.initial, &record)?;
    let sidecar = PathSidecar {
        base_seed: cfg.run.seed,
        path_index: 0,
        seed,
        dt: grid.dt,
        t_end: grid.t_end(),
        diagnostics: path.diagnostics,
    };
    Ok((path, sidecar))
}

fn simulate(cfg: &Config, format: Option<Format>, out: Option<&Path>) -> Result<()> {
    let (path, sidecar) = simulate_one(cfg)?;
    emit_path(&path, format, out)?;
    if let Some(p) = out {
        write_json(create(&sidecar_path(p))?, &sidecar)?;
    }
    let d = path.diagnostics;
    eprintln!(
        "seed {}: {} steps, clamps {}, jumps {}",
        sidecar.seed,
        path.grid.steps,
        d.clamp_count,
        d.jump_count
    );
    Ok(())
}

fn ensemble_config(cfg: &Config) -> Result<EnsembleConfig> {
    let grid = grid(cfg)?;
    let mut ens = EnsembleConfig::new(cfg.run.paths, cfg.run.seed, grid.dt, grid.t_end(), cfg.initial);
    ens.histogram_bins = cfg.run.bins;
    Ok(ens)
}

fn write_ensemble(summary: &EnsembleSummary, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut written = vec![dir.join("summary.json")];
    write_json(create(&written[0])?, summary)?;
    if let Some(h) = &summary.terminal_histograms {
        for (name, hist) in [("S", &h.s), ("I", &h.i), ("Q", &h.q)] {
            let path = dir.join(format!("histogram_{name}.csv"));
            write_histogram_csv(create(&path)?, hist)?;
            written.push(path);
        }
    }
    Ok(written)
}

fn ensemble_text(summary: &EnsembleSummary) -> String {
    let mut lines = Vec::new();
    let m = &summary.terminal_moments;
    lines.push(format!("paths: {}", summary.paths.len()));
    lines.push(format!(
        "terminal mean: S {:.6} ± {:.6}, I {:.6} ± {:.6}, Q {:.6} ± {:.6}",
        m.s.mean, m.s.std_err, m.i.mean, m.i.std_err, m.q.mean, m.q.std_err
    ));
    let (w0, w1) = summary.average_window;
    lines.push(format!(
        "mean time-average of I over [{w0}, {w1}]: {:.6}",
        summary.window_average_moments.i.mean
    ));
    if let Some(h) = &summary.terminal_histograms {
        lines.push(format!("terminal I histogram mode: {:.6}", h.i.mode()));
    }
    if summary.paths.iter().all(|p| p.extinction.is_some()) {
        let slopes = summary.column(|p| p.extinction.map_or(f64::NAN, |e| e.slope));
        let negative = slopes.iter().filter(|&&s| s < 0.0).count();
        lines.push(format!(
            "extinction slopes: {negative}/{} negative, mean {:.6}",
            slopes.len(),
            mean_with_error(&slopes).mean
        ));
    }
    if summary.paths.iter().all(|p| p.auxiliary.is_some()) {
        let xs = summary.column(|p| p.auxiliary.map_or(f64::NAN, |a| a.mean_x));
        lines.push(format!("auxiliary process: mean (1/T)∫X = {:.6}", mean_with_error(&xs).mean));
    }
    lines.push(format!("clamps: {}", summary.total_clamps));
    lines.join("\n") + "\n"
}

fn ensemble(cfg: &Config, ens: &EnsembleConfig, dir: &Path) -> Result<()> {
    let summary = run_ensemble(&cfg.model, &cfg.noise, &cfg.levy, ens)?;
    let written = write_ensemble(&summary, dir)?;
    print!("{}", ensemble_text(&summary));
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn ode(cfg: &Config, format: Option<Format>, out: Option<&Path>) -> Result<()> {
    let path = integrate_ode(&cfg.model, cfg.initial, grid(cfg)?)?;
    emit_path(&path, format, out)
}

fn state_text(y: &siqs_core::State) -> String {
    format!("(S, I, Q) = ({:.6}, {:.6}, {:.6})", y.s, y.i, y.q)
}

fn equilibria_text(eq: &Equilibria) -> String {
    let mut text = format!("R0 = {:.6}\ndisease-free: {}\n", eq.r0, state_text(&eq.disease_free));
    if let Some(e) = &eq.endemic {
        text += &format!("endemic: {}\n", state_text(e));
    }
    let stable = match eq.stable() {
        siqs_core::deterministic::StableEquilibrium::Endemic => "endemic",
        siqs_core::deterministic::StableEquilibrium::DiseaseFree => "disease-free",
    };
    text += &format!("globally asymptotically stable: {stable}\n");
    text
}

fn assumptions_text(r: &AssumptionReport) -> String {
    let verdict = |ok: bool| if ok { "pass" } else { "FAIL" };
    let mut text = String::new();
    for (name, check) in [("A1", &r.a1), ("A2", &r.a2), ("A3", &r.a3)] {
        text += &format!(
            "{name}: {} (integrals {:.6e}, {:.6e}, {:.6e})\n",
            verdict(check.passed),
            check.integrals[0],
            check.integrals[1],
            check.integrals[2]
        );
    }
    text += &format!("A4: {} (integral {:.6e})\n", verdict(r.a4.passed), r.a4.integral);
    for m in &r.a5 {
        let show = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |x| format!("{x:.6}"));
        text += &format!(
            "A5 n={}: {} (witness p {}, Gamma there {}, boundary p {})\n",
            m.n,
            verdict(m.passed()),
            show(m.witness_p),
            show(m.gamma_at_witness),
            show(m.p_boundary)
        );
    }
    text += &format!("all: {}\n", verdict(r.all_passed()));
    text
}

fn reproduce(cfg: &Config, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut written = Vec::new();

    let report = threshold_report(cfg, 3);
    print!("{report}");
    let path = dir.join("thresholds.json");
    write_json(create(&path)?, &report)?;
    written.push(path);

    let eq = equilibria(&cfg.model);
    print!("{}", equilibria_text(&eq));
    let path = dir.join("equilibria.json");
    write_json(create(&path)?, &eq)?;
    written.push(path);

    let ode_grid = TimeGrid::new(0.01, cfg.run.t_end)?;
    let path = dir.join("ode.csv");
    write_path_csv(create(&path)?, &integrate_ode(&cfg.model, cfg.initial, ode_grid)?)?;
    written.push(path);

    let stochastic = cfg.noise != siqs_core::NoiseParams::ZERO || !cfg.levy.atoms.is_empty();
    if stochastic {
        let (sample, sidecar) = simulate_one(cfg)?;
        let path = dir.join("path.csv");
        write_path_csv(create(&path)?, &sample)?;
        write_json(create(&sidecar_path(&path))?, &sidecar)?;
        written.push(path);

        let mut ens = ensemble_config(cfg)?;
        ens.extinction = true;
        let summary = run_ensemble(&cfg.model, &cfg.noise, &cfg.levy, &ens)?;
        print!("{}", ensemble_text(&summary));
        written.extend(write_ensemble(&summary, &dir.join("ensemble"))?);
    }
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}
