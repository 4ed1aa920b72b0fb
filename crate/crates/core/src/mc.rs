//! Reproducible parallel ensembles.
//!
//! Path `i` of an ensemble with base seed `b` is driven by
//! [`generate_noise`] with seed [`path_seed(b, i)`](path_seed), so any single
//! path can be re-run in isolation. Per-path results are collected in index
//! order and all pooled statistics are computed afterwards from that ordered
//! list, which makes the summary independent of the worker count.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, PathFailure, Result};
use crate::model::{Diagnostics, LevyMeasure, ModelParams, NoiseParams, State, TimeGrid};
use crate::sde::{generate_noise, simulate_auxiliary_path, simulate_path};
use crate::stats::{self, Bins, ExtinctionExponent, Histogram, Moment};

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of path `index`: `splitmix64(splitmix64(base) ^ splitmix64(index))`.
pub fn path_seed(base_seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(base_seed) ^ splitmix64(index.wrapping_mul(GOLDEN_GAMMA)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub path_count: usize,
    /// Index of the first path; lets disjoint runs be merged later.
    #[serde(default)]
    pub first_path: u64,
    pub base_seed: u64,
    pub dt: f64,
    pub t_end: f64,
    pub initial: State,
    /// Window for per-path time averages; `[T/2, T]` when absent.
    #[serde(default)]
    pub average_window: Option<(f64, f64)>,
    /// Times at which every path's state is recorded.
    #[serde(default)]
    pub sample_times: Vec<f64>,
    pub histogram_bins: usize,
    /// Estimate extinction exponents of I.
    #[serde(default)]
    pub extinction: bool,
    /// Also simulate the dominating auxiliary process on shared noise.
    #[serde(default)]
    pub auxiliary: bool,
    /// Worker threads; `None` uses the global pool.
    #[serde(skip)]
    pub threads: Option<usize>,
    #[serde(skip)]
    pub progress: bool,
}

impl EnsembleConfig {
    pub fn new(path_count: usize, base_seed: u64, dt: f64, t_end: f64, initial: State) -> Self {
        EnsembleConfig {
            path_count,
            first_path: 0,
            base_seed,
            dt,
            t_end,
            initial,
            average_window: None,
            sample_times: Vec::new(),
            histogram_bins: 30,
            extinction: false,
            auxiliary: false,
            threads: None,
            progress: false,
        }
    }

    pub fn window(&self) -> (f64, f64) {
        self.average_window.unwrap_or((0.5 * self.t_end, self.t_end))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuxiliarySummary {
    /// `(1/T)∫X` over the whole path.
    pub mean_x: f64,
    /// `(1/T)∫X²` over the whole path.
    pub mean_x2: f64,
    /// Fraction of grid points with `N ≤ X(1 + 1e-9)`.
    pub dominated_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSummary {
    pub index: u64,
    pub seed: u64,
    pub terminal: State,
    pub window_average: State,
    pub extinction: Option<ExtinctionExponent>,
    /// States at the configured sample times.
    pub samples: Vec<State>,
    pub diagnostics: Diagnostics,
    pub auxiliary: Option<AuxiliarySummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompartmentHistograms {
    #[serde(rename = "S")]
    pub s: Histogram,
    #[serde(rename = "I")]
    pub i: Histogram,
    #[serde(rename = "Q")]
    pub q: Histogram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompartmentMoments {
    #[serde(rename = "S")]
    pub s: Moment,
    #[serde(rename = "I")]
    pub i: Moment,
    #[serde(rename = "Q")]
    pub q: Moment,
}

impl CompartmentMoments {
    fn of(states: &[State]) -> Self {
        let pick = |f: fn(&State) -> f64| stats::mean_with_error(&states.iter().map(f).collect::<Vec<_>>());
        CompartmentMoments {
            s: pick(|y| y.s),
            i: pick(|y| y.i),
            q: pick(|y| y.q),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub base_seed: u64,
    pub dt: f64,
    pub t_end: f64,
    pub average_window: (f64, f64),
    pub sample_times: Vec<f64>,
    pub histogram_bins: usize,
    pub paths: Vec<PathSummary>,
    /// Terminal-state histograms; absent for fewer than two paths.
    pub terminal_histograms: Option<CompartmentHistograms>,
    pub terminal_moments: CompartmentMoments,
    pub window_average_moments: CompartmentMoments,
    pub total_clamps: u64,
}

impl EnsembleSummary {
    fn from_paths(cfg: &EnsembleConfig, paths: Vec<PathSummary>) -> Result<Self> {
        Self::assemble(
            cfg.base_seed,
            cfg.dt,
            cfg.t_end,
            cfg.window(),
            cfg.sample_times.clone(),
            cfg.histogram_bins,
            paths,
        )
    }

    fn assemble(
        base_seed: u64,
        dt: f64,
        t_end: f64,
        average_window: (f64, f64),
        sample_times: Vec<f64>,
        histogram_bins: usize,
        paths: Vec<PathSummary>,
    ) -> Result<Self> {
        let terminal: Vec<State> = paths.iter().map(|p| p.terminal).collect();
        let averages: Vec<State> = paths.iter().map(|p| p.window_average).collect();
        let terminal_histograms = if terminal.len() >= 2 {
            let hist = |f: fn(&State) -> f64| {
                Histogram::new(&terminal.iter().map(f).collect::<Vec<_>>(), Bins::Count(histogram_bins))
            };
            Some(CompartmentHistograms {
                s: hist(|y| y.s)?,
                i: hist(|y| y.i)?,
                q: hist(|y| y.q)?,
            })
        } else {
            None
        };
        Ok(EnsembleSummary {
            base_seed,
            dt,
            t_end,
            average_window,
            sample_times,
            histogram_bins,
            total_clamps: paths.iter().map(|p| p.diagnostics.clamp_count).sum(),
            terminal_moments: CompartmentMoments::of(&terminal),
            window_average_moments: CompartmentMoments::of(&averages),
            terminal_histograms,
            paths,
        })
    }

    /// Combines two runs of the same configuration over disjoint path
    /// indices. The result equals a single run over the union.
    pub fn merge(self, other: EnsembleSummary) -> Result<Self> {
        let same = self.base_seed == other.base_seed
            && self.dt == other.dt
            && self.t_end == other.t_end
            && self.average_window == other.average_window
            && self.sample_times == other.sample_times
            && self.histogram_bins == other.histogram_bins;
        if !same {
            return Err(Error::InvalidArgument("cannot merge summaries of different configurations".into()));
        }
        let mut paths = self.paths;
        paths.extend(other.paths);
        paths.sort_by_key(|p| p.index);
        if paths.windows(2).any(|w| w[0].index == w[1].index) {
            return Err(Error::InvalidArgument("merged summaries share path indices".into()));
        }
        Self::assemble(
            self.base_seed,
            self.dt,
            self.t_end,
            self.average_window,
            self.sample_times,
            self.histogram_bins,
            paths,
        )
    }

    pub fn column(&self, f: impl Fn(&PathSummary) -> f64) -> Vec<f64> {
        self.paths.iter().map(f).collect()
    }

    /// Total population of every path at sample time `j`.
    pub fn sampled_totals(&self, j: usize) -> Vec<f64> {
        self.column(|p| p.samples[j].total())
    }
}

fn simulate_one(
    params: &ModelParams,
    noise: &NoiseParams,
    levy: &LevyMeasure,
    cfg: &EnsembleConfig,
    grid: TimeGrid,
    sample_idx: &[usize],
    index: u64,
) -> std::result::Result<PathSummary, PathFailure> {
    let seed = path_seed(cfg.base_seed, index);
    let fail = |e: Error| PathFailure {
        index,
        seed,
        step: match e {
            Error::NonFinite { step } => step,
            _ => usize::MAX,
        },
    };
    let record = generate_noise(levy, grid, seed);
    let path = simulate_path(params, noise, levy, cfg.initial, &record).map_err(fail)?;
    let (w0, w1) = cfg.window();
    let avg = |f: fn(&State) -> f64| stats::time_average(&path.series(f), grid.dt, w0, w1);
    let window_average = State::new(avg(|y| y.s).map_err(fail)?, avg(|y| y.i).map_err(fail)?, avg(|y| y.q).map_err(fail)?);
    let extinction = if cfg.extinction {
        Some(stats::extinction_exponent(&path.series(|y| y.i), grid.dt).map_err(fail)?)
    } else {
        None
    };
    let auxiliary = if cfg.auxiliary {
        let xs = simulate_auxiliary_path(params, noise, levy, cfg.initial.total(), &record, &path).map_err(fail)?;
        let t_end = grid.t_end();
        let squares: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let dominated = path
            .states
            .iter()
            .zip(&xs)
            .filter(|(y, &x)| y.total() <= x + 1e-9 * x)
            .count();
        Some(AuxiliarySummary {
            mean_x: stats::time_average(&xs, grid.dt, 0.0, t_end).map_err(fail)?,
            mean_x2: stats::time_average(&squares, grid.dt, 0.0, t_end).map_err(fail)?,
            dominated_fraction: dominated as f64 / xs.len() as f64,
        })
    } else {
        None
    };
    Ok(PathSummary {
        index,
        seed,
        terminal: path.terminal(),
        window_average,
        extinction,
        samples: sample_idx.iter().map(|&k| path.states[k]).collect(),
        diagnostics: path.diagnostics,
        auxiliary,
    })
}

/// Runs every path of `cfg` and reduces them in index order.
pub fn run_ensemble(
    params: &ModelParams,
    noise: &NoiseParams,
    levy: &LevyMeasure,
    cfg: &EnsembleConfig,
) -> Result<EnsembleSummary> {
    if cfg.path_count == 0 {
        return Err(Error::InvalidArgument("path_count must be at least 1".into()));
    }
    let grid = TimeGrid::new(cfg.dt, cfg.t_end)?;
    let (w0, w1) = cfg.window();
    if !(0.0 <= w0 && w0 < w1 && w1 <= grid.t_end() * (1.0 + 1e-12)) {
        return Err(Error::Window { start: w0, end: w1, t_end: grid.t_end() });
    }
    let sample_idx = cfg
        .sample_times
        .iter()
        .map(|&t| {
            let k = (t / grid.dt).round();
            if t >= 0.0 && k as usize <= grid.steps {
                Ok(k as usize)
            } else {
                Err(Error::Window { start: t, end: t, t_end: grid.t_end() })
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let done = AtomicUsize::new(0);
    let total = cfg.path_count;
    let tick = (total / 10).max(1);
    let run = || -> Vec<std::result::Result<PathSummary, PathFailure>> {
        (0..total as u64)
            .into_par_iter()
            .map(|k| {
                let out = simulate_one(params, noise, levy, cfg, grid, &sample_idx, cfg.first_path + k);
                if cfg.progress {
                    let n = done.fetch_add(1, Ordering::Relaxed) + 1;
                    if n.is_multiple_of(tick) || n == total {
                        eprintln!("paths completed: {n}/{total}");
                    }
                }
                out
            })
            .collect()
    };
    let results = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };

    let mut paths = Vec::with_capacity(total);
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(p) => paths.push(p),
            Err(f) => failures.push(f),
        }
    }
    if !failures.is_empty() {
        return Err(Error::EnsembleFailed { failures });
    }
    EnsembleSummary::from_paths(cfg, paths)
}
