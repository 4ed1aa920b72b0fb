//! Configuration files.
//!
//! A configuration is TOML with the sections below; every section except
//! `[model]` is optional when no preset is selected. When a preset is given
//! together with a file, keys present in the file override the preset.
//!
//! ```toml
//! [model]            # rates per day
//! A = 0.08           # recruitment
//! mu1 = 0.04         # natural death
//! mu2 = 0.05         # death of infected
//! mu3 = 0.04         # death of isolated
//! beta = 0.075       # transmission, per individual per day
//! delta = 0.03       # isolation
//! gamma = 0.05       # recovery from I
//! k = 0.052          # recovery from Q
//!
//! [noise]            # Brownian intensities, per sqrt(day)
//! sigma1 = 0.01
//! sigma2 = 0.03
//! sigma3 = 0.07
//! sigma_beta = 0.02
//!
//! [[levy.atoms]]     # one table per jump atom
//! weight = 1.0       # jumps per day
//! eta1 = 0.01        # relative jump of S
//! eta2 = 0.02        # relative jump of I
//! eta3 = 0.05        # relative jump of Q
//!
//! [initial]
//! S = 0.5
//! I = 0.3
//! Q = 0.1
//!
//! [run]
//! t_end = 300.0      # days
//! dt = 0.001         # days
//! seed = 0
//! paths = 100
//! bins = 30
//! ```

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use siqs_core::presets::{self, PaperReported, Scenario};
use siqs_core::{LevyMeasure, ModelParams, NoiseParams, State, ValidationReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "RunSection::default_t_end")]
    pub t_end: f64,
    #[serde(default = "RunSection::default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "RunSection::default_paths")]
    pub paths: usize,
    #[serde(default = "RunSection::default_bins")]
    pub bins: usize,
}

impl RunSection {
    fn default_t_end() -> f64 {
        300.0
    }

    fn default_dt() -> f64 {
        1e-3
    }

    fn default_paths() -> usize {
        100
    }

    fn default_bins() -> usize {
        30
    }
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            t_end: Self::default_t_end(),
            dt: Self::default_dt(),
            seed: 0,
            paths: Self::default_paths(),
            bins: Self::default_bins(),
        }
    }
}

fn default_initial() -> State {
    presets::INITIAL_STATE
}

/// The effective configuration of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: ModelParams,
    #[serde(default)]
    pub noise: NoiseParams,
    #[serde(default)]
    pub levy: LevyMeasure,
    #[serde(default = "default_initial")]
    pub initial: State,
    #[serde(default)]
    pub run: RunSection,
    /// Reference values reported for the preset, shown next to computed ones.
    #[serde(skip)]
    pub paper_reported: PaperReported,
}

impl Config {
    pub fn from_scenario(s: Scenario) -> Self {
        Config {
            model: s.params,
            noise: s.noise,
            levy: s.levy,
            initial: s.initial,
            run: RunSection {
                t_end: s.t_end,
                dt: s.dt,
                ..RunSection::default()
            },
            paper_reported: s.paper_reported,
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Builds the configuration from an optional preset and an optional file.
    pub fn load(preset: Option<&str>, file: Option<&Path>) -> Result<Self> {
        let base = match preset {
            Some(name) => Some(Config::from_scenario(presets::by_name(name).ok_or_else(|| {
                anyhow!("unknown preset `{name}`; available: {}", presets::PRESET_NAMES.join(", "))
            })?)),
            None => None,
        };
        let Some(path) = file else {
            return base.ok_or_else(|| anyhow!("either --config or --preset is required"));
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let origin = path.display().to_string();
        let cfg = match base {
            None => toml::from_str::<Config>(&text).map_err(|e| anyhow!("{origin}: {e}"))?,
            Some(base) => {
                let overrides: toml::Table = toml::from_str(&text).map_err(|e| anyhow!("{origin}: {e}"))?;
                let base_table = toml::Table::try_from(&base)?;
                let mut merged = base_table.clone();
                merge(&mut merged, overrides.clone());
                let mut cfg = Config::deserialize(merged).map_err(|e| {
                    // Re-apply the overrides one key at a time to find the culprit.
                    let culprit = leaves(&overrides, "").into_iter().find(|(_, single)| {
                        let mut probe = base_table.clone();
                        merge(&mut probe, single.clone());
                        Config::deserialize(probe).is_err()
                    });
                    match culprit.and_then(|(field, _)| locate(&text, &field).map(|l| (field, l))) {
                        Some((field, l)) => anyhow!("{origin}, line {l}: {field}: {}", e.message()),
                        None => anyhow!("{origin}: {}", e.message()),
                    }
                })?;
                cfg.paper_reported = base.paper_reported;
                cfg
            }
        };
        check(&cfg, Some(&text), &origin)?;
        Ok(cfg)
    }
}

fn merge(into: &mut toml::Table, from: toml::Table) {
    for (key, value) in from {
        match (into.get_mut(&key), value) {
            (Some(toml::Value::Table(dst)), toml::Value::Table(src)) => merge(dst, src),
            (_, value) => {
                into.insert(key, value);
            }
        }
    }
}

/// Every leaf of `table` as a dotted name and a table holding only that leaf.
fn leaves(table: &toml::Table, prefix: &str) -> Vec<(String, toml::Table)> {
    let mut out = Vec::new();
    for (key, value) in table {
        let name = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
        match value {
            toml::Value::Table(inner) => {
                for (leaf, sub) in leaves(inner, &name) {
                    let mut wrapped = toml::Table::new();
                    wrapped.insert(key.clone(), toml::Value::Table(sub));
                    out.push((leaf, wrapped));
                }
            }
            other => {
                let mut single = toml::Table::new();
                single.insert(key.clone(), other.clone());
                out.push((name, single));
            }
        }
    }
    out
}

/// Line (1-based) of a dotted field such as `model.mu1` or
/// `levy.atoms[2].eta1` in `text`, when it is written out explicitly.
pub fn locate(text: &str, field: &str) -> Option<usize> {
    let (section, key, index) = match field.rsplit_once('.') {
        Some((head, key)) => match head.split_once('[') {
            Some((table, idx)) => (table, key, idx.trim_end_matches(']').parse::<usize>().ok()),
            None => (head, key, None),
        },
        None => ("", field, None),
    };
    let mut current = String::new();
    let mut seen_arrays = 0usize;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if let Some(name) = line.strip_prefix("[[").and_then(|l| l.strip_suffix("]]")) {
            current = name.trim().to_string();
            if current == section {
                seen_arrays += 1;
            }
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            continue;
        }
        let in_section = current == section && index.is_none_or(|i| seen_arrays == i + 1);
        if in_section || section.is_empty() && current.is_empty() {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(n + 1);
                }
            }
        }
    }
    None
}

fn check(cfg: &Config, text: Option<&str>, origin: &str) -> Result<()> {
    let mut report: ValidationReport = siqs_core::model::validate(&cfg.model, &cfg.noise, &cfg.levy);
    for (field, value) in [("initial.S", cfg.initial.s), ("initial.I", cfg.initial.i), ("initial.Q", cfg.initial.q)] {
        if !(value.is_finite() && value > 0.0) {
            report.violations.push(siqs_core::model::Violation {
                field: field.into(),
                message: format!("must be finite and > 0, got {value}"),
            });
        }
    }
    if report.is_ok() {
        return Ok(());
    }
    let lines: Vec<String> = report
        .violations
        .iter()
        .map(|v| match text.and_then(|t| locate(t, &v.field)) {
            Some(l) => format!("  {origin}, line {l}: {}: {}", v.field, v.message),
            None => format!("  {origin}: {}: {}", v.field, v.message),
        })
        .collect();
    bail!("invalid configuration ({} violation(s)):\n{}", lines.len(), lines.join("\n"))
}
