//! Parameter containers, validation and the finite Lévy measure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rates of the deterministic SIQS system. Units are per day, except `beta`
/// which is per individual per day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Recruitment rate of susceptibles.
    #[serde(rename = "A")]
    pub a: f64,
    /// Natural death rate.
    pub mu1: f64,
    /// Death rate of the infected class.
    pub mu2: f64,
    /// Death rate of the isolated class.
    pub mu3: f64,
    /// Transmission rate.
    pub beta: f64,
    /// Isolation rate.
    pub delta: f64,
    /// Recovery rate from I.
    pub gamma: f64,
    /// Recovery rate from Q.
    pub k: f64,
}

impl ModelParams {
    /// Total outflow rate of the infected class, `mu2 + delta + gamma`.
    pub fn infected_outflow(&self) -> f64 {
        self.mu2 + self.delta + self.gamma
    }

    /// Population level of the disease-free equilibrium, `A / mu1`.
    pub fn carrying_level(&self) -> f64 {
        self.a / self.mu1
    }
}

/// Brownian intensities on S, I, Q and on the transmission rate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseParams {
    #[serde(default)]
    pub sigma1: f64,
    #[serde(default)]
    pub sigma2: f64,
    #[serde(default)]
    pub sigma3: f64,
    #[serde(default)]
    pub sigma_beta: f64,
}

impl NoiseParams {
    pub const ZERO: NoiseParams = NoiseParams {
        sigma1: 0.0,
        sigma2: 0.0,
        sigma3: 0.0,
        sigma_beta: 0.0,
    };

    /// Largest compartment variance, `max(sigma1², sigma2², sigma3²)`.
    pub fn sigma_bar(&self) -> f64 {
        let sq = [self.sigma1, self.sigma2, self.sigma3].map(|s| s * s);
        sq[0].max(sq[1]).max(sq[2])
    }
}

/// A point mass of the jump measure: jumps arrive at rate `weight` and scale
/// S, I, Q by `1 + eta1`, `1 + eta2`, `1 + eta3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpAtom {
    pub weight: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
}

impl JumpAtom {
    pub fn new(weight: f64, eta1: f64, eta2: f64, eta3: f64) -> Self {
        JumpAtom {
            weight,
            eta1,
            eta2,
            eta3,
        }
    }

    pub fn etas(&self) -> [f64; 3] {
        [self.eta1, self.eta2, self.eta3]
    }

    /// Largest of the three multipliers.
    pub fn eta_bar(&self) -> f64 {
        self.eta1.max(self.eta2).max(self.eta3)
    }

    /// Smallest of the three multipliers.
    pub fn eta_under(&self) -> f64 {
        self.eta1.min(self.eta2).min(self.eta3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaExtrema {
    pub eta_bar: f64,
    pub eta_under: f64,
}

/// Finite-activity jump measure represented as weighted atoms. An empty
/// measure means no jumps.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevyMeasure {
    #[serde(default)]
    pub atoms: Vec<JumpAtom>,
}

impl LevyMeasure {
    pub fn empty() -> Self {
        LevyMeasure { atoms: Vec::new() }
    }

    pub fn single(atom: JumpAtom) -> Self {
        LevyMeasure { atoms: vec![atom] }
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Total mass, i.e. the jump arrival rate.
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// `Σ_k w_k · f(eta1_k, eta2_k, eta3_k)`.
    pub fn integral<F>(&self, f: F) -> f64
    where
        F: Fn(f64, f64, f64) -> f64,
    {
        self.atoms
            .iter()
            .map(|a| a.weight * f(a.eta1, a.eta2, a.eta3))
            .sum()
    }

    /// Integral of a function of a whole atom's multipliers, used where the
    /// integrand depends on the per-atom extrema.
    pub fn integral_atoms<F>(&self, f: F) -> f64
    where
        F: Fn(&JumpAtom) -> f64,
    {
        self.atoms.iter().map(|a| a.weight * f(a)).sum()
    }

    /// `∫ eta_i dν` for each compartment; the drift compensation of raw jumps.
    pub fn mean_etas(&self) -> [f64; 3] {
        [
            self.integral(|e1, _, _| e1),
            self.integral(|_, e2, _| e2),
            self.integral(|_, _, e3| e3),
        ]
    }

    pub fn eta_extrema(&self) -> Vec<EtaExtrema> {
        self.atoms
            .iter()
            .map(|a| EtaExtrema {
                eta_bar: a.eta_bar(),
                eta_under: a.eta_under(),
            })
            .collect()
    }
}

/// Compartment densities.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct State {
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "Q")]
    pub q: f64,
}

impl State {
    pub const fn new(s: f64, i: f64, q: f64) -> Self {
        State { s, i, q }
    }

    pub fn total(&self) -> f64 {
        self.s + self.i + self.q
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.s, self.i, self.q]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        State::new(v[0], v[1], v[2])
    }

    pub fn is_finite(&self) -> bool {
        self.s.is_finite() && self.i.is_finite() && self.q.is_finite()
    }

    /// Sup-norm distance.
    pub fn max_abs_diff(&self, other: &State) -> f64 {
        (self.s - other.s)
            .abs()
            .max((self.i - other.i).abs())
            .max((self.q - other.q).abs())
    }
}

/// Uniform grid `t_j = j·dt`, `j = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub dt: f64,
    pub steps: usize,
}

impl TimeGrid {
    /// Builds the grid covering `[0, t_end]`. `t_end` must be an integer
    /// multiple of `dt` up to a relative rounding of 1e-9.
    pub fn new(dt: f64, t_end: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        if !(t_end.is_finite() && t_end >= dt) {
            return Err(Error::InvalidGrid(format!(
                "t_end must be at least dt, got t_end = {t_end}, dt = {dt}"
            )));
        }
        let ratio = t_end / dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::InvalidGrid(format!(
                "t_end = {t_end} is not a multiple of dt = {dt}"
            )));
        }
        Ok(TimeGrid {
            dt,
            steps: steps as usize,
        })
    }

    pub fn t_end(&self) -> f64 {
        self.dt * self.steps as f64
    }

    pub fn time(&self, index: usize) -> f64 {
        self.dt * index as f64
    }

    /// Number of grid points, `steps + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Positivity bookkeeping of a discretised trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Number of component updates that came out non-positive and were reset.
    pub clamp_count: u64,
    /// Most negative pre-clamp value seen (0 when nothing was clamped).
    pub min_pre_clamp: f64,
    /// Jump events applied along the path.
    pub jump_count: u64,
}

impl Diagnostics {
    pub(crate) fn clamp(&mut self, value: &mut f64, floor: f64) {
        if *value <= 0.0 {
            self.clamp_count += 1;
            self.min_pre_clamp = self.min_pre_clamp.min(*value);
            *value = floor;
        }
    }
}

/// A trajectory on a uniform grid together with its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathOutput {
    pub grid: TimeGrid,
    pub states: Vec<State>,
    pub diagnostics: Diagnostics,
}

impl PathOutput {
    pub fn terminal(&self) -> State {
        *self.states.last().expect("path has at least one state")
    }

    pub fn series(&self, pick: impl Fn(&State) -> f64) -> Vec<f64> {
        self.states.iter().map(pick).collect()
    }

    pub fn totals(&self) -> Vec<f64> {
        self.series(State::total)
    }
}

/// One violated constraint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn mentions(&self, field: &str) -> bool {
        self.violations.iter().any(|v| v.field == field)
    }

    fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            field: field.into(),
            message: message.into(),
        });
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (n, v) in self.violations.iter().enumerate() {
            if n > 0 {
                writeln!(f)?;
            }
            write!(f, "{}: {}", v.field, v.message)?;
        }
        Ok(())
    }
}

/// Collects every violated positivity or ordering constraint; never fails.
pub fn validate(params: &ModelParams, noise: &NoiseParams, levy: &LevyMeasure) -> ValidationReport {
    let mut report = ValidationReport::default();

    let rates = [
        ("model.A", params.a),
        ("model.mu1", params.mu1),
        ("model.mu2", params.mu2),
        ("model.mu3", params.mu3),
        ("model.beta", params.beta),
        ("model.delta", params.delta),
        ("model.gamma", params.gamma),
        ("model.k", params.k),
    ];
    for (field, value) in rates {
        if !(value.is_finite() && value > 0.0) {
            report.push(field, format!("must be finite and > 0, got {value}"));
        }
    }
    if params.mu2 < params.mu1 {
        report.push(
            "model.mu2",
            format!("must be >= mu1 ({}), got {}", params.mu1, params.mu2),
        );
    }
    if params.mu3 < params.mu1 {
        report.push(
            "model.mu3",
            format!("must be >= mu1 ({}), got {}", params.mu1, params.mu3),
        );
    }

    let sigmas = [
        ("noise.sigma1", noise.sigma1),
        ("noise.sigma2", noise.sigma2),
        ("noise.sigma3", noise.sigma3),
        ("noise.sigma_beta", noise.sigma_beta),
    ];
    for (field, value) in sigmas {
        if !(value.is_finite() && value >= 0.0) {
            report.push(field, format!("must be finite and >= 0, got {value}"));
        }
    }

    for (k, atom) in levy.atoms.iter().enumerate() {
        if !(atom.weight.is_finite() && atom.weight > 0.0) {
            report.push(
                format!("levy.atoms[{k}].weight"),
                format!("must be finite and > 0, got {}", atom.weight),
            );
        }
        for (idx, eta) in atom.etas().into_iter().enumerate() {
            let field = format!("levy.atoms[{k}].eta{}", idx + 1);
            if !eta.is_finite() {
                report.push(field, format!("must be finite, got {eta}"));
            } else if 1.0 + eta <= 0.0 {
                report.push(field, format!("A2 violated: 1 + eta must be > 0, got eta = {eta}"));
            }
        }
    }
    report
}
