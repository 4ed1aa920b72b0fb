//! Closed-form stochastic thresholds, extinction margins and moment bounds.
//!
//! Every function here is a direct evaluation in double precision. The
//! integration tests check each of them against an independent
//! extended-precision evaluation.

use std::fmt;

use serde::Serialize;

use crate::deterministic::basic_reproduction_number;
use crate::error::{Error, Result};
use crate::model::{JumpAtom, LevyMeasure, ModelParams, NoiseParams};
use crate::presets::PaperReported;

/// `g(x) = (1+x)^q − 1 − q·x`, evaluated without the cancellation of the
/// naive form. Non-negative on `(−1, ∞)` for `q ≥ 1`, zero only at `x = 0`.
pub fn jump_convexity(x: f64, q: f64) -> f64 {
    (q * x.ln_1p()).exp_m1() - q * x
}

/// `χ = 2μ1 − σ̄ − ∫ max(η̄², η̲²) dν`.
pub fn chi(params: &ModelParams, noise: &NoiseParams, levy: &LevyMeasure) -> f64 {
    let jumps = levy.integral_atoms(|a| {
        let (hi, lo) = (a.eta_bar(), a.eta_under());
        (hi * hi).max(lo * lo)
    });
    2.0 * params.mu1 - noise.sigma_bar() - jumps
}

/// `(ρ̂, ρ̌)` for one atom: the convexity function at the atom's largest and
/// smallest multiplier with exponent `q = n·p`.
pub fn rho_pair(atom: &JumpAtom, n: u32, p: f64) -> (f64, f64) {
    let q = f64::from(n) * p;
    (
        jump_convexity(atom.eta_bar(), q),
        jump_convexity(atom.eta_under(), q),
    )
}

/// `ℓ_{n,p} = ∫ max(ρ̂, ρ̌) dν`.
pub fn ell_np(levy: &LevyMeasure, n: u32, p: f64) -> f64 {
    levy.integral_atoms(|a| {
        let (hat, check) = rho_pair(a, n, p);
        hat.max(check)
    })
}

/// `Γ_{n,p} = μ1 − ((np − 1)/2)·σ̄ − ℓ_{n,p}/(np)`.
pub fn gamma_np(params: &ModelParams, noise: &NoiseParams, levy: &LevyMeasure, n: u32, p: f64) -> f64 {
    let q = f64::from(n) * p;
    params.mu1 - 0.5 * (q - 1.0) * noise.sigma_bar() - ell_np(levy, n, p) / q
}

/// `Δ = sup_{N>0} (A·N^{q−1} − (Γ/2)·N^q)` with `q = n·p`.
///
/// For `q > 1` the maximiser is `N* = 2A(q−1)/(Γq)` and the supremum
/// simplifies to `A·N*^{q−1}/q`. For `q = 1` the supremum is `A`, approached
/// as `N → 0⁺`.
pub fn delta_sup(params: &ModelParams, gamma: f64, n: u32, p: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::GammaNonPositive { gamma });
    }
    let q = f64::from(n) * p;
    if q <= 1.0 {
        return Ok(params.a);
    }
    let n_star = 2.0 * params.a * (q - 1.0) / (gamma * q);
    Ok(params.a * n_star.powf(q - 1.0) / q)
}

/// `∫ (η2 − ln(1+η2)) dν`, the log-defect of jumps on the infected class.
pub fn jump_log_defect(levy: &LevyMeasure) -> f64 {
    levy.integral(|_, e2, _| e2 - e2.ln_1p())
}

/// `μ2 + δ + γ + σ2²/2`.
pub fn noisy_infected_outflow(params: &ModelParams, noise: &NoiseParams) -> f64 {
    params.infected_outflow() + 0.5 * noise.sigma2 * noise.sigma2
}

/// Persistence threshold
/// `R0^s = (βA/μ1 − A²σβ²/(μ1χ) − ∫(η2 − ln(1+η2))dν) / (μ2+δ+γ+σ2²/2)`.
pub fn r0s(params: &ModelParams, noise: &NoiseParams, levy: &LevyMeasure) -> Result<f64> {
    let chi = chi(params, noise, levy);
    if !(chi > 0.0) {
        return Err(Error::ChiNonPositive { chi });
    }
    let a = params.a;
    let sb2 = noise.sigma_beta * noise.sigma_beta;
    let numerator = params.beta * a / params.mu1 - a * a * sb2 / (params.mu1 * chi) - jump_log_defect(levy);
    Ok(numerator / noisy_infected_outflow(params, noise))
}

/// Extinction threshold
/// `R̂0^s = (βA/μ1 − σβ²A²/(2μ1²) − ∫(η2 − ln(1+η2))dν) / (μ2+δ+γ+σ2²/2)`.
pub fn r0hat(params: &ModelParams, noise: &NoiseParams, levy: &LevyMeasure) -> f64 {
    let a = params.a;
    let sb2 = noise.sigma_beta * noise.sigma_beta;
    let numerator =
        params.beta * a / params.mu1 - sb2 * a * a / (2.0 * params.mu1 * params.mu1) - jump_log_defect(levy);
    numerator / noisy_infected_outflow(params, noise)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtinctionMargins {
    pub r0hat: f64,
    /// `σβ² − μ1β/A`; the first condition needs this `≤ 0`.
    pub sigma_margin: f64,
    pub cond1_holds: bool,
    /// `β²/(2σβ²) − (μ2+δ+γ+σ2²/2) − ∫(η2 − ln(1+η2))dν`; `+∞` when `σβ = 0`.
    pub cond2_margin: f64,
    pub cond2_holds: bool,
    /// `(μ2+δ+γ+σ2²/2)(R̂0^s − 1)`, the exponential rate bound under the first condition.
    pub rate_bound: f64,
}

pub fn extinction_margins(params: &ModelParams, noise: &NoiseParams, levy: &LevyMeasure) -> ExtinctionMargins {
    let r0hat = r0hat(params, noise, levy);
    let sb2 = noise.sigma_beta * noise.sigma_beta;
    let sigma_margin = sb2 - params.mu1 * params.beta / params.a;
    let outflow = noisy_infected_outflow(params, noise);
    let cond2_margin = if sb2 > 0.0 {
        params.beta * params.beta / (2.0 * sb2) - outflow - jump_log_defect(levy)
    } else {
        f64::INFINITY
    };
    ExtinctionMargins {
        r0hat,
        sigma_margin,
        cond1_holds: r0hat < 1.0 && sigma_margin <= 0.0,
        cond2_margin,
        cond2_holds: cond2_margin < 0.0,
        rate_bound: outflow * (r0hat - 1.0),
    }
}

/// Lower bound on the long-run mean of I for a given `R0^s`:
/// `(1/β)·(μ2/μ1 + δμ3/(μ1(μ3+k)))⁻¹·(μ2+δ+γ+σ2²/2)·(R0^s − 1)`.
pub fn persistence_bound_from_r0s(params: &ModelParams, noise: &NoiseParams, r0s: f64) -> f64 {
    let mortality_weight =
        params.mu2 / params.mu1 + params.delta * params.mu3 / (params.mu1 * (params.mu3 + params.k));
    noisy_infected_outflow(params, noise) * (r0s - 1.0) / (params.beta * mortality_weight)
}

pub fn persistence_lower_bound(params: &ModelParams, noise: &NoiseParams, levy: &LevyMeasure) -> Result<f64> {
    let r0s = r0s(params, noise, levy)?;
    if !(r0s > 1.0) {
        return Err(Error::BoundNotApplicable { r0s });
    }
    Ok(persistence_bound_from_r0s(params, noise, r0s))
}

/// Exponents tried when looking for an A5 witness: `1 + 63·2^{-j}`, `j = 0..=20`.
pub fn a5_grid() -> impl Iterator<Item = f64> {
    (0..=20).map(|j| 1.0 + 63.0 * 0.5f64.powi(j))
}

/// Point closest to 1 tried when the whole grid fails.
const A5_ENDPOINT: f64 = 1.0 + 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralCheck {
    pub passed: bool,
    pub integrals: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalarCheck {
    pub passed: bool,
    pub integral: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentCondition {
    pub n: u32,
    /// Largest tried exponent with `Γ_{n,p} > 0`.
    pub witness_p: Option<f64>,
    pub gamma_at_witness: Option<f64>,
    /// Bisection estimate of `sup {p : Γ_{n,p} > 0}`, capped at 64.
    pub p_boundary: Option<f64>,
}

impl MomentCondition {
    pub fn passed(&self) -> bool {
        self.witness_p.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    #[serde(rename = "A1")]
    pub a1: IntegralCheck,
    #[serde(rename = "A2")]
    pub a2: IntegralCheck,
    #[serde(rename = "A3")]
    pub a3: IntegralCheck,
    #[serde(rename = "A4")]
    pub a4: ScalarCheck,
    #[serde(rename = "A5")]
    pub a5: Vec<MomentCondition>,
}

impl AssumptionReport {
    pub fn all_passed(&self) -> bool {
        self.a1.passed && self.a2.passed && self.a3.passed && self.a4.passed && self.a5.iter().all(|m| m.passed())
    }
}

fn per_compartment(levy: &LevyMeasure, f: impl Fn(f64) -> f64) -> [f64; 3] {
    [
        levy.integral(|e, _, _| f(e)),
        levy.integral(|_, e, _| f(e)),
        levy.integral(|_, _, e| f(e)),
    ]
}

fn moment_condition(params: &ModelParams, noise: &NoiseParams, levy: &LevyMeasure, n: u32) -> MomentCondition {
    let gamma = |p: f64| gamma_np(params, noise, levy, n, p);
    let mut previous_fail: Option<f64> = None;
    let mut witness = None;
    for p in a5_grid() {
        if gamma(p) > 0.0 {
            witness = Some(p);
            break;
        }
        previous_fail = Some(p);
    }
    if witness.is_none() && gamma(A5_ENDPOINT) > 0.0 {
        witness = Some(A5_ENDPOINT);
    }
    let p_boundary = witness.map(|ok| match previous_fail {
        None => ok,
        Some(mut bad) => {
            let mut good = ok;
            for _ in 0..60 {
                let mid = 0.5 * (good + bad);
                if gamma(mid) > 0.0 {
                    good = mid;
                } else {
                    bad = mid;
                }
            }
            good
        }
    });
    MomentCondition {
        n,
        witness_p: witness,
        gamma_at_witness: witness.map(gamma),
        p_boundary,
    }
}

/// Evaluates the jump-coefficient assumptions A1–A4 and searches for an A5
/// exponent for every `n ≤ n_max`. The A5 search is a grid heuristic.
pub fn check_assumptions(params: &ModelParams, noise: &NoiseParams, levy: &LevyMeasure, n_max: u32) -> AssumptionReport {
    let positive_jumps = levy.atoms.iter().all(|a| a.etas().iter().all(|e| 1.0 + e > 0.0));
    let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());

    let a1 = per_compartment(levy, |e| e * e);
    let a2 = per_compartment(levy, |e| e - e.ln_1p());
    let a3 = per_compartment(levy, |e| e.ln_1p().powi(2));
    let a4 = levy.integral_atoms(|a| {
        let lift = (1.0 + a.eta_bar()).powi(2) - 1.0;
        lift * lift
    });

    AssumptionReport {
        a1: IntegralCheck {
            passed: finite(&a1),
            integrals: a1,
        },
        a2: IntegralCheck {
            passed: positive_jumps && finite(&a2),
            integrals: a2,
        },
        a3: IntegralCheck {
            passed: positive_jumps && finite(&a3),
            integrals: a3,
        },
        a4: ScalarCheck {
            passed: a4.is_finite(),
            integral: a4,
        },
        a5: (1..=n_max).map(|n| moment_condition(params, noise, levy, n)).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaEntry {
    pub n: u32,
    pub p: f64,
    pub gamma: f64,
}

/// Second-moment bound data for `n = 1`, `p = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentBound {
    pub n: u32,
    pub p: f64,
    pub gamma: f64,
    pub delta: f64,
    /// `2Δ/Γ`, the long-run bound on `E[N^{np}]`.
    pub asymptote: f64,
}

/// Exponents listed in [`ThresholdReport::gamma_np_table`].
pub const GAMMA_TABLE_P: [f64; 4] = [1.25, 1.5, 2.0, 3.0];

/// Everything computable in closed form for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub r0: f64,
    pub sigma_bar: f64,
    pub chi: f64,
    /// `None` when `χ ≤ 0`.
    pub r0s: Option<f64>,
    pub r0hat: f64,
    pub jump_log_defect: f64,
    pub cond1_sigma_margin: f64,
    pub cond1_holds: bool,
    /// `None` when `σβ = 0`: the second extinction condition is unusable.
    pub cond2_margin: Option<f64>,
    pub cond2_holds: bool,
    pub extinction_rate_bound: f64,
    /// `None` unless `R0^s > 1`.
    pub persistence_lower_bound: Option<f64>,
    pub moment_bound: Option<MomentBound>,
    pub assumption_results: AssumptionReport,
    pub gamma_np_table: Vec<GammaEntry>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paper_reported: Option<PaperReported>,
}

impl ThresholdReport {
    pub fn compute(params: &ModelParams, noise: &NoiseParams, levy: &LevyMeasure, n_max: u32) -> Self {
        let mut notes = Vec::new();
        let chi = chi(params, noise, levy);
        let r0s = match r0s(params, noise, levy) {
            Ok(v) => Some(v),
            Err(e) => {
                notes.push(format!("R0^s undefined: {e}"));
                None
            }
        };
        let persistence_lower_bound = match persistence_lower_bound(params, noise, levy) {
            Ok(v) => Some(v),
            Err(e) => {
                if r0s.is_some() {
                    notes.push(e.to_string());
                }
                None
            }
        };
        let margins = extinction_margins(params, noise, levy);
        if margins.cond2_margin.is_infinite() {
            notes.push("sigma_beta = 0: second extinction condition unusable".to_string());
        }
        let gamma_12 = gamma_np(params, noise, levy, 1, 2.0);
        let moment_bound = delta_sup(params, gamma_12, 1, 2.0).ok().map(|delta| MomentBound {
            n: 1,
            p: 2.0,
            gamma: gamma_12,
            delta,
            asymptote: 2.0 * delta / gamma_12,
        });
        let gamma_np_table = (1..=n_max)
            .flat_map(|n| {
                GAMMA_TABLE_P.iter().map(move |&p| GammaEntry {
                    n,
                    p,
                    gamma: gamma_np(params, noise, levy, n, p),
                })
            })
            .collect();

        ThresholdReport {
            r0: basic_reproduction_number(params),
            sigma_bar: noise.sigma_bar(),
            chi,
            r0s,
            r0hat: margins.r0hat,
            jump_log_defect: jump_log_defect(levy),
            cond1_sigma_margin: margins.sigma_margin,
            cond1_holds: margins.cond1_holds,
            cond2_margin: margins.cond2_margin.is_finite().then_some(margins.cond2_margin),
            cond2_holds: margins.cond2_holds,
            extinction_rate_bound: margins.rate_bound,
            persistence_lower_bound,
            moment_bound,
            assumption_results: check_assumptions(params, noise, levy, n_max),
            gamma_np_table,
            notes,
            paper_reported: None,
        }
    }

    pub fn with_paper_reported(mut self, reported: PaperReported) -> Self {
        self.paper_reported = (!reported.is_empty()).then_some(reported);
        self
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |x| format!("{x:.6}"))
}

impl fmt::Display for ThresholdReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let paper = self.paper_reported.unwrap_or_default();
        let rows: Vec<(&str, String, Option<f64>)> = vec![
            ("R0", format!("{:.6}", self.r0), None),
            ("sigma_bar", format!("{:.6}", self.sigma_bar), None),
            ("chi", format!("{:.6}", self.chi), None),
            ("R0^s", opt(self.r0s), paper.r0s),
            ("R0hat^s", format!("{:.6}", self.r0hat), paper.r0hat),
            ("cond1 sigma margin", format!("{:.6}", self.cond1_sigma_margin), paper.cond1_sigma_margin),
            ("cond1 holds", self.cond1_holds.to_string(), None),
            ("cond2 margin", opt(self.cond2_margin), paper.cond2_margin),
            ("cond2 holds", self.cond2_holds.to_string(), None),
            ("extinction rate bound", format!("{:.6}", self.extinction_rate_bound), paper.extinction_rate_bound),
            ("persistence lower bound", opt(self.persistence_lower_bound), None),
            ("2*Delta/Gamma (n=1,p=2)", opt(self.moment_bound.map(|m| m.asymptote)), None),
            ("assumptions A1-A5", if self.assumption_results.all_passed() { "pass" } else { "FAIL" }.to_string(), None),
        ];
        let show_paper = self.paper_reported.is_some();
        let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
        if show_paper {
            writeln!(f, "{:<width$}  {:>14}  {:>14}", "quantity", "value", "paper_reported")?;
        } else {
            writeln!(f, "{:<width$}  {:>14}", "quantity", "value")?;
        }
        for (name, value, reported) in rows {
            write!(f, "{name:<width$}  {value:>14}")?;
            if let (true, Some(r)) = (show_paper, reported) {
                write!(f, "  {r:>14}")?;
            }
            writeln!(f)?;
        }
        for m in &self.assumption_results.a5 {
            writeln!(
                f,
                "A5 n={}: witness p = {}, boundary p = {}",
                m.n,
                opt(m.witness_p),
                opt(m.p_boundary)
            )?;
        }
        for note in &self.notes {
            writeln!(f, "note: {note}")?;
        }
        Ok(())
    }
}
