//! Euler–Maruyama simulation of the jump-diffusion SIQS system.
//!
//! Jumps are applied as raw multiplicative events of a compound Poisson
//! process; since the model is written against the compensated measure, the
//! drift carries the compensation `−(∫η1 dν)S`, `−(∫η2 dν)I`, `−(∫η3 dν)Q`.
//! Events are applied at the end of the step that contains them, in time
//! order.
//!
//! All randomness lives in a [`NoiseRecord`], so a path can be replayed and
//! the dominating auxiliary process can be driven by exactly the same noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Diagnostics, LevyMeasure, ModelParams, NoiseParams, PathOutput, State, TimeGrid};

/// Value a non-positive component is reset to.
pub const CLAMP_FLOOR: f64 = 1e-12;

const BROWNIAN_STREAM: u64 = 0;
const JUMP_STREAM: u64 = 1;

/// Brownian increments for one step, in driver order `W1, W2, W3, Wβ`.
pub type Increments = [f64; 4];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub time: f64,
    /// Step `j` whose interval `(j·dt, (j+1)·dt]` contains `time`.
    pub step: usize,
    pub atom: usize,
}

/// One path's worth of driving noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseRecord {
    pub grid: TimeGrid,
    pub seed: u64,
    /// `grid.steps` entries, each `N(0, dt)` per driver.
    pub increments: Vec<Increments>,
    /// Sorted by time.
    pub jumps: Vec<JumpEvent>,
}

impl NoiseRecord {
    /// Jump events of step `step`, located by binary search.
    pub fn jumps_in_step(&self, step: usize) -> &[JumpEvent] {
        let start = self.jumps.partition_point(|e| e.step < step);
        let end = start + self.jumps[start..].partition_point(|e| e.step == step);
        &self.jumps[start..end]
    }
}

/// Draws the Brownian increments and the jump events for `grid`.
///
/// Brownian and jump draws come from two independent ChaCha streams under the
/// same key, so changing the jump measure leaves the Brownian increments
/// untouched.
pub fn generate_noise(levy: &LevyMeasure, grid: TimeGrid, seed: u64) -> NoiseRecord {
    let sqrt_dt = grid.dt.sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(BROWNIAN_STREAM);
    let increments = (0..grid.steps)
        .map(|_| {
            let mut inc = [0.0; 4];
            for v in &mut inc {
                let z: f64 = StandardNormal.sample(&mut rng);
                *v = z * sqrt_dt;
            }
            inc
        })
        .collect();

    let mut jumps = Vec::new();
    let rate = levy.total_mass();
    if rate > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(JUMP_STREAM);
        let waiting = Exp::new(rate).expect("positive jump rate");
        let t_end = grid.t_end();
        let mut t = 0.0;
        loop {
            t += waiting.sample(&mut rng);
            if t > t_end {
                break;
            }
            if t <= 0.0 {
                continue;
            }
            let target = rng.random::<f64>() * rate;
            let mut acc = 0.0;
            let mut atom = levy.atoms.len() - 1;
            for (k, a) in levy.atoms.iter().enumerate() {
                acc += a.weight;
                if target < acc {
                    atom = k;
                    break;
                }
            }
            let step = ((t / grid.dt).ceil() as usize).clamp(1, grid.steps) - 1;
            jumps.push(JumpEvent { time: t, step, atom });
        }
    }

    NoiseRecord {
        grid,
        seed,
        increments,
        jumps,
    }
}

/// Model quantities that stay fixed along a path.
#[derive(Debug, Clone)]
pub(crate) struct Stepper<'a> {
    params: &'a ModelParams,
    noise: &'a NoiseParams,
    levy: &'a LevyMeasure,
    compensation: [f64; 3],
    floor: f64,
}

/// Parts of one Euler–Maruyama update before clamping, kept separate so the
/// transmission-noise cancellation can be inspected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct StepTerms {
    pub drift: State,
    pub diffusion: State,
    /// `σβ·S·I·ΔWβ`; subtracted from S and added to I.
    pub transmission: f64,
}

impl<'a> Stepper<'a> {
    pub(crate) fn new(params: &'a ModelParams, noise: &'a NoiseParams, levy: &'a LevyMeasure, floor: f64) -> Self {
        Stepper {
            params,
            noise,
            levy,
            compensation: levy.mean_etas(),
            floor,
        }
    }

    pub(crate) fn terms(&self, y: &State, inc: &Increments, dt: f64) -> StepTerms {
        let p = self.params;
        let [c1, c2, c3] = self.compensation;
        let infection = p.beta * y.s * y.i;
        let drift = State::new(
            (p.a - p.mu1 * y.s - infection + p.gamma * y.i + p.k * y.q - c1 * y.s) * dt,
            (infection - p.infected_outflow() * y.i - c2 * y.i) * dt,
            (p.delta * y.i - (p.mu3 + p.k) * y.q - c3 * y.q) * dt,
        );
        let diffusion = State::new(
            self.noise.sigma1 * y.s * inc[0],
            self.noise.sigma2 * y.i * inc[1],
            self.noise.sigma3 * y.q * inc[2],
        );
        StepTerms {
            drift,
            diffusion,
            transmission: self.noise.sigma_beta * y.s * y.i * inc[3],
        }
    }

    /// Continuous part of one step, clamped. Returns the pre-jump state.
    pub(crate) fn continuous(&self, y: &State, inc: &Increments, dt: f64, diag: &mut Diagnostics) -> State {
        let t = self.terms(y, inc, dt);
        let mut next = State::new(
            y.s + t.drift.s + t.diffusion.s - t.transmission,
            y.i + t.drift.i + t.diffusion.i + t.transmission,
            y.q + t.drift.q + t.diffusion.q,
        );
        for v in [&mut next.s, &mut next.i, &mut next.q] {
            diag.clamp(v, self.floor);
        }
        next
    }

    /// Applies one jump in place and returns the increment it added to each
    /// compartment.
    pub(crate) fn jump(&self, y: &mut State, atom: usize) -> State {
        let a = &self.levy.atoms[atom];
        let delta = State::new(a.eta1 * y.s, a.eta2 * y.i, a.eta3 * y.q);
        y.s *= 1.0 + a.eta1;
        y.i *= 1.0 + a.eta2;
        y.q *= 1.0 + a.eta3;
        delta
    }
}

/// Simulates one path with the default clamp floor.
pub fn simulate_path(
    params: &ModelParams,
    noise: &NoiseParams,
    levy: &LevyMeasure,
    s0: State,
    record: &NoiseRecord,
) -> Result<PathOutput> {
    simulate_path_with_floor(params, noise, levy, s0, record, CLAMP_FLOOR)
}

pub fn simulate_path_with_floor(
    params: &ModelParams,
    noise: &NoiseParams,
    levy: &LevyMeasure,
    s0: State,
    record: &NoiseRecord,
    floor: f64,
) -> Result<PathOutput> {
    if let Some(bad) = record.jumps.iter().find(|e| e.atom >= levy.atoms.len()) {
        return Err(Error::InvalidArgument(format!(
            "jump event references atom {} but the measure has {}",
            bad.atom,
            levy.atoms.len()
        )));
    }
    let stepper = Stepper::new(params, noise, levy, floor);
    let grid = record.grid;
    let mut diagnostics = Diagnostics::default();
    let mut states = Vec::with_capacity(grid.len());
    let mut y = s0;
    states.push(y);
    let mut events = record.jumps.iter().peekable();

    for (step, inc) in record.increments.iter().enumerate() {
        y = stepper.continuous(&y, inc, grid.dt, &mut diagnostics);
        while let Some(ev) = events.next_if(|e| e.step == step) {
            stepper.jump(&mut y, ev.atom);
            diagnostics.jump_count += 1;
        }
        if !y.is_finite() {
            return Err(Error::NonFinite { step });
        }
        states.push(y);
    }

    Ok(PathOutput {
        grid,
        states,
        diagnostics,
    })
}

/// Simulates the scalar comparison process
/// `dX = (A − μ1X)dt + σ1S dW1 + σ2I dW2 + σ3Q dW3 + compensated jumps of size η·(S, I, Q)`,
/// reading `S, I, Q` from `companion` and reusing the noise that produced it.
/// Under this coupling the total population of the companion never exceeds
/// `X` except through clamping or rounding.
pub fn simulate_auxiliary_path(
    params: &ModelParams,
    noise: &NoiseParams,
    levy: &LevyMeasure,
    x0: f64,
    record: &NoiseRecord,
    companion: &PathOutput,
) -> Result<Vec<f64>> {
    simulate_auxiliary_path_with_floor(params, noise, levy, x0, record, companion, CLAMP_FLOOR)
}

pub fn simulate_auxiliary_path_with_floor(
    params: &ModelParams,
    noise: &NoiseParams,
    levy: &LevyMeasure,
    x0: f64,
    record: &NoiseRecord,
    companion: &PathOutput,
    floor: f64,
) -> Result<Vec<f64>> {
    if record.grid != companion.grid {
        return Err(Error::GridMismatch(format!(
            "record grid {:?} vs companion grid {:?}",
            record.grid, companion.grid
        )));
    }
    if companion.states.len() != record.grid.len() {
        return Err(Error::GridMismatch(format!(
            "companion has {} states, grid needs {}",
            companion.states.len(),
            record.grid.len()
        )));
    }
    let stepper = Stepper::new(params, noise, levy, floor);
    let dt = record.grid.dt;
    let [c1, c2, c3] = levy.mean_etas();
    let mut scratch = Diagnostics::default();
    let mut xs = Vec::with_capacity(record.grid.len());
    let mut x = x0;
    xs.push(x);
    let mut events = record.jumps.iter().peekable();

    for (step, inc) in record.increments.iter().enumerate() {
        let y = &companion.states[step];
        let compensation = c1 * y.s + c2 * y.i + c3 * y.q;
        x += (params.a - params.mu1 * x - compensation) * dt
            + noise.sigma1 * y.s * inc[0]
            + noise.sigma2 * y.i * inc[1]
            + noise.sigma3 * y.q * inc[2];
        // Jump sizes use the companion's left limits at each event, which are
        // recovered by replaying the companion's own step.
        let mut pre = stepper.continuous(y, inc, dt, &mut scratch);
        while let Some(ev) = events.next_if(|e| e.step == step) {
            x += stepper.jump(&mut pre, ev.atom).total();
        }
        if !x.is_finite() {
            return Err(Error::NonFinite { step });
        }
        xs.push(x);
    }
    Ok(xs)
}
