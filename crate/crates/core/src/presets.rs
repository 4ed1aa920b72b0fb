//! Built-in scenarios: the reference parameter table and its worked examples.

use serde::{Deserialize, Serialize};

use crate::model::{JumpAtom, LevyMeasure, ModelParams, NoiseParams, State};

/// Initial condition shared by every built-in scenario.
pub const INITIAL_STATE: State = State::new(0.5, 0.3, 0.1);

/// Values printed in the original numerical examples. They are kept for
/// side-by-side display only; the library computes its own values.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaperReported {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub r0s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub r0hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cond1_sigma_margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cond2_margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub extinction_rate_bound: Option<f64>,
}

impl PaperReported {
    pub fn is_empty(&self) -> bool {
        *self == PaperReported::default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: &'static str,
    pub params: ModelParams,
    pub noise: NoiseParams,
    pub levy: LevyMeasure,
    pub initial: State,
    pub t_end: f64,
    pub dt: f64,
    pub paper_reported: PaperReported,
}

/// Reference rates of the deterministic scenario.
pub fn table1() -> ModelParams {
    ModelParams {
        a: 0.1,
        mu1: 0.05,
        mu2: 0.09,
        mu3: 0.052,
        beta: 0.075,
        delta: 0.03,
        gamma: 0.01,
        k: 0.04,
    }
}

fn example_levy() -> LevyMeasure {
    LevyMeasure::single(JumpAtom::new(1.0, 0.01, 0.02, 0.05))
}

/// Persistence example: small white noise plus unit-rate jumps.
pub fn example1() -> Scenario {
    Scenario {
        name: "example1",
        params: table1(),
        noise: NoiseParams {
            sigma1: 0.01,
            sigma2: 0.03,
            sigma3: 0.07,
            sigma_beta: 0.02,
        },
        levy: example_levy(),
        initial: INITIAL_STATE,
        t_end: 300.0,
        dt: 1e-3,
        paper_reported: PaperReported {
            r0s: Some(1.1756),
            ..PaperReported::default()
        },
    }
}

/// Extinction example as stated (strong noise on I and on transmission).
/// With these inputs the second extinction condition does not hold; see
/// [`example2a_cond2`] for a variant that satisfies it.
pub fn example2a() -> Scenario {
    let mut s = example1();
    s.name = "example2a";
    s.noise.sigma2 = 0.12;
    s.noise.sigma_beta = 0.1;
    s.t_end = 500.0;
    s.paper_reported = PaperReported {
        cond2_margin: Some(-0.1374),
        ..PaperReported::default()
    };
    s
}

/// Extinction example through `R̂0^s < 1`: weaker transmission.
pub fn example2b() -> Scenario {
    let mut s = example2a();
    s.name = "example2b";
    s.params.beta = 0.05;
    s.noise.sigma2 = 0.01;
    s.noise.sigma_beta = 0.02;
    s.paper_reported = PaperReported {
        r0hat: Some(0.7650),
        cond1_sigma_margin: Some(-0.0249),
        extinction_rate_bound: Some(-0.0306),
        ..PaperReported::default()
    };
    s
}

/// Example 2a with transmission noise raised to 0.25 so that the
/// `β²/(2σβ²)` extinction condition holds (margin ≈ −0.0853).
pub fn example2a_cond2() -> Scenario {
    let mut s = example2a();
    s.name = "example2a-cond2";
    s.noise.sigma_beta = 0.25;
    s.paper_reported = PaperReported::default();
    s
}

/// Noise-free table parameters.
pub fn table1_deterministic() -> Scenario {
    Scenario {
        name: "table1-deterministic",
        params: table1(),
        noise: NoiseParams::ZERO,
        levy: LevyMeasure::empty(),
        initial: INITIAL_STATE,
        t_end: 2000.0,
        dt: 0.01,
        paper_reported: PaperReported::default(),
    }
}

pub const PRESET_NAMES: [&str; 5] = [
    "example1",
    "example2a",
    "example2b",
    "example2a-cond2",
    "table1-deterministic",
];

pub fn by_name(name: &str) -> Option<Scenario> {
    match name {
        "example1" => Some(example1()),
        "example2a" => Some(example2a()),
        "example2b" => Some(example2b()),
        "example2a-cond2" => Some(example2a_cond2()),
        "table1-deterministic" => Some(table1_deterministic()),
        _ => None,
    }
}
