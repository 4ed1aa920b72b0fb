//! Extended-precision evaluation of every closed-form threshold, written
//! directly from the defining formulas and sharing no code with the library
//! beyond its parameter containers.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use siqs_core::deterministic::basic_reproduction_number;
use siqs_core::thresholds;
use siqs_core::{JumpAtom, LevyMeasure, ModelParams, NoiseParams};

use super::hp::Hp;

fn h(v: f64) -> Hp {
    Hp::from_f64(v)
}

pub struct Config {
    pub name: String,
    pub params: ModelParams,
    pub noise: NoiseParams,
    pub levy: LevyMeasure,
}

pub fn r0(p: &ModelParams) -> Hp {
    h(p.beta) * h(p.a) / (h(p.mu1) * (h(p.mu2) + h(p.delta) + h(p.gamma)))
}

fn sigma_bar(n: &NoiseParams) -> Hp {
    let s1 = h(n.sigma1) * h(n.sigma1);
    let s2 = h(n.sigma2) * h(n.sigma2);
    let s3 = h(n.sigma3) * h(n.sigma3);
    s1.max(s2).max(s3)
}

fn extrema(a: &JumpAtom) -> (Hp, Hp) {
    let e = [h(a.eta1), h(a.eta2), h(a.eta3)];
    let hi = e.iter().cloned().max().unwrap();
    let lo = e.iter().cloned().min().unwrap();
    (hi, lo)
}

pub fn chi(p: &ModelParams, n: &NoiseParams, l: &LevyMeasure) -> Hp {
    let mut jumps = Hp::zero();
    for a in &l.atoms {
        let (hi, lo) = extrema(a);
        jumps = jumps + h(a.weight) * (hi.clone() * hi).max(lo.clone() * lo);
    }
    Hp::int(2) * h(p.mu1) - sigma_bar(n) - jumps
}

/// `(1+x)^q − 1 − q x`
pub fn convexity(x: &Hp, q: &Hp) -> Hp {
    (Hp::int(1) + x.clone()).powf(q) - Hp::int(1) - q.clone() * x.clone()
}

fn q_of(n: u32, p: f64) -> Hp {
    Hp::int(i64::from(n)) * h(p)
}

pub fn ell(l: &LevyMeasure, n: u32, p: f64) -> Hp {
    let q = q_of(n, p);
    let mut sum = Hp::zero();
    for a in &l.atoms {
        let (hi, lo) = extrema(a);
        sum = sum + h(a.weight) * convexity(&hi, &q).max(convexity(&lo, &q));
    }
    sum
}

pub fn gamma(pr: &ModelParams, ns: &NoiseParams, l: &LevyMeasure, n: u32, p: f64) -> Hp {
    let q = q_of(n, p);
    h(pr.mu1) - (q.clone() - Hp::int(1)) * sigma_bar(ns) / Hp::int(2) - ell(l, n, p) / q
}

/// Unsimplified `A·N*^{q−1} − (Γ/2)·N*^q` at the stationary point.
pub fn delta(a: f64, gamma: &Hp, n: u32, p: f64) -> Hp {
    let q = q_of(n, p);
    let one = Hp::int(1);
    let n_star = Hp::int(2) * h(a) * (q.clone() - one.clone()) / (gamma.clone() * q.clone());
    h(a) * n_star.powf(&(q.clone() - one)) - gamma.clone() / Hp::int(2) * n_star.powf(&q)
}

fn log_defect(l: &LevyMeasure) -> Hp {
    let mut sum = Hp::zero();
    for a in &l.atoms {
        let e = h(a.eta2);
        sum = sum + h(a.weight) * (e.clone() - (Hp::int(1) + e).ln());
    }
    sum
}

fn outflow(p: &ModelParams, n: &NoiseParams) -> Hp {
    h(p.mu2) + h(p.delta) + h(p.gamma) + h(n.sigma2) * h(n.sigma2) / Hp::int(2)
}

pub fn r0s(p: &ModelParams, n: &NoiseParams, l: &LevyMeasure) -> Hp {
    let a = h(p.a);
    let sb2 = h(n.sigma_beta) * h(n.sigma_beta);
    let num = h(p.beta) * a.clone() / h(p.mu1) - a.clone() * a * sb2 / (h(p.mu1) * chi(p, n, l)) - log_defect(l);
    num / outflow(p, n)
}

pub fn r0hat(p: &ModelParams, n: &NoiseParams, l: &LevyMeasure) -> Hp {
    let a = h(p.a);
    let sb2 = h(n.sigma_beta) * h(n.sigma_beta);
    let num = h(p.beta) * a.clone() / h(p.mu1)
        - sb2 * a.clone() * a / (Hp::int(2) * h(p.mu1) * h(p.mu1))
        - log_defect(l);
    num / outflow(p, n)
}

pub fn sigma_margin(p: &ModelParams, n: &NoiseParams) -> Hp {
    h(n.sigma_beta) * h(n.sigma_beta) - h(p.mu1) * h(p.beta) / h(p.a)
}

pub fn cond2_margin(p: &ModelParams, n: &NoiseParams, l: &LevyMeasure) -> Hp {
    let sb2 = h(n.sigma_beta) * h(n.sigma_beta);
    h(p.beta) * h(p.beta) / (Hp::int(2) * sb2) - outflow(p, n) - log_defect(l)
}

pub fn rate_bound(p: &ModelParams, n: &NoiseParams, l: &LevyMeasure) -> Hp {
    outflow(p, n) * (r0hat(p, n, l) - Hp::int(1))
}

pub fn persistence_bound(p: &ModelParams, n: &NoiseParams, l: &LevyMeasure) -> Hp {
    let weight = h(p.mu2) / h(p.mu1) + h(p.delta) * h(p.mu3) / (h(p.mu1) * (h(p.mu3) + h(p.k)));
    outflow(p, n) * (r0s(p, n, l) - Hp::int(1)) / (h(p.beta) * weight)
}

/// Exponent pairs exercised for `ℓ`, `Γ` and `Δ`.
pub const NP_PAIRS: [(u32, f64); 4] = [(1, 2.0), (2, 1.5), (1, 1.37), (3, 2.2)];

pub struct Comparison {
    pub quantity: String,
    pub library: f64,
    pub oracle: f64,
    pub rel_err: f64,
}

fn compare(out: &mut Vec<Comparison>, quantity: String, library: f64, oracle: &Hp) {
    let o = oracle.to_f64();
    out.push(Comparison {
        quantity,
        library,
        oracle: o,
        rel_err: (library - o).abs() / o.abs(),
    });
}

/// Every library threshold for `cfg` next to its oracle value. Quantities
/// whose precondition fails (χ ≤ 0, Γ ≤ 0, R0^s ≤ 1, σβ = 0) are skipped.
pub fn compare_all(cfg: &Config) -> Vec<Comparison> {
    let (p, n, l) = (&cfg.params, &cfg.noise, &cfg.levy);
    let mut out = Vec::new();
    compare(&mut out, "R0".into(), basic_reproduction_number(p), &r0(p));
    let chi_o = chi(p, n, l);
    compare(&mut out, "chi".into(), thresholds::chi(p, n, l), &chi_o);
    for (nn, pp) in NP_PAIRS {
        let ell_o = ell(l, nn, pp);
        if ell_o.is_positive() {
            compare(&mut out, format!("ell[{nn},{pp}]"), thresholds::ell_np(l, nn, pp), &ell_o);
        }
        let g_o = gamma(p, n, l, nn, pp);
        compare(&mut out, format!("Gamma[{nn},{pp}]"), thresholds::gamma_np(p, n, l, nn, pp), &g_o);
        if g_o.is_positive() {
            let g = thresholds::gamma_np(p, n, l, nn, pp);
            compare(
                &mut out,
                format!("Delta[{nn},{pp}]"),
                thresholds::delta_sup(p, g, nn, pp).unwrap(),
                &delta(p.a, &g_o, nn, pp),
            );
        }
    }
    compare(&mut out, "R0hat".into(), thresholds::r0hat(p, n, l), &r0hat(p, n, l));
    let margins = thresholds::extinction_margins(p, n, l);
    compare(&mut out, "cond1_sigma_margin".into(), margins.sigma_margin, &sigma_margin(p, n));
    compare(&mut out, "extinction_rate_bound".into(), margins.rate_bound, &rate_bound(p, n, l));
    if n.sigma_beta > 0.0 {
        compare(&mut out, "cond2_margin".into(), margins.cond2_margin, &cond2_margin(p, n, l));
    }
    if chi_o.is_positive() {
        let r0s_o = r0s(p, n, l);
        compare(&mut out, "R0s".into(), thresholds::r0s(p, n, l).unwrap(), &r0s_o);
        if (r0s_o - Hp::int(1)).is_positive() {
            compare(
                &mut out,
                "persistence_bound".into(),
                thresholds::persistence_lower_bound(p, n, l).unwrap(),
                &persistence_bound(p, n, l),
            );
        }
    }
    out
}

/// Random configurations satisfying every positivity constraint.
pub fn random_configs(count: usize, seed: u64) -> Vec<Config> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let mu1 = rng.random_range(0.01..0.2);
            let params = ModelParams {
                a: rng.random_range(0.05..2.0),
                mu1,
                mu2: mu1 + rng.random_range(0.0..0.2),
                mu3: mu1 + rng.random_range(0.0..0.2),
                beta: rng.random_range(0.01..0.5),
                delta: rng.random_range(0.005..0.2),
                gamma: rng.random_range(0.005..0.2),
                k: rng.random_range(0.005..0.2),
            };
            let noise = NoiseParams {
                sigma1: rng.random_range(0.0..0.15),
                sigma2: rng.random_range(0.0..0.15),
                sigma3: rng.random_range(0.0..0.15),
                sigma_beta: rng.random_range(0.0..0.2),
            };
            let atoms = (0..rng.random_range(0..4))
                .map(|_| {
                    JumpAtom::new(
                        rng.random_range(0.1..2.0),
                        rng.random_range(-0.3..0.3),
                        rng.random_range(-0.3..0.3),
                        rng.random_range(-0.3..0.3),
                    )
                })
                .collect();
            Config {
                name: format!("random#{k}"),
                params,
                noise,
                levy: LevyMeasure { atoms },
            }
        })
        .collect()
}

pub fn preset_configs() -> Vec<Config> {
    use siqs_core::presets;
    [presets::example1(), presets::example2a(), presets::example2b(), presets::example2a_cond2(), presets::table1_deterministic()]
        .into_iter()
        .map(|s| Config {
            name: s.name.to_string(),
            params: s.params,
            noise: s.noise,
            levy: s.levy,
        })
        .collect()
}
