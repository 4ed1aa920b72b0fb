//! The noise-free SIQS system: drift, R0, equilibria and an RK4 integrator.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Diagnostics, ModelParams, PathOutput, State, TimeGrid};

/// Drift of the deterministic system at `s`, returned as `(dS, dI, dQ)`.
pub fn ode_rhs(params: &ModelParams, s: &State) -> State {
    let infection = params.beta * s.s * s.i;
    State {
        s: params.a - params.mu1 * s.s - infection + params.gamma * s.i + params.k * s.q,
        i: infection - params.infected_outflow() * s.i,
        q: params.delta * s.i - (params.mu3 + params.k) * s.q,
    }
}

/// `βA / (μ1 (μ2 + δ + γ))`.
pub fn basic_reproduction_number(params: &ModelParams) -> f64 {
    params.beta * params.a / (params.mu1 * params.infected_outflow())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StableEquilibrium {
    DiseaseFree,
    Endemic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equilibria {
    pub r0: f64,
    pub disease_free: State,
    pub endemic: Option<State>,
}

impl Equilibria {
    /// The globally attracting equilibrium: endemic when `R0 > 1`.
    pub fn stable(&self) -> StableEquilibrium {
        if self.endemic.is_some() {
            StableEquilibrium::Endemic
        } else {
            StableEquilibrium::DiseaseFree
        }
    }
}

/// Disease-free equilibrium `(A/μ1, 0, 0)` and, when `R0 > 1`, the endemic
/// equilibrium. The endemic infected level balances the total-population
/// drift: `A − μ1 S⊛ = (μ2 + δ μ3/(μ3 + k)) I⊛`.
pub fn equilibria(params: &ModelParams) -> Equilibria {
    let r0 = basic_reproduction_number(params);
    let disease_free = State::new(params.carrying_level(), 0.0, 0.0);
    let endemic = (r0 > 1.0).then(|| {
        let isolation_exit = params.mu3 + params.k;
        let s = params.a / (params.mu1 * r0);
        let i = params.a * (1.0 - 1.0 / r0) / (params.mu2 + params.delta * params.mu3 / isolation_exit);
        State::new(s, i, params.delta * i / isolation_exit)
    });
    Equilibria {
        r0,
        disease_free,
        endemic,
    }
}

fn axpy(base: &State, h: f64, dir: &State) -> State {
    State::new(base.s + h * dir.s, base.i + h * dir.i, base.q + h * dir.q)
}

/// Classical fixed-step RK4 on `grid`. Negative components are reset to 0
/// and counted in the diagnostics.
pub fn integrate_ode(params: &ModelParams, s0: State, grid: TimeGrid) -> Result<PathOutput> {
    let dt = grid.dt;
    let mut diagnostics = Diagnostics::default();
    let mut states = Vec::with_capacity(grid.len());
    let mut y = s0;
    states.push(y);

    for step in 0..grid.steps {
        let k1 = ode_rhs(params, &y);
        let k2 = ode_rhs(params, &axpy(&y, 0.5 * dt, &k1));
        let k3 = ode_rhs(params, &axpy(&y, 0.5 * dt, &k2));
        let k4 = ode_rhs(params, &axpy(&y, dt, &k3));
        let w = dt / 6.0;
        let mut next = State::new(
            y.s + w * (k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s),
            y.i + w * (k1.i + 2.0 * k2.i + 2.0 * k3.i + k4.i),
            y.q + w * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q),
        );
        if !next.is_finite() {
            return Err(Error::NonFinite { step });
        }
        for v in [&mut next.s, &mut next.i, &mut next.q] {
            if *v < 0.0 {
                diagnostics.clamp(v, 0.0);
            }
        }
        y = next;
        states.push(y);
    }

    Ok(PathOutput {
        grid,
        states,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{table1, INITIAL_STATE};
    use proptest::prelude::*;

    fn sup(s: &State) -> f64 {
        s.s.abs().max(s.i.abs()).max(s.q.abs())
    }

    #[test]
    fn disease_free_state_annihilates_drift() {
        let d = ode_rhs(&table1(), &State::new(2.0, 0.0, 0.0));
        assert_eq!(d, State::new(0.0, 0.0, 0.0));
    }

    #[test]
    fn decoupled_linear_case() {
        let mut p = table1();
        p.beta = 0.0;
        let d = ode_rhs(&p, &State::new(1.0, 1.0, 0.0));
        assert!((d.s - (p.a - p.mu1 + p.gamma)).abs() < 1e-15);
        assert!((d.i + (p.mu2 + p.delta + p.gamma)).abs() < 1e-15);
        assert!((d.q - p.delta).abs() < 1e-15);
    }

    #[test]
    fn r0_examples() {
        let p = table1();
        // 0.075·0.1 / (0.05·0.13) = 15/13
        assert!((basic_reproduction_number(&p) - 15.0 / 13.0).abs() < 1e-15);
        let mut doubled = p;
        doubled.beta *= 2.0;
        assert!((basic_reproduction_number(&doubled) - 30.0 / 13.0).abs() < 1e-14);
        let mut zero = p;
        zero.beta = 0.0;
        assert_eq!(basic_reproduction_number(&zero), 0.0);
    }

    #[test]
    fn endemic_equilibrium_is_a_fixed_point() {
        let eq = equilibria(&table1());
        assert_eq!(eq.disease_free, State::new(2.0, 0.0, 0.0));
        let e = eq.endemic.expect("R0 > 1");
        // S = 26/15, I = (2/15)·(1/(0.09 + 0.03·0.052/0.092)), Q = 0.03 I / 0.092
        let i = (0.1 - 0.05 * 26.0 / 15.0) / (0.09 + 0.03 * 0.052 / 0.092);
        assert!((e.s - 26.0 / 15.0).abs() < 1e-14);
        assert!((e.i - i).abs() < 1e-14);
        assert!((e.q - 0.03 * i / 0.092).abs() < 1e-14);
        assert!(sup(&ode_rhs(&table1(), &e)) < 1e-12);
        assert_eq!(eq.stable(), StableEquilibrium::Endemic);
    }

    #[test]
    fn no_endemic_state_at_or_below_threshold() {
        let mut p = table1();
        p.beta = 1e-4;
        assert!(equilibria(&p).endemic.is_none());
        // R0 = 1 exactly: β = μ1 (μ2 + δ + γ) / A = 0.065.
        p.beta = 0.065;
        assert_eq!(basic_reproduction_number(&p), 1.0);
        let eq = equilibria(&p);
        assert!(eq.endemic.is_none());
        assert_eq!(eq.stable(), StableEquilibrium::DiseaseFree);
    }

    #[test]
    fn rk4_reaches_endemic_equilibrium() {
        let p = table1();
        let grid = TimeGrid::new(0.01, 2000.0).unwrap();
        let out = integrate_ode(&p, INITIAL_STATE, grid).unwrap();
        assert_eq!(out.states.len(), 200_001);
        assert_eq!(out.diagnostics.clamp_count, 0);
        let e = equilibria(&p).endemic.unwrap();
        assert!(out.terminal().max_abs_diff(&e) < 1e-6);
    }

    #[test]
    fn no_transmission_relaxes_monotonically() {
        let mut p = table1();
        p.beta = 0.0;
        let out = integrate_ode(&p, State::new(0.5, 0.0, 0.0), TimeGrid::new(0.01, 200.0).unwrap()).unwrap();
        for w in out.states.windows(2) {
            assert!(w[1].s >= w[0].s && w[1].s <= 2.0);
            assert_eq!(w[1].i, 0.0);
            assert_eq!(w[1].q, 0.0);
        }
        let exact = 2.0 - 1.5 * (-0.05f64 * 200.0).exp();
        assert!((out.terminal().s - exact).abs() < 1e-10);
    }

    #[test]
    fn fourth_order_convergence() {
        // Richardson: error ratio between dt and dt/2 should approach 16.
        let p = table1();
        let run = |dt: f64| integrate_ode(&p, INITIAL_STATE, TimeGrid::new(dt, 40.0).unwrap()).unwrap().terminal();
        let coarse = run(0.8);
        let mid = run(0.4);
        let fine = run(0.2);
        let ratio = coarse.max_abs_diff(&mid) / mid.max_abs_diff(&fine);
        assert!((12.0..20.0).contains(&ratio), "ratio = {ratio}");
    }

    #[test]
    fn non_finite_state_aborts() {
        let mut p = table1();
        p.beta = 1e300;
        let err = integrate_ode(&p, State::new(1e10, 1e10, 0.0), TimeGrid::new(0.1, 10.0).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NonFinite { step: 0 }));
    }

    proptest! {
        #[test]
        fn total_population_bookkeeping(s in 0.0f64..5.0, i in 0.0f64..5.0, q in 0.0f64..5.0) {
            let p = table1();
            let d = ode_rhs(&p, &State::new(s, i, q));
            let expected = p.a - p.mu1 * s - p.mu2 * i - p.mu3 * q;
            prop_assert!((d.total() - expected).abs() < 1e-13);
        }
    }
}
