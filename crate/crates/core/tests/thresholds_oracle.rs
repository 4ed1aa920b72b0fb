mod support;

use support::oracle::{self, compare_all, preset_configs, random_configs};

const REL_TOL: f64 = 1e-12;

fn assert_matches(cfg: &oracle::Config) {
    for c in compare_all(cfg) {
        assert!(
            c.rel_err <= REL_TOL,
            "{} {}: library {} oracle {} (rel {:.2e})",
            cfg.name,
            c.quantity,
            c.library,
            c.oracle,
            c.rel_err
        );
    }
}

#[test]
fn preset_configurations_match_oracle() {
    for cfg in preset_configs() {
        assert_matches(&cfg);
    }
}

#[test]
fn random_configurations_match_oracle() {
    let configs = random_configs(100, 2024);
    let mut r0s_checked = 0;
    for cfg in &configs {
        assert_matches(cfg);
        r0s_checked += compare_all(cfg).iter().filter(|c| c.quantity == "R0s").count();
    }
    assert!(r0s_checked > 50, "only {r0s_checked} configurations had chi > 0");
}

#[test]
fn frozen_example_values() {
    let cfgs = preset_configs();
    let ex1 = &cfgs[0];
    let r0s = oracle::r0s(&ex1.params, &ex1.noise, &ex1.levy).to_f64();
    assert!((r0s - 1.141_730_137_298_969_4).abs() < 1e-15);
    let bound = oracle::persistence_bound(&ex1.params, &ex1.noise, &ex1.levy).to_f64();
    assert!((bound - 0.115_241_197_139_556_31).abs() < 1e-15);
    let g = oracle::gamma(&ex1.params, &ex1.noise, &ex1.levy, 1, 2.0);
    let d = oracle::delta(ex1.params.a, &g, 1, 2.0);
    assert!((d.to_f64() - 0.107_991_360_691_144_7).abs() < 1e-15);
    // Reported reference values differ from exact arithmetic; they are fixtures only.
    let ex2a = &cfgs[1];
    assert!(oracle::cond2_margin(&ex2a.params, &ex2a.noise, &ex2a.levy).to_f64() > 0.0);
    assert_eq!(siqs_core::presets::example2a().paper_reported.cond2_margin, Some(-0.1374));
}
