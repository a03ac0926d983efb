use sccode::de::{
    bp_threshold, de_run, puncture_for_rate, windowed_de, DeConfig, PunctureReference,
};
use sccode::ldpc::WindowConfig;
use sccode::protograph::regular_36_chain;

mod common;
use common::scalar_threshold;

#[test]
fn uncoupled_protograph_matches_scalar_recursion() {
    let oracle = scalar_threshold();
    assert!((oracle - 0.4294).abs() < 1e-4, "oracle {oracle}");
    let base = regular_36_chain(1, 0).unwrap();
    let thr = bp_threshold(&base, 0.0, 1e-5, &DeConfig::default()).unwrap();
    assert!((thr.epsilon - oracle).abs() < 1e-4, "{} vs {oracle}", thr.epsilon);
}

#[test]
fn monotone_in_epsilon() {
    let base = regular_36_chain(20, 1).unwrap();
    let cfg = DeConfig {
        max_iters: 20_000,
        tol: 1e-12,
    };
    let verdicts: Vec<bool> = (0..=20)
        .map(|k| de_run(&base, k as f64 * 0.05, 0.0, &cfg).unwrap().success)
        .collect();
    let first_fail = verdicts.iter().position(|&s| !s).unwrap();
    assert!(verdicts[first_fail..].iter().all(|&s| !s), "{verdicts:?}");
}

#[test]
fn coupled_chain_below_threshold_succeeds() {
    let base = regular_36_chain(50, 1).unwrap();
    let rho = puncture_for_rate(&base, 0.5, PunctureReference::Asymptotic);
    let out = de_run(&base, 0.48, rho, &DeConfig::default()).unwrap();
    assert!(out.success);
}

#[test]
fn coupled_threshold_half_rate_memory_one() {
    let base = regular_36_chain(50, 1).unwrap();
    let rho = puncture_for_rate(&base, 0.5, PunctureReference::Asymptotic);
    let thr = bp_threshold(&base, rho, 1e-5, &DeConfig::default()).unwrap();
    assert!((thr.epsilon - 0.4881).abs() <= 0.002, "{}", thr.epsilon);
}

#[test]
fn windowed_cannot_beat_full_recursion() {
    let base = regular_36_chain(30, 1).unwrap();
    let window = WindowConfig::new(6, 5000);
    let out = windowed_de(&base, 0.5, 0.0, &window, &DeConfig::default()).unwrap();
    assert!(!out.success);
}
