use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sccode::de::DeConfig;
use sccode::ldpc::{ChainLayout, TannerGraph, WindowConfig};
use sccode::protograph::{lift, regular_36_chain, CoupledBaseMatrix, ShiftRule};
use sccode::scaling::*;

fn chain(l: usize, m: usize, lifting: usize, seed: u64) -> (CoupledBaseMatrix, TannerGraph) {
    let base = regular_36_chain(l, m).unwrap();
    let qc = lift(&base, lifting, &ShiftRule::Random { seed }).unwrap();
    (base, TannerGraph::from_matrix(&qc.to_sparse()))
}

fn inputs(o: f64, a: f64, b: f64) -> ScalingInputs {
    ScalingInputs {
        overtake: o,
        phase1: a,
        phase2: b,
        reduced_window: 2,
        window: 4,
    }
}

/// Inclusion-exclusion over the three failure events, taken independent.
fn union_probability(o: f64, a: f64, b: f64) -> f64 {
    o + a + b - o * a - o * b - a * b + o * a * b
}

#[test]
fn composition_matches_union_of_independent_events() {
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        for j in 0..10 {
            for k in 0..10 {
                let (o, a, b) = (i as f64 / 9.0, j as f64 / 9.0, k as f64 / 9.0);
                let pf = pf_compose(&inputs(o, a, b)).unwrap();
                worst = worst.max((pf - union_probability(o, a, b)).abs());
                // symmetric in its three arguments
                assert!((pf - pf_compose(&inputs(b, o, a)).unwrap()).abs() < 1e-12);
                assert!((pf - pf_compose(&inputs(a, b, o)).unwrap()).abs() < 1e-12);
                // monotone in each argument
                if i < 9 {
                    assert!(pf_compose(&inputs((i + 1) as f64 / 9.0, a, b)).unwrap() >= pf);
                }
                assert!(pf >= o.max(a).max(b) - 1e-12 && pf <= (o + a + b).min(1.0) + 1e-12);
            }
        }
    }
    assert!(worst < 1e-12, "max deviation {worst}");
    assert!((pf_compose(&inputs(0.1, 0.2, 0.3)).unwrap() - 0.496).abs() < 1e-12);
    assert!(pf_compose(&inputs(-0.1, 0.0, 0.0)).is_err());
    assert!(pf_compose(&inputs(0.0, f64::NAN, 0.0)).is_err());
}

#[test]
fn extreme_erasure_rates() {
    let (_, g) = chain(10, 1, 20, 1);
    let clean = trace_frame(&g, 0.0, 40, 3, 0);
    assert!(clean.success);
    assert_eq!(clean.tau0(), 0.0);
    let lost = trace_frame(&g, 1.0, 40, 3, 0);
    assert!(!lost.success);
    assert_eq!(lost.steps(), 0);
}

#[test]
fn failed_traces_stop_inside_the_chain() {
    let (_, g) = chain(20, 1, 50, 2);
    let traces = collect_traces(&g, 0.5, 100, 50, 4);
    let failed: Vec<_> = traces.iter().filter(|t| !t.success).collect();
    assert!(!failed.is_empty());
    let end = g.vars() as f64 / 100.0;
    for t in failed {
        assert!(t.tau0() >= 0.0 && t.tau0() < end);
    }
}

#[test]
fn ensemble_steady_state_agrees_with_density_evolution() {
    let (base, g) = chain(50, 1, 500, 1);
    let traces = collect_traces(&g, 0.45, 1000, 300, 7);
    let s = steady_state_stats(&traces).unwrap();
    assert!(s.traces >= 250);
    assert!(s.plateau.length() >= MIN_PLATEAU);
    assert!(s.variance > 0.0 && s.lag_covariance[0] == s.variance);
    // correlations decay with the lag
    assert!(s.lag_covariance.windows(2).all(|w| w[1] <= w[0]));
    let predicted = de_steady_state_r1(&base, 0.45, 0.0, &DeConfig::default()).unwrap();
    let deviation = (s.mean - predicted).abs() / predicted;
    assert!(deviation < 0.2, "plateau mean {} vs density evolution {predicted}", s.mean);
}

#[test]
fn successful_frames_show_a_plateau() {
    // Relative fluctuations of r1 shrink with the lifting size; at 20000 a
    // single frame stays within the plateau tolerance.
    let lifting = 20_000;
    let (_, g) = chain(50, 1, lifting, 1);
    let (mut successes, mut plateaus) = (0, 0);
    for frame in 0..200 {
        let t = trace_frame(&g, 0.45, 2 * lifting, 11, frame);
        if t.success {
            successes += 1;
            plateaus += usize::from(detect_plateau(&t.r1_series(), t.norm).is_ok());
        }
    }
    assert!(successes >= 190);
    assert!(plateaus as f64 >= 0.95 * successes as f64, "{plateaus}/{successes} frames with a plateau");
}

#[test]
fn failure_decomposition_reproduces_the_empirical_rate() {
    let (base, g) = chain(30, 1, 60, 3);
    let layout = ChainLayout::lifted(&base, 60);
    let cfg = WindowConfig::new(4, 20);
    let runs: Vec<WindowRun> = (0..400).map(|f| window_run(&g, &layout, 0.38, cfg, 5, f)).collect();
    let est = estimate_failure(&runs, cfg.size);
    assert!(est.failures > 0 && est.failures < est.frames);
    let pf = pf_compose(&est.inputs).unwrap();
    assert!((pf - est.empirical()).abs() < 1e-12);
    assert!(est.inputs.reduced_window <= cfg.size);
    let (lo, hi) = wilson_interval(est.failures, est.frames);
    assert!(lo <= pf && pf <= hi);
}

#[test]
fn wilson_interval_covers_the_true_rate() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let p = 0.07;
    let covered = (0..1000)
        .filter(|_| {
            let hits = (0..200).filter(|_| rng.random_bool(p)).count();
            let (lo, hi) = wilson_interval(hits, 200);
            lo <= p && p <= hi
        })
        .count();
    assert!((930..=975).contains(&covered), "coverage {covered}/1000");
}
