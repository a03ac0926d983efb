//! Subcommand pipelines.

use rayon::prelude::*;
use serde_json::json;
use std::fmt::Write as _;

use sccode::de::{bp_threshold, windowed_threshold, DeConfig};
use sccode::ldpc::{ChainLayout, PdTrace, TannerGraph, WindowConfig};
use sccode::scaling::{
    estimate_failure, pf_compose, steady_state_stats, trace_frame, trajectory_moments, window_run, MIN_PLATEAU,
    PLATEAU_TOLERANCE, SMOOTHING,
};

use crate::codes::{coupled_base, default_iters, ldpc_puncture, qc_matrix, simulator};
use crate::config::{Command, ExperimentConfig};
use crate::sim::run_point;
use crate::CliError;

/// Runs the configured pipeline on a pool of `threads` workers.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    pool.install(|| match cfg.command {
        Command::Construct => construct(cfg),
        Command::Threshold => threshold(cfg),
        Command::Ber => ber(cfg),
        Command::Trace => trace(cfg),
        Command::Girth => girth(cfg),
    })
}

fn write_to(path: &str, content: &str) -> Result<(), CliError> {
    if path == "-" {
        print!("{content}");
        Ok(())
    } else {
        std::fs::write(path, content).map_err(CliError::from)
    }
}

fn json_text(value: serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(&value).expect("json values serialise");
    text.push('\n');
    text
}

fn construct(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let base = coupled_base(cfg)?;
    let qc = qc_matrix(cfg, &base)?;
    write_to(&cfg.output, &(cfg.header() + &qc.to_text()))
}

fn girth(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let base = coupled_base(cfg)?;
    let qc = qc_matrix(cfg, &base)?;
    let value = json!({
        "girth": qc.girth(),
        "four_cycle_free": !qc.has_four_cycle(),
        "block_rows": qc.block_rows(),
        "block_cols": qc.block_cols(),
        "lifting": qc.lifting(),
        "config_hash": cfg.hash,
    });
    write_to(&cfg.output, &json_text(value))
}

fn threshold(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let base = coupled_base(cfg)?;
    let puncture = ldpc_puncture(cfg, &base);
    let de = DeConfig::default();
    let runtime = |e: sccode::de::DeError| CliError::Config(e.to_string());
    let window = cfg.window.or(0);
    let found = if window == 0 {
        bp_threshold(&base, puncture, cfg.tol, &de).map_err(runtime)?
    } else {
        let w = WindowConfig::new(window, cfg.iters.or(default_iters(cfg, window)));
        windowed_threshold(&base, puncture, &w, cfg.tol, &de).map_err(runtime)?
    };
    let design = base.design_rate();
    let value = json!({
        "epsilon_bp": found.epsilon,
        "iterations": found.iterations,
        "bisection_steps": found.bisection_steps,
        "puncture": puncture,
        "design_rate": format!("{design}"),
        "window": window,
        "config_hash": cfg.hash,
    });
    write_to(&cfg.output, &json_text(value))
}

fn ber(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let sim = simulator(cfg)?;
    let mut out = cfg.header();
    out.push_str("channel_param,frames,bits,bit_errors,frame_errors,ber,ber_low,ber_high,fer,fer_low,fer_high\n");
    for (i, &param) in cfg.params.iter().enumerate() {
        let p = run_point(sim.as_ref(), cfg.channel, param, cfg.frames, cfg.target_errors, cfg.seed, i as u64)?;
        let (lo, hi) = p.fer_interval();
        let (ber_lo, ber_hi) = p.ber_interval();
        writeln!(
            out,
            "{},{},{},{},{},{:e},{:e},{:e},{:e},{:e},{:e}",
            p.param,
            p.frames,
            p.bits,
            p.bit_errors,
            p.frame_errors,
            p.ber(),
            ber_lo,
            ber_hi,
            p.fer(),
            lo,
            hi
        )
        .expect("string write");
    }
    write_to(&cfg.output, &out)
}

fn mean_var(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / v.len() as f64;
    (mean, var)
}

fn trace(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let base = coupled_base(cfg)?;
    let qc = qc_matrix(cfg, &base)?;
    let graph = TannerGraph::from_matrix(&qc.to_sparse());
    let norm = base.vars_per_position() * cfg.lifting;
    let epsilon = cfg.params[0];
    let traces: Vec<PdTrace> = (0..cfg.frames as u64)
        .into_par_iter()
        .map(|f| trace_frame(&graph, epsilon, norm, cfg.seed, f))
        .collect();

    let mut csv = cfg.header();
    writeln!(csv, "#plateau_tolerance={PLATEAU_TOLERANCE}\n#min_plateau={MIN_PLATEAU}\n#smoothing={SMOOTHING}")
        .expect("string write");
    csv.push_str("#averaging=per-code\nstep,mean_r1,var_r1\n");
    let all: Vec<&PdTrace> = traces.iter().collect();
    for (l, (mean, var)) in trajectory_moments(&all).into_iter().enumerate() {
        writeln!(csv, "{},{mean:e},{var:e}", l as f64 / norm as f64).expect("string write");
    }
    write_to(&cfg.output, &csv)?;

    let successes = traces.iter().filter(|t| t.success).count();
    let (tau0_mean, tau0_var) = mean_var(traces.iter().map(PdTrace::tau0));
    let steady = steady_state_stats(&traces);
    let window = cfg.window.or(0);
    let (pf, components) = if window == 0 {
        (1.0 - successes as f64 / traces.len() as f64, serde_json::Value::Null)
    } else {
        let layout = ChainLayout::lifted(&base, cfg.lifting);
        let w = WindowConfig::new(window, cfg.iters.or(default_iters(cfg, window)));
        if !w.is_valid(&layout) {
            return Err(CliError::Config(format!("window {window} does not fit the chain")));
        }
        let runs: Vec<_> = (0..cfg.frames as u64)
            .into_par_iter()
            .map(|f| window_run(&graph, &layout, epsilon, w, cfg.seed, f))
            .collect();
        let est = estimate_failure(&runs, window);
        let pf = pf_compose(&est.inputs).map_err(|e| CliError::Runtime(e.to_string()))?;
        let s = est.inputs;
        (
            pf,
            json!({
                "overtake": s.overtake,
                "phase1": s.phase1,
                "phase2": s.phase2,
                "reduced_window": s.reduced_window,
                "window": s.window,
                "empirical": est.empirical(),
            }),
        )
    };
    let summary = json!({
        "epsilon": epsilon,
        "frames": traces.len(),
        "successes": successes,
        "tau0_mean": tau0_mean,
        "tau0_var": tau0_var,
        "plateau_bounds": steady.as_ref().ok().map(|s| [s.plateau.bounds().0, s.plateau.bounds().1]),
        "steady_state": match &steady {
            Ok(s) => json!({
                "mean_r1": s.mean,
                "var_r1": s.variance,
                "lag_covariance": s.lag_covariance,
                "traces": s.traces,
            }),
            Err(e) => json!({ "error": e.to_string() }),
        },
        "pf_estimate": pf,
        "pf_components": components,
        "plateau_tolerance": PLATEAU_TOLERANCE,
        "min_plateau": MIN_PLATEAU,
        "smoothing": SMOOTHING,
        "averaging": "per-code",
        "config_hash": cfg.hash,
    });
    let text = json_text(summary);
    match &cfg.summary {
        Some(path) => write_to(path, &text),
        None => {
            eprint!("{text}");
            Ok(())
        }
    }
}
