//! Finite-length scaling instrumentation for peeling decoding on the BEC:
//! degree-one check trajectories, steady-state (plateau) statistics,
//! empirical failure decomposition of windowed decoding, and the
//! composition of phase failure probabilities.

use crate::channels::frame_rng;
use crate::de::{de_trajectory, DeConfig, DeError};
use crate::ldpc::{peel_decode, window_decode, ChainLayout, PdTrace, TannerGraph, WindowConfig};
use crate::protograph::CoupledBaseMatrix;
use rand::Rng;
use std::collections::VecDeque;
use thiserror::Error;

/// Largest relative variation `(max - min) / max` of the smoothed mean
/// inside a plateau.
pub const PLATEAU_TOLERANCE: f64 = 0.1;
/// Shortest plateau, in normalised peeling steps.
pub const MIN_PLATEAU: f64 = 10.0;
/// Span of the moving average applied before plateau detection, in
/// normalised peeling steps.
pub const SMOOTHING: f64 = 3.0;
/// Successful traces needed for ensemble statistics.
pub const MIN_TRACES: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScalingError {
    #[error("{found} successful traces, at least {needed} needed")]
    TooFewTraces { found: usize, needed: usize },
    #[error("longest plateau spans {longest:.2} normalised steps, fewer than {MIN_PLATEAU}")]
    NoSteadyState { longest: f64 },
    #[error("{name} = {value} is not a probability")]
    NotProbability { name: &'static str, value: f64 },
    #[error("reduced window {reduced} exceeds window {window}")]
    ReducedWindow { reduced: usize, window: usize },
    #[error(transparent)]
    De(#[from] DeError),
}

/// Peeling trace of frame `frame`: each variable is erased with
/// probability `epsilon`, drawn from the frame's own RNG stream.
pub fn trace_frame(graph: &TannerGraph, epsilon: f64, norm: usize, seed: u64, frame: u64) -> PdTrace {
    let mut rng = frame_rng(seed, frame);
    let erased: Vec<bool> = (0..graph.vars()).map(|_| rng.random_bool(epsilon)).collect();
    peel_decode(graph, &erased, norm).trace
}

/// One trace per frame, frames `0..frames`.
pub fn collect_traces(graph: &TannerGraph, epsilon: f64, norm: usize, frames: usize, seed: u64) -> Vec<PdTrace> {
    (0..frames as u64).map(|f| trace_frame(graph, epsilon, norm, seed, f)).collect()
}

/// Half-open range of peeling steps, with its normalisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plateau {
    pub start: usize,
    pub end: usize,
    pub norm: usize,
}

impl Plateau {
    /// Bounds in normalised time.
    pub fn bounds(&self) -> (f64, f64) {
        (self.start as f64 / self.norm as f64, self.end as f64 / self.norm as f64)
    }

    pub fn length(&self) -> f64 {
        (self.end - self.start) as f64 / self.norm as f64
    }
}

/// Longest run of the smoothed `series` whose relative variation stays
/// below [`PLATEAU_TOLERANCE`], if it lasts at least [`MIN_PLATEAU`]
/// normalised steps.
pub fn detect_plateau(series: &[f64], norm: usize) -> Result<Plateau, ScalingError> {
    detect_plateau_smoothed(series, norm, SMOOTHING)
}

/// [`detect_plateau`] with a moving average over `smoothing` normalised
/// steps.
pub fn detect_plateau_smoothed(series: &[f64], norm: usize, smoothing: f64) -> Result<Plateau, ScalingError> {
    let span = ((smoothing * norm as f64).round() as usize).max(1);
    let smooth = moving_average(series, span);
    let (mut best, mut best_len) = ((0, 0), 0);
    let mut maxq: VecDeque<usize> = VecDeque::new();
    let mut minq: VecDeque<usize> = VecDeque::new();
    let mut lo = 0;
    for hi in 0..smooth.len() {
        while maxq.back().is_some_and(|&i| smooth[i] <= smooth[hi]) {
            maxq.pop_back();
        }
        maxq.push_back(hi);
        while minq.back().is_some_and(|&i| smooth[i] >= smooth[hi]) {
            minq.pop_back();
        }
        minq.push_back(hi);
        loop {
            let (max, min) = (smooth[maxq[0]], smooth[minq[0]]);
            if max > 0.0 && max - min < PLATEAU_TOLERANCE * max {
                break;
            }
            lo += 1;
            if maxq[0] < lo {
                maxq.pop_front();
            }
            if minq[0] < lo {
                minq.pop_front();
            }
            if lo > hi {
                break;
            }
        }
        if lo <= hi && hi + 1 - lo > best_len {
            best_len = hi + 1 - lo;
            best = (lo, hi + 1);
        }
    }
    // smoothed index i covers raw steps i..i+span
    let plateau = Plateau {
        start: best.0,
        end: best.1 + span - 1,
        norm,
    };
    if best_len == 0 || plateau.length() < MIN_PLATEAU {
        return Err(ScalingError::NoSteadyState {
            longest: if best_len == 0 { 0.0 } else { plateau.length() },
        });
    }
    Ok(plateau)
}

fn moving_average(series: &[f64], span: usize) -> Vec<f64> {
    if series.len() < span {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(series.len() - span + 1);
    let mut sum: f64 = series[..span].iter().sum();
    out.push(sum / span as f64);
    for i in span..series.len() {
        sum += series[i] - series[i - span];
        out.push(sum / span as f64);
    }
    out
}

/// Ensemble statistics of `r_1` over the plateau of the mean trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub mean: f64,
    /// Across-trace variance of `r_1`, averaged over the plateau.
    pub variance: f64,
    /// Across-trace covariance of `r_1` at lags of `0, 1, 2, ...`
    /// normalised steps, averaged over the plateau; entry 0 is the variance.
    pub lag_covariance: Vec<f64>,
    pub plateau: Plateau,
    /// Successful traces used.
    pub traces: usize,
}

/// Mean `r_1` per peeling step over the traces still running at that step,
/// kept while at least half of the traces are running.
pub fn mean_trajectory(traces: &[&PdTrace]) -> Vec<f64> {
    trajectory_moments(traces).into_iter().map(|(mean, _)| mean).collect()
}

/// Mean and variance of `r_1` per peeling step, over the traces still
/// running, for as long as at least half of them are.
pub fn trajectory_moments(traces: &[&PdTrace]) -> Vec<(f64, f64)> {
    let mut lengths: Vec<usize> = traces.iter().map(|t| t.degree_one.len()).collect();
    lengths.sort_unstable();
    let horizon = lengths.get(lengths.len() / 2).copied().unwrap_or(0);
    (0..horizon)
        .map(|l| {
            let (mut sum, mut squares, mut count) = (0.0, 0.0, 0usize);
            for t in traces.iter().filter(|t| l < t.degree_one.len()) {
                let r = t.r1(l);
                sum += r;
                squares += r * r;
                count += 1;
            }
            let mean = sum / count as f64;
            (mean, (squares / count as f64 - mean * mean).max(0.0))
        })
        .collect()
}

/// Steady-state statistics over successful traces. The plateau is that of
/// the mean trajectory; moments are taken over the traces running at each
/// step.
pub fn steady_state_stats(traces: &[PdTrace]) -> Result<SteadyState, ScalingError> {
    let ok: Vec<&PdTrace> = traces.iter().filter(|t| t.success).collect();
    if ok.len() < MIN_TRACES {
        return Err(ScalingError::TooFewTraces {
            found: ok.len(),
            needed: MIN_TRACES,
        });
    }
    let norm = ok[0].norm;
    let profile = mean_trajectory(&ok);
    let plateau = detect_plateau(&profile, norm)?;
    let steps = plateau.start..plateau.end;
    let mean = profile[steps.clone()].iter().sum::<f64>() / steps.len() as f64;
    let max_lag = (plateau.length() / 2.0).floor().min(5.0) as usize;
    let lag_covariance: Vec<f64> = (0..=max_lag)
        .map(|k| {
            let shift = k * norm;
            let (mut sum, mut count) = (0.0, 0usize);
            for l in plateau.start..plateau.end.saturating_sub(shift) {
                for t in &ok {
                    if l + shift < t.degree_one.len() {
                        sum += (t.r1(l) - profile[l]) * (t.r1(l + shift) - profile[l + shift]);
                        count += 1;
                    }
                }
            }
            if count == 0 {
                0.0
            } else {
                sum / count as f64
            }
        })
        .collect();
    Ok(SteadyState {
        mean,
        variance: lag_covariance[0],
        lag_covariance,
        plateau,
        traces: ok.len(),
    })
}

/// Density-evolution prediction of the steady-state mean `r_1`: the
/// per-iteration decrease of the chain-wide mean erasure probability, summed
/// over chain positions, averaged over the plateau of that decrease.
pub fn de_steady_state_r1(
    base: &CoupledBaseMatrix,
    epsilon: f64,
    puncture: f64,
    de: &DeConfig,
) -> Result<f64, ScalingError> {
    let means = de_trajectory(base, epsilon, puncture, de)?;
    let positions = base.chain().length() as f64;
    let decrease: Vec<f64> = means.windows(2).map(|w| (w[0] - w[1]) * positions).collect();
    // one iteration is one normalised step of the decrease series
    let plateau = detect_plateau(&decrease, 1)?;
    let values = &decrease[plateau.start..plateau.end];
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Inputs of the failure-probability composition for windowed decoding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingInputs {
    /// Probability that the window overtakes the decoding wave.
    pub overtake: f64,
    /// Failure probability of the first (single-wave) phase.
    pub phase1: f64,
    /// Failure probability of the second (two-wave) phase.
    pub phase2: f64,
    pub reduced_window: usize,
    pub window: usize,
}

impl ScalingInputs {
    pub fn validate(&self) -> Result<(), ScalingError> {
        for (name, value) in [("overtake", self.overtake), ("phase1", self.phase1), ("phase2", self.phase2)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ScalingError::NotProbability { name, value });
            }
        }
        if self.reduced_window > self.window {
            return Err(ScalingError::ReducedWindow {
                reduced: self.reduced_window,
                window: self.window,
            });
        }
        Ok(())
    }
}

/// `1 - (1 - Pr{O})(1 - P_f1)(1 - P_f2)`.
pub fn pf_compose(s: &ScalingInputs) -> Result<f64, ScalingError> {
    s.validate()?;
    Ok(1.0 - (1.0 - s.overtake) * (1.0 - s.phase1) * (1.0 - s.phase2))
}

/// How one windowed decoding run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowFate {
    Success,
    /// A window before the last ran out of iterations and released
    /// unresolved bits: it overtook the wave.
    Overtaken,
    /// A window before the last released unresolved bits after the wave
    /// stopped on its own.
    Phase1,
    /// Only the last window released unresolved bits.
    Phase2,
}

/// Per-frame outcome of windowed decoding on the BEC.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowRun {
    pub fate: WindowFate,
    /// Positions of the last window that were fully resolved.
    pub resolved_in_last: usize,
}

/// Windowed BP on the BEC for frame `frame`, classified by its first
/// failure event.
pub fn window_run(
    graph: &TannerGraph,
    layout: &ChainLayout,
    epsilon: f64,
    cfg: WindowConfig,
    seed: u64,
    frame: u64,
) -> WindowRun {
    let mut rng = frame_rng(seed, frame);
    let llr: Vec<f64> = (0..graph.vars())
        .map(|_| {
            if rng.random_bool(epsilon) {
                0.0
            } else {
                crate::channels::LLR_SATURATION
            }
        })
        .collect();
    let out = window_decode(graph, layout, &llr, cfg);
    let (last, earlier) = out.windows.split_last().expect("at least one window");
    let fate = match earlier.iter().find(|w| w.unresolved_emitted > 0) {
        Some(w) if w.budget_exhausted => WindowFate::Overtaken,
        Some(_) => WindowFate::Phase1,
        None if last.unresolved_emitted > 0 => WindowFate::Phase2,
        None => WindowFate::Success,
    };
    let resolved_in_last = (last.position..layout.length)
        .filter(|&t| layout.vars_at(t..t + 1).all(|v| out.posterior[v] != 0.0))
        .count();
    WindowRun {
        fate,
        resolved_in_last,
    }
}

/// Empirical decomposition of windowed-decoding failures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FailureEstimate {
    pub frames: usize,
    pub failures: usize,
    pub inputs: ScalingInputs,
}

impl FailureEstimate {
    pub fn empirical(&self) -> f64 {
        self.failures as f64 / self.frames as f64
    }
}

/// Estimates `Pr{O}`, `P_f1` and `P_f2` (each conditioned on the earlier
/// events not happening) and the reduced window from classified runs.
pub fn estimate_failure(runs: &[WindowRun], window: usize) -> FailureEstimate {
    let count = |f: WindowFate| runs.iter().filter(|r| r.fate == f).count();
    let frames = runs.len();
    let (o, p1, p2) = (count(WindowFate::Overtaken), count(WindowFate::Phase1), count(WindowFate::Phase2));
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let reduced = if frames == 0 {
        0
    } else {
        (runs.iter().map(|r| r.resolved_in_last).sum::<usize>() as f64 / frames as f64).round() as usize
    };
    FailureEstimate {
        frames,
        failures: o + p1 + p2,
        inputs: ScalingInputs {
            overtake: ratio(o, frames),
            phase1: ratio(p1, frames - o),
            phase2: ratio(p2, frames - o - p1),
            reduced_window: reduced.min(window),
            window,
        },
    }
}

/// Wilson score interval at 95% confidence for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}
