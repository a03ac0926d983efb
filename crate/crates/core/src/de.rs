//! Protograph density evolution on the BEC: full-chain recursion, BP
//! threshold bisection, windowed recursion and the window mean parameter.

use std::ops::Range;

use num_rational::Ratio;
use thiserror::Error;

use crate::channels::puncture_fraction;
use crate::ldpc::WindowConfig;
use crate::protograph::CoupledBaseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum DeError {
    #[error("{name} = {value} is not a probability")]
    NotProbability { name: &'static str, value: f64 },
    #[error("epsilon {epsilon} is not below the windowed threshold {threshold}")]
    AboveThreshold { epsilon: f64, threshold: f64 },
    #[error("window size {window} leaves no steady-state positions in a chain of length {length}")]
    NoSteadyState { window: usize, length: usize },
    #[error("window size {window} is outside 1..={max}")]
    BadWindow { window: usize, max: usize },
}

/// Iteration cap and convergence tolerance of the recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeConfig {
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for DeConfig {
    fn default() -> Self {
        Self {
            max_iters: 100_000,
            tol: 1e-12,
        }
    }
}

/// Which rate the puncturing fraction is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PunctureReference {
    /// Rate of the uncoupled base code, `1 - b_c/b_v`.
    #[default]
    Asymptotic,
    /// Exact rate of the terminated chain.
    Design,
}

fn ratio_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Fraction of code bits to puncture so the chain reaches `target` rate.
pub fn puncture_for_rate(base: &CoupledBaseMatrix, target: f64, reference: PunctureReference) -> f64 {
    let rate = match reference {
        PunctureReference::Asymptotic => base.asymptotic_rate(),
        PunctureReference::Design => base.design_rate(),
    };
    puncture_fraction(ratio_f64(rate), target)
}

/// Erasure probability seen by a code bit under uniform random puncturing.
pub fn effective_erasure(epsilon: f64, puncture: f64) -> f64 {
    puncture + (1.0 - puncture) * epsilon
}

fn check_probability(name: &'static str, value: f64) -> Result<(), DeError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(DeError::NotProbability { name, value })
    }
}

/// Edge-level graph of the coupled protograph; parallel edges are expanded.
#[derive(Debug, Clone)]
pub struct DeGraph {
    length: usize,
    check_positions: usize,
    bc: usize,
    bv: usize,
    check_start: Vec<usize>,
    var_start: Vec<usize>,
    /// Edges sorted by variable, as indices into the check-ordered edge list.
    var_edges: Vec<usize>,
}

impl DeGraph {
    pub fn new(base: &CoupledBaseMatrix) -> Self {
        let (rows, cols) = (base.rows(), base.cols());
        let mut check_start = vec![0; rows + 1];
        let mut per_var: Vec<Vec<usize>> = vec![Vec::new(); cols];
        let mut e = 0;
        for entry in base.entries() {
            for _ in 0..entry.multiplicity {
                per_var[entry.col].push(e);
                e += 1;
            }
            check_start[entry.row + 1] = e;
        }
        for r in 1..=rows {
            check_start[r] = check_start[r].max(check_start[r - 1]);
        }
        let mut var_start = Vec::with_capacity(cols + 1);
        let mut var_edges = Vec::with_capacity(e);
        for list in per_var {
            var_start.push(var_edges.len());
            var_edges.extend(list);
        }
        var_start.push(var_edges.len());
        Self {
            length: base.chain().length(),
            check_positions: base.chain().length() + base.chain().memory(),
            bc: base.checks_per_position(),
            bv: base.vars_per_position(),
            check_start,
            var_start,
            var_edges,
        }
    }

    pub fn edges(&self) -> usize {
        self.var_edges.len()
    }

    pub fn vars(&self) -> usize {
        self.var_start.len() - 1
    }

    fn var_edge_list(&self, v: usize) -> &[usize] {
        &self.var_edges[self.var_start[v]..self.var_start[v + 1]]
    }
}

/// Messages of the erasure recursion: `x` variable-to-check and `y`
/// check-to-variable erasure probabilities, indexed by edge.
struct DeEngine<'g> {
    graph: &'g DeGraph,
    channel: f64,
    x: Vec<f64>,
    y: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'g> DeEngine<'g> {
    fn new(graph: &'g DeGraph, channel: f64) -> Self {
        Self {
            graph,
            channel,
            x: vec![channel; graph.edges()],
            y: vec![1.0; graph.edges()],
            scratch: Vec::new(),
        }
    }

    fn reset(&mut self, checks: Range<usize>, vars: Range<usize>) {
        for c in checks {
            self.y[self.graph.check_start[c]..self.graph.check_start[c + 1]].fill(1.0);
        }
        for v in vars {
            for &e in self.graph.var_edge_list(v) {
                self.x[e] = self.channel;
            }
        }
    }

    /// Writes into `out[k]` the product of `vals` over all indices except `k`.
    fn leave_one_out(vals: &[f64], out: &mut Vec<f64>) {
        out.clear();
        let mut prefix = 1.0;
        for &v in vals {
            out.push(prefix);
            prefix *= v;
        }
        let mut suffix = 1.0;
        for k in (0..vals.len()).rev() {
            out[k] *= suffix;
            suffix *= vals[k];
        }
    }

    fn update_checks(&mut self, checks: Range<usize>) -> bool {
        let mut changed = false;
        let mut vals = Vec::new();
        for c in checks {
            let edges = self.graph.check_start[c]..self.graph.check_start[c + 1];
            vals.clear();
            vals.extend(edges.clone().map(|e| 1.0 - self.x[e]));
            Self::leave_one_out(&vals, &mut self.scratch);
            for (k, e) in edges.enumerate() {
                let y = 1.0 - self.scratch[k];
                changed |= y != self.y[e];
                self.y[e] = y;
            }
        }
        changed
    }

    fn update_vars(&mut self, vars: Range<usize>) -> bool {
        let mut changed = false;
        let mut vals = Vec::new();
        for v in vars {
            let edges = self.graph.var_edge_list(v);
            vals.clear();
            vals.extend(edges.iter().map(|&e| self.y[e]));
            Self::leave_one_out(&vals, &mut self.scratch);
            for (k, &e) in edges.iter().enumerate() {
                let x = self.channel * self.scratch[k];
                changed |= x != self.x[e];
                self.x[e] = x;
            }
        }
        changed
    }

    fn max_message(&self, vars: Range<usize>) -> f64 {
        vars.flat_map(|v| self.graph.var_edge_list(v).iter().map(|&e| self.x[e]))
            .fold(0.0, f64::max)
    }

    /// Erasure probability of the a-posteriori estimate of variable `v`.
    fn posterior(&self, v: usize) -> f64 {
        self.channel
            * self
                .graph
                .var_edge_list(v)
                .iter()
                .map(|&e| self.y[e])
                .product::<f64>()
    }

    /// Iterates on the given subgraph; returns `(iterations, converged)`.
    /// The observer sees every completed iteration.
    fn iterate(
        &mut self,
        checks: Range<usize>,
        vars: Range<usize>,
        cfg: &DeConfig,
        observe: &mut dyn FnMut(&Self),
    ) -> (usize, bool) {
        for it in 1..=cfg.max_iters {
            let a = self.update_checks(checks.clone());
            let b = self.update_vars(vars.clone());
            observe(self);
            if self.max_message(vars.clone()) < cfg.tol {
                return (it, true);
            }
            if !a && !b {
                return (it, false);
            }
        }
        (cfg.max_iters, false)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeOutcome {
    /// Final variable-to-check erasure probability per edge.
    pub edge_erasure: Vec<f64>,
    /// Final a-posteriori erasure probability per variable node.
    pub var_erasure: Vec<f64>,
    pub iterations: usize,
    pub success: bool,
}

/// Runs the recursion on the whole chain, starting from `x_e = ε_v`, until
/// every message is below `cfg.tol` or the budget (or an exact fixed point)
/// is reached.
pub fn de_run(
    base: &CoupledBaseMatrix,
    epsilon: f64,
    puncture: f64,
    cfg: &DeConfig,
) -> Result<DeOutcome, DeError> {
    check_probability("epsilon", epsilon)?;
    check_probability("puncture", puncture)?;
    Ok(de_run_graph(&DeGraph::new(base), effective_erasure(epsilon, puncture), cfg))
}

fn de_run_graph(graph: &DeGraph, channel: f64, cfg: &DeConfig) -> DeOutcome {
    let mut engine = DeEngine::new(graph, channel);
    let checks = 0..graph.check_start.len() - 1;
    let (iterations, success) = engine.iterate(checks, 0..graph.vars(), cfg, &mut |_| {});
    DeOutcome {
        var_erasure: (0..graph.vars()).map(|v| engine.posterior(v)).collect(),
        edge_erasure: engine.x,
        iterations,
        success,
    }
}

/// Mean a-posteriori erasure probability over all variable nodes of the
/// chain, before the first iteration and after each one, for the full-chain
/// recursion.
pub fn de_trajectory(
    base: &CoupledBaseMatrix,
    epsilon: f64,
    puncture: f64,
    cfg: &DeConfig,
) -> Result<Vec<f64>, DeError> {
    check_probability("epsilon", epsilon)?;
    check_probability("puncture", puncture)?;
    let graph = DeGraph::new(base);
    let channel = effective_erasure(epsilon, puncture);
    let vars = graph.vars();
    let mut engine = DeEngine::new(&graph, channel);
    let checks = 0..graph.check_start.len() - 1;
    let mut means = vec![channel];
    engine.iterate(checks, 0..vars, cfg, &mut |eng| {
        means.push((0..vars).map(|v| eng.posterior(v)).sum::<f64>() / vars as f64);
    });
    Ok(means)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    /// Largest tested ε at which the recursion succeeded.
    pub epsilon: f64,
    pub bisection_steps: usize,
    /// Recursion iterations summed over all bisection points.
    pub iterations: usize,
}

fn bisect(tol_eps: f64, mut succeeds: impl FnMut(f64) -> (bool, usize)) -> Threshold {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut steps = 0;
    let mut iterations = 0;
    let (top, it) = succeeds(hi);
    iterations += it;
    if top {
        return Threshold {
            epsilon: 1.0,
            bisection_steps: 0,
            iterations,
        };
    }
    while hi - lo > tol_eps {
        let mid = 0.5 * (lo + hi);
        let (ok, it) = succeeds(mid);
        iterations += it;
        steps += 1;
        if ok {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Threshold {
        epsilon: lo,
        bisection_steps: steps,
        iterations,
    }
}

/// BP threshold of the chain by bisection on ε to width `tol_eps`.
pub fn bp_threshold(
    base: &CoupledBaseMatrix,
    puncture: f64,
    tol_eps: f64,
    cfg: &DeConfig,
) -> Result<Threshold, DeError> {
    check_probability("puncture", puncture)?;
    let graph = DeGraph::new(base);
    Ok(bisect(tol_eps, |eps| {
        let out = de_run_graph(&graph, effective_erasure(eps, puncture), cfg);
        (out.success, out.iterations)
    }))
}

/// What one window position of windowed DE did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeWindowReport {
    pub position: usize,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowedDeOutcome {
    /// Mean a-posteriori erasure of each chain position when it was emitted.
    pub profile: Vec<f64>,
    pub windows: Vec<DeWindowReport>,
    pub success: bool,
}

fn validate_window(graph: &DeGraph, window: &WindowConfig) -> Result<(), DeError> {
    if window.size == 0 || window.size > graph.check_positions {
        return Err(DeError::BadWindow {
            window: window.size,
            max: graph.check_positions,
        });
    }
    Ok(())
}

/// Windowed recursion following the sliding-window decoder: the window
/// holds check positions `t..t+W` and variable positions `t..t+W`, earlier
/// variables keep their last messages, and position `t` is emitted before
/// the window advances. The last window emits everything that is left.
///
/// `window.max_iters` caps iterations per window position; `de.tol` is the
/// convergence tolerance. A position succeeds when all of its outgoing
/// messages are below the tolerance at emission.
fn windowed_de_graph(
    graph: &DeGraph,
    channel: f64,
    window: &WindowConfig,
    de: &DeConfig,
    observe: &mut dyn FnMut(usize, &DeEngine),
) -> WindowedDeOutcome {
    let mut engine = DeEngine::new(graph, channel);
    let cfg = DeConfig {
        max_iters: window.max_iters,
        tol: de.tol,
    };
    let mut profile = vec![0.0; graph.length];
    let mut windows = Vec::new();
    let mut success = true;
    let mut t = 0;
    while t < graph.length {
        let last = t + window.size >= graph.check_positions;
        let check_end = (t + window.size).min(graph.check_positions);
        let var_end = (t + window.size).min(graph.length);
        let checks = t * graph.bc..check_end * graph.bc;
        let vars = t * graph.bv..var_end * graph.bv;
        if !window.warm_start {
            engine.reset(checks.clone(), vars.clone());
        }
        let (iterations, converged) =
            engine.iterate(checks, vars, &cfg, &mut |eng| observe(t, eng));
        let emit = if last { t..graph.length } else { t..t + 1 };
        for p in emit.clone() {
            let pv = p * graph.bv..(p + 1) * graph.bv;
            profile[p] = pv.clone().map(|v| engine.posterior(v)).sum::<f64>() / graph.bv as f64;
            success &= engine.max_message(pv) < de.tol;
        }
        windows.push(DeWindowReport {
            position: t,
            iterations,
            converged,
        });
        t = emit.end;
    }
    WindowedDeOutcome {
        profile,
        windows,
        success,
    }
}

pub fn windowed_de(
    base: &CoupledBaseMatrix,
    epsilon: f64,
    puncture: f64,
    window: &WindowConfig,
    de: &DeConfig,
) -> Result<WindowedDeOutcome, DeError> {
    check_probability("epsilon", epsilon)?;
    check_probability("puncture", puncture)?;
    let graph = DeGraph::new(base);
    validate_window(&graph, window)?;
    Ok(windowed_de_graph(
        &graph,
        effective_erasure(epsilon, puncture),
        window,
        de,
        &mut |_, _| {},
    ))
}

/// Threshold of windowed DE, by bisection like [`bp_threshold`].
pub fn windowed_threshold(
    base: &CoupledBaseMatrix,
    puncture: f64,
    window: &WindowConfig,
    tol_eps: f64,
    de: &DeConfig,
) -> Result<Threshold, DeError> {
    check_probability("puncture", puncture)?;
    let graph = DeGraph::new(base);
    validate_window(&graph, window)?;
    Ok(bisect(tol_eps, |eps| {
        let out = windowed_de_graph(
            &graph,
            effective_erasure(eps, puncture),
            window,
            de,
            &mut |_, _| {},
        );
        let iters = out.windows.iter().map(|w| w.iterations).sum();
        (out.success, iters)
    }))
}

/// Average per-iteration decrease of the chain-wide mean erasure while the
/// window is in steady state (window start positions `W..=L-W`), divided by
/// the gap `window_threshold - ε`.
///
/// `window_threshold` is the windowed threshold of the same configuration,
/// typically from [`windowed_threshold`].
pub fn window_mean_parameter(
    base: &CoupledBaseMatrix,
    epsilon: f64,
    puncture: f64,
    window: &WindowConfig,
    de: &DeConfig,
    window_threshold: f64,
) -> Result<f64, DeError> {
    check_probability("epsilon", epsilon)?;
    check_probability("puncture", puncture)?;
    if epsilon >= window_threshold {
        return Err(DeError::AboveThreshold {
            epsilon,
            threshold: window_threshold,
        });
    }
    let graph = DeGraph::new(base);
    validate_window(&graph, window)?;
    let length = graph.length;
    if 2 * window.size > length {
        return Err(DeError::NoSteadyState {
            window: window.size,
            length,
        });
    }
    let steady = window.size..=length - window.size;
    let vars = graph.vars();
    let mut previous: Option<f64> = None;
    let mut total = 0.0;
    let mut count = 0usize;
    windowed_de_graph(
        &graph,
        effective_erasure(epsilon, puncture),
        window,
        de,
        &mut |t, eng| {
            let mean = (0..vars).map(|v| eng.posterior(v)).sum::<f64>() / vars as f64;
            if steady.contains(&t) {
                if let Some(prev) = previous {
                    total += prev - mean;
                    count += 1;
                }
            }
            previous = Some(mean);
        },
    );
    let average = if count == 0 { 0.0 } else { total / count as f64 };
    Ok(average / (window_threshold - epsilon))
}
