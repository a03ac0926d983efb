//! Decoders for binary LDPC codes: flooding sum-product, instrumented
//! erasure peeling, and the sliding-window decoder for coupled chains.

use std::collections::VecDeque;
use std::ops::Range;

use crate::channels::{clip_llr, hard_decision};
use crate::protograph::CoupledBaseMatrix;
use crate::sparse::SparseMatrix;

/// Tanner graph with edges stored contiguously per check node.
#[derive(Debug, Clone)]
pub struct TannerGraph {
    vars: usize,
    checks: usize,
    /// `check_start[c]..check_start[c+1]` are the edges of check `c`.
    check_start: Vec<usize>,
    edge_var: Vec<usize>,
    edge_check: Vec<usize>,
    var_edges: Vec<Vec<usize>>,
}

impl TannerGraph {
    pub fn from_matrix(h: &SparseMatrix) -> Self {
        let mut check_start = Vec::with_capacity(h.rows() + 1);
        let mut edge_var = Vec::with_capacity(h.edge_count());
        let mut edge_check = Vec::with_capacity(h.edge_count());
        let mut var_edges = vec![Vec::new(); h.cols()];
        for c in 0..h.rows() {
            check_start.push(edge_var.len());
            for &v in h.row(c) {
                var_edges[v].push(edge_var.len());
                edge_var.push(v);
                edge_check.push(c);
            }
        }
        check_start.push(edge_var.len());
        Self {
            vars: h.cols(),
            checks: h.rows(),
            check_start,
            edge_var,
            edge_check,
            var_edges,
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn checks(&self) -> usize {
        self.checks
    }

    pub fn edges(&self) -> usize {
        self.edge_var.len()
    }

    pub fn check_edges(&self, c: usize) -> Range<usize> {
        self.check_start[c]..self.check_start[c + 1]
    }

    pub fn var_edges(&self, v: usize) -> &[usize] {
        &self.var_edges[v]
    }

    pub fn edge_var(&self, e: usize) -> usize {
        self.edge_var[e]
    }

    pub fn edge_check(&self, e: usize) -> usize {
        self.edge_check[e]
    }

    pub fn check_degree(&self, c: usize) -> usize {
        self.check_start[c + 1] - self.check_start[c]
    }

    pub fn is_codeword(&self, x: &[u8]) -> bool {
        (0..self.checks).all(|c| self.check_satisfied(c, x))
    }

    fn check_satisfied(&self, c: usize, x: &[u8]) -> bool {
        self.check_edges(c)
            .fold(0u8, |acc, e| acc ^ x[self.edge_var[e]])
            == 0
    }
}

/// When the iterative decoder may stop early. Reaching an exact fixed point
/// (no message changed) always stops, since further iterations are identical.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopRule {
    /// Stop once the hard decisions satisfy every active check and no
    /// posterior is a tie (zero LLR).
    ZeroSyndrome,
    /// Run the full iteration budget.
    FixedIterations,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BpConfig {
    pub max_iters: usize,
    pub stop: StopRule,
}

impl BpConfig {
    pub fn new(max_iters: usize) -> Self {
        Self {
            max_iters,
            stop: StopRule::ZeroSyndrome,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BpOutcome {
    pub decisions: Vec<u8>,
    pub posterior: Vec<f64>,
    pub iterations: usize,
    pub syndrome_ok: bool,
}

/// Message store shared by the full-graph and windowed decoders.
struct BpEngine<'g> {
    graph: &'g TannerGraph,
    channel: &'g [f64],
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    posterior: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'g> BpEngine<'g> {
    fn new(graph: &'g TannerGraph, channel: &'g [f64]) -> Self {
        assert_eq!(channel.len(), graph.vars, "LLR frame length must equal V");
        let v2c = graph.edge_var.iter().map(|&v| channel[v]).collect();
        Self {
            graph,
            channel,
            v2c,
            c2v: vec![0.0; graph.edges()],
            posterior: channel.to_vec(),
            scratch: Vec::new(),
        }
    }

    fn reset(&mut self, checks: Range<usize>, vars: Range<usize>) {
        for c in checks {
            for e in self.graph.check_edges(c) {
                self.c2v[e] = 0.0;
            }
        }
        for v in vars {
            self.posterior[v] = self.channel[v];
            for &e in &self.graph.var_edges[v] {
                self.v2c[e] = self.channel[v];
            }
        }
    }

    /// Tanh-rule update; returns whether any message changed.
    fn update_checks(&mut self, checks: Range<usize>) -> bool {
        let mut changed = false;
        for c in checks {
            let edges = self.graph.check_edges(c);
            self.scratch.clear();
            let mut prod = 1.0;
            let mut zeros = 0usize;
            for e in edges.clone() {
                let t = (self.v2c[e] / 2.0).tanh();
                self.scratch.push(t);
                if t == 0.0 {
                    zeros += 1;
                } else {
                    prod *= t;
                }
            }
            for (k, e) in edges.enumerate() {
                let t = self.scratch[k];
                let others = match (zeros, t == 0.0) {
                    (0, _) => prod / t,
                    (1, true) => prod,
                    _ => 0.0,
                };
                let msg = clip_llr(2.0 * others.atanh());
                if msg != self.c2v[e] {
                    changed = true;
                    self.c2v[e] = msg;
                }
            }
        }
        changed
    }

    fn update_vars(&mut self, vars: Range<usize>) -> bool {
        let mut changed = false;
        for v in vars {
            let edges = &self.graph.var_edges[v];
            let total = self.channel[v] + edges.iter().map(|&e| self.c2v[e]).sum::<f64>();
            self.posterior[v] = clip_llr(total);
            for &e in edges {
                let msg = clip_llr(total - self.c2v[e]);
                if msg != self.v2c[e] {
                    changed = true;
                    self.v2c[e] = msg;
                }
            }
        }
        changed
    }

    /// Hard decisions of `vars` satisfy `checks` with no ties; decisions
    /// outside `vars` are read from `frozen`.
    fn resolved(&self, checks: Range<usize>, vars: Range<usize>, frozen: &[u8]) -> bool {
        if vars.clone().any(|v| self.posterior[v] == 0.0) {
            return false;
        }
        checks.into_iter().all(|c| {
            self.graph.check_edges(c).fold(0u8, |acc, e| {
                let v = self.graph.edge_var[e];
                let bit = if vars.contains(&v) {
                    hard_decision(self.posterior[v])
                } else {
                    frozen[v]
                };
                acc ^ bit
            }) == 0
        })
    }

    /// Runs up to `max_iters` flooding iterations; returns
    /// `(iterations, stopped_by_rule)`.
    fn iterate(
        &mut self,
        checks: Range<usize>,
        vars: Range<usize>,
        cfg: BpConfig,
        frozen: &[u8],
    ) -> (usize, bool) {
        if cfg.stop == StopRule::ZeroSyndrome && self.resolved(checks.clone(), vars.clone(), frozen)
        {
            return (0, true);
        }
        for it in 1..=cfg.max_iters {
            let a = self.update_checks(checks.clone());
            let b = self.update_vars(vars.clone());
            if cfg.stop == StopRule::ZeroSyndrome
                && self.resolved(checks.clone(), vars.clone(), frozen)
            {
                return (it, true);
            }
            if !a && !b {
                return (it, false);
            }
        }
        (cfg.max_iters, false)
    }
}

/// Flooding sum-product decoding over the whole graph.
pub fn bp_decode(graph: &TannerGraph, channel_llr: &[f64], cfg: BpConfig) -> BpOutcome {
    let mut engine = BpEngine::new(graph, channel_llr);
    let (iterations, _) = engine.iterate(0..graph.checks, 0..graph.vars, cfg, &[]);
    let decisions: Vec<u8> = engine.posterior.iter().map(|&l| hard_decision(l)).collect();
    let syndrome_ok = graph.is_codeword(&decisions);
    BpOutcome {
        decisions,
        posterior: engine.posterior,
        iterations,
        syndrome_ok,
    }
}

/// Trajectory of the peeling decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct PdTrace {
    /// Number of degree-one checks after each peeling step, starting at step 0.
    pub degree_one: Vec<usize>,
    /// Normalisation length `N` (component codeword length).
    pub norm: usize,
    pub success: bool,
}

impl PdTrace {
    /// `r_1` after `step` peeling steps.
    pub fn r1(&self, step: usize) -> f64 {
        self.degree_one[step] as f64 / self.norm as f64
    }

    pub fn r1_series(&self) -> Vec<f64> {
        (0..self.degree_one.len()).map(|l| self.r1(l)).collect()
    }

    pub fn steps(&self) -> usize {
        self.degree_one.len() - 1
    }

    /// First normalised time at which no degree-one check remains.
    pub fn tau0(&self) -> f64 {
        let l = self
            .degree_one
            .iter()
            .position(|&d| d == 0)
            .expect("a trace always ends without degree-one checks");
        l as f64 / self.norm as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeelOutcome {
    /// `true` for variables still erased when peeling stopped.
    pub unresolved: Vec<bool>,
    pub trace: PdTrace,
}

impl PeelOutcome {
    pub fn unresolved_count(&self) -> usize {
        self.unresolved.iter().filter(|&&u| u).count()
    }
}

/// Erasure peeling: repeatedly resolves the erased neighbour of a degree-one
/// check (first-in first-out), recording the degree-one count after each step.
pub fn peel_decode(graph: &TannerGraph, erased: &[bool], norm: usize) -> PeelOutcome {
    assert_eq!(erased.len(), graph.vars);
    assert!(norm > 0);
    let mut unresolved = erased.to_vec();
    let mut degree: Vec<usize> = (0..graph.checks)
        .map(|c| {
            graph
                .check_edges(c)
                .filter(|&e| unresolved[graph.edge_var[e]])
                .count()
        })
        .collect();
    let mut queue: VecDeque<usize> = (0..graph.checks).filter(|&c| degree[c] == 1).collect();
    let mut ones = queue.len();
    let mut trace = vec![ones];
    while let Some(c) = queue.pop_front() {
        if degree[c] != 1 {
            continue;
        }
        let v = graph
            .check_edges(c)
            .map(|e| graph.edge_var[e])
            .find(|&v| unresolved[v])
            .expect("degree-one check has an erased neighbour");
        unresolved[v] = false;
        for &e in &graph.var_edges[v] {
            let d = graph.edge_check[e];
            match degree[d] {
                1 => ones -= 1,
                2 => {
                    ones += 1;
                    queue.push_back(d);
                }
                _ => {}
            }
            degree[d] -= 1;
        }
        trace.push(ones);
    }
    let success = !unresolved.iter().any(|&u| u);
    PeelOutcome {
        unresolved,
        trace: PdTrace {
            degree_one: trace,
            norm,
            success,
        },
    }
}

/// Position bookkeeping for a coupled chain whose variables and checks are
/// stored position by position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainLayout {
    pub length: usize,
    pub memory: usize,
    pub vars_per_position: usize,
    pub checks_per_position: usize,
}

impl ChainLayout {
    /// Layout of a lifted coupled base matrix.
    pub fn lifted(base: &CoupledBaseMatrix, lifting: usize) -> Self {
        Self {
            length: base.chain().length(),
            memory: base.chain().memory(),
            vars_per_position: base.vars_per_position() * lifting,
            checks_per_position: base.checks_per_position() * lifting,
        }
    }

    pub fn check_positions(&self) -> usize {
        self.length + self.memory
    }

    pub fn vars_at(&self, positions: Range<usize>) -> Range<usize> {
        positions.start * self.vars_per_position..positions.end * self.vars_per_position
    }

    pub fn checks_at(&self, positions: Range<usize>) -> Range<usize> {
        positions.start * self.checks_per_position..positions.end * self.checks_per_position
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowConfig {
    /// Window size `W` in chain positions.
    pub size: usize,
    /// Iteration budget per window position.
    pub max_iters: usize,
    pub stop: StopRule,
    /// Keep messages of overlapping positions across slides.
    pub warm_start: bool,
}

impl WindowConfig {
    pub fn new(size: usize, max_iters: usize) -> Self {
        Self {
            size,
            max_iters,
            stop: StopRule::ZeroSyndrome,
            warm_start: true,
        }
    }

    pub fn is_valid(&self, layout: &ChainLayout) -> bool {
        self.size >= 1 && self.size <= layout.check_positions() && self.max_iters >= 1
    }
}

/// What happened while one window position was decoded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowReport {
    /// First chain position of the window.
    pub position: usize,
    pub iterations: usize,
    /// The stop rule was met.
    pub converged: bool,
    /// The iteration budget ran out while messages were still changing.
    pub budget_exhausted: bool,
    /// Tie (zero-LLR) decisions among the emitted positions.
    pub unresolved_emitted: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowOutcome {
    pub decisions: Vec<u8>,
    pub posterior: Vec<f64>,
    pub windows: Vec<WindowReport>,
}

impl WindowOutcome {
    pub fn iterations(&self) -> usize {
        self.windows.iter().map(|w| w.iterations).sum()
    }
}

/// Sliding-window BP over a coupled chain. The window holds check positions
/// `t..t+W` and variable positions `t..t+W` (clipped to the chain); after
/// decoding, position `t` is emitted and the window advances by one. Once
/// the window reaches the end of the chain all remaining positions are
/// emitted together.
pub fn window_decode(
    graph: &TannerGraph,
    layout: &ChainLayout,
    channel_llr: &[f64],
    cfg: WindowConfig,
) -> WindowOutcome {
    assert!(cfg.is_valid(layout), "invalid window configuration");
    assert_eq!(graph.vars, layout.length * layout.vars_per_position);
    assert_eq!(graph.checks, layout.check_positions() * layout.checks_per_position);
    let mut engine = BpEngine::new(graph, channel_llr);
    let mut decisions = vec![0u8; graph.vars];
    let mut windows = Vec::new();
    let bp = BpConfig {
        max_iters: cfg.max_iters,
        stop: cfg.stop,
    };
    let mut t = 0;
    while t < layout.length {
        let last = t + cfg.size >= layout.check_positions();
        let check_end = (t + cfg.size).min(layout.check_positions());
        let var_end = (t + cfg.size).min(layout.length);
        let checks = layout.checks_at(t..check_end);
        let vars = layout.vars_at(t..var_end);
        if !cfg.warm_start {
            engine.reset(checks.clone(), vars.clone());
        }
        let (iterations, converged) = engine.iterate(checks, vars.clone(), bp, &decisions);
        let emit = if last { t..layout.length } else { t..t + 1 };
        let emitted = layout.vars_at(emit.clone());
        let mut unresolved_emitted = 0;
        for v in emitted {
            decisions[v] = hard_decision(engine.posterior[v]);
            unresolved_emitted += usize::from(engine.posterior[v] == 0.0);
        }
        windows.push(WindowReport {
            position: t,
            iterations,
            converged,
            budget_exhausted: !converged && iterations == cfg.max_iters,
            unresolved_emitted,
        });
        t = emit.end;
    }
    WindowOutcome {
        decisions,
        posterior: engine.posterior,
        windows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::LLR_SATURATION as S;

    fn spc3() -> TannerGraph {
        TannerGraph::from_matrix(&SparseMatrix::from_dense("111").unwrap())
    }

    #[test]
    fn noiseless_all_zero_decodes_at_once() {
        let h = SparseMatrix::from_dense("110100\n011010\n101001").unwrap();
        let g = TannerGraph::from_matrix(&h);
        let out = bp_decode(&g, &[S; 6], BpConfig::new(50));
        assert_eq!(out.decisions, vec![0; 6]);
        assert!(out.syndrome_ok);
        assert!(out.iterations <= 1);
    }

    #[test]
    fn single_check_recovers_erasure() {
        let out = bp_decode(&spc3(), &[-8.0, 0.0, 9.0], BpConfig::new(10));
        assert!(out.posterior[1] < 0.0);
        assert_eq!(out.decisions, vec![1, 1, 0]);
        assert!(out.syndrome_ok);
    }

    #[test]
    fn peeling_with_no_erasures() {
        let out = peel_decode(&spc3(), &[false; 3], 3);
        assert_eq!(out.unresolved_count(), 0);
        assert!(out.trace.success);
        assert_eq!(out.trace.tau0(), 0.0);
    }

    #[test]
    fn stopping_set_stalls_immediately() {
        let g = TannerGraph::from_matrix(&SparseMatrix::from_dense("11\n11").unwrap());
        let out = peel_decode(&g, &[true, true], 2);
        assert_eq!(out.trace.degree_one, vec![0]);
        assert!(!out.trace.success);
        assert_eq!(out.unresolved_count(), 2);
    }

    #[test]
    fn peeling_trace_counts_degree_one_checks() {
        // chain of checks: c0 = v0+v1, c1 = v1+v2, c2 = v2+v3
        let g = TannerGraph::from_matrix(
            &SparseMatrix::from_dense("1100\n0110\n0011").unwrap(),
        );
        let out = peel_decode(&g, &[false, true, true, true], 4);
        assert!(out.trace.success);
        assert_eq!(out.trace.degree_one, vec![1, 1, 1, 0]);
        assert_eq!(out.trace.tau0(), 0.75);
    }

    #[test]
    fn bec_bp_matches_peeling_on_small_graph() {
        let h = SparseMatrix::from_dense("1101000\n0110100\n0011010\n0001101").unwrap();
        let g = TannerGraph::from_matrix(&h);
        for mask in 0u32..128 {
            let erased: Vec<bool> = (0..7).map(|i| mask >> i & 1 == 1).collect();
            let llr: Vec<f64> = erased.iter().map(|&e| if e { 0.0 } else { S }).collect();
            let bp = bp_decode(&g, &llr, BpConfig::new(7));
            let peel = peel_decode(&g, &erased, 7);
            let zero: Vec<bool> = bp.posterior.iter().map(|&l| l == 0.0).collect();
            assert_eq!(zero, peel.unresolved, "mask {mask:b}");
        }
    }
}
