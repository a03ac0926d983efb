//! Coupled trellis graph: bit variables attached to chain positions and
//! component-code instances ("factors") that read some variables as inputs
//! and produce others as parity. All three coupled turbo-like families are
//! built as such a graph, which then provides encoding, rate bookkeeping,
//! puncturing and sliding-window turbo decoding.

use std::ops::Range;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::bcjr::{bcjr, snap};
use super::conv::ConvCode;
use crate::chain::{ChainTranscript, Rate};
use crate::channels::{hard_decision, LLR_SATURATION};
use crate::ldpc::{StopRule, WindowConfig, WindowReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("info stream has {found} bits, the code expects {expected}")]
    InfoLength { expected: usize, found: usize },
    #[error("target rate {target} is below the unpunctured rate {base}")]
    RateBelowDesign { target: Rate, base: Rate },
    #[error("only {available} bits may be punctured but {needed} are required")]
    NotEnoughParity { available: usize, needed: usize },
    #[error("window size {window} is outside 1..={positions}")]
    BadWindow { window: usize, positions: usize },
    #[error("channel frame has {found} values, expected {expected}")]
    FrameLength { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Info,
    Parity,
    /// Known to be zero (termination padding or missing coupling input).
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Variable {
    pub kind: VarKind,
    pub position: usize,
    pub transmitted: bool,
    /// Role tag chosen by the family (e.g. upper versus lower parity).
    pub group: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    pub code: usize,
    pub position: usize,
    /// Input variables, step-major with `inputs()` per step.
    pub inputs: Vec<usize>,
    pub parity: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct TurboGraph {
    codes: Vec<ConvCode>,
    vars: Vec<Variable>,
    factors: Vec<Factor>,
    info: Vec<usize>,
    positions: usize,
    slot_start: Vec<usize>,
    slot_var: Vec<usize>,
}

impl TurboGraph {
    pub fn new(codes: Vec<ConvCode>, positions: usize) -> Self {
        Self {
            codes,
            vars: Vec::new(),
            factors: Vec::new(),
            info: Vec::new(),
            positions,
            slot_start: vec![0],
            slot_var: Vec::new(),
        }
    }

    pub fn add_var(&mut self, kind: VarKind, position: usize, transmitted: bool, group: u8) -> usize {
        assert!(position < self.positions);
        self.vars.push(Variable {
            kind,
            position,
            transmitted,
            group,
        });
        if kind == VarKind::Info {
            self.info.push(self.vars.len() - 1);
        }
        self.vars.len() - 1
    }

    /// Adds a component encoder reading `inputs` and creating fresh parity
    /// variables at `position`; returns the parity variable indices.
    /// Factors must be added in non-decreasing position order, and in an
    /// order where every input is already defined.
    pub fn add_factor(&mut self, code: usize, position: usize, inputs: Vec<usize>, transmitted: bool, group: u8) -> Vec<usize> {
        let k = self.codes[code].inputs();
        assert_eq!(inputs.len() % k, 0);
        assert!(self.factors.last().is_none_or(|f| f.position <= position));
        let parity: Vec<usize> = (0..inputs.len() / k)
            .map(|_| self.add_var(VarKind::Parity, position, transmitted, group))
            .collect();
        self.slot_var.extend(inputs.iter().chain(&parity));
        self.slot_start.push(self.slot_var.len());
        self.factors.push(Factor {
            code,
            position,
            inputs,
            parity: parity.clone(),
        });
        parity
    }

    pub fn codes(&self) -> &[ConvCode] {
        &self.codes
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Information variables in the order of the information stream.
    pub fn info_vars(&self) -> &[usize] {
        &self.info
    }

    pub fn positions(&self) -> usize {
        self.positions
    }

    /// Assigns every variable from the information bits.
    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>, GraphError> {
        if info.len() != self.info.len() {
            return Err(GraphError::InfoLength {
                expected: self.info.len(),
                found: info.len(),
            });
        }
        let mut bits = vec![0u8; self.vars.len()];
        for (&v, &b) in self.info.iter().zip(info) {
            bits[v] = b & 1;
        }
        for f in &self.factors {
            let input: Vec<u8> = f.inputs.iter().map(|&v| bits[v]).collect();
            let (parity, _) = self.codes[f.code].encode(&input).expect("factor input length is whole steps");
            for (&v, p) in f.parity.iter().zip(parity) {
                bits[v] = p;
            }
        }
        Ok(bits)
    }

    /// Indices of transmitted variables, in channel order.
    pub fn transmitted(&self) -> Vec<usize> {
        (0..self.vars.len()).filter(|&v| self.vars[v].transmitted).collect()
    }

    pub fn transcript(&self) -> ChainTranscript {
        let mut tr = ChainTranscript::new(self.positions);
        for v in &self.vars {
            tr.record(
                v.position,
                u64::from(v.kind == VarKind::Info),
                u64::from(v.transmitted),
            );
        }
        tr
    }

    /// Punctures transmitted parity variables whose group is in `groups`,
    /// chosen uniformly at random, until the rate reaches `target`
    /// (rounding toward the closest rate not above it).
    pub fn puncture_to_rate(&mut self, target: Rate, groups: &[u8], seed: u64) -> Result<usize, GraphError> {
        let base = self.transcript().measured_rate().expect("graph transmits bits");
        if target < base {
            return Err(GraphError::RateBelowDesign { target, base });
        }
        let tr = self.transcript();
        let keep = (tr.total_information() * *target.denom()).div_ceil(*target.numer());
        let needed = (tr.total_transmitted() - keep) as usize;
        let candidates: Vec<usize> = (0..self.vars.len())
            .filter(|&v| {
                let var = &self.vars[v];
                var.transmitted && var.kind == VarKind::Parity && groups.contains(&var.group)
            })
            .collect();
        if needed > candidates.len() {
            return Err(GraphError::NotEnoughParity {
                available: candidates.len(),
                needed,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in sample(&mut rng, candidates.len(), needed) {
            self.vars[candidates[i]].transmitted = false;
        }
        Ok(needed)
    }

    /// Spreads received LLRs (one per transmitted variable) over all
    /// variables; untransmitted variables get zero.
    pub fn expand_llr(&self, received: &[f64]) -> Result<Vec<f64>, GraphError> {
        let sent = self.transmitted();
        if received.len() != sent.len() {
            return Err(GraphError::FrameLength {
                expected: sent.len(),
                found: received.len(),
            });
        }
        let mut llr = vec![0.0; self.vars.len()];
        for (&v, &l) in sent.iter().zip(received) {
            llr[v] = l;
        }
        Ok(llr)
    }

    fn factors_at(&self, positions: Range<usize>) -> Range<usize> {
        let lo = self.factors.partition_point(|f| f.position < positions.start);
        let hi = self.factors.partition_point(|f| f.position < positions.end);
        lo..hi
    }
}

/// Extrinsic messages of a decoding run.
struct TurboState<'g> {
    graph: &'g TurboGraph,
    channel: &'g [f64],
    ext: Vec<f64>,
    total: Vec<f64>,
}

impl<'g> TurboState<'g> {
    fn new(graph: &'g TurboGraph, channel: &'g [f64]) -> Self {
        Self {
            graph,
            channel,
            ext: vec![0.0; graph.slot_var.len()],
            total: vec![0.0; graph.vars.len()],
        }
    }

    fn posterior(&self, v: usize) -> f64 {
        match self.graph.vars[v].kind {
            VarKind::Zero => LLR_SATURATION,
            _ => snap(self.channel[v] + self.total[v]),
        }
    }

    fn incoming(&self, slot: usize) -> f64 {
        let v = self.graph.slot_var[slot];
        match self.graph.vars[v].kind {
            VarKind::Zero => LLR_SATURATION,
            _ => snap(self.channel[v] + self.total[v] - self.ext[slot]),
        }
    }

    fn set_ext(&mut self, slot: usize, value: f64) {
        let v = self.graph.slot_var[slot];
        self.total[v] += value - self.ext[slot];
        self.ext[slot] = value;
    }

    fn reset(&mut self, factors: Range<usize>) {
        for f in factors {
            for slot in self.graph.slot_start[f]..self.graph.slot_start[f + 1] {
                self.set_ext(slot, 0.0);
            }
        }
    }

    fn run_factor(&mut self, f: usize) {
        let g = self.graph;
        let factor = &g.factors[f];
        let slots = g.slot_start[f]..g.slot_start[f + 1];
        let n_in = factor.inputs.len();
        let incoming: Vec<f64> = slots.clone().map(|s| self.incoming(s)).collect();
        let out = bcjr(&g.codes[factor.code], &incoming[..n_in], &incoming[n_in..]);
        for (i, s) in slots.enumerate() {
            let ext = if i < n_in {
                out.input_extrinsic[i]
            } else {
                out.parity_extrinsic[i - n_in]
            };
            self.set_ext(s, ext);
        }
    }

    /// Hard decisions on every slot of `factors`, ties marked separately.
    fn decisions(&self, factors: Range<usize>) -> Vec<u8> {
        let g = self.graph;
        let slots = g.slot_start[factors.start]..g.slot_start[factors.end];
        slots
            .map(|s| {
                let l = self.posterior(g.slot_var[s]);
                if l == 0.0 {
                    2
                } else {
                    hard_decision(l)
                }
            })
            .collect()
    }

    /// Every factor's hard-decided inputs re-encode to its hard-decided
    /// parity and no decision is a tie.
    fn consistent(&self, factors: Range<usize>) -> bool {
        let g = self.graph;
        factors.into_iter().all(|f| {
            let factor = &g.factors[f];
            let mut input = Vec::with_capacity(factor.inputs.len());
            for &v in &factor.inputs {
                let l = self.posterior(v);
                if l == 0.0 {
                    return false;
                }
                input.push(hard_decision(l));
            }
            let (parity, _) = g.codes[factor.code].encode(&input).expect("whole steps");
            factor.parity.iter().zip(parity).all(|(&v, p)| {
                let l = self.posterior(v);
                l != 0.0 && hard_decision(l) == p
            })
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TurboOutcome {
    /// Decisions on the information stream, fixed when each position left
    /// the window.
    pub info: Vec<u8>,
    /// Final a-posteriori LLR of every variable.
    pub posterior: Vec<f64>,
    pub windows: Vec<WindowReport>,
}

/// Sliding-window turbo decoding. The window covers factors at positions
/// `t..t+W`; each iteration runs one BCJR pass per factor, oldest position
/// first, and every pass uses the newest extrinsics. Information bits of
/// position `t` are then emitted and the window advances; the last window
/// emits everything left. `channel_llr` has one entry per variable.
pub fn window_decode(graph: &TurboGraph, channel_llr: &[f64], cfg: WindowConfig) -> Result<TurboOutcome, GraphError> {
    let positions = graph.positions;
    if cfg.size == 0 || cfg.size > positions || cfg.max_iters == 0 {
        return Err(GraphError::BadWindow {
            window: cfg.size,
            positions,
        });
    }
    if channel_llr.len() != graph.vars.len() {
        return Err(GraphError::FrameLength {
            expected: graph.vars.len(),
            found: channel_llr.len(),
        });
    }
    let mut state = TurboState::new(graph, channel_llr);
    let mut windows = Vec::new();
    let mut emitted_upto = 0;
    let mut info = vec![0u8; graph.info.len()];
    let mut t = 0;
    while t < positions {
        let end = (t + cfg.size).min(positions);
        let last = end == positions;
        let factors = graph.factors_at(t..end);
        if !cfg.warm_start {
            state.reset(factors.clone());
        }
        // Stop once the factors of the position about to be emitted agree
        // and none of their decisions moved during the last iteration.
        let checked = if last { factors.clone() } else { graph.factors_at(t..t + 1) };
        let mut iterations = 0;
        let mut converged = false;
        let mut previous = state.decisions(checked.clone());
        while !converged && iterations < cfg.max_iters {
            for f in factors.clone() {
                state.run_factor(f);
            }
            iterations += 1;
            if cfg.stop == StopRule::ZeroSyndrome {
                let current = state.decisions(checked.clone());
                converged = current == previous && state.consistent(checked.clone());
                previous = current;
            }
        }
        let emit_end = if last { positions } else { t + 1 };
        let mut unresolved = 0;
        for &v in &graph.info[emitted_upto..] {
            if graph.vars[v].position >= emit_end {
                break;
            }
            let l = state.posterior(v);
            unresolved += usize::from(l == 0.0);
            info[emitted_upto] = hard_decision(l);
            emitted_upto += 1;
        }
        windows.push(WindowReport {
            position: t,
            iterations,
            converged,
            budget_exhausted: !converged && iterations == cfg.max_iters,
            unresolved_emitted: unresolved,
        });
        t = emit_end;
    }
    let posterior: Vec<f64> = (0..graph.vars.len()).map(|v| state.posterior(v)).collect();
    Ok(TurboOutcome {
        info,
        posterior,
        windows,
    })
}
