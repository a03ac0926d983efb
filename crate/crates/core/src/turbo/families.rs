//! Encoders of the three coupled turbo-like families, expressed as coupled
//! trellis graphs, and their closed-form rates.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::conv::ConvCode;
use super::graph::{TurboGraph, VarKind};
use super::interleaver::Interleaver;
use crate::chain::{ChainError, ChainSpec, Rate};

/// Variable groups used for puncturing.
pub const GROUP_INFO: u8 = 0;
pub const GROUP_UPPER: u8 = 1;
pub const GROUP_LOWER: u8 = 2;
pub const GROUP_OUTER: u8 = 1;
pub const GROUP_INNER: u8 = 2;
pub const GROUP_PARITY: u8 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("repetition factor {q} with ratio {ratio} violates 0 < ratio <= 1/q")]
    Repetition { q: u64, ratio: Rate },
    #[error("block of {block} information bits does not give whole sequences ({reason})")]
    BlockSize { block: usize, reason: &'static str },
    #[error("half-instant memory sigma={sigma} must satisfy 2 <= sigma < 2L = {limit}")]
    Sigma { sigma: usize, limit: usize },
    #[error("component code needs {expected} inputs per step, got {found}")]
    ComponentInputs { expected: usize, found: usize },
}

/// Partial repetition: the first `ratio * |u'|` bits of `u'` are copies
/// repeated `q` times.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RepetitionSpec {
    q: u64,
    ratio: Rate,
}

impl RepetitionSpec {
    pub fn new(q: u64, ratio: Rate) -> Result<Self, FamilyError> {
        if q < 1 || ratio <= Rate::from_integer(0) || ratio * Rate::from_integer(q) > Rate::from_integer(1) {
            return Err(FamilyError::Repetition { q, ratio });
        }
        Ok(Self { q, ratio })
    }

    /// No repetition (`q = 1`), which gives the plain coupled PCC.
    pub fn none() -> Self {
        Self {
            q: 1,
            ratio: Rate::from_integer(1),
        }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn ratio(&self) -> Rate {
        self.ratio
    }

    /// `ratio * (q - 1)`: the fraction of `u'` made of extra copies.
    fn overhead(&self) -> Rate {
        self.ratio * Rate::from_integer(self.q - 1)
    }

    /// `(|u'|, |u_r|)` for `info` information bits per position.
    pub fn lengths(&self, info: usize) -> Result<(usize, usize), FamilyError> {
        let expanded = Rate::from_integer(info as u64) / (Rate::from_integer(1) - self.overhead());
        if !expanded.is_integer() {
            return Err(FamilyError::BlockSize {
                block: info,
                reason: "|u'| is fractional",
            });
        }
        let repeated = if self.q == 1 {
            Rate::from_integer(0)
        } else {
            self.ratio * expanded
        };
        if !repeated.is_integer() {
            return Err(FamilyError::BlockSize {
                block: info,
                reason: "|u_r| is fractional",
            });
        }
        Ok((expanded.to_integer() as usize, repeated.to_integer() as usize))
    }
}

/// `(1 - λ(q-1))(L-m) / ((1/R0 - λ(q-1)) L)` with mother rate `R0 = 1/3`.
pub fn gscpcc_rate(rep: &RepetitionSpec, chain: ChainSpec) -> Rate {
    let (l, m) = (chain.length() as u64, chain.memory() as u64);
    let one = Rate::from_integer(1);
    (one - rep.overhead()) * Rate::new(l - m, l) / (Rate::from_integer(3) - rep.overhead())
}

/// `(L-m) R0 / L` with mother rate `R0 = 1/4`.
pub fn scscc_rate(chain: ChainSpec) -> Rate {
    let (l, m) = (chain.length() as u64, chain.memory() as u64);
    Rate::new(l - m, 4 * l)
}

/// `(2L - σ) / (6L - σ)`.
pub fn hscbcc_rate(length: usize, sigma: usize) -> Rate {
    let (l, s) = (length as u64, sigma as u64);
    Rate::new(2 * l - s, 6 * l - s)
}

/// Splits `seq` into `parts` contiguous segments of equal size, with the
/// remainder going to the last one.
pub fn partition<T: Clone>(seq: &[T], parts: usize) -> Vec<Vec<T>> {
    let size = seq.len() / parts;
    (0..parts)
        .map(|i| {
            let end = if i + 1 == parts { seq.len() } else { (i + 1) * size };
            seq[i * size..end].to_vec()
        })
        .collect()
}

fn part_len(total: usize, parts: usize, i: usize) -> usize {
    let size = total / parts;
    if i + 1 == parts {
        total - (parts - 1) * size
    } else {
        size
    }
}

/// Concatenates part 0 of position `t` with part `i` of position `t - i`
/// for `i = 1..=m`; parts before the chain start are known zeros.
fn coupled_input(parts: &[Vec<Vec<usize>>], t: usize, memory: usize, total: usize, zero: usize) -> Vec<usize> {
    let mut input = Vec::with_capacity(total);
    for i in 0..=memory {
        if t >= i {
            input.extend(&parts[t - i][i]);
        } else {
            input.extend(std::iter::repeat_n(zero, part_len(total, memory + 1, i)));
        }
    }
    input
}

fn check_inputs(code: &ConvCode, expected: usize) -> Result<(), FamilyError> {
    if code.inputs() != expected {
        return Err(FamilyError::ComponentInputs {
            expected,
            found: code.inputs(),
        });
    }
    Ok(())
}

/// Per-position information variables; tail positions (`t >= L - m`) carry
/// known zeros that still occupy channel slots.
fn info_block(g: &mut TurboGraph, chain: ChainSpec, t: usize, block: usize, transmit_tail: bool) -> Vec<usize> {
    let (kind, sent) = if chain.is_tail(t) {
        (VarKind::Zero, transmit_tail)
    } else {
        (VarKind::Info, true)
    };
    (0..block).map(|_| g.add_var(kind, t, sent, GROUP_INFO)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GscPccConfig {
    pub code: ConvCode,
    pub repetition: RepetitionSpec,
    pub chain: ChainSpec,
    /// Information bits per position.
    pub block: usize,
    pub seed: u64,
}

/// Generalized coupled PCC: `u_t` is partially repeated into `u'_t`, split
/// into `m+1` parts and coupled; the upper encoder at `t` sees
/// `Π([u'_{t,0}, u'_{t-1,1}, ..., u'_{t-m,m}])`, the lower encoder does the
/// same on a permuted copy of `u'_t`.
pub fn gscpcc(cfg: &GscPccConfig) -> Result<TurboGraph, FamilyError> {
    check_inputs(&cfg.code, 1)?;
    let (l, m) = (cfg.chain.length(), cfg.chain.memory());
    let (expanded, repeated) = cfg.repetition.lengths(cfg.block)?;
    let q = cfg.repetition.q() as usize;
    let repeated_sources = if q > 1 { repeated } else { 0 };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut g = TurboGraph::new(vec![cfg.code.clone()], l);
    let zero = g.add_var(VarKind::Zero, 0, false, GROUP_INFO);
    let u: Vec<Vec<usize>> = (0..l).map(|t| info_block(&mut g, cfg.chain, t, cfg.block, true)).collect();

    let mut upper_parts = Vec::with_capacity(l);
    let mut lower_parts = Vec::with_capacity(l);
    for (t, ut) in u.iter().enumerate() {
        let mut expanded_t = Vec::with_capacity(expanded);
        for &v in &ut[..repeated_sources] {
            expanded_t.extend(std::iter::repeat_n(v, q));
        }
        expanded_t.extend(&ut[repeated_sources..]);
        debug_assert_eq!(expanded_t.len(), expanded);
        let permuted = Interleaver::random(expanded, rng.next_u64()).apply(&expanded_t);
        upper_parts.push(partition(&expanded_t, m + 1));
        lower_parts.push(partition(&permuted, m + 1));

        let upper = coupled_input(&upper_parts, t, m, expanded, zero);
        let upper = Interleaver::random(expanded, rng.next_u64()).apply(&upper);
        g.add_factor(0, t, upper, true, GROUP_UPPER);
        let lower = coupled_input(&lower_parts, t, m, expanded, zero);
        let lower = Interleaver::random(expanded, rng.next_u64()).apply(&lower);
        g.add_factor(0, t, lower, true, GROUP_LOWER);
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScSccConfig {
    pub outer: ConvCode,
    pub inner: ConvCode,
    pub chain: ChainSpec,
    pub block: usize,
    pub seed: u64,
}

/// Coupled SCC: the outer codeword `[u_t, v^O_t]` is interleaved, split into
/// `m+1` parts and coupled into the inner encoder at `t`, which sees
/// `Π([c_{t,0}, c_{t-1,1}, ..., c_{t-m,m}])`. Sends `u`, `v^O` and `v^I`.
pub fn scscc(cfg: &ScSccConfig) -> Result<TurboGraph, FamilyError> {
    check_inputs(&cfg.outer, 1)?;
    check_inputs(&cfg.inner, 1)?;
    let (l, m) = (cfg.chain.length(), cfg.chain.memory());
    let total = 2 * cfg.block;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut g = TurboGraph::new(vec![cfg.outer.clone(), cfg.inner.clone()], l);
    let zero = g.add_var(VarKind::Zero, 0, false, GROUP_INFO);
    let u: Vec<Vec<usize>> = (0..l).map(|t| info_block(&mut g, cfg.chain, t, cfg.block, true)).collect();
    let mut parts = Vec::with_capacity(l);
    for (t, ut) in u.iter().enumerate() {
        let outer_parity = g.add_factor(0, t, ut.clone(), true, GROUP_OUTER);
        let codeword: Vec<usize> = ut.iter().chain(&outer_parity).copied().collect();
        let codeword = Interleaver::random(total, rng.next_u64()).apply(&codeword);
        parts.push(partition(&codeword, m + 1));
        let inner = coupled_input(&parts, t, m, total, zero);
        let inner = Interleaver::random(total, rng.next_u64()).apply(&inner);
        g.add_factor(1, t, inner, true, GROUP_INNER);
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HscBccConfig {
    /// Rate-2/3 component with two systematic inputs.
    pub code: ConvCode,
    pub length: usize,
    /// Coupling memory in half-time instants.
    pub sigma: usize,
    /// Information bits per position (split into two halves).
    pub block: usize,
    pub seed: u64,
}

impl HscBccConfig {
    /// Coupling memory in time instants, `ceil(σ/2)`.
    pub fn memory(&self) -> usize {
        self.sigma.div_ceil(2)
    }
}

/// Half coupled BCC: at half-instant `τ` the component encodes
/// `Π([u_{τ-σ+1}, u_τ])` on its first input and `Π(v_{τ-σ})` on its second,
/// producing `v_τ`. Half-instant information blocks beyond `2L-σ` are known
/// zeros and are not sent.
pub fn hscbcc(cfg: &HscBccConfig) -> Result<TurboGraph, FamilyError> {
    check_inputs(&cfg.code, 2)?;
    let l = cfg.length;
    if cfg.sigma < 2 || cfg.sigma >= 2 * l {
        return Err(FamilyError::Sigma {
            sigma: cfg.sigma,
            limit: 2 * l,
        });
    }
    if !cfg.block.is_multiple_of(2) || cfg.block == 0 {
        return Err(FamilyError::BlockSize {
            block: cfg.block,
            reason: "needs an even number of bits",
        });
    }
    let half = cfg.block / 2;
    let steps = cfg.block;
    let halves = 2 * l;
    let info_halves = halves - cfg.sigma;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut g = TurboGraph::new(vec![cfg.code.clone()], l);
    let zero = g.add_var(VarKind::Zero, 0, false, GROUP_INFO);
    let u: Vec<Vec<usize>> = (0..halves)
        .map(|tau| {
            let (kind, sent) = if tau < info_halves {
                (VarKind::Info, true)
            } else {
                (VarKind::Zero, false)
            };
            (0..half).map(|_| g.add_var(kind, tau / 2, sent, GROUP_INFO)).collect()
        })
        .collect();
    let mut v: Vec<Vec<usize>> = Vec::with_capacity(halves);
    for tau in 0..halves {
        let mut first = Vec::with_capacity(steps);
        match (tau + 1).checked_sub(cfg.sigma) {
            Some(past) => first.extend(&u[past]),
            None => first.extend(std::iter::repeat_n(zero, half)),
        }
        first.extend(&u[tau]);
        let first = Interleaver::random(steps, rng.next_u64()).apply(&first);
        let second = match tau.checked_sub(cfg.sigma) {
            Some(past) => v[past].clone(),
            None => vec![zero; steps],
        };
        let second = Interleaver::random(steps, rng.next_u64()).apply(&second);
        let inputs: Vec<usize> = first.iter().zip(&second).flat_map(|(&a, &b)| [a, b]).collect();
        v.push(g.add_factor(0, tau / 2, inputs, true, GROUP_PARITY));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repetition_lengths() {
        let rep = RepetitionSpec::new(2, Rate::new(1, 3)).unwrap();
        assert_eq!(rep.lengths(2000).unwrap(), (3000, 1000));
        let rep = RepetitionSpec::new(2, Rate::new(1, 2)).unwrap();
        assert_eq!(rep.lengths(2000).unwrap(), (4000, 2000));
        assert!(RepetitionSpec::new(2, Rate::new(2, 3)).is_err());
        assert_eq!(RepetitionSpec::none().lengths(10).unwrap(), (10, 0));
    }

    #[test]
    fn closed_form_rates() {
        let rep = RepetitionSpec::new(2, Rate::new(1, 2)).unwrap();
        // L -> inf limit (1 - 1/2) / (3 - 1/2) = 1/5, approached with m = 0
        assert_eq!(gscpcc_rate(&rep, ChainSpec::new(7, 0).unwrap()), Rate::new(1, 5));
        assert_eq!(scscc_rate(ChainSpec::new(50, 1).unwrap()), Rate::new(49, 200));
        assert_eq!(hscbcc_rate(50, 2), Rate::new(98, 298));
    }

    #[test]
    fn partition_gives_remainder_to_last() {
        let p = partition(&[1, 2, 3, 4, 5], 2);
        assert_eq!(p, vec![vec![1, 2], vec![3, 4, 5]]);
        assert_eq!(part_len(5, 2, 1), 3);
    }
}
