//! Exact log-domain forward-backward (BCJR) decoding of a component code.
//!
//! The trellis starts in the zero state and its final state is left open:
//! termination bits are not transmitted, so they add no information.

use super::conv::ConvCode;
use crate::channels::clip_llr;

/// Posterior magnitudes below this are rounding noise around an exact tie
/// (an undetermined bit on an erasure channel) and are reported as zero.
pub const TIE_TOLERANCE: f64 = 1e-9;

pub(crate) fn snap(llr: f64) -> f64 {
    if llr.abs() < TIE_TOLERANCE {
        0.0
    } else {
        clip_llr(llr)
    }
}

/// `ln(e^a + e^b)` without the max-only approximation.
pub fn max_star(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    a.max(b) + (-(a - b).abs()).exp().ln_1p()
}

/// Bitwise LLRs (`ln P(0)/P(1)`) of every input and parity bit: the
/// a-posteriori values and the extrinsic values, which leave out each
/// bit's own incoming LLR. The extrinsic values are computed directly
/// rather than as a difference, so they stay exact when posteriors saturate.
#[derive(Debug, Clone, PartialEq)]
pub struct BcjrOutput {
    pub inputs: Vec<f64>,
    pub parity: Vec<f64>,
    pub input_extrinsic: Vec<f64>,
    pub parity_extrinsic: Vec<f64>,
}

/// Runs BCJR given the total incoming LLR of each input bit (step-major,
/// `code.inputs()` per step) and of each parity bit.
pub fn bcjr(code: &ConvCode, input_llr: &[f64], parity_llr: &[f64]) -> BcjrOutput {
    let k = code.inputs();
    let steps = parity_llr.len();
    assert_eq!(input_llr.len(), k * steps, "input and parity lengths disagree");
    let states = code.states();
    let words = 1usize << k;
    let branches = states * words;

    // Branch `b = s * words + u`: its end state and, per bit (inputs, then
    // parity), its value.
    let next: Vec<usize> = (0..branches)
        .map(|b| code.next_state((b / words) as u32, (b % words) as u32) as usize)
        .collect();
    let bits: Vec<Vec<bool>> = (0..=k)
        .map(|i| {
            (0..branches)
                .map(|b| {
                    let (s, u) = ((b / words) as u32, (b % words) as u32);
                    if i < k {
                        (u >> i) & 1 == 1
                    } else {
                        code.output(s, u) == 1
                    }
                })
                .collect()
        })
        .collect();
    let mut into: Vec<Vec<usize>> = vec![Vec::new(); states];
    for (b, &ns) in next.iter().enumerate() {
        into[ns].push(b);
    }

    let half = |l: f64, one: bool| if one { -0.5 * l } else { 0.5 * l };
    let own = |t: usize, i: usize| if i < k { input_llr[t * k + i] } else { parity_llr[t] };
    let fill_gamma = |t: usize, g: &mut [f64]| {
        for (b, gb) in g.iter_mut().enumerate() {
            *gb = (0..=k).map(|i| half(own(t, i), bits[i][b])).sum();
        }
    };
    let mut gamma = vec![0.0; branches];
    let mut metric = vec![0.0; branches];

    let mut alpha = vec![f64::NEG_INFINITY; (steps + 1) * states];
    alpha[0] = 0.0;
    for t in 0..steps {
        fill_gamma(t, &mut gamma);
        let (cur, rest) = alpha.split_at_mut((t + 1) * states);
        let cur = &cur[t * states..];
        for (b, m) in metric.iter_mut().enumerate() {
            *m = cur[b / words] + gamma[b];
        }
        let nxt = &mut rest[..states];
        for (ns, a) in nxt.iter_mut().enumerate() {
            *a = log_sum_exp(into[ns].iter().map(|&b| metric[b]));
        }
        normalise(nxt);
    }

    let mut beta = vec![0.0; states];
    let mut beta_prev = vec![0.0; states];
    let mut inputs = vec![0.0; k * steps];
    let mut parity = vec![0.0; steps];
    let mut input_extrinsic = vec![0.0; k * steps];
    let mut parity_extrinsic = vec![0.0; steps];
    let mut to_end = vec![0.0; branches];
    for t in (0..steps).rev() {
        fill_gamma(t, &mut gamma);
        let a = &alpha[t * states..(t + 1) * states];
        for b in 0..branches {
            to_end[b] = gamma[b] + beta[next[b]];
            metric[b] = a[b / words] + to_end[b];
        }
        for (s, bp) in beta_prev.iter_mut().enumerate() {
            *bp = log_sum_exp(to_end[s * words..(s + 1) * words].iter().copied());
        }
        for (i, bit) in bits.iter().enumerate() {
            let bucket = |one: bool| log_sum_exp((0..branches).filter(|&b| bit[b] == one).map(|b| metric[b]));
            let (e0, e1) = (bucket(false), bucket(true));
            let l = own(t, i);
            // The bit's own LLR is constant within each bucket, so removing
            // it per bucket is exact even when the posterior saturates.
            let (post, ext) = (snap(e0 - e1), snap((e0 - half(l, false)) - (e1 - half(l, true))));
            if i < k {
                inputs[t * k + i] = post;
                input_extrinsic[t * k + i] = ext;
            } else {
                parity[t] = post;
                parity_extrinsic[t] = ext;
            }
        }
        normalise(&mut beta_prev);
        std::mem::swap(&mut beta, &mut beta_prev);
    }
    BcjrOutput {
        inputs,
        parity,
        input_extrinsic,
        parity_extrinsic,
    }
}

/// Exact `ln(sum e^x)`, shifted by the largest term.
fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let top = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + values.map(|v| (v - top).exp()).sum::<f64>().ln()
}

fn normalise(v: &mut [f64]) {
    let top = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top.is_finite() {
        for x in v {
            *x -= top;
        }
    }
}

/// Posterior and extrinsic LLRs of a rate-1/2 systematic component.
#[derive(Debug, Clone, PartialEq)]
pub struct SystematicDecode {
    pub posterior: Vec<f64>,
    pub extrinsic: Vec<f64>,
}

/// BCJR of a single-input code from a-priori, systematic channel and
/// parity channel LLRs; posterior = prior + channel + extrinsic.
pub fn bcjr_decode(code: &ConvCode, prior: &[f64], systematic: &[f64], parity: &[f64]) -> SystematicDecode {
    assert_eq!(code.inputs(), 1);
    assert_eq!(prior.len(), systematic.len());
    let incoming: Vec<f64> = prior.iter().zip(systematic).map(|(a, b)| a + b).collect();
    let out = bcjr(code, &incoming, parity);
    SystematicDecode {
        posterior: out.inputs,
        extrinsic: out.input_extrinsic,
    }
}
