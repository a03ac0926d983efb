//! Monte Carlo BER/FER estimation.
//!
//! Frame `i` of point `p` draws all of its randomness from its own stream
//! `frame_rng(seed, p << 32 | i)`. Frames run in fixed-size batches on the
//! rayon pool and are tallied in frame order, so the early stop lands on
//! the same frame whatever the worker count.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};
use sccode::channels::{frame_rng, to_llr, transmit, Channel, PuncturePattern};
use sccode::ldpc::{bp_decode, window_decode, BpConfig, ChainLayout, TannerGraph, WindowConfig};
use sccode::scaling::wilson_interval;
use sccode::turbo::{self, TurboGraph};
use sccode::zipper::{simulate_bsc_frame, IhddConfig, ZipperSpec};

use crate::config::ChannelKind;
use crate::CliError;

/// Frames decoded in parallel before the stop rule is checked.
pub const BATCH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FrameErrors {
    pub bit_errors: usize,
    pub bits: usize,
}

pub trait FrameSimulator: Sync {
    /// Code rate, for the Eb/N0 conversion.
    fn rate(&self) -> f64;
    fn frame(&self, channel: &Channel, rng: &mut ChaCha8Rng) -> Result<FrameErrors, CliError>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointResult {
    pub param: f64,
    pub frames: usize,
    pub bits: usize,
    pub bit_errors: usize,
    pub frame_errors: usize,
    /// Sum over frames of the squared per-frame bit error fraction.
    pub frame_ber_sq: f64,
}

impl PointResult {
    pub fn ber(&self) -> f64 {
        self.bit_errors as f64 / self.bits.max(1) as f64
    }

    pub fn fer(&self) -> f64 {
        self.frame_errors as f64 / self.frames.max(1) as f64
    }

    /// 95% interval on the FER from the frame errors actually observed.
    pub fn fer_interval(&self) -> (f64, f64) {
        wilson_interval(self.frame_errors, self.frames)
    }

    /// 95% interval on the BER. Errors within a frame are not independent,
    /// so this is a Student-t interval over the per-frame error fractions,
    /// widened to contain the Wilson interval over independent bits.
    pub fn ber_interval(&self) -> (f64, f64) {
        let (lo, hi) = wilson_interval(self.bit_errors, self.bits);
        let n = self.frames as f64;
        if self.frames < 2 {
            return (0.0, 1.0);
        }
        let mean = self.ber();
        let var = ((self.frame_ber_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        let t = StudentsT::new(0.0, 1.0, n - 1.0).expect("positive degrees of freedom").inverse_cdf(0.975);
        let half = t * (var / n).sqrt();
        (lo.min((mean - half).max(0.0)), hi.max((mean + half).min(1.0)))
    }
}

pub fn channel(kind: ChannelKind, param: f64, rate: f64) -> Result<Channel, CliError> {
    let ch = match kind {
        ChannelKind::Bec => Channel::bec(param),
        ChannelKind::Bsc => Channel::bsc(param),
        ChannelKind::BiAwgn => Channel::bi_awgn(param, rate),
    };
    ch.map_err(|e| CliError::Config(e.to_string()))
}

/// Simulates one channel parameter until `max_frames` frames or
/// `target_errors` frame errors, whichever comes first.
pub fn run_point(
    sim: &dyn FrameSimulator,
    kind: ChannelKind,
    param: f64,
    max_frames: usize,
    target_errors: usize,
    seed: u64,
    point: u64,
) -> Result<PointResult, CliError> {
    let ch = channel(kind, param, sim.rate())?;
    let mut out = PointResult {
        param,
        frames: 0,
        bits: 0,
        bit_errors: 0,
        frame_errors: 0,
        frame_ber_sq: 0.0,
    };
    while out.frames < max_frames && out.frame_errors < target_errors {
        let start = out.frames;
        let end = (start + BATCH).min(max_frames);
        let batch: Vec<FrameErrors> = (start..end)
            .into_par_iter()
            .map(|i| sim.frame(&ch, &mut frame_rng(seed, (point << 32) | i as u64)))
            .collect::<Result<_, _>>()?;
        for f in batch {
            out.frames += 1;
            out.bits += f.bits;
            out.bit_errors += f.bit_errors;
            out.frame_errors += usize::from(f.bit_errors > 0);
            out.frame_ber_sq += (f.bit_errors as f64 / f.bits.max(1) as f64).powi(2);
            if out.frame_errors >= target_errors {
                break;
            }
        }
    }
    Ok(out)
}

/// SC-LDPC codes, sending the all-zero codeword. Errors count over all
/// code bits and an undecided (zero-LLR) bit counts as an error.
pub struct LdpcSim {
    pub graph: TannerGraph,
    pub layout: ChainLayout,
    pub pattern: PuncturePattern,
    /// Window size; 0 decodes the whole chain with flooding BP.
    pub window: usize,
    pub iters: usize,
    pub rate: f64,
}

impl FrameSimulator for LdpcSim {
    fn rate(&self) -> f64 {
        self.rate
    }

    fn frame(&self, channel: &Channel, rng: &mut ChaCha8Rng) -> Result<FrameErrors, CliError> {
        let zeros = vec![0u8; self.graph.vars()];
        let obs = transmit(&zeros, channel, rng);
        let mut llr = to_llr(&obs, channel).map_err(|e| CliError::Runtime(e.to_string()))?;
        self.pattern.apply_llr(&mut llr);
        let (decisions, posterior) = if self.window == 0 {
            let out = bp_decode(&self.graph, &llr, BpConfig::new(self.iters));
            (out.decisions, out.posterior)
        } else {
            let out = window_decode(&self.graph, &self.layout, &llr, WindowConfig::new(self.window, self.iters));
            (out.decisions, out.posterior)
        };
        let bit_errors = decisions
            .iter()
            .zip(&posterior)
            .filter(|&(&d, &p)| d != 0 || p == 0.0)
            .count();
        Ok(FrameErrors {
            bit_errors,
            bits: zeros.len(),
        })
    }
}

/// Turbo-like chains with random information words; errors count over
/// information bits, ties included.
pub struct TurboSim {
    pub graph: TurboGraph,
    pub window: usize,
    pub iters: usize,
    pub rate: f64,
}

impl FrameSimulator for TurboSim {
    fn rate(&self) -> f64 {
        self.rate
    }

    fn frame(&self, channel: &Channel, rng: &mut ChaCha8Rng) -> Result<FrameErrors, CliError> {
        let runtime = |e: &dyn std::fmt::Display| CliError::Runtime(e.to_string());
        let g = &self.graph;
        let info: Vec<u8> = (0..g.info_vars().len()).map(|_| rng.random_range(0..2u8)).collect();
        let bits = g.encode(&info).map_err(|e| runtime(&e))?;
        let sent: Vec<u8> = g.transmitted().iter().map(|&v| bits[v]).collect();
        let obs = transmit(&sent, channel, rng);
        let llr = to_llr(&obs, channel).map_err(|e| runtime(&e))?;
        let llr = g.expand_llr(&llr).map_err(|e| runtime(&e))?;
        let out = turbo::window_decode(g, &llr, WindowConfig::new(self.window, self.iters)).map_err(|e| runtime(&e))?;
        let bit_errors = info
            .iter()
            .zip(&out.info)
            .zip(g.info_vars())
            .filter(|&((&a, &b), &v)| a != b || out.posterior[v] == 0.0)
            .count();
        Ok(FrameErrors {
            bit_errors,
            bits: info.len(),
        })
    }
}

/// Staircase codes on the BSC with windowed iterative hard-decision
/// decoding; one zero block terminates each frame.
pub struct StaircaseSim {
    pub spec: ZipperSpec,
    pub rows: usize,
    pub termination: usize,
    pub cfg: IhddConfig,
    pub rate: f64,
}

impl FrameSimulator for StaircaseSim {
    fn rate(&self) -> f64 {
        self.rate
    }

    fn frame(&self, channel: &Channel, rng: &mut ChaCha8Rng) -> Result<FrameErrors, CliError> {
        let Channel::Bsc { crossover } = *channel else {
            return Err(CliError::Config("staircase codes are simulated on the bsc".into()));
        };
        let f = simulate_bsc_frame(&self.spec, self.rows, self.termination, crossover, self.cfg, rng)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        Ok(FrameErrors {
            bit_errors: f.bit_errors,
            bits: f.info_bits,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(per_frame: &[usize], bits: usize) -> PointResult {
        PointResult {
            param: 0.0,
            frames: per_frame.len(),
            bits: bits * per_frame.len(),
            bit_errors: per_frame.iter().sum(),
            frame_errors: per_frame.iter().filter(|&&e| e > 0).count(),
            frame_ber_sq: per_frame.iter().map(|&e| (e as f64 / bits as f64).powi(2)).sum(),
        }
    }

    #[test]
    fn bursty_frames_widen_the_ber_interval() {
        let bursty = point(&[2000, 0, 0, 0, 0, 0, 0, 0, 0, 0], 100_000);
        let (lo, hi) = bursty.ber_interval();
        let (wlo, whi) = wilson_interval(bursty.bit_errors, bursty.bits);
        assert!(lo == 0.0 && (hi - 0.006524).abs() < 1e-5 && hi > 3.0 * whi, "{lo} {hi} vs {wlo} {whi}");
        let even = point(&[200; 10], 100_000);
        assert_eq!(even.ber_interval(), wilson_interval(even.bit_errors, even.bits));
        assert_eq!(point(&[5], 100).ber_interval(), (0.0, 1.0));
    }
}
