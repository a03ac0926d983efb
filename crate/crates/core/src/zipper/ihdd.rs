//! Windowed iterative hard-decision decoding (IHDD) of zipper codes.
//!
//! Each pass bounded-distance decodes every row of the window against a
//! snapshot of the buffer; corrections are then written back together.
//! Corrections of virtual bits land on the real bits they copy. A row whose
//! correction would touch the zero state or a bit already released from
//! the window is treated as a decoding failure.

use super::code::{ZipperError, ZipperSpec};
use crate::channels::{transmit, Channel, Observations};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IhddConfig {
    /// Rows in the window.
    pub window: usize,
    /// Rows released per slide.
    pub slide: usize,
    pub max_iters: usize,
}

impl IhddConfig {
    /// Window of `blocks` staircase blocks sliding one block at a time.
    pub fn staircase(half: usize, blocks: usize, max_iters: usize) -> Self {
        Self {
            window: blocks * half,
            slide: half,
            max_iters,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IhddWindowReport {
    pub start: usize,
    /// Passes that changed at least one bit.
    pub passes: usize,
    pub corrections: usize,
    /// Row decodings that failed or were rejected in the final pass.
    pub failures: usize,
    /// Passes after which more rows were unsatisfied than before.
    pub miscorrection_events: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IhddOutcome {
    /// Decided real-bit stream.
    pub stream: Vec<u8>,
    pub windows: Vec<IhddWindowReport>,
}

impl IhddOutcome {
    pub fn corrections(&self) -> usize {
        self.windows.iter().map(|w| w.corrections).sum()
    }
}

pub fn ihdd_window_decode(
    spec: &ZipperSpec,
    received: &[u8],
    rows: usize,
    cfg: IhddConfig,
) -> Result<IhddOutcome, ZipperError> {
    let span = spec.span(rows);
    if cfg.slide == 0 || cfg.slide > cfg.window || cfg.window <= span.min(rows.saturating_sub(1)) {
        return Err(ZipperError::BadWindow {
            window: cfg.window,
            slide: cfg.slide,
            span,
        });
    }
    let offsets = spec.row_offsets(rows);
    if received.len() != offsets[rows] {
        return Err(ZipperError::Length {
            expected: offsets[rows],
            found: received.len(),
        });
    }
    let code = spec.component();
    let mut stream = received.to_vec();
    let mut marked = vec![false; stream.len()];
    let mut pending: Vec<usize> = Vec::new();
    let mut word = Vec::with_capacity(code.n());
    let mut before = Vec::with_capacity(code.n());
    let mut row_flips: Vec<usize> = Vec::new();
    let mut windows = Vec::new();
    let mut start = 0;
    while start < rows {
        let end = (start + cfg.window).min(rows);
        let released = offsets[start];
        let mut report = IhddWindowReport {
            start,
            passes: 0,
            corrections: 0,
            failures: 0,
            miscorrection_events: 0,
        };
        let mut last_unsatisfied = usize::MAX;
        for _ in 0..cfg.max_iters {
            let mut unsatisfied = 0;
            report.failures = 0;
            for i in start..end {
                spec.assemble(i, &stream, &offsets, &mut word);
                before.clone_from(&word);
                match code.decode_in_place(&mut word) {
                    Ok(0) => continue,
                    Ok(_) => {}
                    Err(_) => {
                        unsatisfied += 1;
                        report.failures += 1;
                        continue;
                    }
                }
                unsatisfied += 1;
                row_flips.clear();
                let m = spec.virtual_len(i);
                let accepted = (0..word.len()).filter(|&j| word[j] != before[j]).all(|j| {
                    let index = if j < m {
                        spec.locate(spec.target(i, j), &offsets)
                    } else {
                        Some(offsets[i] + j - m)
                    };
                    match index {
                        Some(p) if p >= released => {
                            row_flips.push(p);
                            true
                        }
                        _ => false,
                    }
                });
                if !accepted {
                    report.failures += 1;
                    continue;
                }
                for &p in &row_flips {
                    if !marked[p] {
                        marked[p] = true;
                        pending.push(p);
                    }
                }
            }
            if last_unsatisfied != usize::MAX && unsatisfied > last_unsatisfied {
                report.miscorrection_events += 1;
            }
            last_unsatisfied = unsatisfied;
            if pending.is_empty() {
                break;
            }
            report.passes += 1;
            report.corrections += pending.len();
            for p in pending.drain(..) {
                stream[p] ^= 1;
                marked[p] = false;
            }
        }
        windows.push(report);
        start = if end == rows { rows } else { start + cfg.slide };
    }
    Ok(IhddOutcome { stream, windows })
}

/// Error counts of one simulated frame.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FrameErrors {
    pub bit_errors: usize,
    pub info_bits: usize,
    /// Raw channel errors on the information bits.
    pub channel_errors: usize,
}

/// Sends `rows` rows of random information followed by `termination` rows
/// of zero information over the BSC and counts decoded information errors
/// on the first `rows` rows.
pub fn simulate_bsc_frame<R: Rng + ?Sized>(
    spec: &ZipperSpec,
    rows: usize,
    termination: usize,
    crossover: f64,
    cfg: IhddConfig,
    rng: &mut R,
) -> Result<FrameErrors, ZipperError> {
    let total = rows + termination;
    let info_bits = spec.info_bits(rows);
    let mut info: Vec<u8> = (0..info_bits).map(|_| rng.random_range(0..2u8)).collect();
    info.resize(spec.info_bits(total), 0);
    let sent = spec.encode(&info, total)?;
    let channel = Channel::bsc(crossover)?;
    let Observations::Hard(received) = transmit(&sent, &channel, rng) else {
        unreachable!("the BSC yields hard decisions")
    };
    let decoded = ihdd_window_decode(spec, &received, total, cfg)?;
    let count = |stream: &[u8]| {
        spec.extract_info(stream, total)[..info_bits]
            .iter()
            .zip(&info)
            .filter(|(a, b)| a != b)
            .count()
    };
    Ok(FrameErrors {
        bit_errors: count(&decoded.stream),
        info_bits,
        channel_errors: count(&received),
    })
}
