//! Staircase codes encoded block by block: row `r` of
//! `[X_{t-1}^T, U_t, P_t]` is a component codeword and `X_t = [U_t, P_t]`.

use super::bch::BchCode;
use super::code::ZipperError;
use crate::chain::{ChainTranscript, Rate};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StaircaseCode {
    component: BchCode,
    half: usize,
}

impl StaircaseCode {
    pub fn new(component: BchCode) -> Result<Self, ZipperError> {
        let (n, k) = (component.n(), component.k());
        if n % 2 != 0 || 2 * k <= n {
            return Err(ZipperError::StaircaseShape { n, k });
        }
        Ok(Self { component, half: n / 2 })
    }

    pub fn component(&self) -> &BchCode {
        &self.component
    }

    /// Side length `n/2` of a square block.
    pub fn half(&self) -> usize {
        self.half
    }

    /// Information bits per block, `n/2 * (k - n/2)`.
    pub fn info_per_block(&self) -> usize {
        self.half * (self.component.k() - self.half)
    }

    /// Design rate `2k/n - 1`.
    pub fn rate(&self) -> Rate {
        staircase_rate(self.component.n(), self.component.k())
    }

    /// Encodes `info` (block-major, each `U_t` row-major) into blocks
    /// `X_1, X_2, ...`, each `n/2 x n/2` row-major, starting from `X_0 = 0`.
    pub fn encode(&self, info: &[u8]) -> Result<Vec<Vec<u8>>, ZipperError> {
        let per = self.info_per_block();
        if !info.len().is_multiple_of(per) {
            return Err(ZipperError::Length {
                expected: info.len().div_ceil(per) * per,
                found: info.len(),
            });
        }
        let h = self.half;
        let fresh = self.component.k() - h;
        let mut prev = vec![0u8; h * h];
        let mut blocks = Vec::with_capacity(info.len() / per);
        let mut word = vec![0u8; self.component.n()];
        for u in info.chunks(per) {
            let mut block = vec![0u8; h * h];
            for r in 0..h {
                for j in 0..h {
                    word[j] = prev[j * h + r];
                }
                word[h..h + fresh].copy_from_slice(&u[r * fresh..(r + 1) * fresh]);
                self.component.fill_parity(&mut word);
                block[r * h..(r + 1) * h].copy_from_slice(&word[h..]);
            }
            blocks.push(block.clone());
            prev = block;
        }
        Ok(blocks)
    }

    /// Bits consumed and emitted per block over `blocks` blocks.
    pub fn transcript(&self, blocks: usize) -> ChainTranscript {
        let mut tr = ChainTranscript::new(blocks);
        for t in 0..blocks {
            tr.record(t, self.info_per_block() as u64, (self.half * self.half) as u64);
        }
        tr
    }
}

/// Staircase rate `2k/n - 1` as an exact fraction.
pub fn staircase_rate(n: usize, k: usize) -> Rate {
    Rate::new((2 * k - n) as u64, n as u64)
}
