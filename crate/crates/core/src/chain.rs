//! Coupling template shared by every code family: chain parameters,
//! termination bookkeeping and exact rate accounting.

use num_rational::Ratio;
use thiserror::Error;

/// Exact rational used for all rate bookkeeping.
pub type Rate = Ratio<u64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("coupling length must be at least 1")]
    EmptyChain,
    #[error("coupling memory {memory} must be smaller than coupling length {length}")]
    MemoryTooLarge { memory: usize, length: usize },
    #[error("transcript records no transmitted bits")]
    ZeroTransmitted,
}

/// Parameters of a terminated coupled chain.
///
/// `length` is the number of coupled blocks (L) and `memory` is the largest
/// backward reach of a coupling input (m). Chains are always terminated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChainSpec {
    length: usize,
    memory: usize,
}

impl ChainSpec {
    pub fn new(length: usize, memory: usize) -> Result<Self, ChainError> {
        let spec = Self { length, memory };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ChainError> {
        if self.length < 1 {
            return Err(ChainError::EmptyChain);
        }
        if self.memory >= self.length {
            return Err(ChainError::MemoryTooLarge {
                memory: self.memory,
                length: self.length,
            });
        }
        Ok(())
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn terminated(&self) -> bool {
        true
    }

    /// Number of leading positions that carry information when the family
    /// zero-pads its tail (positions `L-m+1..=L` carry none).
    pub fn information_positions(&self) -> usize {
        self.length - self.memory
    }

    /// Whether 0-based position `t` is a zero-padded tail position.
    pub fn is_tail(&self, t: usize) -> bool {
        t >= self.information_positions()
    }
}

/// Bit counts consumed and emitted at one chain position.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PositionCount {
    pub information: u64,
    pub transmitted: u64,
}

/// Per-position record of information bits consumed and channel bits sent
/// (after puncturing) over a whole chain.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChainTranscript {
    positions: Vec<PositionCount>,
}

impl ChainTranscript {
    pub fn new(positions: usize) -> Self {
        Self {
            positions: vec![PositionCount::default(); positions],
        }
    }

    pub fn from_counts(positions: Vec<PositionCount>) -> Self {
        Self { positions }
    }

    pub fn record(&mut self, t: usize, information: u64, transmitted: u64) {
        let p = &mut self.positions[t];
        p.information += information;
        p.transmitted += transmitted;
    }

    /// Removes `count` transmitted bits from position `t` (puncturing).
    pub fn unsend(&mut self, t: usize, count: u64) {
        let p = &mut self.positions[t];
        assert!(p.transmitted >= count, "cannot puncture more bits than were sent");
        p.transmitted -= count;
    }

    /// Removes `count` information bits from position `t` (constraints that
    /// consume no fresh bits, such as parity checks).
    pub fn retract(&mut self, t: usize, count: u64) {
        let p = &mut self.positions[t];
        assert!(p.information >= count, "cannot retract more information bits than were consumed");
        p.information -= count;
    }

    pub fn positions(&self) -> &[PositionCount] {
        &self.positions
    }

    pub fn total_information(&self) -> u64 {
        self.positions.iter().map(|p| p.information).sum()
    }

    pub fn total_transmitted(&self) -> u64 {
        self.positions.iter().map(|p| p.transmitted).sum()
    }

    /// Information bits over transmitted bits, as an exact rational.
    pub fn measured_rate(&self) -> Result<Rate, ChainError> {
        let sent = self.total_transmitted();
        if sent == 0 {
            return Err(ChainError::ZeroTransmitted);
        }
        Ok(Rate::new(self.total_information(), sent))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_valid_chains() {
        assert!(ChainSpec::new(50, 1).is_ok());
        assert!(ChainSpec::new(5, 2).is_ok());
        assert!(ChainSpec::new(1, 0).is_ok());
    }

    #[test]
    fn rejects_bad_bounds() {
        assert_eq!(
            ChainSpec::new(2, 2),
            Err(ChainError::MemoryTooLarge {
                memory: 2,
                length: 2
            })
        );
        assert_eq!(ChainSpec::new(0, 0), Err(ChainError::EmptyChain));
    }

    #[test]
    fn tail_positions() {
        let c = ChainSpec::new(5, 2).unwrap();
        let tails: Vec<bool> = (0..5).map(|t| c.is_tail(t)).collect();
        assert_eq!(tails, [false, false, false, true, true]);
    }

    #[test]
    fn measured_rate_is_exact() {
        let mut tr = ChainTranscript::new(2);
        tr.record(0, 490, 600);
        tr.record(1, 0, 400);
        assert_eq!(tr.measured_rate().unwrap(), Rate::new(49, 100));
    }

    #[test]
    fn empty_transcript_has_no_rate() {
        let tr = ChainTranscript::new(3);
        assert_eq!(tr.measured_rate(), Err(ChainError::ZeroTransmitted));
    }
}
