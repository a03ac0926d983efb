//! Memoryless channels (BEC, BSC, Bi-AWGN), LLR conversion and random
//! puncturing, all driven by explicit seeds.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// Saturation magnitude for every LLR handled by the decoders.
pub const LLR_SATURATION: f64 = 38.0;

pub fn clip_llr(x: f64) -> f64 {
    x.clamp(-LLR_SATURATION, LLR_SATURATION)
}

/// Hard decision; a zero LLR decides 0.
pub fn hard_decision(llr: f64) -> u8 {
    u8::from(llr < 0.0)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("observations do not come from this channel kind")]
    KindMismatch,
    #[error("puncture fraction {0} must lie in [0, 1)")]
    BadFraction(f64),
    #[error("puncture index {index} is outside a frame of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Channel {
    Bec { erasure: f64 },
    Bsc { crossover: f64 },
    /// Antipodal mapping `0 -> +1`, `1 -> -1`; `ebn0_db` is `E_b/N_0` and
    /// `rate` the code rate used for noise scaling.
    BiAwgn { ebn0_db: f64, rate: f64 },
}

impl Channel {
    pub fn bec(erasure: f64) -> Result<Self, ChannelError> {
        let c = Channel::Bec { erasure };
        c.validate()?;
        Ok(c)
    }

    pub fn bsc(crossover: f64) -> Result<Self, ChannelError> {
        let c = Channel::Bsc { crossover };
        c.validate()?;
        Ok(c)
    }

    pub fn bi_awgn(ebn0_db: f64, rate: f64) -> Result<Self, ChannelError> {
        let c = Channel::BiAwgn { ebn0_db, rate };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        match *self {
            Channel::Bec { erasure } if !(0.0..=1.0).contains(&erasure) => {
                Err(ChannelError::OutOfRange {
                    name: "erasure probability",
                    value: erasure,
                    range: "[0, 1]",
                })
            }
            Channel::Bsc { crossover } if !(0.0..=0.5).contains(&crossover) => {
                Err(ChannelError::OutOfRange {
                    name: "crossover probability",
                    value: crossover,
                    range: "[0, 1/2]",
                })
            }
            Channel::BiAwgn { rate, .. } if !(rate > 0.0 && rate <= 1.0) => {
                Err(ChannelError::OutOfRange {
                    name: "code rate",
                    value: rate,
                    range: "(0, 1]",
                })
            }
            Channel::BiAwgn { ebn0_db, .. } if ebn0_db.is_nan() => Err(ChannelError::OutOfRange {
                name: "Eb/N0",
                value: ebn0_db,
                range: "a finite dB value",
            }),
            _ => Ok(()),
        }
    }

    /// `sigma^2 = 1 / (2 R 10^(snr/10))` for Bi-AWGN, `None` otherwise.
    pub fn noise_variance(&self) -> Option<f64> {
        match *self {
            Channel::BiAwgn { ebn0_db, rate } => {
                Some(1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0)))
            }
            _ => None,
        }
    }
}

/// Channel outputs for one frame.
#[derive(Debug, Clone, PartialEq)]
pub enum Observations {
    /// BEC: `None` is an erasure.
    Erasure(Vec<Option<u8>>),
    /// BSC: received bits.
    Hard(Vec<u8>),
    /// Bi-AWGN: received real values.
    Soft(Vec<f64>),
}

impl Observations {
    pub fn len(&self) -> usize {
        match self {
            Observations::Erasure(v) => v.len(),
            Observations::Hard(v) => v.len(),
            Observations::Soft(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// RNG stream for frame `frame` under master seed `master`. Streams depend
/// only on `(master, frame)`, never on worker scheduling.
pub fn frame_rng(master: u64, frame: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(frame);
    rng
}

pub fn transmit<R: Rng + ?Sized>(bits: &[u8], channel: &Channel, rng: &mut R) -> Observations {
    match *channel {
        Channel::Bec { erasure } => Observations::Erasure(
            bits.iter()
                .map(|&b| (!rng.random_bool(erasure)).then_some(b))
                .collect(),
        ),
        Channel::Bsc { crossover } => Observations::Hard(
            bits.iter()
                .map(|&b| b ^ u8::from(rng.random_bool(crossover)))
                .collect(),
        ),
        Channel::BiAwgn { .. } => {
            let sigma = channel.noise_variance().unwrap().sqrt();
            Observations::Soft(
                bits.iter()
                    .map(|&b| {
                        let x = 1.0 - 2.0 * f64::from(b);
                        let n: f64 = rng.sample(StandardNormal);
                        x + sigma * n
                    })
                    .collect(),
            )
        }
    }
}

/// LLRs with positive values favouring bit 0, clipped to the saturation constant.
pub fn to_llr(obs: &Observations, channel: &Channel) -> Result<Vec<f64>, ChannelError> {
    let s = LLR_SATURATION;
    match (obs, *channel) {
        (Observations::Erasure(v), Channel::Bec { .. }) => Ok(v
            .iter()
            .map(|o| match o {
                None => 0.0,
                Some(0) => s,
                Some(_) => -s,
            })
            .collect()),
        (Observations::Hard(v), Channel::Bsc { crossover }) => {
            let mag = if crossover == 0.0 {
                s
            } else {
                clip_llr(((1.0 - crossover) / crossover).ln())
            };
            Ok(v.iter().map(|&b| if b == 0 { mag } else { -mag }).collect())
        }
        (Observations::Soft(v), Channel::BiAwgn { .. }) => {
            let var = channel.noise_variance().unwrap();
            Ok(v.iter()
                .map(|&y| {
                    if var == 0.0 {
                        if y == 0.0 {
                            0.0
                        } else {
                            s.copysign(y)
                        }
                    } else {
                        clip_llr(2.0 * y / var)
                    }
                })
                .collect())
        }
        _ => Err(ChannelError::KindMismatch),
    }
}

/// Fraction to puncture so that a code of rate `design` runs at `target`:
/// `R_target = R_design / (1 - rho)`.
pub fn puncture_fraction(design: f64, target: f64) -> f64 {
    (1.0 - design / target).max(0.0)
}

/// Seeded set of punctured (untransmitted) positions in a frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PuncturePattern {
    len: usize,
    punctured: Vec<bool>,
    count: usize,
}

impl PuncturePattern {
    /// Punctures `round(fraction * len)` positions chosen uniformly at random.
    pub fn random(len: usize, fraction: f64, seed: u64) -> Result<Self, ChannelError> {
        if !(0.0..1.0).contains(&fraction) {
            return Err(ChannelError::BadFraction(fraction));
        }
        let count = (fraction * len as f64).round() as usize;
        let candidates: Vec<usize> = (0..len).collect();
        Self::random_among(len, &candidates, count, seed)
    }

    /// Punctures `count` positions drawn uniformly from `candidates`.
    pub fn random_among(
        len: usize,
        candidates: &[usize],
        count: usize,
        seed: u64,
    ) -> Result<Self, ChannelError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let count = count.min(candidates.len());
        let chosen = sample(&mut rng, candidates.len(), count)
            .into_iter()
            .map(|i| candidates[i]);
        Self::from_indices(len, chosen)
    }

    pub fn from_indices(
        len: usize,
        indices: impl IntoIterator<Item = usize>,
    ) -> Result<Self, ChannelError> {
        let mut punctured = vec![false; len];
        for index in indices {
            if index >= len {
                return Err(ChannelError::IndexOutOfRange { index, len });
            }
            punctured[index] = true;
        }
        let count = punctured.iter().filter(|&&p| p).count();
        Ok(Self {
            len,
            punctured,
            count,
        })
    }

    pub fn none(len: usize) -> Self {
        Self {
            len,
            punctured: vec![false; len],
            count: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn punctured_count(&self) -> usize {
        self.count
    }

    pub fn transmitted_count(&self) -> usize {
        self.len - self.count
    }

    pub fn is_punctured(&self, i: usize) -> bool {
        self.punctured[i]
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.punctured
            .iter()
            .enumerate()
            .filter_map(|(i, &p)| p.then_some(i))
    }

    /// Punctured positions become erasures.
    pub fn apply_erasures(&self, frame: &mut [Option<u8>]) {
        assert_eq!(frame.len(), self.len);
        for i in self.indices() {
            frame[i] = None;
        }
    }

    /// Punctured positions carry no information.
    pub fn apply_llr(&self, llr: &mut [f64]) {
        assert_eq!(llr.len(), self.len);
        for i in self.indices() {
            llr[i] = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(n: usize, seed: u64) -> Vec<u8> {
        let mut rng = frame_rng(seed, 0);
        (0..n).map(|_| rng.random_range(0..2u8)).collect()
    }

    #[test]
    fn bec_extremes() {
        let x = bits(1000, 1);
        let mut rng = frame_rng(5, 0);
        let clean = transmit(&x, &Channel::bec(0.0).unwrap(), &mut rng);
        assert_eq!(
            clean,
            Observations::Erasure(x.iter().map(|&b| Some(b)).collect())
        );
        let gone = transmit(&x, &Channel::bec(1.0).unwrap(), &mut rng);
        assert_eq!(gone, Observations::Erasure(vec![None; 1000]));
    }

    #[test]
    fn bsc_half_flips_about_half() {
        let n = 1_000_000usize;
        let x = vec![0u8; n];
        let mut rng = frame_rng(11, 3);
        let Observations::Hard(y) = transmit(&x, &Channel::bsc(0.5).unwrap(), &mut rng) else {
            unreachable!()
        };
        let flips = y.iter().filter(|&&b| b == 1).count() as f64;
        let sd = (n as f64 * 0.25).sqrt();
        assert!((flips - 0.5 * n as f64).abs() < 3.0 * sd, "flips {flips}");
    }

    #[test]
    fn llr_values() {
        let bec = Channel::bec(0.4).unwrap();
        let obs = Observations::Erasure(vec![None, Some(0), Some(1)]);
        assert_eq!(to_llr(&obs, &bec).unwrap(), vec![0.0, 38.0, -38.0]);

        let bsc = Channel::bsc(0.1).unwrap();
        let l = to_llr(&Observations::Hard(vec![0, 1]), &bsc).unwrap();
        assert!((l[0] - 9f64.ln()).abs() < 1e-12);
        assert!((l[0] - 2.197).abs() < 1e-3);
        assert_eq!(l[1], -l[0]);

        let awgn = Channel::bi_awgn(1.0, 0.5).unwrap();
        let l = to_llr(&Observations::Soft(vec![0.0, 0.5]), &awgn).unwrap();
        assert_eq!(l[0], 0.0);
        assert!((l[1] - 1.0 / awgn.noise_variance().unwrap()).abs() < 1e-12);

        assert_eq!(
            to_llr(&Observations::Soft(vec![1.0]), &bsc),
            Err(ChannelError::KindMismatch)
        );
    }

    #[test]
    fn degenerate_channels_saturate() {
        let bsc = Channel::bsc(0.0).unwrap();
        assert_eq!(
            to_llr(&Observations::Hard(vec![1]), &bsc).unwrap(),
            vec![-LLR_SATURATION]
        );
        let bsc = Channel::bsc(0.5).unwrap();
        assert_eq!(to_llr(&Observations::Hard(vec![1]), &bsc).unwrap(), vec![0.0]);
        let awgn = Channel::bi_awgn(1000.0, 1.0).unwrap();
        assert_eq!(
            to_llr(&Observations::Soft(vec![-1.0]), &awgn).unwrap(),
            vec![-LLR_SATURATION]
        );
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Channel::bec(1.5).is_err());
        assert!(Channel::bsc(0.6).is_err());
        assert!(Channel::bi_awgn(0.0, 0.0).is_err());
        assert!(PuncturePattern::random(10, 1.0, 0).is_err());
    }

    #[test]
    fn awgn_noise_variance() {
        let c = Channel::bi_awgn(0.0, 0.5).unwrap();
        assert!((c.noise_variance().unwrap() - 1.0).abs() < 1e-15);
        let n = 200_000;
        let mut rng = frame_rng(2, 9);
        let Observations::Soft(y) = transmit(&vec![0; n], &c, &mut rng) else {
            unreachable!()
        };
        let var = y.iter().map(|v| (v - 1.0).powi(2)).sum::<f64>() / n as f64;
        assert!((var - 1.0).abs() < 0.02);
    }

    #[test]
    fn puncture_fractions() {
        assert_eq!(puncture_fraction(0.49, 0.49), 0.0);
        assert!((puncture_fraction(0.49, 0.50) - 0.02).abs() < 1e-12);
        assert!((puncture_fraction(0.49, 0.75) - 0.346_666_666_666_666_7).abs() < 1e-12);
    }

    #[test]
    fn puncture_counts_and_identity() {
        let p = PuncturePattern::random(1000, 0.02, 4).unwrap();
        assert_eq!(p.punctured_count(), 20);
        assert_eq!(p.transmitted_count(), 980);
        let zero = PuncturePattern::random(50, 0.0, 4).unwrap();
        let mut llr = vec![1.5; 50];
        zero.apply_llr(&mut llr);
        assert_eq!(llr, vec![1.5; 50]);
    }

    #[test]
    fn puncturing_is_deterministic_and_idempotent() {
        let a = PuncturePattern::random(500, 0.3, 99).unwrap();
        let b = PuncturePattern::random(500, 0.3, 99).unwrap();
        assert_eq!(a, b);
        let mut frame: Vec<Option<u8>> = vec![Some(0); 500];
        a.apply_erasures(&mut frame);
        let once = frame.clone();
        a.apply_erasures(&mut frame);
        assert_eq!(frame, once);
    }

    #[test]
    fn puncture_then_bec_composes() {
        let (n, rho, eps) = (400_000usize, 0.3, 0.2);
        let p = PuncturePattern::random(n, rho, 17).unwrap();
        let mut rng = frame_rng(17, 1);
        let Observations::Erasure(mut y) = transmit(&vec![0; n], &Channel::bec(eps).unwrap(), &mut rng)
        else {
            unreachable!()
        };
        p.apply_erasures(&mut y);
        let erased = y.iter().filter(|o| o.is_none()).count() as f64 / n as f64;
        let expect = rho + (1.0 - rho) * eps;
        let sd = (expect * (1.0 - expect) / n as f64).sqrt();
        assert!((erased - expect).abs() < 3.0 * sd + 1e-6, "{erased} vs {expect}");
    }

    #[test]
    fn llr_symmetry_under_codeword_flip() {
        // Flipping the transmitted bit and the noise sign flips the LLR.
        let c = Channel::bi_awgn(1.0, 0.5).unwrap();
        let n = 100_000;
        let mut rng = frame_rng(3, 3);
        let noise: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let sigma = c.noise_variance().unwrap().sqrt();
        let y0: Vec<f64> = noise.iter().map(|z| 1.0 + sigma * z).collect();
        let y1: Vec<f64> = noise.iter().map(|z| -1.0 - sigma * z).collect();
        let l0 = to_llr(&Observations::Soft(y0), &c).unwrap();
        let l1 = to_llr(&Observations::Soft(y1), &c).unwrap();
        assert!(l0.iter().zip(&l1).all(|(a, b)| *a == -*b));
        // Consistency E[e^{-L}] = 1 for a symmetric channel given bit 0.
        let m = l0.iter().map(|l| (-l).exp()).sum::<f64>() / n as f64;
        assert!((m - 1.0).abs() < 0.05, "{m}");
    }
}
