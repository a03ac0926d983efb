//! Binary narrow-sense primitive BCH codes, optionally shortened, with
//! systematic encoding and bounded-distance decoding (syndromes,
//! Berlekamp-Massey, Chien search).
//!
//! Word index `j` of a length-`n` word holds the coefficient of
//! `x^(n-1-j)`: the message comes first and the parity last. Shortening
//! removes leading message positions, which are implicitly zero.

use super::gf::{GaloisField, UnsupportedDegree};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BchError {
    #[error(transparent)]
    Field(#[from] UnsupportedDegree),
    #[error("correction capability {t} leaves no information bits at length {n}")]
    Capability { n: usize, t: usize },
    #[error("cannot shorten by {by}: only {k} information bits")]
    Shortening { by: usize, k: usize },
    #[error("expected {expected} bits, found {found}")]
    Length { expected: usize, found: usize },
}

/// More errors were detected than the decoder can correct; the word is left
/// unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("bounded-distance decoding failed")]
pub struct DecodeFailure;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BchCode {
    field: GaloisField,
    n: usize,
    k: usize,
    t: usize,
    /// Generator coefficients, index = degree.
    generator: Vec<u8>,
}

impl BchCode {
    /// The primitive code of length `2^m - 1` correcting `t` errors.
    pub fn new(m: u32, t: usize) -> Result<Self, BchError> {
        let field = GaloisField::new(m)?;
        let n = field.order();
        if t == 0 || 2 * t >= n {
            return Err(BchError::Capability { n, t });
        }
        // Product of (x + alpha^c) over the cyclotomic cosets of 1..=2t.
        let mut covered = vec![false; n];
        let mut g: Vec<u32> = vec![1];
        for i in 1..=2 * t {
            let mut c = i % n;
            while !covered[c] {
                covered[c] = true;
                let root = field.alpha_pow(c as i64);
                let mut next = vec![0u32; g.len() + 1];
                for (d, &coef) in g.iter().enumerate() {
                    next[d + 1] ^= coef;
                    next[d] ^= field.mul(coef, root);
                }
                g = next;
                c = (2 * c) % n;
            }
        }
        let generator: Vec<u8> = g
            .iter()
            .map(|&c| {
                debug_assert!(c <= 1, "generator coefficient outside GF(2)");
                c as u8
            })
            .collect();
        let k = n - (generator.len() - 1);
        if k == 0 {
            return Err(BchError::Capability { n, t });
        }
        Ok(Self {
            field,
            n,
            k,
            t,
            generator,
        })
    }

    /// The (7,4) Hamming code, i.e. the single-error-correcting BCH code of
    /// length 7.
    pub fn hamming_7_4() -> Self {
        Self::new(3, 1).expect("valid parameters")
    }

    /// Drops `by` leading information positions.
    pub fn shortened(mut self, by: usize) -> Result<Self, BchError> {
        if by >= self.k {
            return Err(BchError::Shortening { by, k: self.k });
        }
        self.n -= by;
        self.k -= by;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn field(&self) -> &GaloisField {
        &self.field
    }

    /// Generator polynomial coefficients, index = degree.
    pub fn generator(&self) -> &[u8] {
        &self.generator
    }

    fn check_len(&self, len: usize, expected: usize) -> Result<(), BchError> {
        if len != expected {
            return Err(BchError::Length { expected, found: len });
        }
        Ok(())
    }

    /// Systematic codeword `[message | parity]`.
    pub fn encode(&self, message: &[u8]) -> Result<Vec<u8>, BchError> {
        self.check_len(message.len(), self.k)?;
        let mut word = Vec::with_capacity(self.n);
        word.extend_from_slice(message);
        word.resize(self.n, 0);
        self.fill_parity(&mut word);
        Ok(word)
    }

    /// Overwrites the last `n - k` bits of `word` with the parity of its
    /// first `k` bits.
    pub fn fill_parity(&self, word: &mut [u8]) {
        assert_eq!(word.len(), self.n);
        let r = self.n - self.k;
        // reg[i] holds the coefficient of x^(r-1-i) of the running remainder
        let mut reg = vec![0u8; r];
        for &bit in &word[..self.k] {
            let feedback = (bit & 1) ^ reg[0];
            reg.rotate_left(1);
            reg[r - 1] = 0;
            if feedback == 1 {
                for (i, b) in reg.iter_mut().enumerate() {
                    *b ^= self.generator[r - 1 - i];
                }
            }
        }
        word[self.k..].copy_from_slice(&reg);
    }

    /// Syndromes `S_1..S_2t` (index 0 holds `S_1`).
    pub fn syndromes(&self, word: &[u8]) -> Vec<u32> {
        (1..=2 * self.t)
            .map(|i| {
                let a = self.field.alpha_pow(i as i64);
                word.iter().fold(0, |s, &b| self.field.mul(s, a) ^ u32::from(b & 1))
            })
            .collect()
    }

    pub fn is_codeword(&self, word: &[u8]) -> bool {
        word.len() == self.n && self.syndromes(word).iter().all(|&s| s == 0)
    }

    /// Error-locator polynomial from the syndromes (coefficients by degree).
    fn berlekamp_massey(&self, s: &[u32]) -> Vec<u32> {
        let f = &self.field;
        let mut c = vec![1u32];
        let mut b = vec![1u32];
        let mut len = 0usize;
        let mut shift = 1usize;
        let mut last = 1u32;
        for step in 0..s.len() {
            let mut d = s[step];
            for i in 1..=len.min(c.len() - 1) {
                d ^= f.mul(c[i], s[step - i]);
            }
            if d == 0 {
                shift += 1;
                continue;
            }
            let scale = f.div(d, last);
            let mut next = c.clone();
            if next.len() < b.len() + shift {
                next.resize(b.len() + shift, 0);
            }
            for (i, &bi) in b.iter().enumerate() {
                next[i + shift] ^= f.mul(scale, bi);
            }
            if 2 * len <= step {
                b = std::mem::replace(&mut c, next);
                len = step + 1 - len;
                last = d;
                shift = 1;
            } else {
                c = next;
                shift += 1;
            }
        }
        c.truncate(len + 1);
        c
    }

    /// Corrects `word` in place and returns the number of flipped bits, or
    /// leaves it unchanged when more than `t` errors are detected.
    pub fn decode_in_place(&self, word: &mut [u8]) -> Result<usize, DecodeFailure> {
        if word.len() != self.n {
            return Err(DecodeFailure);
        }
        let s = self.syndromes(word);
        if s.iter().all(|&x| x == 0) {
            return Ok(0);
        }
        let locator = self.berlekamp_massey(&s);
        let degree = locator.len() - 1;
        if degree == 0 || degree > self.t || *locator.last().unwrap() == 0 {
            return Err(DecodeFailure);
        }
        // Chien search over the full primitive length; roots alpha^-d mark an
        // error at degree d.
        let f = &self.field;
        let mut positions = Vec::with_capacity(degree);
        for d in 0..f.order() {
            let x = f.alpha_pow(-(d as i64));
            let mut value = 0u32;
            let mut power = 1u32;
            for &coef in &locator {
                value ^= f.mul(coef, power);
                power = f.mul(power, x);
            }
            if value == 0 {
                if d >= self.n {
                    return Err(DecodeFailure);
                }
                positions.push(self.n - 1 - d);
            }
        }
        if positions.len() != degree {
            return Err(DecodeFailure);
        }
        for &p in &positions {
            word[p] ^= 1;
        }
        Ok(degree)
    }

    /// Bounded-distance decoding of a copy of `word`.
    pub fn decode(&self, word: &[u8]) -> Result<(Vec<u8>, usize), DecodeFailure> {
        let mut w = word.to_vec();
        let flips = self.decode_in_place(&mut w)?;
        Ok((w, flips))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_dimensions() {
        for (m, t, n, k) in [(3, 1, 7, 4), (4, 2, 15, 7), (5, 3, 31, 16), (8, 2, 255, 239), (10, 3, 1023, 993)] {
            let c = BchCode::new(m, t).unwrap();
            assert_eq!((c.n(), c.k()), (n, k), "m={m} t={t}");
        }
        let s = BchCode::new(8, 2).unwrap().shortened(1).unwrap();
        assert_eq!((s.n(), s.k()), (254, 238));
    }

    #[test]
    fn generator_of_15_7_code() {
        // x^8 + x^7 + x^6 + x^4 + 1
        let c = BchCode::new(4, 2).unwrap();
        assert_eq!(c.generator(), &[1, 0, 0, 0, 1, 0, 1, 1, 1]);
    }

    #[test]
    fn encoding_is_systematic_and_valid() {
        let c = BchCode::new(5, 3).unwrap();
        let msg: Vec<u8> = (0..16).map(|i| (i * 7 % 3 == 0) as u8).collect();
        let w = c.encode(&msg).unwrap();
        assert_eq!(&w[..16], &msg[..]);
        assert!(c.is_codeword(&w));
    }

    #[test]
    fn clean_word_needs_no_corrections() {
        let c = BchCode::new(4, 2).unwrap();
        let w = c.encode(&[1, 0, 1, 1, 0, 0, 1]).unwrap();
        assert_eq!(c.decode(&w), Ok((w.clone(), 0)));
    }

    #[test]
    fn rejects_wrong_lengths_and_capability() {
        let c = BchCode::new(4, 2).unwrap();
        assert_eq!(c.encode(&[0; 6]), Err(BchError::Length { expected: 7, found: 6 }));
        assert!(matches!(BchCode::new(4, 8), Err(BchError::Capability { .. })));
        assert!(matches!(c.clone().shortened(7), Err(BchError::Shortening { .. })));
    }

    #[test]
    fn shortened_code_corrects_two_errors() {
        let c = BchCode::new(8, 2).unwrap().shortened(1).unwrap();
        let msg: Vec<u8> = (0..238).map(|i| (i % 5 == 1) as u8).collect();
        let w = c.encode(&msg).unwrap();
        let mut r = w.clone();
        r[0] ^= 1;
        r[253] ^= 1;
        assert_eq!(c.decode(&r), Ok((w, 2)));
    }
}
