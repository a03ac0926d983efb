//! Recursive systematic convolutional component codes with one parity
//! output, given in octal generator notation such as `[1,5/7]` or
//! `[1,0,5/7;0,1,3/7]`.
//!
//! Octal polynomials are read with the most significant bit as the
//! coefficient of `x^0`, all padded to the width of the longest generator,
//! so `15` is `1+x+x^3` and `13` is `1+x^2+x^3`.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConvError {
    #[error("cannot parse generator description {0:?}")]
    Syntax(String),
    #[error("row {0} is not a systematic row (expected a unit vector before the parity)")]
    NotSystematic(usize),
    #[error("all parity generators must share one feedback polynomial")]
    MixedFeedback,
    #[error("feedback polynomial needs a nonzero constant term")]
    FeedbackConstant,
    #[error("generators of degree above 16 are not supported")]
    TooLong,
    #[error("some encoder state cannot be driven back to zero (non-minimal realisation)")]
    NotTerminable,
    #[error("input has {len} bits, not a multiple of {inputs} inputs per step")]
    InputLength { len: usize, inputs: usize },
}

/// Component code with `inputs` systematic inputs per trellis step and one
/// rational parity `sum_i n_i(x) u_i(x) / d(x)`, realised in observer form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvCode {
    inputs: usize,
    memory: usize,
    numerators: Vec<u32>,
    denominator: u32,
    /// `next[state << inputs | input]`.
    next: Vec<u32>,
    parity: Vec<u8>,
    /// Input sequence of exactly `memory` steps driving each state to zero.
    tail: Vec<Vec<u32>>,
    description: String,
}

fn parse_octal(s: &str) -> Result<u32, ConvError> {
    let v = u32::from_str_radix(s.trim(), 8).map_err(|_| ConvError::Syntax(s.to_string()))?;
    if v >= 1 << 17 {
        return Err(ConvError::TooLong);
    }
    Ok(v)
}

fn bit_len(v: u32) -> usize {
    (32 - v.leading_zeros()) as usize
}

/// Reverses the `width` low bits so that bit `j` holds the coefficient of `x^j`.
fn to_coefficients(v: u32, width: usize) -> u32 {
    (0..width).fold(0, |acc, j| acc | ((v >> (width - 1 - j)) & 1) << j)
}

impl ConvCode {
    /// Parses `[1,n/d]` style descriptions; rows separated by `;`.
    pub fn parse(description: &str) -> Result<Self, ConvError> {
        let body = description
            .trim()
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| ConvError::Syntax(description.to_string()))?;
        let rows: Vec<Vec<&str>> = body
            .split(';')
            .map(|r| r.split(',').map(str::trim).collect())
            .collect();
        let k = rows.len();
        let mut numerators = Vec::with_capacity(k);
        let mut denominator = None;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != k + 1 {
                return Err(ConvError::NotSystematic(i));
            }
            for (j, entry) in row[..k].iter().enumerate() {
                let expected = if i == j { "1" } else { "0" };
                if *entry != expected {
                    return Err(ConvError::NotSystematic(i));
                }
            }
            let (num, den) = match row[k].split_once('/') {
                Some((n, d)) => (parse_octal(n)?, parse_octal(d)?),
                None => (parse_octal(row[k])?, 1),
            };
            if *denominator.get_or_insert(den) != den {
                return Err(ConvError::MixedFeedback);
            }
            numerators.push(num);
        }
        let den = denominator.ok_or_else(|| ConvError::Syntax(description.to_string()))?;
        Self::from_octal(&numerators, den, description.trim())
    }

    /// Builds the code from octal feedforward generators (one per input)
    /// and a shared octal feedback generator.
    pub fn from_octal(numerators: &[u32], denominator: u32, description: &str) -> Result<Self, ConvError> {
        let width = numerators
            .iter()
            .chain(std::iter::once(&denominator))
            .map(|&v| bit_len(v))
            .max()
            .unwrap_or(1);
        if width > 17 {
            return Err(ConvError::TooLong);
        }
        let num: Vec<u32> = numerators.iter().map(|&n| to_coefficients(n, width)).collect();
        let den = to_coefficients(denominator, width);
        if den & 1 == 0 {
            return Err(ConvError::FeedbackConstant);
        }
        let memory = width - 1;
        let inputs = num.len();
        let states = 1usize << memory;
        let mut next = vec![0; states << inputs];
        let mut parity = vec![0; states << inputs];
        for s in 0..states as u32 {
            for u in 0..1u32 << inputs {
                let (ns, p) = Self::step_raw(&num, den, memory, s, u);
                next[(s as usize) << inputs | u as usize] = ns;
                parity[(s as usize) << inputs | u as usize] = p;
            }
        }
        let mut code = Self {
            inputs,
            memory,
            numerators: num,
            denominator: den,
            next,
            parity,
            tail: Vec::new(),
            description: description.to_string(),
        };
        code.tail = code.tail_table().ok_or(ConvError::NotTerminable)?;
        Ok(code)
    }

    /// Observer-form transition: `p = s_1 + sum n_i0 u_i`,
    /// `s_j <- s_{j+1} + sum n_ij u_i + d_j p`.
    fn step_raw(num: &[u32], den: u32, memory: usize, state: u32, input: u32) -> (u32, u8) {
        let feed = |j: usize| {
            num.iter()
                .enumerate()
                .fold(0u32, |acc, (i, &n)| acc ^ ((n >> j) & (input >> i) & 1))
        };
        let p = (state & 1) ^ feed(0);
        let mut next = 0;
        for j in 1..=memory {
            let upper = if j < memory { (state >> j) & 1 } else { 0 };
            let bit = upper ^ feed(j) ^ ((den >> j) & p);
            next |= bit << (j - 1);
        }
        (next, p as u8)
    }

    fn tail_table(&self) -> Option<Vec<Vec<u32>>> {
        // Shortest input paths to state zero, by breadth-first search on
        // the reversed trellis, padded with zero inputs.
        let states = self.states();
        let mut first: Vec<Option<(u32, u32)>> = vec![None; states];
        let mut dist = vec![usize::MAX; states];
        dist[0] = 0;
        let mut queue = VecDeque::from([0u32]);
        while let Some(target) = queue.pop_front() {
            for s in 0..states as u32 {
                if dist[s as usize] != usize::MAX {
                    continue;
                }
                for u in 0..1u32 << self.inputs {
                    if self.next_state(s, u) == target {
                        dist[s as usize] = dist[target as usize] + 1;
                        first[s as usize] = Some((u, target));
                        queue.push_back(s);
                        break;
                    }
                }
            }
        }
        (0..states)
            .map(|s| {
                let mut path = Vec::with_capacity(self.memory);
                let mut cur = s;
                while cur != 0 {
                    let (u, nxt) = first[cur]?;
                    path.push(u);
                    cur = nxt as usize;
                }
                path.resize(self.memory.max(path.len()), 0);
                Some(path)
            })
            .collect()
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn states(&self) -> usize {
        1 << self.memory
    }

    /// Feedforward polynomials, bit `j` = coefficient of `x^j`.
    pub fn numerators(&self) -> &[u32] {
        &self.numerators
    }

    pub fn denominator(&self) -> u32 {
        self.denominator
    }

    pub fn next_state(&self, state: u32, input: u32) -> u32 {
        self.next[(state as usize) << self.inputs | input as usize]
    }

    pub fn output(&self, state: u32, input: u32) -> u8 {
        self.parity[(state as usize) << self.inputs | input as usize]
    }

    /// Tail inputs (one `inputs`-bit word per step) returning `state` to zero.
    pub fn tail(&self, state: u32) -> &[u32] {
        &self.tail[state as usize]
    }

    /// Parity of `bits` (`inputs` bits per step, step-major) from the zero
    /// state, with the final state.
    pub fn encode(&self, bits: &[u8]) -> Result<(Vec<u8>, u32), ConvError> {
        if !bits.len().is_multiple_of(self.inputs) {
            return Err(ConvError::InputLength {
                len: bits.len(),
                inputs: self.inputs,
            });
        }
        let mut state = 0;
        let parity = bits
            .chunks(self.inputs)
            .map(|step| {
                let u = step
                    .iter()
                    .enumerate()
                    .fold(0u32, |acc, (i, &b)| acc | u32::from(b & 1) << i);
                let p = self.output(state, u);
                state = self.next_state(state, u);
                p
            })
            .collect();
        Ok((parity, state))
    }

    /// Zero-tail termination: the tail input words and their parity bits.
    pub fn terminate(&self, state: u32) -> (Vec<u32>, Vec<u8>) {
        let mut s = state;
        let mut parity = Vec::with_capacity(self.memory);
        for &u in self.tail(state) {
            parity.push(self.output(s, u));
            s = self.next_state(s, u);
        }
        debug_assert_eq!(s, 0);
        (self.tail(state).to_vec(), parity)
    }
}

impl fmt::Display for ConvCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.description)
    }
}
