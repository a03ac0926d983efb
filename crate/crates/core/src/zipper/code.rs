//! Zipper codes: a chain of component codewords (rows) whose leading
//! virtual bits are copies of earlier real bits, selected by a causal
//! interleaver map. Only real bits are transmitted.

use super::bch::BchCode;
use crate::channels::ChannelError;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZipperError {
    #[error("virtual bit ({row},{col}) maps to row {target_row}, which is not earlier")]
    NonCausalMap { row: usize, col: usize, target_row: isize },
    #[error("virtual bits ({0},{1}) and ({2},{3}) map to the same real bit")]
    CollidingMap(usize, usize, usize, usize),
    #[error("virtual bit ({row},{col}) maps outside the real set: ({target_row},{target_col})")]
    RangeViolation {
        row: usize,
        col: usize,
        target_row: isize,
        target_col: usize,
    },
    #[error("row {row} has {virtual_len} virtual bits but the component has only {k} information bits")]
    TooManyVirtual { row: usize, virtual_len: usize, k: usize },
    #[error("staircase components need even length and k > n/2, got ({n},{k})")]
    StaircaseShape { n: usize, k: usize },
    #[error("expected {expected} bits, found {found}")]
    Length { expected: usize, found: usize },
    #[error("the map defines only {available} rows, {requested} requested")]
    TooManyRows { requested: usize, available: usize },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("window of {window} rows cannot hold a span of {span} rows with slide {slide}")]
    BadWindow { window: usize, slide: usize, span: usize },
}

/// Interleaver map from virtual to real indices. Target rows below zero
/// refer to the all-zero initial state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ZipperMap {
    /// Staircase layout with half-length `h`: virtual bit `j` of row
    /// `h*b + r` copies real bit `(h*(b-1) + j, h + r)`.
    Staircase { half: usize },
    /// Explicit targets, one list per row; the list length is the number
    /// of virtual bits of that row.
    Table(Vec<Vec<(isize, usize)>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZipperSpec {
    component: BchCode,
    map: ZipperMap,
}

impl ZipperSpec {
    pub fn new(component: BchCode, map: ZipperMap) -> Self {
        Self { component, map }
    }

    /// The zipper form of the staircase code over `component`.
    pub fn staircase(component: BchCode) -> Result<Self, ZipperError> {
        let (n, k) = (component.n(), component.k());
        if n % 2 != 0 || 2 * k <= n {
            return Err(ZipperError::StaircaseShape { n, k });
        }
        Ok(Self::new(component, ZipperMap::Staircase { half: n / 2 }))
    }

    pub fn component(&self) -> &BchCode {
        &self.component
    }

    pub fn map(&self) -> &ZipperMap {
        &self.map
    }

    /// Rows the map defines, if finite.
    pub fn max_rows(&self) -> Option<usize> {
        match &self.map {
            ZipperMap::Staircase { .. } => None,
            ZipperMap::Table(t) => Some(t.len()),
        }
    }

    /// Number of virtual bits of row `row`.
    pub fn virtual_len(&self, row: usize) -> usize {
        match &self.map {
            ZipperMap::Staircase { half } => *half,
            ZipperMap::Table(t) => t[row].len(),
        }
    }

    pub fn real_len(&self, row: usize) -> usize {
        self.component.n() - self.virtual_len(row)
    }

    pub fn info_len(&self, row: usize) -> usize {
        self.component.k() - self.virtual_len(row)
    }

    /// Real index copied into virtual bit `col` of row `row`.
    pub fn target(&self, row: usize, col: usize) -> (isize, usize) {
        match &self.map {
            ZipperMap::Staircase { half } => {
                let (b, r) = (row / half, row % half);
                ((b as isize - 1) * *half as isize + col as isize, half + r)
            }
            ZipperMap::Table(t) => t[row][col],
        }
    }

    /// Largest backward row distance of the map over the first `rows` rows.
    pub fn span(&self, rows: usize) -> usize {
        match &self.map {
            ZipperMap::Staircase { half } => 2 * half - 1,
            ZipperMap::Table(_) => (0..rows)
                .flat_map(|i| (0..self.virtual_len(i)).map(move |j| (i, j)))
                .map(|(i, j)| (i as isize - self.target(i, j).0) as usize)
                .max()
                .unwrap_or(0),
        }
    }

    fn check_rows(&self, rows: usize) -> Result<(), ZipperError> {
        match self.max_rows() {
            Some(available) if rows > available => Err(ZipperError::TooManyRows {
                requested: rows,
                available,
            }),
            _ => Ok(()),
        }
    }

    /// Checks causality, range membership and injectivity of the map over
    /// the first `rows` rows.
    pub fn validate(&self, rows: usize) -> Result<(), ZipperError> {
        self.check_rows(rows)?;
        let n = self.component.n();
        let k = self.component.k();
        let mut seen: HashMap<(isize, usize), (usize, usize)> = HashMap::new();
        for i in 0..rows {
            let m = self.virtual_len(i);
            if m > k {
                return Err(ZipperError::TooManyVirtual {
                    row: i,
                    virtual_len: m,
                    k,
                });
            }
            for j in 0..m {
                let (ti, tj) = self.target(i, j);
                if ti >= i as isize {
                    return Err(ZipperError::NonCausalMap {
                        row: i,
                        col: j,
                        target_row: ti,
                    });
                }
                let in_real = tj < n && (ti < 0 || tj >= self.virtual_len(ti as usize));
                if !in_real {
                    return Err(ZipperError::RangeViolation {
                        row: i,
                        col: j,
                        target_row: ti,
                        target_col: tj,
                    });
                }
                if let Some(&(pi, pj)) = seen.get(&(ti, tj)) {
                    return Err(ZipperError::CollidingMap(pi, pj, i, j));
                }
                seen.insert((ti, tj), (i, j));
            }
        }
        Ok(())
    }

    /// Total transmitted bits of the first `rows` rows.
    pub fn real_bits(&self, rows: usize) -> usize {
        (0..rows).map(|i| self.real_len(i)).sum()
    }

    /// Total information bits of the first `rows` rows.
    pub fn info_bits(&self, rows: usize) -> usize {
        (0..rows).map(|i| self.info_len(i)).sum()
    }

    /// Offsets of each row's real bits in the transmitted stream.
    pub fn row_offsets(&self, rows: usize) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(rows + 1);
        let mut acc = 0;
        offsets.push(0);
        for i in 0..rows {
            acc += self.real_len(i);
            offsets.push(acc);
        }
        offsets
    }

    /// Assembles row `row` from the real bits in `stream`, reading virtual
    /// bits through the map.
    pub(crate) fn assemble(&self, row: usize, stream: &[u8], offsets: &[usize], out: &mut Vec<u8>) {
        out.clear();
        for j in 0..self.virtual_len(row) {
            out.push(self.read(self.target(row, j), stream, offsets));
        }
        out.extend_from_slice(&stream[offsets[row]..offsets[row + 1]]);
    }

    /// Stream index of real bit `(row, col)`, or `None` for the zero state.
    pub(crate) fn locate(&self, (row, col): (isize, usize), offsets: &[usize]) -> Option<usize> {
        (row >= 0).then(|| offsets[row as usize] + col - self.virtual_len(row as usize))
    }

    fn read(&self, index: (isize, usize), stream: &[u8], offsets: &[usize]) -> u8 {
        self.locate(index, offsets).map_or(0, |p| stream[p])
    }

    /// Encodes `rows` rows serially. Each row is `[virtual | info | parity]`
    /// and its real part `[info | parity]` is appended to the output.
    pub fn encode(&self, info: &[u8], rows: usize) -> Result<Vec<u8>, ZipperError> {
        self.check_rows(rows)?;
        let expected = self.info_bits(rows);
        if info.len() != expected {
            return Err(ZipperError::Length {
                expected,
                found: info.len(),
            });
        }
        let offsets = self.row_offsets(rows);
        let mut stream = vec![0u8; offsets[rows]];
        let mut word = Vec::with_capacity(self.component.n());
        let mut consumed = 0;
        for i in 0..rows {
            let m = self.virtual_len(i);
            let fresh = self.info_len(i);
            self.assemble(i, &stream, &offsets, &mut word);
            word[m..m + fresh].copy_from_slice(&info[consumed..consumed + fresh]);
            consumed += fresh;
            self.component.fill_parity(&mut word);
            stream[offsets[i]..offsets[i + 1]].copy_from_slice(&word[m..]);
        }
        Ok(stream)
    }

    /// Information bits of an emitted stream.
    pub fn extract_info(&self, stream: &[u8], rows: usize) -> Vec<u8> {
        let offsets = self.row_offsets(rows);
        (0..rows)
            .flat_map(|i| stream[offsets[i]..offsets[i] + self.info_len(i)].iter().copied())
            .collect()
    }

    /// Whether every assembled row of `stream` is a component codeword.
    pub fn is_codeword(&self, stream: &[u8], rows: usize) -> bool {
        let offsets = self.row_offsets(rows);
        if stream.len() != offsets[rows] {
            return false;
        }
        let mut word = Vec::with_capacity(self.component.n());
        (0..rows).all(|i| {
            self.assemble(i, stream, &offsets, &mut word);
            self.component.is_codeword(&word)
        })
    }
}
