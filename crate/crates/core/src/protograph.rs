//! Protograph-based SC-LDPC construction: base matrix, edge spreading,
//! termination into a banded coupled base matrix, and quasi-cyclic lifting.

use std::fmt::Write as _;

use num_rational::Ratio;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::chain::{ChainError, ChainSpec, ChainTranscript};
use crate::sparse::SparseMatrix;

/// Retry cap for the 4-cycle-avoiding shift sampler.
pub const SHIFT_RETRY_CAP: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtographError {
    #[error("matrix is {rows}x{cols} but {len} entries were given")]
    Shape { rows: usize, cols: usize, len: usize },
    #[error("row {0} of the base matrix has no edges")]
    EmptyRow(usize),
    #[error("column {0} of the base matrix has no edges")]
    EmptyColumn(usize),
    #[error("edge spreading needs at least one component")]
    NoComponents,
    #[error("component {0} does not match the base matrix dimensions")]
    ComponentShape(usize),
    #[error("components sum to {found} at ({row}, {col}) but the base entry is {expected}")]
    SpreadSumMismatch {
        row: usize,
        col: usize,
        expected: u32,
        found: u32,
    },
    #[error("spreading has memory {spread} but the chain has memory {chain}")]
    MemoryMismatch { spread: usize, chain: usize },
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("lifting factor {lifting} is smaller than edge multiplicity {multiplicity}")]
    LiftingTooSmall { lifting: usize, multiplicity: u32 },
    #[error("expected {expected} shifts, got {found}")]
    ShiftCount { expected: usize, found: usize },
    #[error("shift {shift} is not below the lifting factor {lifting}")]
    ShiftOutOfRange { shift: usize, lifting: usize },
    #[error("parallel edges at ({row}, {col}) reuse shift {shift}")]
    DuplicateShift { row: usize, col: usize, shift: usize },
    #[error("sub-block coupling parameter s={s} must lie in 1..={max}")]
    InvalidLocality { s: usize, max: usize },
    #[error("mixed row {0} must have length d_c and contain both a one and a zero")]
    InvalidMixedRow(usize),
    #[error("malformed matrix file: {0}")]
    Parse(String),
}

/// Integer protograph matrix; entries are edge multiplicities.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BaseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<u32>,
}

impl BaseMatrix {
    /// Base matrix of an uncoupled protograph; every row and column needs an edge.
    pub fn new(rows: usize, cols: usize, entries: Vec<u32>) -> Result<Self, ProtographError> {
        let m = Self::component(rows, cols, entries)?;
        for r in 0..rows {
            if (0..cols).all(|c| m.get(r, c) == 0) {
                return Err(ProtographError::EmptyRow(r));
            }
        }
        for c in 0..cols {
            if (0..rows).all(|r| m.get(r, c) == 0) {
                return Err(ProtographError::EmptyColumn(c));
            }
        }
        Ok(m)
    }

    /// A spreading component; rows or columns may be empty.
    pub fn component(rows: usize, cols: usize, entries: Vec<u32>) -> Result<Self, ProtographError> {
        if entries.len() != rows * cols {
            return Err(ProtographError::Shape {
                rows,
                cols,
                len: entries.len(),
            });
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(rows: &[&[u32]]) -> Result<Self, ProtographError> {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn component_from_rows(rows: &[&[u32]]) -> Result<Self, ProtographError> {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::component(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.entries[r * self.cols + c]
    }

    /// Variable-node degrees.
    pub fn column_sums(&self) -> Vec<u32> {
        (0..self.cols)
            .map(|c| (0..self.rows).map(|r| self.get(r, c)).sum())
            .collect()
    }

    /// Check-node degrees.
    pub fn row_sums(&self) -> Vec<u32> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c)).sum())
            .collect()
    }

    pub fn max_entry(&self) -> u32 {
        self.entries.iter().copied().max().unwrap_or(0)
    }
}

/// Decomposition `B = B_0 + ... + B_m` of a base matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeSpreading {
    base: BaseMatrix,
    components: Vec<BaseMatrix>,
}

impl EdgeSpreading {
    pub fn new(base: BaseMatrix, components: Vec<BaseMatrix>) -> Result<Self, ProtographError> {
        if components.is_empty() {
            return Err(ProtographError::NoComponents);
        }
        for (i, b) in components.iter().enumerate() {
            if b.rows != base.rows || b.cols != base.cols {
                return Err(ProtographError::ComponentShape(i));
            }
        }
        for r in 0..base.rows {
            for c in 0..base.cols {
                let found: u32 = components.iter().map(|b| b.get(r, c)).sum();
                if found != base.get(r, c) {
                    return Err(ProtographError::SpreadSumMismatch {
                        row: r,
                        col: c,
                        expected: base.get(r, c),
                        found,
                    });
                }
            }
        }
        Ok(Self { base, components })
    }

    pub fn base(&self) -> &BaseMatrix {
        &self.base
    }

    pub fn components(&self) -> &[BaseMatrix] {
        &self.components
    }

    pub fn memory(&self) -> usize {
        self.components.len() - 1
    }
}

/// Terminated banded matrix `B_SC` with `L` block columns and `L+m` block rows.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoupledBaseMatrix {
    spread: EdgeSpreading,
    chain: ChainSpec,
}

/// One nonzero entry of a base matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaseEntry {
    pub row: usize,
    pub col: usize,
    pub multiplicity: u32,
}

impl CoupledBaseMatrix {
    pub fn new(spread: EdgeSpreading, chain: ChainSpec) -> Result<Self, ProtographError> {
        chain.validate()?;
        if spread.memory() != chain.memory() {
            return Err(ProtographError::MemoryMismatch {
                spread: spread.memory(),
                chain: chain.memory(),
            });
        }
        Ok(Self { spread, chain })
    }

    pub fn spreading(&self) -> &EdgeSpreading {
        &self.spread
    }

    pub fn chain(&self) -> ChainSpec {
        self.chain
    }

    /// Check nodes per position (`b_c`).
    pub fn checks_per_position(&self) -> usize {
        self.spread.base.rows
    }

    /// Variable nodes per position (`b_v`).
    pub fn vars_per_position(&self) -> usize {
        self.spread.base.cols
    }

    pub fn rows(&self) -> usize {
        (self.chain.length() + self.chain.memory()) * self.checks_per_position()
    }

    pub fn cols(&self) -> usize {
        self.chain.length() * self.vars_per_position()
    }

    pub fn get(&self, row: usize, col: usize) -> u32 {
        let (bc, bv) = (self.checks_per_position(), self.vars_per_position());
        let (rp, cp) = (row / bc, col / bv);
        if rp < cp || rp - cp > self.chain.memory() {
            return 0;
        }
        self.spread.components[rp - cp].get(row % bc, col % bv)
    }

    /// Nonzero entries in row-major order.
    pub fn entries(&self) -> Vec<BaseEntry> {
        let mut out = Vec::new();
        for row in 0..self.rows() {
            for col in 0..self.cols() {
                let multiplicity = self.get(row, col);
                if multiplicity > 0 {
                    out.push(BaseEntry {
                        row,
                        col,
                        multiplicity,
                    });
                }
            }
        }
        out
    }

    pub fn var_position(&self, col: usize) -> usize {
        col / self.vars_per_position()
    }

    pub fn check_position(&self, row: usize) -> usize {
        row / self.checks_per_position()
    }

    /// `1 - (L+m) b_c / (L b_v)`.
    pub fn design_rate(&self) -> Ratio<i64> {
        let l = self.chain.length() as i64;
        let m = self.chain.memory() as i64;
        let bc = self.checks_per_position() as i64;
        let bv = self.vars_per_position() as i64;
        Ratio::from_integer(1) - Ratio::new((l + m) * bc, l * bv)
    }

    /// Rate of the uncoupled base code, `1 - b_c / b_v` (the `L -> inf` limit).
    pub fn asymptotic_rate(&self) -> Ratio<i64> {
        Ratio::from_integer(1)
            - Ratio::new(
                self.checks_per_position() as i64,
                self.vars_per_position() as i64,
            )
    }
}

/// Builds `B_SC` from a spreading: block `(t+i, t)` is `B_i`.
pub fn build_coupled_base(
    spread: &EdgeSpreading,
    chain: ChainSpec,
) -> Result<CoupledBaseMatrix, ProtographError> {
    CoupledBaseMatrix::new(spread.clone(), chain)
}

/// The (3,6)-regular base `[3 3]` spread over `memory + 1` components:
/// `[3 3]` for m=0, `[2 2] + [1 1]` for m=1 and `[1 1]` thrice for m=2.
pub fn regular_36_chain(length: usize, memory: usize) -> Result<CoupledBaseMatrix, ProtographError> {
    let rows: Vec<&[u32]> = match memory {
        0 => vec![&[3, 3]],
        1 => vec![&[2, 2], &[1, 1]],
        2 => vec![&[1, 1], &[1, 1], &[1, 1]],
        _ => return Err(ProtographError::MemoryMismatch { spread: 2, chain: memory }),
    };
    let components = rows
        .into_iter()
        .map(|r| BaseMatrix::component_from_rows(&[r]))
        .collect::<Result<Vec<_>, _>>()?;
    let spread = EdgeSpreading::new(BaseMatrix::from_rows(&[&[3, 3]])?, components)?;
    CoupledBaseMatrix::new(spread, ChainSpec::new(length, memory)?)
}

/// How circulant shifts are chosen when lifting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ShiftRule {
    /// One shift per edge copy, in the order of [`CoupledBaseMatrix::entries`]
    /// with parallel copies adjacent.
    Explicit(Vec<usize>),
    /// Seeded random shifts, resampled to avoid closing 4-cycles.
    Random { seed: u64 },
}

/// A lifted edge: circulant `P^shift` at block `(row, col)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LiftedEdge {
    pub row: usize,
    pub col: usize,
    pub shift: usize,
}

/// Quasi-cyclic parity-check matrix over a base matrix.
///
/// Row `row*M + i` of the binary matrix has a one in column
/// `col*M + (i + shift) mod M` for every lifted edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QcMatrix {
    block_rows: usize,
    block_cols: usize,
    lifting: usize,
    edges: Vec<LiftedEdge>,
}

impl QcMatrix {
    pub fn new(
        block_rows: usize,
        block_cols: usize,
        lifting: usize,
        edges: Vec<LiftedEdge>,
    ) -> Result<Self, ProtographError> {
        for e in &edges {
            if e.shift >= lifting {
                return Err(ProtographError::ShiftOutOfRange {
                    shift: e.shift,
                    lifting,
                });
            }
            if e.row >= block_rows || e.col >= block_cols {
                return Err(ProtographError::Parse(format!(
                    "edge ({}, {}) outside {}x{} blocks",
                    e.row, e.col, block_rows, block_cols
                )));
            }
        }
        let mut seen: Vec<(usize, usize, usize)> =
            edges.iter().map(|e| (e.row, e.col, e.shift)).collect();
        seen.sort_unstable();
        if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
            return Err(ProtographError::DuplicateShift {
                row: w[0].0,
                col: w[0].1,
                shift: w[0].2,
            });
        }
        Ok(Self {
            block_rows,
            block_cols,
            lifting,
            edges,
        })
    }

    pub fn lifting(&self) -> usize {
        self.lifting
    }

    pub fn block_rows(&self) -> usize {
        self.block_rows
    }

    pub fn block_cols(&self) -> usize {
        self.block_cols
    }

    pub fn edges(&self) -> &[LiftedEdge] {
        &self.edges
    }

    pub fn to_sparse(&self) -> SparseMatrix {
        let m = self.lifting;
        let entries = self.edges.iter().flat_map(|e| {
            (0..m).map(move |i| (e.row * m + i, e.col * m + (i + e.shift) % m))
        });
        SparseMatrix::from_entries(self.block_rows * m, self.block_cols * m, entries)
            .expect("distinct shifts give a simple graph")
    }

    /// Design accounting of this lift of `base` per chain position: every
    /// variable node is a transmitted bit and every check node removes one
    /// information bit. Checks of the termination positions are charged to
    /// the latest positions that still have information bits. The true
    /// dimension can be larger when checks are dependent (see
    /// [`SparseMatrix::rank`]).
    pub fn transcript(&self, base: &CoupledBaseMatrix) -> ChainTranscript {
        assert_eq!(self.block_cols, base.cols(), "lift does not belong to this base matrix");
        let m = self.lifting;
        let positions = base.chain().length();
        let vars = (base.vars_per_position() * m) as u64;
        let checks = (base.checks_per_position() * m) as u64;
        let mut tr = ChainTranscript::new(positions);
        for t in 0..positions {
            tr.record(t, vars, vars);
            tr.retract(t, checks.min(vars));
        }
        let mut excess = (self.block_rows * m) as u64 - positions as u64 * checks.min(vars);
        for t in (0..positions).rev() {
            let take = excess.min(tr.positions()[t].information);
            tr.retract(t, take);
            excess -= take;
        }
        tr
    }

    /// Whether the lifted graph contains a 4-cycle, decided from the shifts.
    pub fn has_four_cycle(&self) -> bool {
        let index = EdgeIndex::new(self.block_rows, self.block_cols, &self.edges);
        let shifts: Vec<Option<usize>> = self.edges.iter().map(|e| Some(e.shift)).collect();
        (0..self.edges.len()).any(|e| index.closes_four_cycle(e, &shifts, self.lifting))
    }

    /// Girth of the lifted Tanner graph. Circulant symmetry lets one
    /// variable node per block column stand in for its whole block.
    pub fn girth(&self) -> Option<usize> {
        let roots: Vec<usize> = (0..self.block_cols).map(|c| c * self.lifting).collect();
        self.to_sparse().girth_from_roots(&roots)
    }

    /// Text form: header `rows cols M`, then one `row col shift` line per edge.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.block_rows, self.block_cols, self.lifting);
        for e in &self.edges {
            writeln!(out, "{} {} {}", e.row, e.col, e.shift).unwrap();
        }
        out
    }

    /// Parses [`QcMatrix::to_text`] output; `#` lines are comments.
    pub fn from_text(text: &str) -> Result<Self, ProtographError> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let parse_line = |line: &str| -> Result<[usize; 3], ProtographError> {
            let nums: Vec<usize> = line
                .split_whitespace()
                .map(|t| {
                    t.parse()
                        .map_err(|_| ProtographError::Parse(format!("bad integer {t:?}")))
                })
                .collect::<Result<_, _>>()?;
            <[usize; 3]>::try_from(nums)
                .map_err(|_| ProtographError::Parse(format!("expected three fields: {line:?}")))
        };
        let header = lines
            .next()
            .ok_or_else(|| ProtographError::Parse("missing header".into()))?;
        let [rows, cols, lifting] = parse_line(header)?;
        if lifting == 0 {
            return Err(ProtographError::Parse("lifting factor must be positive".into()));
        }
        let edges = lines
            .map(|l| parse_line(l).map(|[row, col, shift]| LiftedEdge { row, col, shift }))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(rows, cols, lifting, edges)
    }
}

/// Lifts every nonzero entry of `base` to a sum of circulants of size `lifting`.
pub fn lift(
    base: &CoupledBaseMatrix,
    lifting: usize,
    rule: &ShiftRule,
) -> Result<QcMatrix, ProtographError> {
    let entries = base.entries();
    let max = entries.iter().map(|e| e.multiplicity).max().unwrap_or(0);
    if lifting == 0 || (max as usize) > lifting {
        return Err(ProtographError::LiftingTooSmall {
            lifting,
            multiplicity: max,
        });
    }
    let mut edges: Vec<LiftedEdge> = entries
        .iter()
        .flat_map(|e| {
            (0..e.multiplicity).map(|_| LiftedEdge {
                row: e.row,
                col: e.col,
                shift: 0,
            })
        })
        .collect();
    match rule {
        ShiftRule::Explicit(shifts) => {
            if shifts.len() != edges.len() {
                return Err(ProtographError::ShiftCount {
                    expected: edges.len(),
                    found: shifts.len(),
                });
            }
            for (e, &s) in edges.iter_mut().zip(shifts) {
                e.shift = s;
            }
        }
        ShiftRule::Random { seed } => {
            let shifts = sample_shifts(base.rows(), base.cols(), &edges, lifting, *seed);
            for (e, s) in edges.iter_mut().zip(shifts) {
                e.shift = s;
            }
        }
    }
    QcMatrix::new(base.rows(), base.cols(), lifting, edges)
}

/// Greedy per-edge sampling: each shift is redrawn until it closes no 4-cycle
/// with the already-placed edges, or the retry cap is hit. Shifts of
/// parallel edges are always kept distinct.
fn sample_shifts(
    rows: usize,
    cols: usize,
    edges: &[LiftedEdge],
    lifting: usize,
    seed: u64,
) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let index = EdgeIndex::new(rows, cols, edges);
    let mut shifts: Vec<Option<usize>> = vec![None; edges.len()];
    for e in 0..edges.len() {
        let parallel: Vec<usize> = index.parallel(e).filter_map(|f| shifts[f]).collect();
        let mut chosen = None;
        let mut fallback = None;
        for _ in 0..SHIFT_RETRY_CAP {
            let s = rng.random_range(0..lifting);
            if parallel.contains(&s) {
                continue;
            }
            shifts[e] = Some(s);
            if !index.closes_four_cycle(e, &shifts, lifting) {
                chosen = Some(s);
                break;
            }
            fallback.get_or_insert(s);
        }
        shifts[e] = chosen
            .or(fallback)
            .or_else(|| (0..lifting).find(|s| !parallel.contains(s)));
    }
    shifts.into_iter().map(|s| s.expect("lifting >= multiplicity")).collect()
}

/// Adjacency of protograph edges, used to evaluate 4-cycle conditions.
struct EdgeIndex {
    edges: Vec<(usize, usize)>,
    by_row: Vec<Vec<usize>>,
    by_col: Vec<Vec<usize>>,
}

impl EdgeIndex {
    fn new(rows: usize, cols: usize, edges: &[LiftedEdge]) -> Self {
        let mut by_row = vec![Vec::new(); rows];
        let mut by_col = vec![Vec::new(); cols];
        for (i, e) in edges.iter().enumerate() {
            by_row[e.row].push(i);
            by_col[e.col].push(i);
        }
        Self {
            edges: edges.iter().map(|e| (e.row, e.col)).collect(),
            by_row,
            by_col,
        }
    }

    fn parallel(&self, e: usize) -> impl Iterator<Item = usize> + '_ {
        let (r, c) = self.edges[e];
        self.by_row[r]
            .iter()
            .copied()
            .filter(move |&f| f != e && self.edges[f].1 == c)
    }

    /// A lifted 4-cycle exists iff some non-backtracking closed walk
    /// `c1 -e1- v1 -e2- c2 -e3- v2 -e4- c1` has `s1 - s2 + s3 - s4 = 0 mod M`.
    /// Only walks through `e` whose edges all have shifts are checked.
    fn closes_four_cycle(&self, e: usize, shifts: &[Option<usize>], lifting: usize) -> bool {
        let m = lifting as i64;
        let s = |i: usize| shifts[i].map(|v| v as i64);
        let Some(s1) = s(e) else { return false };
        let (c1, v1) = self.edges[e];
        for &e2 in &self.by_col[v1] {
            if e2 == e {
                continue;
            }
            let Some(s2) = s(e2) else { continue };
            let c2 = self.edges[e2].0;
            for &e3 in &self.by_row[c2] {
                if e3 == e2 {
                    continue;
                }
                let Some(s3) = s(e3) else { continue };
                let v2 = self.edges[e3].1;
                for &e4 in &self.by_col[v2] {
                    if e4 == e3 || e4 == e || self.edges[e4].0 != c1 {
                        continue;
                    }
                    let Some(s4) = s(e4) else { continue };
                    if (s1 - s2 + s3 - s4).rem_euclid(m) == 0 {
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// Parameters of a `(d_v, d_c, s)`-regular code with sub-block locality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubBlockSpec {
    pub var_degree: usize,
    pub check_degree: usize,
    pub coupling_checks: usize,
    /// The `s` mixed rows of `B_0`.
    pub mixed_rows: Vec<Vec<u32>>,
}

impl SubBlockSpec {
    /// Uses the default mixed row (ones in the first `ceil(d_c/2)` positions).
    pub fn with_default_rows(
        var_degree: usize,
        check_degree: usize,
        coupling_checks: usize,
    ) -> Self {
        let half = check_degree.div_ceil(2);
        let row: Vec<u32> = (0..check_degree).map(|j| u32::from(j < half)).collect();
        Self {
            var_degree,
            check_degree,
            coupling_checks,
            mixed_rows: vec![row; coupling_checks],
        }
    }

    pub fn validate(&self) -> Result<(), ProtographError> {
        let max = self.var_degree.saturating_sub(2);
        if self.coupling_checks < 1 || self.coupling_checks > max {
            return Err(ProtographError::InvalidLocality {
                s: self.coupling_checks,
                max,
            });
        }
        if self.mixed_rows.len() != self.coupling_checks {
            return Err(ProtographError::InvalidMixedRow(self.mixed_rows.len()));
        }
        for (i, row) in self.mixed_rows.iter().enumerate() {
            let ones = row.iter().filter(|&&x| x == 1).count();
            let valid = row.len() == self.check_degree
                && row.iter().all(|&x| x <= 1)
                && ones > 0
                && ones < row.len();
            if !valid {
                return Err(ProtographError::InvalidMixedRow(i));
            }
        }
        Ok(())
    }

    /// `B_0` (all-one local rows first, then the mixed rows) and `B_1 = 1 - B_0`.
    pub fn spreading(&self) -> Result<EdgeSpreading, ProtographError> {
        self.validate()?;
        let (dv, dc) = (self.var_degree, self.check_degree);
        let local = dv - self.coupling_checks;
        let mut b0 = vec![1u32; local * dc];
        for row in &self.mixed_rows {
            b0.extend_from_slice(row);
        }
        let b1: Vec<u32> = b0.iter().map(|&x| 1 - x).collect();
        let base = BaseMatrix::new(dv, dc, vec![1; dv * dc])?;
        EdgeSpreading::new(
            base,
            vec![
                BaseMatrix::component(dv, dc, b0)?,
                BaseMatrix::component(dv, dc, b1)?,
            ],
        )
    }
}

/// Coupled base matrix with sub-block locality (memory `T = 1`).
pub fn subblock_construct(
    spec: &SubBlockSpec,
    length: usize,
) -> Result<CoupledBaseMatrix, ProtographError> {
    let spread = spec.spreading()?;
    CoupledBaseMatrix::new(spread, ChainSpec::new(length, 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(rows: &[&[u32]]) -> BaseMatrix {
        BaseMatrix::component_from_rows(rows).unwrap()
    }

    fn spread_m1() -> EdgeSpreading {
        EdgeSpreading::new(
            BaseMatrix::from_rows(&[&[3, 3]]).unwrap(),
            vec![b(&[&[2, 2]]), b(&[&[1, 1]])],
        )
        .unwrap()
    }

    fn spread_m2() -> EdgeSpreading {
        EdgeSpreading::new(
            BaseMatrix::from_rows(&[&[3, 3]]).unwrap(),
            vec![b(&[&[1, 1]]); 3],
        )
        .unwrap()
    }

    #[test]
    fn edge_spreading_checks_sum() {
        spread_m1();
        spread_m2();
        let err = EdgeSpreading::new(
            BaseMatrix::from_rows(&[&[3, 3]]).unwrap(),
            vec![b(&[&[3, 3]]), b(&[&[1, 0]])],
        )
        .unwrap_err();
        assert!(matches!(err, ProtographError::SpreadSumMismatch { .. }));
    }

    #[test]
    fn base_matrix_needs_edges_everywhere() {
        assert_eq!(
            BaseMatrix::from_rows(&[&[1, 0]]),
            Err(ProtographError::EmptyColumn(1))
        );
    }

    #[test]
    fn coupled_matrix_is_banded() {
        let spread = EdgeSpreading::new(
            BaseMatrix::from_rows(&[&[3, 3]]).unwrap(),
            vec![b(&[&[2, 2]]), b(&[&[1, 1]])],
        )
        .unwrap();
        let cb = build_coupled_base(&spread, ChainSpec::new(3, 1).unwrap()).unwrap();
        assert_eq!((cb.rows(), cb.cols()), (4, 6));
        let dense: Vec<Vec<u32>> = (0..4)
            .map(|r| (0..6).map(|c| cb.get(r, c)).collect())
            .collect();
        assert_eq!(
            dense,
            vec![
                vec![2, 2, 0, 0, 0, 0],
                vec![1, 1, 2, 2, 0, 0],
                vec![0, 0, 1, 1, 2, 2],
                vec![0, 0, 0, 0, 1, 1],
            ]
        );
        // column-sum oracle: every VN keeps degree 3
        for c in 0..6 {
            assert_eq!((0..4).map(|r| cb.get(r, c)).sum::<u32>(), 3);
        }
    }

    #[test]
    fn design_rate_of_small_example() {
        let cb = build_coupled_base(&spread_m2(), ChainSpec::new(5, 2).unwrap()).unwrap();
        assert_eq!(cb.design_rate(), Ratio::new(3, 10));
        let cb = build_coupled_base(&spread_m1(), ChainSpec::new(50, 1).unwrap()).unwrap();
        assert_eq!(cb.design_rate(), Ratio::new(49, 100));
        assert_eq!(cb.asymptotic_rate(), Ratio::new(1, 2));
    }

    #[test]
    fn degenerate_chain_is_the_block_code() {
        let spread = EdgeSpreading::new(
            BaseMatrix::from_rows(&[&[3, 3]]).unwrap(),
            vec![b(&[&[3, 3]])],
        )
        .unwrap();
        let cb = build_coupled_base(&spread, ChainSpec::new(1, 0).unwrap()).unwrap();
        assert_eq!((cb.rows(), cb.cols()), (1, 2));
        assert_eq!((cb.get(0, 0), cb.get(0, 1)), (3, 3));
    }

    #[test]
    fn memory_mismatch_is_rejected() {
        let err = build_coupled_base(&spread_m1(), ChainSpec::new(5, 2).unwrap()).unwrap_err();
        assert!(matches!(err, ProtographError::MemoryMismatch { .. }));
    }

    fn two_by_two() -> CoupledBaseMatrix {
        let spread = EdgeSpreading::new(
            BaseMatrix::from_rows(&[&[1, 1], &[1, 1]]).unwrap(),
            vec![b(&[&[1, 1], &[1, 1]])],
        )
        .unwrap();
        CoupledBaseMatrix::new(spread, ChainSpec::new(1, 0).unwrap()).unwrap()
    }

    #[test]
    fn identity_lift_reproduces_base() {
        let qc = lift(&two_by_two(), 1, &ShiftRule::Explicit(vec![0; 4])).unwrap();
        assert_eq!(qc.to_sparse().to_dense(), "11\n11\n");
    }

    #[test]
    fn four_cycle_shift_condition() {
        let bad = lift(&two_by_two(), 2, &ShiftRule::Explicit(vec![0, 0, 0, 0])).unwrap();
        assert!(bad.has_four_cycle());
        assert_eq!(bad.girth(), Some(4));
        let good = lift(&two_by_two(), 2, &ShiftRule::Explicit(vec![0, 0, 0, 1])).unwrap();
        assert!(!good.has_four_cycle());
        assert_eq!(good.girth(), Some(8));
    }

    #[test]
    fn lifting_must_cover_multiplicity() {
        let cb = build_coupled_base(&spread_m1(), ChainSpec::new(3, 1).unwrap()).unwrap();
        assert_eq!(
            lift(&cb, 1, &ShiftRule::Random { seed: 1 }),
            Err(ProtographError::LiftingTooSmall {
                lifting: 1,
                multiplicity: 2
            })
        );
    }

    #[test]
    fn parallel_edges_need_distinct_shifts() {
        let spread = EdgeSpreading::new(
            BaseMatrix::from_rows(&[&[2]]).unwrap(),
            vec![b(&[&[2]])],
        )
        .unwrap();
        let cb = CoupledBaseMatrix::new(spread, ChainSpec::new(1, 0).unwrap()).unwrap();
        let err = lift(&cb, 4, &ShiftRule::Explicit(vec![1, 1])).unwrap_err();
        assert!(matches!(err, ProtographError::DuplicateShift { .. }));
    }

    #[test]
    fn shared_shift_pairs_on_double_edges_give_four_cycles() {
        let spread = EdgeSpreading::new(
            BaseMatrix::from_rows(&[&[2, 2]]).unwrap(),
            vec![b(&[&[2, 2]])],
        )
        .unwrap();
        let cb = CoupledBaseMatrix::new(spread, ChainSpec::new(1, 0).unwrap()).unwrap();
        let qc = lift(&cb, 5, &ShiftRule::Explicit(vec![0, 2, 0, 2])).unwrap();
        assert!(qc.has_four_cycle());
        assert_eq!(qc.girth(), Some(4));
    }

    #[test]
    fn random_lift_preserves_degrees_and_avoids_four_cycles() {
        let cb = build_coupled_base(&spread_m1(), ChainSpec::new(6, 1).unwrap()).unwrap();
        let qc = lift(&cb, 31, &ShiftRule::Random { seed: 7 }).unwrap();
        assert!(!qc.has_four_cycle());
        let h = qc.to_sparse();
        assert!((0..h.cols()).all(|c| h.col(c).len() == 3));
        // interior check positions have degree 6
        for r in 31..(6 * 31) {
            assert_eq!(h.row(r).len(), 6);
        }
        assert!(qc.girth().unwrap() >= 6);
    }

    #[test]
    fn text_round_trip() {
        let cb = build_coupled_base(&spread_m2(), ChainSpec::new(4, 2).unwrap()).unwrap();
        let qc = lift(&cb, 7, &ShiftRule::Random { seed: 3 }).unwrap();
        let text = qc.to_text();
        assert!(text.starts_with("6 8 7\n"));
        assert_eq!(QcMatrix::from_text(&text).unwrap(), qc);
    }

    #[test]
    fn subblock_spreading() {
        let spec = SubBlockSpec {
            var_degree: 3,
            check_degree: 6,
            coupling_checks: 1,
            mixed_rows: vec![vec![1, 1, 1, 0, 0, 0]],
        };
        let spread = spec.spreading().unwrap();
        let [b0, b1] = spread.components() else {
            panic!("memory one")
        };
        assert_eq!(b0.row_sums(), vec![6, 6, 3]);
        assert_eq!(b1.row_sums(), vec![0, 0, 3]);
        for r in 0..3 {
            for c in 0..6 {
                assert_eq!(b0.get(r, c) + b1.get(r, c), 1);
            }
        }
        assert_eq!(spec, SubBlockSpec::with_default_rows(3, 6, 1));
        let cb = subblock_construct(&spec, 4).unwrap();
        assert_eq!(cb.design_rate(), Ratio::new(3, 8));
    }

    #[test]
    fn subblock_bounds() {
        for s in [0, 2] {
            let spec = SubBlockSpec::with_default_rows(3, 6, s);
            assert!(matches!(
                spec.validate(),
                Err(ProtographError::InvalidLocality { .. })
            ));
        }
        let mut spec = SubBlockSpec::with_default_rows(4, 8, 1);
        spec.mixed_rows[0] = vec![1; 8];
        assert_eq!(spec.validate(), Err(ProtographError::InvalidMixedRow(0)));
    }
}
