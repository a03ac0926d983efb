//! Sparse binary parity-check matrices.

use std::collections::VecDeque;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SparseError {
    #[error("entry ({row}, {col}) lies outside a {rows}x{cols} matrix")]
    OutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("entry ({row}, {col}) appears twice")]
    Duplicate { row: usize, col: usize },
    #[error("dense row {0} has a different length or a character other than 0/1")]
    BadDenseRow(usize),
}

/// Binary matrix stored as row and column adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_adj: Vec<Vec<usize>>,
    col_adj: Vec<Vec<usize>>,
}

impl SparseMatrix {
    pub fn from_entries(
        rows: usize,
        cols: usize,
        entries: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, SparseError> {
        let mut row_adj = vec![Vec::new(); rows];
        let mut col_adj = vec![Vec::new(); cols];
        for (row, col) in entries {
            if row >= rows || col >= cols {
                return Err(SparseError::OutOfRange {
                    row,
                    col,
                    rows,
                    cols,
                });
            }
            row_adj[row].push(col);
            col_adj[col].push(row);
        }
        for (row, adj) in row_adj.iter_mut().enumerate() {
            adj.sort_unstable();
            if let Some(w) = adj.windows(2).find(|w| w[0] == w[1]) {
                return Err(SparseError::Duplicate { row, col: w[0] });
            }
        }
        for adj in &mut col_adj {
            adj.sort_unstable();
        }
        Ok(Self {
            rows,
            cols,
            row_adj,
            col_adj,
        })
    }

    /// Parses rows of `0`/`1` characters, one row per non-empty line.
    pub fn from_dense(text: &str) -> Result<Self, SparseError> {
        let lines: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect();
        let cols = lines.first().map_or(0, |l| l.len());
        let mut entries = Vec::new();
        for (r, line) in lines.iter().enumerate() {
            if line.len() != cols {
                return Err(SparseError::BadDenseRow(r));
            }
            for (c, ch) in line.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => entries.push((r, c)),
                    _ => return Err(SparseError::BadDenseRow(r)),
                }
            }
        }
        Self::from_entries(lines.len(), cols, entries)
    }

    pub fn to_dense(&self) -> String {
        let mut out = String::with_capacity(self.rows * (self.cols + 1));
        for adj in &self.row_adj {
            let mut line = vec![b'0'; self.cols];
            for &c in adj {
                line[c] = b'1';
            }
            out.push_str(std::str::from_utf8(&line).unwrap());
            out.push('\n');
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[usize] {
        &self.row_adj[r]
    }

    pub fn col(&self, c: usize) -> &[usize] {
        &self.col_adj[c]
    }

    pub fn edge_count(&self) -> usize {
        self.row_adj.iter().map(Vec::len).sum()
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.row_adj[r].binary_search(&c).is_ok()
    }

    /// `H x` over GF(2).
    pub fn syndrome(&self, x: &[u8]) -> Vec<u8> {
        assert_eq!(x.len(), self.cols);
        self.row_adj
            .iter()
            .map(|adj| adj.iter().fold(0u8, |acc, &c| acc ^ (x[c] & 1)))
            .collect()
    }

    pub fn is_codeword(&self, x: &[u8]) -> bool {
        self.syndrome(x).iter().all(|&s| s == 0)
    }

    /// Columns left without a pivot by Gaussian elimination over GF(2),
    /// scanning columns left to right. A systematic encoder may set these
    /// bits freely; there are `cols - rank` of them.
    pub fn free_columns(&self) -> Vec<usize> {
        let words = self.cols.div_ceil(64);
        let mut rows: Vec<Vec<u64>> = self
            .row_adj
            .iter()
            .map(|adj| {
                let mut bits = vec![0u64; words];
                for &c in adj {
                    bits[c / 64] |= 1 << (c % 64);
                }
                bits
            })
            .collect();
        let mut free = Vec::new();
        let mut next = 0;
        for c in 0..self.cols {
            let (w, mask) = (c / 64, 1u64 << (c % 64));
            let Some(p) = (next..rows.len()).find(|&r| rows[r][w] & mask != 0) else {
                free.push(c);
                continue;
            };
            rows.swap(next, p);
            let (head, tail) = rows.split_at_mut(next + 1);
            let pivot = &head[next];
            for row in tail.iter_mut().filter(|r| r[w] & mask != 0) {
                for (a, b) in row[w..].iter_mut().zip(&pivot[w..]) {
                    *a ^= b;
                }
            }
            next += 1;
        }
        free
    }

    /// Rank over GF(2).
    pub fn rank(&self) -> usize {
        self.cols - self.free_columns().len()
    }

    /// Length of the shortest cycle in the Tanner graph, `None` for a forest.
    pub fn girth(&self) -> Option<usize> {
        let roots: Vec<usize> = (0..self.cols).collect();
        self.girth_from_roots(&roots)
    }

    /// Shortest cycle through any of the given variable nodes, searched by
    /// breadth-first search. The result is the girth whenever every shortest
    /// cycle passes through (an automorphic image of) one of the roots.
    pub fn girth_from_roots(&self, var_roots: &[usize]) -> Option<usize> {
        // Vertices: variables 0..cols, checks cols..cols+rows.
        let n = self.cols + self.rows;
        let mut dist = vec![usize::MAX; n];
        let mut parent = vec![usize::MAX; n];
        let mut touched = Vec::new();
        let mut queue = VecDeque::new();
        let mut best = usize::MAX;
        for &root in var_roots {
            for &v in &touched {
                dist[v] = usize::MAX;
                parent[v] = usize::MAX;
            }
            touched.clear();
            queue.clear();
            dist[root] = 0;
            touched.push(root);
            queue.push_back(root);
            while let Some(u) = queue.pop_front() {
                if 2 * dist[u] + 1 >= best {
                    break;
                }
                let neighbours = if u < self.cols {
                    self.col_adj[u].iter().map(|&r| r + self.cols).collect::<Vec<_>>()
                } else {
                    self.row_adj[u - self.cols].to_vec()
                };
                for w in neighbours {
                    if w == parent[u] {
                        continue;
                    }
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        parent[w] = u;
                        touched.push(w);
                        queue.push_back(w);
                    } else {
                        best = best.min(dist[u] + dist[w] + 1);
                    }
                }
            }
        }
        (best != usize::MAX).then_some(best)
    }
}
