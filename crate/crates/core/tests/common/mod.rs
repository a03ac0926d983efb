//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sccode::channels::LLR_SATURATION as S;
use sccode::sparse::SparseMatrix;

/// Scalar recursion of the (3,6)-regular ensemble, bisected independently.
pub fn scalar_threshold() -> f64 {
    let converges = |eps: f64| {
        let mut x = eps;
        for _ in 0..100_000 {
            x = eps * (1.0 - (1.0 - x).powi(5)).powi(2);
            if x < 1e-12 {
                return true;
            }
        }
        false
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if converges(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Parity of a single-input rational code by power-series long division.
pub fn series_parity(u: &[u8], num: u32, den: u32) -> Vec<u8> {
    let k = u.len();
    let mut prod = vec![0u8; k];
    for (i, &b) in u.iter().enumerate() {
        if b == 1 {
            for j in 0..17 {
                if (num >> j) & 1 == 1 && i + j < k {
                    prod[i + j] ^= 1;
                }
            }
        }
    }
    let mut out = vec![0u8; k];
    for i in 0..k {
        out[i] = prod[i];
        if out[i] == 1 {
            for j in 1..17 {
                if (den >> j) & 1 == 1 && i + j < k {
                    prod[i + j] ^= 1;
                }
            }
        }
    }
    out
}

pub fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Bitwise MAP by enumerating every information word.
pub fn brute_force(k: usize, num: u32, den: u32, sys: &[f64], par: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut zero_u = vec![Vec::new(); k];
    let mut one_u = vec![Vec::new(); k];
    let mut zero_p = vec![Vec::new(); k];
    let mut one_p = vec![Vec::new(); k];
    for word in 0u32..1 << k {
        let u: Vec<u8> = (0..k).map(|i| ((word >> i) & 1) as u8).collect();
        let p = series_parity(&u, num, den);
        let metric: f64 = (0..k)
            .map(|i| {
                let a = if u[i] == 0 { 0.5 * sys[i] } else { -0.5 * sys[i] };
                let b = if p[i] == 0 { 0.5 * par[i] } else { -0.5 * par[i] };
                a + b
            })
            .sum();
        for i in 0..k {
            if u[i] == 0 { &mut zero_u[i] } else { &mut one_u[i] }.push(metric);
            if p[i] == 0 { &mut zero_p[i] } else { &mut one_p[i] }.push(metric);
        }
    }
    let llr = |z: &Vec<Vec<f64>>, o: &Vec<Vec<f64>>| -> Vec<f64> {
        (0..k).map(|i| log_sum_exp(&z[i]) - log_sum_exp(&o[i])).collect()
    };
    (llr(&zero_u, &one_u), llr(&zero_p, &one_p))
}

/// Remainder of the word polynomial (index j = degree n-1-j) modulo the
/// generator, by plain GF(2) long division.
pub fn remainder(word: &[u8], generator: &[u8]) -> Vec<u8> {
    let n = word.len();
    let r = generator.len() - 1;
    let mut poly: Vec<u8> = word.iter().rev().copied().collect(); // index = degree
    for d in (r..n).rev() {
        if poly[d] == 1 {
            for (i, &g) in generator.iter().enumerate() {
                poly[d - r + i] ^= g;
            }
        }
    }
    poly.truncate(r);
    poly
}

pub fn patterns(n: usize, weight: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, weight, &mut Vec::new(), &mut out);
    out
}

pub fn random_sparse(rng: &mut ChaCha8Rng) -> SparseMatrix {
    let cols = rng.random_range(10..400);
    let rows = rng.random_range(cols / 4..cols * 3 / 4 + 2);
    let col_weight = rng.random_range(2..5).min(rows);
    let mut entries = Vec::new();
    for c in 0..cols {
        let picked = rand::seq::index::sample(rng, rows, col_weight);
        entries.extend(picked.into_iter().map(|r| (r, c)));
    }
    SparseMatrix::from_entries(rows, cols, entries).unwrap()
}

pub fn bec_llr(erased: &[bool]) -> Vec<f64> {
    erased.iter().map(|&e| if e { 0.0 } else { S }).collect()
}
