//! A deliberately naive reference implementation, written against the
//! adjacency-matrix definition only, used to cross-check the fast paths.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

pub fn matrix(n: usize, code: u32) -> Vec<Vec<bool>> {
    (0..n)
        .map(|i| (0..n).map(|j| code >> (i * n + j) & 1 == 1).collect())
        .collect()
}

pub fn encode(m: &[Vec<bool>]) -> u32 {
    let n = m.len();
    let mut code = 0;
    for (i, row) in m.iter().enumerate() {
        for (j, &e) in row.iter().enumerate() {
            if e {
                code |= 1 << (i * n + j);
            }
        }
    }
    code
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Minimum code over every relabeling.
pub fn canonical(n: usize, code: u32) -> u32 {
    let m = matrix(n, code);
    permutations(n)
        .into_iter()
        .map(|p| {
            let mut r = vec![vec![false; n]; n];
            for i in 0..n {
                for j in 0..n {
                    r[p[i]][p[j]] = m[i][j];
                }
            }
            encode(&r)
        })
        .min()
        .unwrap()
}

pub fn induced(n: usize, code: u32, keep: &[usize]) -> u32 {
    let m = matrix(n, code);
    let sub: Vec<Vec<bool>> = keep
        .iter()
        .map(|&i| keep.iter().map(|&j| m[i][j]).collect())
        .collect();
    encode(&sub)
}

/// Canonical codes of order `n`, found by trying every code.
pub fn level(n: usize) -> BTreeSet<u32> {
    (0..1u32 << (n * n)).map(|c| canonical(n, c)).collect()
}

/// Canonical codes of the one-vertex-smaller substructures.
pub fn lower_covers(n: usize, code: u32) -> BTreeSet<u32> {
    (0..n)
        .map(|v| {
            let keep: Vec<usize> = (0..n).filter(|&i| i != v).collect();
            canonical(n - 1, induced(n, code, &keep))
        })
        .collect()
}

/// Level `n` grouped by lower-cover set.
pub fn groups(n: usize) -> BTreeMap<BTreeSet<u32>, BTreeSet<u32>> {
    let mut out: BTreeMap<BTreeSet<u32>, BTreeSet<u32>> = BTreeMap::new();
    for c in level(n) {
        let key = if n == 1 {
            BTreeSet::new()
        } else {
            lower_covers(n, c)
        };
        out.entry(key).or_default().insert(c);
    }
    out
}

/// Embedding test by trying every vertex subset of the right size.
pub fn embeds(gn: usize, g: u32, hn: usize, h: u32) -> bool {
    if gn > hn {
        return false;
    }
    let target = canonical(gn, g);
    subsets(hn, gn)
        .iter()
        .any(|s| canonical(gn, induced(hn, h, s)) == target)
}

pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0..1u32 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|&i| m >> i & 1 == 1).collect())
        .collect()
}
