//! Small digraphs stored as bit-encoded adjacency matrices.
//!
//! A digraph on `n` vertices is the integer `Σ adj[i][j] · 2^(i·n + j)`, so
//! row `i` occupies bits `i·n .. i·n + n`. Loops are diagonal bits. Canonical
//! forms are the minimum code over all `n!` relabelings, which is cheap up to
//! the hard cap of five vertices.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest vertex count the representation supports.
pub const MAX_VERTICES: usize = 5;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Digraph {
    n: u8,
    code: u32,
}

impl Digraph {
    pub fn new(n: usize, code: u32) -> Result<Self> {
        if n == 0 || n > MAX_VERTICES {
            return Err(Error::VertexCount(n));
        }
        if u64::from(code) >= 1u64 << (n * n) {
            return Err(Error::CodeOutOfRange { n, code });
        }
        Ok(Digraph { n: n as u8, code })
    }

    /// Builds a digraph from an edge list; `(i, i)` is a loop.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Digraph::new(n, 0)?;
        for &(i, j) in edges {
            for v in [i, j] {
                if v >= n {
                    return Err(Error::VertexOutOfRange { n, vertex: v });
                }
            }
            g.code |= 1 << (i * n + j);
        }
        Ok(g)
    }

    pub(crate) fn new_unchecked(n: usize, code: u32) -> Self {
        debug_assert!((1..=MAX_VERTICES).contains(&n) && u64::from(code) < 1u64 << (n * n));
        Digraph { n: n as u8, code }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn code(&self) -> u32 {
        self.code
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.code >> (i * self.n() + j) & 1 == 1
    }

    #[inline]
    pub fn has_loop(&self, i: usize) -> bool {
        self.has_edge(i, i)
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n();
        (0..n * n)
            .filter(move |b| self.code >> b & 1 == 1)
            .map(move |b| (b / n, b % n))
    }

    /// The digraph where edge `(i, j)` becomes `(perm[i], perm[j])`.
    pub fn relabel(&self, perm: &[usize]) -> Digraph {
        assert_eq!(
            perm.len(),
            self.n(),
            "permutation length must match vertex count"
        );
        let n = self.n();
        let code = self
            .edges()
            .fold(0u32, |acc, (i, j)| acc | 1 << (perm[i] * n + perm[j]));
        Digraph::new_unchecked(n, code)
    }

    /// Same digraph with every loop toggled.
    pub fn complement_loops(&self) -> Digraph {
        Digraph::new_unchecked(self.n(), self.code ^ diagonal_mask(self.n()))
    }

    pub fn delete_vertex(&self, v: usize) -> Digraph {
        let keep: Vec<usize> = (0..self.n()).filter(|&x| x != v).collect();
        gather(self, &keep)
    }

    /// Bits `(loop u, loop v, u→v, v→u)` packed into the low nibble.
    #[inline]
    pub(crate) fn pair_quad(&self, u: usize, v: usize) -> u8 {
        (self.has_edge(u, u) as u8)
            | (self.has_edge(v, v) as u8) << 1
            | (self.has_edge(u, v) as u8) << 2
            | (self.has_edge(v, u) as u8) << 3
    }
}

impl fmt::Display for Digraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.n, self.code)
    }
}

pub(crate) fn diagonal_mask(n: usize) -> u32 {
    (0..n).fold(0, |acc, i| acc | 1 << (i * n + i))
}

/// Isomorphism-class representative: the least code among all relabelings.
///
/// Ordered by vertex count first, then by code, so sorting a mixed list
/// groups it by level.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct CanonicalCode {
    n: u8,
    code: u32,
}

impl CanonicalCode {
    /// Accepts `(n, code)` only if the code is already canonical.
    pub fn new(n: usize, code: u32) -> Result<Self> {
        let g = Digraph::new(n, code)?;
        let c = canonical_form(&g);
        if c.code != code {
            return Err(Error::Token(format!("{n}:{code} is not a canonical code")));
        }
        Ok(c)
    }

    pub(crate) fn from_raw(n: usize, code: u32) -> Self {
        CanonicalCode { n: n as u8, code }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn code(&self) -> u32 {
        self.code
    }

    pub fn digraph(&self) -> Digraph {
        Digraph::new_unchecked(self.n(), self.code)
    }
}

impl fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.n, self.code)
    }
}

impl FromStr for CanonicalCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (n, code) = s
            .split_once(':')
            .ok_or_else(|| Error::Token(s.to_string()))?;
        let n: usize = n.trim().parse().map_err(|_| Error::Token(s.to_string()))?;
        let code: u32 = code
            .trim()
            .parse()
            .map_err(|_| Error::Token(s.to_string()))?;
        CanonicalCode::new(n, code)
    }
}

impl Serialize for CanonicalCode {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CanonicalCode {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Per-permutation row tables: entry `[p][i][bits]` is the contribution of
/// input row `i` holding `bits` once relabeled by permutation `p`.
struct RelabelTable {
    n: usize,
    perms: usize,
    rows: Vec<u32>,
}

impl RelabelTable {
    fn build(n: usize) -> Self {
        let width = 1usize << n;
        let perms: Vec<Vec<usize>> = (0..n).permutations(n).collect();
        let mut rows = vec![0u32; perms.len() * n * width];
        for (p, perm) in perms.iter().enumerate() {
            for i in 0..n {
                for bits in 0..width {
                    let out = (0..n)
                        .filter(|j| bits >> j & 1 == 1)
                        .fold(0u32, |acc, j| acc | 1 << (perm[i] * n + perm[j]));
                    rows[(p * n + i) * width + bits] = out;
                }
            }
        }
        RelabelTable {
            n,
            perms: perms.len(),
            rows,
        }
    }

    fn get(n: usize) -> &'static RelabelTable {
        static TABLES: [OnceLock<RelabelTable>; MAX_VERTICES + 1] =
            [const { OnceLock::new() }; MAX_VERTICES + 1];
        TABLES[n].get_or_init(|| RelabelTable::build(n))
    }

    #[inline]
    fn min_code(&self, code: u32) -> u32 {
        let n = self.n;
        let width = 1usize << n;
        let mask = (width - 1) as u32;
        let mut split = [0usize; MAX_VERTICES];
        for (i, row) in split.iter_mut().enumerate().take(n) {
            *row = ((code >> (i * n)) & mask) as usize;
        }
        let mut best = u32::MAX;
        for p in 0..self.perms {
            let base = p * n * width;
            let mut out = 0u32;
            for (i, &row) in split.iter().enumerate().take(n) {
                out |= self.rows[base + i * width + row];
            }
            best = best.min(out);
        }
        best
    }
}

/// Minimum code over all relabelings of `g`.
pub fn canonical_form(g: &Digraph) -> CanonicalCode {
    let code = RelabelTable::get(g.n()).min_code(g.code);
    CanonicalCode::from_raw(g.n(), code)
}

pub fn is_isomorphic(g: &Digraph, h: &Digraph) -> bool {
    g.n() == h.n() && canonical_form(g) == canonical_form(h)
}

fn gather(g: &Digraph, vs: &[usize]) -> Digraph {
    let m = vs.len();
    let mut code = 0u32;
    for (a, &va) in vs.iter().enumerate() {
        for (b, &vb) in vs.iter().enumerate() {
            if g.has_edge(va, vb) {
                code |= 1 << (a * m + b);
            }
        }
    }
    Digraph::new_unchecked(m, code)
}

/// The subdigraph spanned by `vs`, with vertex `a` of the result being `vs[a]`.
pub fn induced_substructure(g: &Digraph, vs: &[usize]) -> Result<Digraph> {
    let mut seen = 0u32;
    let valid = !vs.is_empty()
        && vs.iter().all(|&v| {
            let fresh = v < g.n() && seen >> v & 1 == 0;
            seen |= 1 << v.min(31);
            fresh
        });
    if !valid {
        return Err(Error::InvalidSubset {
            n: g.n(),
            subset: vs.to_vec(),
        });
    }
    Ok(gather(g, vs))
}

/// `g ⊑ h`: some vertex subset of `h` spans a copy of `g`.
pub fn is_substructure(g: &Digraph, h: &Digraph) -> bool {
    if g.n() > h.n() {
        return false;
    }
    let target = canonical_form(g);
    (0..h.n())
        .combinations(g.n())
        .any(|vs| canonical_form(&gather(h, &vs)) == target)
}

/// Isomorphism types of two-vertex digraphs, refined by direction for an
/// ordered vertex pair `(u, v)`.
///
/// For the one-loop types the letter is read relative to the looped vertex:
/// `B` has the edge leaving it, `C` has the edge entering it.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub enum PairType {
    E,
    P,
    PRev,
    EPrime,
    A,
    B,
    C,
    D,
    L,
    Q,
    QRev,
    LPrime,
}

impl PairType {
    /// Collapses the direction refinement, giving the plain isomorphism type.
    pub fn unoriented(self) -> PairType {
        match self {
            PairType::PRev => PairType::P,
            PairType::QRev => PairType::Q,
            t => t,
        }
    }

    /// Index of `A..D` within the four one-loop types.
    pub fn letter_index(self) -> Option<usize> {
        match self {
            PairType::A => Some(0),
            PairType::B => Some(1),
            PairType::C => Some(2),
            PairType::D => Some(3),
            _ => None,
        }
    }

    pub(crate) fn from_quad(quad: u8) -> PairType {
        let (loop_u, loop_v) = (quad & 1 == 1, quad & 2 == 2);
        let (fwd, back) = (quad & 4 == 4, quad & 8 == 8);
        match (loop_u, loop_v) {
            (false, false) => match (fwd, back) {
                (false, false) => PairType::E,
                (true, false) => PairType::P,
                (false, true) => PairType::PRev,
                (true, true) => PairType::EPrime,
            },
            (true, true) => match (fwd, back) {
                (false, false) => PairType::L,
                (true, false) => PairType::Q,
                (false, true) => PairType::QRev,
                (true, true) => PairType::LPrime,
            },
            _ => {
                let (out, inn) = if loop_u { (fwd, back) } else { (back, fwd) };
                match (out, inn) {
                    (false, false) => PairType::A,
                    (true, false) => PairType::B,
                    (false, true) => PairType::C,
                    (true, true) => PairType::D,
                }
            }
        }
    }
}

pub fn two_element_type(g: &Digraph, u: usize, v: usize) -> Result<PairType> {
    if u == v {
        return Err(Error::SameVertex(u));
    }
    for x in [u, v] {
        if x >= g.n() {
            return Err(Error::VertexOutOfRange {
                n: g.n(),
                vertex: x,
            });
        }
    }
    Ok(PairType::from_quad(g.pair_quad(u, v)))
}

/// Named small digraphs used throughout the tests and the theorem pipeline.
pub mod named {
    use super::Digraph;

    pub fn point() -> Digraph {
        Digraph::new_unchecked(1, 0)
    }

    pub fn loop_point() -> Digraph {
        Digraph::new_unchecked(1, 1)
    }

    /// Two-vertex digraph with the given pair configuration from vertex 0's side.
    pub fn pair(loop0: bool, loop1: bool, fwd: bool, back: bool) -> Digraph {
        let code = loop0 as u32 | (fwd as u32) << 1 | (back as u32) << 2 | (loop1 as u32) << 3;
        Digraph::new_unchecked(2, code)
    }

    /// Loopless in-star: `0 → 1 ← 2`.
    pub fn v() -> Digraph {
        Digraph::from_edges(3, &[(0, 1), (2, 1)]).unwrap()
    }

    /// The in-star with a loop on every vertex.
    pub fn w() -> Digraph {
        Digraph::from_edges(3, &[(0, 1), (2, 1), (0, 0), (1, 1), (2, 2)]).unwrap()
    }
}
