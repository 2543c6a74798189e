//! Levels of the substructure order and the cover relation between them.
//!
//! Level `n` holds one canonical code per isomorphism type on `n` vertices,
//! grouped by lower-cover set. Lower covers come from deleting single
//! vertices; `G ≺ H` holds exactly when `G` is one of those deletions of `H`.

use std::collections::{BTreeSet, HashMap, HashSet};

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digraph::{canonical_form, CanonicalCode, Digraph, MAX_VERTICES};
use crate::error::{Error, Result};

/// Digraphs of one level sharing the same set of lower covers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Group {
    pub below: Vec<CanonicalCode>,
    pub members: Vec<CanonicalCode>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Level {
    pub n: usize,
    pub groups: Vec<Group>,
}

impl Level {
    pub fn len(&self) -> usize {
        self.groups.iter().map(|g| g.members.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn members(&self) -> impl Iterator<Item = &CanonicalCode> {
        self.groups.iter().flat_map(|g| g.members.iter())
    }
}

/// An element `(S, k)` of the signature set of a level.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CoverSignature {
    pub below: Vec<CanonicalCode>,
    pub k: usize,
}

/// Lower covers by single-vertex deletion, sorted and deduplicated.
pub fn lower_cover_codes(g: &Digraph) -> Vec<CanonicalCode> {
    if g.n() == 1 {
        return Vec::new();
    }
    let mut below: Vec<CanonicalCode> = (0..g.n())
        .map(|v| canonical_form(&g.delete_vertex(v)))
        .collect();
    below.sort_unstable();
    below.dedup();
    below
}

/// Lower covers read off as the upper-left `(n-1)×(n-1)` corners of every
/// relabeled matrix. Agrees with [`lower_cover_codes`]; kept for cross-checks.
pub fn lower_covers_by_corners(g: &Digraph) -> BTreeSet<CanonicalCode> {
    let n = g.n();
    if n == 1 {
        return BTreeSet::new();
    }
    let corner: Vec<usize> = (0..n - 1).collect();
    (0..n)
        .permutations(n)
        .map(|perm| {
            let relabeled = g.relabel(&perm);
            canonical_form(&crate::digraph::induced_substructure(&relabeled, &corner).unwrap())
        })
        .collect()
}

type Partial = HashMap<Vec<CanonicalCode>, HashSet<CanonicalCode>>;

fn insert_candidate(mut acc: Partial, g: Digraph) -> Partial {
    let canon = canonical_form(&g);
    let below = lower_cover_codes(&g);
    acc.entry(below).or_default().insert(canon);
    acc
}

fn merge(mut a: Partial, b: Partial) -> Partial {
    if a.len() < b.len() {
        return merge(b, a);
    }
    for (below, members) in b {
        a.entry(below).or_default().extend(members);
    }
    a
}

/// Builds level `n` on top of `store`, which must already hold levels `1..n`.
///
/// Up to four vertices every one of the `2^(n²)` adjacency matrices is
/// visited. Level five is swept over the one-vertex extensions of the level
/// four representatives instead, which reaches every isomorphism type.
pub fn build_level(store: &PosetStore, n: usize) -> Result<Level> {
    if n > MAX_VERTICES {
        return Err(Error::Capacity(n));
    }
    if n == 0 || store.max_level() + 1 < n {
        return Err(Error::MissingLevel(n.saturating_sub(1)));
    }
    let partial = if n <= 4 {
        (0..1u32 << (n * n))
            .into_par_iter()
            .map(|code| Digraph::new_unchecked(n, code))
            .fold(Partial::new, insert_candidate)
            .reduce(Partial::new, merge)
    } else {
        let reps = store.codes(n - 1).to_vec();
        reps.into_par_iter()
            .flat_map_iter(|rep| one_vertex_extensions(rep.digraph()))
            .fold(Partial::new, insert_candidate)
            .reduce(Partial::new, merge)
    };

    let mut groups: Vec<Group> = partial
        .into_iter()
        .map(|(below, members)| {
            let mut members: Vec<_> = members.into_iter().collect();
            members.sort_unstable();
            Group { below, members }
        })
        .collect();
    groups.sort_unstable_by(|a, b| a.below.cmp(&b.below));

    let level = Level { n, groups };
    let distinct: HashSet<_> = level.members().collect();
    if distinct.len() != level.len() {
        return Err(Error::Corrupt(format!(
            "level {n}: a digraph landed in two lower-cover groups"
        )));
    }
    Ok(level)
}

/// All `(n+1)`-vertex digraphs whose first `n` vertices span `g`.
fn one_vertex_extensions(g: Digraph) -> impl Iterator<Item = Digraph> {
    let n = g.n();
    let m = n + 1;
    let mut base = 0u32;
    for (i, j) in g.edges() {
        base |= 1 << (i * m + j);
    }
    // free bits: row n (m bits) and column n above the diagonal (n bits)
    let free: Vec<u32> = (0..m)
        .map(|j| n * m + j)
        .chain((0..n).map(|i| i * m + n))
        .map(|b| 1u32 << b)
        .collect();
    (0..1u32 << free.len()).map(move |sel| {
        let code = free
            .iter()
            .enumerate()
            .filter(|(k, _)| sel >> k & 1 == 1)
            .fold(base, |acc, (_, bit)| acc | bit);
        Digraph::new_unchecked(m, code)
    })
}

#[derive(Clone, Debug, Default)]
struct LevelIndex {
    codes: Vec<CanonicalCode>,
    lower: Vec<Vec<u32>>,
    upper: Vec<Vec<u32>>,
    group_of: Vec<u32>,
}

/// Levels `1..=N` with the cover relation indexed in both directions.
///
/// Inside a level every digraph has a dense index given by ascending code
/// order; [`crate::automorphism::LevelMap`] works on those indices.
#[derive(Clone, Debug, Default)]
pub struct PosetStore {
    levels: Vec<Level>,
    index: Vec<LevelIndex>,
}

impl PosetStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds levels `1..=max_level` from scratch.
    pub fn build(max_level: usize) -> Result<Self> {
        if max_level > MAX_VERTICES {
            return Err(Error::Capacity(max_level));
        }
        let mut store = PosetStore::new();
        for n in 1..=max_level {
            let level = build_level(&store, n)?;
            store.push_level(level)?;
        }
        Ok(store)
    }

    /// Assembles a store from already-built levels, validating each one.
    pub fn from_levels(levels: Vec<Level>) -> Result<Self> {
        let mut store = PosetStore::new();
        for level in levels {
            store.validate(&level)?;
            store.push_level(level)?;
        }
        Ok(store)
    }

    fn validate(&self, level: &Level) -> Result<()> {
        let n = self.max_level() + 1;
        if level.n != n {
            return Err(Error::Corrupt(format!(
                "expected level {n}, found level {}",
                level.n
            )));
        }
        let mut keys = HashSet::new();
        let mut seen = HashSet::new();
        for group in &level.groups {
            if !keys.insert(&group.below) {
                return Err(Error::Corrupt(format!(
                    "level {n}: repeated lower-cover set"
                )));
            }
            for m in &group.members {
                if m.n() != n || !seen.insert(*m) {
                    return Err(Error::Corrupt(format!(
                        "level {n}: bad or repeated member {m}"
                    )));
                }
                if lower_cover_codes(&m.digraph()) != group.below {
                    return Err(Error::Corrupt(format!(
                        "level {n}: wrong lower covers for {m}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Appends the next level and wires its cover relation to the previous one.
    pub fn push_level(&mut self, level: Level) -> Result<()> {
        let n = self.max_level() + 1;
        if level.n != n {
            return Err(Error::Corrupt(format!(
                "expected level {n}, found level {}",
                level.n
            )));
        }
        let mut entries: Vec<(CanonicalCode, u32, &Vec<CanonicalCode>)> = level
            .groups
            .iter()
            .enumerate()
            .flat_map(|(gi, g)| g.members.iter().map(move |&m| (m, gi as u32, &g.below)))
            .collect();
        entries.sort_unstable_by_key(|e| e.0);

        let mut idx = LevelIndex {
            codes: entries.iter().map(|e| e.0).collect(),
            upper: vec![Vec::new(); entries.len()],
            group_of: entries.iter().map(|e| e.1).collect(),
            lower: Vec::with_capacity(entries.len()),
        };
        for (h, &(_, _, below)) in entries.iter().enumerate() {
            let mut lower = Vec::with_capacity(below.len());
            for g in below {
                let gi = if n == 1 {
                    None
                } else {
                    self.position(n - 1, g)
                }
                .ok_or_else(|| {
                    Error::Corrupt(format!("lower cover {g} missing from level {}", n - 1))
                })?;
                lower.push(gi as u32);
                self.index[n - 2].upper[gi].push(h as u32);
            }
            idx.lower.push(lower);
        }
        self.index.push(idx);
        self.levels.push(level);
        Ok(())
    }

    pub fn max_level(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, n: usize) -> Result<&Level> {
        n.checked_sub(1)
            .and_then(|i| self.levels.get(i))
            .ok_or(Error::MissingLevel(n))
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn counts(&self) -> Vec<usize> {
        self.index.iter().map(|i| i.codes.len()).collect()
    }

    pub fn total(&self) -> usize {
        self.counts().iter().sum()
    }

    pub fn level_size(&self, n: usize) -> usize {
        self.index
            .get(n.wrapping_sub(1))
            .map_or(0, |i| i.codes.len())
    }

    /// Canonical codes of level `n` in index order. Empty if absent.
    pub fn codes(&self, n: usize) -> &[CanonicalCode] {
        self.index
            .get(n.wrapping_sub(1))
            .map_or(&[], |i| i.codes.as_slice())
    }

    pub fn code_at(&self, n: usize, i: usize) -> CanonicalCode {
        self.index[n - 1].codes[i]
    }

    pub fn position(&self, n: usize, c: &CanonicalCode) -> Option<usize> {
        if c.n() != n {
            return None;
        }
        self.codes(n).binary_search(c).ok()
    }

    pub fn index_of(&self, c: &CanonicalCode) -> Result<usize> {
        self.position(c.n(), c)
            .ok_or_else(|| Error::UnknownDigraph(c.to_string()))
    }

    pub fn contains(&self, c: &CanonicalCode) -> bool {
        self.position(c.n(), c).is_some()
    }

    /// Lower covers of the `i`-th digraph of level `n`, as level `n-1` indices.
    pub fn lower_idx(&self, n: usize, i: usize) -> &[u32] {
        &self.index[n - 1].lower[i]
    }

    /// Upper covers of the `i`-th digraph of level `n`, as level `n+1`
    /// indices. Empty when level `n+1` has not been built.
    pub fn upper_idx(&self, n: usize, i: usize) -> &[u32] {
        &self.index[n - 1].upper[i]
    }

    pub fn group_of(&self, n: usize, i: usize) -> usize {
        self.index[n - 1].group_of[i] as usize
    }

    pub fn lower_covers(&self, g: &CanonicalCode) -> Result<Vec<CanonicalCode>> {
        let i = self.index_of(g)?;
        let n = g.n();
        if n == 1 {
            return Ok(Vec::new());
        }
        Ok(self
            .lower_idx(n, i)
            .iter()
            .map(|&j| self.code_at(n - 1, j as usize))
            .collect())
    }

    pub fn upper_covers(&self, g: &CanonicalCode) -> Result<Vec<CanonicalCode>> {
        let i = self.index_of(g)?;
        let n = g.n();
        if n >= self.max_level() {
            return Err(Error::MissingLevel(n + 1));
        }
        Ok(self
            .upper_idx(n, i)
            .iter()
            .map(|&j| self.code_at(n + 1, j as usize))
            .collect())
    }

    pub fn is_cover(&self, g: &CanonicalCode, h: &CanonicalCode) -> bool {
        if h.n() != g.n() + 1 {
            return false;
        }
        match (self.position(g.n(), g), self.position(h.n(), h)) {
            (Some(gi), Some(hi)) => self.lower_idx(h.n(), hi).contains(&(gi as u32)),
            _ => false,
        }
    }

    /// Number of cover pairs between level `n - 1` and level `n`.
    pub fn cover_edge_count(&self, n: usize) -> usize {
        self.index[n - 1].lower.iter().map(Vec::len).sum()
    }

    /// The signature set of level `n`: one `(S, k)` per lower-cover group.
    pub fn signature_set(&self, n: usize) -> Result<Vec<CoverSignature>> {
        let level = self.level(n)?;
        let mut sigs: Vec<_> = level
            .groups
            .iter()
            .map(|g| CoverSignature {
                below: g.below.clone(),
                k: g.members.len(),
            })
            .collect();
        sigs.sort_unstable();
        Ok(sigs)
    }

    /// Signature set with `S` as sorted level `n - 1` indices, aligned with
    /// the group order of level `n`.
    pub(crate) fn signature_indices(&self, n: usize) -> Result<Vec<(Vec<u32>, usize)>> {
        let level = self.level(n)?;
        level
            .groups
            .iter()
            .map(|g| {
                let mut s = g
                    .below
                    .iter()
                    .map(|c| self.index_of(c).map(|i| i as u32))
                    .collect::<Result<Vec<u32>>>()?;
                s.sort_unstable();
                Ok((s, g.members.len()))
            })
            .collect()
    }

    /// Members of each group of level `n`, as index lists.
    pub(crate) fn group_member_indices(&self, n: usize) -> Result<Vec<Vec<u32>>> {
        let level = self.level(n)?;
        level
            .groups
            .iter()
            .map(|g| {
                g.members
                    .iter()
                    .map(|c| self.index_of(c).map(|i| i as u32))
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::named;

    fn cc(g: Digraph) -> CanonicalCode {
        canonical_form(&g)
    }

    fn store3() -> PosetStore {
        PosetStore::build(3).unwrap()
    }

    #[test]
    fn first_levels() {
        let store = store3();
        assert_eq!(store.counts(), vec![2, 10, 104]);
        assert_eq!(store.level(1).unwrap().groups.len(), 1);
        assert!(store.level(1).unwrap().groups[0].below.is_empty());
    }

    #[test]
    fn capacity_and_order_errors() {
        assert!(matches!(PosetStore::build(6), Err(Error::Capacity(6))));
        let empty = PosetStore::new();
        assert!(matches!(build_level(&empty, 6), Err(Error::Capacity(6))));
        assert!(matches!(
            build_level(&empty, 3),
            Err(Error::MissingLevel(2))
        ));
    }

    #[test]
    fn lower_cover_examples() {
        let store = store3();
        let e = cc(named::pair(false, false, false, false));
        let p = cc(named::pair(false, false, true, false));
        let l = cc(named::pair(true, true, false, false));
        let q = cc(named::pair(true, true, true, false));
        assert_eq!(store.lower_covers(&cc(named::v())).unwrap(), vec![e, p]);
        assert_eq!(store.lower_covers(&e).unwrap(), vec![cc(named::point())]);
        let mut lw = store.lower_covers(&cc(named::w())).unwrap();
        lw.sort();
        let mut expected = vec![l, q];
        expected.sort();
        assert_eq!(lw, expected);
        assert!(store.lower_covers(&cc(named::point())).unwrap().is_empty());
    }

    #[test]
    fn upper_cover_examples() {
        let store = store3();
        let up_point = store.upper_covers(&cc(named::point())).unwrap();
        let up_loop = store.upper_covers(&cc(named::loop_point())).unwrap();
        assert_eq!(up_point.len(), 7);
        assert_eq!(up_loop.len(), 7);
        // A, B, C, D cover both points
        let shared: HashSet<_> = up_point.iter().filter(|c| up_loop.contains(c)).collect();
        assert_eq!(shared.len(), 4);

        let v = cc(named::v());
        assert!(matches!(
            store.upper_covers(&v),
            Err(Error::MissingLevel(4))
        ));
    }

    #[test]
    fn double_counting_between_levels() {
        let store = store3();
        for n in 2..=3 {
            let up: usize = (0..store.level_size(n - 1))
                .map(|i| store.upper_idx(n - 1, i).len())
                .sum();
            assert_eq!(up, store.cover_edge_count(n));
        }
    }

    #[test]
    fn level_three_signatures() {
        let store = store3();
        let h3 = store.signature_set(3).unwrap();
        assert_eq!(h3.len(), 74);
        let mut hist = std::collections::BTreeMap::new();
        for s in &h3 {
            *hist.entry(s.k).or_insert(0) += 1;
        }
        assert_eq!(
            hist.into_iter().collect::<Vec<_>>(),
            vec![(1, 52), (2, 18), (4, 4)]
        );

        let h2 = store.signature_set(2).unwrap();
        assert!(h2.len() <= 10);
        assert_eq!(h2.iter().map(|s| s.k).sum::<usize>(), 10);
    }

    #[test]
    fn corner_method_agrees_with_deletion_on_level_three() {
        for code in 0..512 {
            let g = Digraph::new(3, code).unwrap();
            let by_delete: BTreeSet<_> = lower_cover_codes(&g).into_iter().collect();
            assert_eq!(by_delete, lower_covers_by_corners(&g), "code {code}");
        }
    }

    #[test]
    fn extension_sweep_agrees_with_full_sweep() {
        let store = store3();
        let mut partial = Partial::new();
        for rep in store.codes(2) {
            for g in one_vertex_extensions(rep.digraph()) {
                partial = insert_candidate(partial, g);
            }
        }
        let mut groups: Vec<_> = partial
            .into_iter()
            .map(|(below, m)| {
                let mut members: Vec<_> = m.into_iter().collect();
                members.sort();
                Group { below, members }
            })
            .collect();
        groups.sort_by(|a, b| a.below.cmp(&b.below));
        assert_eq!(&groups, &store.level(3).unwrap().groups);
    }

    #[test]
    fn from_levels_rejects_tampering() {
        let store = store3();
        let mut levels = store.levels().to_vec();
        assert!(PosetStore::from_levels(levels.clone()).is_ok());
        let moved = levels[2].groups[0].members.pop().unwrap();
        levels[2].groups[1].members.push(moved);
        assert!(matches!(
            PosetStore::from_levels(levels),
            Err(Error::Corrupt(_))
        ));
    }
}
