//! Local automorphisms and the permutation group they generate.
//!
//! Every rule rewrites a digraph one vertex pair at a time: the four bits
//! `(loop u, loop v, u→v, v→u)` of each unordered pair go through a fixed
//! 16-entry table, reading from the original digraph only. Lifted to the
//! store, a rule becomes a [`LevelMap`]: a permutation of each level's
//! dense indices.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::digraph::{canonical_form, diagonal_mask, Digraph, PairType};
use crate::error::{Error, Result};
use crate::poset::PosetStore;

/// A permutation of the one-loop letters `A, B, C, D`, stored as images.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct LetterPerm([u8; 4]);

const LETTERS: [char; 4] = ['A', 'B', 'C', 'D'];

impl LetterPerm {
    pub const IDENTITY: LetterPerm = LetterPerm([0, 1, 2, 3]);
    /// The transposition `(BC)`.
    pub const SWAP_BC: LetterPerm = LetterPerm([0, 2, 1, 3]);

    pub fn from_images(images: [u8; 4]) -> Option<Self> {
        let mut seen = [false; 4];
        for &x in &images {
            if x > 3 || std::mem::replace(&mut seen[x as usize], true) {
                return None;
            }
        }
        Some(LetterPerm(images))
    }

    /// All 24 permutations in lexicographic order of their image words.
    pub fn all() -> Vec<LetterPerm> {
        (0u8..4)
            .permutations(4)
            .map(|p| LetterPerm([p[0], p[1], p[2], p[3]]))
            .collect()
    }

    pub fn index(&self) -> usize {
        // Lehmer code, matching the order of `all()`
        let mut idx = 0;
        for i in 0..4 {
            let smaller = (i + 1..4).filter(|&j| self.0[j] < self.0[i]).count();
            idx = idx * (4 - i) + smaller;
        }
        idx
    }

    #[inline]
    pub fn apply(&self, letter: usize) -> usize {
        self.0[letter] as usize
    }

    /// `self ∘ other`: apply `other` first.
    pub fn then_after(&self, other: &LetterPerm) -> LetterPerm {
        LetterPerm(std::array::from_fn(|i| self.0[other.0[i] as usize]))
    }

    pub fn inverse(&self) -> LetterPerm {
        let mut inv = [0u8; 4];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x as usize] = i as u8;
        }
        LetterPerm(inv)
    }

    /// `(BC) π (BC)`.
    pub fn conjugate_bc(&self) -> LetterPerm {
        Self::SWAP_BC.then_after(self).then_after(&Self::SWAP_BC)
    }
}

impl fmt::Display for LetterPerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let word: String = self.0.iter().map(|&x| LETTERS[x as usize]).collect();
        write!(f, "[{word}]")
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum PairRewrite {
    /// φ₂: `E ↔ E'`.
    SwapEEPrime,
    /// φ₃: `L ↔ L'`.
    SwapLLPrime,
    /// φ₄: reverse the edge of every `P`.
    ReverseP,
    /// φ₅: reverse the edge of every `Q`.
    ReverseQ,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum LocalRule {
    /// φ₁: toggle every loop.
    LoopFlip,
    Pair(PairRewrite),
    /// φ_π: replace each one-loop pair of type `X` by `π(X)`, loop kept in place.
    Letters(LetterPerm),
}

impl LocalRule {
    /// φ₁ … φ₅ by their usual numbering.
    pub fn phi(i: usize) -> Option<LocalRule> {
        Some(match i {
            1 => LocalRule::LoopFlip,
            2 => LocalRule::Pair(PairRewrite::SwapEEPrime),
            3 => LocalRule::Pair(PairRewrite::SwapLLPrime),
            4 => LocalRule::Pair(PairRewrite::ReverseP),
            5 => LocalRule::Pair(PairRewrite::ReverseQ),
            _ => return None,
        })
    }

    /// φ₁ … φ₅ followed by the 24 letter permutations.
    pub fn all() -> Vec<LocalRule> {
        (1..=5)
            .filter_map(LocalRule::phi)
            .chain(LetterPerm::all().into_iter().map(LocalRule::Letters))
            .collect()
    }

    pub fn is_involution(&self) -> bool {
        match self {
            LocalRule::Letters(pi) => pi.then_after(pi) == LetterPerm::IDENTITY,
            _ => true,
        }
    }

    /// Rewrite of a single pair nibble `(loop u, loop v, u→v, v→u)`.
    pub fn rewrite_quad(&self, quad: u8) -> u8 {
        let loops = quad & 0b0011;
        let edges = quad & 0b1100;
        match *self {
            LocalRule::LoopFlip => quad ^ 0b0011,
            LocalRule::Pair(rw) => {
                let hit = match rw {
                    PairRewrite::SwapEEPrime => loops == 0 && (edges == 0 || edges == 0b1100),
                    PairRewrite::SwapLLPrime => loops == 0b11 && (edges == 0 || edges == 0b1100),
                    PairRewrite::ReverseP => loops == 0 && (edges == 0b0100 || edges == 0b1000),
                    PairRewrite::ReverseQ => loops == 0b11 && (edges == 0b0100 || edges == 0b1000),
                };
                if hit {
                    quad ^ 0b1100
                } else {
                    quad
                }
            }
            LocalRule::Letters(pi) => {
                let Some(letter) = PairType::from_quad(quad).letter_index() else {
                    return quad;
                };
                let (out, inn) = letter_edges(pi.apply(letter));
                // loop on u: u→v is "out"; loop on v: v→u is "out"
                let (fwd, back) = if loops == 0b01 {
                    (out, inn)
                } else {
                    (inn, out)
                };
                loops | (fwd as u8) << 2 | (back as u8) << 3
            }
        }
    }

    pub fn quad_table(&self) -> [u8; 16] {
        std::array::from_fn(|q| self.rewrite_quad(q as u8))
    }
}

/// `(edge out of the looped vertex, edge into it)` for letter `A..D`.
fn letter_edges(letter: usize) -> (bool, bool) {
    match letter {
        0 => (false, false),
        1 => (true, false),
        2 => (false, true),
        _ => (true, true),
    }
}

impl fmt::Display for LocalRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocalRule::LoopFlip => write!(f, "phi1"),
            LocalRule::Pair(PairRewrite::SwapEEPrime) => write!(f, "phi2"),
            LocalRule::Pair(PairRewrite::SwapLLPrime) => write!(f, "phi3"),
            LocalRule::Pair(PairRewrite::ReverseP) => write!(f, "phi4"),
            LocalRule::Pair(PairRewrite::ReverseQ) => write!(f, "phi5"),
            LocalRule::Letters(pi) => write!(f, "phi_pi{pi}"),
        }
    }
}

/// Rewrites every vertex pair of `g` simultaneously.
pub fn apply_rule(rule: &LocalRule, g: &Digraph) -> Digraph {
    apply_table(&rule.quad_table(), matches!(rule, LocalRule::LoopFlip), g)
}

fn apply_table(table: &[u8; 16], flip_loops: bool, g: &Digraph) -> Digraph {
    let n = g.n();
    let diag = diagonal_mask(n);
    let mut code = g.code() & diag;
    if flip_loops {
        code ^= diag;
    }
    for u in 0..n {
        for v in u + 1..n {
            let out = table[g.pair_quad(u, v) as usize];
            code |= u32::from(out >> 2 & 1) << (u * n + v);
            code |= u32::from(out >> 3 & 1) << (v * n + u);
        }
    }
    Digraph::new_unchecked(n, code)
}

/// A level-preserving map on `D_n`, one index permutation per level.
///
/// `levels[k][i]` is the image of the `i`-th digraph of level `k + 1`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct LevelMap {
    levels: Vec<Vec<u32>>,
}

impl LevelMap {
    pub fn from_levels(levels: Vec<Vec<u32>>) -> Result<Self> {
        for (k, level) in levels.iter().enumerate() {
            if !is_permutation(level) {
                return Err(Error::NotBijective { level: k + 1 });
            }
        }
        Ok(LevelMap { levels })
    }

    pub(crate) fn from_levels_unchecked(levels: Vec<Vec<u32>>) -> Self {
        LevelMap { levels }
    }

    pub fn identity(store: &PosetStore, depth: usize) -> Self {
        LevelMap {
            levels: (1..=depth)
                .map(|n| (0..store.level_size(n) as u32).collect())
                .collect(),
        }
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, n: usize) -> &[u32] {
        &self.levels[n - 1]
    }

    pub fn levels(&self) -> &[Vec<u32>] {
        &self.levels
    }

    #[inline]
    pub fn image(&self, n: usize, i: usize) -> usize {
        self.levels[n - 1][i] as usize
    }

    pub fn is_identity(&self) -> bool {
        self.levels
            .iter()
            .all(|l| l.iter().enumerate().all(|(i, &x)| i as u32 == x))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &LevelMap) -> Result<LevelMap> {
        compose(self, other)
    }

    pub fn inverse(&self) -> LevelMap {
        LevelMap {
            levels: self
                .levels
                .iter()
                .map(|l| {
                    let mut inv = vec![0u32; l.len()];
                    for (i, &x) in l.iter().enumerate() {
                        inv[x as usize] = i as u32;
                    }
                    inv
                })
                .collect(),
        }
    }

    /// Drops every level above `n`.
    pub fn restrict(&self, n: usize) -> LevelMap {
        LevelMap {
            levels: self.levels[..n.min(self.depth())].to_vec(),
        }
    }

    /// Replaces level `n`'s permutation; used to build candidate maps.
    pub fn with_level(mut self, n: usize, images: Vec<u32>) -> Result<LevelMap> {
        if !is_permutation(&images) {
            return Err(Error::NotBijective { level: n });
        }
        match n.cmp(&(self.depth() + 1)) {
            std::cmp::Ordering::Less => self.levels[n - 1] = images,
            std::cmp::Ordering::Equal => self.levels.push(images),
            std::cmp::Ordering::Greater => return Err(Error::ShapeMismatch),
        }
        Ok(self)
    }
}

fn is_permutation(images: &[u32]) -> bool {
    let mut seen = vec![false; images.len()];
    images
        .iter()
        .all(|&x| (x as usize) < seen.len() && !std::mem::replace(&mut seen[x as usize], true))
}

/// Pointwise `a ∘ b`.
pub fn compose(a: &LevelMap, b: &LevelMap) -> Result<LevelMap> {
    if a.depth() != b.depth()
        || a.levels
            .iter()
            .zip(&b.levels)
            .any(|(x, y)| x.len() != y.len())
    {
        return Err(Error::ShapeMismatch);
    }
    for m in [a, b] {
        if let Some(k) = m.levels.iter().position(|l| !is_permutation(l)) {
            return Err(Error::NotBijective { level: k + 1 });
        }
    }
    Ok(compose_unchecked(a, b))
}

pub(crate) fn compose_unchecked(a: &LevelMap, b: &LevelMap) -> LevelMap {
    LevelMap {
        levels: a
            .levels
            .iter()
            .zip(&b.levels)
            .map(|(la, lb)| lb.iter().map(|&x| la[x as usize]).collect())
            .collect(),
    }
}

/// Lifts a rule to every level of the store.
pub fn rule_to_levelmap(rule: &LocalRule, store: &PosetStore) -> Result<LevelMap> {
    let table = rule.quad_table();
    let flip = matches!(rule, LocalRule::LoopFlip);
    let mut levels = Vec::with_capacity(store.max_level());
    for n in 1..=store.max_level() {
        let images: Vec<u32> = store
            .codes(n)
            .par_iter()
            .map(|c| {
                let img = canonical_form(&apply_table(&table, flip, &c.digraph()));
                store.position(n, &img).map(|i| i as u32)
            })
            .collect::<Option<Vec<u32>>>()
            .ok_or_else(|| Error::RuleDefect {
                rule: rule.to_string(),
                level: n,
            })?;
        if !is_permutation(&images) {
            return Err(Error::RuleDefect {
                rule: rule.to_string(),
                level: n,
            });
        }
        levels.push(images);
    }
    Ok(LevelMap { levels })
}

/// `m` is an automorphism of `D_depth`: bijective on each level and
/// `G ≺ H ⟺ m(G) ≺ m(H)` for all stored cover pairs.
pub fn verify_automorphism(m: &LevelMap, store: &PosetStore) -> bool {
    if m.depth() > store.max_level() {
        return false;
    }
    for n in 1..=m.depth() {
        let level = m.level(n);
        if level.len() != store.level_size(n) || !is_permutation(level) {
            return false;
        }
    }
    (2..=m.depth()).all(|n| {
        (0..store.level_size(n)).into_par_iter().all(|h| {
            let mut mapped: Vec<u32> = store
                .lower_idx(n, h)
                .iter()
                .map(|&g| m.image(n - 1, g as usize) as u32)
                .collect();
            mapped.sort_unstable();
            mapped == store.lower_idx(n, m.image(n, h))
        })
    })
}

/// Closure of `generators` under composition, starting from the identity.
///
/// Elements are deduplicated by their restriction to the first
/// `min(depth, 3)` levels; a clash between distinct full maps is reported
/// as an error rather than silently merged.
pub fn generate_group(generators: &[LevelMap]) -> Result<Vec<LevelMap>> {
    let Some(first) = generators.first() else {
        return Ok(Vec::new());
    };
    for g in generators {
        compose(first, g)?;
    }
    let key_depth = first.depth().min(3);
    let identity = LevelMap {
        levels: first
            .levels
            .iter()
            .map(|l| (0..l.len() as u32).collect())
            .collect(),
    };
    let mut seen: HashMap<LevelMap, usize> = HashMap::new();
    let mut elements = vec![identity.clone()];
    seen.insert(identity.restrict(key_depth), 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for g in generators {
            let product = compose_unchecked(g, &elements[i]);
            let key = product.restrict(key_depth);
            match seen.get(&key) {
                Some(&j) => {
                    if elements[j] != product {
                        return Err(Error::Corrupt(format!(
                            "distinct group elements agree on the first {key_depth} levels"
                        )));
                    }
                }
                None => {
                    seen.insert(key, elements.len());
                    queue.push_back(elements.len());
                    elements.push(product);
                }
            }
        }
    }
    Ok(elements)
}

/// Number of pairwise distinct restrictions to `D_n`.
pub fn distinct_restrictions(group: &[LevelMap], n: usize) -> usize {
    group
        .iter()
        .map(|m| m.restrict(n))
        .collect::<HashSet<_>>()
        .len()
}

/// The generators φ₁…φ₅ and all φ_π lifted to one store.
#[derive(Clone, Debug)]
pub struct Generators {
    phi: [LevelMap; 5],
    letters: Vec<LevelMap>,
}

impl Generators {
    pub fn new(store: &PosetStore) -> Result<Self> {
        let phi = [1, 2, 3, 4, 5].map(|i| rule_to_levelmap(&LocalRule::phi(i).unwrap(), store));
        let [a, b, c, d, e] = phi;
        let letters = LetterPerm::all()
            .iter()
            .map(|pi| rule_to_levelmap(&LocalRule::Letters(*pi), store))
            .collect::<Result<Vec<_>>>()?;
        Ok(Generators {
            phi: [a?, b?, c?, d?, e?],
            letters,
        })
    }

    /// φ₁ … φ₅.
    pub fn phi(&self, i: usize) -> &LevelMap {
        &self.phi[i - 1]
    }

    pub fn letter(&self, pi: &LetterPerm) -> &LevelMap {
        &self.letters[pi.index()]
    }

    /// All 29 generators in the order of [`LocalRule::all`].
    pub fn all(&self) -> Vec<LevelMap> {
        self.phi.iter().chain(&self.letters).cloned().collect()
    }

    pub fn identity(&self) -> LevelMap {
        LevelMap {
            levels: self.phi[0]
                .levels
                .iter()
                .map(|l| (0..l.len() as u32).collect())
                .collect(),
        }
    }
}

/// `φ₂^p φ₃^q φ₄^r φ₅^s φ_π φ₁^t`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct NormalForm {
    pub p: bool,
    pub q: bool,
    pub r: bool,
    pub s: bool,
    pub pi: LetterPerm,
    pub t: bool,
}

impl NormalForm {
    pub const IDENTITY: NormalForm = NormalForm {
        p: false,
        q: false,
        r: false,
        s: false,
        pi: LetterPerm::IDENTITY,
        t: false,
    };

    pub const COUNT: usize = 16 * 24 * 2;

    pub fn all() -> Vec<NormalForm> {
        (0..Self::COUNT).map(NormalForm::from_index).collect()
    }

    pub fn from_index(idx: usize) -> NormalForm {
        let t = idx & 1 == 1;
        let rest = idx >> 1;
        let pi = LetterPerm::all()[rest % 24];
        let bits = rest / 24;
        NormalForm {
            p: bits >> 3 & 1 == 1,
            q: bits >> 2 & 1 == 1,
            r: bits >> 1 & 1 == 1,
            s: bits & 1 == 1,
            pi,
            t,
        }
    }

    pub fn index(&self) -> usize {
        let bits = (self.p as usize) << 3
            | (self.q as usize) << 2
            | (self.r as usize) << 1
            | self.s as usize;
        (bits * 24 + self.pi.index()) * 2 + self.t as usize
    }

    /// The action of φ₁ by conjugation on the normal subgroup:
    /// `(p, q, r, s, π) ↦ (q, p, s, r, (BC)π(BC))`.
    pub fn twist(&self) -> NormalForm {
        NormalForm {
            p: self.q,
            q: self.p,
            r: self.s,
            s: self.r,
            pi: self.pi.conjugate_bc(),
            t: self.t,
        }
    }

    /// Semidirect product `(n₁, t₁)(n₂, t₂) = (n₁ · α^{t₁}(n₂), t₁ + t₂)`.
    pub fn mul(&self, other: &NormalForm) -> NormalForm {
        let o = if self.t { other.twist() } else { *other };
        NormalForm {
            p: self.p ^ o.p,
            q: self.q ^ o.q,
            r: self.r ^ o.r,
            s: self.s ^ o.s,
            pi: self.pi.then_after(&o.pi),
            t: self.t ^ other.t,
        }
    }

    pub fn to_levelmap(&self, gens: &Generators) -> LevelMap {
        let mut m = gens.identity();
        let factors = [
            (self.p, gens.phi(2)),
            (self.q, gens.phi(3)),
            (self.r, gens.phi(4)),
            (self.s, gens.phi(5)),
            (true, gens.letter(&self.pi)),
            (self.t, gens.phi(1)),
        ];
        for (on, g) in factors {
            if on {
                m = compose_unchecked(&m, g);
            }
        }
        m
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{},{},{},{})",
            self.p as u8, self.q as u8, self.r as u8, self.s as u8, self.pi, self.t as u8
        )
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct RelationCheck {
    pub name: String,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StructureReport {
    pub order: usize,
    pub relations: Vec<RelationCheck>,
}

impl StructureReport {
    pub fn all_hold(&self) -> bool {
        self.relations.iter().all(|r| r.holds)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.relations
            .iter()
            .filter(|r| !r.holds)
            .map(|r| r.name.as_str())
            .collect()
    }
}

/// Element order of `m`, capped at `limit` (returns `None` past it).
pub fn element_order(m: &LevelMap, limit: usize) -> Option<usize> {
    let mut power = m.clone();
    for k in 1..=limit {
        if power.is_identity() {
            return Some(k);
        }
        power = compose_unchecked(m, &power);
    }
    None
}

/// Structural checks on the generated group: conjugation by φ₁, the direct
/// product decomposition, the normal forms and their multiplication rule.
pub fn verify_structure(gens: &Generators, group: &[LevelMap]) -> StructureReport {
    let mut relations = Vec::new();
    let mut check = |name: String, holds: bool| relations.push(RelationCheck { name, holds });
    let phi = |i: usize| gens.phi(i);
    let c = compose_unchecked;
    let identity = gens.identity();

    for i in 1..=5 {
        check(format!("phi{i}^2 = id"), c(phi(i), phi(i)).is_identity());
    }
    for (i, j) in [(2, 3), (3, 2), (4, 5), (5, 4)] {
        check(
            format!("phi1 phi{i} phi1 = phi{j}"),
            c(phi(1), &c(phi(i), phi(1))) == *phi(j),
        );
    }
    let letters = LetterPerm::all();
    check(
        "phi1 phi_pi phi1 = phi_(BC)pi(BC) for all pi".into(),
        letters
            .iter()
            .all(|pi| c(phi(1), &c(gens.letter(pi), phi(1))) == *gens.letter(&pi.conjugate_bc())),
    );
    check(
        "phi_pi phi_sigma = phi_(pi sigma) for all pi, sigma".into(),
        letters
            .iter()
            .cartesian_product(&letters)
            .all(|(pi, sigma)| {
                c(gens.letter(pi), gens.letter(sigma)) == *gens.letter(&pi.then_after(sigma))
            }),
    );
    check(
        "phi_id = id".into(),
        gens.letter(&LetterPerm::IDENTITY).is_identity(),
    );
    for (i, j) in (2..=5).tuple_combinations() {
        check(
            format!("phi{i} phi{j} = phi{j} phi{i}"),
            c(phi(i), phi(j)) == c(phi(j), phi(i)),
        );
    }
    for i in 2..=5 {
        check(
            format!("phi{i} commutes with every phi_pi"),
            letters
                .iter()
                .all(|pi| c(phi(i), gens.letter(pi)) == c(gens.letter(pi), phi(i))),
        );
    }

    let forms = NormalForm::all();
    let form_maps: Vec<LevelMap> = forms.par_iter().map(|f| f.to_levelmap(gens)).collect();
    let key_depth = identity.depth().min(3);
    let keyed: HashMap<LevelMap, usize> = form_maps
        .iter()
        .enumerate()
        .map(|(i, m)| (m.restrict(key_depth), i))
        .collect();
    let full: HashSet<&LevelMap> = form_maps.iter().collect();
    check(
        format!("{} normal forms are pairwise distinct", NormalForm::COUNT),
        full.len() == NormalForm::COUNT,
    );
    check(
        format!("normal forms are distinct on the first {key_depth} levels"),
        keyed.len() == NormalForm::COUNT,
    );
    let group_set: HashSet<&LevelMap> = group.iter().collect();
    check(
        "generated group equals the set of normal forms".into(),
        group_set.len() == group.len() && group_set == full,
    );
    let restricted: Vec<LevelMap> = form_maps.iter().map(|m| m.restrict(key_depth)).collect();
    let twist_ok = keyed.len() == NormalForm::COUNT
        && (0..NormalForm::COUNT).into_par_iter().all(|a| {
            (0..NormalForm::COUNT).all(|b| {
                let product = compose_unchecked(&restricted[a], &restricted[b]);
                keyed.get(&product) == Some(&forms[a].mul(&forms[b]).index())
            })
        });
    check(
        "multiplication follows the twisted product rule".into(),
        twist_ok,
    );

    check(
        "every element has order dividing 24".into(),
        group
            .par_iter()
            .all(|m| element_order(m, 24).is_some_and(|k| 24 % k == 0)),
    );

    let normal_gens: Vec<LevelMap> = (2..=5)
        .map(|i| phi(i).clone())
        .chain(letters.iter().map(|pi| gens.letter(pi).clone()))
        .collect();
    let normal = generate_group(&normal_gens).unwrap_or_default();
    let normal_set: HashSet<&LevelMap> = normal.iter().collect();
    check(
        "subgroup without phi1 has index 2".into(),
        !normal.is_empty() && normal.len() * 2 == group.len(),
    );
    check(
        "subgroup without phi1 meets <phi1> trivially".into(),
        !normal_set.contains(phi(1)),
    );
    check(
        "subgroup without phi1 is normal".into(),
        normal
            .iter()
            .all(|m| normal_set.contains(&c(phi(1), &c(m, phi(1))))),
    );
    check(
        "phi4 and phi5 are the identity on D2".into(),
        phi(4).restrict(2).is_identity() && phi(5).restrict(2).is_identity(),
    );

    StructureReport {
        order: group.len(),
        relations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::named;

    fn cc(g: Digraph) -> crate::CanonicalCode {
        canonical_form(&g)
    }

    #[test]
    fn letter_perm_index_matches_enumeration() {
        for (i, pi) in LetterPerm::all().iter().enumerate() {
            assert_eq!(pi.index(), i);
        }
        assert_eq!(LetterPerm::SWAP_BC.conjugate_bc(), LetterPerm::SWAP_BC);
        assert!(LetterPerm::from_images([0, 0, 1, 2]).is_none());
    }

    #[test]
    fn tables_keep_loops_except_loop_flip() {
        for rule in LocalRule::all() {
            for (q, &out) in rule.quad_table().iter().enumerate() {
                let q = q as u8;
                if rule == LocalRule::LoopFlip {
                    assert_eq!(out, q ^ 0b11);
                } else {
                    assert_eq!(out & 0b11, q & 0b11, "{rule} moved a loop");
                }
            }
        }
    }

    #[test]
    fn rule_examples() {
        let e = named::pair(false, false, false, false);
        let p = named::pair(false, false, true, false);
        let flip = LocalRule::LoopFlip;
        assert!(crate::digraph::is_isomorphic(
            &apply_rule(&flip, &e),
            &named::pair(true, true, false, false)
        ));
        assert!(crate::digraph::is_isomorphic(
            &apply_rule(&flip, &p),
            &named::pair(true, true, true, false)
        ));

        let reversed = apply_rule(&LocalRule::phi(4).unwrap(), &named::v());
        assert_eq!(reversed, Digraph::from_edges(3, &[(1, 0), (1, 2)]).unwrap());

        let phi2 = LocalRule::phi(2).unwrap();
        assert_eq!(apply_rule(&phi2, &e), named::pair(false, false, true, true));
    }

    #[test]
    fn letter_rule_keeps_loop_in_place() {
        // loop on vertex 1, pair read as (0, 1); A -> B means the edge leaves vertex 1
        let a_on_v = named::pair(false, true, false, false);
        let to_b = LocalRule::Letters(LetterPerm::from_images([1, 0, 2, 3]).unwrap());
        assert_eq!(
            apply_rule(&to_b, &a_on_v),
            named::pair(false, true, false, true)
        );
    }

    #[test]
    fn levelmap_basics() {
        let m = LevelMap::from_levels(vec![vec![1, 0], vec![2, 0, 1]]).unwrap();
        assert_eq!(
            m.compose(&m.inverse()).unwrap().levels,
            vec![vec![0, 1], vec![0, 1, 2]]
        );
        assert!(LevelMap::from_levels(vec![vec![0, 0]]).is_err());
        let other = LevelMap::from_levels(vec![vec![0, 1]]).unwrap();
        assert!(matches!(m.compose(&other), Err(Error::ShapeMismatch)));
        let bad = LevelMap::from_levels_unchecked(vec![vec![0, 0], vec![0, 1, 2]]);
        assert!(matches!(
            compose(&m, &bad),
            Err(Error::NotBijective { level: 1 })
        ));
    }

    #[test]
    fn level_two_actions() {
        let store = PosetStore::build(3).unwrap();
        let idx = |g: Digraph| store.index_of(&cc(g)).unwrap();
        let e = idx(named::pair(false, false, false, false));
        let ep = idx(named::pair(false, false, true, true));
        let b = idx(named::pair(true, false, true, false));
        let c_ = idx(named::pair(true, false, false, true));

        let phi2 = rule_to_levelmap(&LocalRule::phi(2).unwrap(), &store).unwrap();
        let moved: Vec<usize> = (0..10).filter(|&i| phi2.image(2, i) != i).collect();
        assert_eq!(moved, {
            let mut v = vec![e, ep];
            v.sort();
            v
        });
        assert_eq!(phi2.image(2, e), ep);

        let phi1 = rule_to_levelmap(&LocalRule::LoopFlip, &store).unwrap();
        assert_eq!(phi1.level(1), &[1, 0]);

        let bc = rule_to_levelmap(&LocalRule::Letters(LetterPerm::SWAP_BC), &store).unwrap();
        let moved: Vec<usize> = (0..10).filter(|&i| bc.image(2, i) != i).collect();
        assert_eq!(moved.len(), 2);
        assert_eq!(bc.image(2, b), c_);
    }

    #[test]
    fn automorphism_checks_on_small_store() {
        let store = PosetStore::build(3).unwrap();
        assert!(verify_automorphism(&LevelMap::identity(&store, 3), &store));
        for rule in LocalRule::all() {
            let m = rule_to_levelmap(&rule, &store).unwrap();
            assert!(verify_automorphism(&m, &store), "{rule}");
        }
    }

    #[test]
    fn swapping_e_and_p_is_not_an_automorphism() {
        let store = PosetStore::build(3).unwrap();
        let e = store
            .index_of(&cc(named::pair(false, false, false, false)))
            .unwrap();
        let p = store
            .index_of(&cc(named::pair(false, false, true, false)))
            .unwrap();
        assert_ne!(store.upper_idx(2, e).len(), store.upper_idx(2, p).len());
        let mut level2: Vec<u32> = (0..10).collect();
        level2.swap(e, p);
        let m = LevelMap::identity(&store, 3).with_level(2, level2).unwrap();
        assert!(!verify_automorphism(&m, &store));
        // on D2 alone the swap is harmless
        assert!(verify_automorphism(&m.restrict(2), &store));
    }

    #[test]
    fn normal_form_multiplication_is_associative() {
        let forms = NormalForm::all();
        for (i, f) in forms.iter().enumerate() {
            assert_eq!(f.index(), i);
        }
        for a in forms.iter().step_by(37) {
            for b in forms.iter().step_by(11) {
                for c in forms.iter().step_by(53) {
                    assert_eq!(a.mul(b).mul(c), a.mul(&b.mul(c)));
                }
            }
            assert_eq!(a.mul(&NormalForm::IDENTITY), *a);
            assert_eq!(NormalForm::IDENTITY.mul(a), *a);
        }
    }
}
