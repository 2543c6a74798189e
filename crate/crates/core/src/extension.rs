//! Extending automorphisms of `D_n` one level up.
//!
//! An automorphism `φ` of `D_n` extends to `D_{n+1}` exactly when it
//! permutes the signature set of level `n + 1` (pairs `(S, k)` of a lower
//! cover set and the number of digraphs sharing it). An extendible `φ` then
//! has `∏ k!` extensions: one bijection from every group onto the group
//! whose lower covers are the `φ`-image of its own.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

use crate::automorphism::{compose_unchecked, LevelMap};
use crate::error::{Error, Result};
use crate::poset::PosetStore;

/// A candidate member of `Aut D_n`, represented on levels `1..=n` only.
pub type PartialAutomorphism = LevelMap;

/// Every automorphism of `D_n`, by backtracking one digraph at a time.
///
/// Only `n ≤ 2` is enumerated; larger requests are refused with the order
/// predicted by the extension count when level three is available.
pub fn enumerate_aut(store: &PosetStore, n: usize) -> Result<Vec<PartialAutomorphism>> {
    if n >= 3 {
        let estimate = if n == 3 && store.max_level() >= 3 {
            let order = aut_order_next(store, 2)?;
            format!("{order} (~{})", approx(&order))
        } else {
            "unknown, beyond |Aut D_3|".to_string()
        };
        return Err(Error::TooLarge { n, estimate });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if store.max_level() < n {
        return Err(Error::MissingLevel(n));
    }
    let mut out = Vec::new();
    let mut partial: Vec<Vec<u32>> = Vec::with_capacity(n);
    backtrack_level(store, n, &mut partial, &mut out);
    Ok(out)
}

fn backtrack_level(
    store: &PosetStore,
    n: usize,
    partial: &mut Vec<Vec<u32>>,
    out: &mut Vec<LevelMap>,
) {
    let level = partial.len() + 1;
    if level > n {
        out.push(LevelMap::from_levels_unchecked(partial.clone()));
        return;
    }
    let size = store.level_size(level);
    let mut images = vec![u32::MAX; size];
    let mut used = vec![false; size];
    assign(store, n, level, 0, &mut images, &mut used, partial, out);
}

#[allow(clippy::too_many_arguments)]
fn assign(
    store: &PosetStore,
    n: usize,
    level: usize,
    h: usize,
    images: &mut [u32],
    used: &mut [bool],
    partial: &mut Vec<Vec<u32>>,
    out: &mut Vec<LevelMap>,
) {
    if h == images.len() {
        partial.push(images.to_vec());
        backtrack_level(store, n, partial, out);
        partial.pop();
        return;
    }
    let wanted: Option<Vec<u32>> = (level > 1).then(|| {
        let below = &partial[level - 2];
        let mut w: Vec<u32> = store
            .lower_idx(level, h)
            .iter()
            .map(|&g| below[g as usize])
            .collect();
        w.sort_unstable();
        w
    });
    for t in 0..images.len() {
        if used[t] {
            continue;
        }
        if let Some(w) = &wanted {
            if store.lower_idx(level, t) != w.as_slice() {
                continue;
            }
        }
        used[t] = true;
        images[h] = t as u32;
        assign(store, n, level, h + 1, images, used, partial, out);
        used[t] = false;
    }
}

fn mapped_signatures(
    phi: &LevelMap,
    sigs: &[(Vec<u32>, usize)],
    n: usize,
) -> Vec<(Vec<u32>, usize)> {
    let mut mapped: Vec<_> = sigs
        .iter()
        .map(|(s, k)| {
            let mut img: Vec<u32> = s.iter().map(|&g| phi.image(n, g as usize) as u32).collect();
            img.sort_unstable();
            (img, *k)
        })
        .collect();
    mapped.sort_unstable();
    mapped
}

fn sorted_signatures(store: &PosetStore, level: usize) -> Result<Vec<(Vec<u32>, usize)>> {
    let mut sigs = store.signature_indices(level)?;
    sigs.sort_unstable();
    Ok(sigs)
}

/// `φ(H_{n+1}) = H_{n+1}` for `φ` on `D_n`.
pub fn extends(phi: &PartialAutomorphism, store: &PosetStore) -> Result<bool> {
    let n = phi.depth();
    let sigs = sorted_signatures(store, n + 1)?;
    Ok(mapped_signatures(phi, &sigs, n) == sigs)
}

/// Multiplicities of `k` over the signature set of level `n + 1`.
pub fn factor_formula(store: &PosetStore, n: usize) -> Result<BTreeMap<usize, usize>> {
    let mut hist = BTreeMap::new();
    for sig in store.signature_set(n + 1)? {
        *hist.entry(sig.k).or_insert(0) += 1;
    }
    Ok(hist)
}

fn factorial(k: usize) -> BigUint {
    (1..=k as u64).map(BigUint::from).product()
}

/// Extensions per extendible automorphism of `D_n`: `∏ k!` over `H_{n+1}`.
pub fn extension_count(store: &PosetStore, n: usize) -> Result<BigUint> {
    Ok(factor_formula(store, n)?
        .into_iter()
        .map(|(k, mult)| factorial(k).pow(mult as u32))
        .product())
}

/// Automorphisms of `D_n` (enumerated) that pass the extension test into
/// level `n + 1`.
pub fn extendible(store: &PosetStore, n: usize) -> Result<(Vec<LevelMap>, Vec<LevelMap>)> {
    let candidates = enumerate_aut(store, n)?;
    let sigs = sorted_signatures(store, n + 1)?;
    let passing = candidates
        .par_iter()
        .filter(|phi| mapped_signatures(phi, &sigs, n) == sigs)
        .cloned()
        .collect();
    Ok((candidates, passing))
}

/// `|Aut D_{n+1}|` = number of extendible automorphisms of `D_n` times the
/// per-map extension count.
pub fn aut_order_next(store: &PosetStore, n: usize) -> Result<BigUint> {
    let (_, passing) = extendible(store, n)?;
    Ok(BigUint::from(passing.len()) * extension_count(store, n)?)
}

/// Decimal mantissa-exponent rendering such as `1.67e13`.
pub fn approx(x: &BigUint) -> String {
    let digits = x.to_string();
    if digits.len() <= 3 {
        return digits;
    }
    let lead: f64 = digits[..4].parse::<f64>().unwrap() / 1000.0;
    let rounded = (lead * 100.0).round() / 100.0;
    format!("{rounded:.2}e{}", digits.len() - 1)
}

/// `true` iff `maps` is closed under composition and inverses.
pub fn is_subgroup(maps: &[LevelMap]) -> bool {
    let set: std::collections::HashSet<&LevelMap> = maps.iter().collect();
    maps.par_iter().all(|a| {
        set.contains(&a.inverse()) && maps.iter().all(|b| set.contains(&compose_unchecked(a, b)))
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtensionSummary {
    pub from: usize,
    pub to: usize,
    pub candidates: usize,
    pub extendible: usize,
    pub extendible_is_subgroup: bool,
    pub factor_formula: BTreeMap<String, usize>,
    pub factor: String,
    pub aut_upper_level_order: String,
    pub aut_upper_level_order_approx: String,
}

pub fn summarize(store: &PosetStore, from: usize) -> Result<ExtensionSummary> {
    let (candidates, passing) = extendible(store, from)?;
    let factor = extension_count(store, from)?;
    let order = BigUint::from(passing.len()) * &factor;
    Ok(ExtensionSummary {
        from,
        to: from + 1,
        candidates: candidates.len(),
        extendible: passing.len(),
        extendible_is_subgroup: is_subgroup(&passing),
        factor_formula: factor_formula(store, from)?
            .into_iter()
            .map(|(k, m)| (k.to_string(), m))
            .collect(),
        factor: factor.to_string(),
        aut_upper_level_order: order.to_string(),
        aut_upper_level_order_approx: approx(&order),
    })
}

/// Lazy enumeration of every extension of an extendible `φ`.
pub struct Extensions {
    base: Vec<Vec<u32>>,
    sources: Vec<Vec<u32>>,
    targets: Vec<Vec<u32>>,
    perms: Vec<Vec<usize>>,
    level_size: usize,
    done: bool,
}

impl Extensions {
    /// Total number of maps the iterator yields.
    pub fn total(&self) -> BigUint {
        self.sources.iter().map(|s| factorial(s.len())).product()
    }
}

impl Iterator for Extensions {
    type Item = PartialAutomorphism;

    fn next(&mut self) -> Option<PartialAutomorphism> {
        if self.done {
            return None;
        }
        let mut top = vec![0u32; self.level_size];
        for ((src, dst), perm) in self.sources.iter().zip(&self.targets).zip(&self.perms) {
            for (a, &g) in src.iter().enumerate() {
                top[g as usize] = dst[perm[a]];
            }
        }
        let mut levels = self.base.clone();
        levels.push(top);

        self.done = true;
        for perm in self.perms.iter_mut().rev() {
            if next_permutation(perm) {
                self.done = false;
                break;
            }
            perm.sort_unstable();
        }
        Some(LevelMap::from_levels_unchecked(levels))
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = p.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = p.iter().rposition(|&x| x > p[i]).unwrap();
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

/// The group bijection `ψ` induced by `φ` on level `n + 1`:
/// `ψ(i) = j` iff `φ` maps group `i`'s lower covers onto group `j`'s.
pub fn induced_group_map(phi: &PartialAutomorphism, store: &PosetStore) -> Result<Vec<usize>> {
    let n = phi.depth();
    let sigs = store.signature_indices(n + 1)?;
    let by_key: HashMap<&Vec<u32>, usize> =
        sigs.iter().enumerate().map(|(j, (s, _))| (s, j)).collect();
    sigs.iter()
        .map(|(s, k)| {
            let mut img: Vec<u32> = s.iter().map(|&g| phi.image(n, g as usize) as u32).collect();
            img.sort_unstable();
            match by_key.get(&img) {
                Some(&j) if sigs[j].1 == *k => Ok(j),
                _ => Err(Error::NotExtendible(n + 1)),
            }
        })
        .collect()
}

pub fn enumerate_extensions(phi: &PartialAutomorphism, store: &PosetStore) -> Result<Extensions> {
    let n = phi.depth();
    if !extends(phi, store)? {
        return Err(Error::NotExtendible(n + 1));
    }
    let psi = induced_group_map(phi, store)?;
    let members = store.group_member_indices(n + 1)?;
    let targets = psi.iter().map(|&j| members[j].clone()).collect();
    let perms = members.iter().map(|m| (0..m.len()).collect()).collect();
    Ok(Extensions {
        base: phi.levels().to_vec(),
        sources: members,
        targets,
        perms,
        level_size: store.level_size(n + 1),
        done: false,
    })
}
