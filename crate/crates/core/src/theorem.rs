//! Pinning the automorphisms of `D_3` that extend to `D_4`.
//!
//! Any automorphism fixing the first two levels must keep each level-three
//! digraph inside its class of equal lower covers and equal upper-cover
//! count. Those classes have at most two members; two of the two-element
//! classes are swapped by φ₄ and φ₅ respectively and anchor the remaining
//! argument. Six necessary conditions, tested against the anchors `V` and
//! `W`, then show each other class is fixed. Together with the 192
//! extendible automorphisms of `D_2` this bounds the order by `192 · 4`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::automorphism::{
    apply_rule, compose_unchecked, distinct_restrictions, generate_group, verify_automorphism,
    Generators, LetterPerm, LevelMap, LocalRule,
};
use crate::digraph::{canonical_form, named, CanonicalCode};
use crate::error::{Error, Result};
use crate::extension::{extendible, extends};
use crate::poset::PosetStore;

const LEVEL: usize = 3;

/// A two-element class `{H, H'}` of level three, `H < H'` by code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PairClass {
    pub first: CanonicalCode,
    pub second: CanonicalCode,
}

impl fmt::Display for PairClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.first, self.second)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassPartition {
    pub pairs: Vec<PairClass>,
    pub singletons: Vec<CanonicalCode>,
}

/// Partitions level three by (lower-cover set, upper-cover count).
pub fn alpha_beta_classes(store: &PosetStore) -> Result<ClassPartition> {
    if store.max_level() < LEVEL + 1 {
        return Err(Error::MissingLevel(LEVEL + 1));
    }
    let mut classes: BTreeMap<(Vec<u32>, usize), Vec<CanonicalCode>> = BTreeMap::new();
    for (i, &c) in store.codes(LEVEL).iter().enumerate() {
        let key = (
            store.lower_idx(LEVEL, i).to_vec(),
            store.upper_idx(LEVEL, i).len(),
        );
        classes.entry(key).or_default().push(c);
    }
    let mut pairs = Vec::new();
    let mut singletons = Vec::new();
    for members in classes.into_values() {
        match members.as_slice() {
            [one] => singletons.push(*one),
            [a, b] => pairs.push(PairClass {
                first: *a.min(b),
                second: *a.max(b),
            }),
            more => return Err(Error::OversizedClass { size: more.len() }),
        }
    }
    pairs.sort_unstable();
    singletons.sort_unstable();
    Ok(ClassPartition { pairs, singletons })
}

fn indexed(store: &PosetStore, codes: &[u32], n: usize) -> Vec<CanonicalCode> {
    codes
        .iter()
        .map(|&i| store.code_at(n, i as usize))
        .collect()
}

fn intersect(a: &[u32], b: &[u32]) -> Vec<u32> {
    let set: HashSet<&u32> = b.iter().collect();
    a.iter().filter(|x| set.contains(x)).copied().collect()
}

/// `u(g) ∩ u(h)`.
pub fn common_upper(
    store: &PosetStore,
    g: &CanonicalCode,
    h: &CanonicalCode,
) -> Result<Vec<CanonicalCode>> {
    let n = g.n();
    if h.n() != n {
        return Err(Error::ShapeMismatch);
    }
    if store.max_level() <= n {
        return Err(Error::MissingLevel(n + 1));
    }
    let (gi, hi) = (store.index_of(g)?, store.index_of(h)?);
    Ok(indexed(
        store,
        &intersect(store.upper_idx(n, gi), store.upper_idx(n, hi)),
        n + 1,
    ))
}

/// `l(g) ∩ l(h)`.
pub fn common_lower(
    store: &PosetStore,
    g: &CanonicalCode,
    h: &CanonicalCode,
) -> Result<Vec<CanonicalCode>> {
    let n = g.n();
    if h.n() != n {
        return Err(Error::ShapeMismatch);
    }
    if n == 1 {
        return Ok(Vec::new());
    }
    let (gi, hi) = (store.index_of(g)?, store.index_of(h)?);
    Ok(indexed(
        store,
        &intersect(store.lower_idx(n, gi), store.lower_idx(n, hi)),
        n - 1,
    ))
}

/// The two special level-three digraphs and their partners.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Anchors {
    /// Loopless in-star `0 → 1 ← 2`.
    pub v: CanonicalCode,
    pub v_partner: CanonicalCode,
    /// The in-star with every loop present.
    pub w: CanonicalCode,
    pub w_partner: CanonicalCode,
}

impl Anchors {
    pub fn v_pair(&self) -> PairClass {
        PairClass {
            first: self.v.min(self.v_partner),
            second: self.v.max(self.v_partner),
        }
    }

    pub fn w_pair(&self) -> PairClass {
        PairClass {
            first: self.w.min(self.w_partner),
            second: self.w.max(self.w_partner),
        }
    }
}

/// Finds `V` and `W` from their shape and checks that `{V, φ₄(V)}` and
/// `{W, φ₅(W)}` are classes of the partition.
pub fn locate_anchors(partition: &ClassPartition) -> Result<Anchors> {
    let v_graph = named::v();
    let w_graph = named::w();
    let v = canonical_form(&v_graph);
    let w = canonical_form(&w_graph);
    let v_partner = canonical_form(&apply_rule(&LocalRule::phi(4).unwrap(), &v_graph));
    let w_partner = canonical_form(&apply_rule(&LocalRule::phi(5).unwrap(), &w_graph));
    let anchors = Anchors {
        v,
        v_partner,
        w,
        w_partner,
    };
    if !partition.pairs.contains(&anchors.v_pair()) {
        return Err(Error::AnchorMissing("the pair {V, phi4(V)}"));
    }
    if !partition.pairs.contains(&anchors.w_pair()) {
        return Err(Error::AnchorMissing("the pair {W, phi5(W)}"));
    }
    Ok(anchors)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Condition {
    #[serde(rename = "1A")]
    C1A,
    #[serde(rename = "1B")]
    C1B,
    #[serde(rename = "2A")]
    C2A,
    #[serde(rename = "2B")]
    C2B,
    #[serde(rename = "3A")]
    C3A,
    #[serde(rename = "3B")]
    C3B,
}

impl Condition {
    pub const ORDER: [Condition; 6] = [
        Condition::C1A,
        Condition::C1B,
        Condition::C2A,
        Condition::C2B,
        Condition::C3A,
        Condition::C3B,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Condition::C1A => "1A",
            Condition::C1B => "1B",
            Condition::C2A => "2A",
            Condition::C2B => "2B",
            Condition::C3A => "3A",
            Condition::C3B => "3B",
        }
    }

    fn uses_w(&self) -> bool {
        matches!(self, Condition::C1B | Condition::C2B | Condition::C3B)
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Data showing why a pair cannot be swapped.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    CommonUpperCounts {
        first: usize,
        second: usize,
    },
    LowerCountMultisets {
        first: Vec<usize>,
        second: Vec<usize>,
    },
    Separator {
        upper: CanonicalCode,
        upper_partner: CanonicalCode,
        fixed: CanonicalCode,
        below_upper: bool,
    },
}

/// Which level-three digraphs condition 3 treats as already fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedSetReading {
    /// Singleton classes only.
    SingletonsOnly,
    /// Everything outside the eighteen non-anchor pairs, i.e. the
    /// singletons together with both anchor classes.
    OutsideEliminablePairs,
}

/// Per-digraph lookups condition checks need, all on level-three indices.
struct Context<'a> {
    store: &'a PosetStore,
    v: usize,
    w: usize,
}

impl<'a> Context<'a> {
    fn new(store: &'a PosetStore, anchors: &Anchors) -> Result<Self> {
        Ok(Context {
            store,
            v: store.index_of(&anchors.v)?,
            w: store.index_of(&anchors.w)?,
        })
    }

    fn anchor(&self, condition: Condition) -> usize {
        if condition.uses_w() {
            self.w
        } else {
            self.v
        }
    }

    fn common_upper(&self, h: usize, anchor: usize) -> Vec<u32> {
        intersect(
            self.store.upper_idx(LEVEL, h),
            self.store.upper_idx(LEVEL, anchor),
        )
    }

    fn lower_count(&self, k: u32) -> usize {
        self.store.lower_idx(LEVEL + 1, k as usize).len()
    }

    fn lower_counts(&self, uppers: &[u32]) -> Vec<usize> {
        let mut counts: Vec<usize> = uppers.iter().map(|&k| self.lower_count(k)).collect();
        counts.sort_unstable();
        counts
    }
}

fn condition_1(ctx: &Context, h: usize, h2: usize, anchor: usize) -> Option<Witness> {
    let a = ctx.common_upper(h, anchor).len();
    let b = ctx.common_upper(h2, anchor).len();
    (a != b).then_some(Witness::CommonUpperCounts {
        first: a,
        second: b,
    })
}

fn condition_2(ctx: &Context, h: usize, h2: usize, anchor: usize) -> Option<Witness> {
    let a = ctx.lower_counts(&ctx.common_upper(h, anchor));
    let b = ctx.lower_counts(&ctx.common_upper(h2, anchor));
    (a != b).then_some(Witness::LowerCountMultisets {
        first: a,
        second: b,
    })
}

fn condition_3(
    ctx: &Context,
    h: usize,
    h2: usize,
    anchor: usize,
    fixed: &[usize],
) -> Option<Witness> {
    let ups = ctx.common_upper(h, anchor);
    let ups2 = ctx.common_upper(h2, anchor);
    let mut multiplicity: HashMap<usize, usize> = HashMap::new();
    for &k in &ups {
        *multiplicity.entry(ctx.lower_count(k)).or_insert(0) += 1;
    }
    let store = ctx.store;
    for &k in &ups {
        let count = ctx.lower_count(k);
        if multiplicity[&count] != 1 {
            continue;
        }
        let Some(&k2) = ups2.iter().find(|&&x| ctx.lower_count(x) == count) else {
            continue;
        };
        let below = store.lower_idx(LEVEL + 1, k as usize);
        let below2 = store.lower_idx(LEVEL + 1, k2 as usize);
        for &f in fixed {
            let f = f as u32;
            let (in1, in2) = (below.contains(&f), below2.contains(&f));
            if in1 != in2 {
                return Some(Witness::Separator {
                    upper: store.code_at(LEVEL + 1, k as usize),
                    upper_partner: store.code_at(LEVEL + 1, k2 as usize),
                    fixed: store.code_at(LEVEL, f as usize),
                    below_upper: in1,
                });
            }
        }
    }
    None
}

fn run_condition(
    ctx: &Context,
    cond: Condition,
    h: usize,
    h2: usize,
    fixed: &[usize],
) -> Option<Witness> {
    let anchor = ctx.anchor(cond);
    match cond {
        Condition::C1A | Condition::C1B => condition_1(ctx, h, h2, anchor),
        Condition::C2A | Condition::C2B => condition_2(ctx, h, h2, anchor),
        Condition::C3A | Condition::C3B => condition_3(ctx, h, h2, anchor, fixed),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PairOutcome {
    pub pair: PairClass,
    /// First condition in the fixed order that fails; `None` means free.
    pub eliminated_by: Option<Condition>,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionReport {
    pub reading: FixedSetReading,
    pub fixed_set_size: usize,
    pub outcomes: Vec<PairOutcome>,
}

impl ConditionReport {
    pub fn counts(&self) -> BTreeMap<String, usize> {
        let mut counts: BTreeMap<String, usize> = Condition::ORDER
            .iter()
            .map(|c| (c.label().to_string(), 0))
            .collect();
        for o in &self.outcomes {
            if let Some(c) = o.eliminated_by {
                *counts.get_mut(c.label()).unwrap() += 1;
            }
        }
        counts
    }

    pub fn free(&self) -> Vec<PairClass> {
        self.outcomes
            .iter()
            .filter(|o| o.eliminated_by.is_none())
            .map(|o| o.pair)
            .collect()
    }
}

/// Level-three indices condition 3 may treat as fixed under `reading`.
pub fn fixed_set(
    store: &PosetStore,
    partition: &ClassPartition,
    anchors: &Anchors,
    reading: FixedSetReading,
) -> Result<Vec<usize>> {
    let mut fixed: Vec<CanonicalCode> = partition.singletons.clone();
    if reading == FixedSetReading::OutsideEliminablePairs {
        fixed.extend([anchors.v, anchors.v_partner, anchors.w, anchors.w_partner]);
    }
    let mut idx = fixed
        .iter()
        .map(|c| store.index_of(c))
        .collect::<Result<Vec<_>>>()?;
    idx.sort_unstable();
    Ok(idx)
}

/// Applies 1A, 1B, 2A, 2B, 3A, 3B in order to every non-anchor pair and
/// records the first failure.
pub fn eliminate(
    store: &PosetStore,
    partition: &ClassPartition,
    anchors: &Anchors,
    reading: FixedSetReading,
) -> Result<ConditionReport> {
    let ctx = Context::new(store, anchors)?;
    let fixed = fixed_set(store, partition, anchors, reading)?;
    let free = [anchors.v_pair(), anchors.w_pair()];
    let outcomes = partition
        .pairs
        .iter()
        .map(|pair| {
            if free.contains(pair) {
                return Ok(PairOutcome {
                    pair: *pair,
                    eliminated_by: None,
                    witness: None,
                });
            }
            let h = store.index_of(&pair.first)?;
            let h2 = store.index_of(&pair.second)?;
            let first_fail = Condition::ORDER
                .iter()
                .find_map(|&c| run_condition(&ctx, c, h, h2, &fixed).map(|w| (c, w)));
            Ok(PairOutcome {
                pair: *pair,
                eliminated_by: first_fail.as_ref().map(|(c, _)| *c),
                witness: first_fail.map(|(_, w)| w),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConditionReport {
        reading,
        fixed_set_size: fixed.len(),
        outcomes,
    })
}

/// Evaluates one condition on one pair in isolation.
pub fn check_condition(
    store: &PosetStore,
    anchors: &Anchors,
    pair: &PairClass,
    condition: Condition,
    fixed: &[usize],
) -> Result<Option<Witness>> {
    let ctx = Context::new(store, anchors)?;
    let h = store.index_of(&pair.first)?;
    let h2 = store.index_of(&pair.second)?;
    Ok(run_condition(&ctx, condition, h, h2, fixed))
}

/// Re-derives a separator witness straight from the lower covers.
pub fn recheck_witness(store: &PosetStore, w: &Witness) -> Result<bool> {
    match w {
        Witness::Separator {
            upper,
            upper_partner,
            fixed,
            below_upper,
        } => {
            let a = store.lower_covers(upper)?.contains(fixed);
            let b = store.lower_covers(upper_partner)?.contains(fixed);
            Ok(a == *below_upper && a != b)
        }
        _ => Ok(true),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub classes2: usize,
    pub singletons: usize,
    pub free: Vec<PairClass>,
    pub eliminated: BTreeMap<String, usize>,
    pub eliminated_outside_pairs_reading: BTreeMap<String, usize>,
    pub readings_agree: bool,
    pub aut2_d3_order: usize,
    pub stabilizer_bound: usize,
    pub lower_bound: usize,
    pub aut3_d4_order: Option<usize>,
    pub stabilizer_realized_by: Vec<String>,
    pub checks: Vec<Check>,
    pub condition_report: ConditionReport,
    pub valid: bool,
    #[serde(skip)]
    pub transcript: Vec<String>,
}

impl Certificate {
    pub fn failing(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.holds)
            .map(|c| c.name.as_str())
            .collect()
    }
}

/// The map on `D_3` that fixes levels one and two and swaps exactly the
/// listed level-three pairs.
pub fn swap_map(store: &PosetStore, pairs: &[PairClass]) -> Result<LevelMap> {
    let mut top: Vec<u32> = (0..store.level_size(LEVEL) as u32).collect();
    for p in pairs {
        let (a, b) = (store.index_of(&p.first)?, store.index_of(&p.second)?);
        top.swap(a, b);
    }
    LevelMap::identity(store, LEVEL - 1).with_level(LEVEL, top)
}

/// Replays the whole argument on a store holding levels one to four.
///
/// `group` must be the closure of `gens`.
pub fn verify_theorem(
    store: &PosetStore,
    gens: &Generators,
    group: &[LevelMap],
) -> Result<Certificate> {
    let mut checks = Vec::new();
    let mut transcript = Vec::new();
    let check = |checks: &mut Vec<Check>, name: String, holds: bool| {
        checks.push(Check { name, holds });
        holds
    };

    // lower bound: restrictions of the local automorphisms
    let lower_bound = distinct_restrictions(group, LEVEL);
    check(
        &mut checks,
        format!("C has {lower_bound} = 768 distinct restrictions to D3"),
        lower_bound == 768,
    );
    let all_on_d4 = group.par_iter().all(|m| verify_automorphism(m, store));
    check(
        &mut checks,
        "every element of C is an automorphism of D4".into(),
        all_on_d4,
    );
    let restrictions_d3 = group
        .par_iter()
        .all(|m| verify_automorphism(&m.restrict(LEVEL), store));
    check(
        &mut checks,
        "every restriction to D3 is an automorphism of D3".into(),
        restrictions_d3,
    );
    transcript.push(format!(
        "C restricts to {lower_bound} distinct automorphisms of D3, each the restriction of an automorphism of D4, so |Aut3 D4| >= {lower_bound}."
    ));

    // orbit part: Aut2 D3 and the 192-element subgroup without phi4, phi5
    let (candidates, passing) = extendible(store, 2)?;
    let aut2_d3 = passing.len();
    check(
        &mut checks,
        format!("|Aut D2| = {} = 1728", candidates.len()),
        candidates.len() == 1728,
    );
    check(
        &mut checks,
        format!("{aut2_d3} = 192 automorphisms of D2 extend to D3"),
        aut2_d3 == 192,
    );
    let mut small_gens: Vec<LevelMap> = [1, 2, 3].iter().map(|&i| gens.phi(i).clone()).collect();
    small_gens.extend(LetterPerm::all().iter().map(|pi| gens.letter(pi).clone()));
    let small = generate_group(&small_gens)?;
    let small_on_d2 = distinct_restrictions(&small, 2);
    check(
        &mut checks,
        format!(
            "<phi_i : i != 4, 5> has {} elements and {small_on_d2} distinct restrictions to D2",
            small.len()
        ),
        small.len() == 192 && small_on_d2 == 192,
    );
    let c_on_d2: HashSet<LevelMap> = group.iter().map(|m| m.restrict(2)).collect();
    let passing_set: HashSet<LevelMap> = passing.iter().cloned().collect();
    check(
        &mut checks,
        "restrictions of C to D2 are exactly the extendible automorphisms of D2".into(),
        c_on_d2 == passing_set,
    );
    transcript.push(format!(
        "Of the {} automorphisms of D2, {aut2_d3} satisfy the extension condition into level 3; C already realizes all of them.",
        candidates.len()
    ));

    // stabilizer of the first two levels
    let partition = alpha_beta_classes(store)?;
    let anchors = locate_anchors(&partition)?;
    check(
        &mut checks,
        format!(
            "alpha and beta meet in {} two-element classes",
            partition.pairs.len()
        ),
        partition.pairs.len() == 20,
    );
    transcript.push(format!(
        "On level 3, equal lower covers with equal upper-cover counts leave {} two-element classes and {} singletons.",
        partition.pairs.len(),
        partition.singletons.len()
    ));
    transcript.push(format!(
        "V = {} pairs with phi4(V) = {}; W = {} pairs with phi5(W) = {}.",
        anchors.v, anchors.v_partner, anchors.w, anchors.w_partner
    ));

    let report = eliminate(store, &partition, &anchors, FixedSetReading::SingletonsOnly)?;
    let loose = eliminate(
        store,
        &partition,
        &anchors,
        FixedSetReading::OutsideEliminablePairs,
    )?;
    let counts = report.counts();
    let expected: BTreeMap<String, usize> = [
        ("1A", 1),
        ("1B", 1),
        ("2A", 2),
        ("2B", 2),
        ("3A", 6),
        ("3B", 6),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    check(
        &mut checks,
        format!("elimination counts {counts:?}"),
        counts == expected,
    );
    let free = report.free();
    check(
        &mut checks,
        "only the V and W pairs survive the conditions".into(),
        free == {
            let mut f = vec![anchors.v_pair(), anchors.w_pair()];
            f.sort();
            f
        },
    );
    let witnesses_ok = report
        .outcomes
        .iter()
        .filter_map(|o| o.witness.as_ref())
        .map(|w| recheck_witness(store, w))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .all(|ok| ok);
    check(
        &mut checks,
        "every separator witness re-checks against the store".into(),
        witnesses_ok,
    );
    let readings_agree = loose
        .outcomes
        .iter()
        .zip(&report.outcomes)
        .all(|(a, b)| a.eliminated_by == b.eliminated_by);
    for o in &report.outcomes {
        match o.eliminated_by {
            Some(c) => transcript.push(format!("{} fails condition {c}", o.pair)),
            None => transcript.push(format!("{} is free", o.pair)),
        }
    }

    // every eliminated pair, swapped alone, must be blocked at level 4
    let eliminated: Vec<PairClass> = report
        .outcomes
        .iter()
        .filter(|o| o.eliminated_by.is_some())
        .map(|o| o.pair)
        .collect();
    let mut lone_swaps_blocked = true;
    for p in &eliminated {
        let sigma = swap_map(store, &[*p])?;
        lone_swaps_blocked &= verify_automorphism(&sigma, store) && !extends(&sigma, store)?;
    }
    check(
        &mut checks,
        "swapping any eliminated pair alone does not extend to D4".into(),
        lone_swaps_blocked,
    );

    // the four stabilizer elements
    let stabilizer: HashSet<LevelMap> = group
        .iter()
        .filter(|m| m.restrict(2).is_identity())
        .map(|m| m.restrict(LEVEL))
        .collect();
    let phi45 = compose_unchecked(gens.phi(4), gens.phi(5));
    let named_elements = [
        ("id", gens.identity()),
        ("phi4", gens.phi(4).clone()),
        ("phi5", gens.phi(5).clone()),
        ("phi4 phi5", phi45),
    ];
    let named_set: HashSet<LevelMap> = named_elements
        .iter()
        .map(|(_, m)| m.restrict(LEVEL))
        .collect();
    check(
        &mut checks,
        format!(
            "C has {} elements fixing D2, realized by id, phi4, phi5, phi4 phi5",
            stabilizer.len()
        ),
        stabilizer.len() == 4 && named_set == stabilizer,
    );
    let (v_pair, w_pair) = (anchors.v_pair(), anchors.w_pair());
    let mut family_ok = true;
    let mut actions = HashSet::new();
    for (swap_v, swap_w) in [(false, false), (true, false), (false, true), (true, true)] {
        let mut pairs = Vec::new();
        if swap_v {
            pairs.push(v_pair);
        }
        if swap_w {
            pairs.push(w_pair);
        }
        let sigma = swap_map(store, &pairs)?;
        family_ok &= extends(&sigma, store)? == stabilizer.contains(&sigma);
    }
    for (_, m) in &named_elements {
        let r = m.restrict(LEVEL);
        if !extends(&r, store)? {
            family_ok = false;
        }
        let moves = |c: &CanonicalCode| -> Result<bool> {
            let i = store.index_of(c)?;
            Ok(r.image(LEVEL, i) != i)
        };
        actions.insert((moves(&anchors.v)?, moves(&anchors.w)?));
    }
    check(
        &mut checks,
        "the four stabilizer elements extend and act independently on the V and W pairs".into(),
        family_ok && actions.len() == 4,
    );
    check(
        &mut checks,
        "a map fixing D2 and swapping only anchor pairs extends iff it lies in C".into(),
        family_ok,
    );
    let stabilizer_bound = 1usize << free.len();
    transcript.push(format!(
        "Fixing levels 1 and 2, only the two anchor classes may move, so at most {stabilizer_bound} elements of Aut3 D4 fix D2."
    ));

    let upper = aut2_d3 * stabilizer_bound;
    let valid = checks.iter().all(|c| c.holds) && upper == lower_bound;
    transcript.push(format!(
        "{lower_bound} <= |Aut3 D4| <= {aut2_d3} * {stabilizer_bound} = {upper}; the order is {}.",
        if upper == lower_bound {
            upper.to_string()
        } else {
            "undetermined".into()
        }
    ));
    Ok(Certificate {
        classes2: partition.pairs.len(),
        singletons: partition.singletons.len(),
        free,
        eliminated: counts,
        eliminated_outside_pairs_reading: loose.counts(),
        readings_agree,
        aut2_d3_order: aut2_d3,
        stabilizer_bound,
        lower_bound,
        aut3_d4_order: (upper == lower_bound).then_some(upper),
        stabilizer_realized_by: named_elements.iter().map(|(n, _)| n.to_string()).collect(),
        checks,
        condition_report: report,
        valid,
        transcript,
    })
}
