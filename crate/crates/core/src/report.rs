//! Aggregates every numeric claim into one verdict list.

use std::collections::BTreeMap;

use itertools::Itertools;
use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

use crate::automorphism::{
    apply_rule, distinct_restrictions, generate_group, rule_to_levelmap, verify_automorphism,
    verify_structure, Generators, LevelMap, LocalRule, RelationCheck,
};
use crate::digraph::{canonical_form, induced_substructure, Digraph};
use crate::error::Result;
use crate::extension::{self, ExtensionSummary};
use crate::poset::{lower_cover_codes, lower_covers_by_corners, PosetStore};
use crate::theorem::{self, Certificate};

#[derive(Clone, Debug, Serialize)]
pub struct Claim {
    pub id: usize,
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GroupSummary {
    pub order: usize,
    pub restrictions: BTreeMap<String, usize>,
    pub relations: Vec<RelationCheck>,
    pub structure_holds: bool,
}

/// The generators, their closure, and the structure checks.
pub fn group_summary(store: &PosetStore) -> Result<(Generators, Vec<LevelMap>, GroupSummary)> {
    let gens = Generators::new(store)?;
    let group = generate_group(&gens.all())?;
    let structure = verify_structure(&gens, &group);
    let restrictions = (1..=store.max_level())
        .map(|n| (n.to_string(), distinct_restrictions(&group, n)))
        .collect();
    let summary = GroupSummary {
        order: group.len(),
        restrictions,
        structure_holds: structure.all_hold(),
        relations: structure.relations,
    };
    Ok((gens, group, summary))
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub claims: Vec<Claim>,
    pub all_pass: bool,
    pub group: GroupSummary,
    pub extension: ExtensionSummary,
    pub certificate: Certificate,
}

impl Report {
    pub fn failing(&self) -> Vec<&Claim> {
        self.claims.iter().filter(|c| !c.pass).collect()
    }

    /// Text rendering that carries the same verdicts as the JSON form.
    pub fn transcript(&self) -> String {
        let mut out = String::new();
        for c in &self.claims {
            out.push_str(&format!(
                "[{}] {:>2} {}: expected {}, observed {}\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.id,
                c.name,
                c.expected,
                c.observed
            ));
        }
        out.push_str("\nproof transcript:\n");
        for line in &self.certificate.transcript {
            out.push_str("  ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(&format!(
            "\n{} of {} claims pass\n",
            self.claims.iter().filter(|c| c.pass).count(),
            self.claims.len()
        ));
        out
    }
}

struct Claims(Vec<Claim>);

impl Claims {
    fn push(&mut self, name: &str, expected: impl ToString, observed: impl ToString, pass: bool) {
        let id = self.0.len() + 1;
        self.0.push(Claim {
            id,
            name: name.to_string(),
            expected: expected.to_string(),
            observed: observed.to_string(),
            pass,
        });
    }
}

/// Exhaustive rewrite/restrict commutation over every subset of every
/// stored representative. Returns the number of cases and failures.
pub fn locality_sweep(store: &PosetStore) -> (usize, usize) {
    let rules = LocalRule::all();
    let reps: Vec<Digraph> = (1..=store.max_level().min(4))
        .flat_map(|n| store.codes(n).iter().map(|c| c.digraph()))
        .collect();
    reps.par_iter()
        .map(|g| {
            let mut cases = 0;
            let mut failures = 0;
            for size in 1..=g.n() {
                for vs in (0..g.n()).combinations(size) {
                    let sub = induced_substructure(g, &vs).unwrap();
                    for rule in &rules {
                        cases += 1;
                        let a = canonical_form(&apply_rule(rule, &sub));
                        let b = canonical_form(
                            &induced_substructure(&apply_rule(rule, g), &vs).unwrap(),
                        );
                        failures += usize::from(a != b);
                    }
                }
            }
            (cases, failures)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
}

fn canonical_sweep(n: usize, step: usize) -> bool {
    let perms: Vec<Vec<usize>> = (0..n).permutations(n).collect();
    (0..1u32 << (n * n))
        .into_par_iter()
        .step_by(step)
        .all(|code| {
            let g = Digraph::new(n, code).unwrap();
            let c = canonical_form(&g);
            c.code() <= code
                && canonical_form(&c.digraph()) == c
                && perms.iter().all(|p| canonical_form(&g.relabel(p)) == c)
        })
}

/// Runs every check on a store holding at least levels one to four.
pub fn run_report(store: &PosetStore) -> Result<Report> {
    let mut claims = Claims(Vec::new());

    let counts = store.counts();
    claims.push(
        "level counts",
        "[2, 10, 104, 3044], total 3160",
        format!("{counts:?}, total {}", counts.iter().take(4).sum::<usize>()),
        counts.len() >= 4 && counts[..4] == [2, 10, 104, 3044],
    );

    let summary = extension::summarize(store, 2)?;
    claims.push(
        "|Aut D2| by backtracking",
        1728,
        summary.candidates,
        summary.candidates == 1728,
    );

    let formula = extension::factor_formula(store, 2)?;
    let h3 = store.signature_set(3)?.len();
    let expected_formula: BTreeMap<usize, usize> = [(1, 52), (2, 18), (4, 4)].into();
    claims.push(
        "|H3| and its k-multiset",
        "74, {1: 52, 2: 18, 4: 4}",
        format!("{h3}, {formula:?}"),
        h3 == 74 && formula == expected_formula,
    );

    claims.push(
        "automorphisms of D2 extending to D3",
        "192, forming a subgroup",
        format!(
            "{}, subgroup: {}",
            summary.extendible, summary.extendible_is_subgroup
        ),
        summary.extendible == 192 && summary.extendible_is_subgroup,
    );

    let exact = BigUint::from(192u32) * BigUint::from(2u32).pow(18) * BigUint::from(24u32).pow(4);
    let order: BigUint = summary.aut_upper_level_order.parse().unwrap_or_default();
    let magnitude: f64 = summary.aut_upper_level_order.parse().unwrap_or(0.0);
    claims.push(
        "|Aut D3|",
        format!("{exact} (~1.67e13 within 1%)"),
        format!("{order} ({})", summary.aut_upper_level_order_approx),
        order == exact && ((magnitude - 1.67e13) / 1.67e13).abs() < 0.01,
    );

    let (_, aut1_ext) = extension::extendible(store, 1)?;
    let aut2 = extension::enumerate_aut(store, 2)?;
    let predicted = extension::extension_count(store, 1)?;
    let per_base: Vec<usize> = aut1_ext
        .iter()
        .map(|phi| aut2.iter().filter(|m| m.restrict(1) == *phi).count())
        .collect();
    claims.push(
        "extension count from D1 to D2 matches brute force",
        format!("{predicted} per automorphism of D1"),
        format!("{per_base:?}"),
        aut1_ext.len() == 2 && per_base.iter().all(|&c| BigUint::from(c) == predicted),
    );

    let rule_results: Vec<(String, bool)> = LocalRule::all()
        .par_iter()
        .map(|r| {
            let ok = rule_to_levelmap(r, store)
                .is_ok_and(|m| verify_automorphism(&m.restrict(4), store));
            (r.to_string(), ok)
        })
        .collect();
    let bad: Vec<&String> = rule_results
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|(n, _)| n)
        .collect();
    claims.push(
        "every local rule is an automorphism of D4",
        format!("{} of {}", rule_results.len(), rule_results.len()),
        if bad.is_empty() {
            format!("{} of {}", rule_results.len(), rule_results.len())
        } else {
            format!("failing: {bad:?}")
        },
        bad.is_empty() && rule_results.len() == 29,
    );

    let (gens, group, group_info) = group_summary(store)?;
    claims.push(
        "order of C and its structure relations",
        "768, all relations hold",
        format!(
            "{}, all relations hold: {}",
            group_info.order, group_info.structure_holds
        ),
        group_info.order == 768 && group_info.structure_holds,
    );

    let r2 = group_info.restrictions.get("2").copied().unwrap_or(0);
    let r3 = group_info.restrictions.get("3").copied().unwrap_or(0);
    claims.push(
        "distinct restrictions of C to D2 and D3",
        "192, 768",
        format!("{r2}, {r3}"),
        r2 == 192 && r3 == 768,
    );

    let certificate = theorem::verify_theorem(store, &gens, &group)?;
    claims.push(
        "two-element classes of alpha and beta on level 3",
        "20, including the V and W pairs",
        format!(
            "{} ({} singletons)",
            certificate.classes2, certificate.singletons
        ),
        certificate.classes2 == 20 && certificate.singletons == 64 && certificate.free.len() == 2,
    );

    let expected_counts: BTreeMap<String, usize> = [
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
    claims.push(
        "sequential condition elimination",
        format!("{expected_counts:?}"),
        format!("{:?}", certificate.eliminated),
        certificate.eliminated == expected_counts,
    );

    claims.push(
        "order of Aut3 D4",
        768,
        certificate
            .aut3_d4_order
            .map_or_else(|| "undetermined".to_string(), |o| o.to_string()),
        certificate.valid && certificate.aut3_d4_order == Some(768),
    );

    let canon_ok = (1..=3).all(|n| canonical_sweep(n, 1)) && canonical_sweep(4, 7);
    let involutions_ok = (1..=5).all(|i| {
        let rule = LocalRule::phi(i).unwrap();
        (1..=store.max_level().min(4))
            .flat_map(|n| store.codes(n).iter())
            .all(|c| apply_rule(&rule, &apply_rule(&rule, &c.digraph())) == c.digraph())
    });
    let (cases, failures) = locality_sweep(store);
    let corners_ok = (0..512u32).into_par_iter().all(|code| {
        let g = Digraph::new(3, code).unwrap();
        lower_cover_codes(&g)
            .into_iter()
            .collect::<std::collections::BTreeSet<_>>()
            == lower_covers_by_corners(&g)
    });
    claims.push(
        "property sweeps",
        "canonical forms stable, rules involutive, rewriting commutes with restriction, corner method agrees",
        format!(
            "canonical: {canon_ok}, involutions: {involutions_ok}, locality: {failures} failures in {cases} cases, corners: {corners_ok}"
        ),
        canon_ok && involutions_ok && failures == 0 && cases >= 10_000 && corners_ok,
    );

    let phi45_trivial =
        gens.phi(4).restrict(2).is_identity() && gens.phi(5).restrict(2).is_identity();
    claims.push(
        "phi4 and phi5 act trivially on D2",
        true,
        phi45_trivial,
        phi45_trivial,
    );

    let all_pass = claims.0.iter().all(|c| c.pass);
    Ok(Report {
        claims: claims.0,
        all_pass,
        group: group_info,
        extension: summary,
        certificate,
    })
}
