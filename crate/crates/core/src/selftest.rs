//! Deterministic self-check battery pairing every closed-form computation
//! in the crate with an independent slow route.
//!
//! Each suite compares one fast path against one exhaustive path over a
//! corpus derived from a [`CorpusSpec`] and reports one ledger line per
//! comparison (or per small aggregate). `run_all` chains every suite in a
//! fixed order. The battery is fully deterministic for a fixed
//! [`CorpusSpec`] — all sampling flows from its seed — and an empty corpus
//! produces an empty ledger.

use std::collections::BTreeMap;

use rand::Rng;

use crate::corpus::{mutation_fixtures, scramble_structure, CorpusSpec};
use crate::error::Error;
use crate::ledger::LedgerLine;
use crate::logic::{eval_divisible_sentence, eval_phi_exact, eval_psi};
use crate::ordinal::{ExtendedCount, Ordinal};
use crate::pgroup::ExplicitPGroup;
use crate::reduction::{borel_forward, borel_reduce, verify_hred};
use crate::tp::{check_axioms, check_axioms_with_margin, decode, encode, structure_iso, LpStructure};
use crate::ulm::{
    brute_force_group_iso, iso_by_ulm, profile_of, shift_profile, table_profile, ulm_invariant,
    ulm_invariant_at, ulm_invariant_oracle, UlmProfile,
};

/// Group-order cap for suites that build and check whole structures.
const MODEL_SIZE_CAP: u64 = 36;
/// Group-order cap for the socle-counting invariant oracle.
const ORACLE_SIZE_CAP: u64 = 729;
/// Group-order cap for pairwise brute-force isomorphism searches and for
/// the extension's element-level checks.
const PAIRWISE_SIZE_CAP: u64 = 16;
/// Group-order cap for the reduction round trips.
const REDUCTION_SIZE_CAP: u64 = 8;

fn outcome(id: &str, subject: impl Into<String>, check: Result<bool, Error>) -> LedgerLine {
    match check {
        Ok(pass) => LedgerLine::new(pass, id, subject),
        Err(e) => {
            let mut s = subject.into();
            s.push_str(&format!(" (error: {e})"));
            LedgerLine::fail(id, s)
        }
    }
}

/// The full battery in a fixed order. With `inject_defects`, known-damaged
/// fixtures are appended as failing lines so that callers can confirm
/// failures reach the output and the exit code.
pub fn run_all(spec: &CorpusSpec, inject_defects: bool) -> Vec<LedgerLine> {
    if spec.is_empty() {
        return Vec::new();
    }
    let mut lines = Vec::new();
    lines.extend(model_suite(spec));
    lines.extend(round_trip_suite(spec));
    lines.extend(ulm_suite(spec));
    lines.extend(formula_suite(spec));
    lines.extend(extension_suite(spec));
    lines.extend(shift_suite(spec));
    lines.extend(reduction_suite(spec));
    lines.extend(mutation_suite(spec));
    lines.extend(margin_suite(spec));
    if inject_defects {
        lines.extend(injected_defect_lines());
    }
    lines
}

/// Every corpus group, encoded with several free-point counts, satisfies
/// all eight schemas.
pub fn model_suite(spec: &CorpusSpec) -> Vec<LedgerLine> {
    let mut lines = Vec::new();
    let mut frees: Vec<u64> = vec![0, 1, spec.max_free];
    frees.sort_unstable();
    frees.dedup();
    for g in spec.finite_groups(MODEL_SIZE_CAP) {
        for &m in &frees {
            let subject = format!("{g} m={m}");
            let check = encode(&g, m).map(|s| check_axioms(&s).passed());
            lines.push(outcome("model", subject, check));
        }
    }
    lines
}

/// Decoding an encoded group returns the group's own addition table and the
/// free-point count.
pub fn round_trip_suite(spec: &CorpusSpec) -> Vec<LedgerLine> {
    let mut lines = Vec::new();
    for g in spec.finite_groups(MODEL_SIZE_CAP) {
        for m in [0u64, 2] {
            let subject = format!("{g} m={m}");
            let check = (|| {
                let s = encode(&g, m)?;
                let (table, free) = decode(&s)?;
                Ok(table == g.to_element_table()? && free == m)
            })();
            lines.push(outcome("round-trip", subject, check));
        }
    }
    lines
}

/// Layer invariants three ways: closed form against the enumeration oracle,
/// table-route profiles against closed-form profiles, and profile equality
/// against brute-force isomorphism.
pub fn ulm_suite(spec: &CorpusSpec) -> Vec<LedgerLine> {
    let mut lines = Vec::new();
    for g in spec.groups() {
        if !g.size().as_finite().is_some_and(|s| s <= ORACLE_SIZE_CAP) {
            continue;
        }
        let subject = g.to_string();
        let check = (|| {
            for n in 0..=spec.max_exp as u64 {
                if ulm_invariant(&g, n) != ulm_invariant_oracle(&g, n)? {
                    return Ok(false);
                }
            }
            Ok(true)
        })();
        lines.push(outcome("ulm-oracle", subject, check));
    }
    for g in spec.finite_groups(64) {
        let subject = g.to_string();
        let check = (|| Ok(table_profile(&g.to_element_table()?, g.p())? == profile_of(&g)))();
        lines.push(outcome("ulm-table", subject, check));
    }
    for &p in &spec.primes {
        let members: Vec<ExplicitPGroup> =
            spec.finite_groups(PAIRWISE_SIZE_CAP).into_iter().filter(|g| g.p() == p).collect();
        let subject = format!("p={p}; {} groups pairwise", members.len());
        let check = (|| {
            for a in &members {
                for b in &members {
                    let brute =
                        brute_force_group_iso(&a.to_element_table()?, &b.to_element_table()?)
                            .is_some();
                    if iso_by_ulm(a, b)? != brute {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        })();
        lines.push(outcome("ulm-theorem", subject, check));
    }
    lines
}

/// Formula evaluators against their direct counterparts: height formulas
/// against filtration membership, layer formulas against closed-form
/// invariants, divisible-rank sentences against declared ranks.
pub fn formula_suite(spec: &CorpusSpec) -> Vec<LedgerLine> {
    let mut lines = Vec::new();
    let mut rng = spec.rng();
    let stages: Vec<Ordinal> = vec![
        Ordinal::zero(),
        Ordinal::from_nat(1),
        Ordinal::from_nat(2),
        "w".parse().expect("limit stage"),
    ];
    for g in spec.groups() {
        let weight: u64 =
            g.exps().iter().map(|&e| e as u64).sum::<u64>() + 2 * g.div_rank() as u64;
        if weight > 6 {
            continue;
        }
        let elems = g.enumerate(2);
        let take = spec.samples.min(32) as usize;
        let sample: Vec<_> = if elems.len() <= take {
            elems
        } else {
            (0..take).map(|_| elems[rng.gen_range(0..elems.len())].clone()).collect()
        };
        let subject = g.to_string();
        let check = (|| {
            for alpha in &stages {
                for x in &sample {
                    if eval_psi(&g, alpha, x)? != g.in_pn_subgroup(alpha, x)? {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        })();
        lines.push(outcome("psi-height", subject, check));
    }
    for g in spec.groups() {
        let total: u32 = g.exps().iter().sum();
        if total > 4 || g.div_rank() > 1 {
            continue;
        }
        let subject = g.to_string();
        let check = (|| {
            for k in 0..=spec.max_exp as u64 {
                let alpha = Ordinal::from_nat(k);
                let dim = ulm_invariant_at(&g, &alpha);
                for n in 0..=3u64 {
                    if eval_phi_exact(&g, &alpha, &ExtendedCount::Finite(n))? != (dim == n) {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        })();
        lines.push(outcome("phi-invariant", subject, check));
    }
    for g in spec.groups() {
        let total: u32 = g.exps().iter().sum();
        if total > 3 {
            continue;
        }
        let subject = g.to_string();
        let check = (|| {
            for claim in 0..=spec.max_div_rank as u64 + 1 {
                let report = eval_divisible_sentence(&g, &ExtendedCount::Finite(claim), 2)?;
                if report.verdict != (claim == g.div_rank() as u64) {
                    return Ok(false);
                }
            }
            Ok(true)
        })();
        lines.push(outcome("divrank", subject, check));
    }
    lines
}

/// Every promise of the p-th-root extension, at element level where sizes
/// allow; includes groups with a divisible part for the profile route.
pub fn extension_suite(spec: &CorpusSpec) -> Vec<LedgerLine> {
    let mut lines = Vec::new();
    let mut run = |g: &ExplicitPGroup, m: &ExtendedCount| match verify_hred(g, m) {
        Ok(ls) => lines.extend(ls),
        Err(e) => lines.push(LedgerLine::fail("extension", format!("{g} m={m} (error: {e})"))),
    };
    for g in spec.finite_groups(PAIRWISE_SIZE_CAP) {
        if g.size() <= ExtendedCount::Finite(4) {
            run(&g, &ExtendedCount::Finite(0));
        }
        run(&g, &ExtendedCount::Finite(2));
        run(&g, &ExtendedCount::Omega);
    }
    for g in spec.groups() {
        let total: u32 = g.exps().iter().sum();
        if g.div_rank() >= 1 && total <= 2 {
            run(&g, &ExtendedCount::Finite(1));
        }
    }
    lines
}

/// The profile shift: the new value lands at index 0, old values move up
/// one index, nothing else appears, and the divisible rank is untouched.
/// Checked over every corpus profile and over profiles with transfinite
/// support that no explicit group reaches.
pub fn shift_suite(spec: &CorpusSpec) -> Vec<LedgerLine> {
    let mut lines = Vec::new();
    let profiles: Vec<UlmProfile> = spec.groups().iter().map(profile_of).collect();
    for m in [ExtendedCount::Finite(0), ExtendedCount::Finite(3), ExtendedCount::Omega] {
        let subject = format!("{} corpus profiles, m={m}", profiles.len());
        let pass = profiles.iter().all(|u| shift_is_correct(u, &m));
        lines.push(LedgerLine::new(pass, "shift", subject));
    }
    for u in transfinite_profiles() {
        for m in [ExtendedCount::Finite(1), ExtendedCount::Omega] {
            let subject = format!("{u} m={m}");
            lines.push(LedgerLine::new(shift_is_correct(&u, &m), "shift-transfinite", subject));
        }
    }
    lines
}

fn shift_is_correct(u: &UlmProfile, m: &ExtendedCount) -> bool {
    let s = shift_profile(u, m);
    if s.invariant_at(&Ordinal::zero()) != *m {
        return false;
    }
    let one = Ordinal::from_nat(1);
    for (alpha, v) in u.support() {
        if s.invariant_at(&one.add(alpha)) != *v {
            return false;
        }
    }
    let expected = u.support().count() + usize::from(!m.is_zero());
    s.support().count() == expected && s.div_rank() == u.div_rank()
}

fn transfinite_profiles() -> Vec<UlmProfile> {
    let w: Ordinal = "w".parse().expect("limit ordinal");
    let w1: Ordinal = "w+1".parse().expect("successor of a limit");
    let first = UlmProfile::new(
        2,
        BTreeMap::from([
            (Ordinal::zero(), ExtendedCount::Omega),
            (w, ExtendedCount::Finite(1)),
        ]),
        ExtendedCount::Finite(0),
        w1.clone(),
    )
    .expect("well-formed profile");
    let second = UlmProfile::new(
        3,
        BTreeMap::from([
            (Ordinal::from_nat(2), ExtendedCount::Finite(2)),
            (w1, ExtendedCount::Omega),
        ]),
        ExtendedCount::Omega,
        "w*2".parse().expect("limit ordinal"),
    )
    .expect("well-formed profile");
    vec![first, second]
}

/// The structure-to-group reduction: scrambled copies map to the same
/// canonical group, non-isomorphic structures map to different ones, and
/// the group-to-structure direction produces a genuine model that decodes
/// back.
pub fn reduction_suite(spec: &CorpusSpec) -> Vec<LedgerLine> {
    let mut lines = Vec::new();
    let mut rng = spec.rng();
    let members = spec.finite_groups(REDUCTION_SIZE_CAP);
    for g in &members {
        let subject = g.to_string();
        let check = (|| {
            let m = encode(g, 1)?;
            let scrambled = scramble_structure(&m, &mut rng);
            Ok(structure_iso(&m, &scrambled).is_some()
                && borel_reduce(&m)? == borel_reduce(&scrambled)?)
        })();
        lines.push(outcome("borel-iso", subject, check));
    }
    for &p in &spec.primes {
        let same_p: Vec<&ExplicitPGroup> = members.iter().filter(|g| g.p() == p).collect();
        let subject = format!("p={p}; {} groups pairwise", same_p.len());
        let check = (|| {
            for a in &same_p {
                for b in &same_p {
                    let ma = encode(a, 1)?;
                    let mb = encode(b, 1)?;
                    let iso = structure_iso(&ma, &mb).is_some();
                    if iso != (a == b) {
                        return Ok(false);
                    }
                    if iso != (borel_reduce(&ma)? == borel_reduce(&mb)?) {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        })();
        lines.push(outcome("borel-separates", subject, check));
    }
    for g in &members {
        let subject = g.to_string();
        let check = (|| {
            let m = borel_forward(g)?;
            let (table, free) = decode(&m)?;
            Ok(free == 0 && table == g.to_element_table()?)
        })();
        lines.push(outcome("borel-forward", subject, check));
    }
    lines
}

/// Damaged structures are caught with exactly the expected schema failures
/// and concrete witnesses, and scrambling does not change the verdicts.
pub fn mutation_suite(spec: &CorpusSpec) -> Vec<LedgerLine> {
    let mut lines = Vec::new();
    let mut rng = spec.rng();
    for fx in mutation_fixtures() {
        let report = check_axioms(&fx.structure);
        let exact = report.failing_set() == fx.expected_failures;
        let witnessed =
            fx.expected_failures.iter().all(|&a| !report.result(a).failures.is_empty());
        lines.push(LedgerLine::new(exact && witnessed, "mutation", fx.name));
        let scrambled = scramble_structure(&fx.structure, &mut rng);
        let same = check_axioms(&scrambled).failing_set() == fx.expected_failures;
        lines.push(LedgerLine::new(same, "mutation-scrambled", fx.name));
    }
    lines
}

/// Verdicts are invariant under enlarging the instance bound: schema
/// instances above every used index are vacuous.
pub fn margin_suite(spec: &CorpusSpec) -> Vec<LedgerLine> {
    let mut subjects: Vec<(String, LpStructure)> = Vec::new();
    for g in spec.finite_groups(REDUCTION_SIZE_CAP).into_iter().take(3) {
        if let Ok(m) = encode(&g, 1) {
            subjects.push((format!("{g} m=1"), m));
        }
    }
    for fx in mutation_fixtures() {
        subjects.push((fx.name.to_string(), fx.structure));
    }
    subjects
        .into_iter()
        .map(|(subject, m)| {
            let pass =
                check_axioms_with_margin(&m, 3).failing_set() == check_axioms(&m).failing_set();
            LedgerLine::new(pass, "margin", subject)
        })
        .collect()
}

/// Deliberately damaged inputs pushed through the checker as if they were
/// honest, one failing line per failing schema.
pub fn injected_defect_lines() -> Vec<LedgerLine> {
    let mut lines = Vec::new();
    for fx in mutation_fixtures() {
        for a in check_axioms(&fx.structure).failing_set() {
            lines.push(LedgerLine::fail("injected", format!("{} {a}", fx.name)));
        }
    }
    lines
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> CorpusSpec {
        CorpusSpec {
            primes: vec![2],
            max_summands: 2,
            max_exp: 2,
            max_div_rank: 1,
            max_free: 1,
            seed: 7,
            samples: 8,
        }
    }

    #[test]
    fn full_battery_passes_on_the_default_corpus() {
        let lines = run_all(&CorpusSpec::default(), false);
        assert!(lines.len() > 100, "battery too small: {}", lines.len());
        let failures: Vec<String> =
            lines.iter().filter(|l| !l.pass).map(|l| l.to_string()).collect();
        assert!(failures.is_empty(), "unexpected failures:\n{}", failures.join("\n"));
    }

    #[test]
    fn empty_spec_yields_an_empty_ledger() {
        let spec = CorpusSpec { primes: vec![], ..CorpusSpec::default() };
        assert!(run_all(&spec, false).is_empty());
        assert!(run_all(&spec, true).is_empty());
    }

    #[test]
    fn battery_is_deterministic() {
        let render = |lines: Vec<LedgerLine>| {
            lines.iter().map(|l| l.to_string()).collect::<Vec<_>>().join("\n")
        };
        let spec = small_spec();
        assert_eq!(render(run_all(&spec, false)), render(run_all(&spec, false)));
    }

    #[test]
    fn injected_defects_surface_as_failures() {
        let spec = small_spec();
        let clean = run_all(&spec, false);
        assert!(clean.iter().all(|l| l.id != "injected"));
        let injected = run_all(&spec, true);
        let failing: Vec<&LedgerLine> =
            injected.iter().filter(|l| l.id == "injected").collect();
        assert!(!failing.is_empty());
        assert!(failing.iter().all(|l| !l.pass));
        // One line per expected schema failure across the eight fixtures.
        let expected: usize = mutation_fixtures().iter().map(|f| f.expected_failures.len()).sum();
        assert_eq!(failing.len(), expected);
    }

    #[test]
    fn suites_report_stable_identifiers() {
        let spec = small_spec();
        let ids: std::collections::BTreeSet<String> =
            run_all(&spec, false).into_iter().map(|l| l.id).collect();
        for required in [
            "model",
            "round-trip",
            "ulm-oracle",
            "ulm-table",
            "ulm-theorem",
            "psi-height",
            "phi-invariant",
            "divrank",
            "profile-shift",
            "shift",
            "shift-transfinite",
            "borel-iso",
            "borel-separates",
            "borel-forward",
            "mutation",
            "mutation-scrambled",
            "margin",
        ] {
            assert!(ids.contains(required), "missing suite id {required}: {ids:?}");
        }
    }
}
