use std::collections::BTreeSet;

use childcare_core::{
    aspda, assignment_rank, builtin_instance, builtin_matching, choice, compare_mechanisms, derive_order,
    enumerate_blocking_coalitions, enumerate_ir_matchings, generate, ir_certificates, is_individually_rational,
    is_stable, misreport_universe, stable_set, strategyproofness_audit, Assignment, AuditError, EntryOrder,
    ExtendedPreference, GeneratorParams, Instance, Matching, Period, StudentId, DEFAULT_ENUMERATION_BOUND,
};
use proptest::prelude::*;

fn m(entries: &[(&str, Option<&str>, Option<&str>)]) -> Matching {
    entries
        .iter()
        .map(|&(i, a, b)| (StudentId::from(i), Assignment::new(a.map(Into::into), b.map(Into::into))))
        .collect()
}

fn pair(a: Option<&str>, b: Option<&str>) -> Assignment {
    Assignment::new(a.map(Into::into), b.map(Into::into))
}

fn has_block(inst: &Instance, mu: &Matching, student: &str, target: Assignment) -> bool {
    enumerate_blocking_coalitions(inst, mu).unwrap().iter().any(|c| c.student.as_str() == student && c.target == target)
}

/// The six individually rational matchings named in the counterexample,
/// each with a coalition that must block it.
fn prop1_witnesses() -> Vec<(Matching, &'static str, Assignment)> {
    let s1 = Some("s1");
    let s2 = Some("s2");
    vec![
        (m(&[("i1", s1, s2), ("i2", s2, s2)]), "i3", pair(s2, s2)),
        (m(&[("i1", s1, s2), ("i3", s2, s2)]), "i2", pair(s2, s2)),
        (m(&[("i1", s2, s2), ("i2", s1, s1)]), "i3", pair(s2, s2)),
        (m(&[("i1", s2, s2), ("i2", s1, s1), ("i3", s2, s2)]), "i1", pair(s1, s2)),
        (m(&[("i1", s2, s2), ("i2", s2, s2)]), "i3", pair(s2, s2)),
        (m(&[("i2", s2, s2), ("i3", s2, s2)]), "i2", pair(s1, s1)),
    ]
}

#[test]
fn prop1_witness_matchings_are_blocked_as_claimed() {
    let inst = builtin_instance("prop1").unwrap();
    for (mu, student, target) in prop1_witnesses() {
        let mu = fill(&inst, mu);
        assert!(is_individually_rational(&inst, &mu).unwrap(), "{mu:?} not IR");
        assert!(has_block(&inst, &mu, student, target.clone()), "{student} {target} missing for {mu:?}");
    }
}

#[test]
fn prop1_has_no_stable_matching() {
    let inst = builtin_instance("prop1").unwrap();
    assert!(stable_set(&inst, DEFAULT_ENUMERATION_BOUND).unwrap().is_empty());
    let certs = ir_certificates(&inst, DEFAULT_ENUMERATION_BOUND).unwrap();
    assert!(certs.iter().all(|(_, blocks)| !blocks.is_empty()));
    // Every witness from the counterexample appears among the certificates.
    for (mu, _, _) in prop1_witnesses() {
        let mu = fill(&inst, mu);
        assert!(certs.iter().any(|(c, _)| *c == mu));
    }
}

#[test]
fn prop1_ir_space_counts() {
    let inst = builtin_instance("prop1").unwrap();
    // 3 * 3 * 2 combinations; two overfill s1 in period 1 and two overfill s2
    // in period 2.
    let ir = enumerate_ir_matchings(&inst, DEFAULT_ENUMERATION_BOUND).unwrap().count();
    assert_eq!(ir, 14);
    assert!(matches!(
        enumerate_ir_matchings(&inst, 17).err(),
        Some(AuditError::TooLarge { combinations: 18, bound: 17 })
    ));
}

#[test]
fn example1_stable_set_contains_aspda_output() {
    let inst = builtin_instance("example1").unwrap();
    let order: EntryOrder = ["i1", "i4", "i3", "i2"].into_iter().map(StudentId::from).collect();
    let (mu, _) = aspda(&inst, &order).unwrap();
    let set = stable_set(&inst, DEFAULT_ENUMERATION_BOUND).unwrap();
    assert!(set.contains(&mu));
}

#[test]
fn naive_candidate_is_blocked_by_i4() {
    let inst = builtin_instance("example1").unwrap();
    let candidate = builtin_matching("naive_candidate_example1").unwrap();
    let report = is_stable(&inst, &candidate).unwrap();
    assert!(!report.stable);
    assert!(has_block(&inst, &candidate, "i4", Assignment::both("s1")));
}

#[test]
fn audit_is_idempotent() {
    let inst = builtin_instance("example1").unwrap();
    let candidate = builtin_matching("naive_candidate_example1").unwrap();
    let a = is_stable(&inst, &candidate).unwrap();
    let b = is_stable(&inst, &candidate).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_string(), b.to_string());
}

#[test]
fn compare_on_example1() {
    let inst = builtin_instance("example1").unwrap();
    let order: EntryOrder = ["i1", "i4", "i3", "i2"].into_iter().map(StudentId::from).collect();
    let c = compare_mechanisms(&inst, &order).unwrap();
    assert!(c.aspda_audit.stable);
    assert!(!c.naive_audit.stable);
    assert_ne!(c.aspda, c.naive);
}

#[test]
fn misreport_universe_sizes() {
    for (n_schools, expected) in [(1, 3), (2, 9), (3, 31)] {
        let inst = generate(&GeneratorParams {
            n_students: 1,
            n_schools,
            wtr_fraction: 0.0,
            max_list_length: n_schools,
            capacity_first: (1, 1),
            capacity_second: (1, 1),
            seed: 1,
        })
        .unwrap();
        assert_eq!(misreport_universe(&inst, &"i1".into()).unwrap().len(), expected);
    }
}

#[test]
fn example1_has_no_profitable_misreport() {
    let inst = builtin_instance("example1").unwrap();
    for seed in 0..5 {
        assert!(strategyproofness_audit(&inst, seed).unwrap().is_empty());
    }
}

#[test]
fn modified_prop1_has_no_profitable_misreport() {
    let inst = builtin_instance("prop1")
        .unwrap()
        .with_preference(&"i1".into(), ExtendedPreference::WillingnessToRemain(vec!["s2".into()]))
        .unwrap();
    for seed in 0..5 {
        assert!(strategyproofness_audit(&inst, seed).unwrap().is_empty());
    }
}

/// Adds unmatched entries for students the literal leaves out.
fn fill(inst: &Instance, mu: Matching) -> Matching {
    let mut full = Matching::empty_for(inst);
    for (id, a) in mu.iter() {
        full.insert(id.clone(), a.clone());
    }
    full
}

/// Blocking coalitions straight from the definition, using only the public
/// choice and ranking functions.
fn definitional_blocks(inst: &Instance, mu: &Matching) -> BTreeSet<(StudentId, Assignment)> {
    let slots: Vec<Option<_>> =
        std::iter::once(None).chain(inst.schools().iter().map(|s| Some(s.id.clone()))).collect();
    let mut out = BTreeSet::new();
    for st in inst.students() {
        let current = mu.get(&st.id).cloned().unwrap_or_else(Assignment::unmatched);
        let now = assignment_rank(inst, &st.id, &current).unwrap();
        for a in &slots {
            for b in &slots {
                let target = Assignment::new(a.clone(), b.clone());
                if assignment_rank(inst, &st.id, &target).unwrap() >= now {
                    continue;
                }
                let admitted = Period::BOTH.into_iter().all(|t| match target.get(t) {
                    Some(s) if current.get(t) != Some(s) => {
                        let mut applicants = mu.roster(s, t);
                        applicants.insert(st.id.clone());
                        choice(inst, s, t, &applicants).unwrap().contains(&st.id)
                    }
                    _ => true,
                });
                if admitted {
                    out.insert((st.id.clone(), target));
                }
            }
        }
    }
    out
}

fn small_instance() -> impl Strategy<Value = Instance> {
    (any::<u64>(), 1usize..=4, 1usize..=3, 0.0f64..=1.0).prop_map(|(seed, n_students, n_schools, wtr_fraction)| {
        generate(&GeneratorParams {
            n_students,
            n_schools,
            wtr_fraction,
            max_list_length: n_schools,
            capacity_first: (0, 2),
            capacity_second: (0, 2),
            seed,
        })
        .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sweep_matches_definition_on_every_ir_matching(inst in small_instance()) {
        let set = stable_set(&inst, DEFAULT_ENUMERATION_BOUND).unwrap();
        for mu in enumerate_ir_matchings(&inst, DEFAULT_ENUMERATION_BOUND).unwrap() {
            let got: BTreeSet<_> = enumerate_blocking_coalitions(&inst, &mu)
                .unwrap()
                .into_iter()
                .map(|c| (c.student, c.target))
                .collect();
            let expected = definitional_blocks(&inst, &mu);
            prop_assert_eq!(&got, &expected);
            prop_assert_eq!(got.is_empty(), set.contains(&mu));
        }
    }

    #[test]
    fn aspda_output_is_in_stable_set(inst in small_instance(), seed in any::<u64>()) {
        let (mu, _) = aspda(&inst, &derive_order(&inst, seed)).unwrap();
        let set = stable_set(&inst, DEFAULT_ENUMERATION_BOUND).unwrap();
        prop_assert!(set.contains(&mu));
    }
}
