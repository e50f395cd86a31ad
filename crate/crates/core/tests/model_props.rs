use std::collections::BTreeSet;

use childcare_core::{
    assignment_rank, choice, generate, is_individually_rational, validate_instance, Assignment, ExtendedPreference,
    GeneratorParams, Instance, Matching, Period, Rank, SchoolId, StudentId,
};
use proptest::prelude::*;

fn instance_strategy() -> impl Strategy<Value = Instance> {
    (any::<u64>(), 1usize..=6, 1usize..=3, 0.0f64..=1.0, 0u32..=2, 0u32..=3).prop_map(
        |(seed, n_students, n_schools, wtr_fraction, q1, q2)| {
            generate(&GeneratorParams {
                n_students,
                n_schools,
                wtr_fraction,
                max_list_length: n_schools,
                capacity_first: (0, q1),
                capacity_second: (0, q2),
                seed,
            })
            .unwrap()
        },
    )
}

fn all_pairs(inst: &Instance) -> Vec<Assignment> {
    let slots: Vec<Option<SchoolId>> =
        std::iter::once(None).chain(inst.schools().iter().map(|s| Some(s.id.clone()))).collect();
    let mut out = Vec::new();
    for a in &slots {
        for b in &slots {
            out.push(Assignment::new(a.clone(), b.clone()));
        }
    }
    out
}

fn subsets(items: &[StudentId]) -> Vec<BTreeSet<StudentId>> {
    (0u32..(1 << items.len()))
        .map(|mask| items.iter().enumerate().filter(|(k, _)| mask & (1 << k) != 0).map(|(_, s)| s.clone()).collect())
        .collect()
}

proptest! {
    #[test]
    fn acceptable_ranks_are_distinct(inst in instance_strategy()) {
        for st in inst.students() {
            let mut seen = BTreeSet::new();
            for a in all_pairs(&inst) {
                if let Rank::Acceptable(r) = assignment_rank(&inst, &st.id, &a).unwrap() {
                    prop_assert!(seen.insert(r), "rank {} shared by two pairs", r);
                }
            }
            // Every listed school plus the empty pair is acceptable.
            let listed = st.preference.acceptable_pairs().len();
            prop_assert_eq!(seen.len(), listed + 1);
        }
    }

    #[test]
    fn shape_rules_force_unacceptable(inst in instance_strategy()) {
        for st in inst.students() {
            for a in all_pairs(&inst) {
                let rank = assignment_rank(&inst, &st.id, &a).unwrap();
                match &st.preference {
                    ExtendedPreference::WillingnessToRemain(_) if a.first != a.second => {
                        prop_assert_eq!(rank, Rank::Unacceptable)
                    }
                    ExtendedPreference::PriorityOnly(_) if a.first.is_some() => {
                        prop_assert_eq!(rank, Rank::Unacceptable)
                    }
                    _ => {}
                }
            }
        }
    }

    #[test]
    fn choice_is_bounded_and_substitutable(inst in instance_strategy()) {
        let students: Vec<StudentId> = inst.students().iter().map(|s| s.id.clone()).collect();
        let all = subsets(&students);
        for sc in inst.schools() {
            for period in Period::BOTH {
                for a in &all {
                    let chosen = choice(&inst, &sc.id, period, a).unwrap();
                    prop_assert!(chosen.is_subset(a));
                    prop_assert!(chosen.len() as u32 <= sc.capacity.get(period));
                    for b in all.iter().filter(|b| b.is_subset(a)) {
                        let from_b = choice(&inst, &sc.id, period, b).unwrap();
                        for i in chosen.intersection(b) {
                            prop_assert!(from_b.contains(i), "substitutability fails for {}", i);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn valid_instances_make_operations_total(inst in instance_strategy()) {
        prop_assume!(validate_instance(&inst).is_valid());
        let everyone: BTreeSet<StudentId> = inst.students().iter().map(|s| s.id.clone()).collect();
        for sc in inst.schools() {
            for period in Period::BOTH {
                prop_assert!(choice(&inst, &sc.id, period, &everyone).is_ok());
            }
        }
        for st in inst.students() {
            for a in all_pairs(&inst) {
                prop_assert!(assignment_rank(&inst, &st.id, &a).is_ok());
            }
        }
        prop_assert!(is_individually_rational(&inst, &Matching::empty_for(&inst)).unwrap());
    }
}
