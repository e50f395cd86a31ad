use childcare_core::io::{builtin_text, BUILTIN_NAMES};
use childcare_core::{
    aspda, builtin_instance, derive_order, generate, parse_instance, parse_matching, serialize_instance,
    serialize_matching, GeneratorParams, IoError, ParseMode, Provenance,
};
use proptest::prelude::*;

proptest! {
    #[test]
    fn instance_documents_round_trip(
        seed in any::<u64>(),
        n_students in 1usize..=8,
        n_schools in 1usize..=4,
        wtr_fraction in 0.0f64..=1.0,
    ) {
        let inst = generate(&GeneratorParams {
            n_students,
            n_schools,
            wtr_fraction,
            max_list_length: n_schools,
            capacity_first: (0, 3),
            capacity_second: (0, 3),
            seed,
        })
        .unwrap();
        let text = serialize_instance(&inst);
        let back = parse_instance(&text, ParseMode::Strict).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(serialize_instance(&back), text);
    }

    #[test]
    fn matching_documents_round_trip(seed in any::<u64>(), rho_seed in any::<u64>()) {
        let inst = generate(&GeneratorParams {
            n_students: 6,
            n_schools: 3,
            wtr_fraction: 0.5,
            max_list_length: 3,
            capacity_first: (0, 2),
            capacity_second: (0, 2),
            seed,
        })
        .unwrap();
        let (m, _) = aspda(&inst, &derive_order(&inst, rho_seed)).unwrap();
        let prov = Provenance { mechanism: "aspda".into(), order: None, seed: Some(rho_seed) };
        let text = serialize_matching(&m, Some(&prov));
        let (back, back_prov) = parse_matching(&text).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(back_prov.as_ref(), Some(&prov));
        prop_assert_eq!(serialize_matching(&back, back_prov.as_ref()), text);
    }
}

#[test]
fn builtin_fixtures_are_canonical() {
    for name in BUILTIN_NAMES {
        let text = builtin_text(name).unwrap();
        if let Ok(inst) = parse_instance(text, ParseMode::Audit) {
            assert_eq!(serialize_instance(&inst), text, "{name}");
        } else {
            let (m, prov) = parse_matching(text).unwrap();
            assert_eq!(serialize_matching(&m, prov.as_ref()), text, "{name}");
        }
    }
}

#[test]
fn prop1_needs_audit_mode() {
    let text = builtin_text("prop1").unwrap();
    assert!(matches!(parse_instance(text, ParseMode::Strict), Err(IoError::Domain { .. })));
    assert_eq!(parse_instance(text, ParseMode::Audit).unwrap(), builtin_instance("prop1").unwrap());
}

#[test]
fn errors_carry_positions() {
    let dangling = r#"{"version":"1","students":[{"id":"a","kind":"priority_only","prefs":["x","y"]}],
        "schools":[{"id":"x","priority":["a"],"q1":1,"q2":1}]}"#;
    assert_eq!(
        parse_instance(dangling, ParseMode::Strict),
        Err(IoError::Reference { path: "students[0].prefs[1]".into(), id: "y".into() })
    );

    let broken = "{\n  \"version\": \"1\",\n  \"students\": [\n";
    assert!(matches!(parse_instance(broken, ParseMode::Strict), Err(IoError::Syntax { line: 4, .. })));

    let future = r#"{"version":"2","students":[],"schools":[]}"#;
    assert_eq!(parse_instance(future, ParseMode::Strict), Err(IoError::UnsupportedVersion("2".into())));
}
