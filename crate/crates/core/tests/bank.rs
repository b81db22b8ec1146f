mod common;

use std::path::Path;

use eipe_core::bank::{obfuscate_identifiers, parse_problem, serialize_problem, validate_problem, ValidationIssue};
use eipe_core::VerdictKind;

#[test]
fn ships_the_eight_lab_tasks() {
    let set = common::bank();
    assert_eq!(set.len(), 8);
    let groups = set.groups();
    let lab_a: Vec<_> = groups.iter().filter(|(_, g)| g.as_str() == "Lab A").collect();
    assert_eq!(lab_a.len(), 4);
    for p in set.iter() {
        assert_eq!(p.max_attempts, 20);
        assert_eq!(p.prompt_prefix, "Create a function foo that");
        let limited = p.group.as_deref() == Some("Lab B");
        assert_eq!(p.char_limit.is_some(), limited, "{}", p.id);
    }
    let total: f64 = set.iter().map(|p| p.weight).sum();
    assert!((total - 0.01).abs() < 1e-12);
}

#[test]
fn every_problem_validates() {
    let h = common::harness();
    for p in common::bank().iter() {
        let report = validate_problem(p, &h);
        assert!(report.ok(), "{report}");
    }
}

#[test]
fn bank_files_round_trip() {
    for p in common::bank().iter() {
        let again = parse_problem(&serialize_problem(p), Path::new(".")).unwrap();
        assert_eq!(**p, again);
    }
}

#[test]
fn obfuscation_is_idempotent_and_preserves_behaviour() {
    let h = common::harness();
    for p in common::bank().iter() {
        let once = obfuscate_identifiers(&p.reference_source, &p.signature).unwrap();
        let twice = obfuscate_identifiers(&once, &p.signature).unwrap();
        assert_eq!(once, twice, "{}", p.id);
        let v = h
            .judge_problem("c", &p.reference_source, &once, &p.signature, &p.test_suite)
            .unwrap();
        assert_eq!(v.kind, VerdictKind::Pass, "{}", p.id);
    }
}

#[test]
fn descriptive_names_obfuscate_to_an_equivalent_function() {
    let p = common::bank().get("index-last-zero").unwrap().clone();
    let named = "int lastZero(int vals[], int n) {\n    for (int i = n - 1; i >= 0; i--)\n        if (vals[i] == 0) return i;\n    return -1;\n}\n";
    let obf = obfuscate_identifiers(named, &p.signature).unwrap();
    assert!(obf.contains("int foo(int p0[], int p1)"));
    let h = common::harness();
    for src in [named.replace("lastZero", "foo"), obf] {
        let v = h.judge_problem("c", &p.reference_source, &src, &p.signature, &p.test_suite).unwrap();
        assert_eq!(v.kind, VerdictKind::Pass);
    }
}

#[test]
fn broken_reference_is_reported() {
    let mut p = (**common::bank().get("sum-between").unwrap()).clone();
    p.reference_source = "int foo(int p0, int p1) { return p0 + ; }".into();
    let report = validate_problem(&p, &common::harness());
    assert!(matches!(report.issues[..], [ValidationIssue::CompileFailure { .. }]), "{report}");
}

#[test]
fn string_for_integer_param_is_a_type_mismatch() {
    let mut p = (**common::bank().get("sum-between").unwrap()).clone();
    p.test_suite[2].args[1] = eipe_core::Value::Str("x".into());
    let report = validate_problem(&p, &common::harness());
    assert!(
        report
            .issues
            .iter()
            .any(|i| matches!(i, ValidationIssue::TypeMismatch { case_index: 2, .. })),
        "{report}"
    );
}
