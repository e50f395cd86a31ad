//! Instance and matching documents, built-in fixtures and the seeded
//! random-instance generator.
//!
//! Documents are JSON with a mandatory `version` field. Serialization is
//! canonical: fixed key order, instance list order, two-space indentation
//! and a trailing newline, so `serialize(parse(text)) == text` for any text
//! this module produced.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    validate_instance, Assignment, Capacity, ExtendedPreference, Instance, Matching, School, SchoolId, Student,
    StudentId, Violation,
};

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IoError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unsupported format version `{0}`")]
    UnsupportedVersion(String),
    #[error("{path}: unknown id `{id}`")]
    Reference { path: String, id: String },
    #[error("{path}: {message}")]
    Domain { path: String, message: String },
    #[error("unknown builtin `{0}`")]
    UnknownBuiltin(String),
    #[error("builtin `{0}` is a {1}, not a {2}")]
    WrongFixtureKind(String, &'static str, &'static str),
}

/// Whether out-of-domain `raw_pairs` reports are accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseMode {
    Strict,
    Audit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum KindTag {
    PriorityOnly,
    WillingnessToRemain,
    RawPairs,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StudentEntry {
    id: String,
    kind: KindTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prefs: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pairs: Option<Vec<[Option<String>; 2]>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchoolEntry {
    id: String,
    priority: Vec<String>,
    q1: u32,
    q2: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDocument {
    version: String,
    students: Vec<StudentEntry>,
    schools: Vec<SchoolEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatchingEntry {
    id: String,
    p1: Option<String>,
    p2: Option<String>,
}

/// Where a matching came from; optional in matching documents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub mechanism: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatchingDocument {
    version: String,
    matching: Vec<MatchingEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
}

fn syntax(e: serde_json::Error) -> IoError {
    IoError::Syntax { line: e.line(), column: e.column(), message: e.to_string() }
}

fn check_version(v: &str) -> Result<(), IoError> {
    if v == FORMAT_VERSION {
        Ok(())
    } else {
        Err(IoError::UnsupportedVersion(v.to_owned()))
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("documents always serialize");
    text.push('\n');
    text
}

fn violation_error(v: &Violation, doc: &InstanceDocument) -> IoError {
    let student = |k: usize| -> &StudentEntry { &doc.students[k] };
    let list_key = |k: usize| if student(k).kind == KindTag::RawPairs { "pairs" } else { "prefs" };
    match v {
        Violation::EmptyStudentId { student } => {
            IoError::Domain { path: format!("students[{student}].id"), message: "empty id".into() }
        }
        Violation::EmptySchoolId { school } => {
            IoError::Domain { path: format!("schools[{school}].id"), message: "empty id".into() }
        }
        Violation::DuplicateStudent { student, id } => {
            IoError::Domain { path: format!("students[{student}].id"), message: format!("duplicate student id `{id}`") }
        }
        Violation::DuplicateSchool { school, id } => {
            IoError::Domain { path: format!("schools[{school}].id"), message: format!("duplicate school id `{id}`") }
        }
        Violation::UnknownSchool { student, entry, id } => IoError::Reference {
            path: format!("students[{student}].{}[{entry}]", list_key(*student)),
            id: id.to_string(),
        },
        Violation::UnknownStudent { school, entry, id } => {
            IoError::Reference { path: format!("schools[{school}].priority[{entry}]"), id: id.to_string() }
        }
        Violation::DuplicatePreference { student, entry } => IoError::Domain {
            path: format!("students[{student}].{}[{entry}]", list_key(*student)),
            message: "duplicate entry".into(),
        },
        Violation::DuplicatePriority { school, entry, id } => IoError::Domain {
            path: format!("schools[{school}].priority[{entry}]"),
            message: format!("student `{id}` listed twice"),
        },
        Violation::EmptyPairListed { student, entry } => IoError::Domain {
            path: format!("students[{student}].pairs[{entry}]"),
            message: "the empty pair cannot be listed".into(),
        },
        Violation::OutOfDomain { student, id } => IoError::Domain {
            path: format!("students[{student}]"),
            message: format!("report of `{id}` is outside the reasonably extended domain"),
        },
    }
}

fn entry_preference(k: usize, entry: &StudentEntry, mode: ParseMode) -> Result<ExtendedPreference, IoError> {
    let path = format!("students[{k}]");
    let shape_error = |message: &str| IoError::Domain { path: path.clone(), message: message.to_owned() };
    let schools = |list: &Vec<String>| list.iter().map(|s| SchoolId::new(s.as_str())).collect();
    match (entry.kind, &entry.prefs, &entry.pairs) {
        (KindTag::PriorityOnly, Some(list), None) => Ok(ExtendedPreference::PriorityOnly(schools(list))),
        (KindTag::WillingnessToRemain, Some(list), None) => Ok(ExtendedPreference::WillingnessToRemain(schools(list))),
        (KindTag::RawPairs, None, Some(pairs)) => {
            if mode == ParseMode::Strict {
                return Err(shape_error("raw_pairs reports are only accepted in audit mode"));
            }
            Ok(ExtendedPreference::RawPairs(
                pairs
                    .iter()
                    .map(|[a, b]| Assignment::new(a.as_deref().map(SchoolId::from), b.as_deref().map(SchoolId::from)))
                    .collect(),
            ))
        }
        (KindTag::RawPairs, _, _) => Err(shape_error("raw_pairs reports carry `pairs` and no `prefs`")),
        _ => Err(shape_error("list reports carry `prefs` and no `pairs`")),
    }
}

/// Parses an instance document. Structural violations are reported with
/// their document path; in audit mode only out-of-domain reports are
/// tolerated.
pub fn parse_instance(text: &str, mode: ParseMode) -> Result<Instance, IoError> {
    let doc: InstanceDocument = serde_json::from_str(text).map_err(syntax)?;
    check_version(&doc.version)?;
    let students = doc
        .students
        .iter()
        .enumerate()
        .map(|(k, e)| Ok(Student::new(e.id.as_str(), entry_preference(k, e, mode)?)))
        .collect::<Result<Vec<_>, IoError>>()?;
    let schools = doc
        .schools
        .iter()
        .map(|e| {
            School::new(
                e.id.as_str(),
                e.priority.iter().map(|s| StudentId::new(s.as_str())).collect(),
                Capacity::new(e.q1, e.q2),
            )
        })
        .collect();
    let inst = Instance::new(students, schools);
    let report = validate_instance(&inst);
    let offending = report.violations.iter().find(|v| match mode {
        ParseMode::Strict => true,
        ParseMode::Audit => !v.is_domain(),
    });
    match offending {
        Some(v) => Err(violation_error(v, &doc)),
        None => Ok(inst),
    }
}

pub fn serialize_instance(inst: &Instance) -> String {
    let name = |s: &Option<SchoolId>| s.as_ref().map(|s| s.to_string());
    let doc = InstanceDocument {
        version: FORMAT_VERSION.to_owned(),
        students: inst
            .students()
            .iter()
            .map(|st| {
                let list = |l: &Vec<SchoolId>| Some(l.iter().map(|s| s.to_string()).collect());
                let (kind, prefs, pairs) = match &st.preference {
                    ExtendedPreference::PriorityOnly(l) => (KindTag::PriorityOnly, list(l), None),
                    ExtendedPreference::WillingnessToRemain(l) => (KindTag::WillingnessToRemain, list(l), None),
                    ExtendedPreference::RawPairs(p) => {
                        (KindTag::RawPairs, None, Some(p.iter().map(|a| [name(&a.first), name(&a.second)]).collect()))
                    }
                };
                StudentEntry { id: st.id.to_string(), kind, prefs, pairs }
            })
            .collect(),
        schools: inst
            .schools()
            .iter()
            .map(|sc| SchoolEntry {
                id: sc.id.to_string(),
                priority: sc.priority.iter().map(|s| s.to_string()).collect(),
                q1: sc.capacity.first,
                q2: sc.capacity.second,
            })
            .collect(),
    };
    pretty(&doc)
}

pub fn parse_matching(text: &str) -> Result<(Matching, Option<Provenance>), IoError> {
    let doc: MatchingDocument = serde_json::from_str(text).map_err(syntax)?;
    check_version(&doc.version)?;
    let mut seen = BTreeSet::new();
    let mut m = Matching::new();
    for (k, e) in doc.matching.iter().enumerate() {
        if !seen.insert(e.id.as_str()) {
            return Err(IoError::Domain {
                path: format!("matching[{k}].id"),
                message: format!("duplicate student id `{}`", e.id),
            });
        }
        m.insert(
            e.id.as_str(),
            Assignment::new(e.p1.as_deref().map(SchoolId::from), e.p2.as_deref().map(SchoolId::from)),
        );
    }
    Ok((m, doc.provenance))
}

/// Students appear in id order.
pub fn serialize_matching(m: &Matching, provenance: Option<&Provenance>) -> String {
    let doc = MatchingDocument {
        version: FORMAT_VERSION.to_owned(),
        matching: m
            .iter()
            .map(|(id, a)| MatchingEntry {
                id: id.to_string(),
                p1: a.first.as_ref().map(|s| s.to_string()),
                p2: a.second.as_ref().map(|s| s.to_string()),
            })
            .collect(),
        provenance: provenance.cloned(),
    };
    pretty(&doc)
}

pub const BUILTIN_NAMES: [&str; 3] = ["example1", "prop1", "naive_candidate_example1"];

const EXAMPLE1: &str = include_str!("../fixtures/example1.json");
const PROP1: &str = include_str!("../fixtures/prop1.json");
const NAIVE_CANDIDATE: &str = include_str!("../fixtures/naive_candidate_example1.json");

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Fixture {
    Instance(Instance),
    Matching(Matching),
}

/// Canonical document text of a built-in fixture.
pub fn builtin_text(name: &str) -> Result<&'static str, IoError> {
    match name {
        "example1" => Ok(EXAMPLE1),
        "prop1" => Ok(PROP1),
        "naive_candidate_example1" => Ok(NAIVE_CANDIDATE),
        other => Err(IoError::UnknownBuiltin(other.to_owned())),
    }
}

pub fn builtin(name: &str) -> Result<Fixture, IoError> {
    let text = builtin_text(name)?;
    if name == "naive_candidate_example1" {
        Ok(Fixture::Matching(parse_matching(text)?.0))
    } else {
        Ok(Fixture::Instance(parse_instance(text, ParseMode::Audit)?))
    }
}

pub fn builtin_instance(name: &str) -> Result<Instance, IoError> {
    match builtin(name)? {
        Fixture::Instance(i) => Ok(i),
        Fixture::Matching(_) => Err(IoError::WrongFixtureKind(name.to_owned(), "matching", "instance")),
    }
}

pub fn builtin_matching(name: &str) -> Result<Matching, IoError> {
    match builtin(name)? {
        Fixture::Matching(m) => Ok(m),
        Fixture::Instance(_) => Err(IoError::WrongFixtureKind(name.to_owned(), "instance", "matching")),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    pub n_students: usize,
    pub n_schools: usize,
    /// Probability that a student reports willingness-to-remain.
    pub wtr_fraction: f64,
    pub max_list_length: usize,
    /// Inclusive per-period capacity ranges.
    pub capacity_first: (u32, u32),
    pub capacity_second: (u32, u32),
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid generator parameters: {0}")]
pub struct GeneratorError(pub String);

impl GeneratorParams {
    pub fn validate(&self) -> Result<(), GeneratorError> {
        if !(0.0..=1.0).contains(&self.wtr_fraction) {
            return Err(GeneratorError(format!("wtr_fraction {} outside [0, 1]", self.wtr_fraction)));
        }
        for (name, (lo, hi)) in [("capacity_first", self.capacity_first), ("capacity_second", self.capacity_second)] {
            if lo > hi {
                return Err(GeneratorError(format!("{name} range {lo}..={hi} is empty")));
            }
        }
        Ok(())
    }
}

/// Random instance, deterministic in `params.seed`. Students are named
/// `i1..`, schools `s1..`. Each school ranks a random ordered subset of at
/// least half the students, so some students are unacceptable to it.
pub fn generate(params: &GeneratorParams) -> Result<Instance, GeneratorError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let student_ids: Vec<StudentId> = (1..=params.n_students).map(|k| StudentId::new(format!("i{k}"))).collect();
    let school_ids: Vec<SchoolId> = (1..=params.n_schools).map(|k| SchoolId::new(format!("s{k}"))).collect();

    let students = student_ids
        .iter()
        .map(|id| {
            let wtr = rng.gen_bool(params.wtr_fraction);
            let len = rng.gen_range(0..=params.max_list_length.min(params.n_schools));
            let mut list = school_ids.clone();
            list.shuffle(&mut rng);
            list.truncate(len);
            let preference = if wtr {
                ExtendedPreference::WillingnessToRemain(list)
            } else {
                ExtendedPreference::PriorityOnly(list)
            };
            Student::new(id.clone(), preference)
        })
        .collect();
    let schools = school_ids
        .iter()
        .map(|id| {
            let n = params.n_students;
            let len = rng.gen_range(n.div_ceil(2)..=n);
            let mut priority = student_ids.clone();
            priority.shuffle(&mut rng);
            priority.truncate(len);
            let q1 = rng.gen_range(params.capacity_first.0..=params.capacity_first.1);
            let q2 = rng.gen_range(params.capacity_second.0..=params.capacity_second.1);
            School::new(id.clone(), priority, Capacity::new(q1, q2))
        })
        .collect();
    Ok(Instance::new(students, schools))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Period;

    #[test]
    fn example1_fixture_fields() {
        let inst = builtin_instance("example1").unwrap();
        assert_eq!(inst.students().len(), 6);
        assert_eq!(inst.schools().len(), 2);
        let i6 = inst.student(&"i6".into()).unwrap();
        assert_eq!(i6.preference, ExtendedPreference::PriorityOnly(vec!["s1".into(), "s2".into()]));
        for sc in inst.schools() {
            assert_eq!(sc.capacity, Capacity::new(2, 2));
        }
        assert!(validate_instance(&inst).is_valid());
    }

    #[test]
    fn prop1_fixture_fields() {
        let inst = builtin_instance("prop1").unwrap();
        let s1 = inst.school(&"s1".into()).unwrap();
        assert_eq!(s1.priority, vec![StudentId::from("i1"), "i2".into()]);
        assert_eq!(s1.capacity, Capacity::new(1, 1));
        assert_eq!(inst.school(&"s2".into()).unwrap().capacity, Capacity::new(2, 2));
        let i1 = inst.student(&"i1".into()).unwrap();
        assert_eq!(
            i1.preference,
            ExtendedPreference::RawPairs(vec![
                Assignment::new(Some("s1".into()), Some("s2".into())),
                Assignment::both("s2"),
            ])
        );
    }

    #[test]
    fn naive_candidate_fixture() {
        let m = builtin_matching("naive_candidate_example1").unwrap();
        assert_eq!(m.get(&"i5".into()), Some(&Assignment::second_only("s2")));
        assert_eq!(m.roster(&"s1".into(), Period::First).len(), 2);
    }

    #[test]
    fn fixtures_are_canonical() {
        for name in ["example1", "prop1"] {
            let inst = builtin_instance(name).unwrap();
            assert_eq!(serialize_instance(&inst), builtin_text(name).unwrap());
        }
        let m = builtin_matching("naive_candidate_example1").unwrap();
        assert_eq!(serialize_matching(&m, None), builtin_text("naive_candidate_example1").unwrap());
    }

    #[test]
    fn unknown_builtin() {
        assert_eq!(builtin("nope"), Err(IoError::UnknownBuiltin("nope".into())));
        assert!(matches!(builtin_instance("naive_candidate_example1"), Err(IoError::WrongFixtureKind(..))));
    }

    #[test]
    fn strict_mode_rejects_raw_pairs() {
        let err = parse_instance(PROP1, ParseMode::Strict).unwrap_err();
        assert!(matches!(err, IoError::Domain { ref path, .. } if path == "students[0]"), "{err}");
    }

    #[test]
    fn dangling_reference_names_the_id() {
        let text = EXAMPLE1.replacen("\"s2\"", "\"s9\"", 1);
        let err = parse_instance(&text, ParseMode::Strict).unwrap_err();
        assert_eq!(err, IoError::Reference { path: "students[0].prefs[1]".into(), id: "s9".into() });
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_instance("{\n  \"version\": \"1\",\n  oops\n}", ParseMode::Strict).unwrap_err();
        assert!(matches!(err, IoError::Syntax { line: 3, .. }), "{err}");
    }

    #[test]
    fn version_is_mandatory_and_checked() {
        let err = parse_instance(&EXAMPLE1.replace("\"version\": \"1\"", "\"version\": \"2\""), ParseMode::Audit);
        assert_eq!(err.unwrap_err(), IoError::UnsupportedVersion("2".into()));
        let missing = r#"{"students": [], "schools": []}"#;
        assert!(matches!(parse_instance(missing, ParseMode::Audit), Err(IoError::Syntax { .. })));
    }

    #[test]
    fn duplicate_priority_entry_is_a_domain_error() {
        let text = r#"{"version": "1",
            "students": [{"id": "a", "kind": "priority_only", "prefs": ["x"]}],
            "schools": [{"id": "x", "priority": ["a", "a"], "q1": 1, "q2": 1}]}"#;
        let err = parse_instance(text, ParseMode::Strict).unwrap_err();
        assert!(matches!(err, IoError::Domain { ref path, .. } if path == "schools[0].priority[1]"));
    }

    #[test]
    fn matching_document_with_provenance() {
        let m = Matching::new().with("a", Assignment::both("x")).with("b", Assignment::unmatched());
        let prov = Provenance { mechanism: "aspda".into(), order: Some(vec!["a".into()]), seed: None };
        let text = serialize_matching(&m, Some(&prov));
        assert_eq!(parse_matching(&text).unwrap(), (m, Some(prov)));
    }

    #[test]
    fn duplicate_matching_entry() {
        let text = r#"{"version": "1", "matching": [
            {"id": "a", "p1": null, "p2": null}, {"id": "a", "p1": null, "p2": null}]}"#;
        assert!(matches!(parse_matching(text), Err(IoError::Domain { .. })));
    }

    fn params(seed: u64) -> GeneratorParams {
        GeneratorParams {
            n_students: 6,
            n_schools: 3,
            wtr_fraction: 0.5,
            max_list_length: 3,
            capacity_first: (0, 2),
            capacity_second: (1, 3),
            seed,
        }
    }

    #[test]
    fn generator_is_deterministic() {
        assert_eq!(generate(&params(11)).unwrap(), generate(&params(11)).unwrap());
        assert_ne!(generate(&params(11)).unwrap(), generate(&params(12)).unwrap());
    }

    #[test]
    fn generator_kind_boundaries() {
        let all_po = generate(&GeneratorParams { wtr_fraction: 0.0, ..params(3) }).unwrap();
        assert!(all_po.students().iter().all(|s| matches!(s.preference, ExtendedPreference::PriorityOnly(_))));
        let all_wtr = generate(&GeneratorParams { wtr_fraction: 1.0, ..params(3) }).unwrap();
        assert!(all_wtr.students().iter().all(|s| matches!(s.preference, ExtendedPreference::WillingnessToRemain(_))));
        assert!(validate_instance(&all_wtr).is_valid());
    }

    #[test]
    fn generator_rejects_bad_params() {
        assert!(generate(&GeneratorParams { wtr_fraction: 1.5, ..params(0) }).is_err());
        assert!(generate(&GeneratorParams { capacity_first: (3, 1), ..params(0) }).is_err());
    }

    #[test]
    fn generated_instances_always_validate() {
        for seed in 0..10_000 {
            let p =
                GeneratorParams { n_students: 1 + (seed % 7) as usize, n_schools: (seed % 4) as usize, ..params(seed) };
            let inst = generate(&p).unwrap();
            assert!(validate_instance(&inst).is_valid(), "seed {seed}");
        }
    }
}
