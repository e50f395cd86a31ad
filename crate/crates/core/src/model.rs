//! Domain types: students, schools, extended preferences over
//! school-priority pairs, school choice functions and pair ranking.
//!
//! Every public operation takes string ids. Internally an [`Instance`]
//! interns ids to dense indices so the mechanism and the brute-force
//! audits can work on `usize` without hashing strings in inner loops.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

macro_rules! id_type {
    ($name:ident) => {
        #[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

id_type!(StudentId);
id_type!(SchoolId);

/// One of the two allocation periods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Period {
    First,
    Second,
}

impl Period {
    pub const BOTH: [Period; 2] = [Period::First, Period::Second];

    pub(crate) fn index(self) -> usize {
        match self {
            Period::First => 0,
            Period::Second => 1,
        }
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Period::First => f.write_str("1"),
            Period::Second => f.write_str("2"),
        }
    }
}

/// Seats offered by a school in each period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Capacity {
    pub first: u32,
    pub second: u32,
}

impl Capacity {
    pub fn new(first: u32, second: u32) -> Self {
        Self { first, second }
    }

    pub fn get(&self, period: Period) -> u32 {
        match period {
            Period::First => self.first,
            Period::Second => self.second,
        }
    }
}

/// A student's pair of period assignments. `None` is the outside option.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Assignment {
    pub first: Option<SchoolId>,
    pub second: Option<SchoolId>,
}

impl Assignment {
    pub fn new(first: Option<SchoolId>, second: Option<SchoolId>) -> Self {
        Self { first, second }
    }

    pub fn unmatched() -> Self {
        Self::default()
    }

    /// `(s, s)`: a seat now and the priority slot at the same school.
    pub fn both(school: impl Into<SchoolId>) -> Self {
        let s = school.into();
        Self { first: Some(s.clone()), second: Some(s) }
    }

    /// `(None, s)`: the second-period slot only.
    pub fn second_only(school: impl Into<SchoolId>) -> Self {
        Self { first: None, second: Some(school.into()) }
    }

    pub fn get(&self, period: Period) -> Option<&SchoolId> {
        match period {
            Period::First => self.first.as_ref(),
            Period::Second => self.second.as_ref(),
        }
    }

    pub fn is_unmatched(&self) -> bool {
        self.first.is_none() && self.second.is_none()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |s: &Option<SchoolId>| s.as_ref().map_or("-".to_owned(), |s| s.to_string());
        write!(f, "({},{})", show(&self.first), show(&self.second))
    }
}

/// The reporting kind of an extended preference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReportKind {
    PriorityOnly,
    WillingnessToRemain,
    RawPairs,
}

impl fmt::Display for ReportKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportKind::PriorityOnly => "priority_only",
            ReportKind::WillingnessToRemain => "willingness_to_remain",
            ReportKind::RawPairs => "raw_pairs",
        })
    }
}

/// A student's report over school-priority pairs.
///
/// The two in-domain kinds carry a strict list of acceptable schools, most
/// preferred first. A priority-only student ranks `(None, s)` in list order
/// and a willingness-to-remain student ranks `(s, s)` in list order; every
/// other pair sits below staying home. `RawPairs` is an explicit ranking of
/// pairs above `(None, None)` and exists only so out-of-domain reports can
/// be audited.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExtendedPreference {
    PriorityOnly(Vec<SchoolId>),
    WillingnessToRemain(Vec<SchoolId>),
    RawPairs(Vec<Assignment>),
}

impl ExtendedPreference {
    pub fn kind(&self) -> ReportKind {
        match self {
            ExtendedPreference::PriorityOnly(_) => ReportKind::PriorityOnly,
            ExtendedPreference::WillingnessToRemain(_) => ReportKind::WillingnessToRemain,
            ExtendedPreference::RawPairs(_) => ReportKind::RawPairs,
        }
    }

    /// Acceptable pairs, best first, excluding `(None, None)`.
    pub fn acceptable_pairs(&self) -> Vec<Assignment> {
        match self {
            ExtendedPreference::PriorityOnly(list) => list.iter().cloned().map(Assignment::second_only).collect(),
            ExtendedPreference::WillingnessToRemain(list) => list.iter().cloned().map(Assignment::both).collect(),
            ExtendedPreference::RawPairs(pairs) => pairs.clone(),
        }
    }

    /// The in-domain kind this report is equivalent to, if any. A raw list
    /// made only of `(None, s)` or only of `(s, s)` pairs is in the domain.
    pub fn domain_kind(&self) -> Option<DomainKind> {
        match self {
            ExtendedPreference::PriorityOnly(_) => Some(DomainKind::PriorityOnly),
            ExtendedPreference::WillingnessToRemain(_) => Some(DomainKind::WillingnessToRemain),
            ExtendedPreference::RawPairs(pairs) => {
                if pairs.iter().all(|p| p.first.is_none() && p.second.is_some()) {
                    Some(DomainKind::PriorityOnly)
                } else if pairs.iter().all(|p| p.first.is_some() && p.first == p.second) {
                    Some(DomainKind::WillingnessToRemain)
                } else {
                    None
                }
            }
        }
    }
}

/// The two kinds admitted by the mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainKind {
    PriorityOnly,
    WillingnessToRemain,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Student {
    pub id: StudentId,
    pub preference: ExtendedPreference,
}

impl Student {
    pub fn new(id: impl Into<StudentId>, preference: ExtendedPreference) -> Self {
        Self { id: id.into(), preference }
    }
}

/// A school with its period-invariant priority ranking. Students missing
/// from `priority` are unacceptable to the school.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct School {
    pub id: SchoolId,
    pub priority: Vec<StudentId>,
    pub capacity: Capacity,
}

impl School {
    pub fn new(id: impl Into<SchoolId>, priority: Vec<StudentId>, capacity: Capacity) -> Self {
        Self { id: id.into(), priority, capacity }
    }
}

/// Position of a pair in a student's ranking. Lower is better;
/// `Unacceptable` is below every acceptable pair including `(None, None)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rank {
    Acceptable(usize),
    Unacceptable,
}

impl Rank {
    pub fn is_acceptable(self) -> bool {
        matches!(self, Rank::Acceptable(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown student `{0}`")]
    UnknownStudent(StudentId),
    #[error("unknown school `{0}`")]
    UnknownSchool(SchoolId),
    #[error("matching has no assignment for student `{0}`")]
    MissingStudent(StudentId),
    #[error("matching assigns student `{0}` who is not in the instance")]
    ExtraStudent(StudentId),
}

/// Index-level pair used by the mechanism and the audits.
pub(crate) type Pair = (Option<usize>, Option<usize>);

/// The full allocation problem: students with their reports and schools
/// with priorities and two-period capacities.
#[derive(Debug, Clone)]
pub struct Instance {
    students: Vec<Student>,
    schools: Vec<School>,
    student_index: HashMap<StudentId, usize>,
    school_index: HashMap<SchoolId, usize>,
    // priority_rank[s][i]: position of student i in school s's ranking.
    priority_rank: Vec<Vec<Option<usize>>>,
    options: Vec<Vec<Pair>>,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.students == other.students && self.schools == other.schools
    }
}

impl Eq for Instance {}

impl Instance {
    /// Builds an instance without validating it; see [`validate_instance`].
    /// Duplicate ids resolve to their first occurrence and dangling
    /// references are dropped from the index tables.
    pub fn new(students: Vec<Student>, schools: Vec<School>) -> Self {
        let mut student_index = HashMap::new();
        for (k, st) in students.iter().enumerate() {
            student_index.entry(st.id.clone()).or_insert(k);
        }
        let mut school_index = HashMap::new();
        for (k, sc) in schools.iter().enumerate() {
            school_index.entry(sc.id.clone()).or_insert(k);
        }
        let priority_rank = schools
            .iter()
            .map(|sc| {
                let mut rank = vec![None; students.len()];
                for (pos, id) in sc.priority.iter().enumerate() {
                    if let Some(&i) = student_index.get(id) {
                        rank[i].get_or_insert(pos);
                    }
                }
                rank
            })
            .collect();
        let resolve = |s: &Option<SchoolId>| -> Result<Option<usize>, ()> {
            match s {
                None => Ok(None),
                Some(id) => school_index.get(id).copied().map(Some).ok_or(()),
            }
        };
        let options = students
            .iter()
            .map(|st| {
                let mut out: Vec<Pair> = Vec::new();
                for a in st.preference.acceptable_pairs() {
                    if let (Ok(p1), Ok(p2)) = (resolve(&a.first), resolve(&a.second)) {
                        if (p1, p2) != (None, None) && !out.contains(&(p1, p2)) {
                            out.push((p1, p2));
                        }
                    }
                }
                out
            })
            .collect();
        Self { students, schools, student_index, school_index, priority_rank, options }
    }

    pub fn students(&self) -> &[Student] {
        &self.students
    }

    pub fn schools(&self) -> &[School] {
        &self.schools
    }

    pub fn student(&self, id: &StudentId) -> Result<&Student, ModelError> {
        self.student_idx(id).map(|i| &self.students[i])
    }

    pub fn school(&self, id: &SchoolId) -> Result<&School, ModelError> {
        self.school_idx(id).map(|s| &self.schools[s])
    }

    /// Returns a copy with one student's report replaced.
    pub fn with_preference(&self, id: &StudentId, preference: ExtendedPreference) -> Result<Instance, ModelError> {
        let i = self.student_idx(id)?;
        let mut students = self.students.clone();
        students[i].preference = preference;
        Ok(Instance::new(students, self.schools.clone()))
    }

    pub(crate) fn n_students(&self) -> usize {
        self.students.len()
    }

    pub(crate) fn n_schools(&self) -> usize {
        self.schools.len()
    }

    pub(crate) fn student_idx(&self, id: &StudentId) -> Result<usize, ModelError> {
        self.student_index.get(id).copied().ok_or_else(|| ModelError::UnknownStudent(id.clone()))
    }

    pub(crate) fn school_idx(&self, id: &SchoolId) -> Result<usize, ModelError> {
        self.school_index.get(id).copied().ok_or_else(|| ModelError::UnknownSchool(id.clone()))
    }

    pub(crate) fn student_id(&self, i: usize) -> &StudentId {
        &self.students[i].id
    }

    pub(crate) fn school_id(&self, s: usize) -> &SchoolId {
        &self.schools[s].id
    }

    pub(crate) fn quota(&self, s: usize, period: Period) -> usize {
        self.schools[s].capacity.get(period) as usize
    }

    pub(crate) fn priority_of(&self, s: usize, i: usize) -> Option<usize> {
        self.priority_rank[s][i]
    }

    /// Acceptable pairs of student `i`, best first.
    pub(crate) fn options(&self, i: usize) -> &[Pair] {
        &self.options[i]
    }

    pub(crate) fn rank_pair(&self, i: usize, pair: Pair) -> Rank {
        let opts = &self.options[i];
        if pair == (None, None) {
            return Rank::Acceptable(opts.len());
        }
        match opts.iter().position(|&p| p == pair) {
            Some(k) => Rank::Acceptable(k),
            None => Rank::Unacceptable,
        }
    }

    /// True iff `i` is in `Ch_s^t(roster ∪ {i})`. `roster` must not contain `i`.
    pub(crate) fn admits(&self, s: usize, period: Period, roster: &[usize], i: usize) -> bool {
        let Some(mine) = self.priority_of(s, i) else {
            return false;
        };
        let above = roster.iter().filter(|&&j| matches!(self.priority_of(s, j), Some(r) if r < mine)).count();
        above < self.quota(s, period)
    }

    /// `Ch_s^t` on indices: ranked applicants in priority order, truncated
    /// to the period quota.
    pub(crate) fn choose(&self, s: usize, period: Period, applicants: &[usize]) -> Vec<usize> {
        let mut ranked: Vec<(usize, usize)> =
            applicants.iter().filter_map(|&i| self.priority_of(s, i).map(|r| (r, i))).collect();
        ranked.sort_unstable();
        ranked.dedup();
        ranked.truncate(self.quota(s, period));
        ranked.into_iter().map(|(_, i)| i).collect()
    }

    pub(crate) fn pair_to_assignment(&self, pair: Pair) -> Assignment {
        Assignment {
            first: pair.0.map(|s| self.school_id(s).clone()),
            second: pair.1.map(|s| self.school_id(s).clone()),
        }
    }

    pub(crate) fn assignment_to_pair(&self, a: &Assignment) -> Result<Pair, ModelError> {
        let first = a.first.as_ref().map(|s| self.school_idx(s)).transpose()?;
        let second = a.second.as_ref().map(|s| self.school_idx(s)).transpose()?;
        Ok((first, second))
    }

    /// Per-student index pairs for a matching, in instance order.
    pub(crate) fn index_matching(&self, m: &Matching) -> Result<Vec<Pair>, ModelError> {
        for id in m.assignments.keys() {
            if !self.student_index.contains_key(id) {
                return Err(ModelError::ExtraStudent(id.clone()));
            }
        }
        self.students
            .iter()
            .map(|st| {
                let a = m.assignments.get(&st.id).ok_or_else(|| ModelError::MissingStudent(st.id.clone()))?;
                self.assignment_to_pair(a)
            })
            .collect()
    }

    pub(crate) fn matching_from_pairs(&self, pairs: &[Pair]) -> Matching {
        Matching {
            assignments: pairs
                .iter()
                .enumerate()
                .map(|(i, &p)| (self.student_id(i).clone(), self.pair_to_assignment(p)))
                .collect(),
        }
    }
}

/// Rosters per school per period, derived from index pairs.
pub(crate) fn rosters(inst: &Instance, pairs: &[Pair]) -> Vec<[Vec<usize>; 2]> {
    let mut out = vec![[Vec::new(), Vec::new()]; inst.n_schools()];
    for (i, &(p1, p2)) in pairs.iter().enumerate() {
        if let Some(s) = p1 {
            out[s][0].push(i);
        }
        if let Some(s) = p2 {
            out[s][1].push(i);
        }
    }
    out
}

/// Assignment of every student. Rosters are derived on demand.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Matching {
    assignments: BTreeMap<StudentId, Assignment>,
}

impl Matching {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every student of `inst` unmatched.
    pub fn empty_for(inst: &Instance) -> Self {
        Self { assignments: inst.students().iter().map(|s| (s.id.clone(), Assignment::unmatched())).collect() }
    }

    pub fn insert(&mut self, student: impl Into<StudentId>, a: Assignment) {
        self.assignments.insert(student.into(), a);
    }

    pub fn with(mut self, student: impl Into<StudentId>, a: Assignment) -> Self {
        self.insert(student, a);
        self
    }

    pub fn get(&self, student: &StudentId) -> Option<&Assignment> {
        self.assignments.get(student)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&StudentId, &Assignment)> {
        self.assignments.iter()
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn roster(&self, school: &SchoolId, period: Period) -> BTreeSet<StudentId> {
        self.assignments.iter().filter(|(_, a)| a.get(period) == Some(school)).map(|(id, _)| id.clone()).collect()
    }
}

impl FromIterator<(StudentId, Assignment)> for Matching {
    fn from_iter<T: IntoIterator<Item = (StudentId, Assignment)>>(iter: T) -> Self {
        Self { assignments: iter.into_iter().collect() }
    }
}

/// A structural problem found by [`validate_instance`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyStudentId {
        student: usize,
    },
    EmptySchoolId {
        school: usize,
    },
    DuplicateStudent {
        student: usize,
        id: StudentId,
    },
    DuplicateSchool {
        school: usize,
        id: SchoolId,
    },
    /// A preference entry names a school that does not exist.
    UnknownSchool {
        student: usize,
        entry: usize,
        id: SchoolId,
    },
    /// A priority entry names a student that does not exist.
    UnknownStudent {
        school: usize,
        entry: usize,
        id: StudentId,
    },
    DuplicatePreference {
        student: usize,
        entry: usize,
    },
    DuplicatePriority {
        school: usize,
        entry: usize,
        id: StudentId,
    },
    /// A raw pair list that includes `(None, None)` explicitly.
    EmptyPairListed {
        student: usize,
        entry: usize,
    },
    /// The report is neither priority-only nor willingness-to-remain.
    OutOfDomain {
        student: usize,
        id: StudentId,
    },
}

impl Violation {
    /// Domain violations concern the preference domain rather than the
    /// structure of the document; audits tolerate them.
    pub fn is_domain(&self) -> bool {
        matches!(self, Violation::OutOfDomain { .. })
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyStudentId { student } => write!(f, "student #{student} has an empty id"),
            Violation::EmptySchoolId { school } => write!(f, "school #{school} has an empty id"),
            Violation::DuplicateStudent { id, .. } => write!(f, "duplicate student id `{id}`"),
            Violation::DuplicateSchool { id, .. } => write!(f, "duplicate school id `{id}`"),
            Violation::UnknownSchool { id, .. } => write!(f, "reference to unknown school `{id}`"),
            Violation::UnknownStudent { id, .. } => write!(f, "reference to unknown student `{id}`"),
            Violation::DuplicatePreference { .. } => write!(f, "duplicate entry in preference list"),
            Violation::DuplicatePriority { id, .. } => {
                write!(f, "student `{id}` listed twice in priority order")
            }
            Violation::EmptyPairListed { .. } => write!(f, "raw pair list contains (-,-)"),
            Violation::OutOfDomain { id, .. } => {
                write!(f, "report of `{id}` is neither priority-only nor willingness-to-remain")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// Valid apart from out-of-domain reports.
    pub fn is_structurally_valid(&self) -> bool {
        self.violations.iter().all(Violation::is_domain)
    }

    pub fn structural(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| !v.is_domain())
    }
}

/// Reports every structural violation of `inst`. An empty report means each
/// student's report lies in the reasonably extended domain.
pub fn validate_instance(inst: &Instance) -> ValidationReport {
    let mut violations = Vec::new();
    let mut seen_students = BTreeSet::new();
    for (k, st) in inst.students.iter().enumerate() {
        if st.id.as_str().is_empty() {
            violations.push(Violation::EmptyStudentId { student: k });
        }
        if !seen_students.insert(&st.id) {
            violations.push(Violation::DuplicateStudent { student: k, id: st.id.clone() });
        }
    }
    let mut seen_schools = BTreeSet::new();
    for (k, sc) in inst.schools.iter().enumerate() {
        if sc.id.as_str().is_empty() {
            violations.push(Violation::EmptySchoolId { school: k });
        }
        if !seen_schools.insert(&sc.id) {
            violations.push(Violation::DuplicateSchool { school: k, id: sc.id.clone() });
        }
    }

    for (k, st) in inst.students.iter().enumerate() {
        let check_school = |entry: usize, id: &SchoolId, out: &mut Vec<Violation>| {
            if !inst.school_index.contains_key(id) {
                out.push(Violation::UnknownSchool { student: k, entry, id: id.clone() });
            }
        };
        match &st.preference {
            ExtendedPreference::PriorityOnly(list) | ExtendedPreference::WillingnessToRemain(list) => {
                let mut seen = BTreeSet::new();
                for (entry, id) in list.iter().enumerate() {
                    check_school(entry, id, &mut violations);
                    if !seen.insert(id) {
                        violations.push(Violation::DuplicatePreference { student: k, entry });
                    }
                }
            }
            ExtendedPreference::RawPairs(pairs) => {
                let mut seen = BTreeSet::new();
                for (entry, pair) in pairs.iter().enumerate() {
                    for id in [&pair.first, &pair.second].into_iter().flatten() {
                        check_school(entry, id, &mut violations);
                    }
                    if pair.is_unmatched() {
                        violations.push(Violation::EmptyPairListed { student: k, entry });
                    }
                    if !seen.insert(pair) {
                        violations.push(Violation::DuplicatePreference { student: k, entry });
                    }
                }
            }
        }
        if st.preference.domain_kind().is_none() {
            violations.push(Violation::OutOfDomain { student: k, id: st.id.clone() });
        }
    }

    for (k, sc) in inst.schools.iter().enumerate() {
        let mut seen = BTreeSet::new();
        for (entry, id) in sc.priority.iter().enumerate() {
            if !inst.student_index.contains_key(id) {
                violations.push(Violation::UnknownStudent { school: k, entry, id: id.clone() });
            }
            if !seen.insert(id) {
                violations.push(Violation::DuplicatePriority { school: k, entry, id: id.clone() });
            }
        }
    }
    ValidationReport { violations }
}

/// `Ch_s^t`: the `q_s^t` highest-priority applicants among those the
/// school ranks.
pub fn choice(
    inst: &Instance,
    school: &SchoolId,
    period: Period,
    applicants: &BTreeSet<StudentId>,
) -> Result<BTreeSet<StudentId>, ModelError> {
    let s = inst.school_idx(school)?;
    // Applicants that are not students of the instance cannot be ranked.
    let idx: Vec<usize> = applicants.iter().filter_map(|id| inst.student_idx(id).ok()).collect();
    Ok(inst.choose(s, period, &idx).into_iter().map(|i| inst.student_id(i).clone()).collect())
}

pub fn assignment_rank(inst: &Instance, student: &StudentId, a: &Assignment) -> Result<Rank, ModelError> {
    let i = inst.student_idx(student)?;
    let pair = inst.assignment_to_pair(a)?;
    Ok(inst.rank_pair(i, pair))
}

/// Strict preference of `student` for `a` over `b`.
pub fn prefers(inst: &Instance, student: &StudentId, a: &Assignment, b: &Assignment) -> Result<bool, ModelError> {
    Ok(assignment_rank(inst, student, a)? < assignment_rank(inst, student, b)?)
}

pub fn is_individually_rational(inst: &Instance, m: &Matching) -> Result<bool, ModelError> {
    let pairs = inst.index_matching(m)?;
    Ok(pairs_individually_rational(inst, &pairs))
}

pub(crate) fn pairs_individually_rational(inst: &Instance, pairs: &[Pair]) -> bool {
    if pairs.iter().enumerate().any(|(i, &p)| !inst.rank_pair(i, p).is_acceptable()) {
        return false;
    }
    rosters(inst, pairs).iter().enumerate().all(|(s, per)| {
        Period::BOTH.iter().all(|&t| {
            let roster = &per[t.index()];
            roster.len() <= inst.quota(s, t) && roster.iter().all(|&i| inst.priority_of(s, i).is_some())
        })
    })
}
