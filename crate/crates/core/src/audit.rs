//! Brute-force verification: blocking coalitions, stable-set enumeration,
//! unilateral misreport search and a side-by-side mechanism comparison.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::mechanism::{self, aspda, derive_order, naive_per_period_spda, EntryOrder, MechanismError};
use crate::model::{
    pairs_individually_rational, rosters, validate_instance, Assignment, DomainKind, ExtendedPreference, Instance,
    Matching, ModelError, Pair, Period, SchoolId, StudentId, ValidationReport,
};

/// Default cap on the number of candidate matchings the oracle will visit.
pub const DEFAULT_ENUMERATION_BOUND: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error("instance has {combinations} candidate matchings, above the bound of {bound}")]
    TooLarge { combinations: u128, bound: u64 },
    #[error("invalid instance: {} structural violation(s)", .0.structural().count())]
    InvalidInstance(ValidationReport),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
}

/// Which components of the assignment a blocking student changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockForm {
    Period1Only,
    Period2Only,
    BothPeriods,
}

impl fmt::Display for BlockForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BlockForm::Period1Only => "period-1",
            BlockForm::Period2Only => "period-2",
            BlockForm::BothPeriods => "both-periods",
        })
    }
}

/// A student together with the pair it would move to. Unchanged components
/// of `target` hold the student's current school.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockingCoalition {
    pub student: StudentId,
    pub target: Assignment,
    pub form: BlockForm,
}

impl fmt::Display for BlockingCoalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}) {}", self.student, self.target, self.form)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditReport {
    pub individually_rational: bool,
    pub blocking: Vec<BlockingCoalition>,
    pub stable: bool,
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let yn = |b: bool| if b { "yes" } else { "no" };
        writeln!(f, "individually rational: {}", yn(self.individually_rational))?;
        writeln!(f, "blocking coalitions: {}", self.blocking.len())?;
        for b in &self.blocking {
            writeln!(f, "  {b}")?;
        }
        writeln!(f, "stable: {}", yn(self.stable))
    }
}

/// A profitable unilateral misreport.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deviation {
    pub student: StudentId,
    pub misreport: ExtendedPreference,
    pub truthful_outcome: Assignment,
    pub deviating_outcome: Assignment,
    /// The misreport changes the report kind and names at least one school.
    pub switches_kind: bool,
}

fn structural_check(inst: &Instance) -> Result<(), AuditError> {
    let report = validate_instance(inst);
    if report.is_structurally_valid() {
        Ok(())
    } else {
        Err(AuditError::InvalidInstance(report))
    }
}

/// Index-level block sweep over every student and every pair in
/// `(S ∪ {None})²`. Returns `(student, pair, form)` triples.
pub(crate) fn blocking_pairs(inst: &Instance, pairs: &[Pair], stop_at_first: bool) -> Vec<(usize, Pair, BlockForm)> {
    let rosters = rosters(inst, pairs);
    let slots: Vec<Option<usize>> = std::iter::once(None).chain((0..inst.n_schools()).map(Some)).collect();
    let mut out = Vec::new();
    for (i, &current) in pairs.iter().enumerate() {
        let current_rank = inst.rank_pair(i, current);
        for &a in &slots {
            for &b in &slots {
                let candidate = (a, b);
                if candidate == current || inst.rank_pair(i, candidate) >= current_rank {
                    continue;
                }
                let changed1 = a != current.0;
                let changed2 = b != current.1;
                let passes = |slot: Option<usize>, period: Period| match slot {
                    Some(s) => inst.admits(s, period, &rosters[s][period.index()], i),
                    None => true,
                };
                if changed1 && !passes(a, Period::First) {
                    continue;
                }
                if changed2 && !passes(b, Period::Second) {
                    continue;
                }
                let form = match (changed1, changed2) {
                    (true, false) => BlockForm::Period1Only,
                    (false, true) => BlockForm::Period2Only,
                    _ => BlockForm::BothPeriods,
                };
                out.push((i, candidate, form));
                if stop_at_first {
                    return out;
                }
            }
        }
    }
    out
}

pub(crate) fn pairs_stable(inst: &Instance, pairs: &[Pair]) -> bool {
    pairs_individually_rational(inst, pairs) && blocking_pairs(inst, pairs, true).is_empty()
}

fn to_coalitions(inst: &Instance, raw: Vec<(usize, Pair, BlockForm)>) -> Vec<BlockingCoalition> {
    raw.into_iter()
        .map(|(i, pair, form)| BlockingCoalition {
            student: inst.student_id(i).clone(),
            target: inst.pair_to_assignment(pair),
            form,
        })
        .collect()
}

/// Every `(student, pair)` deviation that the student strictly prefers and
/// that each school it newly joins would admit against its current roster.
/// Vacated seats are not refilled during the test.
pub fn enumerate_blocking_coalitions(inst: &Instance, m: &Matching) -> Result<Vec<BlockingCoalition>, AuditError> {
    let pairs = inst.index_matching(m)?;
    Ok(to_coalitions(inst, blocking_pairs(inst, &pairs, false)))
}

pub fn is_stable(inst: &Instance, m: &Matching) -> Result<AuditReport, AuditError> {
    let pairs = inst.index_matching(m)?;
    let individually_rational = pairs_individually_rational(inst, &pairs);
    let blocking = to_coalitions(inst, blocking_pairs(inst, &pairs, false));
    let stable = individually_rational && blocking.is_empty();
    Ok(AuditReport { individually_rational, blocking, stable })
}

/// Odometer over per-student option lists, skipping combinations that
/// overfill a school or seat a student the school does not rank.
pub(crate) struct IrPairs<'a> {
    inst: &'a Instance,
    choices: Vec<Vec<Pair>>,
    digits: Vec<usize>,
    finished: bool,
}

impl<'a> IrPairs<'a> {
    pub(crate) fn new(inst: &'a Instance, bound: u64) -> Result<Self, AuditError> {
        let choices: Vec<Vec<Pair>> = (0..inst.n_students())
            .map(|i| {
                let mut v = inst.options(i).to_vec();
                v.push((None, None));
                v
            })
            .collect();
        let combinations = choices.iter().map(|c| c.len() as u128).product::<u128>();
        if combinations > bound as u128 {
            return Err(AuditError::TooLarge { combinations, bound });
        }
        let digits = vec![0; choices.len()];
        Ok(Self { inst, choices, digits, finished: false })
    }

    fn current(&self) -> Vec<Pair> {
        self.digits.iter().zip(&self.choices).map(|(&d, c)| c[d]).collect()
    }

    fn advance(&mut self) {
        for k in (0..self.digits.len()).rev() {
            self.digits[k] += 1;
            if self.digits[k] < self.choices[k].len() {
                return;
            }
            self.digits[k] = 0;
        }
        self.finished = true;
    }
}

impl Iterator for IrPairs<'_> {
    type Item = Vec<Pair>;

    fn next(&mut self) -> Option<Vec<Pair>> {
        while !self.finished {
            let pairs = self.current();
            self.advance();
            if pairs_individually_rational(self.inst, &pairs) {
                return Some(pairs);
            }
        }
        None
    }
}

/// Streams every individually rational matching: each student holds one of
/// its acceptable pairs or nothing, within capacities and school rankings.
pub fn enumerate_ir_matchings(inst: &Instance, bound: u64) -> Result<impl Iterator<Item = Matching> + '_, AuditError> {
    structural_check(inst)?;
    Ok(IrPairs::new(inst, bound)?.map(move |p| inst.matching_from_pairs(&p)))
}

/// All stable matchings of a small instance.
pub fn stable_set(inst: &Instance, bound: u64) -> Result<Vec<Matching>, AuditError> {
    structural_check(inst)?;
    Ok(IrPairs::new(inst, bound)?
        .filter(|p| blocking_pairs(inst, p, true).is_empty())
        .map(|p| inst.matching_from_pairs(&p))
        .collect())
}

/// Per IR matching, its full blocking list; the certificate printed by the
/// enumerate command.
pub fn ir_certificates(inst: &Instance, bound: u64) -> Result<Vec<(Matching, Vec<BlockingCoalition>)>, AuditError> {
    structural_check(inst)?;
    Ok(IrPairs::new(inst, bound)?
        .map(|p| {
            let blocks = to_coalitions(inst, blocking_pairs(inst, &p, false));
            (inst.matching_from_pairs(&p), blocks)
        })
        .collect())
}

fn ordered_subsets(schools: &[SchoolId]) -> Vec<Vec<SchoolId>> {
    fn extend(prefix: &mut Vec<SchoolId>, used: &mut [bool], schools: &[SchoolId], out: &mut Vec<Vec<SchoolId>>) {
        out.push(prefix.clone());
        for k in 0..schools.len() {
            if !used[k] {
                used[k] = true;
                prefix.push(schools[k].clone());
                extend(prefix, used, schools, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::new(), &mut vec![false; schools.len()], schools, &mut out);
    out
}

/// Every in-domain report a student could submit: both kinds over every
/// ordered list of every subset of schools. The empty list is listed once,
/// as priority-only.
pub fn misreport_universe(inst: &Instance, student: &StudentId) -> Result<Vec<ExtendedPreference>, AuditError> {
    inst.student(student)?;
    let schools: Vec<SchoolId> = inst.schools().iter().map(|s| s.id.clone()).collect();
    let lists = ordered_subsets(&schools);
    let mut out: Vec<ExtendedPreference> = lists.iter().cloned().map(ExtendedPreference::PriorityOnly).collect();
    out.extend(lists.into_iter().filter(|l| !l.is_empty()).map(ExtendedPreference::WillingnessToRemain));
    Ok(out)
}

fn switches_kind(truth: Option<DomainKind>, report: &ExtendedPreference) -> bool {
    let names_school = !report.acceptable_pairs().is_empty();
    names_school && report.domain_kind() != truth
}

/// Exhaustive unilateral misreport search. The entry order is re-derived
/// from `rho_seed` for every profile, so a kind-switching report changes
/// the set being ordered.
pub fn strategyproofness_audit(inst: &Instance, rho_seed: u64) -> Result<Vec<Deviation>, AuditError> {
    let truthful = aspda(inst, &derive_order(inst, rho_seed))?.0;
    let per_student: Vec<Result<Vec<Deviation>, AuditError>> = inst
        .students()
        .par_iter()
        .map(|st| {
            let truth_kind = st.preference.domain_kind();
            let truthful_outcome = truthful.get(&st.id).cloned().unwrap_or_default();
            let truthful_rank = crate::model::assignment_rank(inst, &st.id, &truthful_outcome)?;
            let mut found = Vec::new();
            for report in misreport_universe(inst, &st.id)? {
                if report == st.preference {
                    continue;
                }
                let altered = inst.with_preference(&st.id, report.clone())?;
                let order = derive_order(&altered, rho_seed);
                let outcome = aspda(&altered, &order)?.0.get(&st.id).cloned().unwrap_or_default();
                // Judged under the true report.
                if crate::model::assignment_rank(inst, &st.id, &outcome)? < truthful_rank {
                    found.push(Deviation {
                        student: st.id.clone(),
                        switches_kind: switches_kind(truth_kind, &report),
                        misreport: report,
                        truthful_outcome: truthful_outcome.clone(),
                        deviating_outcome: outcome,
                    });
                }
            }
            Ok(found)
        })
        .collect();
    let mut out = Vec::new();
    for r in per_student {
        out.extend(r?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comparison {
    pub aspda: Matching,
    pub naive: Matching,
    pub aspda_audit: AuditReport,
    pub naive_audit: AuditReport,
}

pub fn compare_mechanisms(inst: &Instance, order: &EntryOrder) -> Result<Comparison, AuditError> {
    let (aspda_matching, _) = aspda(inst, order)?;
    let naive = naive_per_period_spda(inst)?;
    Ok(Comparison {
        aspda_audit: is_stable(inst, &aspda_matching)?,
        naive_audit: is_stable(inst, &naive)?,
        aspda: aspda_matching,
        naive,
    })
}

/// Stability of the mechanism outcome on index pairs; used by the fuzz
/// harness to avoid converting every run to string ids.
pub(crate) fn aspda_pairs(inst: &Instance, order: &EntryOrder) -> Result<Vec<Pair>, MechanismError> {
    Ok(mechanism::run(inst, order)?.held_pairs().to_vec())
}
