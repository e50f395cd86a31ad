//! Adapted student-proposing deferred acceptance.
//!
//! Step 1 runs classical deferred acceptance for the priority-only students
//! on second-period quotas. Step 2 inserts the willingness-to-remain
//! students one at a time in a fixed entry order; each insertion may start a
//! rejection chain that is resolved through a FIFO queue of displaced
//! students before the next student enters.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{
    validate_instance, Assignment, DomainKind, Instance, Matching, ModelError, Pair, Period, SchoolId, StudentId,
    ValidationReport,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MechanismError {
    #[error("invalid instance: {}", first_violation(.0))]
    InvalidInstance(ValidationReport),
    #[error("report of `{0}` is outside the reasonably extended domain")]
    OutOfDomain(StudentId),
    #[error("bad entry order: {0}")]
    BadEntryOrder(String),
    #[error("student `{0}` is not willingness-to-remain")]
    NotWillingToRemain(StudentId),
    #[error("student `{0}` has already entered the market")]
    AlreadyEntered(StudentId),
    #[error("rejection chain started by `{student}` exceeded {steps} steps")]
    NonTermination { student: StudentId, steps: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn first_violation(report: &ValidationReport) -> String {
    match report.violations.first() {
        Some(v) if report.violations.len() > 1 => {
            format!("{v} (and {} more)", report.violations.len() - 1)
        }
        Some(v) => v.to_string(),
        None => "no violations".to_owned(),
    }
}

/// Order in which willingness-to-remain students enter in Step 2.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct EntryOrder(Vec<StudentId>);

impl EntryOrder {
    pub fn new(order: Vec<StudentId>) -> Self {
        Self(order)
    }

    pub fn as_slice(&self) -> &[StudentId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<StudentId> for EntryOrder {
    fn from_iter<T: IntoIterator<Item = StudentId>>(iter: T) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Pool contents of one school at a snapshot, in instance student order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchoolPools {
    pub school: SchoolId,
    pub first: Vec<StudentId>,
    pub second: Vec<StudentId>,
}

/// Tentative state after Step 1 or after one insertion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub pools: Vec<SchoolPools>,
    /// Participants currently holding nothing.
    pub unmatched: Vec<StudentId>,
    pub order: Vec<StudentId>,
    pub entrants: Vec<StudentId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    Entrant {
        students: Vec<StudentId>,
    },
    Apply {
        student: StudentId,
        target: Assignment,
    },
    /// Emitted after the evictions caused by the same admission.
    Accept {
        student: StudentId,
        target: Assignment,
    },
    Evict {
        student: StudentId,
        from: Assignment,
    },
    Reject {
        student: StudentId,
        target: Assignment,
    },
    Exhausted {
        student: StudentId,
    },
    Snapshot(Snapshot),
}

/// Tentative pools, per-student cursors and the displaced queue.
#[derive(Debug, Clone)]
pub struct MechanismState<'a> {
    inst: &'a Instance,
    kinds: Vec<DomainKind>,
    // pools[s][t], each kept in priority order
    pools: Vec<[Vec<usize>; 2]>,
    held: Vec<Pair>,
    cursor: Vec<usize>,
    entered: Vec<bool>,
    displaced: VecDeque<usize>,
    order: Vec<StudentId>,
    events: Vec<TraceEvent>,
}

fn domain_kinds(inst: &Instance) -> Result<Vec<DomainKind>, MechanismError> {
    let report = validate_instance(inst);
    if !report.is_structurally_valid() {
        return Err(MechanismError::InvalidInstance(report));
    }
    inst.students()
        .iter()
        .map(|st| st.preference.domain_kind().ok_or_else(|| MechanismError::OutOfDomain(st.id.clone())))
        .collect()
}

/// School list of an in-domain student, in preference order.
fn school_list(inst: &Instance, kind: DomainKind, i: usize) -> Vec<usize> {
    inst.options(i)
        .iter()
        .filter_map(|&(p1, p2)| match kind {
            DomainKind::PriorityOnly => p2,
            DomainKind::WillingnessToRemain => p1,
        })
        .collect()
}

/// Round-based classical deferred acceptance on one period's quotas.
/// Every free participant proposes to its next school each round; schools
/// keep their best applicants and release the rest.
#[allow(clippy::too_many_arguments)]
fn spda_rounds(
    inst: &Instance,
    period: Period,
    participants: &[usize],
    lists: &[Vec<usize>],
    cursor: &mut [usize],
    pools: &mut [Vec<usize>],
    target: impl Fn(usize) -> Pair,
    events: &mut Vec<TraceEvent>,
    mut on_round: impl FnMut(&[Vec<usize>]),
) {
    let mut held: Vec<Option<usize>> = vec![None; inst.n_students()];
    for (s, pool) in pools.iter().enumerate() {
        for &i in pool {
            held[i] = Some(s);
        }
    }
    let mut done = vec![false; inst.n_students()];
    loop {
        let mut proposals: Vec<Vec<usize>> = vec![Vec::new(); inst.n_schools()];
        let mut any = false;
        for &i in participants {
            if held[i].is_some() || done[i] {
                continue;
            }
            match lists[i].get(cursor[i]) {
                Some(&s) => {
                    cursor[i] += 1;
                    events.push(TraceEvent::Apply {
                        student: inst.student_id(i).clone(),
                        target: inst.pair_to_assignment(target(s)),
                    });
                    proposals[s].push(i);
                    any = true;
                }
                None => {
                    done[i] = true;
                    events.push(TraceEvent::Exhausted { student: inst.student_id(i).clone() });
                }
            }
        }
        if !any {
            break;
        }
        for (s, applicants) in proposals.into_iter().enumerate() {
            if applicants.is_empty() {
                continue;
            }
            let mut candidates = pools[s].clone();
            candidates.extend_from_slice(&applicants);
            let chosen = inst.choose(s, period, &candidates);
            let assignment = inst.pair_to_assignment(target(s));
            for &i in &pools[s] {
                if !chosen.contains(&i) {
                    held[i] = None;
                    events.push(TraceEvent::Evict { student: inst.student_id(i).clone(), from: assignment.clone() });
                }
            }
            for &i in &applicants {
                let student = inst.student_id(i).clone();
                if chosen.contains(&i) {
                    held[i] = Some(s);
                    events.push(TraceEvent::Accept { student, target: assignment.clone() });
                } else {
                    events.push(TraceEvent::Reject { student, target: assignment.clone() });
                }
            }
            pools[s] = chosen;
        }
        on_round(pools);
    }
}

impl<'a> MechanismState<'a> {
    fn fresh(inst: &'a Instance) -> Result<Self, MechanismError> {
        let kinds = domain_kinds(inst)?;
        Ok(Self {
            inst,
            kinds,
            pools: vec![[Vec::new(), Vec::new()]; inst.n_schools()],
            held: vec![(None, None); inst.n_students()],
            cursor: vec![0; inst.n_students()],
            entered: vec![false; inst.n_students()],
            displaced: VecDeque::new(),
            order: Vec::new(),
            events: Vec::new(),
        })
    }

    fn run_step1(&mut self, on_round: impl FnMut(&[Vec<usize>])) {
        let inst = self.inst;
        let participants: Vec<usize> =
            (0..inst.n_students()).filter(|&i| self.kinds[i] == DomainKind::PriorityOnly).collect();
        let lists: Vec<Vec<usize>> = (0..inst.n_students()).map(|i| school_list(inst, self.kinds[i], i)).collect();
        for &i in &participants {
            self.entered[i] = true;
        }
        self.events
            .push(TraceEvent::Entrant { students: participants.iter().map(|&i| inst.student_id(i).clone()).collect() });
        let mut second: Vec<Vec<usize>> = vec![Vec::new(); inst.n_schools()];
        spda_rounds(
            inst,
            Period::Second,
            &participants,
            &lists,
            &mut self.cursor,
            &mut second,
            |s| (None, Some(s)),
            &mut self.events,
            on_round,
        );
        for (s, pool) in second.into_iter().enumerate() {
            for &i in &pool {
                self.held[i] = (None, Some(s));
            }
            self.pools[s][1] = pool;
        }
        self.snapshot(participants);
    }

    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    /// Students tentatively holding `school` in `period`, in priority order.
    pub fn pool(&self, school: &SchoolId, period: Period) -> Result<Vec<StudentId>, ModelError> {
        let s = self.inst.school_idx(school)?;
        Ok(self.pools[s][period.index()].iter().map(|&i| self.inst.student_id(i).clone()).collect())
    }

    /// Index of the next acceptable assignment `student` would try.
    pub fn cursor(&self, student: &StudentId) -> Result<usize, ModelError> {
        Ok(self.cursor[self.inst.student_idx(student)?])
    }

    pub fn displaced(&self) -> impl Iterator<Item = &StudentId> {
        self.displaced.iter().map(|&i| self.inst.student_id(i))
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn has_entered(&self, student: &StudentId) -> Result<bool, ModelError> {
        Ok(self.entered[self.inst.student_idx(student)?])
    }

    /// The tentative matching: pool membership, everyone else unmatched.
    pub fn matching(&self) -> Matching {
        self.inst.matching_from_pairs(&self.held)
    }

    pub(crate) fn held_pairs(&self) -> &[Pair] {
        &self.held
    }

    pub fn into_events(self) -> Vec<TraceEvent> {
        self.events
    }

    fn snapshot(&mut self, entrants: Vec<usize>) {
        let inst = self.inst;
        let in_order = |pool: &[usize]| {
            let mut v = pool.to_vec();
            v.sort_unstable();
            v.into_iter().map(|i| inst.student_id(i).clone()).collect()
        };
        let pools = self
            .pools
            .iter()
            .enumerate()
            .map(|(s, p)| SchoolPools {
                school: inst.school_id(s).clone(),
                first: in_order(&p[0]),
                second: in_order(&p[1]),
            })
            .collect();
        let unmatched = (0..inst.n_students())
            .filter(|&i| self.entered[i] && self.held[i] == (None, None))
            .map(|i| inst.student_id(i).clone())
            .collect();
        self.events.push(TraceEvent::Snapshot(Snapshot {
            pools,
            unmatched,
            order: self.order.clone(),
            entrants: entrants.into_iter().map(|i| inst.student_id(i).clone()).collect(),
        }));
    }

    /// Inserts one willingness-to-remain student and resolves the rejection
    /// chain it starts. Emits a snapshot once the displaced queue is empty.
    pub fn insert_wtr_student(&mut self, student: &StudentId) -> Result<(), MechanismError> {
        let inst = self.inst;
        let i = inst.student_idx(student)?;
        if self.kinds[i] != DomainKind::WillingnessToRemain {
            return Err(MechanismError::NotWillingToRemain(student.clone()));
        }
        if self.entered[i] {
            return Err(MechanismError::AlreadyEntered(student.clone()));
        }
        debug_assert!(self.displaced.is_empty());
        self.entered[i] = true;
        self.events.push(TraceEvent::Entrant { students: vec![student.clone()] });
        self.displaced.push_back(i);

        let cap = 2 * inst.n_students() * (inst.n_schools() + 1);
        let mut steps = 0usize;
        while let Some(j) = self.displaced.pop_front() {
            loop {
                steps += 1;
                if steps > cap {
                    self.displaced.clear();
                    return Err(MechanismError::NonTermination { student: student.clone(), steps: cap });
                }
                let Some(&pair) = inst.options(j).get(self.cursor[j]) else {
                    self.events.push(TraceEvent::Exhausted { student: inst.student_id(j).clone() });
                    break;
                };
                self.cursor[j] += 1;
                let target = inst.pair_to_assignment(pair);
                self.events.push(TraceEvent::Apply { student: inst.student_id(j).clone(), target: target.clone() });
                let school = match self.kinds[j] {
                    DomainKind::WillingnessToRemain => pair.0,
                    DomainKind::PriorityOnly => pair.1,
                }
                .expect("in-domain options always name a school");
                if self.admit(j, school) {
                    self.events.push(TraceEvent::Accept { student: inst.student_id(j).clone(), target });
                    break;
                }
                self.events.push(TraceEvent::Reject { student: inst.student_id(j).clone(), target });
            }
        }
        self.snapshot(vec![i]);
        Ok(())
    }

    /// Joint admission of `j` at school `s`. The admission test runs against
    /// the current pools. On admission each period keeps its choice set,
    /// except that a willingness-to-remain student survives only if chosen
    /// in both periods; the choice sets are recomputed without such students
    /// until nothing changes. Displaced holders join the queue, first-period
    /// losers before second-period losers, each group in priority order.
    fn admit(&mut self, j: usize, s: usize) -> bool {
        let inst = self.inst;
        let wtr = self.kinds[j] == DomainKind::WillingnessToRemain;
        let [old1, old2] = self.pools[s].clone();
        if wtr && !inst.admits(s, Period::First, &old1, j) {
            return false;
        }
        if !inst.admits(s, Period::Second, &old2, j) {
            return false;
        }

        let mut applicants1 = old1.clone();
        if wtr {
            applicants1.push(j);
        }
        let mut applicants2 = old2.clone();
        applicants2.push(j);
        let (chosen1, chosen2) = loop {
            let c1 = inst.choose(s, Period::First, &applicants1);
            let c2 = inst.choose(s, Period::Second, &applicants2);
            let lost: Vec<usize> = applicants1
                .iter()
                .chain(&applicants2)
                .copied()
                .filter(|&k| self.kinds[k] == DomainKind::WillingnessToRemain)
                .filter(|k| !c1.contains(k) || !c2.contains(k))
                .collect();
            if lost.is_empty() {
                break (c1, c2);
            }
            applicants1.retain(|k| !lost.contains(k));
            applicants2.retain(|k| !lost.contains(k));
        };
        debug_assert!(chosen2.contains(&j) && (!wtr || chosen1.contains(&j)));

        let by_priority = |mut v: Vec<usize>| {
            v.sort_by_key(|&k| inst.priority_of(s, k));
            v
        };
        let mut evicted = by_priority(old1.iter().copied().filter(|k| !chosen1.contains(k)).collect());
        let later =
            by_priority(old2.iter().copied().filter(|k| !chosen2.contains(k) && !evicted.contains(k)).collect());
        evicted.extend(later);

        for &k in &evicted {
            let from = inst.pair_to_assignment(self.held[k]);
            self.held[k] = (None, None);
            self.displaced.push_back(k);
            self.events.push(TraceEvent::Evict { student: inst.student_id(k).clone(), from });
        }
        self.held[j] = if wtr { (Some(s), Some(s)) } else { (None, Some(s)) };
        self.pools[s] = [chosen1, chosen2];
        true
    }
}

/// Step 1: deferred acceptance among priority-only students on
/// second-period quotas.
pub fn step1_spda(inst: &Instance) -> Result<MechanismState<'_>, MechanismError> {
    let mut state = MechanismState::fresh(inst)?;
    state.run_step1(|_| {});
    Ok(state)
}

/// Step 1 with a callback observing the second-period pools after every
/// proposal round.
pub fn step1_spda_observed<'a>(
    inst: &'a Instance,
    mut on_round: impl FnMut(Vec<Vec<StudentId>>),
) -> Result<MechanismState<'a>, MechanismError> {
    let mut state = MechanismState::fresh(inst)?;
    state.run_step1(|pools| {
        on_round(pools.iter().map(|p| p.iter().map(|&i| inst.student_id(i).clone()).collect()).collect())
    });
    Ok(state)
}

pub fn insert_wtr_student(state: &mut MechanismState<'_>, student: &StudentId) -> Result<(), MechanismError> {
    state.insert_wtr_student(student)
}

fn check_order(inst: &Instance, kinds: &[DomainKind], order: &EntryOrder) -> Result<(), MechanismError> {
    let mut seen = vec![false; inst.n_students()];
    for id in order.as_slice() {
        let i = inst.student_idx(id).map_err(|_| MechanismError::BadEntryOrder(format!("unknown student `{id}`")))?;
        if kinds[i] != DomainKind::WillingnessToRemain {
            return Err(MechanismError::BadEntryOrder(format!("`{id}` is not willingness-to-remain")));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(MechanismError::BadEntryOrder(format!("`{id}` appears twice")));
        }
    }
    if let Some(i) = (0..inst.n_students()).find(|&i| kinds[i] == DomainKind::WillingnessToRemain && !seen[i]) {
        return Err(MechanismError::BadEntryOrder(format!("`{}` is missing", inst.student_id(i))));
    }
    Ok(())
}

/// Runs the full mechanism: Step 1, then one insertion per entry in
/// `order`. Returns the final matching and the trace.
pub fn aspda(inst: &Instance, order: &EntryOrder) -> Result<(Matching, Vec<TraceEvent>), MechanismError> {
    let state = run(inst, order)?;
    Ok((state.matching(), state.into_events()))
}

pub(crate) fn run<'a>(inst: &'a Instance, order: &EntryOrder) -> Result<MechanismState<'a>, MechanismError> {
    let mut state = MechanismState::fresh(inst)?;
    check_order(inst, &state.kinds, order)?;
    state.run_step1(|_| {});
    state.order = order.as_slice().to_vec();
    for id in order.as_slice() {
        state.insert_wtr_student(id)?;
    }
    Ok(state)
}

/// Seeded entry order: willingness-to-remain ids sorted lexicographically,
/// then shuffled by Fisher-Yates driven by ChaCha8 (`rand_chacha` 0.3,
/// `seed_from_u64`).
pub fn derive_order(inst: &Instance, seed: u64) -> EntryOrder {
    let mut ids: Vec<StudentId> = inst
        .students()
        .iter()
        .filter(|st| st.preference.domain_kind() == Some(DomainKind::WillingnessToRemain))
        .map(|st| st.id.clone())
        .collect();
    ids.sort();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in (1..ids.len()).rev() {
        let j = rng.gen_range(0..=k);
        ids.swap(k, j);
    }
    EntryOrder(ids)
}

/// Baseline that treats each period as an independent market: period 1
/// among willingness-to-remain students on first-period quotas, period 2
/// among all students on second-period quotas. Results are combined per
/// student with no cross-period consistency.
pub fn naive_per_period_spda(inst: &Instance) -> Result<Matching, MechanismError> {
    let kinds = domain_kinds(inst)?;
    let n = inst.n_students();
    let lists: Vec<Vec<usize>> = (0..n).map(|i| school_list(inst, kinds[i], i)).collect();
    let market = |period: Period, participants: Vec<usize>| {
        let mut pools = vec![Vec::new(); inst.n_schools()];
        let mut cursor = vec![0; n];
        let mut sink = Vec::new();
        spda_rounds(
            inst,
            period,
            &participants,
            &lists,
            &mut cursor,
            &mut pools,
            |s| (None, Some(s)),
            &mut sink,
            |_| {},
        );
        let mut out = vec![None; n];
        for (s, pool) in pools.into_iter().enumerate() {
            for i in pool {
                out[i] = Some(s);
            }
        }
        out
    };
    let first = market(Period::First, (0..n).filter(|&i| kinds[i] == DomainKind::WillingnessToRemain).collect());
    let second = market(Period::Second, (0..n).collect());
    let pairs: Vec<Pair> = first.into_iter().zip(second).collect();
    Ok(inst.matching_from_pairs(&pairs))
}
