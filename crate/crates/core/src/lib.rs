//! Two-period childcare allocation with school/priority complementarities.
//!
//! Students report either *priority-only* preferences (they want only the
//! second-period priority slot) or *willingness-to-remain* preferences (they
//! attend in period one only together with the second-period slot at the
//! same school). The [`mechanism`] module runs the adapted student-proposing
//! deferred acceptance; [`audit`] checks its output by brute force.

pub mod audit;
pub mod fuzz;
pub mod io;
pub mod mechanism;
pub mod model;
pub mod trace;

pub use audit::{
    compare_mechanisms, enumerate_blocking_coalitions, enumerate_ir_matchings, ir_certificates, is_stable,
    misreport_universe, stable_set, strategyproofness_audit, AuditError, AuditReport, BlockForm, BlockingCoalition,
    Comparison, Deviation, DEFAULT_ENUMERATION_BOUND,
};
pub use io::{
    builtin, builtin_instance, builtin_matching, generate, parse_instance, parse_matching, serialize_instance,
    serialize_matching, Fixture, GeneratorParams, IoError, ParseMode, Provenance,
};
pub use mechanism::{
    aspda, derive_order, insert_wtr_student, naive_per_period_spda, step1_spda, EntryOrder, MechanismError,
    MechanismState, Snapshot, TraceEvent,
};
pub use model::{
    assignment_rank, choice, is_individually_rational, prefers, validate_instance, Assignment, Capacity, DomainKind,
    ExtendedPreference, Instance, Matching, ModelError, Period, Rank, ReportKind, School, SchoolId, Student, StudentId,
    ValidationReport, Violation,
};
