//! Text renderings of a mechanism trace.

use crate::mechanism::{Snapshot, TraceEvent};
use crate::model::StudentId;

fn join(ids: &[StudentId]) -> String {
    ids.iter().map(StudentId::as_str).collect::<Vec<_>>().join(",")
}

/// One row per snapshot: each school's period-1 and period-2 pools in
/// instance order, then the unmatched participants, the entry order and
/// the entrant(s). Cells are separated by ` | ` and padded to a common
/// width.
pub fn render_table(events: &[TraceEvent]) -> String {
    let snapshots: Vec<&Snapshot> = events
        .iter()
        .filter_map(|e| match e {
            TraceEvent::Snapshot(s) => Some(s),
            _ => None,
        })
        .collect();
    let mut header: Vec<String> = Vec::new();
    if let Some(first) = snapshots.first() {
        for p in &first.pools {
            header.push(format!("{}^1", p.school));
            header.push(format!("{}^2", p.school));
        }
    }
    header.extend(["unmatched", "rho", "entrant"].map(String::from));

    let rows: Vec<Vec<String>> = snapshots
        .iter()
        .map(|snap| {
            let mut row: Vec<String> = Vec::new();
            for p in &snap.pools {
                row.push(join(&p.first));
                row.push(join(&p.second));
            }
            row.push(join(&snap.unmatched));
            row.push(if snap.order.is_empty() { String::new() } else { format!("({})", join(&snap.order)) });
            row.push(join(&snap.entrants));
            row
        })
        .collect();

    let widths: Vec<usize> = (0..header.len())
        .map(|c| rows.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: &[String]| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect();
        padded.join(" | ").trim_end().to_owned()
    };
    let mut out = line(&header);
    out.push('\n');
    out.push_str(&widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().join("-+-"));
    out.push('\n');
    for r in &rows {
        out.push_str(&line(r));
        out.push('\n');
    }
    out
}

/// One line per event.
pub fn render_events(events: &[TraceEvent]) -> String {
    let mut out = String::new();
    for e in events {
        let line = match e {
            TraceEvent::Entrant { students } => format!("entrant {}", join(students)),
            TraceEvent::Apply { student, target } => format!("apply {student} {target}"),
            TraceEvent::Accept { student, target } => format!("accept {student} {target}"),
            TraceEvent::Evict { student, from } => format!("evict {student} {from}"),
            TraceEvent::Reject { student, target } => format!("reject {student} {target}"),
            TraceEvent::Exhausted { student } => format!("exhausted {student}"),
            TraceEvent::Snapshot(s) => {
                let pools: Vec<String> =
                    s.pools.iter().map(|p| format!("{}=[{}|{}]", p.school, join(&p.first), join(&p.second))).collect();
                format!("snapshot {} unmatched=[{}]", pools.join(" "), join(&s.unmatched))
            }
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}
