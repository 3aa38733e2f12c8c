//! Audit log of a run and the sweep-based checker over it.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::model::{SlotId, Task, TaskId, Time};
use crate::sched::{Outcome, ScheduleEntry};

pub const TRACE_HEADER: &str = "task_id,class,slot,tstart,trec,tex,outcome";

/// Append-only list of scheduling decisions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    entries: Vec<ScheduleEntry>,
}

/// Half-open busy interval owned by one task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Busy {
    pub start: Time,
    pub end: Time,
    pub task: TaskId,
}

impl Trace {
    pub fn push(&mut self, entry: ScheduleEntry) {
        self.entries.push(entry);
    }

    pub fn entries(&self) -> &[ScheduleEntry] {
        &self.entries
    }

    pub fn executed(&self) -> impl Iterator<Item = &ScheduleEntry> {
        self.entries.iter().filter(|e| e.is_executed())
    }

    /// Port busy intervals sorted by start.
    pub fn port_intervals(&self) -> Vec<Busy> {
        let mut v: Vec<Busy> = self
            .executed()
            .map(|e| {
                let (start, end) = e.reconfiguration();
                Busy {
                    start,
                    end,
                    task: e.task_id,
                }
            })
            .collect();
        v.sort_unstable();
        v
    }

    /// Per-slot occupancy intervals sorted by start.
    pub fn slot_intervals(&self) -> BTreeMap<SlotId, Vec<Busy>> {
        let mut map: BTreeMap<SlotId, Vec<Busy>> = BTreeMap::new();
        for e in self.executed() {
            let Some(slot) = e.slot_id else { continue };
            let (start, end) = e.occupancy();
            map.entry(slot).or_default().push(Busy {
                start,
                end,
                task: e.task_id,
            });
        }
        for v in map.values_mut() {
            v.sort_unstable();
        }
        map
    }

    /// Entries sorted by task id.
    pub fn by_task(&self) -> Vec<ScheduleEntry> {
        let mut v = self.entries.clone();
        v.sort_by_key(|e| e.task_id);
        v
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * (self.entries.len() + 1));
        out.push_str(TRACE_HEADER);
        out.push('\n');
        let opt = |v: Option<usize>| v.map_or_else(|| "-".to_string(), |x| x.to_string());
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                e.task_id,
                opt(e.class_index),
                opt(e.slot_id),
                e.tstart,
                e.trec,
                e.tex,
                e.outcome
            );
        }
        out
    }

    pub fn parse(text: &str, source_name: &str) -> Result<Trace> {
        let mut trace = Trace::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = idx + 1;
            if line.is_empty() || line.starts_with('#') || line == TRACE_HEADER {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 7 {
                return Err(Error::parse(
                    source_name,
                    lineno,
                    format!("expected 7 fields, found {}", fields.len()),
                ));
            }
            let int = |i: usize| -> Result<u64> {
                fields[i]
                    .parse()
                    .map_err(|_| Error::parse(source_name, lineno, format!("bad integer `{}`", fields[i])))
            };
            let opt = |i: usize| -> Result<Option<usize>> {
                if fields[i] == "-" {
                    Ok(None)
                } else {
                    int(i).map(|v| Some(v as usize))
                }
            };
            let outcome: Outcome = fields[6].parse().map_err(|m| Error::parse(source_name, lineno, m))?;
            trace.push(ScheduleEntry {
                task_id: int(0)? as usize,
                class_index: opt(1)?,
                slot_id: opt(2)?,
                tstart: int(3)?,
                trec: int(4)?,
                tex: int(5)?,
                outcome,
            });
        }
        Ok(trace)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationKind {
    PortOverlap,
    SlotOverlap,
    DeadlineMiss,
    EarlyStart,
    UnknownTask,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Two reconfigurations share the port.
    PortOverlap {
        first: TaskId,
        second: TaskId,
    },
    /// Two tasks occupy one slot at once.
    SlotOverlap {
        slot: SlotId,
        first: TaskId,
        second: TaskId,
    },
    DeadlineMiss {
        task: TaskId,
        end: Time,
        tmax: Time,
    },
    EarlyStart {
        task: TaskId,
        tstart: Time,
        tarr: Time,
    },
    UnknownTask {
        task: TaskId,
    },
}

impl Violation {
    pub fn kind(&self) -> ViolationKind {
        match self {
            Violation::PortOverlap { .. } => ViolationKind::PortOverlap,
            Violation::SlotOverlap { .. } => ViolationKind::SlotOverlap,
            Violation::DeadlineMiss { .. } => ViolationKind::DeadlineMiss,
            Violation::EarlyStart { .. } => ViolationKind::EarlyStart,
            Violation::UnknownTask { .. } => ViolationKind::UnknownTask,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::PortOverlap { first, second } => {
                write!(f, "tasks {first} and {second} reconfigure at the same time")
            }
            Violation::SlotOverlap { slot, first, second } => {
                write!(f, "tasks {first} and {second} overlap on slot {slot}")
            }
            Violation::DeadlineMiss { task, end, tmax } => {
                write!(f, "task {task} finishes at {end}, after its deadline {tmax}")
            }
            Violation::EarlyStart { task, tstart, tarr } => {
                write!(f, "task {task} starts at {tstart}, before it arrives at {tarr}")
            }
            Violation::UnknownTask { task } => write!(f, "task {task} is not in the task set"),
        }
    }
}

/// Pairs each interval with the latest-ending earlier one it overlaps.
fn overlaps(sorted: &[Busy]) -> Vec<(TaskId, TaskId)> {
    let mut out = Vec::new();
    let mut reach: Option<Busy> = None;
    for b in sorted {
        match reach {
            Some(r) if b.start < r.end => {
                out.push((r.task, b.task));
                if b.end > r.end {
                    reach = Some(*b);
                }
            }
            _ => reach = Some(*b),
        }
    }
    out
}

/// Checks port exclusivity, slot exclusivity, deadlines and causality of all
/// executed entries. An empty result means the trace is valid.
pub fn validate_trace(trace: &Trace, tasks: &[Task]) -> Vec<Violation> {
    let by_id: HashMap<TaskId, &Task> = tasks.iter().map(|t| (t.id, t)).collect();
    let mut out = Vec::new();

    for e in trace.executed() {
        let Some(task) = by_id.get(&e.task_id) else {
            out.push(Violation::UnknownTask { task: e.task_id });
            continue;
        };
        if e.end() > task.tmax {
            out.push(Violation::DeadlineMiss {
                task: e.task_id,
                end: e.end(),
                tmax: task.tmax,
            });
        }
        if e.tstart < task.tarr {
            out.push(Violation::EarlyStart {
                task: e.task_id,
                tstart: e.tstart,
                tarr: task.tarr,
            });
        }
    }

    out.extend(
        overlaps(&trace.port_intervals())
            .into_iter()
            .map(|(first, second)| Violation::PortOverlap { first, second }),
    );
    for (slot, intervals) in trace.slot_intervals() {
        out.extend(
            overlaps(&intervals)
                .into_iter()
                .map(|(first, second)| Violation::SlotOverlap { slot, first, second }),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Resources;
    use crate::sched::RejectCause;

    fn executed(task_id: TaskId, slot: SlotId, tstart: Time, trec: Time, tex: Time) -> ScheduleEntry {
        ScheduleEntry {
            task_id,
            class_index: Some(slot),
            slot_id: Some(slot),
            tstart,
            trec,
            tex,
            outcome: Outcome::Executed,
        }
    }

    fn task(id: TaskId, tarr: Time, tex: Time, tmax: Time) -> Task {
        Task::new(id, tarr, tex, tmax, Resources::ZERO)
    }

    fn kinds(v: &[Violation]) -> Vec<ViolationKind> {
        v.iter().map(Violation::kind).collect()
    }

    #[test]
    fn first_fit_without_port_scheduling_is_caught() {
        // T2 reconfigures [3,6) on slot 1; T3 reconfigures [4,7) on slot 0.
        let mut tr = Trace::default();
        tr.push(executed(2, 1, 3, 3, 8));
        tr.push(executed(3, 0, 4, 3, 10));
        let tasks = [task(2, 3, 8, 100), task(3, 4, 10, 100)];
        let v = validate_trace(&tr, &tasks);
        assert_eq!(v, vec![Violation::PortOverlap { first: 2, second: 3 }]);
    }

    #[test]
    fn each_corruption_triggers_its_own_class() {
        let tasks = [task(0, 0, 4, 20), task(1, 0, 4, 20)];
        let mut good = Trace::default();
        good.push(executed(0, 0, 0, 1, 4));
        good.push(executed(1, 1, 1, 3, 4));
        assert!(validate_trace(&good, &tasks).is_empty());

        let cases: [(Vec<ScheduleEntry>, ViolationKind); 5] = [
            (
                vec![executed(0, 0, 0, 2, 4), executed(1, 1, 1, 3, 4)],
                ViolationKind::PortOverlap,
            ),
            (
                vec![executed(0, 0, 0, 1, 4), executed(1, 0, 1, 3, 4)],
                ViolationKind::SlotOverlap,
            ),
            (
                vec![executed(0, 0, 0, 1, 4), executed(1, 1, 14, 3, 4)],
                ViolationKind::DeadlineMiss,
            ),
            (
                vec![
                    executed(0, 0, 0, 1, 4),
                    executed(1, 1, 1, 3, 4),
                    executed(7, 2, 9, 1, 1),
                ],
                ViolationKind::UnknownTask,
            ),
            (vec![executed(0, 0, 0, 1, 4)], ViolationKind::EarlyStart),
        ];
        for (i, (entries, kind)) in cases.into_iter().enumerate() {
            let mut tr = Trace::default();
            entries.into_iter().for_each(|e| tr.push(e));
            let tasks: Vec<Task> = if kind == ViolationKind::EarlyStart {
                vec![task(0, 2, 4, 20)]
            } else {
                tasks.to_vec()
            };
            assert_eq!(kinds(&validate_trace(&tr, &tasks)), vec![kind], "case {i}");
        }
    }

    #[test]
    fn rejected_entries_are_not_checked() {
        let mut tr = Trace::default();
        tr.push(ScheduleEntry {
            task_id: 0,
            class_index: None,
            slot_id: None,
            tstart: 0,
            trec: 0,
            tex: 50,
            outcome: Outcome::Rejected(RejectCause::Unclassifiable),
        });
        assert!(validate_trace(&tr, &[task(0, 0, 50, 10)]).is_empty());
    }

    #[test]
    fn three_way_overlap_reports_each_late_interval() {
        let mut tr = Trace::default();
        tr.push(executed(0, 0, 0, 10, 1));
        tr.push(executed(1, 1, 2, 2, 1));
        tr.push(executed(2, 2, 5, 2, 1));
        let tasks = [task(0, 0, 1, 99), task(1, 0, 1, 99), task(2, 0, 1, 99)];
        let v = validate_trace(&tr, &tasks);
        assert_eq!(
            v,
            vec![
                Violation::PortOverlap { first: 0, second: 1 },
                Violation::PortOverlap { first: 0, second: 2 }
            ]
        );
    }

    #[test]
    fn csv_round_trip() {
        let mut tr = Trace::default();
        tr.push(executed(0, 1, 3, 3, 8));
        tr.push(ScheduleEntry {
            task_id: 1,
            class_index: None,
            slot_id: None,
            tstart: 4,
            trec: 0,
            tex: 2,
            outcome: Outcome::Rejected(RejectCause::Unclassifiable),
        });
        let text = tr.to_csv();
        assert!(text.starts_with(TRACE_HEADER));
        assert_eq!(Trace::parse(&text, "t").unwrap(), tr);
        assert_eq!(Trace::parse(&text, "t").unwrap().to_csv(), text);

        let err = Trace::parse(
            "task_id,class,slot,tstart,trec,tex,outcome\n0,1,1,x,1,1,executed\n",
            "bad.trace",
        )
        .unwrap_err();
        assert!(err.to_string().starts_with("bad.trace:2:"), "{err}");
    }
}
