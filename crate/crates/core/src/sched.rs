//! Orderly and RPIU reconfiguration strategies.
//!
//! Orderly fixes each task's start time at arrival, in arrival order, and
//! reserves the port and a slot of the task's own class even when the start
//! lies in the future. RPIU defers the decision to instants where the port
//! and at least one slot are free, and lets an [`Arbiter`] pick among the
//! queue heads.

use std::fmt;
use std::str::FromStr;

use crate::arbiter::{fit, Arbiter, Candidate};
use crate::error::{Error, Result};
use crate::model::{FpgaConfig, SimClock, Slot, SlotId, Task, TaskId, Time};
use crate::queues::{select_queue, ClassQueue};
use crate::sim::Trace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RejectCause {
    /// Starting as early as the strategy allows would miss `tmax`.
    Deadline,
    /// The task fits no class.
    Unclassifiable,
    /// Still queued when the input ran out.
    Unserved,
}

impl RejectCause {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectCause::Deadline => "deadline",
            RejectCause::Unclassifiable => "unclassifiable",
            RejectCause::Unserved => "unserved",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Executed,
    Rejected(RejectCause),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Executed => f.write_str("executed"),
            Outcome::Rejected(cause) => write!(f, "rejected:{}", cause.as_str()),
        }
    }
}

impl FromStr for Outcome {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "executed" => Outcome::Executed,
            "rejected:deadline" => Outcome::Rejected(RejectCause::Deadline),
            "rejected:unclassifiable" => Outcome::Rejected(RejectCause::Unclassifiable),
            "rejected:unserved" => Outcome::Rejected(RejectCause::Unserved),
            other => return Err(format!("unknown outcome `{other}`")),
        })
    }
}

/// One scheduling decision. For rejections `tstart` is the earliest start the
/// strategy could offer and `slot_id` is absent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScheduleEntry {
    pub task_id: TaskId,
    pub class_index: Option<usize>,
    pub slot_id: Option<SlotId>,
    pub tstart: Time,
    pub trec: Time,
    pub tex: Time,
    pub outcome: Outcome,
}

impl ScheduleEntry {
    pub fn is_executed(&self) -> bool {
        self.outcome == Outcome::Executed
    }

    /// Port occupancy `[tstart, tstart + trec)`.
    pub fn reconfiguration(&self) -> (Time, Time) {
        (self.tstart, self.tstart + self.trec)
    }

    /// Slot occupancy `[tstart, tstart + trec + tex)`.
    pub fn occupancy(&self) -> (Time, Time) {
        (self.tstart, self.end())
    }

    pub fn end(&self) -> Time {
        self.tstart + self.trec + self.tex
    }

    fn rejected(task: &Task, class_index: Option<usize>, at: Time, trec: Time, cause: RejectCause) -> Self {
        ScheduleEntry {
            task_id: task.id,
            class_index,
            slot_id: None,
            tstart: at,
            trec,
            tex: task.tex,
            outcome: Outcome::Rejected(cause),
        }
    }
}

/// `tmax >= tstart + trec + tex`.
pub fn check_deadline(task: &Task, tstart: Time, trec: Time) -> bool {
    task.tmax >= tstart + trec + task.tex
}

/// The three strategy/policy combinations under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyKind {
    Orderly,
    RpiuLoad,
    RpiuDeadline,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 3] = [
        StrategyKind::Orderly,
        StrategyKind::RpiuDeadline,
        StrategyKind::RpiuLoad,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Orderly => "orderly",
            StrategyKind::RpiuLoad => "rpiu-load",
            StrategyKind::RpiuDeadline => "rpiu-deadline",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "orderly" => Ok(StrategyKind::Orderly),
            "rpiu-load" => Ok(StrategyKind::RpiuLoad),
            "rpiu-deadline" => Ok(StrategyKind::RpiuDeadline),
            other => Err(Error::Usage(format!(
                "unknown strategy `{other}` (expected orderly, rpiu-load or rpiu-deadline)"
            ))),
        }
    }
}

/// Mutable state of one simulation run.
#[derive(Debug, Clone)]
pub struct SchedulerState {
    pub clock: SimClock,
    pub queues: Vec<ClassQueue>,
    pub slots: Vec<Slot>,
    icap_free_at: Time,
    slot_free_at: Vec<Time>,
    reconfig_fifo: Vec<ScheduleEntry>,
    pub trace: Trace,
}

impl SchedulerState {
    pub fn new(cfg: &FpgaConfig) -> Self {
        let slots = cfg.build_slots();
        SchedulerState {
            clock: SimClock::default(),
            queues: (0..cfg.n_classes()).map(ClassQueue::new).collect(),
            slot_free_at: vec![0; slots.len()],
            slots,
            icap_free_at: 0,
            reconfig_fifo: Vec::new(),
            trace: Trace::default(),
        }
    }

    /// End of the latest committed reconfiguration, 0 before any.
    pub fn tfree_icap(&self) -> Time {
        self.icap_free_at
    }

    /// End of the last committed execution on a slot.
    pub fn slot_free_at(&self, slot: SlotId) -> Time {
        self.slot_free_at[slot]
    }

    /// Earliest time any slot of `class_index` is free.
    pub fn tfree_area(&self, class_index: usize) -> Result<Time> {
        self.earliest_slot(class_index).map(|(_, t)| t)
    }

    fn earliest_slot(&self, class_index: usize) -> Result<(SlotId, Time)> {
        self.slots
            .iter()
            .filter(|s| s.class_index == class_index)
            .map(|s| (s.id, self.slot_free_at[s.id]))
            .min_by_key(|&(id, t)| (t, id))
            .ok_or_else(|| Error::Config(format!("class {class_index} has no slots")))
    }

    /// Entries committed by the Orderly strategy, in reconfiguration order.
    pub fn reconfig_fifo(&self) -> &[ScheduleEntry] {
        &self.reconfig_fifo
    }

    /// Decides `task` at its arrival: start as soon as the port, a slot of
    /// its class and the task itself are all available, or reject.
    pub fn orderly_on_arrival(&mut self, cfg: &FpgaConfig, task: &Task) -> Result<ScheduleEntry> {
        let Some(class) = select_queue(task, cfg) else {
            let entry = ScheduleEntry::rejected(task, None, task.tarr, 0, RejectCause::Unclassifiable);
            self.trace.push(entry);
            return Ok(entry);
        };
        let trec = cfg.class(class).trec;
        let (slot, area_free) = self.earliest_slot(class)?;
        let tstart = self.icap_free_at.max(area_free).max(task.tarr);

        let entry = if check_deadline(task, tstart, trec) {
            let entry = ScheduleEntry {
                task_id: task.id,
                class_index: Some(class),
                slot_id: Some(slot),
                tstart,
                trec,
                tex: task.tex,
                outcome: Outcome::Executed,
            };
            self.icap_free_at = tstart + trec;
            self.slot_free_at[slot] = entry.end();
            self.reconfig_fifo.push(entry);
            entry
        } else {
            ScheduleEntry::rejected(task, Some(class), tstart, trec, RejectCause::Deadline)
        };
        self.trace.push(entry);
        Ok(entry)
    }

    /// Queues an arriving task for RPIU, rejecting it at once if it fits no class.
    pub fn rpiu_on_arrival(&mut self, cfg: &FpgaConfig, task: &Task) -> Result<Option<usize>> {
        match select_queue(task, cfg) {
            Some(class) => {
                self.queues[class].enqueue(*task, cfg)?;
                Ok(Some(class))
            }
            None => {
                let entry = ScheduleEntry::rejected(task, None, task.tarr, 0, RejectCause::Unclassifiable);
                self.trace.push(entry);
                Ok(None)
            }
        }
    }

    /// Earliest free time of the class's slots and the head of its queue.
    pub fn free_a(&self, class_index: usize) -> Result<(Time, Option<&Task>)> {
        Ok((self.tfree_area(class_index)?, self.queues[class_index].head()))
    }

    /// Every (queue head, free slot) pair where the head fits the slot.
    ///
    /// Empty unless the port is free at `now` and some slot is free.
    pub fn strategy_rpiu(&self, cfg: &FpgaConfig, now: Time) -> Vec<Candidate> {
        if self.icap_free_at > now {
            return Vec::new();
        }
        let free: Vec<&Slot> = self.slots.iter().filter(|s| s.is_free()).collect();
        self.queues
            .iter()
            .filter_map(|q| q.head().map(|head| (q, head)))
            .flat_map(|(q, head)| {
                let trec = cfg.class(q.class_index()).trec;
                free.iter()
                    .filter(move |slot| fit(slot, &cfg.class(slot.class_index).capacity, head))
                    .map(move |slot| {
                        Candidate::new(
                            q.class_index(),
                            q.load(),
                            *head,
                            trec,
                            slot.id,
                            cfg.class(slot.class_index).capacity,
                            now,
                        )
                    })
            })
            .collect()
    }

    /// Runs arbitration at `now` until one task is committed or no candidate
    /// is left. Selected candidates that would miss their deadline are
    /// rejected and removed from their queue before re-arbitrating.
    pub fn rpiu_commit(&mut self, cfg: &FpgaConfig, arbiter: &mut dyn Arbiter, now: Time) -> Option<ScheduleEntry> {
        loop {
            let candidates = self.strategy_rpiu(cfg, now);
            let chosen = candidates[arbiter.select(&candidates, now)?];
            let task = self.queues[chosen.queue]
                .delete(chosen.task.id)
                .expect("candidate is a queue head");
            let tstart = now.max(self.icap_free_at).max(self.slot_free_at[chosen.slot]);

            if !check_deadline(&task, tstart, chosen.trec) {
                self.trace.push(ScheduleEntry::rejected(
                    &task,
                    Some(chosen.queue),
                    now,
                    chosen.trec,
                    RejectCause::Deadline,
                ));
                continue;
            }

            let entry = ScheduleEntry {
                task_id: task.id,
                class_index: Some(chosen.queue),
                slot_id: Some(chosen.slot),
                tstart,
                trec: chosen.trec,
                tex: task.tex,
                outcome: Outcome::Executed,
            };
            self.slots[chosen.slot].begin_reconfiguration(task.id, tstart, tstart + chosen.trec);
            self.icap_free_at = tstart + chosen.trec;
            self.slot_free_at[chosen.slot] = entry.end();
            self.trace.push(entry);
            return Some(entry);
        }
    }

    /// Rejects everything still queued.
    pub fn sweep_unserved(&mut self, now: Time, cfg: &FpgaConfig) {
        let mut leftover: Vec<(usize, Task)> = self
            .queues
            .iter_mut()
            .flat_map(|q| {
                let class = q.class_index();
                q.drain().map(move |t| (class, t))
            })
            .collect();
        leftover.sort_by_key(|(_, t)| t.id);
        for (class, task) in leftover {
            let trec = cfg.class(class).trec;
            self.trace.push(ScheduleEntry::rejected(
                &task,
                Some(class),
                now,
                trec,
                RejectCause::Unserved,
            ));
        }
    }
}
