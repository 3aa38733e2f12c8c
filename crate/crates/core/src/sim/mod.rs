//! Discrete-event driver.
//!
//! Events at one instant are handled execution ends first, then
//! reconfiguration ends, then arrivals; the RPIU hook runs once after all of
//! them so that a slot or port freed at `t` is visible to a task arriving at
//! `t`.

mod report;
mod trace;

use std::cmp::Reverse;
use std::collections::BinaryHeap;

pub use report::{improvement, linear_fit, LinearFit, SimReport, REPORT_HEADER};
pub use trace::{validate_trace, Busy, Trace, Violation, ViolationKind, TRACE_HEADER};

use crate::arbiter::{Arbiter, DeadlineArbiter, MostLoadedArbiter};
use crate::benchgen::compute_arr;
use crate::error::{Error, Result};
use crate::model::{FpgaConfig, SlotId, SlotState, Task, Time};
use crate::sched::{SchedulerState, StrategyKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EventKind {
    ExecEnd(SlotId),
    ReconfigEnd(SlotId),
    /// Index into the task list.
    Arrival(usize),
}

/// Ordered by time, then kind (completions before arrivals), then id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Event {
    pub time: Time,
    pub kind: EventKind,
}

/// Checks the ordering and per-task constraints a simulator input must meet.
pub fn check_task_order(tasks: &[Task]) -> Result<()> {
    for (i, t) in tasks.iter().enumerate() {
        t.validate().map_err(|m| Error::parse("task set", i + 1, m))?;
        if let Some(prev) = i.checked_sub(1).map(|p| &tasks[p]) {
            if (t.tarr, t.id) <= (prev.tarr, prev.id) || t.id <= prev.id {
                return Err(Error::parse(
                    "task set",
                    i + 1,
                    format!("task {} is out of (arrival, id) order", t.id),
                ));
            }
        }
    }
    Ok(())
}

/// Replays `tasks` under `strategy` and returns the trace only.
pub fn simulate(tasks: &[Task], strategy: StrategyKind, cfg: &FpgaConfig) -> Result<Trace> {
    check_task_order(tasks)?;
    let mut state = SchedulerState::new(cfg);
    match strategy {
        StrategyKind::Orderly => {
            for task in tasks {
                state.clock.advance_to(task.tarr);
                state.orderly_on_arrival(cfg, task)?;
            }
        }
        StrategyKind::RpiuLoad => run_rpiu(&mut state, tasks, cfg, &mut MostLoadedArbiter::new(cfg.pair_weights))?,
        StrategyKind::RpiuDeadline => run_rpiu(&mut state, tasks, cfg, &mut DeadlineArbiter::new(cfg.pair_weights))?,
    }
    Ok(state.trace)
}

fn run_rpiu(state: &mut SchedulerState, tasks: &[Task], cfg: &FpgaConfig, arbiter: &mut dyn Arbiter) -> Result<()> {
    let mut events: BinaryHeap<Reverse<Event>> = tasks
        .iter()
        .enumerate()
        .map(|(i, t)| {
            Reverse(Event {
                time: t.tarr,
                kind: EventKind::Arrival(i),
            })
        })
        .collect();

    while let Some(&Reverse(Event { time: now, .. })) = events.peek() {
        state.clock.advance_to(now);
        while let Some(Reverse(ev)) = events.peek().copied().filter(|e| e.0.time == now) {
            events.pop();
            match ev.kind {
                EventKind::ExecEnd(slot) => state.slots[slot].release(now),
                EventKind::ReconfigEnd(slot) => {
                    let until = state.slot_free_at(slot);
                    state.slots[slot].begin_execution(now, until);
                }
                EventKind::Arrival(i) => {
                    state.rpiu_on_arrival(cfg, &tasks[i])?;
                }
            }
        }
        if let Some(entry) = state.rpiu_commit(cfg, arbiter, now) {
            let slot = entry.slot_id.expect("executed entries own a slot");
            let (_, rec_end) = entry.reconfiguration();
            events.push(Reverse(Event {
                time: rec_end,
                kind: EventKind::ReconfigEnd(slot),
            }));
            events.push(Reverse(Event {
                time: entry.end(),
                kind: EventKind::ExecEnd(slot),
            }));
        }
    }
    debug_assert!(state.slots.iter().all(|s| s.state == SlotState::Free));
    let now = state.clock.now();
    state.sweep_unserved(now, cfg);
    Ok(())
}

/// Runs one strategy over a task set and computes its report, including the
/// improvement over an Orderly run of the same set.
pub fn run_simulation(tasks: &[Task], strategy: StrategyKind, cfg: &FpgaConfig) -> Result<(Trace, SimReport)> {
    let trace = simulate(tasks, strategy, cfg)?;
    let baseline = match strategy {
        StrategyKind::Orderly => None,
        _ => Some(simulate(tasks, StrategyKind::Orderly, cfg)?),
    };
    let report = build_report(tasks, strategy, cfg, &trace, baseline.as_ref());
    Ok((trace, report))
}

fn build_report(
    tasks: &[Task],
    strategy: StrategyKind,
    cfg: &FpgaConfig,
    trace: &Trace,
    baseline: Option<&Trace>,
) -> SimReport {
    let n_executed = trace.executed().count();
    let mut executed_per_class = vec![0; cfg.n_classes()];
    for e in trace.executed() {
        if let Some(c) = e.class_index {
            executed_per_class[c] += 1;
        }
    }
    let improvement_vs_baseline = match (baseline, tasks.len()) {
        (Some(b), n) if n > 0 => improvement(n_executed, b.executed().count(), n),
        _ => 0.0,
    };
    SimReport {
        strategy,
        n_tasks: tasks.len(),
        n_executed,
        n_rejected: trace.entries().len() - n_executed,
        achieved_arr: compute_arr::<f64>(tasks, cfg).ok().filter(|_| !tasks.is_empty()),
        improvement_vs_baseline,
        executed_per_class,
        makespan: trace.executed().map(|e| e.end()).max().unwrap_or(0),
    }
}
