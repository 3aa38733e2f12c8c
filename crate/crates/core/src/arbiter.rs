//! Reconfiguration-port arbitration among queue heads.
//!
//! A [`Candidate`] pairs the head of one class queue with one free slot it
//! fits. Both policies return an index into the candidate list.

use std::cmp::Reverse;

use crate::model::{pairs, PairWeights, Resources, Slot, SlotId, Task, Time};

/// Signed slack left to a task if its reconfiguration started now.
pub type Margin = i64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Candidate {
    pub queue: usize,
    /// Number of tasks waiting in `queue` when the candidate was built.
    pub queue_load: usize,
    pub task: Task,
    /// Reconfiguration time the task pays (its class `trec`).
    pub trec: Time,
    pub slot: SlotId,
    pub slot_capacity: Resources,
    pub tmargin: Margin,
}

impl Candidate {
    pub fn new(
        queue: usize,
        queue_load: usize,
        task: Task,
        trec: Time,
        slot: SlotId,
        slot_capacity: Resources,
        now: Time,
    ) -> Self {
        Candidate {
            queue,
            queue_load,
            task,
            trec,
            slot,
            slot_capacity,
            tmargin: margin(&task, trec, now),
        }
    }

    /// Distance in LUT/flip-flop pairs between the slot and the task.
    pub fn fit_distance(&self, w: &PairWeights) -> u64 {
        pairs(&self.slot_capacity, w).abs_diff(pairs(&self.task.demand, w))
    }
}

/// `tmax - (now + trec + tex)`.
pub fn margin(task: &Task, trec: Time, now: Time) -> Margin {
    task.tmax as Margin - (now + trec + task.tex) as Margin
}

/// Whether a free slot of the given capacity can host `task`.
pub fn fit(slot: &Slot, capacity: &Resources, task: &Task) -> bool {
    debug_assert!(slot.is_free(), "fit is only asked of free slots");
    task.demand.fits(capacity)
}

/// True iff `b` fills `slot` strictly better than `a`. Exact ties keep `a`.
pub fn compare_fit(a: &Task, b: &Task, slot: &Resources, w: &PairWeights) -> bool {
    let target = pairs(slot, w);
    target.abs_diff(pairs(&b.demand, w)) < target.abs_diff(pairs(&a.demand, w))
}

/// The previously served queue, skipped once so one class cannot hog the port.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ArbiterState {
    pub old_sel: Option<usize>,
}

/// Head of the most loaded queue, skipping `old_sel` unless it is the only
/// queue with a fitting head. Ties go to the lowest class index.
///
/// Within the winning queue the tightest-fitting slot is used.
pub fn arbiter_most_loaded<'a>(
    candidates: &'a [Candidate],
    state: &mut ArbiterState,
    weights: &PairWeights,
) -> Option<&'a Candidate> {
    most_loaded_index(candidates, state, weights).map(|i| &candidates[i])
}

fn most_loaded_index(candidates: &[Candidate], state: &mut ArbiterState, weights: &PairWeights) -> Option<usize> {
    let pick = |skip: Option<usize>| {
        candidates
            .iter()
            .enumerate()
            .filter(|(_, c)| Some(c.queue) != skip)
            .max_by_key(|(_, c)| {
                (
                    c.queue_load,
                    Reverse(c.queue),
                    Reverse(c.task.id),
                    Reverse(c.fit_distance(weights)),
                    Reverse(c.slot),
                )
            })
            .map(|(i, _)| i)
    };
    let chosen = match pick(state.old_sel) {
        Some(i) => i,
        None => {
            state.old_sel = None;
            pick(None)?
        }
    };
    state.old_sel = Some(candidates[chosen].queue);
    Some(chosen)
}

/// Candidate with the smallest margin; ties prefer the tighter fit, then the
/// lowest class index, task id and slot id.
pub fn arbiter_deadline<'a>(candidates: &'a [Candidate], weights: &PairWeights) -> Option<&'a Candidate> {
    deadline_index(candidates, weights).map(|i| &candidates[i])
}

fn deadline_index(candidates: &[Candidate], weights: &PairWeights) -> Option<usize> {
    candidates
        .iter()
        .enumerate()
        .min_by_key(|(_, c)| (c.tmargin, c.fit_distance(weights), c.queue, c.task.id, c.slot))
        .map(|(i, _)| i)
}

/// Port arbitration policy used by the RPIU strategy.
pub trait Arbiter {
    fn name(&self) -> &'static str;

    /// Index of the winning candidate, or `None` if the list is empty.
    fn select(&mut self, candidates: &[Candidate], now: Time) -> Option<usize>;
}

#[derive(Debug, Clone, Default)]
pub struct MostLoadedArbiter {
    pub state: ArbiterState,
    pub weights: PairWeights,
}

impl MostLoadedArbiter {
    pub fn new(weights: PairWeights) -> Self {
        MostLoadedArbiter {
            state: ArbiterState::default(),
            weights,
        }
    }
}

impl Arbiter for MostLoadedArbiter {
    fn name(&self) -> &'static str {
        "most-loaded"
    }

    fn select(&mut self, candidates: &[Candidate], _now: Time) -> Option<usize> {
        most_loaded_index(candidates, &mut self.state, &self.weights)
    }
}

#[derive(Debug, Clone, Default)]
pub struct DeadlineArbiter {
    pub weights: PairWeights,
}

impl DeadlineArbiter {
    pub fn new(weights: PairWeights) -> Self {
        DeadlineArbiter { weights }
    }
}

impl Arbiter for DeadlineArbiter {
    fn name(&self) -> &'static str {
        "deadline"
    }

    fn select(&mut self, candidates: &[Candidate], _now: Time) -> Option<usize> {
        deadline_index(candidates, &self.weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DEFAULT_CLASS_CAPACITIES;

    fn task(id: usize, tex: Time, tmax: Time, demand: Resources) -> Task {
        Task::new(id, 0, tex, tmax, demand)
    }

    fn cand(queue: usize, load: usize, task: Task, slot: SlotId, now: Time) -> Candidate {
        Candidate::new(queue, load, task, 1, slot, DEFAULT_CLASS_CAPACITIES[3], now)
    }

    #[test]
    fn fit_examples() {
        let c3 = Slot::new(3, 3);
        let c2 = Slot::new(2, 2);
        assert!(fit(
            &c3,
            &DEFAULT_CLASS_CAPACITIES[3],
            &task(0, 1, 9, Resources::new(200, 4, 16))
        ));
        assert!(!fit(
            &c2,
            &DEFAULT_CLASS_CAPACITIES[2],
            &task(0, 1, 9, Resources::new(500, 19, 10))
        ));
        assert!(fit(
            &c2,
            &DEFAULT_CLASS_CAPACITIES[2],
            &task(0, 1, 9, Resources::new(600, 10, 70))
        ));
    }

    #[test]
    fn most_loaded_examples() {
        let w = PairWeights::default();
        let small = Resources::new(10, 0, 0);
        let cands = [
            cand(0, 5, task(1, 1, 50, small), 3, 0),
            cand(1, 2, task(2, 1, 50, small), 3, 0),
        ];

        let mut st = ArbiterState::default();
        assert_eq!(arbiter_most_loaded(&cands, &mut st, &w).unwrap().queue, 0);
        assert_eq!(st.old_sel, Some(0));

        let mut st = ArbiterState { old_sel: Some(0) };
        assert_eq!(arbiter_most_loaded(&cands, &mut st, &w).unwrap().queue, 1);
        assert_eq!(st.old_sel, Some(1));

        let mut st = ArbiterState { old_sel: Some(0) };
        assert_eq!(arbiter_most_loaded(&cands[..1], &mut st, &w).unwrap().queue, 0);
        assert_eq!(st.old_sel, Some(0));

        let mut st = ArbiterState { old_sel: Some(2) };
        assert!(arbiter_most_loaded(&[], &mut st, &w).is_none());
    }

    #[test]
    fn most_loaded_prefers_lower_class_on_ties() {
        let w = PairWeights::default();
        let small = Resources::new(10, 0, 0);
        let cands = [
            cand(2, 3, task(7, 1, 50, small), 3, 0),
            cand(1, 3, task(9, 1, 50, small), 3, 0),
        ];
        let mut st = ArbiterState::default();
        assert_eq!(arbiter_most_loaded(&cands, &mut st, &w).unwrap().queue, 1);
    }

    #[test]
    fn most_loaded_alternates_between_two_queues() {
        let w = PairWeights::default();
        let small = Resources::new(10, 0, 0);
        let mut st = ArbiterState::default();
        let mut last = None;
        for round in 0..10 {
            let cands = [
                cand(0, 9 - round % 3, task(round, 1, 50, small), 3, 0),
                cand(1, 2, task(100 + round, 1, 50, small), 3, 0),
            ];
            let q = arbiter_most_loaded(&cands, &mut st, &w).unwrap().queue;
            assert_ne!(Some(q), last);
            last = Some(q);
        }
    }

    #[test]
    fn deadline_examples() {
        let w = PairWeights::default();
        let small = Resources::new(10, 0, 0);
        // margins: tmax - (0 + 1 + 1)
        let cands = [
            cand(0, 1, task(1, 1, 6, small), 3, 0),
            cand(1, 1, task(2, 1, 11, small), 3, 0),
        ];
        assert_eq!(cands[0].tmargin, 4);
        assert_eq!(cands[1].tmargin, 9);
        assert_eq!(arbiter_deadline(&cands, &w).unwrap().task.id, 1);

        let late = [cand(0, 1, task(3, 5, 4, small), 3, 2)];
        assert!(late[0].tmargin < 0);
        assert_eq!(arbiter_deadline(&late, &w).unwrap().task.id, 3);
        assert!(arbiter_deadline(&[], &w).is_none());
    }

    #[test]
    fn deadline_tie_prefers_closer_fit() {
        // Unit CLB weights: pairs equal CLB counts.
        let w = PairWeights::new(1, 0, 0);
        let slot = Resources::new(2000, 0, 0);
        let t1 = task(1, 1, 20, Resources::new(900, 0, 0));
        let t2 = task(2, 1, 20, Resources::new(1800, 0, 0));
        let cands = [
            Candidate::new(0, 1, t1, 1, 0, slot, 0),
            Candidate::new(1, 1, t2, 1, 0, slot, 0),
        ];
        assert_eq!(cands[0].tmargin, cands[1].tmargin);
        assert_eq!(arbiter_deadline(&cands, &w).unwrap().task.id, 2);
    }

    #[test]
    fn compare_fit_examples() {
        let w = PairWeights::new(1, 0, 0);
        let slot = Resources::new(2000, 0, 0);
        let t = |clbs| task(0, 1, 9, Resources::new(clbs, 0, 0));
        assert!(compare_fit(&t(900), &t(1800), &slot, &w));
        assert!(!compare_fit(&t(900), &t(900), &slot, &w));
        assert!(!compare_fit(&t(1950), &t(2100), &slot, &w));
        assert!(compare_fit(&t(2100), &t(1950), &slot, &w));
    }

    #[test]
    fn trait_objects_report_indices() {
        let w = PairWeights::default();
        let small = Resources::new(10, 0, 0);
        let cands = [
            cand(0, 1, task(1, 1, 30, small), 3, 0),
            cand(1, 4, task(2, 1, 6, small), 3, 0),
        ];
        let mut arbiters: Vec<Box<dyn Arbiter>> =
            vec![Box::new(MostLoadedArbiter::new(w)), Box::new(DeadlineArbiter::new(w))];
        assert_eq!(arbiters[0].select(&cands, 0), Some(1));
        assert_eq!(arbiters[1].select(&cands, 0), Some(1));
        assert_eq!(arbiters[0].select(&cands[..1], 0), Some(0));
    }
}
