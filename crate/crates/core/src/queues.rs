//! Per-class FIFO waiting queues.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::model::{FpgaConfig, Task, TaskId};

/// Smallest class whose capacity dominates the task demand, if any.
pub fn select_queue(task: &Task, cfg: &FpgaConfig) -> Option<usize> {
    cfg.classes.iter().position(|class| task.demand.fits(&class.capacity))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassQueue {
    class_index: usize,
    tasks: VecDeque<Task>,
}

impl ClassQueue {
    pub fn new(class_index: usize) -> Self {
        ClassQueue {
            class_index,
            tasks: VecDeque::new(),
        }
    }

    pub fn class_index(&self) -> usize {
        self.class_index
    }

    /// Appends `task`, which must classify into this queue's class.
    pub fn enqueue(&mut self, task: Task, cfg: &FpgaConfig) -> Result<()> {
        let actual = select_queue(&task, cfg);
        if actual != Some(self.class_index) {
            return Err(Error::ClassMismatch {
                task: task.id,
                queue: self.class_index,
                actual,
            });
        }
        debug_assert!(self.tasks.back().is_none_or(|t| t.id < task.id));
        self.tasks.push_back(task);
        Ok(())
    }

    pub fn head(&self) -> Option<&Task> {
        self.tasks.front()
    }

    pub fn load(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    /// Removes the task with `id`, wherever it sits.
    pub fn delete(&mut self, id: TaskId) -> Option<Task> {
        let pos = self.tasks.iter().position(|t| t.id == id)?;
        self.tasks.remove(pos)
    }

    pub fn drain(&mut self) -> impl Iterator<Item = Task> + '_ {
        self.tasks.drain(..)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Task> {
        self.tasks.iter()
    }
}

/// Load with the `-1` sentinel for an absent selection.
pub fn load_or_sentinel(queue: Option<&ClassQueue>) -> i64 {
    queue.map_or(-1, |q| q.load() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Resources, DEFAULT_CLASS_CAPACITIES};
    use proptest::prelude::*;

    fn task(id: TaskId, demand: Resources) -> Task {
        Task::new(id, id as u64, 1, id as u64 + 100, demand)
    }

    #[test]
    fn select_queue_examples() {
        let cfg = FpgaConfig::xc5vsx50t();
        assert_eq!(select_queue(&task(0, Resources::new(200, 4, 16)), &cfg), Some(0));
        assert_eq!(select_queue(&task(0, Resources::new(500, 2, 10)), &cfg), Some(2));
        assert_eq!(select_queue(&task(0, Resources::new(3000, 100, 200)), &cfg), None);
        // The last class is reachable.
        assert_eq!(select_queue(&task(0, Resources::new(2000, 10, 10)), &cfg), Some(3));
        // C2 has fewer BRAMs than C1.
        assert_eq!(select_queue(&task(0, Resources::new(400, 19, 10)), &cfg), Some(1));
        assert_eq!(select_queue(&task(0, Resources::new(600, 19, 10)), &cfg), Some(3));
    }

    #[test]
    fn fifo_accessors() {
        let cfg = FpgaConfig::xc5vsx50t();
        let small = Resources::new(10, 0, 0);
        let mut q = ClassQueue::new(0);
        assert_eq!(q.head(), None);
        assert_eq!(q.load(), 0);
        assert_eq!(load_or_sentinel(None), -1);

        q.enqueue(task(5, small), &cfg).unwrap();
        assert_eq!(q.head().unwrap().id, 5);

        let mut q = ClassQueue::new(0);
        q.enqueue(task(3, small), &cfg).unwrap();
        q.enqueue(task(7, small), &cfg).unwrap();
        assert_eq!(q.iter().map(|t| t.id).collect::<Vec<_>>(), vec![3, 7]);
        assert_eq!(q.load(), 2);
        assert_eq!(load_or_sentinel(Some(&q)), 2);
        assert_eq!(q.head().unwrap().id, 3);
        q.delete(3).unwrap();
        assert_eq!(q.head().unwrap().id, 7);
    }

    #[test]
    fn enqueue_rejects_wrong_class() {
        let cfg = FpgaConfig::xc5vsx50t();
        let mut q = ClassQueue::new(1);
        let err = q.enqueue(task(0, Resources::new(10, 0, 0)), &cfg).unwrap_err();
        assert!(matches!(
            err,
            Error::ClassMismatch {
                queue: 1,
                actual: Some(0),
                ..
            }
        ));
    }

    #[derive(Debug, Clone)]
    enum Op {
        Push(Resources),
        PopHead(usize),
        Delete(usize),
    }

    fn demand() -> impl Strategy<Value = Resources> {
        (0u32..2600, 0u32..100, 0u32..170).prop_map(|(c, b, d)| Resources::new(c, b, d))
    }

    proptest! {
        #[test]
        fn selection_is_minimal(d in demand()) {
            let cfg = FpgaConfig::xc5vsx50t();
            let t = task(0, d);
            match select_queue(&t, &cfg) {
                Some(j) => {
                    prop_assert!(d.fits(&DEFAULT_CLASS_CAPACITIES[j]));
                    for lower in &DEFAULT_CLASS_CAPACITIES[..j] {
                        prop_assert!(!d.fits(lower));
                    }
                }
                None => prop_assert!(DEFAULT_CLASS_CAPACITIES.iter().all(|c| !d.fits(c))),
            }
        }

        #[test]
        fn arrival_order_is_preserved(classes in proptest::collection::vec(0usize..4, 52)) {
            let cfg = FpgaConfig::xc5vsx50t();
            let mut queues: Vec<ClassQueue> = (0..4).map(ClassQueue::new).collect();
            for (id, c) in classes.iter().enumerate() {
                let t = task(id, DEFAULT_CLASS_CAPACITIES[*c]);
                let j = select_queue(&t, &cfg).unwrap();
                queues[j].enqueue(t, &cfg).unwrap();
            }
            let mut seen = Vec::new();
            for q in &queues {
                let ids: Vec<_> = q.iter().map(|t| t.id).collect();
                prop_assert!(ids.windows(2).all(|w| w[0] < w[1]));
                seen.extend(ids);
            }
            seen.sort_unstable();
            prop_assert_eq!(seen, (0..52).collect::<Vec<_>>());
        }

        #[test]
        fn matches_a_vec_model(ops in proptest::collection::vec(
            prop_oneof![
                demand().prop_map(Op::Push),
                (0usize..4).prop_map(Op::PopHead),
                (0usize..64).prop_map(Op::Delete),
            ], 0..80)) {
            let cfg = FpgaConfig::xc5vsx50t();
            let mut queues: Vec<ClassQueue> = (0..4).map(ClassQueue::new).collect();
            let mut model: Vec<Vec<TaskId>> = vec![Vec::new(); 4];
            let mut next = 0;
            for op in ops {
                match op {
                    Op::Push(d) => {
                        let t = task(next, d);
                        next += 1;
                        if let Some(j) = select_queue(&t, &cfg) {
                            queues[j].enqueue(t, &cfg).unwrap();
                            model[j].push(t.id);
                        }
                    }
                    Op::PopHead(j) => {
                        let head = queues[j].head().map(|t| t.id);
                        prop_assert_eq!(head, model[j].first().copied());
                        if let Some(id) = head {
                            queues[j].delete(id);
                            model[j].remove(0);
                        }
                    }
                    Op::Delete(id) => {
                        for (q, m) in queues.iter_mut().zip(model.iter_mut()) {
                            let removed = q.delete(id).map(|t| t.id);
                            let expected = m.iter().position(|&x| x == id).map(|p| m.remove(p));
                            prop_assert_eq!(removed, expected);
                        }
                    }
                }
                for (q, m) in queues.iter().zip(&model) {
                    prop_assert_eq!(q.load(), m.len());
                    prop_assert_eq!(q.iter().map(|t| t.id).collect::<Vec<_>>(), m.clone());
                }
            }
        }
    }
}
