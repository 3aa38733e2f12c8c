//! Resource vectors, tasks, task classes, slots and the device configuration.
//!
//! Time is an unsigned count of discrete units. One unit is the
//! reconfiguration time of the smallest task class.

use std::fmt;
use std::ops::Add;

use crate::error::{Error, Result};

/// Discrete simulation time.
pub type Time = u64;

/// Arrival-order ordinal of a task.
pub type TaskId = usize;

/// Global slot identifier, ordered by class then by slot within the class.
pub type SlotId = usize;

/// A count of CLBs, block RAMs and DSP blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Resources {
    pub clbs: u32,
    pub brams: u32,
    pub dsps: u32,
}

impl Resources {
    pub const ZERO: Resources = Resources::new(0, 0, 0);

    pub const fn new(clbs: u32, brams: u32, dsps: u32) -> Self {
        Resources { clbs, brams, dsps }
    }

    /// Componentwise `self <= capacity`.
    pub fn fits(&self, capacity: &Resources) -> bool {
        self.clbs <= capacity.clbs && self.brams <= capacity.brams && self.dsps <= capacity.dsps
    }

    pub fn pairs(&self, weights: &PairWeights) -> u64 {
        pairs(self, weights)
    }
}

impl Add for Resources {
    type Output = Resources;

    fn add(self, rhs: Resources) -> Resources {
        Resources {
            clbs: self.clbs + rhs.clbs,
            brams: self.brams + rhs.brams,
            dsps: self.dsps + rhs.dsps,
        }
    }
}

impl std::iter::Sum for Resources {
    fn sum<I: Iterator<Item = Resources>>(iter: I) -> Self {
        iter.fold(Resources::ZERO, Add::add)
    }
}

impl fmt::Display for Resources {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.clbs, self.brams, self.dsps)
    }
}

pub fn resources_fits(demand: &Resources, capacity: &Resources) -> bool {
    demand.fits(capacity)
}

/// LUT/flip-flop pair equivalents of each resource kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairWeights {
    pub per_clb: u32,
    pub per_bram: u32,
    pub per_dsp: u32,
}

impl PairWeights {
    pub const fn new(per_clb: u32, per_bram: u32, per_dsp: u32) -> Self {
        PairWeights {
            per_clb,
            per_bram,
            per_dsp,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.per_clb == 0 {
            return Err(Error::Config("pair weight per CLB must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for PairWeights {
    /// Eight pairs per Virtex-5 CLB; BRAM and DSP equivalents are nominal.
    fn default() -> Self {
        PairWeights::new(8, 32, 16)
    }
}

/// Size of a resource vector in LUT/flip-flop pairs.
pub fn pairs(r: &Resources, w: &PairWeights) -> u64 {
    u64::from(r.clbs) * u64::from(w.per_clb)
        + u64::from(r.brams) * u64::from(w.per_bram)
        + u64::from(r.dsps) * u64::from(w.per_dsp)
}

/// A unit of hardware work, known to the scheduler only from its arrival on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Task {
    pub id: TaskId,
    /// Arrival time.
    pub tarr: Time,
    /// Execution time, excluding reconfiguration.
    pub tex: Time,
    /// Absolute completion deadline.
    pub tmax: Time,
    pub demand: Resources,
}

impl Task {
    pub fn new(id: TaskId, tarr: Time, tex: Time, tmax: Time, demand: Resources) -> Self {
        Task {
            id,
            tarr,
            tex,
            tmax,
            demand,
        }
    }

    /// Checks `tex >= 1` and `tmax > tarr`.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.tex == 0 {
            return Err(format!("task {}: execution time must be at least 1", self.id));
        }
        if self.tmax <= self.tarr {
            return Err(format!(
                "task {}: deadline {} must be later than arrival {}",
                self.id, self.tmax, self.tarr
            ));
        }
        Ok(())
    }
}

/// A slot capacity profile. Every task of the class pays the class `trec`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskClass {
    pub index: usize,
    pub capacity: Resources,
    pub trec: Time,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotState {
    Free,
    Reconfiguring { task: TaskId, until: Time },
    Executing { task: TaskId, until: Time },
}

/// Runtime instance of a task class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub id: SlotId,
    pub class_index: usize,
    pub state: SlotState,
}

impl Slot {
    pub fn new(id: SlotId, class_index: usize) -> Self {
        Slot {
            id,
            class_index,
            state: SlotState::Free,
        }
    }

    pub fn is_free(&self) -> bool {
        self.state == SlotState::Free
    }

    /// Free -> Reconfiguring. Panics on any other source state or an empty interval.
    pub fn begin_reconfiguration(&mut self, task: TaskId, now: Time, until: Time) {
        assert!(self.is_free(), "slot {} is not free: {:?}", self.id, self.state);
        assert!(until > now, "reconfiguration must take at least one unit");
        self.state = SlotState::Reconfiguring { task, until };
    }

    /// Reconfiguring -> Executing.
    pub fn begin_execution(&mut self, now: Time, until: Time) {
        let SlotState::Reconfiguring { task, until: rec_end } = self.state else {
            panic!("slot {} is not reconfiguring: {:?}", self.id, self.state);
        };
        assert_eq!(rec_end, now, "slot {} reconfiguration ends at {rec_end}", self.id);
        assert!(until > now, "execution must take at least one unit");
        self.state = SlotState::Executing { task, until };
    }

    /// Executing -> Free.
    pub fn release(&mut self, now: Time) {
        let SlotState::Executing { until, .. } = self.state else {
            panic!("slot {} is not executing: {:?}", self.id, self.state);
        };
        assert_eq!(until, now, "slot {} execution ends at {until}", self.id);
        self.state = SlotState::Free;
    }
}

/// How the class reconfiguration time is derived from slot area.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrecRule {
    /// Proportional to CLB count.
    #[default]
    Clbs,
    /// Proportional to LUT/flip-flop pairs.
    Pairs,
}

/// Device totals, the class table and slot layout.
#[derive(Debug, Clone, PartialEq)]
pub struct FpgaConfig {
    pub total: Resources,
    pub classes: Vec<TaskClass>,
    pub slots_per_class: Vec<usize>,
    pub pair_weights: PairWeights,
    pub trec_rule: TrecRule,
    /// Allowed relative overcommit per component when summing slot capacities.
    pub overcommit_slack: f64,
}

/// Virtex-5 XC5VSX50T device totals.
pub const XC5VSX50T: Resources = Resources::new(4080, 132, 288);

/// The four bundled class capacities, smallest first.
pub const DEFAULT_CLASS_CAPACITIES: [Resources; 4] = [
    Resources::new(204, 4, 16),
    Resources::new(480, 20, 32),
    Resources::new(1000, 18, 80),
    Resources::new(2400, 90, 160),
];

/// Reconfiguration time for a class, relative to class 0 (always 1 unit).
pub fn trec_of_class(class: &TaskClass, cfg: &FpgaConfig) -> Result<Time> {
    let base = cfg
        .classes
        .first()
        .ok_or_else(|| Error::Config("no task classes configured".into()))?;
    trec_for_capacity(&class.capacity, &base.capacity, cfg.trec_rule, &cfg.pair_weights)
}

fn trec_for_capacity(capacity: &Resources, base: &Resources, rule: TrecRule, weights: &PairWeights) -> Result<Time> {
    let (area, unit) = match rule {
        TrecRule::Clbs => (u64::from(capacity.clbs), u64::from(base.clbs)),
        TrecRule::Pairs => (pairs(capacity, weights), pairs(base, weights)),
    };
    if unit == 0 {
        return Err(Error::Config("class 0 has zero reconfigurable area".into()));
    }
    Ok(area.div_ceil(unit).max(1))
}

/// One component of the device whose slot capacities exceed the total.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityWarning {
    pub component: &'static str,
    pub required: u64,
    pub available: u64,
    /// True when the excess is beyond the configured slack.
    pub exceeds_slack: bool,
}

impl fmt::Display for CapacityWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "slots need {} {} but the device has {}{}",
            self.required,
            self.component,
            self.available,
            if self.exceeds_slack {
                " (beyond slack)"
            } else {
                " (within slack)"
            }
        )
    }
}

impl FpgaConfig {
    /// Builds a configuration and derives each class `trec` unless overridden.
    pub fn new(
        total: Resources,
        capacities: &[Resources],
        slots_per_class: Vec<usize>,
        pair_weights: PairWeights,
        trec_rule: TrecRule,
        trec_overrides: &[Option<Time>],
    ) -> Result<Self> {
        if capacities.is_empty() {
            return Err(Error::Config("no task classes configured".into()));
        }
        if slots_per_class.len() != capacities.len() {
            return Err(Error::Config(format!(
                "{} classes but {} slot counts",
                capacities.len(),
                slots_per_class.len()
            )));
        }
        if let Some(class) = slots_per_class.iter().position(|&n| n == 0) {
            return Err(Error::Config(format!("class {class} has no slots")));
        }
        pair_weights.validate()?;
        let base = capacities[0];
        let classes = capacities
            .iter()
            .enumerate()
            .map(|(index, capacity)| {
                let derived = trec_for_capacity(capacity, &base, trec_rule, &pair_weights)?;
                let trec = match trec_overrides.get(index).copied().flatten() {
                    Some(0) => return Err(Error::Config(format!("class {index}: trec must be at least 1"))),
                    Some(t) => t,
                    None => derived,
                };
                Ok(TaskClass {
                    index,
                    capacity: *capacity,
                    trec,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FpgaConfig {
            total,
            classes,
            slots_per_class,
            pair_weights,
            trec_rule,
            overcommit_slack: 0.01,
        })
    }

    /// Table of four classes on the XC5VSX50T with one slot per class.
    pub fn xc5vsx50t() -> Self {
        FpgaConfig::new(
            XC5VSX50T,
            &DEFAULT_CLASS_CAPACITIES,
            vec![1; DEFAULT_CLASS_CAPACITIES.len()],
            PairWeights::default(),
            TrecRule::Clbs,
            &[],
        )
        .expect("bundled configuration is valid")
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class(&self, index: usize) -> &TaskClass {
        &self.classes[index]
    }

    pub fn n_slots(&self) -> usize {
        self.slots_per_class.iter().sum()
    }

    /// Fresh slots, ids assigned class by class.
    pub fn build_slots(&self) -> Vec<Slot> {
        self.slots_per_class
            .iter()
            .enumerate()
            .flat_map(|(class, &count)| std::iter::repeat_n(class, count))
            .enumerate()
            .map(|(id, class)| Slot::new(id, class))
            .collect()
    }

    /// Sum of all slot capacities.
    pub fn slot_area(&self) -> Resources {
        self.classes
            .iter()
            .zip(&self.slots_per_class)
            .map(|(c, &n)| Resources {
                clbs: c.capacity.clbs * n as u32,
                brams: c.capacity.brams * n as u32,
                dsps: c.capacity.dsps * n as u32,
            })
            .sum()
    }

    /// Components where the slots overcommit the device.
    pub fn capacity_warnings(&self) -> Vec<CapacityWarning> {
        let need = self.slot_area();
        [
            ("CLBs", need.clbs, self.total.clbs),
            ("BRAMs", need.brams, self.total.brams),
            ("DSPs", need.dsps, self.total.dsps),
        ]
        .into_iter()
        .filter(|&(_, required, available)| required > available)
        .map(|(component, required, available)| CapacityWarning {
            component,
            required: u64::from(required),
            available: u64::from(available),
            exceeds_slack: f64::from(required) > f64::from(available) * (1.0 + self.overcommit_slack),
        })
        .collect()
    }
}

impl Default for FpgaConfig {
    fn default() -> Self {
        FpgaConfig::xc5vsx50t()
    }
}

/// Current simulation time; never moves backwards.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimClock {
    now: Time,
}

impl SimClock {
    pub fn now(&self) -> Time {
        self.now
    }

    pub fn advance_to(&mut self, t: Time) {
        assert!(t >= self.now, "clock moved backwards: {} -> {t}", self.now);
        self.now = t;
    }
}
