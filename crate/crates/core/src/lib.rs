//! Online reconfiguration scheduling on a slotted, partially reconfigurable
//! FPGA with a single configuration port.
//!
//! Tasks arrive online, are classified by resource demand, and either get a
//! reconfiguration slot on the port that still meets their deadline or are
//! rejected. Three strategies are simulated: Orderly (FIFO, decided at
//! arrival) and RPIU with a most-loaded or a deadline arbiter (decided each
//! time the port frees up). The crate also generates benchmark task sets
//! tuned to a target average rejection ratio and reports trend lines across
//! them.
//!
//! ```
//! use reconf_sched::{benchgen, run_simulation, FpgaConfig, StrategyKind};
//!
//! let cfg = FpgaConfig::default();
//! let set = benchgen::gen_perfect_balance(7, 0.85, &cfg).unwrap();
//! let (trace, report) = run_simulation(&set.tasks, StrategyKind::RpiuDeadline, &cfg).unwrap();
//! assert!(reconf_sched::validate_trace(&trace, &set.tasks).is_empty());
//! assert_eq!(report.n_executed + report.n_rejected, 52);
//! ```

pub mod arbiter;
pub mod benchgen;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod model;
pub mod queues;
pub mod scalar;
pub mod sched;
pub mod sim;
pub mod taskset;

pub use arbiter::{
    arbiter_deadline, arbiter_most_loaded, Arbiter, ArbiterState, Candidate, DeadlineArbiter, MostLoadedArbiter,
};
pub use error::{Error, Result};
pub use model::{FpgaConfig, PairWeights, Resources, Slot, Task, TaskClass, Time, TrecRule};
pub use queues::{select_queue, ClassQueue};
pub use scalar::Scalar;
pub use sched::{Outcome, RejectCause, ScheduleEntry, StrategyKind};
pub use sim::{
    improvement, linear_fit, run_simulation, simulate, validate_trace, LinearFit, SimReport, Trace, Violation,
};
pub use taskset::{Family, SyntheticMix, TaskSet, TaskSetMeta};

/// Exact ARR arithmetic.
pub type ExactRatio = num_rational::BigRational;
pub type LinearFit64 = LinearFit<f64>;
pub type LinearFit32 = LinearFit<f32>;

/// ARR of a task set in double precision.
pub fn arr_f64(tasks: &[Task], cfg: &FpgaConfig) -> Result<f64> {
    benchgen::compute_arr(tasks, cfg)
}

/// ARR of a task set as an exact fraction.
pub fn arr_exact(tasks: &[Task], cfg: &FpgaConfig) -> Result<ExactRatio> {
    benchgen::compute_arr(tasks, cfg)
}
