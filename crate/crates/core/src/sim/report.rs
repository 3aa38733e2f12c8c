//! Run metrics, the improvement ratio and least-squares trend lines.

use num_traits::Float;

use crate::error::{Error, Result};
use crate::model::Time;
use crate::scalar::round_to;
use crate::sched::StrategyKind;

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub strategy: StrategyKind,
    pub n_tasks: usize,
    pub n_executed: usize,
    pub n_rejected: usize,
    /// ARR of the input set; `None` when some task fits no class.
    pub achieved_arr: Option<f64>,
    /// Percent of the task set, relative to the Orderly baseline.
    pub improvement_vs_baseline: f64,
    pub executed_per_class: Vec<usize>,
    /// End of the last execution, 0 if nothing ran.
    pub makespan: Time,
}

pub const REPORT_HEADER: &str =
    "set,strategy,arr,n_tasks,n_executed,n_rejected,improvement,makespan,executed_per_class";

impl SimReport {
    /// One report row; `set` names the task set.
    pub fn to_row(&self, set: &str) -> String {
        let per_class: Vec<String> = self.executed_per_class.iter().map(usize::to_string).collect();
        format!(
            "{set},{},{},{},{},{},{:.1},{},{}",
            self.strategy,
            self.achieved_arr.map_or_else(|| "-".to_string(), |a| format!("{a:.2}")),
            self.n_tasks,
            self.n_executed,
            self.n_rejected,
            self.improvement_vs_baseline,
            self.makespan,
            per_class.join(";")
        )
    }
}

/// `100 * (n - n_baseline) / n_tasks`, rounded to one decimal.
pub fn improvement(n: usize, n_baseline: usize, n_tasks: usize) -> f64 {
    assert!(n_tasks >= 1, "improvement over an empty task set");
    round_to(100.0 * (n as f64 - n_baseline as f64) / n_tasks as f64, 1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit<F> {
    pub slope: F,
    pub intercept: F,
}

impl<F: Float> LinearFit<F> {
    pub fn eval(&self, x: F) -> F {
        self.slope * x + self.intercept
    }
}

/// Ordinary least squares `y = slope * x + intercept`.
pub fn linear_fit<F: Float>(points: &[(F, F)]) -> Result<LinearFit<F>> {
    if points.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "need at least 2 points, got {}",
            points.len()
        )));
    }
    let n = F::from(points.len()).expect("point count fits the scalar type");
    let (sx, sy) = points
        .iter()
        .fold((F::zero(), F::zero()), |(sx, sy), &(x, y)| (sx + x, sy + y));
    let (mx, my) = (sx / n, sy / n);
    let (sxx, sxy) = points.iter().fold((F::zero(), F::zero()), |(sxx, sxy), &(x, y)| {
        let dx = x - mx;
        (sxx + dx * dx, sxy + dx * (y - my))
    });
    if sxx <= F::zero() {
        return Err(Error::DegenerateFit("all x values are equal".into()));
    }
    let slope = sxy / sxx;
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
    })
}
