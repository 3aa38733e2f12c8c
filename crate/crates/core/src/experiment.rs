//! Side-by-side strategy comparisons and the trend report built from them.
//!
//! A comparison file has one row per task set:
//!
//! ```text
//! set,arr,n_orderly,n_deadline,impr_deadline,n_load,impr_load
//! pb-1.06-s0,1.06,31,39,15.4,38,13.5
//! ```
//!
//! A report groups rows by ARR, averages `n` per strategy and fits one
//! least-squares line per strategy through the group means.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::benchgen::compute_arr;
use crate::error::{Error, Result};
use crate::model::{FpgaConfig, Task};
use crate::scalar::round_to;
use crate::sched::StrategyKind;
use crate::sim::{improvement, linear_fit, simulate, LinearFit};

pub const COMPARISON_HEADER: &str = "set,arr,n_orderly,n_deadline,impr_deadline,n_load,impr_load";
pub const GROUP_HEADER: &str = "arr,sets,orderly,rpiu-deadline,rpiu-load";
pub const FIT_HEADER: &str = "strategy,slope,intercept,overall_mean";

/// Column order used by comparison rows and reports.
pub const COMPARED: [StrategyKind; 3] = [
    StrategyKind::Orderly,
    StrategyKind::RpiuDeadline,
    StrategyKind::RpiuLoad,
];

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub set: String,
    /// Achieved ARR, rounded to two decimals; NaN when a task fits no class.
    pub arr: f64,
    pub n_orderly: usize,
    pub n_deadline: usize,
    pub impr_deadline: f64,
    pub n_load: usize,
    pub impr_load: f64,
}

impl ComparisonRow {
    /// Executed counts in [`COMPARED`] order.
    pub fn counts(&self) -> [usize; 3] {
        [self.n_orderly, self.n_deadline, self.n_load]
    }
}

/// Runs all three strategies on one set.
pub fn compare_set(set: &str, tasks: &[Task], cfg: &FpgaConfig) -> Result<ComparisonRow> {
    let mut n = [0; 3];
    for (slot, strategy) in n.iter_mut().zip(COMPARED) {
        *slot = simulate(tasks, strategy, cfg)?.executed().count();
    }
    let total = tasks.len().max(1);
    Ok(ComparisonRow {
        set: set.to_string(),
        arr: round_to(compute_arr::<f64>(tasks, cfg).unwrap_or(f64::NAN), 2),
        n_orderly: n[0],
        n_deadline: n[1],
        impr_deadline: improvement(n[1], n[0], total),
        n_load: n[2],
        impr_load: improvement(n[2], n[0], total),
    })
}

/// Compares every set, in parallel, and sorts the rows by ARR then set name.
/// The result does not depend on thread count or completion order.
pub fn compare_sets(sets: &[(String, Vec<Task>)], cfg: &FpgaConfig) -> Result<Vec<ComparisonRow>> {
    let mut rows = sets
        .par_iter()
        .map(|(name, tasks)| compare_set(name, tasks, cfg))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.arr.total_cmp(&b.arr).then_with(|| a.set.cmp(&b.set)));
    Ok(rows)
}

pub fn comparison_to_text(rows: &[ComparisonRow]) -> String {
    let mut out = String::from(COMPARISON_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:.2},{},{},{:.1},{},{:.1}",
            r.set, r.arr, r.n_orderly, r.n_deadline, r.impr_deadline, r.n_load, r.impr_load
        );
    }
    out
}

pub fn parse_comparison(text: &str, source: &str) -> Result<Vec<ComparisonRow>> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line == COMPARISON_HEADER {
            continue;
        }
        let err = |msg: String| Error::parse(source, idx + 1, msg);
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 7 {
            return Err(err(format!("expected 7 fields, found {}", f.len())));
        }
        let count = |s: &str| s.parse::<usize>().map_err(|_| err(format!("bad count `{s}`")));
        let ratio = |s: &str| s.parse::<f64>().map_err(|_| err(format!("bad number `{s}`")));
        rows.push(ComparisonRow {
            set: f[0].to_string(),
            arr: ratio(f[1])?,
            n_orderly: count(f[2])?,
            n_deadline: count(f[3])?,
            impr_deadline: ratio(f[4])?,
            n_load: count(f[5])?,
            impr_load: ratio(f[6])?,
        });
    }
    Ok(rows)
}

/// Mean executed counts of all sets sharing one ARR value.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrGroup {
    pub arr: f64,
    pub sets: usize,
    /// In [`COMPARED`] order.
    pub mean: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub groups: Vec<ArrGroup>,
    /// Least-squares line of group mean against ARR, per strategy.
    pub fits: [LinearFit<f64>; 3],
    /// Mean over every row, per strategy.
    pub overall: [f64; 3],
}

impl Report {
    /// Needs at least two distinct ARR values.
    pub fn from_rows(rows: &[ComparisonRow]) -> Result<Report> {
        let mut sorted: Vec<&ComparisonRow> = rows.iter().collect();
        sorted.sort_by(|a, b| a.arr.total_cmp(&b.arr));
        let mut groups: Vec<ArrGroup> = Vec::new();
        let mut sums: Vec<[usize; 3]> = Vec::new();
        for r in sorted {
            if groups.last().map(|g| g.arr) != Some(r.arr) {
                groups.push(ArrGroup {
                    arr: r.arr,
                    sets: 0,
                    mean: [0.0; 3],
                });
                sums.push([0; 3]);
            }
            let (g, s) = (groups.last_mut().unwrap(), sums.last_mut().unwrap());
            g.sets += 1;
            for (acc, n) in s.iter_mut().zip(r.counts()) {
                *acc += n;
            }
        }
        for (g, s) in groups.iter_mut().zip(&sums) {
            g.mean = s.map(|x| x as f64 / g.sets as f64);
        }
        if groups.len() < 2 {
            return Err(Error::DegenerateFit(format!(
                "a trend needs at least 2 distinct ARR values, got {}",
                groups.len()
            )));
        }
        let mut fits = [LinearFit {
            slope: 0.0,
            intercept: 0.0,
        }; 3];
        for (k, fit) in fits.iter_mut().enumerate() {
            let points: Vec<(f64, f64)> = groups.iter().map(|g| (g.arr, g.mean[k])).collect();
            *fit = linear_fit(&points)?;
        }
        let mut overall = [0.0; 3];
        for (k, o) in overall.iter_mut().enumerate() {
            *o = rows.iter().map(|r| r.counts()[k] as f64).sum::<f64>() / rows.len() as f64;
        }
        Ok(Report { groups, fits, overall })
    }

    /// The deadline line is at or above the orderly line at every grouped ARR.
    pub fn deadline_dominates_orderly(&self) -> bool {
        self.groups
            .iter()
            .all(|g| self.fits[1].eval(g.arr) >= self.fits[0].eval(g.arr))
    }

    /// Over all rows, the deadline arbiter executes at least as many tasks as
    /// the most-loaded one.
    pub fn deadline_beats_load(&self) -> bool {
        self.overall[1] >= self.overall[2]
    }

    pub fn to_text(&self) -> String {
        let flag = |ok: bool| if ok { "pass" } else { "fail" };
        let mut out = String::from(GROUP_HEADER);
        out.push('\n');
        for g in &self.groups {
            let _ = writeln!(out, "{:.2},{},{},{},{}", g.arr, g.sets, g.mean[0], g.mean[1], g.mean[2]);
        }
        out.push('\n');
        out.push_str(FIT_HEADER);
        out.push('\n');
        for (k, s) in COMPARED.iter().enumerate() {
            let _ = writeln!(
                out,
                "{s},{},{},{}",
                self.fits[k].slope, self.fits[k].intercept, self.overall[k]
            );
        }
        let _ = writeln!(
            out,
            "# trend deadline_over_orderly={} deadline_over_load={}",
            flag(self.deadline_dominates_orderly()),
            flag(self.deadline_beats_load())
        );
        out
    }

    pub fn parse(text: &str, source: &str) -> Result<Report> {
        let mut groups = Vec::new();
        let mut fits = [None; 3];
        let mut overall = [0.0; 3];
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line == GROUP_HEADER || line == FIT_HEADER {
                continue;
            }
            let err = |msg: String| Error::parse(source, idx + 1, msg);
            let num = |s: &str| s.parse::<f64>().map_err(|_| err(format!("bad number `{s}`")));
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            match f[..] {
                [strategy, slope, intercept, mean] => {
                    let s: StrategyKind = strategy
                        .parse()
                        .map_err(|_| err(format!("unknown strategy `{strategy}`")))?;
                    let k = COMPARED
                        .iter()
                        .position(|&c| c == s)
                        .expect("every strategy is compared");
                    fits[k] = Some(LinearFit {
                        slope: num(slope)?,
                        intercept: num(intercept)?,
                    });
                    overall[k] = num(mean)?;
                }
                [arr, sets, a, b, c] => groups.push(ArrGroup {
                    arr: num(arr)?,
                    sets: sets.parse().map_err(|_| err(format!("bad count `{sets}`")))?,
                    mean: [num(a)?, num(b)?, num(c)?],
                }),
                _ => return Err(err(format!("unexpected line `{line}`"))),
            }
        }
        let missing = || Error::parse(source, 1, "report lacks a fit for every strategy");
        Ok(Report {
            groups,
            fits: [
                fits[0].ok_or_else(missing)?,
                fits[1].ok_or_else(missing)?,
                fits[2].ok_or_else(missing)?,
            ],
            overall,
        })
    }
}
