//! Task-set files.
//!
//! ```text
//! # family=PB seed=7 target_arr=0.85 achieved_arr=0.85 n=52
//! id,tarr,tex,tmax,clbs,brams,dsps
//! 0,0,5,40,180,2,8
//! ```

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{Resources, Task, Time};
use crate::sim::check_task_order;

pub const TASKSET_HEADER: &str = "id,tarr,tex,tmax,clbs,brams,dsps";

/// Synthetic application mixes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SyntheticMix {
    S1,
    S2,
    S3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// Classes arrive strictly round-robin.
    PerfectBalance,
    /// A perfect-balance set with a quarter of its arrival order permuted.
    SemiPerfectBalance,
    /// Random class order, no run of four equal classes.
    GlobalBalance,
    Synthetic(SyntheticMix),
}

impl Family {
    pub const GRID: [Family; 3] = [
        Family::PerfectBalance,
        Family::SemiPerfectBalance,
        Family::GlobalBalance,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::PerfectBalance => "PB",
            Family::SemiPerfectBalance => "SB",
            Family::GlobalBalance => "GB",
            Family::Synthetic(SyntheticMix::S1) => "S1",
            Family::Synthetic(SyntheticMix::S2) => "S2",
            Family::Synthetic(SyntheticMix::S3) => "S3",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "pb" => Family::PerfectBalance,
            "sb" => Family::SemiPerfectBalance,
            "gb" => Family::GlobalBalance,
            "s1" => Family::Synthetic(SyntheticMix::S1),
            "s2" => Family::Synthetic(SyntheticMix::S2),
            "s3" => Family::Synthetic(SyntheticMix::S3),
            other => {
                return Err(Error::Usage(format!(
                    "unknown family `{other}` (expected pb, sb, gb, s1, s2 or s3)"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskSetMeta {
    pub name: String,
    pub family: Family,
    pub target_arr: f64,
    pub achieved_arr: f64,
    pub seed: u64,
    pub n_tasks: usize,
    pub last_arrival: Time,
}

impl TaskSetMeta {
    fn header_line(&self) -> String {
        format!(
            "# family={} seed={} target_arr={:.2} achieved_arr={:.2} n={}",
            self.family, self.seed, self.target_arr, self.achieved_arr, self.n_tasks
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskSet {
    pub meta: Option<TaskSetMeta>,
    pub tasks: Vec<Task>,
}

impl TaskSet {
    pub fn new(tasks: Vec<Task>) -> Self {
        TaskSet { meta: None, tasks }
    }

    pub fn last_arrival(&self) -> Time {
        self.tasks.last().map_or(0, |t| t.tarr)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(24 * (self.tasks.len() + 2));
        if let Some(meta) = &self.meta {
            out.push_str(&meta.header_line());
            out.push('\n');
        }
        out.push_str(TASKSET_HEADER);
        out.push('\n');
        for t in &self.tasks {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                t.id, t.tarr, t.tex, t.tmax, t.demand.clbs, t.demand.brams, t.demand.dsps
            );
        }
        out
    }

    /// Parses a task-set file. `name` labels errors and becomes the set name.
    pub fn parse(text: &str, name: &str) -> Result<TaskSet> {
        let mut meta = None;
        let mut tasks = Vec::new();
        let mut lines_of = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line == TASKSET_HEADER {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if meta.is_none() && tasks.is_empty() && comment.contains('=') {
                    meta = Some(parse_meta(comment, name, lineno)?);
                }
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 7 {
                return Err(Error::parse(
                    name,
                    lineno,
                    format!("expected 7 fields, found {}", fields.len()),
                ));
            }
            let mut nums = [0u64; 7];
            for (slot, f) in nums.iter_mut().zip(&fields) {
                *slot = f
                    .parse()
                    .map_err(|_| Error::parse(name, lineno, format!("bad integer `{f}`")))?;
            }
            let narrow = |v: u64| -> Result<u32> {
                u32::try_from(v).map_err(|_| Error::parse(name, lineno, format!("resource count {v} too large")))
            };
            let task = Task::new(
                nums[0] as usize,
                nums[1],
                nums[2],
                nums[3],
                Resources::new(narrow(nums[4])?, narrow(nums[5])?, narrow(nums[6])?),
            );
            task.validate().map_err(|m| Error::parse(name, lineno, m))?;
            tasks.push(task);
            lines_of.push(lineno);
        }
        check_task_order(&tasks).map_err(|e| match e {
            Error::Parse { line, msg, .. } => Error::parse(name, lines_of[line - 1], msg),
            other => other,
        })?;
        if let Some(m) = &mut meta {
            if m.n_tasks != tasks.len() {
                return Err(Error::parse(
                    name,
                    1,
                    format!("header says n={} but the file has {} tasks", m.n_tasks, tasks.len()),
                ));
            }
            m.last_arrival = tasks.last().map_or(0, |t| t.tarr);
        }
        Ok(TaskSet { meta, tasks })
    }
}

fn parse_meta(comment: &str, name: &str, lineno: usize) -> Result<TaskSetMeta> {
    let mut family = None;
    let mut seed = None;
    let mut target = None;
    let mut achieved = None;
    let mut n = None;
    for kv in comment.split_whitespace() {
        let Some((k, v)) = kv.split_once('=') else {
            return Err(Error::parse(name, lineno, format!("expected key=value, found `{kv}`")));
        };
        let bad = || Error::parse(name, lineno, format!("bad value for `{k}`: `{v}`"));
        match k {
            "family" => family = Some(v.parse::<Family>().map_err(|_| bad())?),
            "seed" => seed = Some(v.parse::<u64>().map_err(|_| bad())?),
            "target_arr" => target = Some(v.parse::<f64>().map_err(|_| bad())?),
            "achieved_arr" => achieved = Some(v.parse::<f64>().map_err(|_| bad())?),
            "n" => n = Some(v.parse::<usize>().map_err(|_| bad())?),
            _ => return Err(Error::parse(name, lineno, format!("unknown header key `{k}`"))),
        }
    }
    let missing = |k: &str| Error::parse(name, lineno, format!("header lacks `{k}`"));
    Ok(TaskSetMeta {
        name: set_name(name),
        family: family.ok_or_else(|| missing("family"))?,
        seed: seed.ok_or_else(|| missing("seed"))?,
        target_arr: target.ok_or_else(|| missing("target_arr"))?,
        achieved_arr: achieved.ok_or_else(|| missing("achieved_arr"))?,
        n_tasks: n.ok_or_else(|| missing("n"))?,
        last_arrival: 0,
    })
}

/// File stem of a path-like name.
pub fn set_name(path_like: &str) -> String {
    std::path::Path::new(path_like)
        .file_stem()
        .map_or_else(|| path_like.to_string(), |s| s.to_string_lossy().into_owned())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "# family=PB seed=7 target_arr=0.85 achieved_arr=0.85 n=2\n\
                          id,tarr,tex,tmax,clbs,brams,dsps\n\
                          0,0,5,40,180,2,8\n\
                          1,3,9,60,400,10,30\n";

    #[test]
    fn parse_and_render() {
        let ts = TaskSet::parse(SAMPLE, "sets/pb0.tasks").unwrap();
        let meta = ts.meta.as_ref().unwrap();
        assert_eq!(meta.name, "pb0");
        assert_eq!(meta.family, Family::PerfectBalance);
        assert_eq!((meta.seed, meta.n_tasks, meta.last_arrival), (7, 2, 3));
        assert_eq!(ts.tasks[1], Task::new(1, 3, 9, 60, Resources::new(400, 10, 30)));
        assert_eq!(ts.to_text(), SAMPLE);
    }

    #[test]
    fn headerless_files_are_accepted() {
        let ts = TaskSet::parse("0,0,5,40,180,2,8\n", "x").unwrap();
        assert!(ts.meta.is_none());
        assert_eq!(ts.tasks.len(), 1);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("id,tarr,tex,tmax,clbs,brams,dsps\n0,0,5,40,180,2\n", 2),
            ("0,0,5,40,180,2,8\n1,0,x,40,180,2,8\n", 2),
            ("0,0,5,40,180,2,8\n\n1,0,0,40,180,2,8\n", 3),
            ("0,4,5,40,180,2,8\n1,2,5,40,180,2,8\n", 2),
            ("0,4,5,4,180,2,8\n", 1),
            (
                "# family=XX seed=1 target_arr=1 achieved_arr=1 n=1\n0,0,5,40,180,2,8\n",
                1,
            ),
        ];
        for (text, line) in cases {
            match TaskSet::parse(text, "f.tasks") {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn family_names() {
        for f in ["pb", "SB", "gb", "s1", "s2", "S3"] {
            let fam: Family = f.parse().unwrap();
            assert_eq!(fam.as_str().to_ascii_lowercase(), f.to_ascii_lowercase());
        }
        assert!(matches!("xx".parse::<Family>(), Err(Error::Usage(_))));
    }
}
