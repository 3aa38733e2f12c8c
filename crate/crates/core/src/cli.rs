//! Command-line front end.
//!
//! ```text
//! reconf-sched generate pb 0.85 7 pb0.tasks
//! reconf-sched run pb0.tasks --strategy rpiu-deadline --validate --out runs
//! reconf-sched compare sets/*.tasks --out compare.csv
//! reconf-sched report compare.csv --out report.csv
//! reconf-sched batch --seeds 10 --out exp
//! ```
//!
//! Every command is reproducible from its arguments, the config file and the
//! seed.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::benchgen::{self, ARR_TOLERANCE};
use crate::config::load_config;
use crate::error::{Error, Result};
use crate::experiment::{compare_sets, comparison_to_text, parse_comparison, ComparisonRow, Report};
use crate::model::{FpgaConfig, Task};
use crate::sched::StrategyKind;
use crate::sim::{run_simulation, validate_trace, REPORT_HEADER};
use crate::taskset::{set_name, Family, TaskSet};

/// The ARR grid used by `batch` when no `--arr` is given.
pub const DEFAULT_ARR_GRID: [f64; 10] = [0.85, 0.88, 0.91, 0.94, 0.97, 1.00, 1.03, 1.06, 1.10, 1.15];

#[derive(Debug, Parser)]
#[command(
    name = "reconf-sched",
    version,
    about = "Online reconfiguration scheduling on a slotted FPGA"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate one benchmark task set tuned to a target ARR.
    Generate(GenerateArgs),
    /// Simulate task sets under one or more strategies.
    Run(RunArgs),
    /// Run all three strategies on each task set and tabulate the results.
    Compare(CompareArgs),
    /// Group comparison rows by ARR and fit one trend line per strategy.
    Report(ReportArgs),
    /// Generate, compare and report a whole family/ARR/seed grid.
    Batch(BatchArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// Device configuration file; the bundled XC5VSX50T profile by default.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// pb, sb, gb, s1, s2 or s3.
    #[arg(value_parser = parse_family)]
    pub family: Family,
    pub arr: f64,
    pub seed: u64,
    pub out: PathBuf,
    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(required = true)]
    pub tasksets: Vec<PathBuf>,
    /// Repeatable; all three strategies when omitted.
    #[arg(long, value_parser = parse_strategy)]
    pub strategy: Vec<StrategyKind>,
    /// Fail with exit code 3 if any trace breaks a scheduling invariant.
    #[arg(long)]
    pub validate: bool,
    /// Directory for `<set>.<strategy>.trace.csv` and `.report.csv` files.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(required = true)]
    pub tasksets: Vec<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(required = true)]
    pub comparisons: Vec<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BatchArgs {
    /// Repeatable; pb, sb and gb when omitted.
    #[arg(long, value_parser = parse_family)]
    pub family: Vec<Family>,
    /// Repeatable; the 0.85-1.15 grid when omitted.
    #[arg(long)]
    pub arr: Vec<f64>,
    /// Number of seeds per family and ARR.
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Receives `sets/`, `compare.csv` and `report.csv`.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[command(flatten)]
    pub config: ConfigArg,
}

fn parse_family(s: &str) -> std::result::Result<Family, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_strategy(s: &str) -> std::result::Result<StrategyKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Parses `args` (program name first) and runs the command, writing
/// human-readable output to `stdout`.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = write!(stdout, "{e}");
            return Ok(());
        }
        Err(e) => return Err(Error::Usage(e.to_string().trim_end().to_string())),
    };
    execute(cli.command, stdout)
}

pub fn execute(command: Command, stdout: &mut dyn Write) -> Result<()> {
    match command {
        Command::Generate(a) => cmd_generate(&a, stdout),
        Command::Run(a) => cmd_run(&a, stdout),
        Command::Compare(a) => cmd_compare(&a, stdout),
        Command::Report(a) => cmd_report(&a, stdout),
        Command::Batch(a) => cmd_batch(&a, stdout),
    }
}

fn say(stdout: &mut dyn Write, text: &str) -> Result<()> {
    stdout.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Reads a task-set file and names it after the file stem.
pub fn read_taskset(path: &Path) -> Result<(String, TaskSet)> {
    let label = path.display().to_string();
    let set = TaskSet::parse(&read_file(path)?, &label)?;
    Ok((set_name(&label), set))
}

fn config_of(arg: &ConfigArg) -> Result<FpgaConfig> {
    load_config(arg.config.as_deref())
}

fn check_arr(arr: f64) -> Result<()> {
    if !arr.is_finite() {
        return Err(Error::Usage(format!("ARR must be a number, got {arr}")));
    }
    Ok(())
}

pub fn cmd_generate(a: &GenerateArgs, stdout: &mut dyn Write) -> Result<()> {
    check_arr(a.arr)?;
    let cfg = config_of(&a.config)?;
    let set = benchgen::generate(a.family, a.seed, a.arr, &cfg)?;
    write_file(&a.out, &set.to_text())?;
    let meta = set.meta.as_ref().expect("generated sets carry metadata");
    debug_assert!((meta.achieved_arr - a.arr).abs() <= ARR_TOLERANCE);
    say(
        stdout,
        &format!(
            "{}: achieved_arr={:.4} last_arrival={}\n",
            a.out.display(),
            meta.achieved_arr,
            meta.last_arrival
        ),
    )
}

pub fn cmd_run(a: &RunArgs, stdout: &mut dyn Write) -> Result<()> {
    let cfg = config_of(&a.config)?;
    let strategies = if a.strategy.is_empty() {
        StrategyKind::ALL.to_vec()
    } else {
        a.strategy.clone()
    };
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    let mut violations = 0;
    for path in &a.tasksets {
        let (name, set) = read_taskset(path)?;
        for &strategy in &strategies {
            let (trace, report) = run_simulation(&set.tasks, strategy, &cfg)?;
            let row = report.to_row(&name);
            if a.validate {
                for v in validate_trace(&trace, &set.tasks) {
                    eprintln!("{name} {strategy}: {v}");
                    violations += 1;
                }
            }
            if let Some(dir) = &a.out {
                write_file(&dir.join(format!("{name}.{strategy}.trace.csv")), &trace.to_csv())?;
                write_file(
                    &dir.join(format!("{name}.{strategy}.report.csv")),
                    &format!("{REPORT_HEADER}\n{row}\n"),
                )?;
            }
            out.push_str(&row);
            out.push('\n');
        }
    }
    say(stdout, &out)?;
    if violations > 0 {
        return Err(Error::Validation(violations));
    }
    Ok(())
}

fn load_sets(paths: &[PathBuf]) -> Result<Vec<(String, Vec<Task>)>> {
    paths
        .iter()
        .map(|p| read_taskset(p).map(|(name, set)| (name, set.tasks)))
        .collect()
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => write_file(path, text),
        None => say(stdout, text),
    }
}

pub fn cmd_compare(a: &CompareArgs, stdout: &mut dyn Write) -> Result<()> {
    let cfg = config_of(&a.config)?;
    let rows = compare_sets(&load_sets(&a.tasksets)?, &cfg)?;
    emit(a.out.as_deref(), &comparison_to_text(&rows), stdout)
}

pub fn cmd_report(a: &ReportArgs, stdout: &mut dyn Write) -> Result<()> {
    let mut rows: Vec<ComparisonRow> = Vec::new();
    for path in &a.comparisons {
        rows.extend(parse_comparison(&read_file(path)?, &path.display().to_string())?);
    }
    let report = Report::from_rows(&rows)?;
    emit(a.out.as_deref(), &report.to_text(), stdout)
}

pub fn cmd_batch(a: &BatchArgs, stdout: &mut dyn Write) -> Result<()> {
    let cfg = config_of(&a.config)?;
    let families = if a.family.is_empty() {
        Family::GRID.to_vec()
    } else {
        a.family.clone()
    };
    let arrs = if a.arr.is_empty() {
        DEFAULT_ARR_GRID.to_vec()
    } else {
        a.arr.clone()
    };
    arrs.iter().try_for_each(|&arr| check_arr(arr))?;
    if a.seeds == 0 {
        return Err(Error::Usage("--seeds must be at least 1".into()));
    }
    let jobs: Vec<(Family, f64, u64)> = families
        .iter()
        .flat_map(|&f| {
            arrs.iter()
                .flat_map(move |&arr| (a.seed..a.seed + a.seeds).map(move |s| (f, arr, s)))
        })
        .collect();
    let sets = jobs
        .par_iter()
        .map(|&(family, arr, seed)| benchgen::generate(family, seed, arr, &cfg))
        .collect::<Result<Vec<TaskSet>>>()?;

    let mut named = Vec::with_capacity(sets.len());
    for set in sets {
        let name = set.meta.as_ref().expect("generated sets carry metadata").name.clone();
        write_file(&a.out.join("sets").join(format!("{name}.tasks")), &set.to_text())?;
        named.push((name, set.tasks));
    }
    let rows = compare_sets(&named, &cfg)?;
    write_file(&a.out.join("compare.csv"), &comparison_to_text(&rows))?;
    let report = Report::from_rows(&rows)?;
    let text = report.to_text();
    write_file(&a.out.join("report.csv"), &text)?;
    say(stdout, &text)
}
