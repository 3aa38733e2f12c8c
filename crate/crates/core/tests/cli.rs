use std::path::Path;
use std::process::{Command, Output};

use reconf_sched::experiment::{parse_comparison, Report};
use reconf_sched::{validate_trace, TaskSet, Trace};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reconf-sched"))
        .args(args)
        .output()
        .unwrap()
}

fn path(p: &Path) -> String {
    p.display().to_string()
}

fn ok(args: &[&str]) -> String {
    let out = bin(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn generate_run_compare_report() {
    let dir = tempfile::tempdir().unwrap();
    let pb = dir.path().join("pb.tasks");
    let gb = dir.path().join("gb.tasks");
    ok(&["generate", "pb", "1.06", "4", &path(&pb)]);
    ok(&["generate", "gb", "0.91", "4", &path(&gb)]);

    let set = TaskSet::parse(&std::fs::read_to_string(&pb).unwrap(), "pb").unwrap();
    assert_eq!(set.tasks.len(), 52);
    let name = set.meta.as_ref().unwrap().name.clone();

    let runs = dir.path().join("runs");
    let stdout = ok(&[
        "run",
        &path(&pb),
        "--strategy",
        "rpiu-deadline",
        "--validate",
        "--out",
        &path(&runs),
    ]);
    assert_eq!(stdout.lines().count(), 2);
    let trace_file = runs.join(format!("{name}.rpiu-deadline.trace.csv"));
    let trace = Trace::parse(&std::fs::read_to_string(trace_file).unwrap(), "trace").unwrap();
    assert!(validate_trace(&trace, &set.tasks).is_empty());
    assert!(runs.join(format!("{name}.rpiu-deadline.report.csv")).exists());

    let compare = dir.path().join("compare.csv");
    ok(&["compare", &path(&pb), &path(&gb), "--out", &path(&compare)]);
    let rows = parse_comparison(&std::fs::read_to_string(&compare).unwrap(), "compare").unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].arr < rows[1].arr);

    let printed = ok(&["report", &path(&compare)]);
    let report = Report::parse(&printed, "report").unwrap();
    assert_eq!(report.groups.len(), 2);
    assert_eq!(Report::from_rows(&rows).unwrap(), report);
}

#[test]
fn batch_writes_sets_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("exp");
    ok(&[
        "batch",
        "--family",
        "sb",
        "--arr",
        "0.88",
        "--arr",
        "1.03",
        "--seeds",
        "2",
        "--out",
        &path(&out),
    ]);
    assert_eq!(std::fs::read_dir(out.join("sets")).unwrap().count(), 4);
    let rows = parse_comparison(&std::fs::read_to_string(out.join("compare.csv")).unwrap(), "c").unwrap();
    assert_eq!(rows.len(), 4);
    assert!(out.join("report.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(bin(&[]).status.code(), Some(2));
    assert_eq!(bin(&["generate", "xx", "1.0", "1", "a.tasks"]).status.code(), Some(2));
    assert_eq!(
        bin(&["run", &path(&dir.path().join("missing.tasks"))]).status.code(),
        Some(1)
    );

    let junk = dir.path().join("junk.tasks");
    std::fs::write(&junk, "id,tarr\nnot,a,task\n").unwrap();
    let out = bin(&["compare", &path(&junk)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let compare = dir.path().join("one.csv");
    ok(&["generate", "pb", "0.9", "1", &path(&dir.path().join("one.tasks"))]);
    ok(&[
        "compare",
        &path(&dir.path().join("one.tasks")),
        "--out",
        &path(&compare),
    ]);
    assert_eq!(bin(&["report", &path(&compare)]).status.code(), Some(4));
    assert!(bin(&["--help"]).status.success());
}
