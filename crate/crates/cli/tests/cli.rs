use std::fs;
use std::process::{Command, Output};

use pdc_cli::record::SampleRecord;

fn pdcsample(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdcsample"))
        .args(args)
        .env_remove("PDC_MODE")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn records(o: &Output) -> Vec<SampleRecord> {
    stdout(o).lines().map(|l| SampleRecord::from_json(l).unwrap()).collect()
}

#[test]
fn sample_conserves_weight() {
    let o = pdcsample(&[
        "sample", "--structure", "partitions", "--n", "10", "--method", "pdc-recursive", "--policy", "prefix:3",
        "--count", "1", "--seed", "7",
    ]);
    assert!(o.status.success());
    let r = records(&o);
    assert_eq!(r.len(), 1);
    assert_eq!(r[0].parts.as_ref().unwrap().iter().sum::<usize>(), 10);
    assert_eq!(r[0].seed, 7);
}

#[test]
fn size_one_is_always_one_part() {
    for method in ["hard", "dsh", "pdc-recursive", "euler"] {
        let o = pdcsample(&["sample", "--n", "1", "--method", method, "--count", "20", "--seed", "1"]);
        assert!(o.status.success(), "{method}");
        assert!(records(&o).iter().all(|r| r.parts.as_deref() == Some(&[1][..])));
    }
}

#[test]
fn set_partition_records_carry_blocks() {
    let o = pdcsample(&["sample", "--structure", "set-partitions", "--n", "7", "--count", "50", "--seed", "2"]);
    for r in records(&o) {
        let b = r.blocks.unwrap();
        let mut labels: Vec<usize> = b.iter().flatten().copied().collect();
        labels.sort_unstable();
        assert_eq!(labels, (1..=7).collect::<Vec<_>>());
        assert!(r.parts.is_none());
    }
}

#[test]
fn workers_do_not_change_ordered_output() {
    let base = ["sample", "--structure", "distinct-partitions", "--n", "30", "--count", "200", "--seed", "9"];
    let one = pdcsample(&base);
    let mut four = base.to_vec();
    four.extend(["--workers", "4", "--ordered"]);
    let four = pdcsample(&four);
    assert_eq!(one.stdout, four.stdout);
    let mut unordered = base.to_vec();
    unordered.extend(["--workers", "3"]);
    let mut a: Vec<String> = stdout(&pdcsample(&unordered)).lines().map(String::from).collect();
    a.sort();
    let mut b: Vec<String> = stdout(&one).lines().map(String::from).collect();
    b.sort();
    assert_eq!(a, b);
}

#[test]
fn exact_mode_output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let paths = [dir.path().join("a.jsonl"), dir.path().join("b.jsonl")];
    for p in &paths {
        let o = Command::new(env!("CARGO_BIN_EXE_pdcsample"))
            .args(["sample", "--structure", "set-partitions", "--n", "12", "--count", "30", "--seed", "4", "--output"])
            .arg(p)
            .env("PDC_MODE", "exact")
            .output()
            .unwrap();
        assert!(o.status.success());
    }
    let a = fs::read(&paths[0]).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, fs::read(&paths[1]).unwrap());
}

#[test]
fn text_and_csv_formats() {
    let o = pdcsample(&["sample", "--n", "6", "--count", "3", "--seed", "3", "--format", "csv"]);
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some(SampleRecord::CSV_HEADER));
    assert_eq!(lines.count(), 3);
    let o = pdcsample(&["sample", "--n", "6", "--count", "3", "--seed", "3", "--format", "text"]);
    for l in stdout(&o).lines() {
        assert_eq!(l.split(' ').map(|p| p.parse::<usize>().unwrap()).sum::<usize>(), 6);
    }
}

#[test]
fn table_dumps() {
    let o = pdcsample(&["table", "--n", "10", "--k", "10"]);
    let out = stdout(&o);
    assert_eq!(out.lines().last(), Some("1 2 3 5 7 11 15 22 30 42"));
    let o = pdcsample(&["table", "--n", "10", "--k", "1"]);
    assert_eq!(stdout(&o).lines().nth(1), Some("1 1 1 1 1 1 1 1 1 1"));
    let o = pdcsample(&["table", "--structure", "distinct-partitions", "--n", "10", "--k", "10"]);
    let rows: Vec<Vec<u64>> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(' ').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows[9][9], 10);
    let o = pdcsample(&["table", "--structure", "set-partitions", "--n", "6"]);
    assert_eq!(stdout(&o).lines().nth(1), Some("1 1 2 5 15 52 203"));
}

#[test]
fn sample_then_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.jsonl");
    let o = pdcsample(&[
        "sample", "--structure", "set-partitions", "--n", "5", "--count", "20000", "--seed", "8", "--output",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let v = pdcsample(&["verify", "--structure", "set-partitions", "--input", path.to_str().unwrap()]);
    assert!(v.status.success(), "{}", stdout(&v));
    assert!(stdout(&v).contains("PASS set-partitions n=5 labelled"));
}

#[test]
fn tampered_record_is_an_exact_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.jsonl");
    let o = pdcsample(&["sample", "--n", "6", "--count", "50", "--seed", "8"]);
    let mut text = stdout(&o);
    text.push_str(r#"{"n":6,"counts":[[1,1],[2,1]],"attempts":1,"seed":8}"#);
    text.push('\n');
    fs::write(&path, text).unwrap();
    let v = pdcsample(&["verify", "--input", path.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(2));
}

#[test]
fn verify_passes_at_six() {
    let v = pdcsample(&["verify", "--structure", "partitions", "--n", "6", "--samples", "100000", "--seed", "11"]);
    assert!(v.status.success(), "{}", stdout(&v));
    assert_eq!(stdout(&v).lines().filter(|l| l.starts_with("PASS")).count(), 6);
}

#[test]
fn corrupted_table_fixture_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.txt");
    let good = stdout(&pdcsample(&["table", "--n", "10", "--k", "10"]));
    fs::write(&path, &good).unwrap();
    assert!(pdcsample(&["verify", "--table", path.to_str().unwrap()]).status.success());
    fs::write(&path, good.replace("22 30 42", "22 30 43")).unwrap();
    let v = pdcsample(&["verify", "--table", path.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(2));
    assert!(stdout(&v).contains("FAIL"));
}

#[test]
fn bench_grid_with_one_cell() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.csv");
    fs::write(&path, "structure,method,n,policy\npartitions,dsh,50,none\n").unwrap();
    let o = pdcsample(&["bench", "--grid", path.to_str().unwrap(), "--samples", "100", "--seed", "1"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], pdc_core::cost::CSV_HEADER);
    assert!(lines[1].starts_with("partitions,dsh,50,none,100,"));
}

#[test]
fn exit_codes() {
    let o = pdcsample(&["sample", "--structure", "set-partitions", "--n", "5", "--method", "euler"]);
    assert_eq!(o.status.code(), Some(3));
    let o = pdcsample(&["sample", "--n", "abc"]);
    assert_eq!(o.status.code(), Some(3));
    let o = pdcsample(&["sample", "--n", "10", "--policy", "bogus:1"]);
    assert_eq!(o.status.code(), Some(3));
    let o = pdcsample(&["sample", "--n", "2000", "--method", "hard", "--attempt-cap", "1", "--count", "5", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(4));
    let o = pdcsample(&["verify", "--input", "/nonexistent/file.jsonl"]);
    assert_eq!(o.status.code(), Some(3));
}
