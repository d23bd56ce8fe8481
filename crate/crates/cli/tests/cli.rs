use std::path::Path;
use std::process::{Command, Output};

fn wavecode(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavecode"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn wavecode")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Rows of a report with the `#` lines removed, keyed by column name.
fn rows(csv: &str) -> Vec<Vec<(String, String)>> {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let head: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    lines
        .map(|l| head.iter().cloned().zip(l.split(',').map(String::from)).collect())
        .collect()
}

fn field<'a>(row: &'a [(String, String)], key: &str) -> &'a str {
    &row.iter().find(|(k, _)| k == key).unwrap().1
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.txt"), "1\n4\n5\n6\n").unwrap();
    dir
}

#[test]
fn compress_unrest_example() {
    let dir = setup();
    let o = wavecode(
        &["compress", "--input", "s.txt", "--algo", "unrest", "--B", "1", "--p", "inf", "--eps", "0.05", "--stats"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    for key in ["# command=compress", "# algo=unrest", "# B=1", "# p=inf", "# eps=0.05", "# filter=haar"] {
        assert!(out.contains(key), "missing {key} in\n{out}");
    }
    let r = rows(&out);
    assert_eq!(field(&r[0], "norm"), "inf");
    let e: f64 = field(&r[0], "error").parse().unwrap();
    assert!(e <= 2.625, "{e}");
    assert!(field(&r[0], "peak_live_tables").parse::<usize>().unwrap() >= 1);
}

#[test]
fn greedy_full_budget_is_exact_and_round_trips() {
    let dir = setup();
    let o = wavecode(
        &["compress", "--input", "s.txt", "--algo", "greedy", "--B", "4", "--p", "2", "--output", "r.txt", "--reconstruction", "back.txt", "--report", "rep.csv"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let rep = std::fs::read_to_string(dir.path().join("rep.csv")).unwrap();
    for row in rows(&rep) {
        assert!(field(&row, "error").parse::<f64>().unwrap() < 1e-12);
    }
    let o = wavecode(&["reconstruct", "--input", "r.txt"], dir.path());
    assert!(o.status.success());
    let back = std::fs::read_to_string(dir.path().join("back.txt")).unwrap();
    assert_eq!(stdout(&o), back);
    let vals: Vec<f64> = back.lines().map(|l| l.parse().unwrap()).collect();
    for (a, b) in vals.iter().zip([1.0, 4.0, 5.0, 6.0]) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn representation_file_round_trips_through_reader() {
    let dir = setup();
    for algo in ["greedy", "universal", "rest", "hybrid", "unrest"] {
        let o = wavecode(&["compress", "--input", "s.txt", "--algo", algo, "--B", "2", "--output", "r.txt"], dir.path());
        assert!(o.status.success(), "{algo}: {}", stderr(&o));
        let text = std::fs::read_to_string(dir.path().join("r.txt")).unwrap();
        let r = wavecode::Representation::from_text(&text, Path::new("r.txt")).unwrap();
        assert_eq!(r.to_text(), text, "{algo}");
    }
    let o = wavecode(&["compress", "--input", "s.txt", "--algo", "best-basis", "--B", "2", "--output", "c.txt"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("c.txt")).unwrap();
    let c = wavecode::CutSolution::from_text(&text, Path::new("c.txt")).unwrap();
    assert_eq!(c.to_text(), text);
    assert!(wavecode(&["reconstruct", "--input", "c.txt"], dir.path()).status.success());
}

#[test]
fn gen_saw_default_and_small() {
    let dir = setup();
    let o = wavecode(&["gen-saw", "--n", "8", "--period", "4"], dir.path());
    assert_eq!(stdout(&o), "0\n1\n2\n3\n0\n1\n2\n3\n");
    let o = wavecode(&["gen-saw", "--output", "saw.txt"], dir.path());
    assert!(o.status.success());
    let f = wavecode::signal::read_signal(&dir.path().join("saw.txt"), None).unwrap();
    assert_eq!(f.len(), 2048);
    assert!((0..2048 - 256).all(|i| f[i] == f[i + 256]));
    let o = wavecode(&["gen-saw", "--n", "10", "--period", "4"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let dir = setup();
    let usage = wavecode(&["compress", "--input", "s.txt"], dir.path());
    assert_eq!(usage.status.code(), Some(2));
    let usage = wavecode(&["compress", "--input", "s.txt", "--algo", "greedy", "--B", "9"], dir.path());
    assert_eq!(usage.status.code(), Some(2));
    let usage = wavecode(&["compress", "--input", "s.txt", "--algo", "greedy", "--p", "0.5"], dir.path());
    assert_eq!(usage.status.code(), Some(2));
    let usage = wavecode(&["compress", "--input", "s.txt", "--algo", "rest", "--filter", "db2"], dir.path());
    assert_eq!(usage.status.code(), Some(2));

    let missing = wavecode(&["compress", "--input", "none.txt", "--algo", "greedy"], dir.path());
    assert_eq!(missing.status.code(), Some(3));
    assert!(stderr(&missing).contains("none.txt"));
    std::fs::write(dir.path().join("bad.txt"), "1\n2\nx\n4\n").unwrap();
    let bad = wavecode(&["compress", "--input", "bad.txt", "--algo", "greedy"], dir.path());
    assert_eq!(bad.status.code(), Some(3));
    assert!(stderr(&bad).contains("bad.txt:3"), "{}", stderr(&bad));
    std::fs::write(dir.path().join("three.txt"), "1\n2\n3\n").unwrap();
    let odd = wavecode(&["compress", "--input", "three.txt", "--algo", "greedy"], dir.path());
    assert_eq!(odd.status.code(), Some(3));
    let padded = wavecode(&["compress", "--input", "three.txt", "--algo", "greedy", "--pad"], dir.path());
    assert!(padded.status.success());
}

#[test]
fn rest_over_cap_is_rejected_with_guidance() {
    let dir = setup();
    let o = wavecode(&["gen-saw", "--n", "32768", "--period", "256", "--output", "big.txt"], dir.path());
    assert!(o.status.success());
    let o = wavecode(&["compress", "--input", "big.txt", "--algo", "rest", "--B", "4"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("hybrid"), "{}", stderr(&o));
}

#[test]
fn transform_dump() {
    let dir = setup();
    let o = wavecode(&["transform", "--input", "s.txt"], dir.path());
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.starts_with("flat_index,level,shift,value\n1,2,0,8"));
    assert_eq!(out.lines().count(), 5);
}

#[test]
fn oracle_report() {
    let dir = setup();
    let o = wavecode(&["oracle", "--input", "s.txt", "--B", "1", "--p", "inf"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let r = rows(&stdout(&o));
    assert!((field(&r[0], "error").parse::<f64>().unwrap() - 2.5).abs() < 1e-9);
    let o = wavecode(&["oracle", "--input", "s.txt", "--B", "1", "--p", "inf", "--restricted"], dir.path());
    let r = rows(&stdout(&o));
    assert!((field(&r[0], "error").parse::<f64>().unwrap() - 3.0).abs() < 1e-9);
}

#[test]
fn quantized_budgets_hold() {
    let dir = setup();
    std::fs::write(dir.path().join("t.txt"), "2\n-1\n0.5\n3\n").unwrap();
    for algo in ["spectrum", "bitcomplexity"] {
        let o = wavecode(&["compress", "--input", "s.txt", "--algo", algo, "--budget-bits", "40"], dir.path());
        assert!(o.status.success(), "{algo}: {}", stderr(&o));
        let r = rows(&stdout(&o));
        assert!(field(&r[0], "cost_bits").parse::<u64>().unwrap() <= 40);
    }
    let o = wavecode(
        &["compress", "--input", "s.txt", "--input", "t.txt", "--algo", "multiplane", "--budget-bits", "30", "--value-bits", "8", "--output", "m.txt"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("m.txt.0").exists() && dir.path().join("m.txt.1").exists());
    let r = rows(&stdout(&o));
    assert!(field(&r[0], "cost_bits").parse::<u64>().unwrap() <= 30);
    let o = wavecode(&["compress", "--input", "s.txt", "--algo", "spectrum"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn weighted_compress() {
    let dir = setup();
    std::fs::write(dir.path().join("w.txt"), "1\n1\n1\n5\n").unwrap();
    let o = wavecode(&["compress", "--input", "s.txt", "--algo", "hybrid", "--B", "1", "--weights", "w.txt"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("# weights=w.txt"));
    let o = wavecode(&["compress", "--input", "s.txt", "--algo", "greedy", "--B", "1", "--weights", "w.txt"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_tables() {
    let dir = setup();
    let o = wavecode(
        &["bench", "--n", "256", "--period", "32", "--budgets", "0,4..6", "--prefixes", "6..7", "--repeats", "1", "--errors", "e.csv", "--times", "t.csv"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let e = std::fs::read_to_string(dir.path().join("e.csv")).unwrap();
    assert!(e.contains("# dataset=saw(n=256,period=32)"));
    assert!(e.contains("violations=[]"), "{e}");
    let r = rows(&e);
    assert_eq!(r.len(), 4 * 3);
    let norm = wavecode::LpNorm::INF.norm(wavecode::signal::saw(256, 32).unwrap());
    for row in r.iter().filter(|r| field(r, "B") == "0") {
        assert!((field(row, "error").parse::<f64>().unwrap() - norm).abs() < 1e-9);
    }
    let t = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert_eq!(rows(&t).len(), 3 * 2);
}

#[test]
fn bench_missing_djia_points_to_source() {
    let dir = setup();
    let o = wavecode(&["bench", "--dataset", "djia", "--input", "dj.txt"], dir.path());
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).contains(wavecode::signal::DJIA_SOURCE), "{}", stderr(&o));
}

#[test]
fn image_pipeline() {
    let dir = setup();
    let o = wavecode(&["image", "--card", "16x16", "--B", "8", "--p", "inf", "--output", "out.pgm", "--report", "r.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let bytes = std::fs::read(dir.path().join("out.pgm")).unwrap();
    assert!(bytes.starts_with(b"P5\n16 16\n255\n"));
    assert_eq!(bytes.len(), "P5\n16 16\n255\n".len() + 256);
    let rep = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert!(rep.contains("p,B,error"));
    assert_eq!(rows(&rep).len(), 3);

    let o = wavecode(&["image", "--input", "out.pgm", "--B", "256", "--output", "again.pgm", "--format", "binary"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read(dir.path().join("again.pgm")).unwrap(), bytes);
}
