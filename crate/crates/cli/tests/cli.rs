use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sudoku-codes"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    serde_json::from_str(&stdout(&all)).unwrap()
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn write_grid(dir: &tempfile::TempDir, text: &str) -> String {
    let path = dir.path().join("grid.txt");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn variable_table_rows() {
    let csv = stdout(&["tables", "--q", "4", "--node", "variable", "--dv", "3"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 11);
    assert_eq!(lines[0], "in1,in2,multiplicity,p1,p2,p3,p4");
    assert_eq!(lines[6], "2,3,2,1/3,2/3,0,0");
}

#[test]
fn constraint_tables() {
    let csv = stdout(&["tables", "--q", "4", "--node", "constraint", "--dc", "4"]);
    assert_eq!(csv.lines().count(), 21);
    assert!(csv.contains("\n2,2,2,1,8/27,1/9,0,16/27\n"));
    let v = json(&["tables", "--q", "5", "--node", "constraint", "--dc", "3"]);
    assert_eq!(v["rows"].as_array().unwrap().len(), 15);
}

#[test]
fn threshold_and_precision() {
    let v = json(&["threshold", "--q", "3", "--dv", "3", "--dc", "3"]);
    assert!((v["theta"].as_f64().unwrap() - 0.98426).abs() <= 5e-4);
    let v = json(&["threshold", "--q", "5", "--dv", "3", "--dc", "5", "--precision", "1e-3"]);
    assert!((v["theta"].as_f64().unwrap() - 0.89843).abs() <= 5e-4);
    assert!(v["upper"].as_f64().unwrap() - v["lower"].as_f64().unwrap() <= 1e-3);
}

#[test]
fn rate_defaults() {
    let csv = stdout(&["rate", "--q", "4", "--dc", "4"]);
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let r: f64 = row[5].parse().unwrap();
    assert!((r - 0.4308).abs() < 5e-5);
    let v = json(&["rate", "--q", "4", "--k", "1"]);
    assert!((v["r_k"].as_f64().unwrap() - 0.4877).abs() < 1e-4);
}

#[test]
fn de_trace_converges_immediately_without_erasures() {
    let csv = stdout(&["de", "--q", "3", "--dv", "3", "--dc", "3", "--delta", "0"]);
    assert_eq!(csv.lines().last().unwrap(), "1,v2c,1,0,0");
    let v = json(&["de", "--q", "3", "--dv", "3", "--dc", "3", "--delta", "0"]);
    assert_eq!(v["outcome"], "converged");
    assert_eq!(v["iterations"], 1);
}

#[test]
fn sim_csv_and_json_agree() {
    let args = ["sim", "--q", "4", "--dv", "3", "--dc", "4", "--n", "240", "--deltas", "0.7,0.97", "--trials", "20", "--seed", "7"];
    let csv = stdout(&args);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "delta,trials,word_fail,sym_unresolved,mean_iters,solved,stalled,budget,wilson_lo,wilson_hi"
    );
    assert_eq!(lines.len(), 3);
    let v = json(&args);
    for (line, row) in lines[1..].iter().zip(v["rows"].as_array().unwrap()) {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        for (i, key) in ["delta", "trials", "word_fail", "sym_unresolved", "mean_iters", "solved", "stalled", "budget", "wilson_lo", "wilson_hi"]
            .iter()
            .enumerate()
        {
            assert_eq!(row[key].as_f64().unwrap(), f[i], "{key}");
        }
    }
    assert_eq!(stdout(&args), csv);
}

#[test]
fn solve_easy_puzzle() {
    let out = stdout(&["sudoku", "solve", &data("easy_9x9.txt")]);
    assert!(out.starts_with("status: solved\n"));
    assert!(!out.contains('.'));
    assert!(out.contains("483921657\n"));
}

#[test]
fn stall_exits_zero_with_candidates() {
    let v = json(&["sudoku", "solve", &data("hard_9x9.txt")]);
    assert_eq!(v["status"], "stalled");
    assert!(!v["candidates"].as_array().unwrap().is_empty());
    let text = stdout(&["sudoku", "solve", &data("hard_9x9.txt")]);
    assert!(text.contains("candidates:\nr1c2 {"));
}

#[test]
fn full_grid_is_echoed() {
    let grid = stdout(&["sudoku", "sample", "--seed", "11"]);
    let dir = tempfile::tempdir().unwrap();
    let v = json(&["sudoku", "solve", &write_grid(&dir, &grid)]);
    assert_eq!(v["status"], "solved");
    assert_eq!(v["iterations"], 0);
    let lines: Vec<&str> = grid.lines().collect();
    assert_eq!(v["grid"], serde_json::json!(lines));
}

#[test]
fn bad_grids() {
    let dir = tempfile::tempdir().unwrap();
    let dup = format!("55{}", ".".repeat(79));
    let out = run(&["sudoku", "solve", &write_grid(&dir, &dup)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("contradiction"));
    let short = run(&["sudoku", "solve", &write_grid(&dir, "123")]);
    assert_eq!(short.status.code(), Some(2));
    let junk = run(&["sudoku", "solve", &write_grid(&dir, &"x".repeat(81))]);
    assert_eq!(junk.status.code(), Some(2));
    let missing = run(&["sudoku", "solve", "/nonexistent/grid.txt"]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn sample_is_seeded() {
    let a = stdout(&["sudoku", "sample", "--box-rows", "2", "--box-cols", "3", "--seed", "4"]);
    assert_eq!(a, stdout(&["sudoku", "sample", "--box-rows", "2", "--box-cols", "3", "--seed", "4"]));
    assert_eq!(a.lines().count(), 6);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rate.csv");
    let out = stdout(&["rate", "--q", "3", "--out", path.to_str().unwrap()]);
    assert!(out.is_empty());
    assert!(std::fs::read_to_string(path).unwrap().starts_with("q,dv,dc,k,r_k,r_limit\n3,3,3,"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["threshold", "--q", "1"]).status.code(), Some(2));
    assert_eq!(run(&["de", "--q", "3", "--delta", "1.5"]).status.code(), Some(2));
    assert_eq!(run(&["rate", "--q", "4", "--dc", "5"]).status.code(), Some(2));
    assert_eq!(run(&["tables", "--q", "4", "--node", "variable"]).status.code(), Some(2));
}
