//! End-to-end tests of the `ndit` binary: exit codes, output shapes and
//! the round trips between the subcommands.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn ndit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ndit"))
        .args(args)
        .output()
        .expect("failed to spawn ndit")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("process killed by signal")
}

fn build_sinsum(dir: &Path, axes: &str, name: &str) -> PathBuf {
    let table = dir.join(name);
    let out = ndit(&[
        "build",
        "--function",
        "sinsum",
        "--axes",
        axes,
        table.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    table
}

#[test]
fn build_reports_element_counts() {
    let dir = TempDir::new().unwrap();
    let table = dir.path().join("t2.ndit");
    let out = ndit(&[
        "build",
        "--function",
        "sinsum",
        "--axes",
        "grid:21:-1:1,grid:21:-1:1",
        table.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "441 elements");

    let table5 = dir.path().join("t5.ndit");
    let out = ndit(&[
        "build",
        "--function",
        "polyprod",
        "--axes",
        "grid:6:-1:1,grid:6:-1:1,grid:6:-1:1,grid:6:-1:1,grid:6:-1:1",
        table5.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "7776 elements");
}

#[test]
fn build_rejects_bad_usage() {
    let dir = TempDir::new().unwrap();
    let table = dir.path().join("t.ndit");
    let out = ndit(&["build", "--function", "nope", "--axes", "grid:3:0:1", table.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let out = ndit(&["build", "--function", "sinsum", "--axes", "grid:1:0:1", table.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let out = ndit(&["build", "--function", "hesse3", "--axes", "grid:3:0:1", table.to_str().unwrap()]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn csv_ingestion_with_header_and_duplicate_detection() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("data.csv");
    std::fs::write(&csv, "x,y,value\n0,0,1\n0,1,2\n1,0,3\n1,1,4\n").unwrap();
    let table = dir.path().join("t.ndit");
    let out = ndit(&["build", "--csv", csv.to_str().unwrap(), table.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "4 elements");

    let info = ndit(&["info", table.to_str().unwrap()]);
    assert!(stdout(&info).contains("D=2, leaves=4"));

    // A duplicate key row fails the build.
    std::fs::write(&csv, "0,0,1\n0,1,2\n0,0,9\n").unwrap();
    let out = ndit(&["build", "--csv", csv.to_str().unwrap(), table.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("duplicate"), "{}", stderr(&out));
}

#[test]
fn eval_returns_stored_ordinate_at_nodes() {
    let dir = TempDir::new().unwrap();
    let table = build_sinsum(dir.path(), "grid:5:0:1,grid:5:0:1", "t.ndit");
    let out = ndit(&[
        "eval",
        "--spec",
        "grid:polint1,grid:polint1",
        "--points",
        "0.5,0.25",
        table.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let expected: f64 = 0.5_f64.sin() + 0.25_f64.sin();
    let got: f64 = stdout(&out).trim().parse().unwrap();
    assert_eq!(got.to_bits(), expected.to_bits());
}

#[test]
fn eval_out_of_range_exit_codes_and_default_policy() {
    let dir = TempDir::new().unwrap();
    let table = build_sinsum(dir.path(), "grid:5:0:1,grid:5:0:1", "t.ndit");
    let out = ndit(&[
        "eval",
        "--spec",
        "grid:polint1,grid:polint1",
        "--points",
        "2.0,0.5",
        table.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("out of range"), "{}", stderr(&out));

    let out = ndit(&[
        "eval",
        "--spec",
        "grid:polint1,grid:polint1",
        "--points",
        "2.0,0.5",
        "--default",
        "0.0",
        table.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "0.0000000000000000e0");
}

#[test]
fn eval_hesse_prints_ten_components_for_3d() {
    let dir = TempDir::new().unwrap();
    let table = dir.path().join("h3.ndit");
    let out = ndit(&[
        "build",
        "--function",
        "hesse3",
        "--axes",
        "grid:7:-1:1,grid:7:-1:1,grid:7:-1:1",
        table.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let out = ndit(&[
        "eval",
        "--spec",
        "grid:polint3:h,grid:polint3:h,grid:polint3:h",
        "--points",
        "0.2,0.3,-0.4",
        table.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let line = stdout(&out);
    let line = line.trim();
    let fields: Vec<&str> = line.split(' ').collect();
    assert_eq!(fields.len(), 10, "{line}");
    // d2f/dx0.dx1 = 3 for hesse3.
    let fxy = fields
        .iter()
        .find(|f| f.starts_with("d2f/dx0.dx1="))
        .expect("mixed derivative present");
    let v: f64 = fxy.split('=').nth(1).unwrap().parse().unwrap();
    assert!((v - 3.0).abs() < 1e-6);
}

#[test]
fn eval_from_points_file_and_determinism() {
    let dir = TempDir::new().unwrap();
    let table = build_sinsum(dir.path(), "grid:9:0:2,grid:9:0:2", "t.ndit");
    let points = dir.path().join("points.txt");
    std::fs::write(&points, "0.1,0.2\n1.5 0.7\n# comment\n1.9,1.9\n").unwrap();
    let args = [
        "eval",
        "--spec",
        "sorted:spline,sorted:spline",
        "--points",
        points.to_str().unwrap(),
        table.to_str().unwrap(),
    ];
    let first = ndit(&args);
    assert_eq!(code(&first), 0, "{}", stderr(&first));
    assert_eq!(stdout(&first).lines().count(), 3);
    let second = ndit(&args);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn eval_spec_dimension_mismatch_is_a_format_failure() {
    let dir = TempDir::new().unwrap();
    let table = build_sinsum(dir.path(), "grid:5:0:1,grid:5:0:1", "t.ndit");
    let out = ndit(&[
        "eval",
        "--spec",
        "grid:polint1",
        "--points",
        "0.5,0.5",
        table.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
}

#[test]
fn info_shows_dimensions_counts_and_grid_detection() {
    let dir = TempDir::new().unwrap();
    let table = build_sinsum(dir.path(), "grid:21:-1:1,grid:21:-1:1,grid:21:-1:1", "t3.ndit");
    let out = ndit(&["info", table.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("D=3, leaves=9261"), "{text}");
    assert!(text.contains("range=[-1, 1]"), "{text}");
    assert!(text.contains("grid=yes"), "{text}");

    // Empty table.
    let empty = dir.path().join("empty.ndit");
    let map = ndinterp::MultiMap::new(2);
    let mut bytes = Vec::new();
    ndinterp::io::write_table(&map, &mut bytes).unwrap();
    std::fs::write(&empty, &bytes).unwrap();
    let out = ndit(&["info", empty.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("leaves=0"));
}

#[test]
fn truncated_table_fails_with_io_exit_code() {
    let dir = TempDir::new().unwrap();
    let table = build_sinsum(dir.path(), "grid:5:0:1", "t1.ndit");
    let mut bytes = std::fs::read(&table).unwrap();
    bytes.truncate(bytes.len() - 7);
    let broken = dir.path().join("broken.ndit");
    std::fs::write(&broken, &bytes).unwrap();
    let out = ndit(&["info", broken.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("byte"), "{}", stderr(&out));
}

#[test]
fn bench_reports_grid_sorted_identity_and_method_accuracy() {
    let dir = TempDir::new().unwrap();
    let table = build_sinsum(dir.path(), "grid:64:0:3,grid:64:0:3", "t.ndit");
    let out = ndit(&[
        "bench",
        "--spec",
        "sorted:polint3,sorted:polint3;grid:polint3,grid:polint3;sorted:polint1,sorted:polint1",
        "--reps",
        "1",
        table.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "spec,evals_per_sec,max_abs_error_vs_reference");
    assert_eq!(rows.len(), 4);
    let error_of = |row: &str| -> f64 { row.rsplit(',').next().unwrap().parse().unwrap() };
    // Grid search changes nothing but the lookup: identical results.
    assert_eq!(error_of(rows[2]), 0.0);
    // Linear interpolation is strictly less accurate than cubic here.
    assert!(error_of(rows[3]) > error_of(rows[2]), "{text}");
    assert!(error_of(rows[3]) > 1e-6, "{text}");
}

#[test]
fn bench_without_reps_omits_timing() {
    let dir = TempDir::new().unwrap();
    let table = build_sinsum(dir.path(), "grid:16:0:3", "t.ndit");
    let out = ndit(&[
        "bench",
        "--spec",
        "sorted:polint3;sorted:polint1",
        "--reps",
        "0",
        table.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    for row in text.lines().skip(1) {
        let rate = row.split(',').nth(1).unwrap();
        assert!(rate.is_empty(), "expected empty timing field in {row}");
    }
}

#[test]
fn bench_rejects_unknown_spec() {
    let dir = TempDir::new().unwrap();
    let table = build_sinsum(dir.path(), "grid:8:0:1", "t.ndit");
    let out = ndit(&[
        "bench",
        "--spec",
        "sorted:parabolic",
        table.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn polynomial_built_table_evaluates_under_spline_spec() {
    // Method independence of the stored format, exercised end to end.
    let dir = TempDir::new().unwrap();
    let table = build_sinsum(dir.path(), "grid:17:0:3,grid:17:0:3", "t.ndit");
    let out = ndit(&[
        "eval",
        "--spec",
        "sorted:spline,sorted:hermite",
        "--points",
        "1.0,2.0",
        table.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let got: f64 = stdout(&out).trim().parse().unwrap();
    let expected = 1.0_f64.sin() + 2.0_f64.sin();
    assert!((got - expected).abs() < 1e-3);
}
