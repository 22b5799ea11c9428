use std::path::Path;
use std::process::{Command, Output};

fn besicovitch(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_besicovitch"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn construct_writes_one_rect_per_square() {
    let dir = tempfile::tempdir().unwrap();
    let out = besicovitch(dir.path(), &["construct", "--level", "3"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = read(dir.path().join("squares_3.csv"));
    assert_eq!(
        csv.lines().next(),
        Some("level,row_digits,col_digits,x0,y0,side")
    );
    assert_eq!(csv.lines().count(), 65);
    let svg = read(dir.path().join("squares_3.svg"));
    assert_eq!(svg.matches("<rect").count(), 64);
}

#[test]
fn levels_above_the_cap_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = besicovitch(dir.path(), &["construct", "--level", "11"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("squares_11.csv").exists());
}

#[test]
fn g_table_rows_and_jump_markers() {
    let dir = tempfile::tempdir().unwrap();
    for (k, rows) in [("0", 2), ("2", 17)] {
        let out = besicovitch(dir.path(), &["g", "--resolution", k]);
        assert_eq!(out.status.code(), Some(0));
        let csv = read(dir.path().join(format!("g_{k}.csv")));
        assert_eq!(csv.lines().count(), rows + 1);
    }
    let csv = read(dir.path().join("g_2.csv"));
    assert!(csv.contains("\n1/2,1/12\n"), "{csv}");
    // g jumps at every interior grid point of level 2
    let svg = read(dir.path().join("g_2.svg"));
    assert!(svg.matches(r#"class="jump""#).count() >= 15);
}

#[test]
fn needles_stitch_and_area_tables() {
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| assert_eq!(besicovitch(dir.path(), args).status.code(), Some(0));
    run(&["needles", "--resolution", "2"]);
    run(&["stitch", "--directions", "16"]);
    run(&["area", "--max-level", "2", "--lattice", "9", "--mc", "1000"]);

    let needles = read(dir.path().join("needles_2.csv"));
    assert_eq!(needles.lines().next(), Some("t,x0,y0,x1,y1"));
    assert_eq!(
        needles.lines().nth(1),
        Some(format!("0/1,0,{},1,{}", 1.0 / 3.0, 1.0 / 3.0).as_str())
    );

    let stitch = read(dir.path().join("stitch.csv"));
    assert_eq!(stitch.lines().count(), 17);
    let pieces: Vec<&str> = stitch
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(
        pieces,
        ["0", "0", "0", "1", "1", "2", "2", "3", "3", "4", "4", "5", "5", "6", "6", "7"]
    );

    let decay = read(dir.path().join("decay.csv"));
    let lines: Vec<&str> = decay.lines().collect();
    assert_eq!(lines[0], "n,area_estimate,guaranteed_upper,K,method,seed");
    assert_eq!(lines.len(), 1 + 3 + 3);
    assert!(lines[1].ends_with(",9,sweep,"));
    assert!(lines[4].ends_with(",1000,montecarlo,42"), "{}", lines[4]);
}

#[test]
fn invalid_pattern_is_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(&config, r#"{"sigma": [1, 1, 0, 2]}"#).unwrap();
    let out_dir = dir.path().join("out");
    let out = besicovitch(&out_dir, &["--config", config.to_str().unwrap(), "verify"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("column 1"));
    assert!(!out_dir.exists());
}

#[test]
fn unknown_commands_and_flags_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        besicovitch(dir.path(), &["frobnicate"]).status.code(),
        Some(2)
    );
    assert_eq!(besicovitch(dir.path(), &["g"]).status.code(), Some(2));
    assert_eq!(
        besicovitch(dir.path(), &["--convention", "sideways", "stitch"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn verify_is_deterministic_and_literal_convention_fails_only_coverage() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, lit) = (
        dir.path().join("a"),
        dir.path().join("b"),
        dir.path().join("lit"),
    );
    assert_eq!(
        besicovitch(&a, &["--seed", "7", "verify"]).status.code(),
        Some(0)
    );
    assert_eq!(
        besicovitch(&b, &["--seed", "7", "verify"]).status.code(),
        Some(0)
    );
    for name in ["verify_report.json", "verify_report.txt"] {
        assert_eq!(
            std::fs::read(a.join(name)).unwrap(),
            std::fs::read(b.join(name)).unwrap()
        );
    }

    let out = besicovitch(&lit, &["--convention", "literal", "verify"]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value =
        serde_json::from_str(&read(lit.join("verify_report.json"))).unwrap();
    let failed: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| !c["passed"].as_bool().unwrap())
        .map(|c| c["id"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["coverage"]);
    assert_eq!(report["checks"].as_array().unwrap().len(), 23);
}
