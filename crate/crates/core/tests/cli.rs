use std::process::{Command, Output};

fn hetbb84(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hetbb84"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of a CSV as (header, rows).
fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn optimal_threshold_at_zero_loss() {
    let o = hetbb84(&["pure-loss", "--eta", "1.0", "--tau", "opt"]);
    assert!(o.status.success());
    let (h, rows) = parse_csv(&stdout(&o));
    assert_eq!(h, ["eta", "loss_db", "tau", "Q", "E", "rate"]);
    assert!((rows[0][col(&h, "tau")] - 0.8012).abs() < 1e-3);
}

#[test]
fn no_transmission_no_key() {
    let o = hetbb84(&["pure-loss", "--eta", "0", "--tau", "1"]);
    let (h, rows) = parse_csv(&stdout(&o));
    assert_eq!(rows[0][col(&h, "rate")], 0.0);
}

#[test]
fn output_is_identical_across_runs_and_thread_counts() {
    let args = ["qi-compare", "--ed", "0,0.01", "--loss-db", "0:20:9"];
    let a = hetbb84(&[&args[..], &["--jobs", "1"]].concat());
    let b = hetbb84(&[&args[..], &["--jobs", "4"]].concat());
    let strip = |o: &Output| {
        stdout(o)
            .lines()
            .filter(|l| !l.starts_with("# args"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert!(a.status.success() && b.status.success());
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(
        stdout(&a),
        stdout(&hetbb84(&[&args[..], &["--jobs", "1"]].concat()))
    );
}

#[test]
fn metadata_lines_precede_header() {
    let text = stdout(&hetbb84(&["region", "--tau", "1", "--points", "3"]));
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# hetbb84 "));
    assert!(lines[1].starts_with("# args: region"));
    let (h, rows) = parse_csv(&text);
    assert_eq!(h, ["tau", "eta", "Q", "c_min", "c_max", "c_passive"]);
    assert_eq!(rows.len(), 3);
    // the passive line is the lower boundary
    for r in &rows {
        assert!((r[col(&h, "c_passive")] - r[col(&h, "c_min")]).abs() < 1e-12);
    }
}

#[test]
fn writes_to_file() {
    let path = std::env::temp_dir().join(format!("hetbb84-cli-{}.csv", std::process::id()));
    let o = hetbb84(&[
        "pure-loss",
        "--loss-db",
        "3",
        "--tau",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    let (_, rows) = parse_csv(&text);
    assert!((rows[0][0] - 10f64.powf(-0.3)).abs() < 1e-11);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["pure-loss", "--eta", "1:2"][..],
        &["pure-loss", "--eta", "1", "--loss-db", "0"][..],
        &["pure-loss", "--eta", "x"][..],
        &["pure-loss"][..],
        &["pure-loss", "--eta", "1", "--tau-range", "3:1"][..],
    ] {
        assert_eq!(hetbb84(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn infeasible_estimate_exits_3_with_interval() {
    let o = hetbb84(&[
        "estimate", "--Q", "0.52", "--c", "0.001", "--P", "0.4,0.6", "--tau", "1",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("attainable interval"), "{err}");
}

#[test]
fn estimate_on_passive_line_prints_breakdown() {
    let o = hetbb84(&[
        "estimate",
        "--Q",
        "0.5234141",
        "--c",
        "0.0902",
        "--P",
        "0.4,0.6",
        "--tau",
        "1",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    for key in [
        "tau=",
        "Q=",
        "c=",
        "E=",
        "f=",
        "D_terms=",
        "leak=",
        "rate=",
        "certificate=ok",
    ] {
        assert!(text.contains(key), "missing {key} in\n{text}");
    }
}

#[test]
fn verify_passes_and_perturbation_fails() {
    let ok = hetbb84(&["verify"]);
    assert_eq!(ok.status.code(), Some(0));
    let report = stdout(&ok);
    assert!(report.lines().filter(|l| l.starts_with("PASS")).count() >= 6);

    let bad = hetbb84(&["verify", "--perturb-lambda", "1:1e-6"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("FAIL  closed-form relative entropies"));
}

#[test]
fn gaussian_defaults_to_optimized_threshold() {
    let o = hetbb84(&["gaussian", "--noise", "1e-4", "--loss-db", "0,10"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = parse_csv(&stdout(&o));
    assert_eq!(
        &h[..5],
        ["loss_db", "N", "tau_opt", "rate_hybrid", "rate_cv_upper"]
    );
    assert!(rows[1][col(&h, "rate_hybrid")] < rows[1][col(&h, "rate_cv_upper")]);
}
