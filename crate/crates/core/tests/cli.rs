use std::process::Command;

use causal_order::report::{Report, CSV_HEADER};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_causal-order"))
}

fn run(args: &[&str]) -> (i32, String) {
    let out = bin().args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn classical_memoryless_json() {
    let (code, out) = run(&["--scenario", "classical-memoryless", "--output", "json", "--check"]);
    assert_eq!(code, 0);
    let report: Report = serde_json::from_str(&out).unwrap();
    assert_eq!(report.results.len(), 1);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["results"][0]["probability"]["exact"], "1/3");
}

#[test]
fn lose_verify_has_thirty_zero_residuals() {
    let (code, out) = run(&["--scenario", "lose-verify", "--output", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["results"][0]["probability"]["exact"], "1");
    let lines = v["results"][0]["certificate"]["transcript"].as_array().unwrap();
    let zeros = lines
        .iter()
        .filter(|l| l.as_str().unwrap().ends_with("sigma) = 0"))
        .count();
    assert_eq!(zeros, 30);
}

#[test]
fn all_scenarios_check_and_summary() {
    let (code, out) = run(&["--check"]);
    assert_eq!(code, 0, "{out}");
    let summary = &out[out.find("summary").expect("summary table")..];
    let values: Vec<&str> = summary
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().last().unwrap())
        .collect();
    assert_eq!(values.len(), 5);
    assert_eq!(values[0], "1/3");
    assert_eq!(values[1], "5/6");
    assert!((values[2].parse::<f64>().unwrap() - 5.0 / 6.0).abs() < 1e-6);
    assert!((values[3].parse::<f64>().unwrap() - 1.0 / 3.0).abs() < 1e-6);
    assert_eq!(values[4], "1");
}

#[test]
fn csv_has_one_row_per_scenario() {
    let (code, out) = run(&["--scenario", "losr", "--output", "csv"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines, vec![CSV_HEADER, lines[1]]);
    assert!(lines[1].starts_with("losr,0.8333333333333334,5/6,"));
}

#[test]
fn runs_are_deterministic_apart_from_timing() {
    let strip = |s: String| {
        let mut v: serde_json::Value = serde_json::from_str(&s).unwrap();
        for r in v["results"].as_array_mut().unwrap() {
            r["wall_time_ms"] = 0.into();
        }
        v
    };
    let args = ["--scenario", "quantum-memoryless", "--output", "json"];
    assert_eq!(strip(run(&args).1), strip(run(&args).1));
}

#[test]
fn usage_errors_exit_nonzero() {
    assert_ne!(run(&["--scenario", "four-party"]).0, 0);
    assert_ne!(run(&["--tolerance", "0"]).0, 0);
    assert_ne!(run(&["--max-iters", "0"]).0, 0);
}

#[test]
fn solver_failure_exits_two() {
    let (code, out) = run(&["--scenario", "nonsignaling", "--max-iters", "5", "--output", "json"]);
    assert_eq!(code, 2);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["results"][0]["status"], "failed");
}

#[test]
fn dump_matrices_writes_exact_sigma() {
    let dir = std::env::temp_dir().join(format!("causal-order-dump-{}", std::process::id()));
    let (code, _) = run(&[
        "--scenario",
        "two-party",
        "--dump-matrices",
        "--dump-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let sigma: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("sigma.json")).unwrap()).unwrap();
    assert_eq!(sigma["layout"], serde_json::json!(["A_I", "B_I", "C_I", "S"]));
    assert_eq!(sigma["data"][0][0], "1/60");
    assert_eq!(sigma["data"][1][1], "1/15");
    assert!(dir.join("m_cba.json").exists());
    let tableau = std::fs::read_to_string(dir.join("nonsignaling.tableau")).unwrap();
    assert!(tableau.starts_with("tableau 1\nsense maximize\n"));
    std::fs::remove_dir_all(dir).unwrap();
}
