use std::path::Path;
use std::process::Command;

use restaurant_cli::main_with_args;
use restaurant_pomdp::EpisodeTrace;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["restaurant"];
    full.extend_from_slice(args);
    let code = main_with_args(full, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_a_readable_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.jsonl");
    let (code, out, _) = run(&["run", "--seed", "4", "--out", s(&trace)]);
    assert_eq!(code, 0);
    let t = EpisodeTrace::read_jsonl(std::io::BufReader::new(
        std::fs::File::open(&trace).unwrap(),
    ))
    .unwrap();
    assert_eq!(t.seed, 4);
    assert!(out.contains(&t.discounted_return.to_string()));
}

#[test]
fn zero_horizon_gives_empty_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.jsonl");
    let (code, out, _) = run(&["run", "--override", "horizon=0", "--out", s(&trace)]);
    assert_eq!(code, 0);
    assert!(out.contains("0 steps, discounted return 0"));
    let text = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn config_file_is_used_and_checked() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"n_tables": 1, "horizon": 5}"#).unwrap();
    let trace = dir.path().join("t.jsonl");
    assert_eq!(run(&["run", "--config", s(&cfg), "--out", s(&trace)]).0, 0);
    let t = EpisodeTrace::read_jsonl(std::io::BufReader::new(
        std::fs::File::open(&trace).unwrap(),
    ))
    .unwrap();
    assert_eq!(t.config.n_tables, 1);

    std::fs::write(&cfg, r#"{"n_tables": 1, "horizn": 5}"#).unwrap();
    let (code, _, err) = run(&["run", "--config", s(&cfg), "--out", s(&trace)]);
    assert_eq!(code, 2);
    assert!(err.contains("horizn"), "{err}");
}

#[test]
fn missing_config_names_the_path() {
    let (code, _, err) = run(&["run", "--config", "/definitely/not/here.json"]);
    assert_eq!(code, 2);
    assert!(err.contains("/definitely/not/here.json"), "{err}");
}

#[test]
fn bad_inputs_exit_two() {
    for args in [
        vec!["evaluate", "--policy", "bogus"],
        vec!["evaluate", "--policy", "mcts:budget=x"],
        vec!["run", "--scenario", "nowhere"],
        vec!["run", "--override", "no_such_key=1"],
        vec!["run", "--override", "horizon"],
        vec!["run", "--override", "gamma=2"],
        vec!["compare"],
        vec!["frobnicate"],
        vec!["run", "--seed", "minus-one"],
    ] {
        assert_eq!(run(&args).0, 2, "{args:?}");
    }
}

#[test]
fn evaluate_appends_rows_with_one_header() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("m.csv");
    let args = [
        "evaluate",
        "--episodes",
        "10",
        "--override",
        "n_tables=2",
        "--out",
        s(&csv_path),
    ];
    assert_eq!(run(&args).0, 0);
    assert_eq!(run(&args).0, 0);
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("schema_version,policy,"));
    assert_eq!(lines[1], lines[2]);
    let mut rdr = csv::Reader::from_path(&csv_path).unwrap();
    let row = rdr.records().next().unwrap().unwrap();
    assert_eq!(&row[0], "1");
    assert_eq!(&row[1], "random");
    assert_eq!(&row[5], "10");
}

#[test]
fn compare_reports_paired_errors() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("c.csv");
    let (code, out, _) = run(&[
        "compare",
        "--policy",
        "random",
        "--policy",
        "greedy",
        "--episodes",
        "30",
        "--override",
        "n_tables=2",
        "--out",
        s(&csv_path),
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("1. greedy"), "{out}");
    assert!(out.contains("paired"));
    let mut rdr = csv::Reader::from_path(&csv_path).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let rows: Vec<_> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][col("diff_vs_first")].parse::<f64>().unwrap(), 0.0);
    assert!(rows[1][col("diff_vs_first")].parse::<f64>().unwrap() > 0.0);
    assert!(rows[1][col("paired_std_error")].parse::<f64>().unwrap() > 0.0);

    let (code, _, _) = run(&[
        "compare",
        "--policy",
        "fcfs",
        "--episodes",
        "5",
        "--out",
        s(&csv_path),
    ]);
    assert_eq!(code, 0);
    assert_eq!(
        csv::Reader::from_path(&csv_path).unwrap().records().count(),
        1
    );
}

#[test]
fn verify_passes_on_clean_build() {
    let (code, out, _) = run(&["verify"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS")).count(), 4);
}

#[test]
fn verify_catches_tampered_penalty() {
    let (code, out, err) = run(&["verify", "--override", "reward.penalty_bases=[2.0,1.8,1.4]"]);
    assert_eq!(code, 1);
    assert!(out.contains("FAIL reward spot table"), "{out}");
    assert!(err.contains("reward spot table"));
}

#[test]
fn verify_reports_support_cap() {
    let (code, _, err) = run(&["verify", "--override", "support_cap=2"]);
    assert_eq!(code, 2);
    assert!(err.contains("cap"), "{err}");
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_restaurant");
    let status = Command::new(bin)
        .args(["run", "--config", "/no/such/file.json"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&status.stderr).contains("/no/such/file.json"));
    let status = Command::new(bin).arg("verify").output().unwrap();
    assert_eq!(status.status.code(), Some(0));
}

#[test]
fn seed_defaults_to_config_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    assert_eq!(
        run(&[
            "run",
            "--policy",
            "random",
            "--override",
            "seed=9",
            "--out",
            s(&a)
        ])
        .0,
        0
    );
    assert_eq!(
        run(&["run", "--policy", "random", "--seed", "9", "--out", s(&b)]).0,
        0
    );
    let ta = EpisodeTrace::read_jsonl(std::io::BufReader::new(std::fs::File::open(&a).unwrap()))
        .unwrap();
    let tb = EpisodeTrace::read_jsonl(std::io::BufReader::new(std::fs::File::open(&b).unwrap()))
        .unwrap();
    assert_eq!(ta.seed, 9);
    assert_eq!(ta.steps, tb.steps);
}
