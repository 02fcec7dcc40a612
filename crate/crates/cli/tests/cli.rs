use std::process::{Command, Output};

fn perpetuity(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_perpetuity"))
        .args(args)
        .output()
        .expect("spawn perpetuity")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn sample_writes_values_in_range() {
    let out = perpetuity(&["sample", "--n", "3", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    for line in lines {
        let mantissa = line.split('e').next().unwrap();
        let digits = mantissa.chars().filter(char::is_ascii_digit).count();
        assert!(digits >= 15, "{line}");
        let v: f64 = line.parse().unwrap();
        assert!((0.0..1.0).contains(&v));
    }
}

#[test]
fn sample_is_deterministic() {
    let a = perpetuity(&["sample", "--n", "1000", "--seed", "7"]);
    let b = perpetuity(&["sample", "--n", "1000", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
    let c = perpetuity(&["sample", "--n", "1000", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
    let d = perpetuity(&["sample", "--n", "1000", "--seed", "7", "--workers", "3"]);
    let e = perpetuity(&["sample", "--n", "1000", "--seed", "7", "--workers", "3"]);
    assert_eq!(d.stdout, e.stdout);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["sample", "--n", "0"][..],
        &["sample"][..],
        &["hist", "--bins", "0"][..],
        &["frobnicate"][..],
        &["validate", "--n", "10"][..],
    ] {
        let out = perpetuity(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn unwritable_output_exits_3() {
    let out = perpetuity(&["sample", "--n", "5", "--out", "/nonexistent-dir/x.txt"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!out.stderr.is_empty());
}

#[test]
fn hist_single_bin() {
    let out = perpetuity(&["hist", "--n", "1000", "--bins", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines,
        vec![
            "bin_lo,bin_hi,density",
            "0.000000000000e0,1.000000000000e0,1.000000000000e0"
        ]
    );
}

#[test]
fn hist_rows_and_area() {
    let dir = tempdir();
    let path = dir.join("hist.csv");
    let out = perpetuity(&[
        "hist",
        "--n",
        "200000",
        "--bins",
        "50",
        "--seed",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.ends_with('\n'));
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 50);
    let mut area = 0.0;
    for (i, row) in rows.iter().enumerate() {
        assert!((row[0] - i as f64 / 50.0).abs() < 1e-15);
        assert!((row[1] - (i + 1) as f64 / 50.0).abs() < 1e-15);
        area += row[2] * (row[1] - row[0]);
    }
    assert!((area - 1.0).abs() < 1e-9);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn validate_default_passes() {
    let out = perpetuity(&["validate"]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("PASS sampler.ks_vs_forward_chain.statistic"));
    assert!(text.contains("PASS sampler.mean.abs_error"));
    assert!(text.contains("target=0.333333333"));
    assert!(text
        .trim_end()
        .ends_with("overall PASS (0 of 18 checks failed)"));
}

#[test]
fn validate_csv() {
    let out = perpetuity(&["validate", "--n", "10000", "--csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("check_name,measured,tolerance,pass"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 18);
    assert!(rows.iter().all(|r| r.ends_with(",true")));
}

#[test]
fn bench_reports_backoff() {
    let out = perpetuity(&["bench", "--n", "1000000"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let field = |name: &str| -> f64 {
        text.lines()
            .find(|l| l.starts_with(name))
            .and_then(|l| l.split_whitespace().nth(1))
            .unwrap_or_else(|| panic!("missing {name} in {text}"))
            .parse()
            .unwrap()
    };
    assert!((field("mean_backoff_n") - 7.0).abs() <= 0.05);
    assert!((field("mean_chain_uniforms") - 8.0).abs() <= 0.05);
    assert!(field("samples_per_second") > 0.0);
    assert!(field("wall_time_s") >= 0.0);
}

fn tempdir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("perpetuity-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
