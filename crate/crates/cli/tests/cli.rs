use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bandwagon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bandwagon"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = bandwagon(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    bandwagon(args).status.code().unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(rows: &[Vec<String>], k: usize) -> Vec<f64> {
    rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

fn dir_snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

fn significant_digits(s: &str) -> usize {
    let mantissa = s.split(['e', 'E']).next().unwrap();
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    digits.trim_start_matches('0').len()
}

#[test]
fn demand_curves_have_expected_topology() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let listing = ok(&["demand", "--dist", "logistic", "--j", "1,2.2053,5", "--out", out]);
    assert_eq!(listing.lines().count(), 3);
    let curve = |name: &str| {
        let (header, rows) = read_csv(&tmp.path().join(name));
        assert_eq!(header, ["eta", "p_hat", "stable", "branch"]);
        rows
    };
    let monotone = column(&curve("demand_j1.csv"), 1);
    assert!(monotone.windows(2).all(|w| w[1] < w[0]));
    let s_shaped = curve("demand_j5.csv");
    let p = column(&s_shaped, 1);
    assert!(p.windows(2).any(|w| w[1] > w[0]));
    assert!(s_shaped.iter().any(|r| r[2] == "false" && r[3] == "gap"));
    assert!(s_shaped.iter().any(|r| r[3] == "low") && s_shaped.iter().any(|r| r[3] == "high"));
    let cusp = curve("demand_j2.2053.csv");
    assert!(cusp.iter().all(|r| r[3] == "unique"));

    ok(&["demand", "--j", "0", "--out", out, "--grid", "200"]);
    let flat = column(&curve("demand_j0.csv"), 1);
    assert_eq!(flat.len(), 200);
    assert!(flat.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = dir.path().to_str().unwrap();
        ok(&["demand", "--j", "1,5", "--out", out]);
        ok(&["phase-supply", "--grid", "60", "--out", out]);
        ok(&[
            "simulate",
            "--policy",
            "best-response",
            "--j",
            "5",
            "--p-hat",
            "2.5",
            "--seed",
            "42",
            "--out",
            out,
        ]);
    }
    assert_eq!(dir_snapshot(a.path()), dir_snapshot(b.path()));
}

#[test]
fn critical_points_match_published_values() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&["phase-customer", "--out", tmp.path().to_str().unwrap()]);
    let v: Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("critical_points.json")).unwrap()).unwrap();
    let expect = [
        ("A", "j", 1.86),
        ("A", "h", -0.80),
        ("B_supply", "j", 2.21),
        ("B_supply", "h", -1.10),
        ("C", "j", 2.61),
        ("C", "h", -1.09),
        ("D", "j", 3.27),
        ("D", "h", -1.42),
    ];
    for (point, key, value) in expect {
        let got = v[point][key].as_f64().unwrap();
        assert!((got - value).abs() <= 0.01, "{point}.{key} = {got}");
    }
    for name in ["phase_customer_pL.csv", "phase_customer_pU.csv"] {
        let (header, rows) = read_csv(&tmp.path().join(name));
        assert_eq!(header, ["j", "value"]);
        assert!(!rows.is_empty());
    }
}

#[test]
fn gaussian_supply_diagram_keeps_line_ordering() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&[
        "phase-supply",
        "--dist",
        "gaussian",
        "--grid",
        "80",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    let load = |name: &str| -> BTreeMap<String, f64> {
        let (_, rows) = read_csv(&tmp.path().join(format!("phase_supply_{name}.csv")));
        rows.into_iter()
            .map(|r| (r[0].clone(), r[1].parse().unwrap()))
            .collect()
    };
    let (hp, hm, hch, h0) = (load("hplus"), load("hminus"), load("hch"), load("hzero"));
    let mut compared = 0;
    for (j, v) in &hch {
        if let (Some(a), Some(b)) = (hp.get(j), hm.get(j)) {
            assert!(a <= v && v <= b, "j = {j}");
            compared += 1;
        }
        if let (Some(z), Some(a)) = (h0.get(j), hp.get(j)) {
            assert!(z > a);
        }
    }
    assert!(compared > 50);
    for name in ["hM", "hm", "minus_pL", "minus_pU"] {
        assert!(!load(name).is_empty());
    }
}

#[test]
fn optimize_selects_published_branches() {
    let kind = |j: &str, h: &str| {
        let v: Value = serde_json::from_str(&ok(&["optimize", "--j", j, "--h", h])).unwrap();
        v
    };
    assert_eq!(kind("2.5", "-1.23")["global"]["kind"], "interior_high");
    assert_eq!(kind("2.5", "-1.27")["global"]["kind"], "interior_low");
    let unique = kind("1", "1");
    assert_eq!(unique["candidates"].as_array().unwrap().len(), 1);
    assert_eq!(unique["global"]["kind"], "interior_unique");
    assert_eq!(unique["flags"]["coordination_required"], false);
    assert_eq!(unique["flags"]["windfall_possible"], false);

    let csv = ok(&[
        "optimize", "--j", "3.5", "--h", "-1.4", "--format", "csv", "--grid", "50",
    ]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("eta,p_d,p_s,pi"));
    assert_eq!(lines.count(), 50);
}

#[test]
fn simulate_reproduces_scenarios() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let outcome = || -> Value {
        serde_json::from_str(&fs::read_to_string(tmp.path().join("outcome.json")).unwrap()).unwrap()
    };

    ok(&[
        "simulate", "--policy", "sweep", "--j", "5", "--p-hat", "1,4", "--out", out,
    ]);
    let v = outcome();
    let step = 3.0 / 2000.0;
    let up = v["jumps_up"][0]["p_hat"].as_f64().unwrap();
    let down = v["jumps_down"][0]["p_hat"].as_f64().unwrap();
    assert!((up - 3.3021876495077076).abs() <= step);
    assert!((down - 1.6978123504922924).abs() <= step);
    let (header, rows) = read_csv(&tmp.path().join("trajectory.csv"));
    assert_eq!(header, ["t", "p", "eta", "pi", "branch"]);
    assert_eq!(rows.len(), 2 * 2001);

    ok(&[
        "simulate",
        "--policy",
        "introductory",
        "--j",
        "3.5",
        "--h",
        "-1.2",
        "--out",
        out,
    ]);
    assert_eq!(outcome()["verdict"], "success");
    ok(&[
        "simulate",
        "--policy",
        "tatonnement",
        "--j",
        "3.5",
        "--h",
        "-1.5",
        "--out",
        out,
    ]);
    assert_eq!(outcome()["verdict"], "trapped");
    ok(&[
        "simulate", "--policy", "minimax", "--j", "3.5", "--h", "-1.5", "--out", out,
    ]);
    assert_eq!(outcome()["minimax"]["choice"], "low_branch");
}

#[test]
fn numbers_use_twelve_significant_digits() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    ok(&["demand", "--j", "3.7", "--out", out]);
    let (_, rows) = read_csv(&tmp.path().join("demand_j3.7.csv"));
    for r in &rows {
        assert!(significant_digits(&r[0]) <= 12 && significant_digits(&r[1]) <= 12);
    }
    assert!(rows.iter().any(|r| significant_digits(&r[1]) == 12));
    let json = ok(&["optimize", "--j", "3.5", "--h", "-1.4"]);
    for token in json.split(|c: char| !(c.is_ascii_digit() || c == '.' || c == '-' || c == 'e')) {
        if token.parse::<f64>().is_ok() {
            assert!(significant_digits(token) <= 12, "{token}");
        }
    }
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["optimize", "--dist", "cauchy", "--j", "1", "--h", "0"]), 2);
    assert_eq!(code(&["optimize", "--j", "1"]), 2);
    assert_eq!(code(&["optimize", "--j", "-1", "--h", "0"]), 2);
    assert_eq!(code(&["demand"]), 2);
    assert_eq!(code(&["no-such-command"]), 2);
    assert_eq!(code(&["optimize", "--j", "0.5", "--h", "-40"]), 3);

    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "j = 1\nh = 0\ncolour = \"red\"\n").unwrap();
    assert_eq!(code(&["optimize", "--config", bad.to_str().unwrap()]), 2);
    let table = tmp.path().join("t.csv");
    fs::write(&table, "a,b\n0,0.5\n1,0.7\n2,0.9\n").unwrap();
    assert_eq!(
        code(&["check-dist", "--dist", &format!("table:{}", table.display())]),
        2
    );
    fs::write(&table, "x,F\n0,0.5\n1,0.4\n2,0.9\n").unwrap();
    assert_eq!(
        code(&["check-dist", "--dist", &format!("table:{}", table.display())]),
        2
    );
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, "dist = \"logistic\"\nj = 2.5\nh = -1.27\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let v: Value = serde_json::from_str(&ok(&["optimize", "--config", cfg])).unwrap();
    assert_eq!(v["global"]["kind"], "interior_low");
    let v: Value = serde_json::from_str(&ok(&["optimize", "--config", cfg, "--h", "-1.23"])).unwrap();
    assert_eq!(v["h"].as_f64().unwrap(), -1.23);
    assert_eq!(v["global"]["kind"], "interior_high");
}

#[test]
fn tabulated_distribution_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let table = tmp.path().join("logistic.csv");
    let beta = std::f64::consts::PI / 3f64.sqrt();
    let mut text = String::from("x,F\n");
    for k in 0..=300 {
        let x = -10.0 + 20.0 * k as f64 / 300.0;
        text.push_str(&format!("{x},{}\n", 1.0 / (1.0 + (-beta * x).exp())));
    }
    fs::write(&table, text).unwrap();
    let dist = format!("table:{}", table.display());
    let v: Value = serde_json::from_str(&ok(&["check-dist", "--dist", &dist])).unwrap();
    assert_eq!(v["regularity"]["regular"], true);
    assert!((v["critical"]["j_b"].as_f64().unwrap() - 4.0 / beta).abs() < 1e-3);
    let v: Value =
        serde_json::from_str(&ok(&["optimize", "--dist", &dist, "--j", "2.5", "--h", "-1.23"])).unwrap();
    assert_eq!(v["global"]["kind"], "interior_high");
}

#[test]
fn asymptotics_table() {
    let csv = ok(&["asymptotics", "--regime", "null-price", "--j", "5", "--grid", "5"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("epsilon,predicted,exact,abs_error"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r[3] < r[0]));
    assert_eq!(code(&["asymptotics", "--regime", "null-price"]), 2);
}
