//! End-to-end runs of the `ala` binary.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn ala(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ala")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = ala(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Deterministic covariates; `y` is Gaussian-like, `b` binary, `c` categorical.
fn write_data(dir: &Path, n: usize) -> PathBuf {
    let mut text = String::from("x1,x2,x3,c,y,b\n");
    for i in 0..n {
        let t = i as f64;
        let (x1, x2, x3) = ((t * 0.71).sin() * 1.3, (t * 1.37).cos(), ((t * 0.23).sin() + (t * 2.9).cos()) * 0.8);
        let noise = (t * 12.9898).sin() * 0.9;
        let y = 0.9 * x1 - 0.4 * x3 + noise;
        let b = u8::from(x1 + 0.5 * noise > 0.1);
        let c = ["red", "green", "blue"][i % 3];
        text.push_str(&format!("{x1},{x2},{x3},{c},{y},{b}\n"));
    }
    let p = dir.join("data.csv");
    std::fs::write(&p, text).unwrap();
    p
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn singleton_groups(dir: &Path) -> PathBuf {
    write(dir, "groups.csv", "column,group\nx1,1\nx2,2\nx3,3\n")
}

fn read_csv(path: &Path) -> Vec<HashMap<String, String>> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let headers = rdr.headers().unwrap().clone();
    rdr.records().map(|r| headers.iter().zip(r.unwrap().iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect()).collect()
}

fn read_meta(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("meta.json")).unwrap()).unwrap()
}

fn scores(dir: &Path) -> HashMap<String, f64> {
    read_csv(&dir.join("models.csv")).into_iter().map(|r| (r["model"].clone(), r["log_score"].parse().unwrap())).collect()
}

#[test]
fn three_columns_give_three_groups() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_data(tmp.path(), 60);
    let groups = singleton_groups(tmp.path());
    let out = tmp.path().join("out");
    ok(&["select", "--data", s(&data), "--groups", s(&groups), "--response", "y", "--family", "gaussian-known", "--out", s(&out)]);
    let meta = read_meta(&out);
    assert_eq!(meta["groups"], 3);
    assert_eq!(meta["p"], 3);
    assert_eq!(read_csv(&out.join("models.csv")).len(), 8);
    let inc = read_csv(&out.join("inclusion.csv"));
    assert_eq!(inc.iter().map(|r| r["group"].as_str()).collect::<Vec<_>>(), ["1", "2", "3"]);
}

#[test]
fn categorical_expansion_shares_one_group() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_data(tmp.path(), 60);
    let expanded = tmp.path().join("expanded");
    ok(&["expand", "--data", s(&data), "--out", s(&expanded), "--keep", "y,b", "--drop", "x2,x3", "--categorical", "c"]);
    let groups = read_csv(&expanded.join("groups.csv"));
    let cols: Vec<&str> = groups.iter().map(|r| r["column"].as_str()).collect();
    assert_eq!(cols, ["x1", "c=green", "c=red"]);
    let out = tmp.path().join("out");
    ok(&[
        "select", "--data", s(&expanded.join("data.csv")), "--groups", s(&expanded.join("groups.csv")), "--response", "y",
        "--family", "gaussian-known", "--out", s(&out),
    ]);
    let meta = read_meta(&out);
    assert_eq!(meta["group_sizes"], serde_json::json!([1, 2]));
    let inc = read_csv(&out.join("inclusion.csv"));
    assert_eq!(inc[1]["columns"], "c=green;c=red");
}

#[test]
fn spline_expansion_writes_a_hierarchy() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_data(tmp.path(), 80);
    let expanded = tmp.path().join("expanded");
    ok(&["expand", "--data", s(&data), "--out", s(&expanded), "--keep", "y,b", "--drop", "c", "--spline", "x1"]);
    let groups = read_csv(&expanded.join("groups.csv"));
    assert_eq!(groups.iter().filter(|r| r["group"] == "2").count(), 5);
    let cons = read_csv(&expanded.join("constraints.csv"));
    assert_eq!((cons[0]["child_group"].as_str(), cons[0]["parent_group"].as_str()), ("2", "1"));
    let out = tmp.path().join("out");
    ok(&[
        "select", "--data", s(&expanded.join("data.csv")), "--groups", s(&expanded.join("groups.csv")),
        "--constraints", s(&expanded.join("constraints.csv")), "--response", "y", "--family", "gaussian-known", "--out", s(&out),
    ]);
    // the spline group never appears without its linear group
    for r in read_csv(&out.join("models.csv")) {
        let bits: Vec<char> = r["model"].chars().collect();
        assert!(!(bits[1] == '1' && bits[0] == '0'), "{}", r["model"]);
    }
}

#[test]
fn constraint_cycle_is_rejected_and_printed() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_data(tmp.path(), 30);
    let groups = singleton_groups(tmp.path());
    let cons = write(tmp.path(), "cons.csv", "child_group,parent_group\n2,1\n3,2\n1,3\n");
    let out = ala(&[
        "select", "--data", s(&data), "--groups", s(&groups), "--constraints", s(&cons), "--response", "y", "--family",
        "gaussian-known", "--out", s(&tmp.path().join("out")),
    ]);
    assert_eq!(out.status.code(), Some(6));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("cyclic") && err.contains(" -> "), "{err}");
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn ingest_errors_have_distinct_codes_and_line_numbers() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write(tmp.path(), "bad.csv", "x1,y\n1,2\n3,4\nfoo,5\n");
    let groups = write(tmp.path(), "g.csv", "column,group\nx1,1\n");
    let out = s(&tmp.path().join("out")).to_string();
    let r = ala(&["select", "--data", s(&data), "--groups", s(&groups), "--response", "y", "--family", "gaussian-known", "--out", &out]);
    assert_eq!(r.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&r.stderr).contains("bad.csv:4:"));

    let flat = write(tmp.path(), "flat.csv", "x1,y\n1,0\n2,0\n3,0\n");
    let r = ala(&["select", "--data", s(&flat), "--groups", s(&groups), "--response", "nope", "--family", "gaussian-known", "--out", &out]);
    assert_eq!(r.status.code(), Some(5));

    let r = ala(&["select", "--data", s(&flat), "--groups", s(&groups), "--response", "y", "--family", "poisson", "--out", &out]);
    assert_eq!(r.status.code(), Some(14), "{}", String::from_utf8_lossy(&r.stderr));

    let r = ala(&["select", "--data", s(&data), "--groups", s(&groups), "--response", "y", "--family", "gaussian-known"]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn rerun_with_the_same_seed_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_data(tmp.path(), 120);
    let groups = singleton_groups(tmp.path());
    let run = |name: &str| {
        let out = tmp.path().join(name);
        ok(&[
            "select", "--data", s(&data), "--groups", s(&groups), "--response", "b", "--family", "logistic", "--search", "gibbs",
            "--scans", "2000", "--seed", "17", "--out", s(&out),
        ]);
        std::fs::read(out.join("models.csv")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn ala_matches_exact_on_gaussian_data() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_data(tmp.path(), 90);
    let groups = write(tmp.path(), "groups.csv", "column,group\nx1,1\nx2,2\nx3,2\n");
    let run = |name: &str, extra: &[&str]| {
        let out = tmp.path().join(name);
        let mut args = vec!["select", "--data", s(&data), "--groups", s(&groups), "--response", "y", "--family", "gaussian-known"];
        args.extend_from_slice(&["--phi", "0.7", "--g", "2.5", "--out", s(&out)]);
        args.extend_from_slice(extra);
        ok(&args);
        scores(&out)
    };
    let ala = run("ala", &["--method", "ala", "--variant", "log-joint"]);
    let exact = run("exact", &["--method", "exact"]);
    assert_eq!(ala.len(), 4);
    for (m, v) in &exact {
        assert!((ala[m] - v).abs() <= 1e-8, "{m}: {} vs {v}", ala[m]);
    }
}

#[test]
fn gibbs_probabilities_sum_to_one() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_data(tmp.path(), 100);
    let groups = singleton_groups(tmp.path());
    let out = tmp.path().join("out");
    ok(&[
        "select", "--data", s(&data), "--groups", s(&groups), "--response", "y", "--family", "gaussian", "--search", "gibbs",
        "--scans", "3000", "--seed", "3", "--out", s(&out),
    ]);
    let rows = read_csv(&out.join("models.csv"));
    let total: f64 = rows.iter().map(|r| r["prob"].parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
    let visits: u64 = rows.iter().map(|r| r["visits"].parse::<u64>().unwrap()).sum();
    assert_eq!(visits, 2700);
    let inc = read_csv(&out.join("inclusion.csv"));
    assert!(inc.iter().all(|r| r.contains_key("probability_rb")));
    assert_eq!(read_meta(&out)["violations"], 0);
}

#[test]
fn screening_and_refined_methods_run() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_data(tmp.path(), 150);
    let groups = singleton_groups(tmp.path());
    for (name, extra) in [
        ("screen", vec!["--screen", "0.2", "--method", "la"]),
        ("refined", vec!["--method", "ala-refined", "--steps", "2"]),
        ("unadjusted", vec!["--curvature", "off", "--intercept"]),
    ] {
        let out = tmp.path().join(name);
        let mut args = vec!["select", "--data", s(&data), "--groups", s(&groups), "--response", "b", "--family", "logistic"];
        args.extend(extra);
        args.extend(["--out", s(&out)]);
        ok(&args);
        let total: f64 = read_csv(&out.join("models.csv")).iter().map(|r| r["prob"].parse::<f64>().unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12, "{name}");
    }
    assert_eq!(read_meta(&tmp.path().join("refined"))["method"], "ala-refined(2)");
    assert!(read_meta(&tmp.path().join("screen"))["rho_hat"].as_f64().unwrap() > 0.0);
}

#[test]
fn exported_design_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_data(tmp.path(), 70);
    let groups = write(tmp.path(), "groups.csv", "column,group\nx3,5\nx1,2\nx2,5\n");
    let cons = write(tmp.path(), "cons.csv", "5,2\n");
    let first = tmp.path().join("first");
    let exported = tmp.path().join("exported");
    let common = ["--response", "b", "--family", "logistic", "--intercept"];
    let mut args = vec!["select", "--data", s(&data), "--groups", s(&groups), "--constraints", s(&cons)];
    args.extend(common);
    args.extend(["--out", s(&first), "--export-design", s(&exported)]);
    ok(&args);

    let second = tmp.path().join("second");
    let again = tmp.path().join("again");
    let (d2, g2, c2) = (exported.join("data.csv"), exported.join("groups.csv"), exported.join("constraints.csv"));
    let mut args = vec!["select", "--data", s(&d2), "--groups", s(&g2), "--constraints", s(&c2)];
    args.extend(common);
    args.extend(["--out", s(&second), "--export-design", s(&again)]);
    ok(&args);

    for f in ["data.csv", "groups.csv", "constraints.csv"] {
        assert_eq!(std::fs::read(exported.join(f)).unwrap(), std::fs::read(again.join(f)).unwrap(), "{f}");
    }
    assert_eq!(std::fs::read(first.join("models.csv")).unwrap(), std::fs::read(second.join("models.csv")).unwrap());
}

#[test]
fn meta_records_seed_hash_and_version() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_data(tmp.path(), 40);
    let groups = singleton_groups(tmp.path());
    let out = tmp.path().join("out");
    ok(&[
        "select", "--data", s(&data), "--groups", s(&groups), "--response", "y", "--family", "gaussian", "--seed", "99", "--out",
        s(&out),
    ]);
    let meta = read_meta(&out);
    assert_eq!(meta["seed"], 99);
    assert_eq!(meta["version"], env!("CARGO_PKG_VERSION"));
    let hash = meta["config_hash"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    assert!(hash.chars().all(|c| c.is_ascii_hexdigit()));
    assert!(meta["phi0"].as_f64().unwrap() > 0.0);
    assert!(meta["timings"]["total_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn zero_replicates_give_header_only_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sim");
    ok(&["simstudy", "--design", "aft-scenario1", "--replicates", "0", "--seed", "5", "--out", s(&out)]);
    for f in ["replicates.csv", "aggregate.csv", "errors_by_size.csv", "aggregate_by_size.csv"] {
        let text = std::fs::read_to_string(out.join(f)).unwrap();
        assert_eq!(text.lines().count(), 1, "{f}");
    }
    assert!(std::fs::read_to_string(out.join("replicates.csv")).unwrap().starts_with("design,replicate,seed"));
    assert_eq!(read_meta(&out)["seed"], 5);
}

#[test]
fn small_simstudies_report_every_method() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("gmom");
    ok(&["simstudy", "--design", "gmom-accuracy-fig3", "--replicates", "2", "--seed", "1", "--methods", "ala,la,exact", "--out", s(&out)]);
    let reps = read_csv(&out.join("replicates.csv"));
    assert_eq!(reps.len(), 6);
    assert_eq!(reps[0]["seed"], "1");
    assert_eq!(reps[3]["seed"], "2");
    let agg = read_csv(&out.join("aggregate.csv"));
    let exact = agg.iter().find(|r| r["method"] == "exact").unwrap();
    assert_eq!(exact["mean_abs_log_error"].parse::<f64>().unwrap(), 0.0);
    assert!(agg.iter().find(|r| r["method"] == "la").unwrap()["mean_abs_log_error"].parse::<f64>().unwrap() > 0.0);
    assert!(!read_csv(&out.join("aggregate_by_size.csv")).is_empty());

    let out = tmp.path().join("poisson");
    ok(&["simstudy", "--design", "poisson-figS1", "--replicates", "2", "--n", "200", "--p", "4", "--out", s(&out)]);
    let agg = read_csv(&out.join("aggregate.csv"));
    assert_eq!(agg.iter().map(|r| r["method"].as_str()).collect::<Vec<_>>(), ["ala", "ala-unadjusted"]);
    assert!(agg.iter().all(|r| r["mean_abs_log_error"].is_empty()));
}

#[test]
fn oracle_agrees_with_the_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_data(tmp.path(), 50);
    let groups = singleton_groups(tmp.path());
    let report = tmp.path().join("oracle.json");
    let out = ok(&[
        "oracle", "--data", s(&data), "--groups", s(&groups), "--response", "y", "--family", "gaussian-known", "--model", "100",
        "--draws", "200000", "--seed", "4", "--out", s(&report),
    ]);
    let printed: Value = serde_json::from_slice(&out.stdout).unwrap();
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(printed, saved);
    let exact = printed["scores"]["exact"]["log_ml"].as_f64().unwrap();
    let quad = printed["quadrature"]["log_ml"].as_f64().unwrap();
    let mc = &printed["monte_carlo"];
    assert!((quad - exact).abs() < 1e-8, "{quad} vs {exact}");
    assert!((mc["log_ml"].as_f64().unwrap() - exact).abs() < 4.0 * mc["rel_std_error"].as_f64().unwrap());
    assert_eq!(printed["dim"], 1);
}

#[test]
fn thread_count_comes_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_data(tmp.path(), 40);
    let groups = singleton_groups(tmp.path());
    let out = tmp.path().join("out");
    let args = ["select", "--data", s(&data), "--groups", s(&groups), "--response", "y", "--family", "gaussian-known", "--out", s(&out)];
    let bin = env!("CARGO_BIN_EXE_ala");
    let r = Command::new(bin).args(args).env("ALA_THREADS", "2").output().unwrap();
    assert!(r.status.success());
    assert_eq!(read_meta(&out)["threads"], 2);
    let r = Command::new(bin).args(args).env("ALA_THREADS", "zero").output().unwrap();
    assert_eq!(r.status.code(), Some(7));
}

#[test]
fn aft_selection_with_censoring() {
    let tmp = tempfile::tempdir().unwrap();
    let mut text = String::from("x1,x2,time,event\n");
    for i in 0..120 {
        let t = i as f64;
        let (x1, x2) = ((t * 0.71).sin(), (t * 1.37).cos());
        let log_t = 0.8 * x1 + 0.4 * (t * 12.9898).sin();
        let event = u8::from(i % 4 != 0);
        text.push_str(&format!("{x1},{x2},{},{event}\n", log_t.exp()));
    }
    let data = write(tmp.path(), "surv.csv", &text);
    let groups = write(tmp.path(), "groups.csv", "column,group\nx1,1\nx2,2\n");
    let out = tmp.path().join("out");
    ok(&[
        "select", "--data", s(&data), "--groups", s(&groups), "--response", "time", "--status", "event", "--family", "aft",
        "--intercept", "--out", s(&out),
    ]);
    let inc = read_csv(&out.join("inclusion.csv"));
    assert_eq!(inc[0]["group"], "intercept");
    assert_eq!(inc[0]["probability"].parse::<f64>().unwrap(), 1.0);
    assert!(inc[1]["probability"].parse::<f64>().unwrap() > 0.9);
    assert!(read_meta(&out)["phi0"].as_f64().unwrap() > 0.0);

    let r = ala(&["select", "--data", s(&data), "--groups", s(&groups), "--response", "time", "--family", "aft", "--out", s(&out)]);
    assert_eq!(r.status.code(), Some(7));
}

fn aggregate_row(out: &Path, method: &str) -> HashMap<String, f64> {
    let row = read_csv(&out.join("aggregate.csv")).into_iter().find(|r| r["method"] == method).unwrap();
    row.into_iter().filter_map(|(k, v)| v.parse().ok().map(|x| (k, x))).collect()
}

#[test]
fn logistic_study_separates_active_from_inactive() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("fig2");
    ok(&["simstudy", "--design", "logistic-fig2", "--replicates", "50", "--n", "5000", "--seed", "11", "--out", s(&out)]);
    let row = aggregate_row(&out, "ala");
    assert!(row["mean_inclusion_active"] >= 0.9, "{row:?}");
    assert!(row["mean_inclusion_inactive"] <= 0.1, "{row:?}");
}

#[test]
fn gmom_study_ala_beats_la_on_large_models() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("fig3");
    ok(&["simstudy", "--design", "gmom-accuracy-fig3", "--replicates", "100", "--seed", "21", "--methods", "ala,la", "--out", s(&out)]);
    let rows = read_csv(&out.join("aggregate_by_size.csv"));
    let err = |m: &str, k: usize| -> f64 {
        rows.iter().find(|r| r["method"] == m && r["size"] == k.to_string()).unwrap()["mean_abs_log_error"].parse().unwrap()
    };
    for k in 5..=10 {
        assert!(err("ala", k) <= err("la", k), "size {k}: {} vs {}", err("ala", k), err("la", k));
    }
}
