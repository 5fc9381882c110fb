use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppa-rate")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn pep_table_over_a_range() {
    let o = run(&["pep", "--n", "1..10", "--lambda", "1.5"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[0][..5], ["N", "lambda", "eps_pep", "bound_classic", "bound_optimal"]);
    assert_eq!(rows.len(), 11);
    let last = &rows[10];
    assert_eq!(last[0], "10");
    let val = |i: usize| last[i].parse::<f64>().unwrap();
    assert!((val(3) - 1.0 / 33.0).abs() < 1e-10);
    assert!((val(4) - 1.0 / 34.0).abs() < 1e-10);
    assert!((val(2) - 1.0 / 34.0).abs() < 1e-6);
    assert!(String::from_utf8_lossy(&o.stderr).contains("max |eps_pep - bound_optimal|"));
}

#[test]
fn pep_single_horizon_json() {
    let o = run(&["pep", "--n", "1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let eps = v["rows"][0]["eps_pep"].as_f64().unwrap();
    assert!((eps - 0.142857).abs() < 1e-4);
    assert_eq!(v["all_sandwiched"], true);
}

#[test]
fn invalid_arguments_exit_with_usage_code() {
    for args in [
        &["pep", "--lambda", "2.0"][..],
        &["pep", "--lambda", "0"],
        &["pep", "--n", "0"],
        &["pep", "--n", "5..2"],
        &["example", "--n", "2", "--c", "5"],
        &["run", "--operator", "affine", "--matrix", "1,2;3"],
        &["nonsense"],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn solver_cap_exits_with_solver_code() {
    let o = run(&["pep", "--n", "6", "--max-iter", "5"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn run_affine_average() {
    let o = run(&[
        "run", "--operator", "affine", "--matrix", "1", "--offset=-1.5", "--w0", "1.5", "--n", "5",
        "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["average"][0].as_f64().unwrap() - 1.5).abs() < 1e-12);
    assert_eq!(v["classic_holds"], true);
    assert_eq!(v["optimal_holds"], true);
}

#[test]
fn run_zero_operator_stays_put() {
    let o = run(&["run", "--operator", "zero", "--w0", "1,2", "--n", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[0], ["k", "w0", "w1", "w_tilde0", "w_tilde1"]);
    for r in &rows[1..4] {
        assert_eq!(r[1..], ["1", "2", "1", "2"]);
    }
}

#[test]
fn example_reports_the_certificate() {
    let o = run(&["example", "--n", "2", "--lambda", "1.5", "--c", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let get = |key: &str| {
        csv_rows(&text)
            .into_iter()
            .find(|r| r[0] == key)
            .map(|r| r[1].parse::<f64>().unwrap())
            .unwrap()
    };
    assert!((get("achieved_ratio") - 0.1).abs() < 1e-12);
    assert!((get("w_star") - 5.0).abs() < 1e-12);
    assert!((get("above_argmax") - 5.0).abs() < 1e-3);
    assert!(get("below_max_ratio") < 0.0);
}

#[test]
fn verify_json_lists_failures() {
    let o = run(&["verify", "--format", "json", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["failures"].as_array().unwrap().is_empty());
}

#[test]
fn export_writes_a_readable_triplet_file() {
    let dir = std::env::temp_dir().join(format!("ppa-rate-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("n3.sdp");
    let o = run(&["export-sdp", "--n", "3", "--lambda", "1.5", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let (problem, _) = ppa_rate::sdp::triplet::from_str::<f64>(&text).unwrap();
    assert_eq!(problem, ppa_rate::pep::assemble::<f64>(3, 1.5).unwrap().to_sdp());

    assert_eq!(run(&["export-sdp", "--n", "1..3"]).status.code(), Some(2));

    let csv = dir.join("table.csv");
    let o = run(&["pep", "--n", "1..2", "--out", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(csv_rows(&std::fs::read_to_string(&csv).unwrap()).len(), 3);
    std::fs::remove_dir_all(&dir).unwrap();
}
