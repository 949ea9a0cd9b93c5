use std::process::{Command, Output};

fn dilute(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dilute"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const HEADER: &str = "k,E,p,q,rho,gamma_mc,gamma_mc_se,gamma_mc2,gamma_mc2_se,gamma_hat_inf,gamma_hat_q_mc,gamma_hat_q_mc_se,gamma_hat_q_spectral,trunc_err,dos_rot,dos_rot_se,dos_pred,dos_eig,n_steps,seed";

fn records(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn rational_input_fills_q_columns() {
    let o = dilute(&["lyapunov", "--k-rational", "1/2", "--steps", "20000", "--no-timestamp"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("# config: {"));
    assert_eq!(text.lines().nth(1), Some(HEADER));
    let row = &records(&text)[0];
    assert_eq!(row[2], "1");
    assert_eq!(row[3], "2");
    assert!(!row[12].is_empty());
}

#[test]
fn clean_sweep_is_zero() {
    let o = dilute(&[
        "sweep-energy", "--k-grid", "0.5:2.5:3", "--rho", "0", "--steps", "20000", "--box", "0", "--no-timestamp",
    ]);
    assert!(o.status.success());
    let rows = records(&stdout(&o));
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert_eq!(r[5].parse::<f64>().unwrap(), 0.0);
        assert_eq!(r[6].parse::<f64>().unwrap(), 0.0);
        // The raw product stays bounded, so only an O(1/N) remainder survives.
        assert!(r[7].parse::<f64>().unwrap().abs() < 1e-4);
    }
}

#[test]
fn sweep_is_reproducible_across_threads() {
    let args = |t: &'static str| {
        vec!["sweep-energy", "--k-grid", "0.4:1.9:5", "--rho", "0.1", "--steps", "20000", "--box", "500", "--q-max", "8", "--no-timestamp", "--threads", t]
    };
    let a = stdout(&dilute(&args("1")));
    let b = stdout(&dilute(&args("3")));
    assert_eq!(a, b);
}

#[test]
fn timestamp_line_is_optional() {
    let o = dilute(&["dos", "--k", "1.0", "--steps", "20000", "--box", "0"]);
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("# generated:"));
}

#[test]
fn json_rows_mirror_csv() {
    let o = dilute(&["lyapunov", "--E", "-0.5", "--steps", "20000", "--format", "json", "--no-timestamp"]);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["config"]["command"], "lyapunov");
    assert_eq!(doc["rows"][0]["E"], -0.5);
}

#[test]
fn validation_errors_exit_one() {
    for args in [
        &["lyapunov", "--k", "4"][..],
        &["lyapunov", "--k-rational", "3/2"],
        &["lyapunov", "--k", "1", "--dist", "2:-1"],
        &["lyapunov"],
        &["sweep-energy", "--k-grid", "1:2"],
        &["lyapunov", "--k", "1", "--seed", "0xzz"],
    ] {
        let o = dilute(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn verify_reports_failures_with_exit_two() {
    let o = dilute(&["verify", "--suite", "fast"]);
    assert_eq!(o.status.code(), Some(2));
    let verdict: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let failed: Vec<u64> = verdict["criteria"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["id"].as_u64().unwrap())
        .collect();
    assert_eq!(failed, [1, 11]);
}
