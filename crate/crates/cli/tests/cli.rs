use std::process::{Command, Output};

use serde_json::Value;

fn lfold(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lfold"))
        .args(args)
        .env_remove("LFOLD_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut a = args.to_vec();
    a.extend(["--format", "json"]);
    let out = lfold(&a);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn eigenform_build_verify_export() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tau.csv");
    let p = path.to_str().unwrap();
    let out = lfold(&["eigenform", "build", "--weight", "12", "--upto", "1000", "--out", p]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1001);
    assert_eq!(lines[2], "2,-24");

    let v = json(&["eigenform", "verify", "--in", p]);
    assert_eq!(v["status"], "pass");
    assert_eq!(v["result"]["count"], 1000);

    let v = json(&["eigenform", "export", "--in", p, "--upto", "3"]);
    assert_eq!(v["result"]["rows"][1]["a"], "-24");
    assert_eq!(v["result"]["rows"][2]["a"], "252");
}

#[test]
fn eigenform_verify_rejects_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tau.csv");
    let p = path.to_str().unwrap();
    assert_eq!(code(&lfold(&["eigenform", "build", "--weight", "12", "--upto", "50", "--out", p])), 0);
    let text = std::fs::read_to_string(&path).unwrap().replace("\n6,-6048\n", "\n6,-6047\n");
    std::fs::write(&path, text).unwrap();
    let out = lfold(&["eigenform", "verify", "--in", p]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("multiplicativity"));

    std::fs::write(&path, "n,a\n1,1\n3,252\n").unwrap();
    assert_eq!(code(&lfold(&["eigenform", "verify", "--in", p])), 2);
}

#[test]
fn eigenform_bad_weight() {
    let out = lfold(&["eigenform", "build", "--weight", "13"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("weight 13"));
    assert_eq!(code(&lfold(&["eigenform", "export", "--level", "11"])), 2);
}

#[test]
fn eigenform_cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let a = json(&["eigenform", "export", "--weight", "16", "--upto", "20", "--cache-dir", d]);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);
    let b = json(&["eigenform", "export", "--weight", "16", "--upto", "20", "--cache-dir", d]);
    assert_eq!(a["result"], b["result"]);
}

#[test]
fn qform_commands() {
    let v = json(&["qform", "class", "-D", "-23"]);
    assert_eq!(v["result"]["h"], 3);
    let forms: Vec<(i64, i64, i64)> = v["result"]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["a"].as_i64().unwrap(), r["b"].as_i64().unwrap(), r["c"].as_i64().unwrap()))
        .collect();
    assert_eq!(forms, vec![(1, 1, 6), (2, 1, 3), (2, -1, 3)]);

    let v = json(&["qform", "represent", "-a", "1", "-b", "0", "-c", "1", "--upto", "5"]);
    let r: Vec<u64> = v["result"]["rows"].as_array().unwrap().iter().map(|r| r["r"].as_u64().unwrap()).collect();
    assert_eq!(r, vec![4, 4, 0, 4, 8]);

    let v = json(&["qform", "reduce", "-a", "3", "-b", "-5", "-c", "3"]);
    assert_eq!(v["result"]["reduced"], serde_json::json!([1, 1, 3]));

    assert_eq!(code(&lfold(&["qform", "check-formula", "-D", "-4", "--upto", "10000"])), 0);
    assert_eq!(code(&lfold(&["qform", "check-formula", "-D", "-23"])), 2);
    assert_eq!(code(&lfold(&["qform", "class", "-D", "5"])), 2);
    assert_eq!(code(&lfold(&["qform", "class", "-D", "0"])), 2);
    assert_eq!(code(&lfold(&["qform", "reduce", "-a", "1", "-b", "0", "-c", "-1"])), 2);
}

#[test]
fn constants_and_cheb() {
    let v = json(&["constants", "--ell", "3"]);
    assert_eq!((v["result"]["A"].as_str(), v["result"]["B"].as_str()), (Some("5"), Some("8")));
    let v = json(&["constants", "--ell", "7"]);
    assert_eq!((v["result"]["A"].as_str(), v["result"]["B"].as_str()), (Some("93"), Some("128")));
    assert_eq!(code(&lfold(&["constants", "--ell", "4"])), 2);

    let v = json(&["cheb", "--ell", "3"]);
    assert_eq!(v["result"]["identity"], "pass");
    let rows = v["result"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0]["j"].as_u64(), rows[0]["A"].as_str()), (Some(3), Some("1")));
    assert_eq!((rows[1]["j"].as_u64(), rows[1]["A"].as_str()), (Some(1), Some("2")));
    assert_eq!(code(&lfold(&["cheb", "--ell", "4"])), 0);
}

#[test]
fn signchange_modes() {
    let v = json(&["signchange", "--mode", "Q", "--ell", "3", "-D", "-4", "--weight", "12", "--limit", "1000"]);
    assert_eq!(v["result"]["n"], 2);
    assert_eq!(v["result"]["a"], "-24");
    let p = &v["result"]["point"];
    let (x, y) = (p[0].as_i64().unwrap(), p[1].as_i64().unwrap());
    assert_eq!(x * x + y * y, 2);
    let v = json(&["signchange", "--mode", "D", "-D", "-23", "--limit", "100"]);
    assert_eq!(v["result"]["n"], 2);
    assert_eq!(v["result"]["form"], serde_json::json!([2, 1, 3]));
    // a_16(2) = 216, a_16(3) = -3348
    let v = json(&["signchange", "--mode", "I", "--weight", "16", "--limit", "100"]);
    assert_eq!(v["result"]["n"], 3);
    assert_eq!(v["result"]["a"], "-3348");
    assert_eq!(code(&lfold(&["signchange", "--mode", "Q", "--ell", "2", "-D", "-4"])), 2);
    assert_eq!(code(&lfold(&["signchange", "--mode", "Q", "--limit", "100"])), 2);
}

#[test]
fn sum_is_stable_and_formats_agree() {
    let args = ["sum", "--ell", "3", "-D", "-4", "--weight", "12", "--upto", "100"];
    let a = json(&args);
    let b = json(&args);
    assert_eq!(a["result"], b["result"]);
    let s = a["result"]["rows"][0]["S"].as_f64().unwrap();

    let mut csv_args = args.to_vec();
    csv_args.extend(["--format", "csv"]);
    let csv = stdout(&lfold(&csv_args));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("X,S,log_bound,ratio"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[1].parse::<f64>().unwrap().to_bits(), s.to_bits());

    let table = stdout(&lfold(&args));
    assert!(table.contains(&a["result"]["rows"][0]["S"].to_string()));
    assert!(table.contains("K=20"));
}

#[test]
fn sum_over_class_set_and_range_error() {
    let v = json(&["sum", "--ell", "3", "-D", "-23", "--grid", "1,2"]);
    assert_eq!(v["result"]["rows"][0]["S"], 2.0);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let p = path.to_str().unwrap();
    assert_eq!(code(&lfold(&["eigenform", "build", "--weight", "12", "--upto", "50", "--out", p])), 0);
    let out = lfold(&["sum", "--ell", "3", "-D", "-4", "--in", p, "--upto", "100"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--upto"));
}

#[test]
fn bounds_commands() {
    let v = json(&["bounds", "--thm", "1.2", "--ell", "3", "-D", "-4", "--weight", "12", "--u0", "2.235"]);
    let ln = v["result"]["ln_value"].as_f64().unwrap();
    let expect = (1.0 / 4.47 + 0.01) * 8.0 * 12f64.ln() - 32.0 / 2.235 * (std::f64::consts::PI / 2.0).ln()
        + (-24.0 / 4.47 + 0.01) * 4f64.ln();
    assert!((ln - expect).abs() < 1e-12);
    let v = json(&["bounds", "--thm", "1.1", "--ell", "3", "-D", "-4"]);
    assert!((v["result"]["value"].as_f64().unwrap() / 6.3e6 - 1.0).abs() < 0.01);
    assert_eq!(code(&lfold(&["bounds", "--thm", "1.2", "--ell", "3", "-D", "-4", "--u0", "1"])), 2);
    assert_eq!(code(&lfold(&["bounds", "--thm", "1.1", "--ell", "3", "-D", "-4", "--epsilon", "0"])), 2);
    assert_eq!(code(&lfold(&["bounds", "--thm", "1.3", "--ell", "3", "-D", "-4"])), 2);
}

#[test]
fn lowerbound_command() {
    let v = json(&["lowerbound", "--level", "210", "--Y", "10", "--prime-cutoff", "1000"]);
    assert_eq!(v["result"]["lhs"], 1.0);
    let v = json(&["lowerbound", "-D", "-4", "--Y", "100", "--prime-cutoff", "1000", "--diagnose-weight", "12"]);
    assert!(v["result"]["lhs"].as_f64().unwrap() > 0.0);
    assert_eq!(code(&lfold(&["lowerbound", "--Y", "1"])), 2);
}

#[test]
fn sigma_commands() {
    let v = json(&["sigma", "--ell", "3", "--find-u0"]);
    let u0 = v["result"]["u0"].as_f64().unwrap();
    assert!((u0 - 2.235).abs() < 0.25);
    assert_eq!(v["provenance"]["truncation_k"], 20);
    assert_eq!(v["provenance"]["grid_step"], 1e-4);

    let v = json(&["sigma", "--ell", "3", "--table", "--U", "1"]);
    let x1 = v["result"]["x1"].as_f64().unwrap();
    let rows = v["result"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 100);
    for r in rows {
        let u = r["u"].as_f64().unwrap();
        if u <= x1 {
            assert_eq!(r["sigma"].as_f64().unwrap(), u.powf(7.0));
        }
    }
    assert_eq!(code(&lfold(&["sigma", "--ell", "3", "--step", "0.5"])), 2);
    assert_eq!(code(&lfold(&["sigma", "--ell", "3", "--step", "0.005"])), 2);
}

#[test]
fn sigma_montecarlo_reproducible() {
    let args = ["sigma", "--ell", "3", "--mc", "2", "--samples", "50000", "--seed", "9"];
    let a = json(&args);
    let mut four = args.to_vec();
    four.extend(["--threads", "4"]);
    let b = json(&four);
    assert_eq!(a["result"], b["result"]);
    assert_eq!(b["provenance"]["seed"], 9);
    assert_eq!(b["provenance"]["threads"], 4);
}

#[test]
fn bad_usage_exits_2() {
    assert_eq!(code(&lfold(&["nonsense"])), 2);
    assert_eq!(code(&lfold(&["sigma", "--K", "0"])), 2);
}
