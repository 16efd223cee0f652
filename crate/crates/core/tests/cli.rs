use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use transplanck::cli::RunConfig;

const BIN: &str = env!("CARGO_BIN_EXE_transplanck");

fn workdir(name: &str) -> PathBuf {
    let d = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    fs::create_dir_all(&d).unwrap();
    d
}

fn run(dir: &Path, cmd: &str, config: &str, extra: &[&str]) -> Output {
    let path = dir.join(format!("{cmd}.json"));
    fs::write(&path, config).unwrap();
    Command::new(BIN)
        .arg(cmd)
        .arg("--config")
        .arg(&path)
        .args(extra)
        .env_remove("TRANSPLANCK_LOG")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

const MMS: &str = r#"{"model":{"variant":"modified-ms","beta":1000,"k_p":1}}"#;

#[test]
fn curve_for_modified_ms_has_one_peak() {
    let dir = workdir("curve_mms");
    let o = run(&dir, "dispersion-curve", MMS, &[]);
    assert!(o.status.success());
    assert!(o.stderr.is_empty());
    let text = stdout(&o);
    assert!(text.starts_with("k,omega,omega_squared,is_hump\n"));
    let rows = csv_rows(&text);
    let omega: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(omega[0], 0.0);
    assert_eq!(*omega.last().unwrap(), 0.0);
    let slopes: Vec<f64> = omega.windows(2).map(|w| w[1] - w[0]).collect();
    let sign_changes = slopes.windows(2).filter(|w| w[0] > 0.0 && w[1] <= 0.0).count();
    assert_eq!(sign_changes, 1);
    assert_eq!(rows.iter().filter(|r| r[3] == "1").count(), 1);
}

#[test]
fn curve_for_magueijo_smolin_is_monotone() {
    let dir = workdir("curve_ms");
    let o = run(&dir, "dispersion-curve", r#"{"model":{"variant":"magueijo-smolin","k_p":1}}"#, &[]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    let omega: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(omega.windows(2).all(|w| w[1] > w[0]));
    assert!(rows.iter().all(|r| r[3] == "0"));
}

#[test]
fn two_samples_give_endpoints() {
    let dir = workdir("curve_two");
    let o = run(&dir, "dispersion-curve", MMS, &["--samples", "2"]);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0].parse::<f64>().unwrap(), 0.0);
    assert_eq!(rows[1][0].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn scan_emits_six_rows() {
    let dir = workdir("scan");
    let o = run(&dir, "scan", r#"{"scan":{"betas":[1.05,10.5],"Ls":[0.5,1,2]}}"#, &[]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("beta,L,k_H_over_kp,interpretation,ratio,est_error\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert_eq!(r[3], "iterated-inner");
        // 17 significant digits round-trip
        let v: f64 = r[4].parse().unwrap();
        assert_eq!(format!("{v:.16e}"), r[4]);
    }
}

#[test]
fn find_kh_above_hump_exits_3() {
    let dir = workdir("kh_above");
    let cfg = r#"{"model":{"variant":"modified-ms","beta":1000,"k_p":1},"scales":{"H0":1e-3,"k_p":1}}"#;
    let o = run(&dir, "find-kh", cfg, &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("no root"));
}

#[test]
fn ratio_at_zero_k_h_is_one_and_report_round_trips() {
    let dir = workdir("ratio_zero");
    let cfg = r#"{"model":{"variant":"modified-ms","beta":1000,"k_p":1},"spectra":{"k_h":{"explicit":0}}}"#;
    let o = run(&dir, "ratio", cfg, &[]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["ratio"]["ratio"].as_f64(), Some(1.0));
    assert_eq!(v["flags"]["interpretation"], "iterated-inner");
    assert_eq!(v["flags"]["sign"], "eq27c");
    assert_eq!(v["flags"]["normalization"], "second-derivative");
    let embedded = RunConfig::from_json(&v["config"].to_string()).unwrap();
    assert_eq!(embedded, RunConfig::from_json(cfg).unwrap());
}

#[test]
fn every_json_report_revalidates() {
    let dir = workdir("json_all");
    let cfg = r#"{
        "model": {"variant":"modified-ms","beta":1000,"k_p":1},
        "scales": {"H0":1e-40,"k_p":1},
        "spectra": {"k_h":{"explicit":0.5},"beta_mode":"full"},
        "scan": {"betas":[1.05],"Ls":[1]},
        "curve": {"samples":11},
        "reconstruction": {"k_init":0.1,"c1":0,"k_evol":1,"A":1,"tau":{"uniform":{"start":0,"end":1,"steps":10}},"a1":1}
    }"#;
    for cmd in ["dispersion-curve", "ratio", "scan", "bogoliubov", "reconstruct", "find-kh", "find-hump"] {
        let o = run(&dir, cmd, cfg, &["--format", "json"]);
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        RunConfig::from_json(&v["config"].to_string()).unwrap_or_else(|e| panic!("{cmd}: {e}"));
        assert!(v["flags"].is_object());
    }
}

#[test]
fn flags_override_config() {
    let dir = workdir("flags");
    let cfg = r#"{
        "model": {"variant":"linear-free","k_p":1}
    }"#;
    let o = run(&dir, "ratio", cfg, &[]);
    assert_eq!(o.status.code(), Some(2));

    let cfg = r#"{
        "model": {"variant":"generalized-l","beta":1.05,"L":1,"k_p":1},
        "spectra": {"k_h":{"explicit":0.5}},
        "reconstruction": {"k_init":0.1,"c1":0,"k_evol":1,"A":1,"tau":{"uniform":{"start":0,"end":1,"steps":10}},"a1":1}
    }"#;
    let o = run(&dir, "ratio", cfg, &["--interpretation", "chain-rule", "--sign", "eq27d", "--normalization", "paper-literal"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["flags"]["interpretation"], "chain-rule");
    assert_eq!(v["flags"]["sign"], "eq27d");
    assert_eq!(v["flags"]["normalization"], "paper-literal");
    assert_eq!(v["ratio"]["interpretation"], "chain-rule");
}

#[test]
fn unknown_keys_exit_2() {
    let dir = workdir("unknown");
    let o = run(&dir, "ratio", r#"{"model":{"variant":"modified-ms","beta":1,"k_p":1,"gamma":2}}"#, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    let o = run(&dir, "scan", r#"{"quadrature":{"rel_tol":-1},"scan":{"betas":[1],"Ls":[1]}}"#, &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_4() {
    let dir = workdir("numerical");
    let cfg = r#"{
        "model": {"variant":"modified-ms","beta":0,"k_p":1000},
        "reconstruction": {"k_init":200,"c1":0,"k_evol":1,"A":1,"tau":{"uniform":{"start":0,"end":10,"steps":1000}},"a1":1}
    }"#;
    let o = run(&dir, "reconstruct", cfg, &[]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn out_flag_writes_file_only() {
    let dir = workdir("out");
    let target = dir.join("curve.csv");
    let o = run(&dir, "dispersion-curve", MMS, &["--out", target.to_str().unwrap(), "--samples", "5"]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert!(fs::read_to_string(&target).unwrap().starts_with("k,omega"));
}

#[test]
fn csv_headers() {
    let dir = workdir("headers");
    let o = run(&dir, "bogoliubov", "{}", &[]);
    assert!(stdout(&o).starts_with("k,omega_hat_plus,omega_hat_minus,gamma,beta_k_squared\n"));
    let cfg = r#"{
        "model": {"variant":"modified-ms","beta":1,"k_p":1},
        "reconstruction": {"k_init":0.1,"c1":0,"k_evol":1,"A":1,"tau":{"uniform":{"start":0,"end":1,"steps":10}},"a1":1}
    }"#;
    let o = run(&dir, "reconstruct", cfg, &[]);
    let text = stdout(&o);
    assert!(text.starts_with("tau,k,a,u_t,regime\n"));
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn schema_lists_blocks() {
    let o = Command::new(BIN).arg("schema").output().unwrap();
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["properties"]["model"].is_object());
    assert!(v["properties"]["reconstruction"].is_object());
}

#[test]
fn help_documents_exit_codes() {
    let o = Command::new(BIN).arg("--help").output().unwrap();
    let text = stdout(&o);
    for code in ["2  configuration", "3  domain", "4  numerical"] {
        assert!(text.contains(code), "{code}");
    }
}
