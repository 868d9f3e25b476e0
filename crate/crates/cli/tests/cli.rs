use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_voronoi-rsw"));
    c.env_remove("VORONOI_RSW_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn data_rows(o: &Output) -> Vec<String> {
    stdout(o).lines().skip(1).map(String::from).collect()
}

fn field<'a>(row: &'a str, header: &str, name: &str) -> &'a str {
    let i = header.split(',').position(|h| h == name).expect("column");
    row.split(',').nth(i).expect("field")
}

const HEADER: &str = "event,kind-params,p,intensity,n,k,p_hat,ci_lo,ci_hi,seed,aborts";

#[test]
fn estimate_at_p_one() {
    let o = run(&["estimate", "--kind", "crossing", "--rho", "1", "--s", "4", "--p", "1", "--n-max", "64"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some(HEADER));
    let row = lines.next().unwrap();
    assert_eq!(field(row, HEADER, "p_hat"), "1");
    assert_eq!(field(row, HEADER, "k"), "64");
    assert_eq!(field(row, HEADER, "kind-params"), "rho=1;s=4;color=black;direction=horizontal");
}

#[test]
fn repeated_estimates_are_identical_and_append() {
    let dir = tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let args = [
        "estimate", "--kind", "crossing", "--rho", "2", "--s", "4", "--n-max", "300", "--seed", "11", "--csv",
        csv.to_str().unwrap(),
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success() && b.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], HEADER);
    assert_eq!(lines[1], lines[2]);
    assert_eq!(lines[1], data_rows(&a)[0]);
}

#[test]
fn thread_count_does_not_change_results() {
    let base = ["estimate", "--kind", "crossing", "--rho", "1", "--s", "4", "--n-max", "600", "--seed", "3"];
    let one = run(&[&base[..], &["--threads", "1"]].concat());
    let four = run(&[&base[..], &["--threads", "4"]].concat());
    let env = bin().args(base).env("VORONOI_RSW_THREADS", "2").output().unwrap();
    assert!(one.status.success() && four.status.success() && env.status.success());
    assert_eq!(stdout(&one), stdout(&four));
    assert_eq!(stdout(&one), stdout(&env));
}

#[test]
fn bad_thread_variable_is_a_usage_error() {
    let o = bin()
        .args(["estimate", "--kind", "f", "--s", "1", "--n-max", "10"])
        .env("VORONOI_RSW_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("VORONOI_RSW_THREADS"));
}

#[test]
fn config_file_with_flag_override_and_log() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let log = dir.path().join("run.jsonl");
    fs::write(&cfg, r#"{"kind": "one_arm", "s": 1, "t": 3, "p": 0.3, "n_max": 200, "master_seed": 9}"#).unwrap();
    let o = run(&["estimate", "--config", cfg.to_str().unwrap(), "--p", "0.6", "--log", log.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let row = &data_rows(&o)[0];
    assert_eq!(field(row, HEADER, "p"), "0.6");
    assert_eq!(field(row, HEADER, "seed"), "9");
    assert_eq!(field(row, HEADER, "n"), "200");

    let record: serde_json::Value = serde_json::from_str(fs::read_to_string(&log).unwrap().trim()).unwrap();
    assert_eq!(record["command"], "estimate");
    assert_eq!(record["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(record["seed"], 9);
    assert_eq!(record["config"]["p"], 0.6);
    assert_eq!(record["config"]["kind"], "one_arm");
    assert_eq!(record["results"][0]["n"], 200);
    assert!(record["timestamp"].is_u64());
}

#[test]
fn invalid_configurations_exit_with_usage_code() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"kind": "crossing", "s": 4, "rho": 1, "colour": "black"}"#).unwrap();
    let unknown = run(&["estimate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(stderr(&unknown).contains("colour"));

    let bad_p = run(&["estimate", "--kind", "crossing", "--rho", "1", "--s", "4", "--p", "1.5"]);
    assert_eq!(bad_p.status.code(), Some(2));
    assert!(stdout(&bad_p).is_empty());

    let wrong_field = run(&["estimate", "--kind", "f", "--s", "2", "--rho", "1"]);
    assert_eq!(wrong_field.status.code(), Some(2));

    let missing = run(&["estimate", "--config", dir.path().join("nope.json").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn sweep_rows_are_reconstructible() {
    let o = run(&[
        "sweep", "--kind", "crossing", "--rho", "1", "--s-list", "2,4", "--p-list", "0.4,0.6", "--n-max", "256",
        "--seed", "5",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&o);
    assert_eq!(rows.len(), 4);
    let seeds: std::collections::BTreeSet<&str> = rows.iter().map(|r| field(r, HEADER, "seed")).collect();
    assert_eq!(seeds.len(), 4);

    let row = &rows[3];
    let params = field(row, HEADER, "kind-params");
    let s = params.split(';').find_map(|kv| kv.strip_prefix("s=")).unwrap();
    let again = run(&[
        "estimate",
        "--kind",
        "crossing",
        "--rho",
        "1",
        "--s",
        s,
        "--p",
        field(row, HEADER, "p"),
        "--n-max",
        "256",
        "--seed",
        field(row, HEADER, "seed"),
    ]);
    assert_eq!(&data_rows(&again)[0], row);
}

#[test]
fn sweep_needs_a_list() {
    let o = run(&["sweep", "--kind", "crossing", "--rho", "1", "--s", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn phi_rows_and_empty_grid() {
    let o = run(&["phi", "--s", "4", "--grid", "0,0.5,1,2", "--n-max", "128"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let header = out.lines().next().unwrap();
    let rows = data_rows(&o);
    assert_eq!(rows.len(), 4);
    // H(0, 0) is impossible and H(s/2, s/2) likewise, so phi(0) = -P[H(0, s/2)] <= 0.
    assert!(field(&rows[0], header, "phi").parse::<f64>().unwrap() <= 0.0);

    let empty = run(&["phi", "--s", "4", "--grid", ""]);
    assert_eq!(empty.status.code(), Some(2));
    let none = run(&["phi", "--s", "4"]);
    assert_eq!(none.status.code(), Some(2));
    assert!(stderr(&none).contains("grid"));
}

#[test]
fn alpha_clips_at_p_one() {
    let o = run(&["alpha", "--s", "8", "--p", "1", "--n-max", "64"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let header = out.lines().next().unwrap();
    let row = &data_rows(&o)[0];
    assert_eq!(field(row, header, "alpha_hat"), "2");
    assert_eq!(field(row, header, "clipped"), "true");
}

#[test]
fn scan_echoes_alpha_inputs() {
    let o = run(&["scan", "--s-list", "3,6", "--p", "1", "--n-max", "64"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let header = out.lines().next().unwrap();
    for row in data_rows(&o) {
        let a: f64 = field(&row, header, "alpha_s").parse().unwrap();
        let b: f64 = field(&row, header, "alpha_2s3").parse().unwrap();
        let s: f64 = field(&row, header, "s").parse().unwrap();
        assert_eq!(a, s / 4.0);
        assert_eq!(b, s / 6.0);
        assert_eq!(field(&row, header, "good"), (a <= 2.0 * b).to_string());
    }
}

#[test]
fn arm_rows_and_summary() {
    let o = run(&["arm", "--s0", "1", "--t-list", "2,4,8", "--n-max", "256", "--seed", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&o);
    assert_eq!(rows.len(), 4);
    assert!(rows[..3].iter().all(|r| r.starts_with("one_arm,")));
    let summary = &rows[3];
    assert!(summary.starts_with("arm_fit,s0=1;t=2|4|8;eta,"));
    let eta: f64 = field(summary, HEADER, "p_hat").parse().unwrap();
    assert!(eta.is_finite());

    let bad = run(&["arm", "--s0", "1", "--t-list", "4,2"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn qi_rows() {
    let o = run(&["qi", "--s", "2", "--n-max", "64"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let header = out.lines().next().unwrap();
    let rows = data_rows(&o);
    assert_eq!(rows.len(), 2);
    let probe: f64 = field(&rows[0], header, "probe").parse().unwrap();
    let gaps: Vec<f64> = rows.iter().map(|r| field(r, header, "gap").parse::<f64>().unwrap()).collect();
    assert_eq!(probe, gaps.iter().map(|g| g.abs()).fold(0.0, f64::max));
}

#[test]
fn verify_fast_passes_and_catches_a_flipped_site() {
    let clean = run(&["verify", "--level", "fast"]);
    assert_eq!(clean.status.code(), Some(0), "{}", stdout(&clean));
    assert!(stdout(&clean).lines().all(|l| !l.starts_with("FAIL")));

    let mutated = run(&["verify", "--level", "fast", "--flip-one-site"]);
    assert_eq!(mutated.status.code(), Some(1));
    let out = stdout(&mutated);
    assert!(out.contains("FAIL duality-xor") || out.contains("FAIL oracle-equivalence"));
}

fn plot(csv: &Path, svg: &Path, x: &str, y: &str, extra: &[&str]) -> Output {
    let mut args = vec!["plot", "--in", csv.to_str().unwrap(), "--out", svg.to_str().unwrap(), "--x", x, "--y", y];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn plot_sweep_and_arm_outputs() {
    let dir = tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let o = run(&[
        "sweep", "--kind", "crossing", "--rho", "1", "--s-list", "1,2,4", "--n-max", "128", "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let svg = dir.path().join("f.svg");
    let p = plot(&csv, &svg, "s", "p_hat", &[]);
    assert!(p.status.success(), "{}", stderr(&p));
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.contains("<polyline"));
    assert_eq!(text.matches("<circle").count(), 3);

    let arm_csv = dir.path().join("arm.csv");
    let o = run(&["arm", "--t-list", "2,4", "--n-max", "128", "--csv", arm_csv.to_str().unwrap()]);
    assert!(o.status.success());
    let p = plot(&arm_csv, &dir.path().join("arm.svg"), "t", "p_hat", &["--log-x", "--log-y"]);
    assert!(p.status.success(), "{}", stderr(&p));
}

#[test]
fn plot_errors() {
    let dir = tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    fs::write(&csv, format!("{HEADER}\ncrossing,rho=1;s=2,0.5,1,10,5,0.5,0.2,0.8,1,0\n")).unwrap();
    let missing = plot(&csv, &dir.path().join("a.svg"), "s", "phi", &[]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(stderr(&missing).contains("'phi'"));

    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let e = plot(&empty, &dir.path().join("b.svg"), "s", "p_hat", &[]);
    assert_eq!(e.status.code(), Some(2));
    assert!(!dir.path().join("b.svg").exists());
}
