use std::fs;
use std::path::Path;
use std::process::Command;

use bessel_mp::config::Mode;
use bessel_mp::{load_field, parse_config, run, RunConfig, Status};

const BIN: &str = env!("CARGO_BIN_EXE_bessel-mp");

fn config(text: &str, mode: Mode, out: &Path) -> RunConfig {
    let mut c = parse_config(text).unwrap();
    c.mode = mode;
    c.out = out.to_path_buf();
    c
}

const WELL: &str = "potential=well\nlambda=100\nmu=0.05\n";

#[test]
fn two_solutions_on_the_well_writes_both_fields() {
    let dir = tempfile::tempdir().unwrap();
    let report = run(&config(WELL, Mode::TwoSolutions, dir.path())).unwrap();
    assert!(report.passed(), "{}", report.to_json());
    let r = &report.stage("two_solutions").unwrap().result;
    let (m, c) = (r["m_lambda"].as_f64().unwrap(), r["c_lambda"].as_f64().unwrap());
    assert!(m < 0.0 && 0.0 < c, "m={m} c={c}");
    assert_eq!((r["lambda"].as_f64(), r["mu"].as_f64()), (Some(100.0), Some(0.05)));
    // Regression baseline for this pair on n=256, L=40.
    assert!((c - 1.493).abs() < 5e-3, "c = {c}");
    let mp = load_field(dir.path().join("mountain_pass.bmpf")).unwrap();
    let bm = load_field(dir.path().join("ball_min.bmpf")).unwrap();
    assert_eq!(mp.grid().n(), 256);
    assert!(mp.sub(&bm).unwrap().max_abs() > 0.1);
    for f in ["report.json", "trace.csv", "profile.csv", "trace_ball_min.csv", "profile_ball_min.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(trace.lines().next().unwrap(), "iter,energy,residual_norm,step_size,max_node_index");
}

#[test]
fn solve_report_round_trips_and_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = run(&config("seed=11", Mode::Solve, a.path())).unwrap();
    let rb = run(&config("seed=11", Mode::Solve, b.path())).unwrap();
    assert!(ra.passed());
    let text = fs::read_to_string(a.path().join("report.json")).unwrap();
    let back = bessel_mp::RunReport::from_json(&text).unwrap();
    assert_eq!(back.stages.len(), ra.stages.len());
    assert_eq!(back.status, Status::Passed);

    let mut ta = ra.without_timings();
    let mut tb = rb.without_timings();
    ta.config.out = "out".into();
    tb.config.out = "out".into();
    assert_eq!(ta, tb);
    let fa = fs::read(a.path().join("solution.bmpf")).unwrap();
    let fb = fs::read(b.path().join("solution.bmpf")).unwrap();
    assert_eq!(fa, fb);
}

#[test]
fn verify_emits_one_record_per_checker() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(
        "potential=well\nlambda=100\nchecks=assumptions,superquadratic_threshold,sublevel_l2_bound,splitting,superlevel_measure,embedding_constants\ntau=1.5\nembedding_trials=20",
        Mode::Verify,
        dir.path(),
    );
    let report = run(&c).unwrap();
    assert!(report.passed(), "{}", report.to_json());
    let names: Vec<&str> = report.stages.iter().map(|s| s.name.as_str()).collect();
    assert_eq!(
        names,
        ["build_spec", "assumptions", "superquadratic_threshold", "sublevel_l2_bound", "splitting", "superlevel_measure", "embedding_constants"]
    );
    for s in &report.stages[1..] {
        let obj = s.result.as_object().unwrap();
        for key in ["checker", "params", "seed", "pass", "witnesses"] {
            assert!(obj.contains_key(key), "{} lacks {key}", s.name);
        }
    }
    let r = &report.stage("superquadratic_threshold").unwrap().result;
    let threshold = r["witnesses"][0]["values"]["R"].as_f64().unwrap();
    assert!((threshold - 4.0).abs() < 0.04);
    let m = report.stage("superlevel_measure").unwrap().result["witnesses"][0]["values"]["measure"].as_f64().unwrap();
    assert!(m > 0.0);
}

#[test]
fn failing_stage_marks_report_but_keeps_outputs() {
    let dir = tempfile::tempdir().unwrap();
    // The sublevel bound needs a well potential; the coercive default makes that stage fail.
    let report = run(&config("checks=sublevel_l2_bound,superlevel_measure", Mode::Verify, dir.path())).unwrap();
    assert_eq!(report.status, Status::Failed);
    let failed = report.stage("sublevel_l2_bound").unwrap();
    assert!(!failed.pass && failed.error.is_some());
    assert!(report.stage("superlevel_measure").unwrap().pass);
    let text = fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert!(text.contains("\"FAILED\""));
}

#[test]
fn kernel_table_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let report = run(&config("kernel_alphas=2\nkernel_radii=0.5,1,2", Mode::KernelTable, dir.path())).unwrap();
    assert!(report.passed());
    let text = fs::read_to_string(dir.path().join("kernel_table.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "radius,alpha,dim,G_value,est_error");
    for (line, r) in lines.zip([0.5f64, 1.0, 2.0]) {
        let g: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!((g - 0.5 * (-r).exp()).abs() < 1e-8, "{line}");
    }
}

#[test]
fn probe_geometry_writes_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let report = run(&config("", Mode::ProbeGeometry, dir.path())).unwrap();
    assert!(report.passed());
    let r = &report.stage("probe_geometry").unwrap().result;
    assert!(r["eta"].as_f64().unwrap() > 0.0 && r["e_energy"].as_f64().unwrap() < 0.0);
    let e = load_field(dir.path().join("e.bmpf")).unwrap();
    assert_eq!(e.grid().n(), 256);
    assert!((r["e_norm"].as_f64().unwrap() - r["rho"].as_f64().unwrap()) > 0.0);
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.cfg", "kernel_alphas=2\nkernel_radii=1\n");
    let out = dir.path().join("out");
    let st = Command::new(BIN)
        .args(["kernel-table", "--config"])
        .arg(&good)
        .arg("--out")
        .arg(&out)
        .env("BESSELMP_THREADS", "2")
        .output()
        .unwrap()
        .status;
    assert!(st.success());
    assert!(out.join("kernel_table.csv").exists());

    let bad = write(dir.path(), "bad.cfg", "p=2.5\nq=1\nunknown=3\n");
    let o = Command::new(BIN).args(["solve", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&o.stderr);
    for key in ["p:", "q:", "unknown:"] {
        assert!(msg.contains(key), "{msg}");
    }

    let conflict = write(dir.path(), "conflict.cfg", "mode=verify\n");
    let o = Command::new(BIN).args(["solve", "--config"]).arg(&conflict).output().unwrap();
    assert_eq!(o.status.code(), Some(2));

    let threads = Command::new(BIN)
        .args(["kernel-table", "--config"])
        .arg(&good)
        .arg("--out")
        .arg(&out)
        .env("BESSELMP_THREADS", "zero")
        .output()
        .unwrap()
        .status;
    assert_eq!(threads.code(), Some(2));

    let failing = write(dir.path(), "failing.cfg", "checks=sublevel_l2_bound\n");
    let st = Command::new(BIN)
        .args(["verify", "--config"])
        .arg(&failing)
        .arg("--out")
        .arg(dir.path().join("vout"))
        .output()
        .unwrap()
        .status;
    assert_eq!(st.code(), Some(1));
    assert!(dir.path().join("vout/report.json").exists());
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"seed": 3, "kernel_alphas": [2], "kernel_radii": [1]}"#);
    let c = bessel_mp::load_config(&cfg, Mode::KernelTable, Some(9), Some(dir.path().join("o"))).unwrap();
    assert_eq!((c.seed, c.mode), (9, Mode::KernelTable));
    let c = bessel_mp::load_config(&cfg, Mode::KernelTable, None, None).unwrap();
    assert_eq!(c.seed, 3);
}
