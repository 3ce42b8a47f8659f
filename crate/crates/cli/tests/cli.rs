//! End-to-end runs of the binary: outputs, manifests, determinism and exit
//! codes.

use std::path::Path;
use std::process::{Command, Output};

use gpmix::io::manifest::RunManifest;

const SMALL: &[&str] = &[
    "--set", "grid.n=16",
    "--set", "grid.box_length=12",
    "--set", "dynamics.t_final=0.05",
    "--set", "dynamics.dt=0.005",
    "--set", "dynamics.sample_every=2",
    "--set", "sweep.n_list=4,8",
    "--set", "groundstate.tol=1e-9",
];

fn gpmix(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gpmix"))
        .args(args)
        .arg("--out")
        .arg(out)
        .args(["--threads", "1"])
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str], out: &Path) {
    let o = gpmix(args, out);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn scatter_from_flags_only() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["scatter", "--lambda", "1", "--radii", "25,50"], dir.path());
    let csv = std::fs::read_to_string(dir.path().join("scatter.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "pair,lambda,R,a_lambda,epsilon,nu_ell,int_Vf,dev_8pia,sup_rw,sup_r2dw");
    assert_eq!(lines.len(), 1 + 3 * 2);
    let a: f64 = lines[1].split(',').nth(3).unwrap().parse().unwrap();
    assert!((a - (1.0 - 1f64.tanh())).abs() < 1e-9);
    let m = RunManifest::read(dir.path()).unwrap();
    assert_eq!(m.subcommand, "scatter");
    assert_eq!(m.threads, 1);
    assert!(m.config.contains("radii = 25.0, 50.0"));
    m.verify(dir.path()).unwrap();
}

#[test]
fn every_subcommand_is_byte_reproducible() {
    for cmd in ["scatter", "groundstate", "evolve", "morawetz", "sweep", "bogo"] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let mut args = vec![cmd];
        args.extend_from_slice(SMALL);
        run_ok(&args, a.path());
        run_ok(&args, b.path());
        let ma = RunManifest::read(a.path()).unwrap();
        let mb = RunManifest::read(b.path()).unwrap();
        assert!(!ma.files.is_empty(), "{cmd}");
        assert_eq!(ma.files, mb.files, "{cmd}");
        assert_eq!(ma.config_sha256, mb.config_sha256);
        ma.verify(a.path()).unwrap();
    }
}

#[test]
fn snapshot_feeds_later_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["evolve", "--set", "output.snapshot=true"];
    args.extend_from_slice(SMALL);
    run_ok(&args, dir.path());
    let snap = dir.path().join("final.bin");
    assert!(snap.exists());
    let set = format!("dynamics.snapshot={}", snap.display());
    let mut args = vec!["bogo", "--set", &set];
    args.extend_from_slice(SMALL);
    let out = dir.path().join("bogo");
    run_ok(&args, &out);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("bogo.json")).unwrap()).unwrap();
    assert!(v["symplectic_residual"].as_f64().unwrap() < 1e-10);
    assert_eq!(v["cross_symmetry_defect"].as_f64().unwrap(), 0.0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.ini");
    std::fs::write(&cfg, "[grid]\nn = 16\nspacing = 2\n").unwrap();
    let o = gpmix(&["scatter", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    let o = gpmix(&["scatter", "--config", "/nonexistent/run.ini"], dir.path());
    assert_eq!(o.status.code(), Some(4));

    let mut args = vec!["groundstate", "--set", "groundstate.max_iters=2"];
    args.extend_from_slice(SMALL);
    let o = gpmix(&args, dir.path());
    assert_eq!(o.status.code(), Some(3));
}
