use std::path::Path;
use std::process::{Command, Output};

fn mixbgk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixbgk")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn verify_default_exits_zero_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.cfg", "[mixture]\nm1 = 1\n[verify]\ndraws = 50\n");
    let out = dir.path().join("out");
    let o = mixbgk(&["verify", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = std::fs::read_to_string(out.join("verify_report.txt")).unwrap();
    assert!(report.contains("overall: PASS"));
    assert!(report.contains("# resolved configuration:"));
}

#[test]
fn injected_fault_fails_the_energy_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.cfg", "[mixture]\ngamma = 0.1\n[verify]\ndraws = 20\n");
    let out = dir.path().join("out");
    let o = mixbgk(&["verify", "--config", &cfg, "--out", out.to_str().unwrap(), "--fault", "flip-gamma-t21"]);
    assert_eq!(code(&o), 1);
    let report = std::fs::read_to_string(out.join("verify_report.txt")).unwrap();
    let line = report.lines().find(|l| l.starts_with("mixing energy exchange")).unwrap();
    assert!(line.contains("FAIL"), "{line}");

    let o = mixbgk(&["verify", "--config", &cfg, "--fault", "nope"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn kernel_only_accepts_delta_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "k.cfg", "[mixture]\ndelta = 1\n");
    let out = dir.path().join("out");
    let o = mixbgk(&["verify", "--config", &cfg, "--out", out.to_str().unwrap(), "--kernel-only"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = std::fs::read_to_string(out.join("verify_report.txt")).unwrap();
    assert!(report.contains("dimension 9 (expected 9)"), "{report}");
    // Without the flag the same document is rejected.
    assert_eq!(code(&mixbgk(&["verify", "--config", &cfg])), 2);
}

#[test]
fn invalid_configs_exit_two_with_context() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.cfg", "[mixture]\nm1 = 2\ndelta = 0.2\n");
    let o = mixbgk(&["simulate", "--config", &cfg]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3") && err.contains("lower bound"), "{err}");

    let cfg = write_config(dir.path(), "typo.cfg", "[solver]\ntmax = 3\n");
    let err = String::from_utf8_lossy(&mixbgk(&["simulate", "--config", &cfg]).stderr).into_owned();
    assert!(err.contains("t_max"), "{err}");

    let missing = dir.path().join("missing.cfg");
    assert_eq!(code(&mixbgk(&["simulate", "--config", missing.to_str().unwrap()])), 2);

    let ok = write_config(dir.path(), "ok.cfg", "");
    assert_eq!(code(&mixbgk(&["sweep", "--config", &ok, "--delta-list", "0.1,x"])), 2);
}

#[test]
fn simulate_writes_series_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.cfg",
        "[grid]\nn_per_axis = 8\n[solver]\nt_max = 1\n[scenario]\nname = counter-flow\namplitude = 0.05\n",
    );
    let out = dir.path().join("out");
    let o = mixbgk(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("series.csv")).unwrap();
    assert!(csv.starts_with("t,energy,mass1,mass2,px,py,pz,E_total,n1,n2,U1x,U1y,U1z,U2x,U2y,U2z,T1,T2,T12,T21\n"));
    assert_eq!(csv.lines().count(), 1 + 21);
    assert!(std::fs::read_to_string(out.join("summary.txt")).unwrap().contains("terminal moments"));
}

#[test]
fn solver_abort_exits_three_and_keeps_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "abort.cfg",
        "[mixture]\nm1 = 2\nn10 = 1.2\nn20 = 0.8\n[grid]\nn_per_axis = 12\n[solver]\ndt = 4\nt_max = 40\n\
         equilibrium_mode = sampled\n[scenario]\nname = temperature-gap\namplitude = 0.5\n",
    );
    let out = dir.path().join("out");
    let o = mixbgk(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    let csv = std::fs::read_to_string(out.join("series.csv")).unwrap();
    assert!(csv.lines().count() >= 2);
}

#[test]
fn sweep_writes_rate_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "w.cfg", "[grid]\nn_per_axis = 12\n[solver]\nt_max = 20\n");
    let out = dir.path().join("out");
    let o = mixbgk(&[
        "sweep",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--delta-list",
        "0.1,0.5,0.9",
        "--omega-list",
        "0.5",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("rates.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "delta,omega,rate,r2,theory_floor,admissible");
    assert_eq!(lines.len(), 4);
    let summary = std::fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("monotonicity (2% tolerance): PASS"));

    // Every pair inadmissible.
    let o = mixbgk(&["sweep", "--config", &cfg, "--delta-list", "1.5"]);
    assert_eq!(code(&o), 2);
}
