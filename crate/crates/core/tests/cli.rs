use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_blowup-lab");
const CONFIGS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs");

fn cli(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Copies a bundled config into `dir` so outputs land there.
fn staged(name: &str, dir: &Path) -> String {
    let dst = dir.join(format!("{name}.cfg"));
    std::fs::copy(Path::new(CONFIGS).join(format!("{name}.cfg")), &dst).unwrap();
    dst.to_string_lossy().into_owned()
}

#[test]
fn weight_prints_the_constraint_report() {
    let out = cli(&["weight", "--n", "2", "--m", "10"]);
    let text = stdout(&out);
    assert!(text.contains("gamma") && text.contains("(9)") && text.contains("overall: fail"), "{text}");
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(cli(&["weight", "--n", "2", "--m", "16"]).status.code(), Some(0));
}

#[test]
fn weight_search_certifies_each_exponent() {
    let out = cli(&["weight-search", "--n-list", "1.5,2,3", "--m-start", "1", "--m-factor", "2", "--m-max", "1024"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).matches("overall: pass").count(), 3);
}

#[test]
fn unknown_flags_exit_with_usage() {
    for args in [&["weight", "--n", "2", "--bogus", "1"][..], &["frobnicate"][..], &[][..]] {
        let out = cli(args);
        assert_eq!(out.status.code(), Some(64), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    }
}

#[test]
fn simulate_writes_outputs_and_audit_reproduces_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = staged("blowup", dir.path());
    let out = cli(&["simulate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2), "{}", stdout(&out));
    for f in ["out/blowup_trace.csv", "out/blowup_audit.csv", "out/blowup_summary.txt"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let trace = dir.path().join("out/blowup_trace.csv");
    let audit = cli(&["audit", "--trace", trace.to_str().unwrap(), "--config", &cfg]);
    assert_eq!(audit.status.code(), Some(2));
    let summary = std::fs::read_to_string(dir.path().join("out/blowup_summary.txt")).unwrap();
    let replayed_text = stdout(&audit);
    let replayed: Vec<&str> = replayed_text.lines().filter(|l| l.starts_with("audit.")).collect();
    assert_eq!(replayed.len(), 5);
    for line in replayed {
        assert!(summary.lines().any(|s| s == line), "{line} missing from summary");
    }
}

#[test]
fn zero_and_invalid_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = staged("zero", dir.path());
    assert_eq!(cli(&["simulate", "--config", &cfg]).status.code(), Some(0));

    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "grid.y_max = 10\ngrid.n_cells = 100\nsolver.horizon = 1\nsolver.dt_init = 0.01\nforcing.s_wall = constant(0.1)\n").unwrap();
    let out = cli(&["simulate", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("s_wall must be <= 0"));

    std::fs::write(&bad, "grid.y_max = 10\ngrid.n_cells = 100\nsolver.horizon = 1\nsolver.dt_init = 0.01\nsolver.dtt = 1\n").unwrap();
    let out = cli(&["simulate", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("solver.dtt"));
}

#[test]
fn predict_reports_threshold_and_time() {
    let cfg = format!("{CONFIGS}/blowup.cfg");
    let low = stdout(&cli(&["predict", "--g0", "1", "--config", &cfg]));
    assert!(low.contains("threshold_g0") && low.contains("no blowup guaranteed within horizon"), "{low}");
    let high = stdout(&cli(&["predict", "--g0", "1000", "--config", &cfg]));
    assert!(high.contains("predicted_blowup_time"), "{high}");
}

#[test]
fn phi_check_passes_for_a_pure_outer_flow_lift() {
    let out = cli(&["phi-check", "--ce", "1", "--cp", "0", "--ymax", "40", "--tmax", "10", "--n-cells", "1000", "--dt", "2e-3"]);
    let text = stdout(&out);
    assert!(text.contains("overall: pass"), "{text}");
}
