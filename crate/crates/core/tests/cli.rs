use std::path::Path;
use std::process::{Command, Output};

use awh_vlasov::output::read_snapshot;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_awh-vlasov"))
}

fn ok(out: Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

const SMALL_RUN: &str = "\
nv = 12
nx = 4
dt = 0.05
t_final = 0.5
nu = 2.0
snapshot_every = 4
";

fn run_small(dir: &Path) -> String {
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, SMALL_RUN).unwrap();
    ok(bin().arg("run").arg(&cfg).arg("--output").arg(dir.join("out")).output().unwrap())
}

#[test]
fn run_writes_all_outputs_deterministically() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let stdout = run_small(a.path());
    run_small(b.path());
    assert!(stdout.contains("steps        10"), "{stdout}");

    let out = a.path().join("out");
    let mut names: Vec<String> =
        std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(
        names,
        [
            "diagnostics.csv",
            "field.csv",
            "manifest.json",
            "snapshot_000000.csv",
            "snapshot_000004.csv",
            "snapshot_000008.csv",
            "snapshot_000010.csv"
        ]
    );
    for f in ["diagnostics.csv", "field.csv", "snapshot_000010.csv"] {
        let x = std::fs::read(out.join(f)).unwrap();
        let y = std::fs::read(b.path().join("out").join(f)).unwrap();
        assert!(x == y, "{f} differs between identical runs");
    }

    let diag = std::fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    assert_eq!(diag.lines().count(), 12);
    let header: Vec<&str> = diag.lines().next().unwrap().split(',').collect();
    assert_eq!(header[0], "t");
    assert!(header.contains(&"mass_err") && header.contains(&"energy_err") && header.contains(&"alpha_electron1"));

    let field = std::fs::read_to_string(out.join("field.csv")).unwrap();
    assert_eq!(field.lines().next(), Some("t,k,re,im"));
    assert_eq!(field.lines().count(), 1 + 4 * 5); // t = 0, steps 4, 8, 10

    let snap = read_snapshot(&out.join("snapshot_000010.csv")).unwrap();
    assert!((snap.time - 0.5).abs() < 1e-12);
    assert_eq!((snap.nv(), snap.nx(), snap.species.len()), (12, 4, 3));

    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "ok");
    assert_eq!(manifest["steps"], 10);
    assert_eq!(manifest["config"]["grid"]["nv"], 12);
}

#[test]
fn set_overrides_and_bad_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, SMALL_RUN).unwrap();
    let stdout = ok(bin().arg("run").arg(&cfg).args(["--set", "t_final=0.1"]).output().unwrap());
    assert!(stdout.contains("steps        2"), "{stdout}");

    std::fs::write(&cfg, "nv = 12\nbogus = 1\n").unwrap();
    let out = bin().arg("run").arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
}

#[test]
fn expansion_demo_reports_error_and_writes_profile() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("profile.csv");
    let stdout = ok(bin().args(["expansion-demo", "--u0", "0.5", "--output"]).arg(&csv).output().unwrap());
    let err: f64 = stdout.trim().rsplit('=').next().unwrap().parse().unwrap();
    assert!(err < 1e-12, "{stdout}");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 2001);
}

#[test]
fn mms_case_prints_errors() {
    let stdout = ok(bin().args(["mms", "--case", "1", "--t-final", "0.1", "--every", "5"]).output().unwrap());
    let rows: Vec<&str> = stdout.lines().skip(1).collect();
    assert_eq!(rows.len(), 3); // t = 0, 0.05, 0.1
    let last_err: f64 = rows[2].rsplit(',').next().unwrap().parse().unwrap();
    assert!(last_err < 1e-3);
}

#[test]
fn convergence_reports_second_order() {
    let stdout = ok(bin().args(["convergence", "--dt-list", "0.1,0.05,0.025", "--t-final", "0.5"]).output().unwrap());
    let slope: f64 = stdout.lines().last().unwrap().trim_start_matches("# slope").trim().parse().unwrap();
    assert!((slope - 2.0).abs() < 0.1, "{stdout}");
}

#[test]
fn two_stream_short_run() {
    let stdout = ok(bin().args(["two-stream", "--fixed", "--nv", "10", "--nx", "4", "--t-final", "0.2"]).output().unwrap());
    assert!(stdout.contains("adaptations  0"), "{stdout}");
    assert!(stdout.contains("mass err     0.000e0"), "{stdout}");
}
