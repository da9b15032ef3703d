use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_conic-geodesic"))
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("run.cfg");
    std::fs::write(&p, text).unwrap();
    p
}

const SMALL: &str = "grid.u_max = 8\ngrid.n_u = 33\ngrid.n_t = 17\nschedule.eps_list = 1e-1, 1e-2\n";

#[test]
fn sweep_then_audit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let s = bin().args(["sweep", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert!(s.status.success(), "{}", String::from_utf8_lossy(&s.stderr));
    let stdout = String::from_utf8(s.stdout).unwrap();
    assert_eq!(stdout.lines().filter(|l| l.starts_with("entry")).count(), 2);

    let series = std::fs::read_to_string(out.join("series.csv")).unwrap();
    let header: Vec<&str> = series.lines().next().unwrap().split(',').collect();
    assert_eq!(header, ["eps", "eta", "sup_dt_phi", "sup_weighted_lap", "holder_seminorm", "oracle_distance"]);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("series.json")).unwrap()).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 2);
    for line in std::fs::read_to_string(out.join("convergence.jsonl")).unwrap().lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["residual"].as_f64().unwrap() < 1e-6);
    }

    let a = bin().args(["audit", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stdout));
}

#[test]
fn solve_writes_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let s = bin().args(["solve", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert!(s.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("convergence.json")).unwrap()).unwrap();
    assert_eq!(v["admissible"], true);
    assert!(dir.path().join("grid_1.csv").exists());
}

#[test]
fn oracle_on_shifted_data() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{SMALL}boundary.t0 = zero\nboundary.t1 = zero\nboundary.t1_shift = 3\nweight.kind = unit\n");
    let cfg = write_config(dir.path(), &text);
    let s = bin().args(["oracle", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert!(s.status.success(), "{}", String::from_utf8_lossy(&s.stdout));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("oracle.json")).unwrap()).unwrap();
    assert_eq!(v["monotone_decrease"], "pass");
}

#[test]
fn lemmas_command() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let s = bin().args(["lemmas", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert!(s.status.success());
    assert!(dir.path().join("lemmas.json").exists());
}

#[test]
fn errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "grid.n_u = 128\n");
    let s = bin().args(["sweep", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(s.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&s.stderr).contains("grid.n_u"));

    let s = bin().args(["sweep", "--config"]).arg(dir.path().join("missing.cfg")).output().unwrap();
    assert_eq!(s.status.code(), Some(2));
    // audit with nothing to audit
    let cfg = write_config(dir.path(), SMALL);
    let s = bin().args(["audit", "--config"]).arg(&cfg).arg("--out").arg(dir.path().join("empty")).output().unwrap();
    assert_eq!(s.status.code(), Some(2));
}

#[test]
fn corrupted_grid_fails_audit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    assert!(bin().args(["sweep", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).status().unwrap().success());
    let path = dir.path().join("grid_1.csv");
    let mut g = conic_geodesic::PotentialGrid::read_csv(&path).unwrap();
    g.values[[16, 8]] += 1.0;
    g.write_csv(&path).unwrap();
    let s = bin().args(["audit", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(s.status.code(), Some(1));
}
