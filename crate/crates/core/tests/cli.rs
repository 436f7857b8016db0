use std::path::Path;
use std::process::{Command, Output};

use steinclt::experiment::{verify_with, CheckStatus, ExperimentConfig};
use steinclt::smoothing::SmoothingConstants;

fn steinclt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_steinclt"))
        .args(args)
        .env_remove("STEINCLT_THREADS")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL: &str = "seed = 3\n[model]\nfamily = \"uniform\"\nd = 1\nn = [4, 16, 64, 256]\n[estimator]\nm = 100\nreplications = 20\n";

#[test]
fn bound_prints_csv() {
    let out = steinclt(&["bound", "--family", "rademacher", "--d", "1", "--n", "100"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "family,d,n,bound_m1,bound_m2,bound_m3");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..3], ["rademacher", "1", "100"]);
    let m3: f64 = row[5].parse().unwrap();
    assert!((m3 - 0.05).abs() < 1e-12);
}

#[test]
fn unknown_family_is_a_config_error() {
    let out = steinclt(&["bound", "--family", "cauchy", "--d", "1", "--n", "10"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    for name in ["rademacher", "uniform", "exponential"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn malformed_configs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("o.csv");
    let out_arg = out_path.to_str().unwrap();
    for (name, text) in [
        ("noseed.toml", SMALL.replace("seed = 3\n", "")),
        ("typo.toml", SMALL.replace("replications", "replicates")),
        ("tiny_m.toml", SMALL.replace("m = 100", "m = 3")),
        ("garbage.toml", "this is not a config".to_string()),
    ] {
        let cfg = write(dir.path(), name, &text);
        let out = steinclt(&["run", "--config", &cfg, "--out", out_arg]);
        assert_eq!(out.status.code(), Some(2), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = steinclt(&["run", "--config", "/nonexistent/config.toml", "--out", out_arg]);
    assert_ne!(out.status.code(), Some(0));
    let cfg = write(dir.path(), "ok.toml", SMALL);
    let out = steinclt(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2), "missing output path");
}

#[test]
fn run_writes_rows_and_rate_footer() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    assert!(steinclt(&["run", "--config", &cfg, "--out", a.to_str().unwrap()]).status.success());
    assert!(steinclt(&["--threads", "2", "run", "--config", &cfg, "--out", b.to_str().unwrap()])
        .status
        .success());
    assert!(steinclt(&["run", "--config", &cfg, "--out", c.to_str().unwrap(), "--seed", "4"])
        .status
        .success());
    let ta = std::fs::read_to_string(&a).unwrap();
    assert_eq!(ta, std::fs::read_to_string(&b).unwrap());
    assert_ne!(ta, std::fs::read_to_string(&c).unwrap());

    let rows: Vec<&str> = ta.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 5);
    for row in &rows[1..] {
        let f: Vec<&str> = row.split(',').collect();
        let bound_m1: f64 = f[3].parse().unwrap();
        let ci_lo: f64 = f[7].parse().unwrap();
        assert!(bound_m1 >= ci_lo, "{row}");
    }
    let footer: Vec<&str> = ta.lines().filter(|l| l.starts_with("# rate")).collect();
    assert_eq!(footer.len(), 1);
    assert!(footer[0].contains("family=uniform d=1") && footer[0].contains("floor="), "{}", footer[0]);
}

#[test]
fn thread_count_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(steinclt(&["run", "--config", &cfg, "--out", a.to_str().unwrap()]).status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_steinclt"))
        .args(["run", "--config", &cfg, "--out", b.to_str().unwrap()])
        .env("STEINCLT_THREADS", "3")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn verify_default_battery_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "v.toml",
        "seed = 1\n[model]\nfamily = \"rademacher\"\nd = [1, 2]\nn = [4]\n",
    );
    let out = steinclt(&["verify", "--config", &cfg]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("cs-quadrature") && text.contains("slepian-residual") && text.contains("circum"));
}

#[test]
fn starved_battery_is_inconclusive_not_failed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "v.toml",
        "seed = 1\n[model]\nfamily = \"rademacher\"\nd = 1\nn = [4]\n[estimator]\nmc_n = 100\n",
    );
    let out = steinclt(&["verify", "--config", &cfg]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{text}");
    let slepian = text.lines().find(|l| l.contains("slepian-residual[cos")).unwrap();
    assert!(slepian.contains("INCONCLUSIVE"), "{slepian}");
}

#[test]
fn corrupted_constant_fails_its_check() {
    let cfg = ExperimentConfig::parse("seed = 1\n[model]\nfamily = \"rademacher\"\nd = 1\nn = [4]\n[estimator]\nmc_n = 20000\n")
        .unwrap();
    let mut consts = SmoothingConstants::closed_form();
    consts.c[2] *= 1.0 + 1e-6;
    let report = verify_with(&cfg, &consts).unwrap();
    let failed: Vec<&str> = report.failures().iter().map(|c| c.name.as_str()).collect();
    assert!(failed.contains(&"cs-quadrature[s=2]"), "{failed:?}");
    assert_eq!(report.exit_code(), 1);
    let s0 = report.checks.iter().find(|c| c.name == "cs-quadrature[s=0]").unwrap();
    assert_eq!(s0.status, CheckStatus::Pass);
}
