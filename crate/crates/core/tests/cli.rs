use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_lgplate");

fn plate(extra: &str) -> String {
    format!(
        r#"
[geometry]
lx = "1.2 m"
ly = "1.2 m"
reduction = "quarter"

[[layers]]
thickness = "5 mm"
youngs = "70 GPa"
poisson = 0.22

[[layers]]
thickness = "0.76 mm"
shear = "0.4 MPa"
poisson = 0.49

[[layers]]
thickness = "5 mm"
youngs = "70 GPa"
poisson = 0.22

[mesh]
nx = 8
ny = 8

[load]
pressure = "3 kPa"
{extra}
"#
    )
}

fn run(job: &str, config: &str, dir: &Path, args: &[&str]) -> Output {
    let path = dir.join("config.toml");
    fs::write(&path, config).unwrap();
    Command::new(BIN)
        .arg(job)
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .args(args)
        .env_remove("LGPLATE_THREADS")
        .output()
        .unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join("out").join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn solve_writes_summary_and_fields() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("solve", &plate("[output]\nstress_mode = \"total\"\ngrids = true"), dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = read(dir.path(), "summary.txt");
    for key in ["job = solve", "n_dofs = ", "eta = ", "w_center = ", "w_max = ", "center s1 = ", "max s1 = "] {
        assert!(summary.contains(key), "{key} missing:\n{summary}");
    }
    let stress = read(dir.path(), "stress.csv");
    assert!(stress.starts_with("x,y,layer,z,sx,sy,txy,s1,s2\n"));
    // 81 nodes on both faces of three layers
    assert_eq!(stress.lines().count(), 1 + 81 * 6);
    let w = read(dir.path(), "deflection.csv");
    assert!(w.starts_with("x,y,layer,w\n"));
    assert_eq!(w.lines().count(), 1 + 81 * 3);
    assert!(read(dir.path(), "convergence.log").starts_with("step k eta\n"));
    let profile = read(dir.path(), "profile.csv");
    assert_eq!(profile.lines().count(), 1 + 3 * 5);
    assert_eq!(read(dir.path(), "w.grid.csv").lines().count(), 9);
    let resolved = read(dir.path(), "resolved.toml");
    assert!(resolved.contains("tolerance = ") && resolved.contains("schedule = [1.0]"));
}

#[test]
fn outputs_are_bitwise_reproducible_across_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = plate("");
    assert!(run("solve", &cfg, a.path(), &["--threads", "1"]).status.success());
    assert!(run("solve", &cfg, b.path(), &["--threads", "4"]).status.success());
    for f in ["summary.txt", "stress.csv", "deflection.csv", "convergence.log", "profile.csv", "resolved.toml"] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f} differs");
    }
}

#[test]
fn thread_count_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.toml");
    fs::write(&path, plate("")).unwrap();
    let out = Command::new(BIN).args(["solve"]).arg(&path).arg("--out").arg(dir.path()).env("LGPLATE_THREADS", "two").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(BIN).args(["solve"]).arg(&path).arg("--out").arg(dir.path()).env("LGPLATE_THREADS", "2").output().unwrap();
    assert!(out.status.success());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("solve", &plate("").replace("poisson = 0.49", "poisson = 0.6"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("layers[1].poisson"));
    let out = run("sweep", &plate(""), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2), "sweep without a [sweep] section");
    let out = run("solve", "[geometry", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_exits_4() {
    let out = Command::new(BIN).args(["solve", "/nonexistent/config.toml"]).output().unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn nonconvergence_exits_3_with_partial_log() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = plate("[solver]\nmax_iterations = 2\nmax_bisections = 0").replace("\"3 kPa\"", "\"30 kPa\"");
    let out = run("solve", &cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let log = read(dir.path(), "convergence.log");
    assert!(log.lines().count() >= 3, "{log}");
}

#[test]
fn sweep_emits_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = plate("[sweep]\nparameter = \"interlayer_shear\"\nvalues = [0.01, 0.1, 1.0, 10.0]\ncompare_linear = true");
    let out = run("sweep", &cfg, dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path(), "sweep.csv");
    let rows: Vec<Vec<f64>> = csv.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.windows(2).all(|w| w[1][1] < w[0][1]), "deflection decreases with G:\n{csv}");
    assert!(rows.iter().all(|r| r[6] >= r[1]), "linear model is softer:\n{csv}");
}

#[test]
fn pressure_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = plate("[sweep]\nparameter = \"pressure\"\nvalues = [\"1 kPa\", \"2 kPa\", \"4 kPa\"]");
    let out = run("sweep", &cfg, dir.path(), &[]);
    assert!(out.status.success());
    let csv = read(dir.path(), "sweep.csv");
    let w: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    // stiffening: doubling the load less than doubles the deflection
    assert!(w[1] < 2.0 * w[0] && w[2] < 2.0 * w[1], "{csv}");
}

#[test]
fn convergence_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = plate("[convergence]\nmeshes = [[4, 4], [8, 8], [12, 12]]");
    let out = run("convergence", &cfg, dir.path(), &[]);
    assert!(out.status.success());
    let csv = read(dir.path(), "convergence.csv");
    assert!(csv.starts_with("nx,ny,n_dofs,w_center,s1_center,s1_max,w_change,s1_center_change\n"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn verify_job_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("verify", &plate(""), dir.path(), &[]);
    let report = read(dir.path(), "verify.txt");
    assert!(out.status.success(), "{report}");
    assert!(report.contains("PASS limit_bounds") && report.contains("PASS fd_consistency"), "{report}");
    assert!(!report.contains("FAIL"));
}

#[test]
fn efft_job() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = plate("[efft]\nshear_values = [0.01, 0.1, 1.0, 10.0]");
    let out = run("efft", &cfg, dir.path(), &[]);
    let summary = read(dir.path(), "summary.txt");
    assert!(out.status.success(), "{summary}");
    assert!(summary.contains("PASS monotone") && summary.contains("PASS bounded") && summary.contains("PASS resolve"));
    assert_eq!(read(dir.path(), "efft.csv").lines().count(), 5);
}
