use std::ffi::{CStr, CString};
use std::ptr;

use lgplate_ffi::*;

const PLATE: &str = r#"
[geometry]
lx = "1 m"
ly = "1 m"
reduction = "quarter"

[[layers]]
thickness = "4 mm"
youngs = "70 GPa"
poisson = 0.22

[[layers]]
thickness = "0.76 mm"
shear = "0.5 MPa"
poisson = 0.49

[[layers]]
thickness = "4 mm"
youngs = "70 GPa"
poisson = 0.22

[mesh]
nx = 6
ny = 6

[load]
pressure = "1 kPa"
"#;

fn parse(text: &str) -> (LgStatus, *mut LgConfig) {
    let c = CString::new(text).unwrap();
    let mut cfg = ptr::null_mut();
    let status = unsafe { lgplate_config_parse(c.as_ptr(), &mut cfg) };
    (status, cfg)
}

fn last_error() -> String {
    let p = lgplate_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn parse_and_free() {
    let (status, cfg) = parse(PLATE);
    assert_eq!(status, LgStatus::Ok);
    assert!(!cfg.is_null());
    assert_eq!(unsafe { lgplate_config_job(cfg) }, 0);
    unsafe { lgplate_config_free(cfg) };
    unsafe { lgplate_config_free(ptr::null_mut()) };
    unsafe { lgplate_solution_free(ptr::null_mut()) };
    unsafe { lgplate_string_free(ptr::null_mut()) };
}

#[test]
fn invalid_config_reports_field() {
    let (status, cfg) = parse(&PLATE.replace("poisson = 0.49", "poisson = 0.7"));
    assert_eq!(status, LgStatus::Config);
    assert!(cfg.is_null());
    assert!(last_error().contains("layers[1].poisson"));
}

#[test]
fn null_arguments() {
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { lgplate_config_parse(ptr::null(), &mut cfg) }, LgStatus::NullPointer);
    let c = CString::new(PLATE).unwrap();
    assert_eq!(unsafe { lgplate_config_parse(c.as_ptr(), ptr::null_mut()) }, LgStatus::NullPointer);
    let mut sol = ptr::null_mut();
    assert_eq!(unsafe { lgplate_solve(ptr::null(), &mut sol) }, LgStatus::NullPointer);
    let mut w = 0.0;
    assert_eq!(unsafe { lgplate_solution_center_deflection(ptr::null(), &mut w) }, LgStatus::NullPointer);
    assert_eq!(unsafe { lgplate_config_job(ptr::null()) }, -1);
}

#[test]
fn invalid_utf8() {
    let bytes = [0x66u8, 0xff, 0x00];
    let mut cfg = ptr::null_mut();
    let status = unsafe { lgplate_config_parse(bytes.as_ptr().cast(), &mut cfg) };
    assert_eq!(status, LgStatus::InvalidUtf8);
}

#[test]
fn solve_and_query() {
    let (_, cfg) = parse(PLATE);
    let mut sol = ptr::null_mut();
    assert_eq!(unsafe { lgplate_solve(cfg, &mut sol) }, LgStatus::Ok);
    let n = unsafe { lgplate_solution_n_nodes(sol) };
    assert_eq!(n, 49);
    assert_eq!(unsafe { lgplate_solution_n_layers(sol) }, 3);

    let mut w = 0.0;
    assert_eq!(unsafe { lgplate_solution_center_deflection(sol, &mut w) }, LgStatus::Ok);
    assert!(w > 0.0, "deflection follows the pressure: {w}");

    let mut buf = vec![0.0; n];
    assert_eq!(unsafe { lgplate_solution_deflection(sol, 0, buf.as_mut_ptr(), n - 1) }, LgStatus::BufferTooSmall);
    assert_eq!(unsafe { lgplate_solution_deflection(sol, 3, buf.as_mut_ptr(), n) }, LgStatus::InvalidArgument);
    assert_eq!(unsafe { lgplate_solution_deflection(sol, 2, buf.as_mut_ptr(), n) }, LgStatus::Ok);
    let peak = buf.iter().fold(0.0f64, |m, v| m.max(*v));
    assert!((peak - w).abs() < 1e-2 * w, "bottom ply follows the top ply: {peak} vs {w}");

    let (mut x, mut y) = (0.0, 0.0);
    assert_eq!(unsafe { lgplate_solution_node(sol, n - 1, &mut x, &mut y) }, LgStatus::Ok);
    assert_eq!((x, y), (500.0, 500.0));
    assert_eq!(unsafe { lgplate_solution_node(sol, n, &mut x, &mut y) }, LgStatus::InvalidArgument);

    let (mut iterations, mut eta) = (0usize, 0.0);
    assert_eq!(unsafe { lgplate_solution_convergence(sol, &mut iterations, &mut eta) }, LgStatus::Ok);
    assert!(iterations >= 1 && eta < 1e-8);
    let mut s = 0.0;
    assert_eq!(unsafe { lgplate_solution_peak_stress(sol, &mut s) }, LgStatus::Ok);
    assert!(s > 0.0);

    unsafe {
        lgplate_solution_free(sol);
        lgplate_config_free(cfg);
    }
}

#[test]
fn setters_change_the_answer() {
    let (_, cfg) = parse(PLATE);
    let solve = |cfg| {
        let mut sol = ptr::null_mut();
        assert_eq!(unsafe { lgplate_solve(cfg, &mut sol) }, LgStatus::Ok);
        let mut w = 0.0;
        unsafe {
            lgplate_solution_center_deflection(sol, &mut w);
            lgplate_solution_free(sol);
        }
        w
    };
    let soft = solve(cfg);
    assert_eq!(unsafe { lgplate_config_set_interlayer_shear(cfg, 100.0) }, LgStatus::Ok);
    let stiff = solve(cfg);
    assert!(stiff < soft);
    assert_eq!(unsafe { lgplate_config_set_interlayer_shear(cfg, -1.0) }, LgStatus::Config);
    assert_eq!(unsafe { lgplate_config_set_pressure(cfg, f64::NAN) }, LgStatus::InvalidArgument);
    assert_eq!(unsafe { lgplate_config_set_pressure(cfg, 0.0) }, LgStatus::Ok);
    assert_eq!(solve(cfg), 0.0);
    unsafe { lgplate_config_free(cfg) };
}

#[test]
fn toml_round_trip() {
    let (_, cfg) = parse(PLATE);
    let mut text = ptr::null_mut();
    assert_eq!(unsafe { lgplate_config_to_toml(cfg, &mut text) }, LgStatus::Ok);
    let echoed = unsafe { CStr::from_ptr(text) }.to_str().unwrap().to_owned();
    assert!(echoed.contains("tolerance"));
    let (status, again) = parse(&echoed);
    assert_eq!(status, LgStatus::Ok);
    let mut text2 = ptr::null_mut();
    unsafe { lgplate_config_to_toml(again, &mut text2) };
    assert_eq!(echoed, unsafe { CStr::from_ptr(text2) }.to_str().unwrap());
    unsafe {
        lgplate_string_free(text);
        lgplate_string_free(text2);
        lgplate_config_free(cfg);
        lgplate_config_free(again);
    }
}

#[test]
fn run_job_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let (_, cfg) = parse(PLATE);
    let out = CString::new(dir.path().to_str().unwrap()).unwrap();
    assert_eq!(unsafe { lgplate_run_job(cfg, out.as_ptr()) }, LgStatus::Ok);
    for f in ["summary.txt", "resolved.toml", "convergence.log", "deflection.csv", "stress.csv", "profile.csv"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    unsafe { lgplate_config_free(cfg) };
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(lgplate_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_symbol_and_compiles() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/lgplate.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    for line in src.lines().filter(|l| l.contains("extern \"C\" fn ")) {
        let name = line.split("fn ").nth(1).unwrap().split('(').next().unwrap();
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    let Ok(cc) = which_cc() else { return };
    let dir = tempfile::tempdir().unwrap();
    let probe = dir.path().join("probe.c");
    std::fs::write(&probe, "#include \"lgplate.h\"\nint main(void) { return lgplate_config_job(NULL) == -1 ? 0 : 1; }\n").unwrap();
    let status = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&probe)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| std::process::Command::new(c).arg("--version").output().is_ok())
        .ok_or(())
}
