//! Batch jobs driven by an [`AnalysisConfig`].
//!
//! Every job writes plain-text artifacts into an output directory and returns
//! a [`JobReport`]. Files depend only on the configuration: element kernels
//! run in parallel but are scattered in a fixed order, and the factorization
//! is sequential.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::config::{AnalysisConfig, JobKind, LayerKindConfig, Matcher, Mode, StressMode, Stress, SweepParameter};
use crate::error::{Error, Result};
use crate::model::LayerKind;
use crate::postprocess::{
    center_node, effective_thickness, nodal_deflection, outer_surfaces, principal_stresses, recover_stresses,
    write_deflection_csv, write_grid, write_stress_csv, StressField,
};
use crate::solver::{format_log, newton_solve, GlobalState, PlateProblem};
use crate::verify::{fd_check_global, limit_deflection, navier_center_deflection, LimitKind};

#[derive(Debug, Clone, PartialEq)]
pub struct JobReport {
    pub job: JobKind,
    /// Human-readable summary, also written to `summary.txt`.
    pub summary: String,
    pub files: Vec<PathBuf>,
    /// False when a verification check failed.
    pub passed: bool,
}

/// Peak response of a solved plate.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveSummary {
    pub n_dofs: usize,
    pub n_constraints: usize,
    pub iterations: usize,
    pub eta: f64,
    /// `‖C r‖∞`.
    pub constraint_violation: f64,
    pub w_center: f64,
    /// Largest `|w|` over all layers and where it occurs.
    pub w_max: (f64, [f64; 2]),
    pub levels: Vec<LevelSummary>,
}

/// Principal stresses on one reported fibre.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSummary {
    pub layer: usize,
    pub z: f64,
    pub center: (f64, f64),
    pub max_s1: (f64, [f64; 2]),
    pub min_s2: (f64, [f64; 2]),
}

impl SolveSummary {
    pub fn from_solution(problem: &PlateProblem, state: &GlobalState, field: &StressField) -> Self {
        let mesh = &problem.mesh;
        let c = center_node(problem);
        let mut w_max = (0.0f64, mesh.nodes[c]);
        for layer in 0..problem.laminate.n_layers() {
            for (n, w) in nodal_deflection(problem, state, layer).into_iter().enumerate() {
                if w.abs() > w_max.0.abs() {
                    w_max = (w, mesh.nodes[n]);
                }
            }
        }
        let levels = field
            .levels
            .iter()
            .map(|l| {
                let s = l.nodal[c];
                let (s1, s2, _) = principal_stresses(s[0], s[1], s[2]);
                let (max, imax) = l.max_principal();
                let (min, imin) = l.min_principal();
                LevelSummary {
                    layer: l.layer,
                    z: l.z,
                    center: (s1, s2),
                    max_s1: (max, mesh.nodes[imax]),
                    min_s2: (min, mesh.nodes[imin]),
                }
            })
            .collect();
        let cr = problem.constraints.mul(&state.r);
        SolveSummary {
            n_dofs: problem.n_dofs(),
            n_constraints: problem.n_constraints(),
            iterations: state.history.iter().filter(|h| h.iteration > 0).count(),
            eta: state.eta(),
            constraint_violation: cr.iter().fold(0.0, |m, v| m.max(v.abs())),
            w_center: nodal_deflection(problem, state, 0)[c],
            w_max,
            levels,
        }
    }

    /// Largest `|σ|` over all reported fibres.
    pub fn peak_stress(&self) -> f64 {
        self.levels.iter().fold(0.0, |m, l| m.max(l.max_s1.0.abs()).max(l.min_s2.0.abs()))
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n_dofs = {}", self.n_dofs);
        let _ = writeln!(s, "n_constraints = {}", self.n_constraints);
        let _ = writeln!(s, "newton_iterations = {}", self.iterations);
        let _ = writeln!(s, "eta = {:e}", self.eta);
        let _ = writeln!(s, "constraint_violation = {:e}", self.constraint_violation);
        let _ = writeln!(s, "w_center = {}", self.w_center);
        let _ = writeln!(s, "w_max = {} at ({}, {})", self.w_max.0, self.w_max.1[0], self.w_max.1[1]);
        for l in &self.levels {
            let _ = writeln!(s, "[layer {} z {}]", l.layer, l.z);
            let _ = writeln!(s, "  center s1 = {}, s2 = {}", l.center.0, l.center.1);
            let _ = writeln!(s, "  max s1 = {} at ({}, {})", l.max_s1.0, l.max_s1.1[0], l.max_s1.1[1]);
            let _ = writeln!(s, "  min s2 = {} at ({}, {})", l.min_s2.0, l.min_s2.1[0], l.min_s2.1[1]);
        }
        s
    }
}

/// Fibres reported for `mode`: mid-planes, or both faces of every layer, plus
/// any extra relative levels.
pub fn stress_levels(cfg: &AnalysisConfig, problem: &PlateProblem) -> Vec<(usize, f64)> {
    let mut levels = Vec::new();
    for (i, l) in problem.laminate.layers.iter().enumerate() {
        let h = l.thickness / 2.0;
        match cfg.output.stress_mode {
            StressMode::Membrane => levels.push((i, 0.0)),
            StressMode::Total => {
                levels.push((i, -h));
                levels.push((i, h));
            }
        }
        for &z in &cfg.output.z_levels {
            if !levels.contains(&(i, z * h)) {
                levels.push((i, z * h));
            }
        }
    }
    levels
}

/// Outer faces of every ply, where bending stresses peak.
fn ply_faces(problem: &PlateProblem) -> Vec<(usize, f64)> {
    problem
        .laminate
        .layers
        .iter()
        .enumerate()
        .filter(|(_, l)| l.kind == LayerKind::Ply)
        .flat_map(|(i, l)| [(i, -l.thickness / 2.0), (i, l.thickness / 2.0)])
        .collect()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.display().to_string(), source }
}

struct Artifacts {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Artifacts {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn write(&mut self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(io_err(&path))?;
        let mut out = BufWriter::new(file);
        body(&mut out).and_then(|_| out.flush()).map_err(io_err(&path))?;
        self.files.push(path);
        Ok(())
    }

    fn text(&mut self, name: &str, text: &str) -> Result<()> {
        self.write(name, |out| out.write_all(text.as_bytes()))
    }
}

/// Run the job named in `cfg`, writing artifacts under `out_dir`.
///
/// On nonconvergence the partial iteration history is still written to
/// `convergence.log` before the error is returned.
pub fn run_job(cfg: &AnalysisConfig, out_dir: &Path) -> Result<JobReport> {
    cfg.validate()?;
    let mut art = Artifacts::new(out_dir)?;
    art.text("resolved.toml", &cfg.to_toml())?;
    let result = match cfg.job {
        JobKind::Solve => solve_job(cfg, &mut art),
        JobKind::Verify => verify_job(cfg, &mut art),
        JobKind::Sweep => sweep_job(cfg, &mut art),
        JobKind::Convergence => convergence_job(cfg, &mut art),
        JobKind::Efft => efft_job(cfg, &mut art),
    };
    let (summary, passed) = match result {
        Ok(v) => v,
        Err(e) => {
            if !e.history().is_empty() {
                art.text("convergence.log", &format_log(e.history()))?;
            }
            return Err(e);
        }
    };
    let header = format!("job = {}\n", cfg.job);
    let summary = header + &summary;
    art.text("summary.txt", &summary)?;
    Ok(JobReport { job: cfg.job, summary, files: art.files, passed })
}

/// Solve `cfg` as configured and recover stresses on `levels`.
pub fn solve_config(cfg: &AnalysisConfig, levels: Option<&[(usize, f64)]>) -> Result<(PlateProblem, GlobalState, StressField)> {
    let problem = cfg.problem()?;
    let state = newton_solve(&problem, &cfg.settings())?;
    let levels = match levels {
        Some(l) => l.to_vec(),
        None => stress_levels(cfg, &problem),
    };
    let field = recover_stresses(&problem, &state, &levels)?;
    Ok((problem, state, field))
}

fn solve_job(cfg: &AnalysisConfig, art: &mut Artifacts) -> Result<(String, bool)> {
    let (problem, state, field) = solve_config(cfg, None)?;
    let summary = SolveSummary::from_solution(&problem, &state, &field);
    art.text("convergence.log", &format_log(&state.history))?;
    if cfg.output.deflection {
        art.write("deflection.csv", |o| write_deflection_csv(o, &problem, &state))?;
    }
    if cfg.output.stress {
        art.write("stress.csv", |o| write_stress_csv(o, &problem.mesh, &field))?;
    }
    art.text("profile.csv", &z_profile(cfg, &problem, &state)?)?;
    if cfg.output.grids {
        let w = nodal_deflection(&problem, &state, 0);
        art.write("w.grid.csv", |o| write_grid(o, &problem.mesh, &w))?;
        for l in &field.levels {
            let s1: Vec<f64> = l.principal().iter().map(|p| p.0).collect();
            art.write(&format!("s1_layer{}_z{}.grid.csv", l.layer, l.z), |o| write_grid(o, &problem.mesh, &s1))?;
        }
    }
    Ok((summary.render(), true))
}

/// Through-thickness stresses at the plate centre:
/// `layer,z_local,z,sx,sy,txy,txz,tyz` with `z` measured from the laminate mid-plane.
pub fn z_profile(cfg: &AnalysisConfig, problem: &PlateProblem, state: &GlobalState) -> Result<String> {
    let n = cfg.output.profile_points;
    let mut levels = Vec::new();
    for (i, l) in problem.laminate.layers.iter().enumerate() {
        for k in 0..n {
            levels.push((i, l.thickness * (k as f64 / (n - 1) as f64 - 0.5)));
        }
    }
    let field = recover_stresses(problem, state, &levels)?;
    let mids = crate::postprocess::layer_midplanes(&problem.laminate);
    let c = center_node(problem);
    let mut s = String::from("layer,z_local,z,sx,sy,txy,txz,tyz\n");
    for l in &field.levels {
        let v = l.nodal[c];
        let t = field.shear[l.layer][c];
        let _ = writeln!(s, "{},{},{},{},{},{},{},{}", l.layer, l.z, mids[l.layer] + l.z, v[0], v[1], v[2], t[0], t[1]);
    }
    Ok(s)
}

fn check_line(s: &mut String, name: &str, ok: bool, detail: &str) {
    let _ = writeln!(s, "{:<4} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
}

fn verify_job(cfg: &AnalysisConfig, art: &mut Artifacts) -> Result<(String, bool)> {
    let mut linear = cfg.clone();
    linear.solver.mode = Mode::Linear;
    let problem = linear.problem()?;
    let settings = linear.settings();
    let state = newton_solve(&problem, &settings)?;
    let w_lam = nodal_deflection(&problem, &state, 0)[center_node(&problem)];
    let mut report = String::new();
    let mut all = true;

    let one_iteration = state.final_step_iterations() == 1;
    all &= one_iteration;
    check_line(&mut report, "linear_single_iteration", one_iteration, &format!("{} iteration(s)", state.final_step_iterations()));

    let cr = problem.constraints.mul(&state.r).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let span = problem.laminate.lx.max(problem.laminate.ly);
    let tied = cr < 1e-10 * span;
    all &= tied;
    check_line(&mut report, "constraints", tied, &format!("|Cr|inf = {cr:e}"));

    if problem.laminate.n_layers() > 1 {
        let w_mono = limit_deflection(&problem, LimitKind::TrueMonolithic, &settings)?;
        let w_layer = limit_deflection(&problem, LimitKind::Layered, &settings)?;
        let ok = w_mono.abs() <= w_lam.abs() && w_lam.abs() <= w_layer.abs();
        all &= ok;
        check_line(
            &mut report,
            "limit_bounds",
            ok,
            &format!("w_mono = {w_mono}, w_laminate = {w_lam}, w_layered = {w_layer}"),
        );
    }

    let lam = &problem.laminate;
    let simply_supported = [cfg.bcs.left, cfg.bcs.right, cfg.bcs.bottom, cfg.bcs.top]
        .iter()
        .all(|e| *e == crate::config::EdgeConfig::SimplySupported);
    if lam.n_layers() == 1 && simply_supported {
        let l = lam.layers[0];
        let pressure: f64 = problem.load.layers.iter().map(|l| l.pressure).sum();
        let w_ref = navier_center_deflection(lam.lx, lam.ly, l.thickness, l.youngs, l.poisson, pressure, 25);
        let rel = (w_lam - w_ref).abs() / w_ref.abs().max(f64::MIN_POSITIVE);
        let ok = rel < 0.02;
        all &= ok;
        check_line(&mut report, "navier", ok, &format!("w_fem = {w_lam}, w_navier = {w_ref}, rel = {rel:e}"));
    }

    let mut nl = cfg.clone();
    nl.solver.mode = Mode::Nonlinear;
    let nl_problem = nl.problem()?;
    // a smooth, finite-amplitude state: the linear shape scaled to unit peak
    let peak = state.r.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let r: Vec<f64> = state.r.iter().map(|v| v / peak).collect();
    if nl_problem.n_dofs() <= 4000 {
        let fd = fd_check_global(&nl_problem, &r, 1e-5)?;
        let ok = fd.max() < 1e-6;
        all &= ok;
        check_line(&mut report, "fd_consistency", ok, &format!("gradient {:e}, tangent {:e}", fd.gradient, fd.hessian));
    } else {
        let _ = writeln!(report, "SKIP fd_consistency: {} dofs (limit 4000)", nl_problem.n_dofs());
    }

    art.text("verify.txt", &report)?;
    Ok((report, all))
}

/// Row of a parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub w_center: f64,
    pub w_max: f64,
    pub stress_loaded: f64,
    pub stress_opposite: f64,
    pub iterations: usize,
    pub w_center_linear: Option<f64>,
}

impl SweepRow {
    /// `(w_linear − w) / w`, the linear model's overestimate relative to the nonlinear answer.
    pub fn nonlinearity(&self) -> Option<f64> {
        self.w_center_linear.map(|wl| (wl - self.w_center) / self.w_center)
    }
}

/// Surface stress peaks `(loaded face max s1, opposite face max s1)`.
fn surface_peaks(problem: &PlateProblem, state: &GlobalState) -> Result<(f64, f64)> {
    let faces = outer_surfaces(&problem.laminate);
    let field = recover_stresses(problem, state, &faces)?;
    Ok((field.levels[0].max_principal().0, field.levels[1].max_principal().0))
}

fn sweep_point(cfg: &AnalysisConfig) -> Result<(f64, f64, f64, f64, usize)> {
    let problem = cfg.problem()?;
    let state = newton_solve(&problem, &cfg.settings())?;
    let w = nodal_deflection(&problem, &state, 0);
    let w_max = w.iter().fold(0.0f64, |m, v| if v.abs() > m.abs() { *v } else { m });
    let (top, bottom) = surface_peaks(&problem, &state)?;
    Ok((w[center_node(&problem)], w_max, top, bottom, state.history.iter().filter(|h| h.iteration > 0).count()))
}

pub fn run_sweep(cfg: &AnalysisConfig) -> Result<Vec<SweepRow>> {
    let sweep = cfg.sweep.as_ref().ok_or_else(|| Error::Config("sweep: missing section".into()))?;
    let mut rows = Vec::with_capacity(sweep.values.len());
    for &Stress(value) in &sweep.values {
        let mut point = cfg.clone();
        match sweep.parameter {
            SweepParameter::InterlayerShear => point.set_interlayer_shear(value),
            SweepParameter::Pressure => point.load.pressure = Stress(value),
        }
        let (w_center, w_max, stress_loaded, stress_opposite, iterations) = sweep_point(&point)?;
        let w_center_linear = if sweep.compare_linear {
            point.solver.mode = Mode::Linear;
            Some(sweep_point(&point)?.0)
        } else {
            None
        };
        rows.push(SweepRow { value, w_center, w_max, stress_loaded, stress_opposite, iterations, w_center_linear });
    }
    Ok(rows)
}

fn sweep_job(cfg: &AnalysisConfig, art: &mut Artifacts) -> Result<(String, bool)> {
    let rows = run_sweep(cfg)?;
    let linear = rows.iter().any(|r| r.w_center_linear.is_some());
    let mut csv = String::from("value,w_center,w_max,s1_loaded_face,s1_opposite_face,iterations");
    if linear {
        csv.push_str(",w_center_linear,nonlinearity");
    }
    csv.push('\n');
    for r in &rows {
        let _ = write!(csv, "{},{},{},{},{},{}", r.value, r.w_center, r.w_max, r.stress_loaded, r.stress_opposite, r.iterations);
        if let (Some(wl), Some(d)) = (r.w_center_linear, r.nonlinearity()) {
            let _ = write!(csv, ",{wl},{d}");
        }
        csv.push('\n');
    }
    art.text("sweep.csv", &csv)?;
    Ok((format!("points = {}\n{csv}", rows.len()), true))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub nx: usize,
    pub ny: usize,
    pub n_dofs: usize,
    pub w_center: f64,
    /// Major principal stress at the centre of the opposite (tension) face.
    pub s1_center: f64,
    pub s1_max: f64,
}

pub fn run_convergence(cfg: &AnalysisConfig) -> Result<Vec<ConvergenceRow>> {
    let study = cfg.convergence.as_ref().ok_or_else(|| Error::Config("convergence: missing section".into()))?;
    let mut rows = Vec::new();
    for &[nx, ny] in &study.meshes {
        let mut point = cfg.clone();
        point.mesh.nx = nx;
        point.mesh.ny = ny;
        let problem = point.problem()?;
        let state = newton_solve(&problem, &point.settings())?;
        let c = center_node(&problem);
        let face = outer_surfaces(&problem.laminate)[1];
        let field = recover_stresses(&problem, &state, &[face])?;
        let s = field.levels[0].nodal[c];
        rows.push(ConvergenceRow {
            nx,
            ny,
            n_dofs: problem.n_dofs(),
            w_center: nodal_deflection(&problem, &state, 0)[c],
            s1_center: principal_stresses(s[0], s[1], s[2]).0,
            s1_max: field.levels[0].max_principal().0,
        });
    }
    Ok(rows)
}

fn change(prev: f64, cur: f64) -> f64 {
    (cur - prev).abs() / cur.abs().max(f64::MIN_POSITIVE)
}

fn convergence_job(cfg: &AnalysisConfig, art: &mut Artifacts) -> Result<(String, bool)> {
    let rows = run_convergence(cfg)?;
    let mut csv = String::from("nx,ny,n_dofs,w_center,s1_center,s1_max,w_change,s1_center_change\n");
    for (i, r) in rows.iter().enumerate() {
        let (dw, ds) = match i {
            0 => (String::new(), String::new()),
            _ => (change(rows[i - 1].w_center, r.w_center).to_string(), change(rows[i - 1].s1_center, r.s1_center).to_string()),
        };
        let _ = writeln!(csv, "{},{},{},{},{},{},{dw},{ds}", r.nx, r.ny, r.n_dofs, r.w_center, r.s1_center, r.s1_max);
    }
    art.text("convergence.csv", &csv)?;
    Ok((csv, true))
}

/// One shear modulus of an effective-thickness study.
#[derive(Debug, Clone, PartialEq)]
pub struct EfftRow {
    pub shear: f64,
    pub w_max: f64,
    pub stress_max: f64,
    pub t_deflection: f64,
    pub t_stress: f64,
    /// Peak deflection of the monolithic plate re-solved at `t_deflection`.
    pub w_check: Option<f64>,
}

impl EfftRow {
    pub fn check_error(&self) -> Option<f64> {
        self.w_check.map(|w| (w - self.w_max).abs() / self.w_max.abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfftStudy {
    pub t_ref: f64,
    /// `(Σ t³)^{1/3}` over the plies: deflection thickness of the layered limit.
    pub layered_deflection: f64,
    /// `sqrt(Σ t³ / t_max)`: stress thickness of the layered limit.
    pub layered_stress: f64,
    /// Total laminate thickness.
    pub monolithic: f64,
    pub rows: Vec<EfftRow>,
}

impl EfftStudy {
    pub fn monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].t_deflection >= w[0].t_deflection && w[1].t_stress >= w[0].t_stress)
    }

    /// Every thickness within the layered and monolithic equivalents, with a
    /// relative slack `tol` for discretization.
    pub fn bounded(&self, tol: f64) -> bool {
        self.rows.iter().all(|r| {
            r.t_deflection >= self.layered_deflection * (1.0 - tol)
                && r.t_deflection <= self.monolithic * (1.0 + tol)
                && r.t_stress >= self.layered_stress * (1.0 - tol)
                && r.t_stress <= self.monolithic * (1.0 + tol)
        })
    }
}

/// Peak `|w|` and peak `|σ|` on the ply faces of a geometrically linear solve.
fn peak_response(cfg: &AnalysisConfig) -> Result<(f64, f64)> {
    let problem = cfg.problem()?;
    let state = newton_solve(&problem, &cfg.settings())?;
    let field = recover_stresses(&problem, &state, &ply_faces(&problem))?;
    let w = (0..problem.laminate.n_layers())
        .flat_map(|l| nodal_deflection(&problem, &state, l))
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let s = field
        .levels
        .iter()
        .flat_map(|l| l.principal())
        .fold(0.0f64, |m, p| m.max(p.0.abs()).max(p.1.abs()));
    Ok((w, s))
}

fn monolithic_config(cfg: &AnalysisConfig, thickness: f64) -> AnalysisConfig {
    let mut mono = cfg.clone();
    let glass = cfg
        .layers
        .iter()
        .find(|l| l.kind != Some(LayerKindConfig::Interlayer))
        .cloned()
        .unwrap_or_else(|| cfg.layers[0].clone());
    mono.layers = vec![crate::config::LayerConfig { thickness: crate::config::Length(thickness), ..glass }];
    mono.load.layer = 0;
    mono
}

pub fn run_efft(cfg: &AnalysisConfig) -> Result<EfftStudy> {
    let study = cfg.efft.as_ref().ok_or_else(|| Error::Config("efft: missing section".into()))?;
    let mut cfg = cfg.clone();
    cfg.solver.mode = Mode::Linear;
    let plies: Vec<f64> = cfg
        .layers
        .iter()
        .filter(|l| l.kind != Some(LayerKindConfig::Interlayer))
        .map(|l| l.thickness.0)
        .collect();
    let total: f64 = cfg.layers.iter().map(|l| l.thickness.0).sum();
    let sum_cubes: f64 = plies.iter().map(|t| t.powi(3)).sum();
    let t_max = plies.iter().fold(0.0f64, |m, &t| m.max(t));
    let t_ref = match study.matcher {
        Matcher::TrueMonolithic => total,
        Matcher::GlassOnly => plies.iter().sum(),
    };
    let (w_ref, s_ref) = peak_response(&monolithic_config(&cfg, t_ref))?;
    let mut rows = Vec::new();
    for &Stress(g) in &study.shear_values {
        let mut point = cfg.clone();
        point.set_interlayer_shear(g);
        let (w, s) = peak_response(&point)?;
        let t = effective_thickness(w, s, w_ref, s_ref, t_ref)?;
        let w_check = if study.verify {
            Some(peak_response(&monolithic_config(&cfg, t.deflection))?.0)
        } else {
            None
        };
        rows.push(EfftRow { shear: g, w_max: w, stress_max: s, t_deflection: t.deflection, t_stress: t.stress, w_check });
    }
    Ok(EfftStudy {
        t_ref,
        layered_deflection: sum_cubes.cbrt(),
        layered_stress: (sum_cubes / t_max).sqrt(),
        monolithic: total,
        rows,
    })
}

fn efft_job(cfg: &AnalysisConfig, art: &mut Artifacts) -> Result<(String, bool)> {
    let study = run_efft(cfg)?;
    let mut csv = String::from("shear,w_max,stress_max,t_w,t_sigma,w_check,check_error\n");
    for r in &study.rows {
        let (wc, err) = match (r.w_check, r.check_error()) {
            (Some(w), Some(e)) => (w.to_string(), e.to_string()),
            _ => (String::new(), String::new()),
        };
        let _ = writeln!(csv, "{},{},{},{},{},{wc},{err}", r.shear, r.w_max, r.stress_max, r.t_deflection, r.t_stress);
    }
    art.text("efft.csv", &csv)?;
    let mut s = String::new();
    let _ = writeln!(s, "t_ref = {}", study.t_ref);
    let _ = writeln!(s, "layered t_w = {}", study.layered_deflection);
    let _ = writeln!(s, "layered t_sigma = {}", study.layered_stress);
    let _ = writeln!(s, "monolithic t = {}", study.monolithic);
    let monotone = study.monotone();
    let bounded = study.bounded(0.0);
    let worst = study.rows.iter().filter_map(|r| r.check_error()).fold(0.0f64, f64::max);
    let matched = worst < 1e-2;
    check_line(&mut s, "monotone", monotone, "t_w and t_sigma non-decreasing in G");
    check_line(&mut s, "bounded", bounded, "layered <= t <= monolithic");
    check_line(&mut s, "resolve", matched, &format!("worst re-solve mismatch {worst:e}"));
    s.push_str(&csv);
    Ok((s, monotone && bounded && matched))
}
