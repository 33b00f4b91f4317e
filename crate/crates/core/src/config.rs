//! Declarative analysis configuration (TOML).
//!
//! Lengths accept `"1.6 m"`, `"4.76 mm"` or `"10 cm"`; stresses and pressures
//! accept `"68.9 GPa"`, `"0.4 MPa"`, `"750 Pa"` or `"10 kPa"`. Bare numbers are
//! taken in the internal units, millimetres and megapascals.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize};

use crate::element::Kinematics;
use crate::error::{Error, Result};
use crate::model::{
    build_mesh, BoundaryConditionSet, EdgeCondition, LaminateSpec, LayerKind, LayerLoad, LayerSpec, LoadCase, Mesh,
    SupportedLayers,
};
use crate::solver::{LinearSolver, NewtonSettings, PlateProblem};

#[derive(Deserialize)]
#[serde(untagged)]
enum QuantityRepr {
    Number(f64),
    Text(String),
}

fn parse_quantity(text: &str, units: &[(&str, f64)], what: &str) -> std::result::Result<f64, String> {
    let text = text.trim();
    let split = text
        .find(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E')
        .or_else(|| text.rfind(' '))
        .unwrap_or(text.len());
    let (num, unit) = text.split_at(split);
    let value: f64 = num.trim().parse().map_err(|_| format!("cannot parse {what} {text:?}"))?;
    let unit = unit.trim();
    if unit.is_empty() {
        return Ok(value);
    }
    units
        .iter()
        .find(|(u, _)| *u == unit)
        .map(|(_, f)| value * f)
        .ok_or_else(|| {
            let known: Vec<&str> = units.iter().map(|(u, _)| *u).collect();
            format!("unknown {what} unit {unit:?} (expected one of {known:?})")
        })
}

macro_rules! quantity {
    ($name:ident, $what:literal, $units:expr) => {
        #[derive(Debug, Clone, Copy, PartialEq, Serialize)]
        #[serde(transparent)]
        pub struct $name(pub f64);

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                match QuantityRepr::deserialize(d)? {
                    QuantityRepr::Number(v) => Ok(Self(v)),
                    QuantityRepr::Text(t) => parse_quantity(&t, $units, $what).map(Self).map_err(serde::de::Error::custom),
                }
            }
        }
    };
}

quantity!(Length, "length", &[("mm", 1.0), ("cm", 10.0), ("m", 1000.0)]);
quantity!(Stress, "stress", &[("Pa", 1e-6), ("kPa", 1e-3), ("MPa", 1.0), ("GPa", 1e3)]);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum JobKind {
    #[default]
    Solve,
    Verify,
    Sweep,
    Convergence,
    #[serde(alias = "effective_thickness")]
    Efft,
}

impl fmt::Display for JobKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            JobKind::Solve => "solve",
            JobKind::Verify => "verify",
            JobKind::Sweep => "sweep",
            JobKind::Convergence => "convergence",
            JobKind::Efft => "efft",
        };
        f.write_str(s)
    }
}

/// Which part of the plate is meshed; cut edges get symmetry conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    #[default]
    Full,
    Quarter,
    /// Cut at `x = Lx/2`.
    HalfX,
    /// Cut at `y = Ly/2`.
    HalfY,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeConfig {
    Free,
    SimplySupported,
    Clamped,
}

impl From<EdgeConfig> for EdgeCondition {
    fn from(e: EdgeConfig) -> Self {
        match e {
            EdgeConfig::Free => EdgeCondition::Free,
            EdgeConfig::SimplySupported => EdgeCondition::SimplySupported,
            EdgeConfig::Clamped => EdgeCondition::Clamped,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKindConfig {
    Ply,
    Interlayer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Linear,
    #[default]
    Nonlinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    #[default]
    SparseLu,
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StressMode {
    /// Mid-surface stresses (membrane part only).
    #[default]
    Membrane,
    /// Stresses at the outer fibres of each ply.
    Total,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Matcher {
    /// Glass plus interlayer thickness.
    #[default]
    TrueMonolithic,
    /// Glass plies only.
    GlassOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Shear modulus of every interlayer.
    InterlayerShear,
    Pressure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub lx: Length,
    pub ly: Length,
    #[serde(default)]
    pub reduction: Reduction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerConfig {
    pub thickness: Length,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub youngs: Option<Stress>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shear: Option<Stress>,
    pub poisson: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shear_correction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<LayerKindConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub nx: usize,
    pub ny: usize,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self { nx: 20, ny: 20 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcConfig {
    #[serde(default = "ss")]
    pub left: EdgeConfig,
    #[serde(default = "ss")]
    pub right: EdgeConfig,
    #[serde(default = "ss")]
    pub bottom: EdgeConfig,
    #[serde(default = "ss")]
    pub top: EdgeConfig,
    #[serde(default)]
    pub supported_layers: SupportedLayersConfig,
    #[serde(default = "yes")]
    pub pin_rigid_modes: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SupportedLayersConfig {
    #[default]
    All,
    Outer,
}

fn ss() -> EdgeConfig {
    EdgeConfig::SimplySupported
}

fn yes() -> bool {
    true
}

impl Default for BcConfig {
    fn default() -> Self {
        Self {
            left: ss(),
            right: ss(),
            bottom: ss(),
            top: ss(),
            supported_layers: SupportedLayersConfig::All,
            pin_rigid_modes: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadConfig {
    pub pressure: Stress,
    #[serde(default)]
    pub layer: usize,
    #[serde(default = "full_schedule")]
    pub schedule: Vec<f64>,
}

fn full_schedule() -> Vec<f64> {
    vec![1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_bisections")]
    pub max_bisections: usize,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub linear_solver: SolverKind,
}

fn default_tolerance() -> f64 {
    1e-8
}

fn default_max_iterations() -> usize {
    50
}

fn default_bisections() -> usize {
    8
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: default_tolerance(),
            max_iterations: default_max_iterations(),
            max_bisections: default_bisections(),
            mode: Mode::Nonlinear,
            linear_solver: SolverKind::SparseLu,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default = "yes")]
    pub deflection: bool,
    #[serde(default = "yes")]
    pub stress: bool,
    /// Also write nodal fields as plain grids for contour plotting.
    #[serde(default)]
    pub grids: bool,
    #[serde(default)]
    pub stress_mode: StressMode,
    /// Extra fibres, local to each layer, in `[-1, 1]` of the half thickness.
    #[serde(default)]
    pub z_levels: Vec<f64>,
    /// Sampling points per layer of the centre through-thickness profile.
    #[serde(default = "default_profile_points")]
    pub profile_points: usize,
}

fn default_dir() -> String {
    "out".into()
}

fn default_profile_points() -> usize {
    5
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            deflection: true,
            stress: true,
            grids: false,
            stress_mode: StressMode::Membrane,
            z_levels: Vec::new(),
            profile_points: default_profile_points(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub values: Vec<Stress>,
    /// Also solve every point in geometrically linear mode and report the difference.
    #[serde(default)]
    pub compare_linear: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    /// `[nx, ny]` pairs, coarse to fine.
    pub meshes: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EfftConfig {
    pub shear_values: Vec<Stress>,
    #[serde(default)]
    pub matcher: Matcher,
    /// Re-solve the monolithic plate at the deflection-effective thickness.
    #[serde(default = "yes")]
    pub verify: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default)]
    pub job: JobKind,
    pub geometry: GeometryConfig,
    pub layers: Vec<LayerConfig>,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub bcs: BcConfig,
    pub load: LoadConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub efft: Option<EfftConfig>,
}

fn field_err(field: impl fmt::Display, msg: impl fmt::Display) -> Error {
    Error::Config(format!("{field}: {msg}"))
}

/// Parse, fill defaults and derived constants, and validate.
pub fn parse_config(text: &str) -> Result<AnalysisConfig> {
    let mut cfg: AnalysisConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.normalize()?;
    cfg.validate()?;
    Ok(cfg)
}

impl AnalysisConfig {
    /// Resolved configuration with every default written out.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn normalize(&mut self) -> Result<()> {
        for (i, l) in self.layers.iter_mut().enumerate() {
            let name = |f: &str| format!("layers[{i}].{f}");
            let nu = l.poisson;
            let kind = l.kind.unwrap_or(if l.youngs.is_none() && l.shear.is_some() {
                LayerKindConfig::Interlayer
            } else {
                LayerKindConfig::Ply
            });
            l.kind = Some(kind);
            l.shear_correction.get_or_insert(match kind {
                LayerKindConfig::Ply => 5.0 / 6.0,
                LayerKindConfig::Interlayer => 1.0,
            });
            match (l.youngs, l.shear) {
                (None, None) => return Err(field_err(name("youngs"), "either youngs or shear is required")),
                (Some(e), None) => l.shear = Some(Stress(e.0 / (2.0 * (1.0 + nu)))),
                (None, Some(g)) => l.youngs = Some(Stress(2.0 * g.0 * (1.0 + nu))),
                (Some(e), Some(g)) => {
                    let derived = 2.0 * g.0 * (1.0 + nu);
                    if (derived - e.0).abs() > 1e-9 * e.0.abs().max(derived.abs()) {
                        return Err(field_err(
                            name("shear"),
                            format!("youngs {} and shear {} violate E = 2G(1+nu)", e.0, g.0),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.geometry;
        for (name, v) in [("geometry.lx", g.lx.0), ("geometry.ly", g.ly.0)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(field_err(name, format!("must be positive, got {v}")));
            }
        }
        if self.layers.is_empty() {
            return Err(field_err("layers", "at least one layer is required"));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if !(l.thickness.0 > 0.0 && l.thickness.0.is_finite()) {
                return Err(field_err(format!("layers[{i}].thickness"), format!("must be positive, got {}", l.thickness.0)));
            }
            if !(0.0..0.5).contains(&l.poisson) {
                return Err(field_err(format!("layers[{i}].poisson"), format!("must satisfy 0 <= nu < 0.5, got {}", l.poisson)));
            }
            let k = l.shear_correction.unwrap_or(1.0);
            if !(k > 0.0 && k <= 1.0) {
                return Err(field_err(format!("layers[{i}].shear_correction"), format!("must lie in (0, 1], got {k}")));
            }
            for (f, v) in [("youngs", l.youngs), ("shear", l.shear)] {
                if let Some(v) = v {
                    if !(v.0 > 0.0 && v.0.is_finite()) {
                        return Err(field_err(format!("layers[{i}].{f}"), format!("must be positive, got {}", v.0)));
                    }
                }
            }
        }
        if self.mesh.nx == 0 || self.mesh.ny == 0 {
            return Err(field_err("mesh", "nx and ny must be at least 1"));
        }
        if self.load.layer >= self.layers.len() {
            return Err(field_err("load.layer", format!("no layer {} in a {}-layer laminate", self.load.layer, self.layers.len())));
        }
        if !self.load.pressure.0.is_finite() {
            return Err(field_err("load.pressure", "must be finite"));
        }
        crate::model::validate_schedule(&self.load.schedule).map_err(|e| field_err("load.schedule", e))?;
        if !(self.solver.tolerance > 0.0) {
            return Err(field_err("solver.tolerance", "must be positive"));
        }
        if self.solver.max_iterations == 0 {
            return Err(field_err("solver.max_iterations", "must be at least 1"));
        }
        if self.output.z_levels.iter().any(|z| !(-1.0..=1.0).contains(z)) {
            return Err(field_err("output.z_levels", "entries must lie in [-1, 1]"));
        }
        if self.output.profile_points < 2 {
            return Err(field_err("output.profile_points", "must be at least 2"));
        }
        let b = &self.bcs;
        match g.reduction {
            Reduction::Quarter if b.left != b.right || b.bottom != b.top => {
                return Err(field_err("geometry.reduction", "quarter model needs left == right and bottom == top edges"));
            }
            Reduction::HalfX if b.left != b.right => {
                return Err(field_err("geometry.reduction", "half_x model needs left == right edges"));
            }
            Reduction::HalfY if b.bottom != b.top => {
                return Err(field_err("geometry.reduction", "half_y model needs bottom == top edges"));
            }
            _ => {}
        }
        match self.job {
            JobKind::Sweep => match &self.sweep {
                None => return Err(field_err("sweep", "required for job = \"sweep\"")),
                Some(s) if s.values.is_empty() => return Err(field_err("sweep.values", "must not be empty")),
                Some(s) if s.parameter == SweepParameter::InterlayerShear
                    && !self.layers.iter().any(|l| l.kind == Some(LayerKindConfig::Interlayer)) =>
                {
                    return Err(field_err("sweep.parameter", "laminate has no interlayer"))
                }
                _ => {}
            },
            JobKind::Convergence => match &self.convergence {
                None => return Err(field_err("convergence", "required for job = \"convergence\"")),
                Some(c) if c.meshes.len() < 2 => return Err(field_err("convergence.meshes", "need at least two meshes")),
                Some(c) if c.meshes.iter().any(|m| m[0] == 0 || m[1] == 0) => {
                    return Err(field_err("convergence.meshes", "element counts must be at least 1"))
                }
                _ => {}
            },
            JobKind::Efft => match &self.efft {
                None => return Err(field_err("efft", "required for job = \"efft\"")),
                Some(e) if e.shear_values.is_empty() => return Err(field_err("efft.shear_values", "must not be empty")),
                _ => {}
            },
            _ => {}
        }
        Ok(())
    }

    pub fn layer_specs(&self) -> Result<Vec<LayerSpec>> {
        self.layers
            .iter()
            .map(|l| {
                Ok(LayerSpec {
                    thickness: l.thickness.0,
                    youngs: l.youngs.map(|v| v.0).unwrap_or(f64::NAN),
                    poisson: l.poisson,
                    shear: l.shear.map(|v| v.0).unwrap_or(f64::NAN),
                    shear_correction: l.shear_correction.unwrap_or(1.0),
                    kind: match l.kind {
                        Some(LayerKindConfig::Interlayer) => LayerKind::Interlayer,
                        _ => LayerKind::Ply,
                    },
                })
            })
            .collect()
    }

    pub fn laminate(&self) -> Result<LaminateSpec> {
        let layers = self.layer_specs()?;
        let (lx, ly) = (self.geometry.lx.0, self.geometry.ly.0);
        if layers.len() == 1 {
            LaminateSpec::single(layers[0], lx, ly)
        } else {
            LaminateSpec::new(layers, lx, ly)
        }
    }

    /// Mesh of the modelled region; reduced models start at the plate corner.
    pub fn mesh(&self) -> Result<Mesh> {
        let (lx, ly) = (self.geometry.lx.0, self.geometry.ly.0);
        let (mx, my) = match self.geometry.reduction {
            Reduction::Full => (lx, ly),
            Reduction::Quarter => (lx / 2.0, ly / 2.0),
            Reduction::HalfX => (lx / 2.0, ly),
            Reduction::HalfY => (lx, ly / 2.0),
        };
        build_mesh(mx, my, self.mesh.nx, self.mesh.ny)
    }

    pub fn boundary_conditions(&self) -> Result<BoundaryConditionSet> {
        let b = &self.bcs;
        let (mut right, mut top) = (EdgeCondition::from(b.right), EdgeCondition::from(b.top));
        if matches!(self.geometry.reduction, Reduction::Quarter | Reduction::HalfX) {
            right = EdgeCondition::SymmetryX;
        }
        if matches!(self.geometry.reduction, Reduction::Quarter | Reduction::HalfY) {
            top = EdgeCondition::SymmetryY;
        }
        let mut set = BoundaryConditionSet::new(b.left.into(), right, b.bottom.into(), top)?;
        set.supported_layers = match b.supported_layers {
            SupportedLayersConfig::All => SupportedLayers::All,
            SupportedLayersConfig::Outer => SupportedLayers::Outer,
        };
        Ok(set.with_rigid_pins(b.pin_rigid_modes))
    }

    pub fn load_case(&self) -> Result<LoadCase> {
        let mut layers = vec![LayerLoad::default(); self.layers.len()];
        layers[self.load.layer] = LayerLoad::pressure(self.load.pressure.0);
        Ok(LoadCase { layers })
    }

    pub fn kinematics(&self) -> Kinematics {
        match self.solver.mode {
            Mode::Linear => Kinematics::Linear,
            Mode::Nonlinear => Kinematics::VonKarman,
        }
    }

    pub fn settings(&self) -> NewtonSettings {
        NewtonSettings {
            tolerance: self.solver.tolerance,
            max_iterations: self.solver.max_iterations,
            load_schedule: self.load.schedule.clone(),
            max_bisections: self.solver.max_bisections,
            linear_solver: match self.solver.linear_solver {
                SolverKind::SparseLu => LinearSolver::SparseLu,
                SolverKind::Dense => LinearSolver::Dense,
            },
        }
    }

    pub fn problem(&self) -> Result<PlateProblem> {
        PlateProblem::new(self.laminate()?, self.mesh()?, self.boundary_conditions()?, self.load_case()?, self.kinematics())
    }

    /// Set the shear modulus of every interlayer (E follows from nu).
    pub fn set_interlayer_shear(&mut self, g: f64) {
        for l in &mut self.layers {
            if l.kind == Some(LayerKindConfig::Interlayer) {
                l.shear = Some(Stress(g));
                l.youngs = Some(Stress(2.0 * g * (1.0 + l.poisson)));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [geometry]
        lx = "1.6 m"
        ly = 1600

        [[layers]]
        thickness = "5 mm"
        youngs = "68900 MPa"
        poisson = 0.22

        [[layers]]
        thickness = "0.152 cm"
        shear = "689.5 kPa"
        poisson = 0.49

        [[layers]]
        thickness = 5.0
        youngs = "68.9 GPa"
        poisson = 0.22

        [load]
        pressure = "10 kPa"
    "#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.job, JobKind::Solve);
        assert_eq!(cfg.solver.tolerance, 1e-8);
        assert_eq!(cfg.load.schedule, vec![1.0]);
        assert_eq!(cfg.solver.mode, Mode::Nonlinear);
        let echo = cfg.to_toml();
        assert!(echo.contains("tolerance = 0.00000001"), "{echo}");
        assert!(echo.contains("schedule = [1.0]"), "{echo}");
    }

    #[test]
    fn units_are_normalized() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.geometry.lx.0, 1600.0);
        assert_eq!(cfg.geometry.ly.0, 1600.0);
        assert!((cfg.layers[1].thickness.0 - 1.52).abs() < 1e-12);
        assert!((cfg.layers[1].shear.unwrap().0 - 0.6895).abs() < 1e-12);
        assert_eq!(cfg.layers[2].youngs.unwrap().0, 68_900.0);
        assert!((cfg.load.pressure.0 - 0.01).abs() < 1e-15);
        assert_eq!(cfg.layers[1].kind, Some(LayerKindConfig::Interlayer));
        assert_eq!(cfg.layers[1].shear_correction, Some(1.0));
        assert_eq!(cfg.layers[0].shear_correction, Some(5.0 / 6.0));
    }

    #[test]
    fn round_trip_is_identity() {
        let cfg = parse_config(MINIMAL).unwrap();
        let again = parse_config(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn bad_poisson_names_the_field() {
        let text = MINIMAL.replace("poisson = 0.49", "poisson = 0.6");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("layers[1].poisson"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("[load]", "[load]\nintensity = 3");
        assert!(matches!(parse_config(&text), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_unit_is_rejected() {
        let text = MINIMAL.replace("\"5 mm\"", "\"5 in\"");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("unit"), "{err}");
    }

    #[test]
    fn inconsistent_moduli_are_rejected() {
        let text = MINIMAL.replace("shear = \"689.5 kPa\"", "shear = \"689.5 kPa\"\nyoungs = 5.0");
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn quarter_reduction_builds_symmetry_edges() {
        let text = MINIMAL.replace("ly = 1600", "ly = 1600\nreduction = \"quarter\"");
        let cfg = parse_config(&text).unwrap();
        let mesh = cfg.mesh().unwrap();
        assert_eq!((mesh.lx, mesh.ly), (800.0, 800.0));
        let bcs = cfg.boundary_conditions().unwrap();
        assert_eq!(bcs.right, EdgeCondition::SymmetryX);
        assert_eq!(bcs.top, EdgeCondition::SymmetryY);
        assert_eq!(bcs.left, EdgeCondition::SimplySupported);
    }

    #[test]
    fn quarter_needs_matching_edges() {
        let text = MINIMAL.replace("ly = 1600", "ly = 1600\nreduction = \"quarter\"\n[bcs]\ntop = \"free\"");
        // [bcs] after geometry keys; move load below so TOML stays valid
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn sweep_job_requires_section() {
        let text = format!("job = \"sweep\"\n{MINIMAL}");
        assert!(parse_config(&text).unwrap_err().to_string().contains("sweep"));
    }

    #[test]
    fn quantity_parser() {
        let u = &[("mm", 1.0), ("m", 1000.0)];
        assert_eq!(parse_quantity("1.5e-3 m", u, "length").unwrap(), 1.5);
        assert_eq!(parse_quantity("2mm", u, "length").unwrap(), 2.0);
        assert_eq!(parse_quantity("7", u, "length").unwrap(), 7.0);
        assert!(parse_quantity("abc", u, "length").is_err());
    }
}
