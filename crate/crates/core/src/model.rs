//! Laminate, mesh, boundary conditions, loading and global DOF numbering.
//!
//! All quantities are stored in the mm–N–MPa system. The `z` axis (and the
//! deflection `w`) points in the direction of positive transverse pressure;
//! layer 0 is the loaded face ("top") and the last layer is the face in
//! tension under positive pressure ("bottom"). Interface `i` joins the
//! `+h/2` fibre of layer `i` to the `-h/2` fibre of layer `i + 1`.

use crate::error::{Error, Result};

/// Number of generalized displacement components per node and layer.
pub const NODE_DOFS: usize = 5;

/// Nodal component, ordered as `[u, v, w, phi_x, phi_y]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Component {
    U = 0,
    V = 1,
    W = 2,
    PhiX = 3,
    PhiY = 4,
}

impl Component {
    pub const ALL: [Component; NODE_DOFS] = [
        Component::U,
        Component::V,
        Component::W,
        Component::PhiX,
        Component::PhiY,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Whether a layer is a load-bearing ply (given by `E`) or a compliant
/// interlayer (given by `G`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    Ply,
    Interlayer,
}

/// Thickness and isotropic elastic constants of one layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerSpec {
    pub thickness: f64,
    pub youngs: f64,
    pub poisson: f64,
    pub shear: f64,
    pub shear_correction: f64,
    pub kind: LayerKind,
}

/// Default shear correction factor of plies.
pub const PLY_SHEAR_CORRECTION: f64 = 5.0 / 6.0;
/// Default shear correction factor of interlayers (pure shear state).
pub const INTERLAYER_SHEAR_CORRECTION: f64 = 1.0;

impl LayerSpec {
    /// Ply given by Young's modulus; `G = E / (2 (1 + nu))`.
    pub fn from_youngs(thickness: f64, youngs: f64, poisson: f64, shear_correction: f64) -> Result<Self> {
        check_poisson(poisson)?;
        if !(youngs > 0.0 && youngs.is_finite()) {
            return Err(Error::InvalidMaterial(format!("Young's modulus must be positive, got {youngs}")));
        }
        let layer = LayerSpec {
            thickness,
            youngs,
            poisson,
            shear: youngs / (2.0 * (1.0 + poisson)),
            shear_correction,
            kind: LayerKind::Ply,
        };
        layer.validate()?;
        Ok(layer)
    }

    /// Interlayer given by shear modulus; `E = 2 G (1 + nu)`.
    pub fn from_shear(thickness: f64, shear: f64, poisson: f64, shear_correction: f64) -> Result<Self> {
        check_poisson(poisson)?;
        if !(shear > 0.0 && shear.is_finite()) {
            return Err(Error::InvalidMaterial(format!("shear modulus must be positive, got {shear}")));
        }
        let layer = LayerSpec {
            thickness,
            youngs: 2.0 * shear * (1.0 + poisson),
            poisson,
            shear,
            shear_correction,
            kind: LayerKind::Interlayer,
        };
        layer.validate()?;
        Ok(layer)
    }

    pub fn glass(thickness: f64, youngs: f64, poisson: f64) -> Result<Self> {
        Self::from_youngs(thickness, youngs, poisson, PLY_SHEAR_CORRECTION)
    }

    pub fn interlayer(thickness: f64, shear: f64, poisson: f64) -> Result<Self> {
        Self::from_shear(thickness, shear, poisson, INTERLAYER_SHEAR_CORRECTION)
    }

    /// Same layer with a different thickness.
    pub fn with_thickness(&self, thickness: f64) -> Result<Self> {
        let layer = LayerSpec { thickness, ..*self };
        layer.validate()?;
        Ok(layer)
    }

    /// Same interlayer with a different shear modulus (Young's modulus re-derived).
    pub fn with_shear(&self, shear: f64) -> Result<Self> {
        Self::from_shear(self.thickness, shear, self.poisson, self.shear_correction)
    }

    pub fn validate(&self) -> Result<()> {
        check_poisson(self.poisson)?;
        if !(self.thickness > 0.0 && self.thickness.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "layer thickness must be positive, got {}",
                self.thickness
            )));
        }
        if !(self.youngs > 0.0 && self.shear > 0.0) {
            return Err(Error::InvalidMaterial("elastic moduli must be positive".into()));
        }
        if !(self.shear_correction > 0.0 && self.shear_correction <= 1.0) {
            return Err(Error::InvalidMaterial(format!(
                "shear correction factor must lie in (0, 1], got {}",
                self.shear_correction
            )));
        }
        Ok(())
    }
}

pub(crate) fn check_poisson(nu: f64) -> Result<()> {
    if !(0.0..0.5).contains(&nu) {
        return Err(Error::InvalidMaterial(format!(
            "Poisson's ratio must lie in [0, 0.5), got {nu}"
        )));
    }
    Ok(())
}

/// Ordered stack of layers over a rectangular plan `lx` × `ly` (mm).
#[derive(Debug, Clone, PartialEq)]
pub struct LaminateSpec {
    pub layers: Vec<LayerSpec>,
    pub lx: f64,
    pub ly: f64,
}

impl LaminateSpec {
    /// Laminate of at least two layers.
    pub fn new(layers: Vec<LayerSpec>, lx: f64, ly: f64) -> Result<Self> {
        if layers.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "a laminate needs at least two layers, got {}",
                layers.len()
            )));
        }
        Self::build(layers, lx, ly)
    }

    /// Homogeneous single-layer plate, used by the limit models and matchers.
    pub fn single(layer: LayerSpec, lx: f64, ly: f64) -> Result<Self> {
        Self::build(vec![layer], lx, ly)
    }

    fn build(layers: Vec<LayerSpec>, lx: f64, ly: f64) -> Result<Self> {
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "plan dimensions must be positive, got {lx} x {ly}"
            )));
        }
        for layer in &layers {
            layer.validate()?;
        }
        Ok(LaminateSpec { layers, lx, ly })
    }

    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn total_thickness(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness).sum()
    }
}

/// Uniform structured grid of 4-node quadrilaterals.
///
/// Node `(i, j)` has index `j * (nx + 1) + i` and sits at
/// `(i * lx / nx, j * ly / ny)`; element `(i, j)` has index `j * nx + i`
/// and counter-clockwise connectivity starting at its lower-left node.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub nodes: Vec<[f64; 2]>,
    pub elements: Vec<[usize; 4]>,
}

pub fn build_mesh(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Mesh> {
    if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "mesh dimensions must be positive, got {lx} x {ly}"
        )));
    }
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument(format!(
            "element counts must be at least 1, got {nx} x {ny}"
        )));
    }
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            nodes.push([lx * i as f64 / nx as f64, ly * j as f64 / ny as f64]);
        }
    }
    let mut elements = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let n0 = j * (nx + 1) + i;
            elements.push([n0, n0 + 1, n0 + nx + 2, n0 + nx + 1]);
        }
    }
    Ok(Mesh { nx, ny, lx, ly, nodes, elements })
}

impl Mesh {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    pub fn element_coords(&self, element: usize) -> [[f64; 2]; 4] {
        self.elements[element].map(|n| self.nodes[n])
    }

    /// Node closest to `(x, y)`.
    pub fn nearest_node(&self, x: f64, y: f64) -> usize {
        let i = ((x / self.lx) * self.nx as f64).round().clamp(0.0, self.nx as f64) as usize;
        let j = ((y / self.ly) * self.ny as f64).round().clamp(0.0, self.ny as f64) as usize;
        self.node_index(i, j)
    }

    /// Nodes lying on `edge`, in increasing coordinate order.
    pub fn edge_nodes(&self, edge: Edge) -> Vec<usize> {
        match edge {
            Edge::Left => (0..=self.ny).map(|j| self.node_index(0, j)).collect(),
            Edge::Right => (0..=self.ny).map(|j| self.node_index(self.nx, j)).collect(),
            Edge::Bottom => (0..=self.nx).map(|i| self.node_index(i, 0)).collect(),
            Edge::Top => (0..=self.nx).map(|i| self.node_index(i, self.ny)).collect(),
        }
    }

    /// Signed area of element `e` (shoelace formula).
    pub fn element_area(&self, element: usize) -> f64 {
        let c = self.element_coords(element);
        let mut twice = 0.0;
        for a in 0..4 {
            let b = (a + 1) % 4;
            twice += c[a][0] * c[b][1] - c[b][0] * c[a][1];
        }
        0.5 * twice
    }
}

/// Plate edge of the (possibly reduced) computational domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    /// `x = 0`
    Left,
    /// `x = lx`
    Right,
    /// `y = 0`
    Bottom,
    /// `y = ly`
    Top,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::Left, Edge::Right, Edge::Bottom, Edge::Top];

    /// Edges `x = const` are normal to the x axis.
    pub fn is_normal_to_x(self) -> bool {
        matches!(self, Edge::Left | Edge::Right)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeCondition {
    Free,
    /// `w = 0` on every supported layer; in-plane displacements and rotations stay free.
    SimplySupported,
    /// All five components fixed on every supported layer.
    Clamped,
    /// Mirror plane normal to x: `u = 0`, `phi_y = 0` on all layers.
    SymmetryX,
    /// Mirror plane normal to y: `v = 0`, `phi_x = 0` on all layers.
    SymmetryY,
}

impl EdgeCondition {
    fn fixed_components(self) -> &'static [Component] {
        match self {
            EdgeCondition::Free => &[],
            EdgeCondition::SimplySupported => &[Component::W],
            EdgeCondition::Clamped => &Component::ALL,
            EdgeCondition::SymmetryX => &[Component::U, Component::PhiY],
            EdgeCondition::SymmetryY => &[Component::V, Component::PhiX],
        }
    }

    fn is_symmetry(self) -> bool {
        matches!(self, EdgeCondition::SymmetryX | EdgeCondition::SymmetryY)
    }
}

/// Which layers carry support (simply supported / clamped) conditions.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum SupportedLayers {
    #[default]
    All,
    /// Only the first and the last layer.
    Outer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryConditionSet {
    pub left: EdgeCondition,
    pub right: EdgeCondition,
    pub bottom: EdgeCondition,
    pub top: EdgeCondition,
    pub supported_layers: SupportedLayers,
    /// Pin the in-plane rigid-body modes left free by the edge conditions
    /// (u, v of the middle layer at the node nearest the centroid and v at
    /// the node nearest the left-edge midpoint). Reaction-free for
    /// self-equilibrated in-plane loading.
    pub pin_rigid_modes: bool,
}

impl BoundaryConditionSet {
    pub fn new(left: EdgeCondition, right: EdgeCondition, bottom: EdgeCondition, top: EdgeCondition) -> Result<Self> {
        let bcs = BoundaryConditionSet {
            left,
            right,
            bottom,
            top,
            supported_layers: SupportedLayers::All,
            pin_rigid_modes: false,
        };
        bcs.validate()?;
        Ok(bcs)
    }

    pub fn uniform(condition: EdgeCondition) -> Result<Self> {
        Self::new(condition, condition, condition, condition)
    }

    pub fn with_rigid_pins(mut self, pin: bool) -> Self {
        self.pin_rigid_modes = pin;
        self
    }

    pub fn edge(&self, edge: Edge) -> EdgeCondition {
        match edge {
            Edge::Left => self.left,
            Edge::Right => self.right,
            Edge::Bottom => self.bottom,
            Edge::Top => self.top,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for edge in Edge::ALL {
            match self.edge(edge) {
                EdgeCondition::SymmetryX if !edge.is_normal_to_x() => {
                    return Err(Error::InvalidArgument(format!(
                        "symmetry_x is only valid on edges x = const, not {edge:?}"
                    )))
                }
                EdgeCondition::SymmetryY if edge.is_normal_to_x() => {
                    return Err(Error::InvalidArgument(format!(
                        "symmetry_y is only valid on edges y = const, not {edge:?}"
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn layer_supported(&self, layer: usize, n_layers: usize) -> bool {
        match self.supported_layers {
            SupportedLayers::All => true,
            SupportedLayers::Outer => layer == 0 || layer + 1 == n_layers,
        }
    }

    fn restrains(&self, test: impl Fn(&[Component]) -> bool) -> bool {
        Edge::ALL.iter().any(|&e| test(self.edge(e).fixed_components()))
    }
}

/// Distributed load intensities acting on one layer's mid-surface.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LayerLoad {
    /// In-plane intensities `[f_x, f_y]` (N/mm²).
    pub in_plane: [f64; 2],
    /// Transverse pressure `f_z` (MPa = N/mm²).
    pub pressure: f64,
    /// Distributed moments `[m_x, m_y]` conjugate to `[phi_x, phi_y]` (N·mm/mm²).
    pub moment: [f64; 2],
}

impl LayerLoad {
    pub fn pressure(pressure: f64) -> Self {
        LayerLoad { pressure, ..Default::default() }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        LayerLoad {
            in_plane: self.in_plane.map(|f| f * factor),
            pressure: self.pressure * factor,
            moment: self.moment.map(|m| m * factor),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.in_plane.iter().chain(self.moment.iter()).all(|v| v.is_finite()) && self.pressure.is_finite()
    }
}

/// Load case: one [`LayerLoad`] per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadCase {
    pub layers: Vec<LayerLoad>,
}

impl LoadCase {
    /// Uniform pressure on layer `layer` (0 = top, the loaded face).
    pub fn pressure_on(n_layers: usize, layer: usize, pressure: f64) -> Result<Self> {
        if layer >= n_layers {
            return Err(Error::InvalidArgument(format!(
                "load layer {layer} out of range for {n_layers} layers"
            )));
        }
        let mut layers = vec![LayerLoad::default(); n_layers];
        layers[layer] = LayerLoad::pressure(pressure);
        let case = LoadCase { layers };
        case.validate()?;
        Ok(case)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.iter().all(LayerLoad::is_finite) {
            Ok(())
        } else {
            Err(Error::InvalidArgument("load intensities must be finite".into()))
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        LoadCase { layers: self.layers.iter().map(|l| l.scaled(factor)).collect() }
    }
}

/// Validates a load-stepping schedule of load factors: strictly increasing,
/// positive, and ending at 1.
pub fn validate_schedule(schedule: &[f64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::InvalidArgument("load schedule is empty".into()));
    }
    let mut prev = 0.0;
    for &s in schedule {
        if !(s > prev && s.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "load schedule must be strictly increasing and positive, got {schedule:?}"
            )));
        }
        prev = s;
    }
    if (prev - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "load schedule must end at the full load (1.0), got {prev}"
        )));
    }
    Ok(())
}

/// Mapping `(layer, node, component)` to global equation numbers.
///
/// Numbering is layer-major so the global tangent is block diagonal by layer.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub n_nodes: usize,
    pub n_layers: usize,
    slots: Vec<Option<usize>>,
    inverse: Vec<(usize, usize, Component)>,
    /// Number of interface tying rows kept after dropping rows whose
    /// columns are all fixed.
    pub n_constraint_rows: usize,
}

impl DofMap {
    fn slot(&self, layer: usize, node: usize, component: Component) -> usize {
        (layer * self.n_nodes + node) * NODE_DOFS + component.index()
    }

    pub fn n_dofs(&self) -> usize {
        self.inverse.len()
    }

    /// Global index, or `None` for a fixed component.
    pub fn dof(&self, layer: usize, node: usize, component: Component) -> Option<usize> {
        self.slots[self.slot(layer, node, component)]
    }

    pub fn is_fixed(&self, layer: usize, node: usize, component: Component) -> bool {
        self.dof(layer, node, component).is_none()
    }

    pub fn locate(&self, dof: usize) -> (usize, usize, Component) {
        self.inverse[dof]
    }

    pub fn n_fixed(&self) -> usize {
        self.slots.len() - self.inverse.len()
    }

    /// Global indices of the 20 element DOFs of `layer`, `None` where fixed.
    pub fn element_dofs(&self, layer: usize, nodes: &[usize; 4]) -> [Option<usize>; 20] {
        let mut out = [None; 20];
        for (a, &node) in nodes.iter().enumerate() {
            for c in Component::ALL {
                out[a * NODE_DOFS + c.index()] = self.dof(layer, node, c);
            }
        }
        out
    }

    /// Value of `(layer, node, component)` in the global vector `r` (0 when fixed).
    pub fn value(&self, r: &[f64], layer: usize, node: usize, component: Component) -> f64 {
        self.dof(layer, node, component).map_or(0.0, |d| r[d])
    }
}

/// Columns of the interface tying rows at one node, as `(layer offset, component)`.
pub(crate) const TIE_ROWS: [[(usize, Component); 4]; 3] = [
    [(0, Component::U), (0, Component::PhiY), (1, Component::U), (1, Component::PhiY)],
    [(0, Component::V), (0, Component::PhiX), (1, Component::V), (1, Component::PhiX)],
    [(0, Component::W), (0, Component::W), (1, Component::W), (1, Component::W)],
];

pub fn build_dof_map(mesh: &Mesh, n_layers: usize, bcs: &BoundaryConditionSet) -> Result<DofMap> {
    if n_layers == 0 {
        return Err(Error::InvalidArgument("at least one layer is required".into()));
    }
    if mesh.n_elements() == 0 {
        return Err(Error::InvalidArgument("empty mesh".into()));
    }
    bcs.validate()?;
    let n_nodes = mesh.n_nodes();
    let mut fixed = vec![false; n_nodes * n_layers * NODE_DOFS];
    let slot = |layer: usize, node: usize, c: Component| (layer * n_nodes + node) * NODE_DOFS + c.index();

    for edge in Edge::ALL {
        let condition = bcs.edge(edge);
        let nodes = mesh.edge_nodes(edge);
        for layer in 0..n_layers {
            if !condition.is_symmetry() && !bcs.layer_supported(layer, n_layers) {
                continue;
            }
            for &node in &nodes {
                for &c in condition.fixed_components() {
                    fixed[slot(layer, node, c)] = true;
                }
            }
        }
    }

    if bcs.pin_rigid_modes {
        let u_held = bcs.restrains(|cs| cs.contains(&Component::U));
        let v_held = bcs.restrains(|cs| cs.contains(&Component::V));
        // any edge fixing u or v also removes the in-plane rotation
        let rot_held = u_held || v_held;
        let layer = n_layers / 2;
        let centre = mesh.nearest_node(mesh.lx / 2.0, mesh.ly / 2.0);
        if !u_held {
            fixed[slot(layer, centre, Component::U)] = true;
        }
        if !v_held {
            fixed[slot(layer, centre, Component::V)] = true;
        }
        if !rot_held {
            let side = mesh.nearest_node(0.0, mesh.ly / 2.0);
            if side == centre {
                return Err(Error::InvalidArgument(
                    "mesh too coarse to pin the in-plane rotation".into(),
                ));
            }
            fixed[slot(layer, side, Component::V)] = true;
        }
    }

    // A tying row left with a single free column forces that column to zero;
    // fix it instead so the remaining rows stay linearly independent.
    let mut n_constraint_rows;
    loop {
        let mut changed = false;
        n_constraint_rows = 0;
        for iface in 0..n_layers.saturating_sub(1) {
            for node in 0..n_nodes {
                for row in TIE_ROWS {
                    let mut free: Vec<usize> = row
                        .iter()
                        .map(|&(off, c)| slot(iface + off, node, c))
                        .filter(|&s| !fixed[s])
                        .collect();
                    free.dedup();
                    match free.len() {
                        0 => {}
                        1 => {
                            fixed[free[0]] = true;
                            changed = true;
                        }
                        _ => n_constraint_rows += 1,
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut slots = vec![None; fixed.len()];
    let mut inverse = Vec::with_capacity(fixed.len());
    for layer in 0..n_layers {
        for node in 0..n_nodes {
            for c in Component::ALL {
                let s = slot(layer, node, c);
                if !fixed[s] {
                    slots[s] = Some(inverse.len());
                    inverse.push((layer, node, c));
                }
            }
        }
    }
    Ok(DofMap { n_nodes, n_layers, slots, inverse, n_constraint_rows })
}
