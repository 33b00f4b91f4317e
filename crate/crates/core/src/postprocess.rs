//! Stress recovery, nodal smoothing, principal stresses and effective thickness.

use std::io::{self, Write};

use crate::element::generalized_strains;
use crate::error::{Error, Result};
use crate::model::{Component, LaminateSpec, Mesh};
use crate::solver::{GlobalState, PlateProblem};

/// Membrane stresses of one layer at one fibre `z` (local to the layer).
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStress {
    pub layer: usize,
    pub z: f64,
    /// `[sx, sy, txy]` at the four Gauss points of every element.
    pub gauss: Vec<[[f64; 3]; 4]>,
    /// Smoothed `[sx, sy, txy]` per node.
    pub nodal: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StressField {
    pub levels: Vec<LayerStress>,
    /// Transverse shear `[txz, tyz]` per layer per node (constant through each layer).
    pub shear: Vec<Vec<[f64; 2]>>,
}

/// Principal stresses `(s1, s2, theta)` with `s1 >= s2` and `theta` in degrees.
pub fn principal_stresses(sx: f64, sy: f64, txy: f64) -> (f64, f64, f64) {
    let centre = 0.5 * (sx + sy);
    let radius = (0.25 * (sx - sy) * (sx - sy) + txy * txy).sqrt();
    let theta = 0.5 * (2.0 * txy).atan2(sx - sy);
    (centre + radius, centre - radius, theta.to_degrees())
}

impl LayerStress {
    pub fn principal(&self) -> Vec<(f64, f64, f64)> {
        self.nodal.iter().map(|s| principal_stresses(s[0], s[1], s[2])).collect()
    }

    /// Largest nodal major principal stress and the node where it occurs.
    pub fn max_principal(&self) -> (f64, usize) {
        self.principal()
            .iter()
            .enumerate()
            .fold((f64::NEG_INFINITY, 0), |best, (i, p)| if p.0 > best.0 { (p.0, i) } else { best })
    }

    /// Smallest nodal minor principal stress and its node.
    pub fn min_principal(&self) -> (f64, usize) {
        self.principal()
            .iter()
            .enumerate()
            .fold((f64::INFINITY, 0), |best, (i, p)| if p.1 < best.0 { (p.1, i) } else { best })
    }
}

/// Bilinear extrapolation of 2×2 Gauss values to element corners followed by
/// area-weighted nodal averaging.
pub fn extrapolate_to_nodes(mesh: &Mesh, gauss: &[[f64; 4]]) -> Result<Vec<f64>> {
    if gauss.len() != mesh.n_elements() {
        return Err(Error::DimensionMismatch { expected: mesh.n_elements(), got: gauss.len() });
    }
    // Gauss point g sits at (±1/√3, ±1/√3) next to corner g; in coordinates
    // scaled so the Gauss points are at ±1 the corners are at ±√3
    let s = 3f64.sqrt();
    let a = (1.0 + s) * (1.0 + s) / 4.0;
    let b = (1.0 + s) * (1.0 - s) / 4.0;
    let c = (1.0 - s) * (1.0 - s) / 4.0;
    let mut sum = vec![0.0; mesh.n_nodes()];
    let mut weight = vec![0.0; mesh.n_nodes()];
    for (e, g) in gauss.iter().enumerate() {
        let area = mesh.element_area(e);
        for corner in 0..4 {
            let next = (corner + 1) % 4;
            let opposite = (corner + 2) % 4;
            let prev = (corner + 3) % 4;
            let v = a * g[corner] + b * (g[next] + g[prev]) + c * g[opposite];
            let node = mesh.elements[e][corner];
            sum[node] += area * v;
            weight[node] += area;
        }
    }
    Ok(sum.iter().zip(&weight).map(|(s, w)| s / w).collect())
}

/// Mid-plane positions of every layer in the global thickness coordinate,
/// measured from the laminate mid-plane along the load direction.
pub fn layer_midplanes(laminate: &LaminateSpec) -> Vec<f64> {
    let total = laminate.total_thickness();
    let mut z = -total / 2.0;
    laminate
        .layers
        .iter()
        .map(|l| {
            let mid = z + l.thickness / 2.0;
            z += l.thickness;
            mid
        })
        .collect()
}

/// `(layer, z)` of the loaded outer face and the opposite outer face.
pub fn outer_surfaces(laminate: &LaminateSpec) -> [(usize, f64); 2] {
    let last = laminate.n_layers() - 1;
    [(0, -laminate.layers[0].thickness / 2.0), (last, laminate.layers[last].thickness / 2.0)]
}

/// Stresses at the requested `(layer, z)` fibres, smoothed to nodes.
pub fn recover_stresses(problem: &PlateProblem, state: &GlobalState, levels: &[(usize, f64)]) -> Result<StressField> {
    if !state.converged {
        return Err(Error::Unconverged);
    }
    let n_layers = problem.laminate.n_layers();
    for &(layer, z) in levels {
        if layer >= n_layers {
            return Err(Error::InvalidArgument(format!("layer {layer} out of range")));
        }
        let h = problem.laminate.layers[layer].thickness;
        if z.abs() > h / 2.0 * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!("z = {z} lies outside layer {layer} (h = {h})")));
        }
    }
    let mesh = &problem.mesh;
    let ne = mesh.n_elements();
    let mut out = Vec::with_capacity(levels.len());
    for &(layer, z) in levels {
        let membrane = problem.stiffness(layer).membrane;
        let mut gauss = Vec::with_capacity(ne);
        for e in 0..ne {
            let re = problem.element_vector(layer, e, &state.r);
            let mut vals = [[0.0; 3]; 4];
            for (g, qp) in problem.quadrature(e).membrane.iter().enumerate() {
                let s = crate::element::stress_at(&membrane, &generalized_strains(qp, &re, problem.kinematics), z);
                vals[g] = [s[0], s[1], s[2]];
            }
            gauss.push(vals);
        }
        let mut nodal = vec![[0.0; 3]; mesh.n_nodes()];
        for comp in 0..3 {
            let g: Vec<[f64; 4]> = gauss.iter().map(|v| [v[0][comp], v[1][comp], v[2][comp], v[3][comp]]).collect();
            for (n, val) in extrapolate_to_nodes(mesh, &g)?.into_iter().enumerate() {
                nodal[n][comp] = val;
            }
        }
        out.push(LayerStress { layer, z, gauss, nodal });
    }

    let mut shear = Vec::with_capacity(n_layers);
    for layer in 0..n_layers {
        let g_mod = problem.laminate.layers[layer].shear;
        let mut sum = vec![[0.0; 2]; mesh.n_nodes()];
        let mut weight = vec![0.0; mesh.n_nodes()];
        for e in 0..ne {
            let re = problem.element_vector(layer, e, &state.r);
            let qp = &problem.quadrature(e).shear;
            let gamma = qp.b_s() * re.shear();
            let area = mesh.element_area(e);
            for &node in &mesh.elements[e] {
                sum[node][0] += area * g_mod * gamma[0];
                sum[node][1] += area * g_mod * gamma[1];
                weight[node] += area;
            }
        }
        shear.push(sum.iter().zip(&weight).map(|(s, w)| [s[0] / w, s[1] / w]).collect());
    }
    Ok(StressField { levels: out, shear })
}

/// Nodal deflection `w` of one layer (zero where fixed).
pub fn nodal_deflection(problem: &PlateProblem, state: &GlobalState, layer: usize) -> Vec<f64> {
    (0..problem.mesh.n_nodes()).map(|n| problem.dofmap.value(&state.r, layer, n, Component::W)).collect()
}

/// Node closest to the plate centre.
///
/// Reduced models keep the plate origin at a corner, so the centre is
/// always at `(Lx/2, Ly/2)` in mesh coordinates.
pub fn center_node(problem: &PlateProblem) -> usize {
    problem.mesh.nearest_node(problem.laminate.lx / 2.0, problem.laminate.ly / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveThickness {
    pub deflection: f64,
    pub stress: f64,
}

/// Thicknesses of the monolithic plate matching the laminate's peak
/// deflection and stress, by the power-law scaling `w ∝ t⁻³`, `σ ∝ t⁻²` of a
/// reference monolithic solve at thickness `t_ref`.
pub fn effective_thickness(
    w_laminate: f64,
    s_laminate: f64,
    w_reference: f64,
    s_reference: f64,
    t_ref: f64,
) -> Result<EffectiveThickness> {
    let check = |v: f64, what: &str| {
        if v == 0.0 || !v.is_finite() {
            Err(Error::UndefinedThickness(format!("{what} is {v}")))
        } else {
            Ok(v.abs())
        }
    };
    let (wl, sl) = (check(w_laminate, "laminate deflection")?, check(s_laminate, "laminate stress")?);
    let (wr, sr) = (check(w_reference, "reference deflection")?, check(s_reference, "reference stress")?);
    if !(t_ref > 0.0) {
        return Err(Error::InvalidArgument(format!("reference thickness must be positive, got {t_ref}")));
    }
    Ok(EffectiveThickness { deflection: t_ref * (wr / wl).cbrt(), stress: t_ref * (sr / sl).sqrt() })
}

/// `x,y,layer,z,sx,sy,txy,s1,s2`, one row per node per level.
pub fn write_stress_csv(out: &mut impl Write, mesh: &Mesh, field: &StressField) -> io::Result<()> {
    writeln!(out, "x,y,layer,z,sx,sy,txy,s1,s2")?;
    for level in &field.levels {
        for (n, s) in level.nodal.iter().enumerate() {
            let (s1, s2, _) = principal_stresses(s[0], s[1], s[2]);
            let [x, y] = mesh.nodes[n];
            writeln!(out, "{x},{y},{},{},{},{},{},{s1},{s2}", level.layer, level.z, s[0], s[1], s[2])?;
        }
    }
    Ok(())
}

/// `x,y,layer,w`, one row per node per layer.
pub fn write_deflection_csv(out: &mut impl Write, problem: &PlateProblem, state: &GlobalState) -> io::Result<()> {
    writeln!(out, "x,y,layer,w")?;
    for layer in 0..problem.laminate.n_layers() {
        for (n, w) in nodal_deflection(problem, state, layer).iter().enumerate() {
            let [x, y] = problem.mesh.nodes[n];
            writeln!(out, "{x},{y},{layer},{w}")?;
        }
    }
    Ok(())
}

/// Nodal field as an `(ny+1) × (nx+1)` comma-separated grid, row `j` at `y_j`.
pub fn write_grid(out: &mut impl Write, mesh: &Mesh, values: &[f64]) -> io::Result<()> {
    for j in 0..=mesh.ny {
        let row: Vec<String> = (0..=mesh.nx).map(|i| values[mesh.node_index(i, j)].to_string()).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
