//! Four-node bilinear layer element: shape functions, strain operators,
//! von Kármán membrane strain, internal forces, consistent tangent and
//! consistent load vector.
//!
//! Element DOFs are ordered node by node as `[u, v, w, phi_x, phi_y]`.
//! Membrane, bending and von Kármán terms use the 2×2 Gauss rule, the
//! transverse shear term a single point at the element centre.

use nalgebra::{Matrix3, RowSVector, SMatrix, SVector, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::material::LayerStiffness;
use crate::model::LayerLoad;

pub type ElementVector = SVector<f64, 20>;
pub type ElementMatrix = SMatrix<f64, 20, 20>;

/// Rows of `r_e` forming `r_n = [u1, v1, ..., u4, v4]`.
pub const MEMBRANE_DOFS: [usize; 8] = [0, 1, 5, 6, 10, 11, 15, 16];
/// Rows of `r_e` forming `r_b = [phi_x1, phi_y1, ..., phi_x4, phi_y4]`.
pub const ROTATION_DOFS: [usize; 8] = [3, 4, 8, 9, 13, 14, 18, 19];
/// Rows of `r_e` forming `r_s = [w1, phi_x1, phi_y1, ..., w4, phi_x4, phi_y4]`.
pub const SHEAR_DOFS: [usize; 12] = [2, 3, 4, 7, 8, 9, 12, 13, 14, 17, 18, 19];
/// Rows of `r_e` forming `r_K = [w1, w2, w3, w4]`.
pub const DEFLECTION_DOFS: [usize; 4] = [2, 7, 12, 17];

/// Geometrically linear or von Kármán membrane strains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Kinematics {
    Linear,
    #[default]
    VonKarman,
}

/// Element DOF vector with its four overlapping views.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementDofVector(pub ElementVector);

impl ElementDofVector {
    pub fn zeros() -> Self {
        ElementDofVector(ElementVector::zeros())
    }

    pub fn from_slice(values: &[f64]) -> Self {
        ElementDofVector(ElementVector::from_column_slice(values))
    }

    pub fn membrane(&self) -> SVector<f64, 8> {
        SVector::from_fn(|i, _| self.0[MEMBRANE_DOFS[i]])
    }

    pub fn rotations(&self) -> SVector<f64, 8> {
        SVector::from_fn(|i, _| self.0[ROTATION_DOFS[i]])
    }

    pub fn shear(&self) -> SVector<f64, 12> {
        SVector::from_fn(|i, _| self.0[SHEAR_DOFS[i]])
    }

    pub fn deflections(&self) -> SVector<f64, 4> {
        SVector::from_fn(|i, _| self.0[DEFLECTION_DOFS[i]])
    }
}

/// Bilinear shape functions and their reference derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeFunctions {
    pub n: [f64; 4],
    pub dn_dxi: [f64; 4],
    pub dn_deta: [f64; 4],
}

/// Reference corners in counter-clockwise order.
pub const REFERENCE_CORNERS: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];

pub fn shape_functions(xi: f64, eta: f64) -> ShapeFunctions {
    let mut sf = ShapeFunctions { n: [0.0; 4], dn_dxi: [0.0; 4], dn_deta: [0.0; 4] };
    for (a, [xa, ya]) in REFERENCE_CORNERS.iter().enumerate() {
        sf.n[a] = 0.25 * (1.0 + xa * xi) * (1.0 + ya * eta);
        sf.dn_dxi[a] = 0.25 * xa * (1.0 + ya * eta);
        sf.dn_deta[a] = 0.25 * ya * (1.0 + xa * xi);
    }
    sf
}

/// Everything the element kernels need at one integration point.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraturePointData {
    pub x: f64,
    pub y: f64,
    /// Gauss weight times the Jacobian determinant.
    pub weight: f64,
    pub n: [f64; 4],
    pub dn_dx: [f64; 4],
    pub dn_dy: [f64; 4],
    /// Membrane strain operator `∂ N_n` (3×8).
    pub b_n: SMatrix<f64, 3, 8>,
    /// Curvature operator `∂ S N_b` (3×8).
    pub b_b: SMatrix<f64, 3, 8>,
    /// Deflection gradient `∇ N_w` (2×12).
    pub b_w: SMatrix<f64, 2, 12>,
    /// Rotation part of the shear strain, `S N_b` on the `r_s` layout (2×12).
    pub n_s: SMatrix<f64, 2, 12>,
    pub b_kx: RowSVector<f64, 4>,
    pub b_ky: RowSVector<f64, 4>,
}

impl QuadraturePointData {
    fn new(coords: &[[f64; 2]; 4], xi: f64, eta: f64, gauss_weight: f64) -> Result<Self> {
        let sf = shape_functions(xi, eta);
        let mut j = [[0.0; 2]; 2];
        let (mut x, mut y) = (0.0, 0.0);
        for a in 0..4 {
            j[0][0] += sf.dn_dxi[a] * coords[a][0];
            j[0][1] += sf.dn_dxi[a] * coords[a][1];
            j[1][0] += sf.dn_deta[a] * coords[a][0];
            j[1][1] += sf.dn_deta[a] * coords[a][1];
            x += sf.n[a] * coords[a][0];
            y += sf.n[a] * coords[a][1];
        }
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let scale = (j[0][0].abs() + j[1][1].abs() + j[0][1].abs() + j[1][0].abs()).powi(2);
        if !(det > 1e-14 * scale) {
            return Err(Error::SingularJacobian { det });
        }
        let mut dn_dx = [0.0; 4];
        let mut dn_dy = [0.0; 4];
        for a in 0..4 {
            dn_dx[a] = (j[1][1] * sf.dn_dxi[a] - j[0][1] * sf.dn_deta[a]) / det;
            dn_dy[a] = (-j[1][0] * sf.dn_dxi[a] + j[0][0] * sf.dn_deta[a]) / det;
        }

        let mut b_n = SMatrix::<f64, 3, 8>::zeros();
        let mut b_b = SMatrix::<f64, 3, 8>::zeros();
        let mut b_w = SMatrix::<f64, 2, 12>::zeros();
        let mut n_s = SMatrix::<f64, 2, 12>::zeros();
        for a in 0..4 {
            let (dx, dy, n) = (dn_dx[a], dn_dy[a], sf.n[a]);
            // eps_m0 = [u,x ; v,y ; u,y + v,x]
            b_n[(0, 2 * a)] = dx;
            b_n[(1, 2 * a + 1)] = dy;
            b_n[(2, 2 * a)] = dy;
            b_n[(2, 2 * a + 1)] = dx;
            // kappa = ∂(S phi) with S phi = [phi_y, -phi_x]
            b_b[(0, 2 * a + 1)] = dx;
            b_b[(1, 2 * a)] = -dy;
            b_b[(2, 2 * a)] = -dx;
            b_b[(2, 2 * a + 1)] = dy;
            // gamma = ∇w + S phi
            b_w[(0, 3 * a)] = dx;
            b_w[(1, 3 * a)] = dy;
            n_s[(0, 3 * a + 2)] = n;
            n_s[(1, 3 * a + 1)] = -n;
        }
        Ok(QuadraturePointData {
            x,
            y,
            weight: gauss_weight * det,
            n: sf.n,
            dn_dx,
            dn_dy,
            b_n,
            b_b,
            b_w,
            n_s,
            b_kx: RowSVector::from_row_slice(&dn_dx),
            b_ky: RowSVector::from_row_slice(&dn_dy),
        })
    }

    /// Shear strain operator `B_w + N_s`.
    pub fn b_s(&self) -> SMatrix<f64, 2, 12> {
        self.b_w + self.n_s
    }
}

/// Integration data of one element: 2×2 membrane/bending rule plus the
/// one-point shear rule.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementQuadrature {
    pub membrane: [QuadraturePointData; 4],
    pub shear: QuadraturePointData,
}

/// 2×2 Gauss abscissa.
pub const GAUSS_2: f64 = 0.577_350_269_189_625_8;

/// Gauss points in the same counter-clockwise order as the corners.
pub const GAUSS_POINTS: [[f64; 2]; 4] = [
    [-GAUSS_2, -GAUSS_2],
    [GAUSS_2, -GAUSS_2],
    [GAUSS_2, GAUSS_2],
    [-GAUSS_2, GAUSS_2],
];

pub fn quadrature_data(coords: &[[f64; 2]; 4]) -> Result<ElementQuadrature> {
    let p = |g: usize| QuadraturePointData::new(coords, GAUSS_POINTS[g][0], GAUSS_POINTS[g][1], 1.0);
    Ok(ElementQuadrature {
        membrane: [p(0)?, p(1)?, p(2)?, p(3)?],
        shear: QuadraturePointData::new(coords, 0.0, 0.0, 4.0)?,
    })
}

/// `[½ (w,x)², ½ (w,y)², w,x w,y]` from the four nodal deflections.
pub fn nonlinear_membrane_strain(qp: &QuadraturePointData, r_k: &SVector<f64, 4>) -> Vector3<f64> {
    let a = (qp.b_kx * r_k)[0];
    let b = (qp.b_ky * r_k)[0];
    Vector3::new(0.5 * a * a, 0.5 * b * b, a * b)
}

/// Derivative of the von Kármán strain with respect to `r_K` (3×4).
pub fn nonlinear_strain_gradient(qp: &QuadraturePointData, r_k: &SVector<f64, 4>) -> SMatrix<f64, 3, 4> {
    let a = (qp.b_kx * r_k)[0];
    let b = (qp.b_ky * r_k)[0];
    let mut g = SMatrix::<f64, 3, 4>::zeros();
    g.set_row(0, &(qp.b_kx * a));
    g.set_row(1, &(qp.b_ky * b));
    g.set_row(2, &(qp.b_ky * a + qp.b_kx * b));
    g
}

/// Generalized strains at one integration point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralizedStrains {
    pub membrane: Vector3<f64>,
    pub nonlinear: Vector3<f64>,
    pub curvature: Vector3<f64>,
    pub shear: Vector2<f64>,
}

pub fn generalized_strains(qp: &QuadraturePointData, r_e: &ElementDofVector, kinematics: Kinematics) -> GeneralizedStrains {
    GeneralizedStrains {
        membrane: qp.b_n * r_e.membrane(),
        nonlinear: match kinematics {
            Kinematics::Linear => Vector3::zeros(),
            Kinematics::VonKarman => nonlinear_membrane_strain(qp, &r_e.deflections()),
        },
        curvature: qp.b_b * r_e.rotations(),
        shear: qp.b_s() * r_e.shear(),
    }
}

/// Specific normal forces, moments and shear forces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecificForces {
    pub normal: Vector3<f64>,
    pub moment: Vector3<f64>,
    pub shear: Vector2<f64>,
}

pub fn specific_forces(stiffness: &LayerStiffness, strains: &GeneralizedStrains) -> SpecificForces {
    SpecificForces {
        normal: stiffness.normal * (strains.membrane + strains.nonlinear),
        moment: stiffness.bending * strains.curvature,
        shear: stiffness.shear * strains.shear,
    }
}

/// Element internal energy.
pub fn element_energy(
    stiffness: &LayerStiffness,
    quad: &ElementQuadrature,
    r_e: &ElementDofVector,
    kinematics: Kinematics,
) -> f64 {
    let mut energy = 0.0;
    for qp in &quad.membrane {
        let s = generalized_strains(qp, r_e, kinematics);
        let eps = s.membrane + s.nonlinear;
        energy += 0.5 * qp.weight * (eps.dot(&(stiffness.normal * eps)) + s.curvature.dot(&(stiffness.bending * s.curvature)));
    }
    let gamma = quad.shear.b_s() * r_e.shear();
    energy + 0.5 * quad.shear.weight * gamma.dot(&(stiffness.shear * gamma))
}

fn scatter_vec<const N: usize>(out: &mut ElementVector, rows: &[usize; N], v: &SVector<f64, N>) {
    for (i, &r) in rows.iter().enumerate() {
        out[r] += v[i];
    }
}

fn scatter_mat<const R: usize, const C: usize>(
    out: &mut ElementMatrix,
    rows: &[usize; R],
    cols: &[usize; C],
    m: &SMatrix<f64, R, C>,
) {
    for (i, &r) in rows.iter().enumerate() {
        for (j, &c) in cols.iter().enumerate() {
            out[(r, c)] += m[(i, j)];
        }
    }
}

/// Gradient of [`element_energy`] with respect to `r_e`.
pub fn element_internal_forces(
    stiffness: &LayerStiffness,
    quad: &ElementQuadrature,
    r_e: &ElementDofVector,
    kinematics: Kinematics,
) -> ElementVector {
    let mut f = ElementVector::zeros();
    let (r_n, r_b, r_k) = (r_e.membrane(), r_e.rotations(), r_e.deflections());
    for qp in &quad.membrane {
        let mut eps = qp.b_n * r_n;
        if kinematics == Kinematics::VonKarman {
            eps += nonlinear_membrane_strain(qp, &r_k);
        }
        let n = stiffness.normal * eps;
        let m = stiffness.bending * (qp.b_b * r_b);
        scatter_vec(&mut f, &MEMBRANE_DOFS, &(qp.b_n.transpose() * n * qp.weight));
        scatter_vec(&mut f, &ROTATION_DOFS, &(qp.b_b.transpose() * m * qp.weight));
        if kinematics == Kinematics::VonKarman {
            let g = nonlinear_strain_gradient(qp, &r_k);
            scatter_vec(&mut f, &DEFLECTION_DOFS, &(g.transpose() * n * qp.weight));
        }
    }
    let b_s = quad.shear.b_s();
    let q = stiffness.shear * (b_s * r_e.shear());
    scatter_vec(&mut f, &SHEAR_DOFS, &(b_s.transpose() * q * quad.shear.weight));
    f
}

/// Initial-stress part of the deflection block: `Σ α n_c ∂G_c/∂r_K`.
pub fn element_initial_stress_matrix(
    stiffness: &LayerStiffness,
    quad: &ElementQuadrature,
    r_e: &ElementDofVector,
) -> ElementMatrix {
    let mut k = ElementMatrix::zeros();
    let (r_n, r_k) = (r_e.membrane(), r_e.deflections());
    for qp in &quad.membrane {
        let n = stiffness.normal * (qp.b_n * r_n + nonlinear_membrane_strain(qp, &r_k));
        let kx = qp.b_kx.transpose();
        let ky = qp.b_ky.transpose();
        let block = (kx * qp.b_kx) * n[0] + (ky * qp.b_ky) * n[1] + (kx * qp.b_ky + ky * qp.b_kx) * n[2];
        scatter_mat(&mut k, &DEFLECTION_DOFS, &DEFLECTION_DOFS, &(block * qp.weight));
    }
    k
}

/// Consistent tangent: Hessian of [`element_energy`].
pub fn element_tangent(
    stiffness: &LayerStiffness,
    quad: &ElementQuadrature,
    r_e: &ElementDofVector,
    kinematics: Kinematics,
) -> ElementMatrix {
    let mut k = ElementMatrix::zeros();
    let r_k = r_e.deflections();
    for qp in &quad.membrane {
        let dn_bn: SMatrix<f64, 3, 8> = stiffness.normal * qp.b_n;
        scatter_mat(&mut k, &MEMBRANE_DOFS, &MEMBRANE_DOFS, &(qp.b_n.transpose() * dn_bn * qp.weight));
        let db_bb: SMatrix<f64, 3, 8> = stiffness.bending * qp.b_b;
        scatter_mat(&mut k, &ROTATION_DOFS, &ROTATION_DOFS, &(qp.b_b.transpose() * db_bb * qp.weight));
        if kinematics == Kinematics::VonKarman {
            let g = nonlinear_strain_gradient(qp, &r_k);
            let dn_g: SMatrix<f64, 3, 4> = stiffness.normal * g;
            let k_nk = qp.b_n.transpose() * dn_g * qp.weight;
            scatter_mat(&mut k, &MEMBRANE_DOFS, &DEFLECTION_DOFS, &k_nk);
            scatter_mat(&mut k, &DEFLECTION_DOFS, &MEMBRANE_DOFS, &k_nk.transpose());
            scatter_mat(&mut k, &DEFLECTION_DOFS, &DEFLECTION_DOFS, &(g.transpose() * dn_g * qp.weight));
        }
    }
    if kinematics == Kinematics::VonKarman {
        k += element_initial_stress_matrix(stiffness, quad, r_e);
    }
    let b_s = quad.shear.b_s();
    let ds_bs: SMatrix<f64, 2, 12> = stiffness.shear * b_s;
    scatter_mat(&mut k, &SHEAR_DOFS, &SHEAR_DOFS, &(b_s.transpose() * ds_bs * quad.shear.weight));
    k
}

/// Consistent nodal forces of distributed in-plane, transverse and moment loads.
pub fn element_external_load(load: &LayerLoad, quad: &ElementQuadrature) -> ElementVector {
    let mut f = ElementVector::zeros();
    let intensity = [load.in_plane[0], load.in_plane[1], load.pressure, load.moment[0], load.moment[1]];
    for qp in &quad.membrane {
        for a in 0..4 {
            for (c, value) in intensity.iter().enumerate() {
                f[5 * a + c] += qp.weight * qp.n[a] * value;
            }
        }
    }
    f
}

/// Plane-stress membrane stress at fibre `z` of a layer.
pub fn stress_at(membrane: &Matrix3<f64>, strains: &GeneralizedStrains, z: f64) -> Vector3<f64> {
    membrane * (strains.membrane + strains.nonlinear + strains.curvature * z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::layer_stiffnesses;
    use crate::model::LayerSpec;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn rect(dx: f64, dy: f64) -> [[f64; 2]; 4] {
        [[0.0, 0.0], [dx, 0.0], [dx, dy], [0.0, dy]]
    }

    fn skewed() -> [[f64; 2]; 4] {
        [[0.0, 0.0], [30.0, 2.0], [33.0, 27.0], [-1.0, 25.0]]
    }

    fn glass() -> LayerStiffness {
        layer_stiffnesses(&LayerSpec::glass(4.76, 68_900.0, 0.22).unwrap()).unwrap()
    }

    #[test]
    fn centroid_and_corner_values() {
        let sf = shape_functions(0.0, 0.0);
        assert_eq!(sf.n, [0.25; 4]);
        let sf = shape_functions(-1.0, -1.0);
        assert_eq!(sf.n, [1.0, 0.0, 0.0, 0.0]);
        for (b, [x, y]) in REFERENCE_CORNERS.iter().enumerate() {
            let sf = shape_functions(*x, *y);
            for a in 0..4 {
                assert_eq!(sf.n[a], if a == b { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn partition_of_unity_at_gauss_point() {
        let sf = shape_functions(GAUSS_2, GAUSS_2);
        assert!((sf.n.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(sf.dn_dxi.iter().sum::<f64>().abs() < 1e-15);
        assert!(sf.dn_deta.iter().sum::<f64>().abs() < 1e-15);
    }

    #[test]
    fn weights_sum_to_area() {
        let q = quadrature_data(&rect(1.0, 1.0)).unwrap();
        let total: f64 = q.membrane.iter().map(|p| p.weight).sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert!((q.shear.weight - 1.0).abs() < 1e-15);

        let q = quadrature_data(&skewed()).unwrap();
        let area = 0.5 * (30.0 * 27.0 - 33.0 * 2.0 + 33.0 * 25.0 - (-1.0) * 27.0);
        let total: f64 = q.membrane.iter().map(|p| p.weight).sum();
        assert!((total - area).abs() < 1e-10 * area);
        assert!((q.shear.weight - area).abs() < 1e-10 * area);
    }

    #[test]
    fn rectangle_derivatives_match_analytic() {
        // N1 = (1 - x/dx)(1 - y/dy), etc.
        let (dx, dy) = (3.0, 2.0);
        let q = quadrature_data(&rect(dx, dy)).unwrap();
        for p in &q.membrane {
            let (x, y) = (p.x, p.y);
            let expect_x = [-(1.0 - y / dy) / dx, (1.0 - y / dy) / dx, y / dy / dx, -y / dy / dx];
            let expect_y = [-(1.0 - x / dx) / dy, -x / dx / dy, x / dx / dy, (1.0 - x / dx) / dy];
            for a in 0..4 {
                assert!((p.b_kx[a] - expect_x[a]).abs() < 1e-14);
                assert!((p.b_ky[a] - expect_y[a]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn degenerate_element_is_rejected() {
        let collapsed = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]];
        assert!(matches!(quadrature_data(&collapsed), Err(Error::SingularJacobian { .. })));
        let inverted = [[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]];
        assert!(quadrature_data(&inverted).is_err());
    }

    #[test]
    fn rigid_translation_has_no_membrane_strain() {
        let q = quadrature_data(&skewed()).unwrap();
        let r_n = SVector::<f64, 8>::from_column_slice(&[2.5, 0.0, 2.5, 0.0, 2.5, 0.0, 2.5, 0.0]);
        for p in &q.membrane {
            assert!((p.b_n * r_n).norm() < 1e-14);
        }
    }

    #[test]
    fn nonlinear_strain_cases() {
        let q = quadrature_data(&rect(2.0, 1.0)).unwrap();
        let p = &q.membrane[0];
        assert_eq!(nonlinear_membrane_strain(p, &SVector::zeros()), Vector3::zeros());
        // w = a x
        let a = 0.3;
        let r_k = SVector::<f64, 4>::from_column_slice(&[0.0, 2.0 * a, 2.0 * a, 0.0]);
        let e = nonlinear_membrane_strain(p, &r_k);
        assert!((e - Vector3::new(a * a / 2.0, 0.0, 0.0)).norm() < 1e-15);

        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let r_k = SVector::<f64, 4>::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            for p in &q.membrane {
                let e = nonlinear_membrane_strain(p, &r_k);
                assert!((e[2] * e[2] - 4.0 * e[0] * e[1]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_state_has_zero_forces() {
        let q = quadrature_data(&skewed()).unwrap();
        let f = element_internal_forces(&glass(), &q, &ElementDofVector::zeros(), Kinematics::VonKarman);
        assert_eq!(f, ElementVector::zeros());
    }

    #[test]
    fn flat_stretch_decouples() {
        let q = quadrature_data(&rect(30.0, 30.0)).unwrap();
        let mut r = ElementDofVector::zeros();
        // u = 1e-3 x
        for (a, [x, _]) in rect(30.0, 30.0).iter().enumerate() {
            r.0[5 * a] = 1e-3 * x;
        }
        let f = element_internal_forces(&glass(), &q, &r, Kinematics::VonKarman);
        for i in ROTATION_DOFS.iter().chain(DEFLECTION_DOFS.iter()) {
            assert_eq!(f[*i], 0.0);
        }
        assert!(f.norm() > 0.0);
    }

    #[test]
    fn zero_state_coupling_block_vanishes() {
        let q = quadrature_data(&skewed()).unwrap();
        let k = element_tangent(&glass(), &q, &ElementDofVector::zeros(), Kinematics::VonKarman);
        for &i in &MEMBRANE_DOFS {
            for &j in &DEFLECTION_DOFS {
                assert_eq!(k[(i, j)], 0.0);
                assert_eq!(k[(j, i)], 0.0);
            }
        }
        let lin = element_tangent(&glass(), &q, &ElementDofVector::zeros(), Kinematics::Linear);
        assert_eq!(k, lin);
    }

    #[test]
    fn tangent_is_symmetric() {
        let q = quadrature_data(&skewed()).unwrap();
        let mut rng = StdRng::seed_from_u64(11);
        let r = ElementDofVector(ElementVector::from_fn(|_, _| rng.gen_range(-0.5..0.5)));
        let k = element_tangent(&glass(), &q, &r, Kinematics::VonKarman);
        assert!((k - k.transpose()).abs().max() <= 1e-12 * k.abs().max());
    }

    #[test]
    fn linear_zero_energy_modes() {
        // 3 membrane rigid modes, 3 bending/shear rigid modes and the two
        // spurious modes of one-point shear integration
        let q = quadrature_data(&rect(30.0, 30.0)).unwrap();
        let k = element_tangent(&glass(), &q, &ElementDofVector::zeros(), Kinematics::Linear);
        let eig = k.symmetric_eigenvalues();
        let tol = 1e-10 * eig.abs().max();
        assert!(eig.iter().all(|&v| v > -tol));
        let zero = eig.iter().filter(|v| v.abs() <= tol).count();
        assert_eq!(zero, 8);
    }

    #[test]
    fn shear_uses_one_point() {
        let q = quadrature_data(&rect(30.0, 30.0)).unwrap();
        let mut k_s = SMatrix::<f64, 12, 12>::zeros();
        let b = q.shear.b_s();
        k_s += b.transpose() * glass().shear * b * q.shear.weight;
        assert_eq!(k_s.rank(1e-9 * k_s.abs().max()), 2);
    }

    #[test]
    fn energy_invariant_under_rigid_shifts() {
        let q = quadrature_data(&skewed()).unwrap();
        let mut rng = StdRng::seed_from_u64(3);
        let r = ElementDofVector(ElementVector::from_fn(|_, _| rng.gen_range(-0.2..0.2)));
        let mut shifted = r;
        for a in 0..4 {
            shifted.0[5 * a] += 1.7;
            shifted.0[5 * a + 1] -= 0.4;
        }
        let e0 = element_energy(&glass(), &q, &r, Kinematics::VonKarman);
        let e1 = element_energy(&glass(), &q, &shifted, Kinematics::VonKarman);
        assert!((e0 - e1).abs() <= 1e-12 * e0.abs());

        // constant w shift leaves the von Karman strain untouched; the only
        // other w-dependence is the shear gradient, which it also leaves alone
        let mut lifted = r;
        for a in 0..4 {
            lifted.0[5 * a + 2] += 3.0;
        }
        let e2 = element_energy(&glass(), &q, &lifted, Kinematics::VonKarman);
        assert!((e0 - e2).abs() <= 1e-12 * e0.abs());
    }

    #[test]
    fn uniform_pressure_load() {
        // 6.9 kPa on a 30 mm x 30 mm element
        let q = quadrature_data(&rect(30.0, 30.0)).unwrap();
        let f = element_external_load(&LayerLoad::pressure(6.9e-3), &q);
        for a in 0..4 {
            assert!((f[5 * a + 2] - 1.5525).abs() < 1e-12);
        }
        let total: f64 = f.iter().sum();
        assert!((total - 4.0 * 1.5525).abs() < 1e-12);
        assert_eq!(element_external_load(&LayerLoad::default(), &q), ElementVector::zeros());
    }

    #[test]
    fn moment_load_only_touches_rotations() {
        let q = quadrature_data(&skewed()).unwrap();
        let load = LayerLoad { moment: [0.3, -0.2], ..Default::default() };
        let f = element_external_load(&load, &q);
        for i in 0..20 {
            if ROTATION_DOFS.contains(&i) {
                assert!(f[i] != 0.0);
            } else {
                assert_eq!(f[i], 0.0);
            }
        }
    }

    #[test]
    fn dof_views_are_consistent() {
        let r = ElementDofVector(ElementVector::from_fn(|i, _| i as f64));
        assert_eq!(r.membrane().as_slice(), &[0.0, 1.0, 5.0, 6.0, 10.0, 11.0, 15.0, 16.0]);
        assert_eq!(r.rotations().as_slice(), &[3.0, 4.0, 8.0, 9.0, 13.0, 14.0, 18.0, 19.0]);
        assert_eq!(r.deflections().as_slice(), &[2.0, 7.0, 12.0, 17.0]);
        assert_eq!(r.shear()[3], 7.0);
    }
}
