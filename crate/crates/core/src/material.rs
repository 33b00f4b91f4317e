//! Per-layer constitutive matrices.

use nalgebra::{Matrix2, Matrix3};

use crate::error::Result;
use crate::model::{check_poisson, LayerSpec};

/// Membrane, normal-force, bending and shear stiffness of one layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerStiffness {
    /// Plane-stress matrix `D_m` (MPa).
    pub membrane: Matrix3<f64>,
    /// `h D_m` (MPa·mm).
    pub normal: Matrix3<f64>,
    /// `h³/12 D_m` (MPa·mm³).
    pub bending: Matrix3<f64>,
    /// `k G h I` (MPa·mm).
    pub shear: Matrix2<f64>,
}

/// Isotropic plane-stress matrix `E/(1-nu²) [[1, nu, 0], [nu, 1, 0], [0, 0, (1-nu)/2]]`.
pub fn membrane_stiffness(layer: &LayerSpec) -> Result<Matrix3<f64>> {
    check_poisson(layer.poisson)?;
    let nu = layer.poisson;
    let c = layer.youngs / (1.0 - nu * nu);
    Ok(Matrix3::new(
        c,
        c * nu,
        0.0,
        c * nu,
        c,
        0.0,
        0.0,
        0.0,
        c * (1.0 - nu) / 2.0,
    ))
}

pub fn layer_stiffnesses(layer: &LayerSpec) -> Result<LayerStiffness> {
    layer.validate()?;
    let membrane = membrane_stiffness(layer)?;
    let h = layer.thickness;
    Ok(LayerStiffness {
        membrane,
        normal: membrane * h,
        bending: membrane * (h * h * h / 12.0),
        shear: Matrix2::identity() * (layer.shear_correction * layer.shear * h),
    })
}
