//! Independent reference models and derivative consistency checks.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::element::{element_energy, element_internal_forces, element_tangent, ElementDofVector, ElementQuadrature, Kinematics};
use crate::error::{Error, Result};
use crate::material::LayerStiffness;
use crate::model::{LaminateSpec, LayerKind, LayerLoad, LoadCase};
use crate::postprocess::{center_node, nodal_deflection};
use crate::solver::{newton_solve, NewtonSettings, PlateProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitKind {
    /// One plate as thick as the whole laminate, with the glass constants.
    TrueMonolithic,
    /// Glass plies acting independently, sharing the load.
    Layered,
}

/// Single-layer stand-in for a laminate.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitModel {
    pub kind: LimitKind,
    pub laminate: LaminateSpec,
    /// Fraction of the total load carried by the modelled plate.
    pub load_fraction: f64,
}

pub fn limit_model(source: &LaminateSpec, kind: LimitKind) -> Result<LimitModel> {
    let plies: Vec<_> = source.layers.iter().filter(|l| l.kind == LayerKind::Ply).collect();
    let first = *plies
        .first()
        .ok_or_else(|| Error::InvalidArgument("laminate has no glass ply".into()))?;
    match kind {
        LimitKind::TrueMonolithic => Ok(LimitModel {
            kind,
            laminate: LaminateSpec::single(first.with_thickness(source.total_thickness())?, source.lx, source.ly)?,
            load_fraction: 1.0,
        }),
        LimitKind::Layered => {
            // plies share the load in proportion to their bending stiffness
            let stiffness = |l: &crate::model::LayerSpec| l.youngs * l.thickness.powi(3) / (1.0 - l.poisson * l.poisson);
            let total: f64 = plies.iter().map(|l| stiffness(l)).sum();
            Ok(LimitModel {
                kind,
                laminate: LaminateSpec::single(*first, source.lx, source.ly)?,
                load_fraction: stiffness(first) / total,
            })
        }
    }
}

/// Kirchhoff plate bending stiffness `E t³ / (12 (1 − ν²))`.
pub fn flexural_rigidity(t: f64, e: f64, nu: f64) -> f64 {
    e * t.powi(3) / (12.0 * (1.0 - nu * nu))
}

/// Navier series deflection of a simply supported rectangle under uniform
/// pressure, using `n_terms` odd harmonics in each direction.
pub fn navier_deflection(x: f64, y: f64, lx: f64, ly: f64, t: f64, e: f64, nu: f64, fz: f64, n_terms: usize) -> f64 {
    let d = flexural_rigidity(t, e, nu);
    let mut w = 0.0;
    for i in 0..n_terms {
        let m = (2 * i + 1) as f64;
        let sx = (m * PI * x / lx).sin();
        for j in 0..n_terms {
            let n = (2 * j + 1) as f64;
            let k = (m / lx).powi(2) + (n / ly).powi(2);
            w += sx * (n * PI * y / ly).sin() / (m * n * k * k);
        }
    }
    16.0 * fz / (PI.powi(6) * d) * w
}

/// Centre deflection of [`navier_deflection`]; the terms alternate in sign.
pub fn navier_center_deflection(lx: f64, ly: f64, t: f64, e: f64, nu: f64, fz: f64, n_terms: usize) -> f64 {
    let d = flexural_rigidity(t, e, nu);
    let mut w = 0.0;
    for i in 0..n_terms {
        let m = (2 * i + 1) as f64;
        for j in 0..n_terms {
            let n = (2 * j + 1) as f64;
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            let k = (m / lx).powi(2) + (n / ly).powi(2);
            w += sign / (m * n * k * k);
        }
    }
    16.0 * fz / (PI.powi(6) * d) * w
}

fn total_pressure(load: &LoadCase) -> f64 {
    load.layers.iter().map(|l| l.pressure).sum()
}

/// Solve the single-plate limit model of `template` with its mesh, supports
/// and kinematics, returning the centre deflection.
pub fn limit_deflection(template: &PlateProblem, kind: LimitKind, settings: &NewtonSettings) -> Result<f64> {
    let model = limit_model(&template.laminate, kind)?;
    let load = LoadCase { layers: vec![LayerLoad::pressure(total_pressure(&template.load) * model.load_fraction)] };
    let problem = PlateProblem::new(model.laminate, template.mesh.clone(), template.bcs.clone(), load, template.kinematics)?;
    let state = newton_solve(&problem, settings)?;
    Ok(nodal_deflection(&problem, &state, 0)[center_node(&problem)])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitReport {
    pub laminate: f64,
    pub monolithic: f64,
    pub layered: f64,
}

impl LimitReport {
    /// `w_mono ≤ w_lam ≤ w_layered` (by magnitude).
    pub fn bounds_hold(&self) -> bool {
        self.monolithic.abs() <= self.laminate.abs() && self.laminate.abs() <= self.layered.abs()
    }
}

pub fn run_limit_check(template: &PlateProblem, settings: &NewtonSettings) -> Result<LimitReport> {
    let state = newton_solve(template, settings)?;
    let laminate = nodal_deflection(template, &state, 0)[center_node(template)];
    Ok(LimitReport {
        laminate,
        monolithic: limit_deflection(template, LimitKind::TrueMonolithic, settings)?,
        layered: limit_deflection(template, LimitKind::Layered, settings)?,
    })
}

/// Largest discrepancies between analytic derivatives and central differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdReport {
    /// Internal forces vs the energy.
    pub gradient: f64,
    /// Tangent vs the internal forces.
    pub hessian: f64,
}

impl FdReport {
    pub fn max(&self) -> f64 {
        self.gradient.max(self.hessian)
    }
}

fn inf_norm(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Central-difference check of `gradient` against `energy` and of `hessian`
/// against `gradient` at `x`.
///
/// Gradient errors are scaled by the gradient's largest entry; tangent errors
/// column by column by the column's largest entry.
pub fn fd_consistency(
    x: &[f64],
    step: f64,
    energy: impl Fn(&[f64]) -> f64,
    gradient: impl Fn(&[f64]) -> Vec<f64>,
    hessian: impl Fn(&[f64]) -> DMatrix<f64>,
) -> FdReport {
    let n = x.len();
    let g = gradient(x);
    let k = hessian(x);
    let g_scale = inf_norm(g.iter().copied()).max(f64::MIN_POSITIVE);
    let mut grad_err = 0.0f64;
    let mut hess_err = 0.0f64;
    let mut xp = x.to_vec();
    for j in 0..n {
        xp[j] = x[j] + step;
        let (ep, gp) = (energy(&xp), gradient(&xp));
        xp[j] = x[j] - step;
        let (em, gm) = (energy(&xp), gradient(&xp));
        xp[j] = x[j];
        grad_err = grad_err.max(((ep - em) / (2.0 * step) - g[j]).abs() / g_scale);
        let col_scale = inf_norm(k.column(j).iter().copied()).max(f64::MIN_POSITIVE);
        for i in 0..n {
            let fd = (gp[i] - gm[i]) / (2.0 * step);
            hess_err = hess_err.max((fd - k[(i, j)]).abs() / col_scale);
        }
    }
    FdReport { gradient: grad_err, hessian: hess_err }
}

/// [`fd_consistency`] for one layer element.
pub fn fd_check_element(
    stiffness: &LayerStiffness,
    quad: &ElementQuadrature,
    r_e: &ElementDofVector,
    kinematics: Kinematics,
    step: f64,
) -> FdReport {
    let ev = |x: &[f64]| ElementDofVector::from_slice(x);
    fd_consistency(
        r_e.0.as_slice(),
        step,
        |x| element_energy(stiffness, quad, &ev(x), kinematics),
        |x| element_internal_forces(stiffness, quad, &ev(x), kinematics).as_slice().to_vec(),
        |x| {
            let k = element_tangent(stiffness, quad, &ev(x), kinematics);
            DMatrix::from_column_slice(20, 20, k.as_slice())
        },
    )
}

/// [`fd_consistency`] for the assembled problem.
pub fn fd_check_global(problem: &PlateProblem, r: &[f64], step: f64) -> Result<FdReport> {
    if r.len() != problem.n_dofs() {
        return Err(Error::DimensionMismatch { expected: problem.n_dofs(), got: r.len() });
    }
    Ok(fd_consistency(
        r,
        step,
        |x| problem.internal_energy(x).expect("dimension checked"),
        |x| problem.internal_forces(x).expect("dimension checked"),
        |x| problem.assemble_global(x).expect("dimension checked").0.to_dense(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn navier_thickness_scaling() {
        let a = navier_center_deflection(1000.0, 1500.0, 5.0, 70_000.0, 0.22, 1e-3, 25);
        let b = navier_center_deflection(1000.0, 1500.0, 10.0, 70_000.0, 0.22, 1e-3, 25);
        assert_relative_eq!(a / b, 8.0, max_relative = 1e-12);
        assert_eq!(navier_center_deflection(1000.0, 1000.0, 5.0, 70_000.0, 0.22, 0.0, 25), 0.0);
    }

    #[test]
    fn navier_square_coefficient() {
        // textbook coefficient 0.00406 q L⁴ / D for the square plate centre
        let (l, t, e, nu, q) = (1000.0, 10.0, 70_000.0, 0.3, 1e-3);
        let w = navier_center_deflection(l, l, t, e, nu, q, 25);
        let coeff = w * flexural_rigidity(t, e, nu) / (q * l.powi(4));
        assert!((coeff / 0.00406 - 1.0).abs() < 1e-3, "coefficient {coeff}");
        let converged = navier_center_deflection(l, l, t, e, nu, q, 400);
        assert!((w / converged - 1.0).abs() < 1e-6);
    }

    #[test]
    fn navier_center_matches_general_series() {
        let a = navier_center_deflection(3000.0, 2000.0, 8.0, 70_000.0, 0.22, 1e-3, 25);
        let b = navier_deflection(1500.0, 1000.0, 3000.0, 2000.0, 8.0, 70_000.0, 0.22, 1e-3, 25);
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn limit_models() {
        let g = crate::model::LayerSpec::glass(4.0, 70_000.0, 0.22).unwrap();
        let p = crate::model::LayerSpec::interlayer(0.76, 0.4, 0.49).unwrap();
        let lam = LaminateSpec::new(vec![g, p, g], 1000.0, 1000.0).unwrap();
        let mono = limit_model(&lam, LimitKind::TrueMonolithic).unwrap();
        assert_relative_eq!(mono.laminate.layers[0].thickness, 8.76);
        assert_eq!(mono.laminate.layers[0].youngs, 70_000.0);
        let layered = limit_model(&lam, LimitKind::Layered).unwrap();
        assert_eq!(layered.laminate.layers[0].thickness, 4.0);
        assert_relative_eq!(layered.load_fraction, 0.5);
    }
}
