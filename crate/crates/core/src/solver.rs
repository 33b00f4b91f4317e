//! Global assembly, the saddle-point solve and the Newton driver.

use std::fmt::Write as _;

use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::prelude::*;
use rayon::prelude::*;

use crate::constraints::{assemble_constraints, ConstraintMatrix};
use crate::element::{
    element_energy, element_external_load, element_internal_forces, element_tangent, quadrature_data,
    ElementDofVector, ElementMatrix, ElementQuadrature, ElementVector, Kinematics,
};
use crate::error::{Error, Result};
use crate::material::{layer_stiffnesses, LayerStiffness};
use crate::model::{build_dof_map, validate_schedule, BoundaryConditionSet, DofMap, LaminateSpec, LoadCase, Mesh};

/// One Newton iterate as written to the convergence log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    /// 1-based load-step attempt.
    pub step: usize,
    /// Number of linear solves taken within the step (0 = initial state).
    pub iteration: usize,
    pub load_factor: f64,
    pub eta: f64,
}

/// Plain-text convergence log, one `step k eta` line per record.
pub fn format_log(history: &[IterationRecord]) -> String {
    let mut out = String::from("step k eta\n");
    for h in history {
        let _ = writeln!(out, "{} {} {:.6e}", h.step, h.iteration, h.eta);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinearSolver {
    /// Sparse LU with partial pivoting on the full KKT matrix.
    #[default]
    SparseLu,
    /// Dense LU; only sensible for tiny models and cross-checks.
    Dense,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Increasing load factors ending at 1.
    pub load_schedule: Vec<f64>,
    /// Total number of step halvings allowed before giving up.
    pub max_bisections: usize,
    pub linear_solver: LinearSolver,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self { tolerance: 1e-8, max_iterations: 50, load_schedule: vec![1.0], max_bisections: 8, linear_solver: LinearSolver::SparseLu }
    }
}

impl NewtonSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be at least 1".into()));
        }
        validate_schedule(&self.load_schedule)
    }
}

/// Compressed sparse column matrix with a fixed pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix {
    pub n: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CscMatrix {
    fn pattern(n: usize, mut pairs: Vec<(usize, usize)>) -> Self {
        // sort by (col, row)
        pairs.sort_unstable_by_key(|&(r, c)| (c, r));
        pairs.dedup();
        let mut col_ptr = vec![0; n + 1];
        for &(_, c) in &pairs {
            col_ptr[c + 1] += 1;
        }
        for c in 0..n {
            col_ptr[c + 1] += col_ptr[c];
        }
        let row_idx = pairs.iter().map(|&(r, _)| r).collect::<Vec<_>>();
        let values = vec![0.0; row_idx.len()];
        Self { n, col_ptr, row_idx, values }
    }

    /// Position of `(row, col)` in `values`.
    pub fn position(&self, row: usize, col: usize) -> Option<usize> {
        let (a, b) = (self.col_ptr[col], self.col_ptr[col + 1]);
        self.row_idx[a..b].binary_search(&row).ok().map(|p| a + p)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.position(row, col).map_or(0.0, |p| self.values[p])
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for c in 0..self.n {
            let xc = x[c];
            for p in self.col_ptr[c]..self.col_ptr[c + 1] {
                y[self.row_idx[p]] += self.values[p] * xc;
            }
        }
        y
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for c in 0..self.n {
            for p in self.col_ptr[c]..self.col_ptr[c + 1] {
                m[(self.row_idx[p], c)] += self.values[p];
            }
        }
        m
    }

    /// `‖A‖∞`, the largest absolute row sum.
    pub fn row_sum_norm(&self) -> f64 {
        let mut sums = vec![0.0; self.n];
        for (p, &r) in self.row_idx.iter().enumerate() {
            sums[r] += self.values[p].abs();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for c in 0..self.n {
            for p in self.col_ptr[c]..self.col_ptr[c + 1] {
                let r = self.row_idx[p];
                worst = worst.max((self.values[p] - self.get(c, r)).abs());
            }
        }
        worst / scale
    }

    fn as_faer(&self) -> SparseColMatRef<'_, usize, f64> {
        let sym = SymbolicSparseColMatRef::new_checked(self.n, self.n, &self.col_ptr, None, &self.row_idx);
        SparseColMatRef::new(sym, &self.values)
    }
}

const FIXED: u32 = u32::MAX;

/// A fully discretised laminate: geometry, numbering, tying and element data.
#[derive(Debug)]
pub struct PlateProblem {
    pub laminate: LaminateSpec,
    pub mesh: Mesh,
    pub bcs: BoundaryConditionSet,
    pub load: LoadCase,
    pub dofmap: DofMap,
    pub constraints: ConstraintMatrix,
    pub kinematics: Kinematics,
    quadrature: Vec<ElementQuadrature>,
    stiffness: Vec<LayerStiffness>,
    f_ext: Vec<f64>,
    k_pattern: CscMatrix,
    /// Per (layer, element): 400 positions into `k_pattern.values`.
    k_positions: Vec<u32>,
    kkt: KktPattern,
}

#[derive(Debug)]
struct KktPattern {
    matrix: CscMatrix,
    k_map: Vec<usize>,
    /// Per constraint entry: positions of `C` and `Cᵀ` entries.
    c_map: Vec<(usize, usize)>,
    symbolic: std::sync::OnceLock<SymbolicLu<usize>>,
}

impl PlateProblem {
    pub fn new(
        laminate: LaminateSpec,
        mesh: Mesh,
        bcs: BoundaryConditionSet,
        load: LoadCase,
        kinematics: Kinematics,
    ) -> Result<Self> {
        let n_layers = laminate.n_layers();
        if load.layers.len() != n_layers {
            return Err(Error::DimensionMismatch { expected: n_layers, got: load.layers.len() });
        }
        load.validate()?;
        let stiffness = laminate.layers.iter().map(layer_stiffnesses).collect::<Result<Vec<_>>>()?;
        let dofmap = build_dof_map(&mesh, n_layers, &bcs)?;
        let constraints = assemble_constraints(&dofmap, &laminate)?;
        let quadrature = (0..mesh.n_elements())
            .map(|e| quadrature_data(&mesh.element_coords(e)))
            .collect::<Result<Vec<_>>>()?;

        let n = dofmap.n_dofs();
        let mut f_ext = vec![0.0; n];
        for (layer, layer_load) in load.layers.iter().enumerate() {
            for (e, quad) in quadrature.iter().enumerate() {
                let fe = element_external_load(layer_load, quad);
                for (i, d) in dofmap.element_dofs(layer, &mesh.elements[e]).iter().enumerate() {
                    if let Some(d) = d {
                        f_ext[*d] += fe[i];
                    }
                }
            }
        }

        let mut pairs = Vec::new();
        for layer in 0..n_layers {
            for el in &mesh.elements {
                let dofs = dofmap.element_dofs(layer, el);
                for &ri in dofs.iter().flatten() {
                    for &ci in dofs.iter().flatten() {
                        pairs.push((ri, ci));
                    }
                }
            }
        }
        let k_pattern = CscMatrix::pattern(n, pairs);
        let mut k_positions = Vec::with_capacity(n_layers * mesh.n_elements() * 400);
        for layer in 0..n_layers {
            for el in &mesh.elements {
                let dofs = dofmap.element_dofs(layer, el);
                for ri in dofs {
                    for ci in dofs {
                        k_positions.push(match (ri, ci) {
                            (Some(r), Some(c)) => k_pattern.position(r, c).expect("pattern") as u32,
                            _ => FIXED,
                        });
                    }
                }
            }
        }

        let m = constraints.n_rows();
        let mut pairs = Vec::with_capacity(k_pattern.nnz() + 2 * m * 4);
        for c in 0..n {
            for p in k_pattern.col_ptr[c]..k_pattern.col_ptr[c + 1] {
                pairs.push((k_pattern.row_idx[p], c));
            }
        }
        for (i, row) in constraints.rows.iter().enumerate() {
            for &(d, _) in &row.entries {
                pairs.push((n + i, d));
                pairs.push((d, n + i));
            }
        }
        // the zero block needs no entries; LU pivots around it
        let matrix = CscMatrix::pattern(n + m, pairs);
        let mut k_map = Vec::with_capacity(k_pattern.nnz());
        for c in 0..n {
            for p in k_pattern.col_ptr[c]..k_pattern.col_ptr[c + 1] {
                k_map.push(matrix.position(k_pattern.row_idx[p], c).expect("pattern"));
            }
        }
        let mut c_map = Vec::new();
        for (i, row) in constraints.rows.iter().enumerate() {
            for &(d, _) in &row.entries {
                c_map.push((matrix.position(n + i, d).expect("pattern"), matrix.position(d, n + i).expect("pattern")));
            }
        }

        Ok(Self {
            laminate,
            mesh,
            bcs,
            load,
            dofmap,
            constraints,
            kinematics,
            quadrature,
            stiffness,
            f_ext,
            k_pattern,
            k_positions,
            kkt: KktPattern { matrix, k_map, c_map, symbolic: std::sync::OnceLock::new() },
        })
    }

    pub fn n_dofs(&self) -> usize {
        self.dofmap.n_dofs()
    }

    pub fn n_constraints(&self) -> usize {
        self.constraints.n_rows()
    }

    pub fn quadrature(&self, element: usize) -> &ElementQuadrature {
        &self.quadrature[element]
    }

    pub fn stiffness(&self, layer: usize) -> &LayerStiffness {
        &self.stiffness[layer]
    }

    /// External force vector at full load.
    pub fn external_force(&self) -> &[f64] {
        &self.f_ext
    }

    pub fn element_vector(&self, layer: usize, element: usize, r: &[f64]) -> ElementDofVector {
        let dofs = self.dofmap.element_dofs(layer, &self.mesh.elements[element]);
        let mut v = ElementVector::zeros();
        for (i, d) in dofs.iter().enumerate() {
            if let Some(d) = d {
                v[i] = r[*d];
            }
        }
        ElementDofVector(v)
    }

    fn check_len(&self, r: &[f64]) -> Result<()> {
        if r.len() != self.n_dofs() {
            return Err(Error::DimensionMismatch { expected: self.n_dofs(), got: r.len() });
        }
        Ok(())
    }

    fn pairs(&self) -> impl IndexedParallelIterator<Item = (usize, usize)> + '_ {
        let ne = self.mesh.n_elements();
        (0..self.laminate.n_layers() * ne).into_par_iter().map(move |k| (k / ne, k % ne))
    }

    /// Total internal strain energy.
    pub fn internal_energy(&self, r: &[f64]) -> Result<f64> {
        self.check_len(r)?;
        let parts: Vec<f64> = self
            .pairs()
            .map(|(l, e)| element_energy(&self.stiffness[l], &self.quadrature[e], &self.element_vector(l, e, r), self.kinematics))
            .collect();
        Ok(parts.iter().sum())
    }

    /// Internal energy minus the work of the external load at `load_factor`.
    pub fn potential_energy(&self, r: &[f64], load_factor: f64) -> Result<f64> {
        let work: f64 = self.f_ext.iter().zip(r).map(|(f, x)| f * x).sum();
        Ok(self.internal_energy(r)? - load_factor * work)
    }

    pub fn internal_forces(&self, r: &[f64]) -> Result<Vec<f64>> {
        self.check_len(r)?;
        let parts: Vec<ElementVector> = self
            .pairs()
            .map(|(l, e)| element_internal_forces(&self.stiffness[l], &self.quadrature[e], &self.element_vector(l, e, r), self.kinematics))
            .collect();
        let mut f = vec![0.0; self.n_dofs()];
        let ne = self.mesh.n_elements();
        for (k, fe) in parts.iter().enumerate() {
            self.scatter_vector(&mut f, k / ne, k % ne, fe);
        }
        Ok(f)
    }

    fn scatter_vector(&self, f: &mut [f64], layer: usize, element: usize, fe: &ElementVector) {
        for (i, d) in self.dofmap.element_dofs(layer, &self.mesh.elements[element]).iter().enumerate() {
            if let Some(d) = d {
                f[*d] += fe[i];
            }
        }
    }

    /// Tangent stiffness and internal forces at `r`.
    ///
    /// Element kernels run in parallel; the scatter is sequential in element
    /// order so results do not depend on the thread count.
    pub fn assemble_global(&self, r: &[f64]) -> Result<(CscMatrix, Vec<f64>)> {
        self.check_len(r)?;
        let parts: Vec<(ElementMatrix, ElementVector)> = self
            .pairs()
            .map(|(l, e)| {
                let re = self.element_vector(l, e, r);
                let (s, q) = (&self.stiffness[l], &self.quadrature[e]);
                (element_tangent(s, q, &re, self.kinematics), element_internal_forces(s, q, &re, self.kinematics))
            })
            .collect();
        let mut k = self.k_pattern.clone();
        let mut f = vec![0.0; self.n_dofs()];
        let ne = self.mesh.n_elements();
        for (idx, (ke, fe)) in parts.iter().enumerate() {
            let pos = &self.k_positions[idx * 400..(idx + 1) * 400];
            for j in 0..20 {
                for i in 0..20 {
                    let p = pos[i * 20 + j];
                    if p != FIXED {
                        k.values[p as usize] += ke[(i, j)];
                    }
                }
            }
            self.scatter_vector(&mut f, idx / ne, idx % ne, fe);
        }
        Ok((k, f))
    }

    /// Solve `[[K, Cᵀ], [C, 0]] [x; λ] = [rhs_r; rhs_c]` on this problem's pattern.
    pub fn solve_kkt(&self, k: &CscMatrix, rhs_r: &[f64], rhs_c: &[f64], solver: LinearSolver) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.n_dofs();
        let m = self.n_constraints();
        if rhs_r.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: rhs_r.len() });
        }
        if rhs_c.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: rhs_c.len() });
        }
        let mut a = self.kkt.matrix.clone();
        a.values.iter_mut().for_each(|v| *v = 0.0);
        for (p, &q) in self.kkt.k_map.iter().enumerate() {
            a.values[q] = k.values[p];
        }
        let mut t = 0;
        for row in &self.constraints.rows {
            for &(_, c) in &row.entries {
                let (p, q) = self.kkt.c_map[t];
                a.values[p] = c;
                a.values[q] = c;
                t += 1;
            }
        }
        let b: Vec<f64> = rhs_r.iter().chain(rhs_c).copied().collect();

        // Soft interlayers next to glass and unit tying coefficients span many
        // orders of magnitude; factor the equilibrated matrix D A D instead.
        let d = equilibrate(&a);
        let mut scaled = a.clone();
        for c in 0..scaled.n {
            for p in scaled.col_ptr[c]..scaled.col_ptr[c + 1] {
                scaled.values[p] *= d[scaled.row_idx[p]] * d[c];
            }
        }
        let unscale = |y: Vec<f64>| y.iter().zip(&d).map(|(v, s)| v * s).collect::<Vec<_>>();

        let x = match solver {
            LinearSolver::SparseLu => {
                let symbolic = match self.kkt.symbolic.get() {
                    Some(s) => s.clone(),
                    None => {
                        let s = SymbolicLu::try_new(scaled.as_faer().symbolic())
                            .map_err(|e| Error::SolverFailure(format!("symbolic factorization: {e:?}")))?;
                        self.kkt.symbolic.get_or_init(|| s).clone()
                    }
                };
                let lu = Lu::try_new_with_symbolic(symbolic, scaled.as_faer())
                    .map_err(|e| Error::SolverFailure(format!("numeric factorization: {e:?}")))?;
                refine(&a, &b, |rhs| {
                    let mut col = Mat::<f64>::from_fn(rhs.len(), 1, |i, _| rhs[i] * d[i]);
                    lu.solve_in_place(col.as_mut());
                    unscale((0..rhs.len()).map(|i| col[(i, 0)]).collect())
                })?
            }
            LinearSolver::Dense => {
                let lu = scaled.to_dense().lu();
                refine(&a, &b, |rhs| {
                    let v = nalgebra::DVector::from_iterator(rhs.len(), rhs.iter().zip(&d).map(|(r, s)| r * s));
                    unscale(lu.solve(&v).map(|s| s.as_slice().to_vec()).unwrap_or_else(|| vec![f64::NAN; rhs.len()]))
                })?
            }
        };
        Ok((x[..n].to_vec(), x[n..].to_vec()))
    }
}

/// Symmetric Ruiz equilibration: `D` such that every row and column of
/// `D A D` has its largest entry close to 1.
fn equilibrate(a: &CscMatrix) -> Vec<f64> {
    let mut d = vec![1.0; a.n];
    for _ in 0..8 {
        let mut col_max = vec![0.0f64; a.n];
        for c in 0..a.n {
            for p in a.col_ptr[c]..a.col_ptr[c + 1] {
                let v = (a.values[p] * d[a.row_idx[p]] * d[c]).abs();
                col_max[c] = col_max[c].max(v);
            }
        }
        let mut done = true;
        for (di, m) in d.iter_mut().zip(&col_max) {
            if *m > 0.0 {
                *di /= m.sqrt();
                done &= (m - 1.0).abs() < 1e-3;
            }
        }
        if done {
            break;
        }
    }
    d
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// `b − A x` accumulated in double-double arithmetic (error-free product and
/// sum transformations), so the residual is accurate even where `A x` and
/// `b` cancel to many digits.
fn compensated_residual(a: &CscMatrix, b: &[f64], x: &[f64]) -> Vec<f64> {
    let mut hi = b.to_vec();
    let mut lo = vec![0.0; b.len()];
    for (j, &xj) in x.iter().enumerate() {
        for p in a.col_ptr[j]..a.col_ptr[j + 1] {
            let i = a.row_idx[p];
            let prod = -a.values[p] * xj;
            let prod_err = (-a.values[p]).mul_add(xj, -prod);
            let sum = hi[i] + prod;
            let bb = sum - hi[i];
            let sum_err = (hi[i] - (sum - bb)) + (prod - bb);
            hi[i] = sum;
            lo[i] += sum_err + prod_err;
        }
    }
    hi.iter().zip(&lo).map(|(h, l)| h + l).collect()
}

/// Solve, then refine with accurately computed residuals until the
/// correction stalls or reaches roundoff.
///
/// Acceptance is on the normwise backward error
/// `‖b − Ax‖∞ / (‖A‖∞ ‖x‖∞ + ‖b‖∞)` rather than `‖b − Ax‖ / ‖b‖`: thin
/// glass plies make `‖A‖ ‖x‖` exceed `‖b‖` by many orders of magnitude, so
/// the plain relative residual can sit above any fixed threshold even for an
/// exact factorization.
fn refine(a: &CscMatrix, b: &[f64], solve: impl Fn(&[f64]) -> Vec<f64>) -> Result<Vec<f64>> {
    let a_norm = a.row_sum_norm();
    let b_norm = inf_norm(b);
    let mut x = solve(b);
    let mut last_dx = f64::INFINITY;
    let backward = |x: &[f64], res: &[f64]| {
        let denom = a_norm * inf_norm(x) + b_norm;
        if denom == 0.0 {
            0.0
        } else {
            inf_norm(res) / denom
        }
    };
    let mut res = Vec::new();
    for _ in 0..8 {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SolverFailure("factorization produced non-finite values (singular KKT matrix)".into()));
        }
        res = compensated_residual(a, b, &x);
        if backward(&x, &res) == 0.0 {
            break;
        }
        let dx = solve(&res);
        let dx_norm = inf_norm(&dx);
        if !(dx_norm < 0.5 * last_dx) {
            break;
        }
        x.iter_mut().zip(&dx).for_each(|(xi, di)| *xi += di);
        last_dx = dx_norm;
        if dx_norm <= f64::EPSILON * inf_norm(&x) {
            res = compensated_residual(a, b, &x);
            break;
        }
    }
    let best = backward(&x, &res);
    if !(best <= 1e-10) {
        return Err(Error::SolverFailure(format!("KKT backward error {best:e}; matrix is singular or ill-conditioned")));
    }
    Ok(x)
}

/// Standalone saddle-point solve for small dense systems.
///
/// Returns `(x, λ)` with `K x + Cᵀ λ = rhs_r` and `C x = rhs_c`.
pub fn solve_saddle_point(
    k: &nalgebra::DMatrix<f64>,
    c: &nalgebra::DMatrix<f64>,
    rhs_r: &[f64],
    rhs_c: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (n, m) = (k.nrows(), c.nrows());
    if k.ncols() != n || c.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: c.ncols() });
    }
    if rhs_r.len() != n || rhs_c.len() != m {
        return Err(Error::DimensionMismatch { expected: n + m, got: rhs_r.len() + rhs_c.len() });
    }
    let mut a = nalgebra::DMatrix::zeros(n + m, n + m);
    a.view_mut((0, 0), (n, n)).copy_from(k);
    a.view_mut((n, 0), (m, n)).copy_from(c);
    a.view_mut((0, n), (n, m)).copy_from(&c.transpose());
    let b = nalgebra::DVector::from_iterator(n + m, rhs_r.iter().chain(rhs_c).copied());
    let x = a
        .clone()
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::SolverFailure("singular saddle-point matrix".into()))?;
    let res = (&a * &x - &b).norm() / b.norm().max(f64::MIN_POSITIVE);
    if !(res <= 1e-10) {
        return Err(Error::SolverFailure(format!("saddle-point residual {res:e}")));
    }
    Ok((x.as_slice()[..n].to_vec(), x.as_slice()[n..].to_vec()))
}

/// `‖f_int − f_ext + Cᵀλ‖₂ / max(‖f_ext‖₂, 1)`
pub fn residual_norm(f_int: &[f64], f_ext: &[f64], c: &ConstraintMatrix, lambda: &[f64]) -> f64 {
    let ct = c.mul_transpose(lambda);
    let num: f64 = f_int.iter().zip(f_ext).zip(&ct).map(|((a, b), l)| (a - b + l).powi(2)).sum::<f64>().sqrt();
    num / norm(f_ext).max(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalState {
    pub r: Vec<f64>,
    pub lambda: Vec<f64>,
    pub f_int: Vec<f64>,
    pub f_ext: Vec<f64>,
    pub load_factor: f64,
    pub history: Vec<IterationRecord>,
    pub converged: bool,
}

impl GlobalState {
    pub fn zero(problem: &PlateProblem) -> Self {
        Self {
            r: vec![0.0; problem.n_dofs()],
            lambda: vec![0.0; problem.n_constraints()],
            f_int: vec![0.0; problem.n_dofs()],
            f_ext: vec![0.0; problem.n_dofs()],
            load_factor: 0.0,
            history: Vec::new(),
            converged: false,
        }
    }

    /// Newton iterations (linear solves) spent in the final load step.
    pub fn final_step_iterations(&self) -> usize {
        self.history.last().map_or(0, |h| h.iteration)
    }

    pub fn eta(&self) -> f64 {
        self.history.last().map_or(f64::INFINITY, |h| h.eta)
    }
}

fn is_recoverable(e: &Error) -> bool {
    matches!(e, Error::NonConvergence { .. } | Error::Divergence { .. } | Error::SolverFailure(_))
}

/// Newton iteration on the KKT conditions with load stepping and bisection.
pub fn newton_solve(problem: &PlateProblem, settings: &NewtonSettings) -> Result<GlobalState> {
    settings.validate()?;
    let mut state = GlobalState::zero(problem);
    let mut targets: Vec<f64> = settings.load_schedule.iter().rev().copied().collect();
    let mut bisections = 0;
    let mut step = 0;
    while let Some(&target) = targets.last() {
        step += 1;
        let saved = (state.r.clone(), state.lambda.clone());
        match newton_step(problem, settings, &mut state, step, target) {
            Ok(()) => {
                state.load_factor = target;
                targets.pop();
            }
            Err(e) if is_recoverable(&e) && bisections < settings.max_bisections => {
                bisections += 1;
                state.r = saved.0;
                state.lambda = saved.1;
                targets.push(0.5 * (state.load_factor + target));
            }
            Err(e) => {
                return Err(match e {
                    Error::NonConvergence { iterations, last_eta, .. } => {
                        Error::NonConvergence { iterations, last_eta, history: state.history }
                    }
                    Error::Divergence { iteration, eta, .. } => Error::Divergence { iteration, eta, history: state.history },
                    other => other,
                })
            }
        }
    }
    state.converged = true;
    Ok(state)
}

fn newton_step(
    problem: &PlateProblem,
    settings: &NewtonSettings,
    state: &mut GlobalState,
    step: usize,
    load_factor: f64,
) -> Result<()> {
    let f_ext: Vec<f64> = problem.f_ext.iter().map(|f| f * load_factor).collect();
    let mut etas: Vec<f64> = Vec::new();
    for k in 0..=settings.max_iterations {
        let (kt, f_int) = problem.assemble_global(&state.r)?;
        let eta = residual_norm(&f_int, &f_ext, &problem.constraints, &state.lambda);
        state.history.push(IterationRecord { step, iteration: k, load_factor, eta });
        etas.push(eta);
        state.f_int = f_int;
        state.f_ext.clone_from(&f_ext);
        if eta <= settings.tolerance {
            return Ok(());
        }
        if !eta.is_finite() {
            return Err(Error::Divergence { iteration: k, eta, history: Vec::new() });
        }
        if etas.len() >= 4 && etas[etas.len() - 4..].windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Divergence { iteration: k, eta, history: Vec::new() });
        }
        if k == settings.max_iterations {
            return Err(Error::NonConvergence { iterations: k, last_eta: eta, history: Vec::new() });
        }
        let rhs_r: Vec<f64> = f_ext.iter().zip(&state.f_int).map(|(e, i)| e - i).collect();
        let rhs_c: Vec<f64> = problem.constraints.mul(&state.r).iter().map(|v| -v).collect();
        let (dr, lambda) = problem.solve_kkt(&kt, &rhs_r, &rhs_c, settings.linear_solver)?;
        state.r.iter_mut().zip(&dr).for_each(|(r, d)| *r += d);
        state.lambda = lambda;
    }
    unreachable!("loop returns on its last iteration")
}
