//! Interface tying matrix `C` gluing adjacent layers node by node.

use nalgebra::SMatrix;

use crate::error::{Error, Result};
use crate::model::{Component, DofMap, LaminateSpec, TIE_ROWS};

/// Which displacement a tying row equates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieKind {
    U,
    V,
    W,
}

/// One sparse row of `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintRow {
    /// Interface index `i` (between layers `i` and `i + 1`).
    pub interface: usize,
    pub node: usize,
    pub kind: TieKind,
    /// `(global dof, coefficient)`; fixed columns are omitted.
    pub entries: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintMatrix {
    pub rows: Vec<ConstraintRow>,
    pub n_cols: usize,
}

/// Dense 3×10 tying block for one node between layers `i` (columns 0..5) and
/// `i + 1` (columns 5..10), columns ordered `[u, v, w, phi_x, phi_y]`.
pub fn interface_block(h_lower: f64, h_upper: f64) -> SMatrix<f64, 3, 10> {
    let (a, b) = (h_lower / 2.0, h_upper / 2.0);
    #[rustfmt::skip]
    let block = SMatrix::<f64, 3, 10>::from_row_slice(&[
        1.0, 0.0, 0.0, 0.0, a,    -1.0,  0.0,  0.0, 0.0, b,
        0.0, 1.0, 0.0, -a,  0.0,   0.0, -1.0,  0.0, -b,  0.0,
        0.0, 0.0, 1.0, 0.0, 0.0,   0.0,  0.0, -1.0, 0.0, 0.0,
    ]);
    block
}

pub fn assemble_constraints(dofmap: &DofMap, laminate: &LaminateSpec) -> Result<ConstraintMatrix> {
    if dofmap.n_layers != laminate.n_layers() {
        return Err(Error::IncompatibleDiscretization(format!(
            "DOF map has {} layers, laminate has {}",
            dofmap.n_layers,
            laminate.n_layers()
        )));
    }
    let kinds = [TieKind::U, TieKind::V, TieKind::W];
    let mut rows = Vec::with_capacity(dofmap.n_constraint_rows);
    for iface in 0..dofmap.n_layers.saturating_sub(1) {
        let block = interface_block(laminate.layers[iface].thickness, laminate.layers[iface + 1].thickness);
        for node in 0..dofmap.n_nodes {
            for (r, kind) in kinds.iter().enumerate() {
                let mut entries = Vec::with_capacity(4);
                for off in 0..2 {
                    for c in Component::ALL {
                        let coeff = block[(r, 5 * off + c.index())];
                        if coeff == 0.0 {
                            continue;
                        }
                        if let Some(d) = dofmap.dof(iface + off, node, c) {
                            entries.push((d, coeff));
                        }
                    }
                }
                debug_assert!(TIE_ROWS[r].iter().all(|&(off, c)| block[(r, 5 * off + c.index())] != 0.0));
                if entries.len() >= 2 {
                    rows.push(ConstraintRow { interface: iface, node, kind: *kind, entries });
                }
            }
        }
    }
    if rows.len() != dofmap.n_constraint_rows {
        return Err(Error::IncompatibleDiscretization(format!(
            "expected {} tying rows, built {}",
            dofmap.n_constraint_rows,
            rows.len()
        )));
    }
    Ok(ConstraintMatrix { rows, n_cols: dofmap.n_dofs() })
}

impl ConstraintMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// `C r`
    pub fn mul(&self, r: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.entries.iter().map(|&(d, c)| c * r[d]).sum())
            .collect()
    }

    /// `Cᵀ λ`
    pub fn mul_transpose(&self, lambda: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cols];
        for (row, &l) in self.rows.iter().zip(lambda) {
            for &(d, c) in &row.entries {
                out[d] += c * l;
            }
        }
        out
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n_rows(), self.n_cols);
        for (i, row) in self.rows.iter().enumerate() {
            for &(d, c) in &row.entries {
                m[(i, d)] += c;
            }
        }
        m
    }
}
