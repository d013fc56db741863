//! `SO(3)` acting by conjugation on traceless symmetric `3 x 3` matrices,
//! restricted to matrices with distinct eigenvalues. The section is the
//! open Weyl chamber of diagonal matrices `d1 > d2 > d3`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::Scenario;
use crate::error::{Error, Result};
use crate::geometry::{Embedding, EquivariantManifold, LinearAction, RepKind, SectionModel};
use crate::lie::{MatrixLieAlgebra, Subspace};
use crate::weinstein::WeinsteinPoint;

const S2: f64 = std::f64::consts::SQRT_2;

/// Orthonormal directions of the diagonal in the trace-zero plane.
fn chamber_axes() -> (DVector<f64>, DVector<f64>) {
    let s6 = 6f64.sqrt();
    (
        DVector::from_column_slice(&[1.0 / S2, -1.0 / S2, 0.0]),
        DVector::from_column_slice(&[1.0 / s6, 1.0 / s6, -2.0 / s6]),
    )
}

fn flatten(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(m.len(), m.transpose().iter().copied())
}

fn unflatten(q: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_row_slice(3, 3, q.as_slice())
}

/// Orthonormal basis of traceless symmetric matrices inside `R^9`.
fn traceless_symmetric_basis() -> DMatrix<f64> {
    let (a1, a2) = chamber_axes();
    let mut cols = Vec::new();
    cols.push(flatten(&DMatrix::from_diagonal(&a1)));
    cols.push(flatten(&DMatrix::from_diagonal(&a2)));
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let mut m = DMatrix::zeros(3, 3);
        m[(i, j)] = 1.0 / S2;
        m[(j, i)] = 1.0 / S2;
        cols.push(flatten(&m));
    }
    DMatrix::from_columns(&cols)
}

struct ChamberSection;

impl ChamberSection {
    /// Eigenvalues in decreasing order with eigenvectors as columns.
    fn sorted_eigen(q: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let m = unflatten(q);
        let sym = (&m + m.transpose()) * 0.5;
        let eig = sym.symmetric_eigen();
        let mut order: Vec<usize> = (0..3).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let vals = DVector::from_iterator(3, order.iter().map(|&i| eig.eigenvalues[i]));
        let vecs = DMatrix::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect::<Vec<_>>());
        (vals, vecs)
    }
}

impl SectionModel for ChamberSection {
    fn base_dim(&self) -> usize {
        2
    }
    fn section(&self, x: &DVector<f64>) -> DVector<f64> {
        let (a1, a2) = chamber_axes();
        flatten(&DMatrix::from_diagonal(&(a1 * x[0] + a2 * x[1])))
    }
    fn section_jacobian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        let (a1, a2) = chamber_axes();
        DMatrix::from_columns(&[flatten(&DMatrix::from_diagonal(&a1)), flatten(&DMatrix::from_diagonal(&a2))])
    }
    fn base_coords(&self, q: &DVector<f64>) -> DVector<f64> {
        let (vals, _) = Self::sorted_eigen(q);
        let (a1, a2) = chamber_axes();
        DVector::from_column_slice(&[a1.dot(&vals), a2.dot(&vals)])
    }
    fn base_coords_jacobian(&self, q: &DVector<f64>) -> DMatrix<f64> {
        // d(eigenvalue_i) = v_i^T dQ v_i.
        let (_, vecs) = Self::sorted_eigen(q);
        let (a1, a2) = chamber_axes();
        let mut dvals = DMatrix::zeros(3, 9);
        for i in 0..3 {
            let v = vecs.column(i);
            dvals.set_row(i, &flatten(&(v * v.transpose())).transpose());
        }
        DMatrix::from_rows(&[(a1.transpose() * &dvals).row(0).into_owned(), (a2.transpose() * &dvals).row(0).into_owned()])
    }
    fn in_domain(&self, x: &DVector<f64>) -> bool {
        x[0] > 0.0 && x[1] > x[0] / 3f64.sqrt()
    }
    fn canonicalize(&self, q: &DVector<f64>) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let (vals, mut vecs) = Self::sorted_eigen(q);
        let gap = (vals[0] - vals[1]).min(vals[1] - vals[2]);
        if !(gap > 1e-8 * (1.0 + vals.amax())) {
            return Err(Error::CanonicalizationFailure("repeated eigenvalues".into()));
        }
        for i in 0..3 {
            let col = vecs.column(i).into_owned();
            let pivot = col.iamax();
            if col[pivot] < 0.0 {
                vecs.set_column(i, &(-col));
            }
        }
        if vecs.determinant() < 0.0 {
            let last = vecs.column(2).into_owned();
            vecs.set_column(2, &(-last));
        }
        let (a1, a2) = chamber_axes();
        Ok((vecs.transpose(), DVector::from_column_slice(&[a1.dot(&vals), a2.dot(&vals)])))
    }
}

pub(super) fn build() -> Result<Scenario> {
    let alg = MatrixLieAlgebra::so3();
    let h = Subspace::zero(alg.algebra_metric());
    let action = LinearAction::new(alg, RepKind::Conjugation)?;
    let manifold = EquivariantManifold::new(
        action,
        Embedding::Linear {
            basis: traceless_symmetric_basis(),
        },
        Arc::new(ChamberSection),
        h,
    );
    Ok(Scenario {
        name: "calogero_so3",
        summary: "SO(3) conjugation on traceless symmetric matrices, regular stratum",
        manifold,
        x_box: vec![(0.6, 1.2), (1.2, 1.8)],
        eta_scale: 1.0,
        lambda_scale: 1.0,
        lambda_invariants: vec!["l1^2", "l2^2", "l3^2", "l1*l2*l3", "lam2"],
        hamiltonian: FREE_HAMILTONIAN,
        reference_lambda: None,
        designated_point: WeinsteinPoint::from_slices(&[0.9, 1.5], &[0.2, -0.3], &[0.5, -0.4, 0.3]),
        magnetic_regression: None,
    })
}

/// Kinetic energy `|P|^2 / 2` of the upstairs free particle in reduced
/// coordinates: the Euclidean part plus `l_a^2 / (4 (d_i - d_j)^2)`.
pub const FREE_HAMILTONIAN: &str = "0.5*(e1^2 + e2^2) \
    + l1^2/(4*(sqrt(1.5)*x2 - x1/sqrt(2))^2) \
    + l2^2/(4*(sqrt(1.5)*x2 + x1/sqrt(2))^2) \
    + l3^2/(4*(sqrt(2)*x1)^2)";
