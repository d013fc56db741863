//! `SO(5)` acting diagonally on orthonormal-ish pairs `(v, w)` of vectors
//! in `R^5` with `|v|^2 + |w|^2 = 1` and `v`, `w` independent. Every such
//! pair is fixed by a copy of `SO(3)`; the quotient is the open unit disk
//! with coordinates `(2 v.w, |v|^2 - |w|^2)`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::Scenario;
use crate::error::{Error, Result};
use crate::geometry::{Embedding, EquivariantManifold, LinearAction, RepKind, SectionModel};
use crate::lie::{CoAlgebraElement, MatrixLieAlgebra};
use crate::weinstein::WeinsteinPoint;

struct FrameSection;

fn split(q: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    (q.rows(0, 5).into_owned(), q.rows(5, 5).into_owned())
}

fn coefficients(x: &DVector<f64>) -> (f64, f64, f64) {
    let a = ((1.0 + x[1]) / 2.0).sqrt();
    let b = x[0] / (2.0 * a);
    let c = ((1.0 - x[1]) / 2.0 - b * b).max(0.0).sqrt();
    (a, b, c)
}

impl SectionModel for FrameSection {
    fn base_dim(&self) -> usize {
        2
    }
    fn section(&self, x: &DVector<f64>) -> DVector<f64> {
        let (a, b, c) = coefficients(x);
        let mut q = DVector::zeros(10);
        q[0] = a;
        q[5] = b;
        q[6] = c;
        q
    }
    fn section_jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let (a, b, c) = coefficients(x);
        let da2 = 1.0 / (4.0 * a);
        let db1 = 1.0 / (2.0 * a);
        let db2 = -x[0] / (2.0 * a * a) * da2;
        let dc1 = -2.0 * b * db1 / (2.0 * c);
        let dc2 = (-0.5 - 2.0 * b * db2) / (2.0 * c);
        let mut j = DMatrix::zeros(10, 2);
        j[(0, 1)] = da2;
        j[(5, 0)] = db1;
        j[(5, 1)] = db2;
        j[(6, 0)] = dc1;
        j[(6, 1)] = dc2;
        j
    }
    fn base_coords(&self, q: &DVector<f64>) -> DVector<f64> {
        let (v, w) = split(q);
        DVector::from_column_slice(&[2.0 * v.dot(&w), v.norm_squared() - w.norm_squared()])
    }
    fn base_coords_jacobian(&self, q: &DVector<f64>) -> DMatrix<f64> {
        let (v, w) = split(q);
        let mut j = DMatrix::zeros(2, 10);
        for i in 0..5 {
            j[(0, i)] = 2.0 * w[i];
            j[(0, 5 + i)] = 2.0 * v[i];
            j[(1, i)] = 2.0 * v[i];
            j[(1, 5 + i)] = -2.0 * w[i];
        }
        j
    }
    fn in_domain(&self, x: &DVector<f64>) -> bool {
        x.norm_squared() < 1.0
    }
    fn canonicalize(&self, q: &DVector<f64>) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let (v, w) = split(q);
        let mut frame: Vec<DVector<f64>> = Vec::with_capacity(5);
        let mut candidates = vec![v, w];
        for i in [2, 3, 4, 0, 1] {
            let mut e = DVector::zeros(5);
            e[i] = 1.0;
            candidates.push(e);
        }
        for (idx, c) in candidates.into_iter().enumerate() {
            if frame.len() == 5 {
                break;
            }
            let mut r = c.clone();
            for f in &frame {
                r -= f * f.dot(&c);
            }
            let n = r.norm();
            if idx < 2 {
                if n < 1e-8 * (1.0 + c.norm()) {
                    return Err(Error::CanonicalizationFailure("v and w are dependent".into()));
                }
            } else if n < 0.5 {
                continue;
            }
            frame.push(r / n);
        }
        let mut f = DMatrix::from_columns(&frame);
        if f.determinant() < 0.0 {
            let last = f.column(4).into_owned();
            f.set_column(4, &(-last));
        }
        Ok((f.transpose(), self.base_coords(q)))
    }
}

/// The reference covector `E12 + E13 - E23 + E24`, that is the matrix with
/// rows `(0,1,1,0,0)`, `(-1,0,-1,1,0)`, `(-1,1,0,0,0)`, `(0,-1,0,0,0)`, `0`,
/// in coefficients of the basis `E12, E13, E14, E15, E23, E24, E25, E34,
/// E35, E45`.
pub fn so5_reference_lambda(alg: &MatrixLieAlgebra) -> CoAlgebraElement {
    let m = DMatrix::from_row_slice(
        5,
        5,
        &[
            0., 1., 1., 0., 0., //
            -1., 0., -1., 1., 0., //
            -1., 1., 0., 0., 0., //
            0., -1., 0., 0., 0., //
            0., 0., 0., 0., 0.,
        ],
    );
    let x = alg.expand_matrix(&m).expect("reference matrix lies in so(5)");
    alg.flat(&x)
}

/// `h^⊥ = R x R^3 x R^3`: the `E12` coefficient and the `(E1j)`, `(E2j)`
/// coefficients for `j = 3, 4, 5`. `h = so(3)` rotates both triples.
pub fn so5_perp_split(lambda: &CoAlgebraElement) -> (f64, [f64; 3], [f64; 3]) {
    let c = &lambda.coeffs;
    (c[0], [c[1], c[2], c[3]], [c[4], c[5], c[6]])
}

pub(super) fn build() -> Result<Scenario> {
    let alg = MatrixLieAlgebra::so(5);
    let h = alg.span(&[alg.basis_element(7), alg.basis_element(8), alg.basis_element(9)]);
    let reference = so5_reference_lambda(&alg);
    let action = LinearAction::new(alg, RepKind::Diagonal { copies: 2 })?;
    let manifold = EquivariantManifold::new(action, Embedding::Sphere { radius: 1.0 }, Arc::new(FrameSection), h);
    Ok(Scenario {
        name: "so5_pairs",
        summary: "SO(5) on independent pairs in R^5 of unit total length, isotropy SO(3), base the open disk",
        manifold,
        x_box: vec![(-0.4, 0.4), (-0.4, 0.4)],
        eta_scale: 1.0,
        lambda_scale: 1.0,
        lambda_invariants: vec!["l1", "l2^2 + l3^2 + l4^2", "l5^2 + l6^2 + l7^2", "l2*l5 + l3*l6 + l4*l7"],
        hamiltonian: "kin + 0.5*lam2",
        designated_point: WeinsteinPoint::new(
            DVector::from_column_slice(&[0.2, -0.1]),
            DVector::from_column_slice(&[0.3, 0.2]),
            reference.clone(),
        ),
        reference_lambda: Some(reference),
        magnetic_regression: Some(0.512_989_176_041_95),
    })
}
