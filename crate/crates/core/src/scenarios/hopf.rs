//! The circle acting on `S^3 ⊂ C^2` by `(z1, z2) -> (e^{it} z1, e^{it} z2)`.
//! The action is free and the base is the 2-sphere; one hemisphere is
//! covered by the section, with base coordinates `2 z1 conj(z2)`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::Scenario;
use crate::error::{Error, Result};
use crate::geometry::{Embedding, EquivariantManifold, LinearAction, RepKind, SectionModel};
use crate::lie::{MatrixLieAlgebra, Subspace};
use crate::weinstein::WeinsteinPoint;

struct HemisphereSection;

impl SectionModel for HemisphereSection {
    fn base_dim(&self) -> usize {
        2
    }
    fn section(&self, x: &DVector<f64>) -> DVector<f64> {
        let r2 = x.norm_squared();
        let a = ((1.0 + (1.0 - r2).sqrt()) / 2.0).sqrt();
        DVector::from_column_slice(&[a, 0.0, x[0] / (2.0 * a), -x[1] / (2.0 * a)])
    }
    fn base_coords(&self, q: &DVector<f64>) -> DVector<f64> {
        DVector::from_column_slice(&[
            2.0 * (q[0] * q[2] + q[1] * q[3]),
            2.0 * (q[1] * q[2] - q[0] * q[3]),
        ])
    }
    fn base_coords_jacobian(&self, q: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_row_slice(
            2,
            4,
            &[
                2.0 * q[2],
                2.0 * q[3],
                2.0 * q[0],
                2.0 * q[1],
                -2.0 * q[3],
                2.0 * q[2],
                2.0 * q[1],
                -2.0 * q[0],
            ],
        )
    }
    fn in_domain(&self, x: &DVector<f64>) -> bool {
        x.norm_squared() < 1.0
    }
    fn canonicalize(&self, q: &DVector<f64>) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let r1 = (q[0] * q[0] + q[1] * q[1]).sqrt();
        let r2 = (q[2] * q[2] + q[3] * q[3]).sqrt();
        if r1 <= r2 {
            return Err(Error::CanonicalizationFailure(
                "point lies outside the hemisphere |z1| > |z2| covered by the section".into(),
            ));
        }
        let (c, s) = (q[0] / r1, q[1] / r1);
        // Rotation by -arg(z1).
        let k = DMatrix::from_row_slice(2, 2, &[c, s, -s, c]);
        Ok((k, self.base_coords(q)))
    }
}

pub(super) fn build() -> Result<Scenario> {
    let alg = MatrixLieAlgebra::u1();
    let h = Subspace::zero(alg.algebra_metric());
    let action = LinearAction::new(alg, RepKind::Diagonal { copies: 2 })?;
    let manifold = EquivariantManifold::new(action, Embedding::Sphere { radius: 1.0 }, Arc::new(HemisphereSection), h);
    Ok(Scenario {
        name: "hopf",
        summary: "U(1) acting freely on S^3, base S^2, magnetic monopole reduction",
        manifold,
        x_box: vec![(-0.5, 0.5), (-0.5, 0.5)],
        eta_scale: 1.0,
        lambda_scale: 1.0,
        lambda_invariants: vec!["l1", "l1^2"],
        hamiltonian: "kin + 0.5*l1^2",
        reference_lambda: None,
        designated_point: WeinsteinPoint::from_slices(&[0.3, -0.2], &[0.4, 0.1], &[1.0]),
        magnetic_regression: Some(-0.536_056_267_418_23),
    })
}
