//! `SO(3)` rotating `R^3 \ {0}`; the orbits are spheres, `Q/K = (0, inf)`
//! and the isotropy along the positive `z` axis is `SO(2)`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Vector3};

use super::Scenario;
use crate::error::{Error, Result};
use crate::geometry::{Embedding, EquivariantManifold, LinearAction, RepKind, SectionModel};
use crate::lie::MatrixLieAlgebra;
use crate::weinstein::WeinsteinPoint;

struct RadialSection;

/// Rotation taking the unit vector `a` to `e_z` about the axis `a x e_z`.
pub(crate) fn align_to_z(a: &Vector3<f64>) -> Option<DMatrix<f64>> {
    let z = Vector3::z();
    let c = a.dot(&z);
    if c <= -0.9 {
        // Go through the half turn about x so the formula stays well conditioned.
        let flip = DMatrix::from_row_slice(3, 3, &[1., 0., 0., 0., -1., 0., 0., 0., -1.]);
        let b = Vector3::new(a.x, -a.y, -a.z);
        return align_to_z(&b).map(|r| r * flip);
    }
    let v = a.cross(&z);
    let vx = DMatrix::from_row_slice(3, 3, &[0., -v.z, v.y, v.z, 0., -v.x, -v.y, v.x, 0.]);
    Some(DMatrix::identity(3, 3) + &vx + &vx * &vx / (1.0 + c))
}

impl SectionModel for RadialSection {
    fn base_dim(&self) -> usize {
        1
    }
    fn section(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_column_slice(&[0.0, 0.0, x[0]])
    }
    fn section_jacobian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_column_slice(3, 1, &[0.0, 0.0, 1.0])
    }
    fn base_coords(&self, q: &DVector<f64>) -> DVector<f64> {
        DVector::from_element(1, q.norm())
    }
    fn base_coords_jacobian(&self, q: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_row_slice(1, 3, (q / q.norm()).as_slice())
    }
    fn in_domain(&self, x: &DVector<f64>) -> bool {
        x[0] > 0.0
    }
    fn canonicalize(&self, q: &DVector<f64>) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let r = q.norm();
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::CanonicalizationFailure("origin is not in Q".into()));
        }
        let a = Vector3::new(q[0], q[1], q[2]) / r;
        let k = align_to_z(&a).ok_or_else(|| Error::CanonicalizationFailure("alignment failed".into()))?;
        Ok((k, DVector::from_element(1, r)))
    }
}

pub(super) fn build() -> Result<Scenario> {
    let alg = MatrixLieAlgebra::so3();
    let h = alg.span(&[alg.basis_element(2)]);
    let action = LinearAction::new(alg, RepKind::Defining)?;
    let manifold = EquivariantManifold::new(
        action,
        Embedding::Linear {
            basis: DMatrix::identity(3, 3),
        },
        Arc::new(RadialSection),
        h,
    );
    Ok(Scenario {
        name: "so3_r3",
        summary: "SO(3) on R^3 minus the origin, isotropy SO(2) along the section",
        manifold,
        x_box: vec![(0.5, 2.0)],
        eta_scale: 1.0,
        lambda_scale: 1.0,
        lambda_invariants: vec!["lam2", "sqrt(1 + lam2)"],
        hamiltonian: "0.5*e1^2 + lam2/(2*x1^2)",
        reference_lambda: None,
        designated_point: WeinsteinPoint::from_slices(&[1.0], &[0.5], &[1.0, 0.0, 0.0]),
        magnetic_regression: None,
    })
}
