use nalgebra::{DMatrix, DVector};

use super::algebra::{AlgebraElement, CoAlgebraElement, MatrixLieAlgebra};
use super::subspace::Subspace;
use crate::error::{Error, Result};

/// Matrix exponential of `X` (scaling and squaring with a Padé core).
pub fn group_exp(alg: &MatrixLieAlgebra, x: &AlgebraElement) -> DMatrix<f64> {
    alg.matrix_of(x).exp()
}

fn inverse(k: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    k.clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidAlgebra("group element is singular".into()))
}

/// `Ad(k) Y = k Y k^{-1}` expanded in the basis.
pub fn adjoint(alg: &MatrixLieAlgebra, k: &DMatrix<f64>, y: &AlgebraElement) -> Result<AlgebraElement> {
    let kinv = inverse(k)?;
    alg.expand_matrix(&(k * alg.matrix_of(y) * kinv))
}

/// Matrix of `Ad(k)` on coefficients.
pub fn adjoint_matrix(alg: &MatrixLieAlgebra, k: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = alg.dim();
    let kinv = inverse(k)?;
    let mut out = DMatrix::zeros(m, m);
    for (i, e) in alg.basis().iter().enumerate() {
        let col = alg.expand_matrix(&(k * e * &kinv))?;
        out.set_column(i, &col.coeffs);
    }
    Ok(out)
}

/// `Ad*(k) lambda = lambda o Ad(k^{-1})`.
pub fn adjoint_star(alg: &MatrixLieAlgebra, k: &DMatrix<f64>, lambda: &CoAlgebraElement) -> Result<CoAlgebraElement> {
    let ad_inv = adjoint_matrix(alg, &inverse(k)?)?;
    Ok(CoAlgebraElement::new(ad_inv.transpose() * &lambda.coeffs))
}

/// The two momentum maps of the left and right `H`-actions on the left
/// trivialized `T*K = K x k*`, evaluated on the orthonormal basis of `h`.
#[derive(Debug, Clone)]
pub struct TrivializedMomenta {
    /// `(Ad*(k) eta)|h`.
    pub left: DVector<f64>,
    /// `-eta|h`.
    pub right: DVector<f64>,
}

pub fn trivialized_momentum_maps(
    alg: &MatrixLieAlgebra,
    k: &DMatrix<f64>,
    eta: &CoAlgebraElement,
    h: &Subspace,
) -> Result<TrivializedMomenta> {
    let moved = adjoint_star(alg, k, eta)?;
    let hb = h.basis();
    Ok(TrivializedMomenta {
        left: hb.transpose() * &moved.coeffs,
        right: -(hb.transpose() * &eta.coeffs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn exp_is_rotation() {
        let g = MatrixLieAlgebra::so3();
        let k = group_exp(&g, &(g.basis_element(2) * (PI / 2.0)));
        let expect = DMatrix::from_row_slice(3, 3, &[0., -1., 0., 1., 0., 0., 0., 0., 1.]);
        assert!((k - expect).amax() < 1e-14);
    }

    #[test]
    fn adjoint_half_turn_flips_lx() {
        let g = MatrixLieAlgebra::so3();
        let k = group_exp(&g, &(g.basis_element(2) * PI));
        let y = adjoint(&g, &k, &g.basis_element(0)).unwrap();
        assert!((y.coeffs + g.basis_element(0).coeffs).amax() < 1e-14);
    }

    #[test]
    fn identity_acts_trivially() {
        let g = MatrixLieAlgebra::so(4);
        let e = DMatrix::identity(4, 4);
        let y = AlgebraElement::from_slice(&[1., 2., 3., 4., 5., 6.]);
        assert!((adjoint(&g, &e, &y).unwrap().coeffs - &y.coeffs).amax() < 1e-14);
    }
}
