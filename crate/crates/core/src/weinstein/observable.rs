use std::sync::Arc;

use nalgebra::DVector;

use super::point::WeinsteinPoint;
use crate::error::Result;
use crate::geometry::EquivariantManifold;
use crate::lie::CoAlgebraElement;
use crate::linalg;

/// Partial derivatives of an observable in section coordinates.
///
/// `dlambda` holds `d f / d lambda_i` as algebra coefficients, so that
/// `<nu, dlambda>` is the derivative along `nu`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointGradient {
    pub dx: DVector<f64>,
    pub deta: DVector<f64>,
    pub dlambda: DVector<f64>,
}

/// A smooth function on the Weinstein space.
pub trait Observable: Send + Sync {
    fn value(&self, space: &EquivariantManifold, w: &WeinsteinPoint) -> Result<f64>;

    fn gradient(&self, space: &EquivariantManifold, w: &WeinsteinPoint) -> Result<PointGradient> {
        fd_point_gradient(|p| self.value(space, p), space, w)
    }
}

impl<T: Observable + ?Sized> Observable for &T {
    fn value(&self, space: &EquivariantManifold, w: &WeinsteinPoint) -> Result<f64> {
        (**self).value(space, w)
    }
    fn gradient(&self, space: &EquivariantManifold, w: &WeinsteinPoint) -> Result<PointGradient> {
        (**self).gradient(space, w)
    }
}

impl<T: Observable + ?Sized> Observable for Arc<T> {
    fn value(&self, space: &EquivariantManifold, w: &WeinsteinPoint) -> Result<f64> {
        (**self).value(space, w)
    }
    fn gradient(&self, space: &EquivariantManifold, w: &WeinsteinPoint) -> Result<PointGradient> {
        (**self).gradient(space, w)
    }
}

/// Observable given by a closure, differentiated by finite differences.
pub struct FnObservable<F>(pub F);

impl<F> Observable for FnObservable<F>
where
    F: Fn(&EquivariantManifold, &WeinsteinPoint) -> Result<f64> + Send + Sync,
{
    fn value(&self, space: &EquivariantManifold, w: &WeinsteinPoint) -> Result<f64> {
        (self.0)(space, w)
    }
}

/// Finite-difference gradient. The `lambda` derivative is taken only along
/// `Ann h`, so the result lies in `h^⊥`.
pub fn fd_point_gradient<F>(f: F, space: &EquivariantManifold, w: &WeinsteinPoint) -> Result<PointGradient>
where
    F: Fn(&WeinsteinPoint) -> Result<f64>,
{
    let dx = linalg::fd_gradient(
        |x| {
            let mut p = w.clone();
            p.x = x.clone();
            f(&p)
        },
        &w.x,
    )?;
    let deta = linalg::fd_gradient(
        |eta| {
            let mut p = w.clone();
            p.eta = eta.clone();
            f(&p)
        },
        &w.eta,
    )?;
    let alg = space.algebra();
    let ann = space.ann_h();
    let scale = w.lambda.coeffs.norm();
    let mut dlambda = DVector::zeros(alg.dim());
    for k in 0..ann.dim() {
        let nu = ann.basis_vector(k);
        let d = linalg::richardson_scalar(
            |t| {
                let mut p = w.clone();
                p.lambda = CoAlgebraElement::new(&w.lambda.coeffs + &nu * t);
                f(&p)
            },
            linalg::fd_step(scale),
        )?;
        dlambda += alg.gram_inverse() * &nu * d;
    }
    Ok(PointGradient { dx, deta, dlambda })
}
