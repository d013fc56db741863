use nalgebra::DVector;

use super::observable::{Observable, PointGradient};
use super::point::WeinsteinPoint;
use crate::error::{Error, Result};
use crate::geometry::EquivariantManifold;
use crate::lie::AlgebraElement;

/// Relative tolerance for the residual-isotropy checks on a vertical
/// derivative.
pub const INVARIANCE_TOL: f64 = 1e-7;

/// Everything the reduced bracket and field need from one observable.
#[derive(Debug, Clone)]
pub struct ReducedDerivatives {
    pub gradient: PointGradient,
    /// Vertical derivative, represented in `h^⊥`.
    pub vertical: AlgebraElement,
    /// Covariant derivative in the `x` directions.
    pub covariant_x: DVector<f64>,
    /// Largest residual of the invariance checks.
    pub invariance_residual: f64,
}

impl EquivariantManifold {
    /// `alpha_j = A_{s(x)}(ds e_j)`; zero exactly when the section is
    /// horizontal.
    pub fn section_gauge(&self, x: &DVector<f64>) -> Result<Vec<AlgebraElement>> {
        let q = self.section(x);
        let ds = self.section_model().section_jacobian(x);
        let frame = self.connection_frame(&q)?;
        Ok((0..ds.ncols())
            .map(|j| frame.apply(&ds.column(j).into_owned()))
            .collect())
    }

    /// Residuals of `<lambda, [Z, X]> = 0` for `X` in `h` and `[Z, X] = 0` for
    /// `X` in `h ∩ k_lambda`.
    pub fn invariance_residual(&self, w: &WeinsteinPoint, z: &AlgebraElement) -> f64 {
        let alg = self.algebra();
        let h = self.h_sub();
        let mut worst: f64 = 0.0;
        for i in 0..h.dim() {
            let x = AlgebraElement::new(h.basis_vector(i));
            worst = worst.max(alg.pair(&w.lambda, &alg.bracket(z, &x)).abs());
        }
        if h.dim() > 0 {
            let l0 = alg.isotropy_of_covector(&w.lambda).intersect(h);
            for i in 0..l0.dim() {
                let x = AlgebraElement::new(l0.basis_vector(i));
                worst = worst.max(alg.norm(&alg.bracket(z, &x)));
            }
        }
        worst
    }

    fn vertical_from_gradient(&self, g: &PointGradient) -> AlgebraElement {
        let perp = self.h_sub().orthocomplement();
        AlgebraElement::new(perp.project(&g.dlambda))
    }

    /// `d_v f`: derivative along `Ann h`, represented in `h^⊥`.
    pub fn vertical_derivative<O: Observable + ?Sized>(&self, f: &O, w: &WeinsteinPoint) -> Result<AlgebraElement> {
        Ok(self.reduced_derivatives(f, w)?.vertical)
    }

    /// `(d_x f, d_eta f)` at frozen momentum `lambda`, with the gauge term
    /// `<lambda, [d_v f, alpha_j]>` that appears when the section is not
    /// horizontal.
    pub fn covariant_derivative<O: Observable + ?Sized>(
        &self,
        f: &O,
        w: &WeinsteinPoint,
    ) -> Result<(DVector<f64>, DVector<f64>)> {
        let d = self.reduced_derivatives(f, w)?;
        Ok((d.covariant_x, d.gradient.deta))
    }

    pub fn reduced_derivatives<O: Observable + ?Sized>(&self, f: &O, w: &WeinsteinPoint) -> Result<ReducedDerivatives> {
        self.validate_point(w)?;
        let gradient = f.gradient(self, w)?;
        let vertical = self.vertical_from_gradient(&gradient);
        let alg = self.algebra();
        let residual = self.invariance_residual(w, &vertical);
        let scale = 1.0 + alg.norm(&vertical) * alg.dual_norm(&w.lambda);
        if residual > INVARIANCE_TOL * scale {
            return Err(Error::InvarianceViolation { residual });
        }
        let mut covariant_x = gradient.dx.clone();
        if vertical.max_abs() > 0.0 && w.lambda.max_abs() > 0.0 {
            for (j, a) in self.section_gauge(&w.x)?.iter().enumerate() {
                covariant_x[j] += alg.pair(&w.lambda, &alg.bracket(&vertical, a));
            }
        }
        Ok(ReducedDerivatives {
            gradient,
            vertical,
            covariant_x,
            invariance_residual: residual,
        })
    }
}
