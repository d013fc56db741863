use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::derivatives::ReducedDerivatives;
use super::observable::Observable;
use super::point::{WeinsteinPoint, WeinsteinTangent};
use crate::error::{Error, Result};
use crate::geometry::EquivariantManifold;
use crate::lie::{AlgebraElement, CoAlgebraElement};

/// The three terms of the reduced bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BracketBreakdown {
    /// `sum_i (D_x f)_i (d_eta g)_i - (d_eta f)_i (D_x g)_i`.
    pub canonical: f64,
    /// `<lambda, Curv(C d_eta f, C d_eta g)>`.
    pub curvature: f64,
    /// `-<lambda, [d_v f, d_v g]>`.
    pub vertical: f64,
    pub total: f64,
}

impl EquivariantManifold {
    /// Reduced Poisson bracket `{f, g}` at `w`.
    ///
    /// Convention: `{f, g} = Omega(X_f, X_g) = -X_f(g)` with `i_X Omega = df`,
    /// so `{x_i, eta_j} = delta_ij`.
    pub fn reduced_bracket<F, G>(&self, f: &F, g: &G, w: &WeinsteinPoint) -> Result<BracketBreakdown>
    where
        F: Observable + ?Sized,
        G: Observable + ?Sized,
    {
        let df = self.reduced_derivatives(f, w)?;
        let dg = self.reduced_derivatives(g, w)?;
        self.bracket_from_derivatives(&df, &dg, w)
    }

    pub fn bracket_from_derivatives(
        &self,
        df: &ReducedDerivatives,
        dg: &ReducedDerivatives,
        w: &WeinsteinPoint,
    ) -> Result<BracketBreakdown> {
        let alg = self.algebra();
        let canonical =
            df.covariant_x.dot(&dg.gradient.deta) - df.gradient.deta.dot(&dg.covariant_x);
        let curvature = self.reduced_curvature_pairing(&w.x, &df.gradient.deta, &dg.gradient.deta, &w.lambda)?;
        let vertical = -alg.pair(&w.lambda, &alg.bracket(&df.vertical, &dg.vertical));
        Ok(BracketBreakdown {
            canonical,
            curvature,
            vertical,
            total: canonical + curvature + vertical,
        })
    }

    /// Hamiltonian vector field of `f`, with `dg(X_f) = -{f, g}`:
    ///
    /// `x_dot = d_eta f`,
    /// `eta_dot_j = -(D_x f)_j - <lambda, Curv(C x_dot, C e_j)>`,
    /// `lambda_dot = ad*(alpha(x_dot) - d_v f) lambda`.
    pub fn hamiltonian_field<F: Observable + ?Sized>(&self, f: &F, w: &WeinsteinPoint) -> Result<WeinsteinTangent> {
        let d = self.reduced_derivatives(f, w)?;
        self.field_from_derivatives(&d, w)
    }

    pub fn field_from_derivatives(&self, d: &ReducedDerivatives, w: &WeinsteinPoint) -> Result<WeinsteinTangent> {
        let alg = self.algebra();
        let x_dot = d.gradient.deta.clone();
        let curv = self.reduced_curvature_form(&w.x, &w.lambda)?;
        let eta_dot = -&d.covariant_x - curv.transpose() * &x_dot;
        let generator = if w.lambda.max_abs() > 0.0 && x_dot.amax() > 0.0 {
            self.lambda_generator(d, w)?
        } else {
            -d.vertical.clone()
        };
        let lambda_dot = alg.ad_star(&generator, &w.lambda);
        Ok(WeinsteinTangent {
            x_dot,
            eta_dot,
            lambda_dot,
        })
    }

    /// Bracket of `lambda`-independent observables for the magnetic form
    /// `Omega^lambda = dx ^ deta - <lambda, Curv>` on `T*(Q/K)`, obtained by
    /// inverting the `2b x 2b` form matrix.
    pub fn magnetic_bracket<F, G>(&self, f: &F, g: &G, w: &WeinsteinPoint) -> Result<f64>
    where
        F: Observable + ?Sized,
        G: Observable + ?Sized,
    {
        self.validate_point(w)?;
        let b = self.base_dim();
        let form = self.magnetic_form(&w.x, &w.lambda)?;
        let inv = form
            .transpose()
            .try_inverse()
            .ok_or_else(|| Error::Degenerate { min_eigenvalue: 0.0 })?;
        let stack = |o: &dyn Fn() -> Result<super::observable::PointGradient>| -> Result<DVector<f64>> {
            let gr = o()?;
            let mut v = DVector::zeros(2 * b);
            v.rows_mut(0, b).copy_from(&gr.dx);
            v.rows_mut(b, b).copy_from(&gr.deta);
            Ok(v)
        };
        let df = stack(&|| f.gradient(self, w))?;
        let dg = stack(&|| g.gradient(self, w))?;
        Ok(df.dot(&(inv * dg)))
    }

    /// Matrix of `Omega^lambda` in `(x, eta)` coordinates.
    pub fn magnetic_form(&self, x: &DVector<f64>, lambda: &CoAlgebraElement) -> Result<DMatrix<f64>> {
        let b = self.base_dim();
        let curv = self.reduced_curvature_form(x, lambda)?;
        let mut form = DMatrix::zeros(2 * b, 2 * b);
        form.view_mut((0, 0), (b, b)).copy_from(&(-curv));
        form.view_mut((0, b), (b, b)).copy_from(&DMatrix::identity(b, b));
        form.view_mut((b, 0), (b, b)).copy_from(&(-DMatrix::<f64>::identity(b, b)));
        Ok(form)
    }

    /// The generator `alpha(x_dot) - d_v f` driving `lambda`.
    pub fn lambda_generator(&self, d: &ReducedDerivatives, w: &WeinsteinPoint) -> Result<AlgebraElement> {
        let mut generator = -d.vertical.clone();
        for (j, a) in self.section_gauge(&w.x)?.into_iter().enumerate() {
            generator = generator + a * d.gradient.deta[j];
        }
        Ok(generator)
    }
}
