//! Mechanical connection, its curvature, and the one-form `B` on
//! `Q x k*` together with its exterior derivative.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::EquivariantManifold;
use crate::lie::{AlgebraElement, CoAlgebraElement};
use crate::linalg;

/// The data needed to evaluate `A_q` and `A_q^*` at a fixed point.
#[derive(Debug, Clone)]
pub struct ConnectionFrame {
    pub q: DVector<f64>,
    /// Gram-orthonormal coefficient basis of `k_q^⊥`.
    perp: DMatrix<f64>,
    /// `zeta` applied to the columns of `perp`.
    zu: DMatrix<f64>,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    isotropy_dim: usize,
}

impl ConnectionFrame {
    pub fn isotropy_dim(&self) -> usize {
        self.isotropy_dim
    }

    /// `A_q(v)`, solving `I_q a = mu_q(v)` on `k_q^⊥`.
    pub fn apply(&self, v: &DVector<f64>) -> AlgebraElement {
        let rhs = self.zu.transpose() * v;
        AlgebraElement::new(&self.perp * self.chol.solve(&rhs))
    }

    /// `A_q^*(lambda)` as an ambient tangent vector.
    pub fn dual(&self, lambda: &CoAlgebraElement) -> DVector<f64> {
        let rhs = self.perp.transpose() * &lambda.coeffs;
        &self.zu * self.chol.solve(&rhs)
    }
}

/// A tangent vector to `Q x k*`.
#[derive(Debug, Clone)]
pub struct ProductTangent {
    pub v: DVector<f64>,
    pub lambda_dot: CoAlgebraElement,
}

impl EquivariantManifold {
    pub fn connection_frame(&self, q: &DVector<f64>) -> Result<ConnectionFrame> {
        let inertia = self.inertia_tensor(q)?;
        let perp = inertia.perp.basis();
        let zu = self.action().zeta_matrix(q) * &perp;
        let chol = inertia.restricted.clone().cholesky().ok_or(Error::Degenerate {
            min_eigenvalue: linalg::min_symmetric_eigenvalue(&inertia.restricted),
        })?;
        Ok(ConnectionFrame {
            q: q.clone(),
            isotropy_dim: self.algebra().dim() - perp.ncols(),
            perp,
            zu,
            chol,
        })
    }

    /// Mechanical connection `A_q(v)`.
    pub fn connection(&self, q: &DVector<f64>, v: &DVector<f64>) -> Result<AlgebraElement> {
        self.check_tangent(q, v)?;
        Ok(self.connection_frame(q)?.apply(v))
    }

    /// `A_q^*(lambda)` for `lambda` in `Ann k_q`.
    pub fn connection_dual(&self, q: &DVector<f64>, lambda: &CoAlgebraElement) -> Result<DVector<f64>> {
        Ok(self.connection_frame(q)?.dual(lambda))
    }

    /// `t -> A_{phi(t c)}(J(t c) d)` along a chart coordinate line.
    fn connection_along(
        &self,
        chart: &crate::geometry::Chart,
        iso_dim: usize,
        c: &DVector<f64>,
        d: &DVector<f64>,
        t: f64,
    ) -> Result<DVector<f64>> {
        let u = c * t;
        let q = chart.point(&u);
        let frame = self.connection_frame(&q).map_err(|e| Error::FdStepFailure(e.to_string()))?;
        if frame.isotropy_dim() != iso_dim {
            return Err(Error::FdStepFailure(format!(
                "isotropy dimension changed from {iso_dim} to {} inside the step",
                frame.isotropy_dim()
            )));
        }
        Ok(frame.apply(&(chart.jacobian(&u) * d)).coeffs)
    }

    /// Directional derivative along chart coordinate direction `c` of the
    /// connection evaluated on the coordinate field with constant
    /// components `d`.
    fn connection_derivative(
        &self,
        q: &DVector<f64>,
        c: &DVector<f64>,
        d: &DVector<f64>,
        iso_dim: usize,
    ) -> Result<DVector<f64>> {
        let m = self.algebra().dim();
        let norm = c.norm();
        if norm == 0.0 || d.norm() == 0.0 {
            return Ok(DVector::zeros(m));
        }
        let chart = self.embedding().chart_at(q);
        let h = linalg::fd_step(0.0) * (1.0 + q.norm()) / norm;
        linalg::richardson_derivative(|t| self.connection_along(&chart, iso_dim, c, d, t), h)
    }

    /// `dA(v1, v2)` on chart coordinate extensions of `v1`, `v2`.
    pub fn connection_differential(
        &self,
        q: &DVector<f64>,
        v1: &DVector<f64>,
        v2: &DVector<f64>,
    ) -> Result<AlgebraElement> {
        self.check_tangent(q, v1)?;
        self.check_tangent(q, v2)?;
        let chart = self.embedding().chart_at(q);
        let j0 = chart.jacobian(&DVector::zeros(chart.dim()));
        let (c1, c2) = (j0.transpose() * v1, j0.transpose() * v2);
        let iso = self.connection_frame(q)?.isotropy_dim();
        let d12 = self.connection_derivative(q, &c1, &c2, iso)?;
        let d21 = self.connection_derivative(q, &c2, &c1, iso)?;
        Ok(AlgebraElement::new(d12 - d21))
    }

    /// Mechanical curvature `Curv(v1, v2) = dA(v1, v2) - [A v1, A v2]`.
    pub fn curvature(&self, q: &DVector<f64>, v1: &DVector<f64>, v2: &DVector<f64>) -> Result<AlgebraElement> {
        let da = self.connection_differential(q, v1, v2)?;
        let frame = self.connection_frame(q)?;
        let br = self.algebra().bracket(&frame.apply(v1), &frame.apply(v2));
        Ok(da - br)
    }

    /// `<lambda, Curv(C w1, C w2)>` at `s(x)`.
    pub fn reduced_curvature_pairing(
        &self,
        x: &DVector<f64>,
        w1: &DVector<f64>,
        w2: &DVector<f64>,
        lambda: &CoAlgebraElement,
    ) -> Result<f64> {
        if lambda.max_abs() == 0.0 {
            return Ok(0.0);
        }
        let frame = self.horizontal_frame(x)?;
        let curv = self.curvature(&frame.q, &frame.lift(w1), &frame.lift(w2))?;
        Ok(self.algebra().pair(lambda, &curv))
    }

    /// Matrix `F_ij = <lambda, Curv(C e_i, C e_j)>` at `s(x)`.
    pub fn reduced_curvature_form(&self, x: &DVector<f64>, lambda: &CoAlgebraElement) -> Result<DMatrix<f64>> {
        let b = self.base_dim();
        let mut f = DMatrix::zeros(b, b);
        if lambda.max_abs() == 0.0 {
            return Ok(f);
        }
        let frame = self.horizontal_frame(x)?;
        for i in 0..b {
            for j in (i + 1)..b {
                let curv = self.curvature(
                    &frame.q,
                    &frame.lifts.column(i).into_owned(),
                    &frame.lifts.column(j).into_owned(),
                )?;
                let v = self.algebra().pair(lambda, &curv);
                f[(i, j)] = v;
                f[(j, i)] = -v;
            }
        }
        Ok(f)
    }

    /// `B_(q, lambda)(v, lambda_dot) = <lambda, A_q(v)>`.
    pub fn b_form(&self, q: &DVector<f64>, lambda: &CoAlgebraElement, xi: &ProductTangent) -> Result<f64> {
        Ok(self.algebra().pair(lambda, &self.connection(q, &xi.v)?))
    }

    /// Explicit `dB = <lambda, Curv(v1, v2)> + <lambda, [Z1, Z2]> - <l2, Z1> + <l1, Z2>`
    /// with `Z_i = A_q(v_i)`.
    pub fn db_form(
        &self,
        q: &DVector<f64>,
        lambda: &CoAlgebraElement,
        xi1: &ProductTangent,
        xi2: &ProductTangent,
    ) -> Result<f64> {
        let g = self.algebra();
        let frame = self.connection_frame(q)?;
        let (z1, z2) = (frame.apply(&xi1.v), frame.apply(&xi2.v));
        let curv = self.curvature(q, &xi1.v, &xi2.v)?;
        Ok(g.pair(lambda, &curv) + g.pair(lambda, &g.bracket(&z1, &z2)) - g.pair(&xi2.lambda_dot, &z1)
            + g.pair(&xi1.lambda_dot, &z2))
    }

    /// The same exterior derivative written for orbit-tangent covector
    /// increments `lambda_dot_i = ad*(X_i) lambda`:
    /// `<lambda, Curv> + <lambda, [Z1, Z2]> + <lambda, [X2, Z1]> - <lambda, [X1, Z2]>`.
    pub fn db_form_orbit(
        &self,
        q: &DVector<f64>,
        lambda: &CoAlgebraElement,
        v1: &DVector<f64>,
        x1: &AlgebraElement,
        v2: &DVector<f64>,
        x2: &AlgebraElement,
    ) -> Result<f64> {
        let g = self.algebra();
        let frame = self.connection_frame(q)?;
        let (z1, z2) = (frame.apply(v1), frame.apply(v2));
        let curv = self.curvature(q, v1, v2)?;
        Ok(g.pair(lambda, &curv) + g.pair(lambda, &g.bracket(&z1, &z2)) + g.pair(lambda, &g.bracket(x2, &z1))
            - g.pair(lambda, &g.bracket(x1, &z2)))
    }

    /// Exterior derivative of `B` by finite differences on the coordinate
    /// fields `(J(u) c_i, l_i)` of `Q x k*`, whose Lie bracket vanishes.
    pub fn db_form_fd(
        &self,
        q: &DVector<f64>,
        lambda: &CoAlgebraElement,
        xi1: &ProductTangent,
        xi2: &ProductTangent,
    ) -> Result<f64> {
        self.check_tangent(q, &xi1.v)?;
        self.check_tangent(q, &xi2.v)?;
        let chart = self.embedding().chart_at(q);
        let j0 = chart.jacobian(&DVector::zeros(chart.dim()));
        let c = [j0.transpose() * &xi1.v, j0.transpose() * &xi2.v];
        let l = [&xi1.lambda_dot, &xi2.lambda_dot];
        let iso = self.connection_frame(q)?.isotropy_dim();
        let g = self.algebra();
        // Directional derivative along field a of B(field b).
        let directional = |a: usize, b: usize| -> Result<f64> {
            let scale = c[a].norm() + l[a].coeffs.norm();
            if scale == 0.0 {
                return Ok(0.0);
            }
            let h = linalg::fd_step(0.0) * (1.0 + q.norm()) / scale;
            linalg::richardson_scalar(
                |t| {
                    let lam = CoAlgebraElement::new(&lambda.coeffs + &l[a].coeffs * t);
                    let a_val = self.connection_along(&chart, iso, &c[a], &c[b], t)?;
                    Ok(g.pair(&lam, &AlgebraElement::new(a_val)))
                },
                h,
            )
        };
        Ok(directional(0, 1)? - directional(1, 0)?)
    }
}
