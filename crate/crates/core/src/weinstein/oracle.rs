//! Ground truth on `T*Q`: observables are lifted to invariant functions
//! `F(q, p) = f(from_cotangent(q, p))` and bracketed canonically in chart
//! coordinates `(u, pi)` with `pi = J(u)^T p`.

use nalgebra::DVector;

use super::observable::Observable;
use super::point::{WeinsteinPoint, WeinsteinTangent};
use crate::error::Result;
use crate::geometry::{Chart, EquivariantManifold};
use crate::lie::CoAlgebraElement;
use crate::linalg;

/// Gradient of a lifted observable in chart cotangent coordinates.
#[derive(Debug, Clone)]
pub struct UpstairsGradient {
    pub du: DVector<f64>,
    pub dpi: DVector<f64>,
}

struct Lift<'a> {
    space: &'a EquivariantManifold,
    chart: Chart,
    pi0: DVector<f64>,
}

impl Lift<'_> {
    /// Ambient `(q, p)` for chart coordinates `(u, pi)`.
    fn cotangent(&self, u: &DVector<f64>, pi: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
        let q = self.chart.point(u);
        let j = self.chart.jacobian(u);
        let metric = j.transpose() * &j;
        let coeffs = metric
            .cholesky()
            .ok_or(crate::error::Error::FdStepFailure("chart Jacobian degenerate".into()))?
            .solve(pi);
        Ok((q, j * coeffs))
    }

    fn reduced(&self, z: &DVector<f64>) -> Result<WeinsteinPoint> {
        let d = self.chart.dim();
        let (q, p) = self.cotangent(&z.rows(0, d).into_owned(), &z.rows(d, d).into_owned())?;
        self.space.from_cotangent(&q, &p)
    }

    fn z0(&self) -> DVector<f64> {
        let d = self.chart.dim();
        let mut z = DVector::zeros(2 * d);
        z.rows_mut(d, d).copy_from(&self.pi0);
        z
    }

    fn gradient<F: Observable + ?Sized>(&self, f: &F) -> Result<UpstairsGradient> {
        let d = self.chart.dim();
        let g = linalg::fd_gradient(|z| f.value(self.space, &self.reduced(z)?), &self.z0())?;
        Ok(UpstairsGradient {
            du: g.rows(0, d).into_owned(),
            dpi: g.rows(d, d).into_owned(),
        })
    }
}

impl EquivariantManifold {
    fn lift_at(&self, w: &WeinsteinPoint) -> Result<Lift<'_>> {
        let cv = self.to_cotangent(w)?;
        let chart = self.embedding().chart_at(&cv.q);
        let j0 = chart.jacobian(&DVector::zeros(chart.dim()));
        let pi0 = j0.transpose() * &cv.p;
        Ok(Lift {
            space: self,
            chart,
            pi0,
        })
    }

    /// Gradient of `f o from_cotangent` at `to_cotangent(w)`.
    pub fn upstairs_gradient<F: Observable + ?Sized>(&self, f: &F, w: &WeinsteinPoint) -> Result<UpstairsGradient> {
        self.lift_at(w)?.gradient(f)
    }

    /// Canonical bracket `{F, G} = F_u . G_pi - F_pi . G_u` on `T*Q`.
    pub fn oracle_bracket<F, G>(&self, f: &F, g: &G, w: &WeinsteinPoint) -> Result<f64>
    where
        F: Observable + ?Sized,
        G: Observable + ?Sized,
    {
        let lift = self.lift_at(w)?;
        let df = lift.gradient(f)?;
        let dg = lift.gradient(g)?;
        Ok(df.du.dot(&dg.dpi) - df.dpi.dot(&dg.du))
    }

    /// Push the canonical Hamiltonian field `u_dot = F_pi`, `pi_dot = -F_u`
    /// of the lifted observable through `from_cotangent`.
    pub fn upstairs_field_projection<F: Observable + ?Sized>(
        &self,
        f: &F,
        w: &WeinsteinPoint,
    ) -> Result<WeinsteinTangent> {
        let lift = self.lift_at(w)?;
        let grad = lift.gradient(f)?;
        let d = lift.chart.dim();
        let mut dir = DVector::zeros(2 * d);
        dir.rows_mut(0, d).copy_from(&grad.dpi);
        dir.rows_mut(d, d).copy_from(&(-&grad.du));
        self.project_upstairs_direction(&lift, &dir)
    }

    /// Project an explicit ambient field `(q_dot, p_dot)` at
    /// `to_cotangent(w)` through `from_cotangent`.
    pub fn project_ambient_field(
        &self,
        w: &WeinsteinPoint,
        q_dot: &DVector<f64>,
        p_dot: &DVector<f64>,
    ) -> Result<WeinsteinTangent> {
        let cv = self.to_cotangent(w)?;
        let b = self.base_dim();
        let curve = |t: f64| -> Result<DVector<f64>> {
            let q = &cv.q + q_dot * t;
            let p = &cv.p + p_dot * t;
            let r = self.from_cotangent(&q, &p)?;
            Ok(stack_point(&r))
        };
        let h = linalg::fd_step(0.0) / (1.0 + q_dot.norm() + p_dot.norm());
        let v = linalg::richardson_derivative(curve, h)?;
        Ok(unstack_tangent(&v, b))
    }

    fn project_upstairs_direction(&self, lift: &Lift<'_>, dir: &DVector<f64>) -> Result<WeinsteinTangent> {
        let z0 = lift.z0();
        let b = self.base_dim();
        let curve = |t: f64| -> Result<DVector<f64>> { Ok(stack_point(&lift.reduced(&(&z0 + dir * t))?)) };
        let h = linalg::fd_step(0.0) / (1.0 + dir.norm());
        let v = linalg::richardson_derivative(curve, h)?;
        Ok(unstack_tangent(&v, b))
    }
}

fn stack_point(w: &WeinsteinPoint) -> DVector<f64> {
    let (b, m) = (w.x.len(), w.lambda.dim());
    let mut v = DVector::zeros(2 * b + m);
    v.rows_mut(0, b).copy_from(&w.x);
    v.rows_mut(b, b).copy_from(&w.eta);
    v.rows_mut(2 * b, m).copy_from(&w.lambda.coeffs);
    v
}

fn unstack_tangent(v: &DVector<f64>, b: usize) -> WeinsteinTangent {
    let m = v.len() - 2 * b;
    WeinsteinTangent {
        x_dot: v.rows(0, b).into_owned(),
        eta_dot: v.rows(b, b).into_owned(),
        lambda_dot: CoAlgebraElement::new(v.rows(2 * b, m).into_owned()),
    }
}
