use nalgebra::DVector;
use serde::Serialize;

use super::observable::Observable;
use super::point::{WeinsteinPoint, WeinsteinTangent};
use crate::error::{Error, Result};
use crate::geometry::EquivariantManifold;
use crate::lie::CoAlgebraElement;

/// One trajectory sample.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub x: Vec<f64>,
    pub eta: Vec<f64>,
    pub lambda: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<WeinsteinPoint>,
}

impl Trajectory {
    pub fn records(&self) -> impl Iterator<Item = TrajectoryRecord> + '_ {
        self.times.iter().zip(&self.points).map(|(t, w)| TrajectoryRecord {
            t: *t,
            x: w.x.iter().copied().collect(),
            eta: w.eta.iter().copied().collect(),
            lambda: w.lambda.coeffs.iter().copied().collect(),
        })
    }

    /// `max_t |g(w_t) - g(w_0)|`.
    pub fn max_drift<G: Fn(&WeinsteinPoint) -> Result<f64>>(&self, g: G) -> Result<f64> {
        let g0 = g(&self.points[0])?;
        let mut worst: f64 = 0.0;
        for w in &self.points {
            worst = worst.max((g(w)? - g0).abs());
        }
        Ok(worst)
    }

    pub fn last(&self) -> &WeinsteinPoint {
        self.points.last().expect("trajectory is never empty")
    }
}

impl EquivariantManifold {
    fn field_or_domain_error<F: Observable + ?Sized>(
        &self,
        f: &F,
        w: &WeinsteinPoint,
        t: f64,
    ) -> Result<WeinsteinTangent> {
        if !self.in_domain(&w.x) {
            return Err(Error::StepOutOfDomain { t });
        }
        // Near the chart edge the difference stencil is what leaves first.
        self.hamiltonian_field(f, w).map_err(|e| match e {
            Error::InvalidPoint(_) | Error::FdStepFailure(_) => Error::StepOutOfDomain { t },
            e => e,
        })
    }

    /// Classical fourth-order Runge-Kutta on the reduced Hamiltonian field.
    /// `lambda` is re-projected onto `Ann h` after every step.
    pub fn integrate_flow<F: Observable + ?Sized>(
        &self,
        f: &F,
        w0: &WeinsteinPoint,
        total_time: f64,
        dt: f64,
    ) -> Result<Trajectory> {
        if !(dt > 0.0) || !(total_time >= 0.0) {
            return Err(Error::InvalidPoint(format!(
                "need dt > 0 and T >= 0, got dt = {dt}, T = {total_time}"
            )));
        }
        self.validate_point(w0)?;
        let steps = (total_time / dt).round() as usize;
        let mut times = Vec::with_capacity(steps + 1);
        let mut points = Vec::with_capacity(steps + 1);
        times.push(0.0);
        points.push(w0.clone());
        let mut w = w0.clone();
        for n in 0..steps {
            let t = n as f64 * dt;
            let k1 = self.field_or_domain_error(f, &w, t)?;
            let k2 = self.field_or_domain_error(f, &w.advanced(&k1, 0.5 * dt), t + 0.5 * dt)?;
            let k3 = self.field_or_domain_error(f, &w.advanced(&k2, 0.5 * dt), t + 0.5 * dt)?;
            let k4 = self.field_or_domain_error(f, &w.advanced(&k3, dt), t + dt)?;
            let combine = |a: &DVector<f64>, b: &DVector<f64>, c: &DVector<f64>, d: &DVector<f64>| {
                (a + b * 2.0 + c * 2.0 + d) * (dt / 6.0)
            };
            let mut next = WeinsteinPoint {
                x: &w.x + combine(&k1.x_dot, &k2.x_dot, &k3.x_dot, &k4.x_dot),
                eta: &w.eta + combine(&k1.eta_dot, &k2.eta_dot, &k3.eta_dot, &k4.eta_dot),
                lambda: CoAlgebraElement::new(
                    &w.lambda.coeffs
                        + combine(
                            &k1.lambda_dot.coeffs,
                            &k2.lambda_dot.coeffs,
                            &k3.lambda_dot.coeffs,
                            &k4.lambda_dot.coeffs,
                        ),
                ),
            };
            if !self.in_domain(&next.x) {
                return Err(Error::StepOutOfDomain { t: t + dt });
            }
            next.lambda = CoAlgebraElement::new(self.ann_h().project(&next.lambda.coeffs));
            w = next;
            times.push((n + 1) as f64 * dt);
            points.push(w.clone());
        }
        Ok(Trajectory { times, points })
    }
}
