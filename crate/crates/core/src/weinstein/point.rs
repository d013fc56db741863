use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::EquivariantManifold;
use crate::lie::CoAlgebraElement;

/// Relative tolerance for `lambda` lying in `Ann h`.
pub const ANN_H_TOL: f64 = 1e-10;

/// A point `(x, eta, lambda)` of the Weinstein space in section coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct WeinsteinPoint {
    pub x: DVector<f64>,
    pub eta: DVector<f64>,
    pub lambda: CoAlgebraElement,
}

/// A tangent vector `(x_dot, eta_dot, lambda_dot)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeinsteinTangent {
    pub x_dot: DVector<f64>,
    pub eta_dot: DVector<f64>,
    pub lambda_dot: CoAlgebraElement,
}

/// A covector on `Q` stored as its ambient Riesz vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CotangentVector {
    pub q: DVector<f64>,
    pub p: DVector<f64>,
}

/// JSON form `{"x": [...], "eta": [...], "lambda": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointRecord {
    pub x: Vec<f64>,
    pub eta: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl WeinsteinPoint {
    pub fn new(x: DVector<f64>, eta: DVector<f64>, lambda: CoAlgebraElement) -> Self {
        Self { x, eta, lambda }
    }

    pub fn from_slices(x: &[f64], eta: &[f64], lambda: &[f64]) -> Self {
        Self {
            x: DVector::from_column_slice(x),
            eta: DVector::from_column_slice(eta),
            lambda: CoAlgebraElement::from_slice(lambda),
        }
    }

    /// `self + h * t`.
    pub fn advanced(&self, t: &WeinsteinTangent, h: f64) -> WeinsteinPoint {
        WeinsteinPoint {
            x: &self.x + &t.x_dot * h,
            eta: &self.eta + &t.eta_dot * h,
            lambda: CoAlgebraElement::new(&self.lambda.coeffs + &t.lambda_dot.coeffs * h),
        }
    }

    pub fn to_record(&self) -> PointRecord {
        PointRecord {
            x: self.x.iter().copied().collect(),
            eta: self.eta.iter().copied().collect(),
            lambda: self.lambda.coeffs.iter().copied().collect(),
        }
    }

    pub fn from_record(r: &PointRecord) -> Self {
        Self::from_slices(&r.x, &r.eta, &r.lambda)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: PointRecord = serde_json::from_str(text)?;
        Ok(Self::from_record(&r))
    }
}

impl WeinsteinTangent {
    pub fn zeros(b: usize, m: usize) -> Self {
        Self {
            x_dot: DVector::zeros(b),
            eta_dot: DVector::zeros(b),
            lambda_dot: CoAlgebraElement::zeros(m),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.x_dot
            .amax()
            .max(self.eta_dot.amax())
            .max(self.lambda_dot.max_abs())
    }
}

impl EquivariantManifold {
    /// Dimension, domain and `Ann h` checks for a Weinstein point.
    pub fn validate_point(&self, w: &WeinsteinPoint) -> Result<()> {
        let b = self.base_dim();
        let m = self.algebra().dim();
        if w.x.len() != b || w.eta.len() != b {
            return Err(Error::InvalidPoint(format!(
                "expected {b} base coordinates and {b} base momenta, got {} and {}",
                w.x.len(),
                w.eta.len()
            )));
        }
        if w.lambda.dim() != m {
            return Err(Error::InvalidPoint(format!(
                "expected {m} lambda coefficients, got {}",
                w.lambda.dim()
            )));
        }
        if !self.in_domain(&w.x) {
            return Err(Error::InvalidPoint(format!(
                "x = {:?} is outside the section domain",
                w.x.as_slice()
            )));
        }
        if w.eta.iter().chain(w.lambda.coeffs.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidPoint("non-finite momentum".into()));
        }
        let residual = self.ann_h_residual(&w.lambda);
        if residual > ANN_H_TOL * (1.0 + w.lambda.coeffs.norm()) {
            return Err(Error::InvalidPoint(format!(
                "lambda does not annihilate h (residual {residual:.3e})"
            )));
        }
        Ok(())
    }

    /// `max_i |<lambda, h_i>|` over the orthonormal basis of `h`.
    pub fn ann_h_residual(&self, lambda: &CoAlgebraElement) -> f64 {
        let hb = self.h_sub().basis();
        if hb.ncols() == 0 {
            return 0.0;
        }
        (hb.transpose() * &lambda.coeffs).amax()
    }

    /// `(x, eta, lambda) -> (s(x), eta^hor + A^*(lambda))`.
    pub fn to_cotangent(&self, w: &WeinsteinPoint) -> Result<CotangentVector> {
        self.validate_point(w)?;
        let frame = self.horizontal_frame(&w.x)?;
        let coeffs = frame
            .metric
            .clone()
            .cholesky()
            .ok_or(Error::SectionDegenerate)?
            .solve(&w.eta);
        let p = frame.lift(&coeffs) + self.connection_dual(&frame.q, &w.lambda)?;
        Ok(CotangentVector { q: frame.q, p })
    }

    /// Align `(q, p)` to the section and read off `(x, eta, lambda)`.
    pub fn from_cotangent(&self, q: &DVector<f64>, p: &DVector<f64>) -> Result<WeinsteinPoint> {
        self.check_point(q)?;
        let (k, x) = self.section_model().canonicalize(q)?;
        if !self.in_domain(&x) {
            return Err(Error::CanonicalizationFailure(format!(
                "base point {:?} is outside the section domain",
                x.as_slice()
            )));
        }
        let g = self.action().group_matrix(&k);
        let q_aligned = &g * q;
        let s = self.section(&x);
        let misfit = (&q_aligned - &s).norm();
        if misfit > 1e-8 * (1.0 + s.norm()) {
            return Err(Error::CanonicalizationFailure(format!(
                "aligned point misses the section by {misfit:.3e}"
            )));
        }
        let p_aligned = &g * p;
        let frame = self.horizontal_frame(&x)?;
        let eta = frame.lifts.transpose() * &p_aligned;
        let lambda = self.momentum_map(&s, &p_aligned);
        Ok(WeinsteinPoint { x, eta, lambda })
    }
}
