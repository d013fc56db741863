//! Subspaces of a coefficient space carrying an inner product.
//!
//! A subspace is stored through an orthonormal basis in whitened
//! coordinates `y = W c`, where the inner product on coefficients is
//! `W^T W`. For the algebra `W = L^T` with `gram = L L^T`; for the dual
//! `W = L^{-1}`. With these choices the Riesz map is the identity in
//! whitened coordinates, so `h^⊥` and `Ann h` share the same `y` basis.

use nalgebra::{DMatrix, DVector};

use crate::linalg::{self, RankSplit};

/// Inner product `W^T W` on a coefficient space, with `W` invertible.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    w: DMatrix<f64>,
    w_inv: DMatrix<f64>,
}

impl Metric {
    pub fn new(w: DMatrix<f64>, w_inv: DMatrix<f64>) -> Self {
        Self { w, w_inv }
    }

    pub fn euclidean(m: usize) -> Self {
        Self {
            w: DMatrix::identity(m, m),
            w_inv: DMatrix::identity(m, m),
        }
    }

    pub fn dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn whiten(&self, c: &DVector<f64>) -> DVector<f64> {
        &self.w * c
    }

    pub fn unwhiten(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.w_inv * y
    }

    pub fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        self.whiten(a).dot(&self.whiten(b))
    }
}

/// Singular-value margins of the rank decision that produced a subspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankMargins {
    /// Smallest retained singular value over the largest.
    pub retained: f64,
    /// Largest discarded singular value over the largest.
    pub discarded: f64,
}

impl RankMargins {
    pub const EXACT: RankMargins = RankMargins {
        retained: 1.0,
        discarded: 0.0,
    };

    fn from_split(s: &RankSplit) -> Self {
        Self {
            retained: s.retained_margin(),
            discarded: s.discarded_ratio(),
        }
    }

    pub fn worst(self, other: RankMargins) -> RankMargins {
        RankMargins {
            retained: self.retained.min(other.retained),
            discarded: self.discarded.max(other.discarded),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Subspace {
    metric: Metric,
    /// Orthonormal columns in whitened coordinates.
    y: DMatrix<f64>,
    margins: RankMargins,
}

impl Subspace {
    pub fn zero(metric: Metric) -> Self {
        let m = metric.dim();
        Self {
            metric,
            y: DMatrix::zeros(m, 0),
            margins: RankMargins::EXACT,
        }
    }

    pub fn whole(metric: Metric) -> Self {
        let m = metric.dim();
        Self {
            metric,
            y: DMatrix::identity(m, m),
            margins: RankMargins::EXACT,
        }
    }

    /// Span of the coefficient columns of `vectors`.
    pub fn span(metric: Metric, vectors: &DMatrix<f64>) -> Self {
        if vectors.ncols() == 0 {
            return Self::zero(metric);
        }
        let split = linalg::rank_split(&(&metric.w * vectors));
        Self {
            margins: RankMargins::from_split(&split),
            y: split.col_space,
            metric,
        }
    }

    /// Kernel of a linear map given as a matrix acting on coefficients.
    pub fn kernel(metric: Metric, map: &DMatrix<f64>) -> Self {
        let m = metric.dim();
        if map.nrows() == 0 {
            return Self::whole(metric);
        }
        let split = linalg::rank_split(&(map * &metric.w_inv));
        debug_assert_eq!(split.kernel.nrows(), m);
        Self {
            margins: RankMargins::from_split(&split),
            y: split.kernel,
            metric,
        }
    }

    /// The same whitened subspace viewed under another metric (for example
    /// the Riesz image of `h^⊥` in the dual is `Ann h`).
    pub fn with_metric(&self, metric: Metric) -> Self {
        Self {
            metric,
            y: self.y.clone(),
            margins: self.margins,
        }
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn dim(&self) -> usize {
        self.y.ncols()
    }

    pub fn parent_dim(&self) -> usize {
        self.y.nrows()
    }

    pub fn margins(&self) -> RankMargins {
        self.margins
    }

    /// Metric-orthonormal basis as coefficient columns.
    pub fn basis(&self) -> DMatrix<f64> {
        &self.metric.w_inv * &self.y
    }

    pub fn basis_vector(&self, i: usize) -> DVector<f64> {
        &self.metric.w_inv * self.y.column(i)
    }

    /// Orthonormal basis in whitened coordinates.
    pub fn whitened(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn orthocomplement(&self) -> Subspace {
        Subspace {
            metric: self.metric.clone(),
            y: linalg::complement_basis(&self.y, self.parent_dim()),
            margins: RankMargins::EXACT,
        }
    }

    pub fn intersect(&self, other: &Subspace) -> Subspace {
        let m = self.parent_dim();
        if self.dim() == 0 || other.dim() == 0 {
            return Subspace::zero(self.metric.clone());
        }
        let eye = DMatrix::<f64>::identity(m, m);
        let p1 = &eye - &self.y * self.y.transpose();
        let p2 = &eye - &other.y * other.y.transpose();
        let mut stacked = DMatrix::zeros(2 * m, m);
        stacked.view_mut((0, 0), (m, m)).copy_from(&p1);
        stacked.view_mut((m, 0), (m, m)).copy_from(&p2);
        let split = linalg::rank_split(&stacked);
        Subspace {
            metric: self.metric.clone(),
            margins: self.margins.worst(other.margins).worst(RankMargins::from_split(&split)),
            y: split.kernel,
        }
    }

    /// Sum of two subspaces.
    pub fn join(&self, other: &Subspace) -> Subspace {
        let mut cols = DMatrix::zeros(self.parent_dim(), self.dim() + other.dim());
        cols.view_mut((0, 0), (self.parent_dim(), self.dim())).copy_from(&self.y);
        cols.view_mut((0, self.dim()), (self.parent_dim(), other.dim())).copy_from(&other.y);
        let split = linalg::rank_split(&cols);
        Subspace {
            metric: self.metric.clone(),
            margins: RankMargins::from_split(&split),
            y: split.col_space,
        }
    }

    /// Orthogonal projection of a coefficient vector.
    pub fn project(&self, c: &DVector<f64>) -> DVector<f64> {
        let y = self.metric.whiten(c);
        self.metric.unwhiten(&(&self.y * (self.y.transpose() * y)))
    }

    /// Norm of the component of `c` orthogonal to the subspace.
    pub fn distance(&self, c: &DVector<f64>) -> f64 {
        let y = self.metric.whiten(c);
        (&y - &self.y * (self.y.transpose() * &y)).norm()
    }

    /// Orthonormal coordinates of `c` in this subspace's basis.
    pub fn coordinates(&self, c: &DVector<f64>) -> DVector<f64> {
        self.y.transpose() * self.metric.whiten(c)
    }

    pub fn contains_subspace(&self, other: &Subspace) -> f64 {
        (0..other.dim())
            .map(|i| self.distance(&other.basis_vector(i)))
            .fold(0.0, f64::max)
    }

    /// Largest principal-angle residual between two subspaces of equal
    /// dimension (zero iff they coincide).
    pub fn difference(&self, other: &Subspace) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.contains_subspace(other).max(other.contains_subspace(self))
    }

    /// Vectors of this subspace annihilated by every generator, each given
    /// as a matrix acting on coefficients.
    pub fn fixed_subspace(&self, generators: &[DMatrix<f64>]) -> Subspace {
        if generators.is_empty() || self.dim() == 0 {
            return self.clone();
        }
        let b = self.basis();
        let m = self.parent_dim();
        let mut stacked = DMatrix::zeros(m * generators.len(), self.dim());
        for (i, g) in generators.iter().enumerate() {
            // Compare in whitened coordinates so the threshold is metric-aware.
            let img = &self.metric.w * (g * &b);
            stacked.view_mut((i * m, 0), (m, self.dim())).copy_from(&img);
        }
        let split = linalg::rank_split(&stacked);
        Subspace {
            metric: self.metric.clone(),
            margins: self.margins.worst(RankMargins::from_split(&split)),
            y: &self.y * split.kernel,
        }
    }
}
