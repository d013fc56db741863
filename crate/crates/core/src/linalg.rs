//! Dense linear-algebra helpers shared by every module: rank decisions,
//! kernels, and finite-difference derivatives.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;

/// Relative singular-value threshold used for every rank/kernel decision.
pub const RANK_RTOL: f64 = 1e-9;

/// Singular values below `RANK_ATOL` are treated as zero even for a
/// matrix whose largest singular value is itself tiny.
pub const RANK_ATOL: f64 = 1e-13;

/// Outcome of a thresholded singular value decomposition of a map
/// `R^n -> R^r` stored as an `r x n` matrix.
#[derive(Debug, Clone)]
pub struct RankSplit {
    /// Singular values in descending order (length `n`, zero padded).
    pub singular_values: Vec<f64>,
    pub rank: usize,
    /// Orthonormal basis of the row space (n x rank).
    pub row_space: DMatrix<f64>,
    /// Orthonormal basis of the kernel (n x (n - rank)).
    pub kernel: DMatrix<f64>,
    /// Orthonormal basis of the column space (r x rank).
    pub col_space: DMatrix<f64>,
}

impl RankSplit {
    /// Smallest retained singular value divided by the largest one.
    pub fn retained_margin(&self) -> f64 {
        let top = self.singular_values.first().copied().unwrap_or(0.0);
        if self.rank == 0 || top == 0.0 {
            return 1.0;
        }
        self.singular_values[self.rank - 1] / top
    }

    /// Largest discarded singular value divided by the largest one.
    pub fn discarded_ratio(&self) -> f64 {
        let top = self.singular_values.first().copied().unwrap_or(0.0);
        if self.rank >= self.singular_values.len() || top == 0.0 {
            return 0.0;
        }
        self.singular_values[self.rank] / top
    }
}

/// Thresholded SVD with threshold `RANK_RTOL * sigma_max`.
pub fn rank_split(m: &DMatrix<f64>) -> RankSplit {
    let (r, n) = m.shape();
    if n == 0 {
        return RankSplit {
            singular_values: vec![],
            rank: 0,
            row_space: DMatrix::zeros(0, 0),
            kernel: DMatrix::zeros(0, 0),
            col_space: DMatrix::zeros(r, 0),
        };
    }
    if !m.iter().all(|v| v.is_finite()) {
        return RankSplit {
            singular_values: vec![f64::NAN; r.min(n)],
            rank: 0,
            row_space: DMatrix::zeros(n, 0),
            kernel: DMatrix::identity(n, n),
            col_space: DMatrix::zeros(r, 0),
        };
    }
    // faer's bidiagonal iteration can fail to converge on entries many
    // orders below the rest; flushing them moves singular values by far
    // less than the rank threshold.
    let scale = m.amax();
    let (u, v, sv) = faer_svd(m, scale * f64::EPSILON * 1e-2)
        .or_else(|| faer_svd(&m.transpose(), scale * f64::EPSILON * 1e-2).map(|(u, v, s)| (v, u, s)))
        .or_else(|| faer_svd(m, scale * f64::EPSILON))
        .expect("SVD of a finite matrix converges");
    let top = sv.first().copied().unwrap_or(0.0);
    let tol = (RANK_RTOL * top).max(RANK_ATOL);
    let rank = sv.iter().filter(|&&s| s > tol).count();
    let row_space = v.columns(0, rank).into_owned();
    let kernel = v.columns(rank, n - rank).into_owned();
    let col_space = u.columns(0, rank).into_owned();
    RankSplit {
        singular_values: sv,
        rank,
        row_space,
        kernel,
        col_space,
    }
}

/// Full SVD `(U, V, sigma)` through faer, sigma nonincreasing. Entries
/// below `flush` are zeroed first.
fn faer_svd(m: &DMatrix<f64>, flush: f64) -> Option<(DMatrix<f64>, DMatrix<f64>, Vec<f64>)> {
    let (r, n) = m.shape();
    let fm = faer::Mat::<f64>::from_fn(r, n, |i, j| if m[(i, j)].abs() < flush { 0.0 } else { m[(i, j)] });
    let svd = fm.svd().ok()?;
    Some((
        DMatrix::from_fn(r, r, |i, j| svd.U()[(i, j)]),
        DMatrix::from_fn(n, n, |i, j| svd.V()[(i, j)]),
        svd.S().column_vector().iter().copied().collect(),
    ))
}

/// Minimum-norm least-squares solution of `m y = rhs` on the retained
/// singular directions.
pub fn pseudo_solve(m: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    let split = rank_split(m);
    let mut coeffs = split.col_space.transpose() * rhs;
    for (c, s) in coeffs.iter_mut().zip(&split.singular_values) {
        *c /= s;
    }
    split.row_space * coeffs
}

/// Orthonormal basis of the column span of `m`.
pub fn column_basis(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.ncols() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    rank_split(m).col_space
}

/// Orthonormal basis of the orthogonal complement of the column span of an
/// orthonormal `basis` inside `R^n`.
pub fn complement_basis(basis: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    if basis.ncols() == 0 {
        return DMatrix::identity(n, n);
    }
    rank_split(&basis.transpose()).kernel
}

/// Hermitian-part residual `max |a_ij + a_ji|`.
pub fn antisymmetry_residual(m: &DMatrix<f64>) -> f64 {
    (m + m.transpose()).amax()
}

/// Finite-difference step for one Richardson level of central differences.
///
/// Richardson extrapolation makes the truncation error fourth order, so the
/// step balancing truncation against roundoff scales as `eps^(1/5)`.
pub fn fd_step(scale: f64) -> f64 {
    f64::EPSILON.powf(0.2) * (1.0 + scale.abs())
}

/// Derivative at zero of a vector valued curve, central differences with
/// one level of Richardson extrapolation.
pub fn richardson_derivative<F>(mut f: F, h: f64) -> Result<DVector<f64>>
where
    F: FnMut(f64) -> Result<DVector<f64>>,
{
    let d_h = (f(h)? - f(-h)?) / (2.0 * h);
    let half = 0.5 * h;
    let d_half = (f(half)? - f(-half)?) / (2.0 * half);
    Ok((d_half * 4.0 - d_h) / 3.0)
}

/// Scalar version of [`richardson_derivative`].
pub fn richardson_scalar<F>(mut f: F, h: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let d_h = (f(h)? - f(-h)?) / (2.0 * h);
    let half = 0.5 * h;
    let d_half = (f(half)? - f(-half)?) / (2.0 * half);
    Ok((4.0 * d_half - d_h) / 3.0)
}

/// Gradient of a scalar function by Richardson-extrapolated central
/// differences, one coordinate at a time.
pub fn fd_gradient<F>(mut f: F, x: &DVector<f64>) -> Result<DVector<f64>>
where
    F: FnMut(&DVector<f64>) -> Result<f64>,
{
    let mut g = DVector::zeros(x.len());
    for i in 0..x.len() {
        let h = fd_step(x[i]);
        let mut y = x.clone();
        g[i] = richardson_scalar(
            |t| {
                y[i] = x[i] + t;
                f(&y)
            },
            h,
        )?;
    }
    Ok(g)
}

/// Jacobian (`rows(f) x len(x)`) by Richardson-extrapolated differences.
pub fn fd_jacobian<F>(mut f: F, x: &DVector<f64>) -> Result<DMatrix<f64>>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
{
    let f0 = f(x)?;
    let mut jac = DMatrix::zeros(f0.len(), x.len());
    for i in 0..x.len() {
        let h = fd_step(x[i]);
        let mut y = x.clone();
        let col = richardson_derivative(
            |t| {
                y[i] = x[i] + t;
                f(&y)
            },
            h,
        )?;
        jac.set_column(i, &col);
    }
    Ok(jac)
}

/// Solve `m a = rhs` for symmetric positive-definite `m`, returning the
/// smallest eigenvalue on failure.
pub fn spd_solve(m: &DMatrix<f64>, rhs: &DVector<f64>) -> std::result::Result<DVector<f64>, f64> {
    match m.clone().cholesky() {
        Some(ch) => Ok(ch.solve(rhs)),
        None => Err(min_symmetric_eigenvalue(m)),
    }
}

pub fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Vector from a slice.
pub fn dvec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}
