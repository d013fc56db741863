use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, RANK_RTOL};

/// Element of the Lie algebra, stored as coefficients in the algebra basis.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    pub coeffs: DVector<f64>,
}

/// Element of the dual of the Lie algebra, stored as dual-basis
/// coefficients `lambda_i = lambda(E_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoAlgebraElement {
    pub coeffs: DVector<f64>,
}

macro_rules! vector_ops {
    ($t:ident) => {
        impl $t {
            pub fn new(coeffs: DVector<f64>) -> Self {
                Self { coeffs }
            }
            pub fn from_slice(c: &[f64]) -> Self {
                Self {
                    coeffs: DVector::from_column_slice(c),
                }
            }
            pub fn zeros(m: usize) -> Self {
                Self {
                    coeffs: DVector::zeros(m),
                }
            }
            pub fn unit(m: usize, i: usize) -> Self {
                let mut c = DVector::zeros(m);
                c[i] = 1.0;
                Self { coeffs: c }
            }
            pub fn dim(&self) -> usize {
                self.coeffs.len()
            }
            pub fn max_abs(&self) -> f64 {
                self.coeffs.amax()
            }
        }
        impl Add for $t {
            type Output = $t;
            fn add(self, rhs: $t) -> $t {
                $t::new(self.coeffs + rhs.coeffs)
            }
        }
        impl<'a> Add<&'a $t> for &'a $t {
            type Output = $t;
            fn add(self, rhs: &$t) -> $t {
                $t::new(&self.coeffs + &rhs.coeffs)
            }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, rhs: $t) -> $t {
                $t::new(self.coeffs - rhs.coeffs)
            }
        }
        impl<'a> Sub<&'a $t> for &'a $t {
            type Output = $t;
            fn sub(self, rhs: &$t) -> $t {
                $t::new(&self.coeffs - &rhs.coeffs)
            }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                $t::new(-self.coeffs)
            }
        }
        impl Mul<f64> for $t {
            type Output = $t;
            fn mul(self, s: f64) -> $t {
                $t::new(self.coeffs * s)
            }
        }
        impl Mul<f64> for &$t {
            type Output = $t;
            fn mul(self, s: f64) -> $t {
                $t::new(&self.coeffs * s)
            }
        }
    };
}

vector_ops!(AlgebraElement);
vector_ops!(CoAlgebraElement);

/// A real matrix Lie algebra with an Ad-invariant inner product.
#[derive(Debug, Clone)]
pub struct MatrixLieAlgebra {
    n: usize,
    basis: Vec<DMatrix<f64>>,
    gram: DMatrix<f64>,
    gram_inv: DMatrix<f64>,
    /// `L^T` for `gram = L L^T`; maps coefficients to Euclidean coordinates.
    whiten: DMatrix<f64>,
    unwhiten: DMatrix<f64>,
    /// Flattened (row-major) basis matrices as columns, `n^2 x m`.
    flat: DMatrix<f64>,
    /// Left inverse of `flat`.
    expand: DMatrix<f64>,
    /// `ad[i]` is the matrix of `ad(E_i)` acting on coefficients.
    ad: Vec<DMatrix<f64>>,
}

/// JSON form of an algebra definition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgebraSpec {
    pub ambient_dim: usize,
    pub basis: Vec<MatrixEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<Vec<Vec<f64>>>,
}

/// A basis matrix, either flat row-major or as nested rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixEntry {
    Flat(Vec<f64>),
    Rows(Vec<Vec<f64>>),
}

impl MatrixEntry {
    fn to_matrix(&self, n: usize) -> Result<DMatrix<f64>> {
        let flat: Vec<f64> = match self {
            MatrixEntry::Flat(v) => v.clone(),
            MatrixEntry::Rows(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::InvalidAlgebra(format!("basis matrix is not {n}x{n}")));
                }
                rows.iter().flatten().copied().collect()
            }
        };
        if flat.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: flat.len(),
                context: "flattened basis matrix",
            });
        }
        Ok(DMatrix::from_row_slice(n, n, &flat))
    }
}

fn flatten_row_major(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(m.len(), m.transpose().iter().copied())
}

impl MatrixLieAlgebra {
    /// Build an algebra from basis matrices. Without a `gram`, the trace
    /// form `-1/2 tr(XY)` is used.
    pub fn new(n: usize, basis: Vec<DMatrix<f64>>, gram: Option<DMatrix<f64>>) -> Result<Self> {
        let m = basis.len();
        if m == 0 {
            return Err(Error::InvalidAlgebra("empty basis".into()));
        }
        for b in &basis {
            if b.shape() != (n, n) {
                return Err(Error::InvalidAlgebra(format!("basis matrix is not {n}x{n}")));
            }
        }
        let mut flat = DMatrix::zeros(n * n, m);
        for (j, b) in basis.iter().enumerate() {
            flat.set_column(j, &flatten_row_major(b));
        }
        let split = linalg::rank_split(&flat);
        if split.rank < m {
            return Err(Error::InvalidAlgebra("basis matrices are linearly dependent".into()));
        }
        let normal = flat.transpose() * &flat;
        let expand = normal
            .try_inverse()
            .ok_or_else(|| Error::InvalidAlgebra("singular basis".into()))?
            * flat.transpose();

        let gram = match gram {
            Some(g) => g,
            None => DMatrix::from_fn(m, m, |i, j| -0.5 * (&basis[i] * &basis[j]).trace()),
        };
        if gram.shape() != (m, m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: gram.nrows(),
                context: "gram matrix",
            });
        }
        if linalg::antisymmetry_residual(&(&gram - gram.transpose())) > 1e-12 * (1.0 + gram.amax())
            || (&gram - gram.transpose()).amax() > 1e-12 * (1.0 + gram.amax())
        {
            return Err(Error::InvalidAlgebra("gram is not symmetric".into()));
        }
        let chol = gram
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidAlgebra("gram is not positive definite".into()))?;
        let l = chol.l();
        let whiten = l.transpose();
        let unwhiten = whiten
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidAlgebra("gram factor is singular".into()))?;
        let gram_inv = chol.inverse();

        let mut alg = MatrixLieAlgebra {
            n,
            basis,
            gram,
            gram_inv,
            whiten,
            unwhiten,
            flat,
            expand,
            ad: Vec::new(),
        };

        // Structure constants, with the closure check.
        let mut ad = vec![DMatrix::zeros(m, m); m];
        for i in 0..m {
            for j in 0..m {
                let c = &alg.basis[i] * &alg.basis[j] - &alg.basis[j] * &alg.basis[i];
                let coeffs = alg.expand_matrix(&c)?;
                ad[i].set_column(j, &coeffs.coeffs);
            }
        }
        alg.ad = ad;

        let residual = alg.invariance_residual();
        if residual > 1e-9 * (1.0 + alg.gram.amax()) {
            return Err(Error::InvalidAlgebra(format!(
                "inner product is not Ad-invariant (residual {residual:.3e})"
            )));
        }
        Ok(alg)
    }

    /// `so(n)` with basis `E_ij = e_i e_j^T - e_j e_i^T`, `i < j`, in
    /// lexicographic order, and the unit-norm trace form.
    pub fn so(n: usize) -> Self {
        let mut basis = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let mut e = DMatrix::zeros(n, n);
                e[(i, j)] = 1.0;
                e[(j, i)] = -1.0;
                basis.push(e);
            }
        }
        Self::new(n, basis, None).expect("so(n) is a valid algebra")
    }

    /// `so(3)` with the physics basis `L_x, L_y, L_z`, `[L_x, L_y] = L_z`.
    pub fn so3() -> Self {
        let lx = DMatrix::from_row_slice(3, 3, &[0., 0., 0., 0., 0., -1., 0., 1., 0.]);
        let ly = DMatrix::from_row_slice(3, 3, &[0., 0., 1., 0., 0., 0., -1., 0., 0.]);
        let lz = DMatrix::from_row_slice(3, 3, &[0., -1., 0., 1., 0., 0., 0., 0., 0.]);
        Self::new(3, vec![lx, ly, lz], None).expect("so(3) is a valid algebra")
    }

    /// `u(1) = so(2)` with generator `[[0,-1],[1,0]]`.
    pub fn u1() -> Self {
        let j = DMatrix::from_row_slice(2, 2, &[0., -1., 1., 0.]);
        Self::new(2, vec![j], None).expect("u(1) is a valid algebra")
    }

    pub fn from_spec(spec: &AlgebraSpec) -> Result<Self> {
        let n = spec.ambient_dim;
        let basis = spec
            .basis
            .iter()
            .map(|b| b.to_matrix(n))
            .collect::<Result<Vec<_>>>()?;
        let gram = match &spec.gram {
            Some(rows) => {
                let m = rows.len();
                if rows.iter().any(|r| r.len() != m) {
                    return Err(Error::InvalidAlgebra("gram is not square".into()));
                }
                Some(DMatrix::from_row_slice(
                    m,
                    m,
                    &rows.iter().flatten().copied().collect::<Vec<_>>(),
                ))
            }
            None => None,
        };
        Self::new(n, basis, gram)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: AlgebraSpec = serde_json::from_str(text)?;
        Self::from_spec(&spec)
    }

    pub fn to_spec(&self) -> AlgebraSpec {
        AlgebraSpec {
            ambient_dim: self.n,
            basis: self
                .basis
                .iter()
                .map(|b| MatrixEntry::Flat(flatten_row_major(b).iter().copied().collect()))
                .collect(),
            gram: Some(
                (0..self.dim())
                    .map(|i| self.gram.row(i).iter().copied().collect())
                    .collect(),
            ),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &[DMatrix<f64>] {
        &self.basis
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn gram_inverse(&self) -> &DMatrix<f64> {
        &self.gram_inv
    }

    /// Coefficients to Euclidean (whitened) coordinates.
    pub fn whiten(&self) -> &DMatrix<f64> {
        &self.whiten
    }

    pub fn unwhiten(&self) -> &DMatrix<f64> {
        &self.unwhiten
    }

    pub fn basis_element(&self, i: usize) -> AlgebraElement {
        AlgebraElement::unit(self.dim(), i)
    }

    /// Matrix form `sum_i X_i E_i`.
    pub fn matrix_of(&self, x: &AlgebraElement) -> DMatrix<f64> {
        let flat = &self.flat * &x.coeffs;
        DMatrix::from_row_slice(self.n, self.n, flat.as_slice())
    }

    /// Expand an `n x n` matrix in the basis, failing if it is not in the span.
    pub fn expand_matrix(&self, m: &DMatrix<f64>) -> Result<AlgebraElement> {
        let f = flatten_row_major(m);
        let c = &self.expand * &f;
        let residual = (&self.flat * &c - &f).amax();
        if residual > RANK_RTOL * (1.0 + f.amax()) {
            return Err(Error::ClosureViolation { residual });
        }
        Ok(AlgebraElement::new(c))
    }

    /// `ad(X)` as an `m x m` matrix acting on coefficients.
    pub fn ad_matrix(&self, x: &AlgebraElement) -> DMatrix<f64> {
        let m = self.dim();
        let mut out = DMatrix::zeros(m, m);
        for (i, a) in self.ad.iter().enumerate() {
            if x.coeffs[i] != 0.0 {
                out += a * x.coeffs[i];
            }
        }
        out
    }

    /// `[X, Y]` from the structure constants.
    pub fn bracket(&self, x: &AlgebraElement, y: &AlgebraElement) -> AlgebraElement {
        AlgebraElement::new(self.ad_matrix(x) * &y.coeffs)
    }

    /// `[X, Y]` as a matrix commutator expanded back into the basis.
    pub fn bracket_checked(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
        let (a, b) = (self.matrix_of(x), self.matrix_of(y));
        self.expand_matrix(&(&a * &b - &b * &a))
    }

    /// `ad*(X) lambda = -lambda o ad(X)`.
    pub fn ad_star(&self, x: &AlgebraElement, lambda: &CoAlgebraElement) -> CoAlgebraElement {
        CoAlgebraElement::new(-(self.ad_matrix(x).transpose() * &lambda.coeffs))
    }

    /// The linear map `X -> ad*(X) lambda` as an `m x m` matrix.
    pub fn coadjoint_orbit_map(&self, lambda: &CoAlgebraElement) -> DMatrix<f64> {
        let m = self.dim();
        let mut out = DMatrix::zeros(m, m);
        for i in 0..m {
            let col = self.ad_star(&self.basis_element(i), lambda);
            out.set_column(i, &col.coeffs);
        }
        out
    }

    /// Natural pairing `<lambda, X>`.
    pub fn pair(&self, lambda: &CoAlgebraElement, x: &AlgebraElement) -> f64 {
        lambda.coeffs.dot(&x.coeffs)
    }

    pub fn inner(&self, x: &AlgebraElement, y: &AlgebraElement) -> f64 {
        (&self.gram * &x.coeffs).dot(&y.coeffs)
    }

    pub fn norm(&self, x: &AlgebraElement) -> f64 {
        self.inner(x, x).max(0.0).sqrt()
    }

    /// Inner product on the dual induced by the gram.
    pub fn dual_inner(&self, a: &CoAlgebraElement, b: &CoAlgebraElement) -> f64 {
        (&self.gram_inv * &a.coeffs).dot(&b.coeffs)
    }

    pub fn dual_norm(&self, a: &CoAlgebraElement) -> f64 {
        self.dual_inner(a, a).max(0.0).sqrt()
    }

    /// Riesz map `k -> k*`.
    pub fn flat(&self, x: &AlgebraElement) -> CoAlgebraElement {
        CoAlgebraElement::new(&self.gram * &x.coeffs)
    }

    /// Riesz map `k* -> k`.
    pub fn sharp(&self, lambda: &CoAlgebraElement) -> AlgebraElement {
        AlgebraElement::new(&self.gram_inv * &lambda.coeffs)
    }

    /// Largest violation of Ad-invariance of the gram over basis triples.
    pub fn invariance_residual(&self) -> f64 {
        self.ad
            .iter()
            .map(|a| (a.transpose() * &self.gram + &self.gram * a).amax())
            .fold(0.0, f64::max)
    }

    /// Largest closure residual over basis pairs.
    pub fn closure_residual(&self) -> f64 {
        let m = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let c = &self.basis[i] * &self.basis[j] - &self.basis[j] * &self.basis[i];
                let f = flatten_row_major(&c);
                let coeff = &self.expand * &f;
                worst = worst.max((&self.flat * coeff - f).amax());
            }
        }
        worst
    }

    /// `|[X,[Y,Z]] + [Y,[Z,X]] + [Z,[X,Y]]|`.
    pub fn jacobi_residual(&self, x: &AlgebraElement, y: &AlgebraElement, z: &AlgebraElement) -> f64 {
        let a = self.bracket(x, &self.bracket(y, z));
        let b = self.bracket(y, &self.bracket(z, x));
        let c = self.bracket(z, &self.bracket(x, y));
        (a + b + c).max_abs()
    }
}
