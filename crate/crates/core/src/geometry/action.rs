use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lie::{AlgebraElement, MatrixLieAlgebra, Subspace};

/// How the group acts on the ambient space `R^N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepKind {
    /// `k . q = k q` on `R^n`.
    Defining,
    /// `k` acting on each of `copies` stacked blocks of `R^n`.
    Diagonal { copies: usize },
    /// `k . Q = k Q k^T` on `n x n` matrices flattened row-major.
    Conjugation,
}

/// Linear orthogonal action of a matrix group on `R^N`.
#[derive(Debug, Clone)]
pub struct LinearAction {
    algebra: MatrixLieAlgebra,
    kind: RepKind,
    rep: Vec<DMatrix<f64>>,
}

fn block_diag(m: &DMatrix<f64>, copies: usize) -> DMatrix<f64> {
    let n = m.nrows();
    let mut out = DMatrix::zeros(n * copies, n * copies);
    for c in 0..copies {
        out.view_mut((c * n, c * n), (n, n)).copy_from(m);
    }
    out
}

impl LinearAction {
    pub fn new(algebra: MatrixLieAlgebra, kind: RepKind) -> Result<Self> {
        let n = algebra.ambient_dim();
        let rep = algebra
            .basis()
            .iter()
            .map(|e| match kind {
                RepKind::Defining => e.clone(),
                RepKind::Diagonal { copies } => block_diag(e, copies),
                RepKind::Conjugation => {
                    let eye = DMatrix::<f64>::identity(n, n);
                    e.kronecker(&eye) + eye.kronecker(e)
                }
            })
            .collect();
        let action = Self { algebra, kind, rep };
        action.validate()?;
        Ok(action)
    }

    fn validate(&self) -> Result<()> {
        for (i, r) in self.rep.iter().enumerate() {
            let skew = (r + r.transpose()).amax();
            if skew > 1e-12 {
                return Err(Error::InvalidAction(format!(
                    "generator {i} is not antisymmetric (residual {skew:.3e})"
                )));
            }
        }
        let m = self.algebra.dim();
        for i in 0..m {
            for j in 0..m {
                let lhs = &self.rep[i] * &self.rep[j] - &self.rep[j] * &self.rep[i];
                let br = self
                    .algebra
                    .bracket(&self.algebra.basis_element(i), &self.algebra.basis_element(j));
                let residual = (lhs - self.rep_of(&br)).amax();
                if residual > 1e-10 {
                    return Err(Error::InvalidAction(format!(
                        "representation is not a homomorphism on ({i},{j}) (residual {residual:.3e})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn algebra(&self) -> &MatrixLieAlgebra {
        &self.algebra
    }

    pub fn kind(&self) -> RepKind {
        self.kind
    }

    pub fn ambient_dim(&self) -> usize {
        self.rep[0].nrows()
    }

    /// Infinitesimal generator matrix of basis element `i`.
    pub fn generator(&self, i: usize) -> &DMatrix<f64> {
        &self.rep[i]
    }

    pub fn rep_of(&self, x: &AlgebraElement) -> DMatrix<f64> {
        let n = self.ambient_dim();
        let mut out = DMatrix::zeros(n, n);
        for (r, c) in self.rep.iter().zip(x.coeffs.iter()) {
            if *c != 0.0 {
                out += r * *c;
            }
        }
        out
    }

    /// Ambient matrix of the group element `k` (an `n x n` matrix).
    pub fn group_matrix(&self, k: &DMatrix<f64>) -> DMatrix<f64> {
        match self.kind {
            RepKind::Defining => k.clone(),
            RepKind::Diagonal { copies } => block_diag(k, copies),
            RepKind::Conjugation => k.kronecker(k),
        }
    }

    pub fn act(&self, k: &DMatrix<f64>, q: &DVector<f64>) -> DVector<f64> {
        self.group_matrix(k) * q
    }

    /// `zeta_X(q) = d/dt exp(tX) . q` at `t = 0`.
    pub fn fundamental_field(&self, x: &AlgebraElement, q: &DVector<f64>) -> DVector<f64> {
        self.rep_of(x) * q
    }

    /// Columns `zeta_{E_i}(q)`, an `N x m` matrix.
    pub fn zeta_matrix(&self, q: &DVector<f64>) -> DMatrix<f64> {
        let mut z = DMatrix::zeros(q.len(), self.rep.len());
        for (i, r) in self.rep.iter().enumerate() {
            z.set_column(i, &(r * q));
        }
        z
    }

    /// `k_q`, the kernel of `X -> zeta_X(q)`.
    pub fn isotropy_algebra(&self, q: &DVector<f64>) -> Subspace {
        Subspace::kernel(self.algebra.algebra_metric(), &self.zeta_matrix(q))
    }
}
