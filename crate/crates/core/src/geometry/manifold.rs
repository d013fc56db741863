use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::action::LinearAction;
use crate::error::{Error, Result};
use crate::lie::{CoAlgebraElement, Subspace};
use crate::linalg;

/// Relative residual allowed for manifold membership and tangency.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

/// How `Q` sits inside `R^N`.
#[derive(Debug, Clone)]
pub enum Embedding {
    /// An open subset of the column span of an orthonormal `N x d` basis.
    Linear { basis: DMatrix<f64> },
    /// The round sphere of the given radius.
    Sphere { radius: f64 },
}

/// A chart centred at `q0` with exact Jacobian, orthonormal at `u = 0`.
#[derive(Debug, Clone)]
pub struct Chart {
    q0: DVector<f64>,
    frame: DMatrix<f64>,
    radius: Option<f64>,
}

impl Chart {
    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.q0
    }

    pub fn point(&self, u: &DVector<f64>) -> DVector<f64> {
        let y = &self.q0 + &self.frame * u;
        match self.radius {
            None => y,
            Some(r) => {
                let n = y.norm();
                y * (r / n)
            }
        }
    }

    pub fn jacobian(&self, u: &DVector<f64>) -> DMatrix<f64> {
        match self.radius {
            None => self.frame.clone(),
            Some(r) => {
                let y = &self.q0 + &self.frame * u;
                let n = y.norm();
                let yh = &y / n;
                let proj = DMatrix::<f64>::identity(y.len(), y.len()) - &yh * yh.transpose();
                proj * &self.frame * (r / n)
            }
        }
    }
}

impl Embedding {
    pub fn manifold_dim(&self, ambient: usize) -> usize {
        match self {
            Embedding::Linear { basis } => basis.ncols(),
            Embedding::Sphere { .. } => ambient - 1,
        }
    }

    pub fn residual(&self, q: &DVector<f64>) -> f64 {
        match self {
            Embedding::Linear { basis } => (q - basis * (basis.transpose() * q)).norm() / (1.0 + q.norm()),
            Embedding::Sphere { radius } => (q.norm() - radius).abs() / (1.0 + radius),
        }
    }

    /// Orthonormal basis of `T_q Q`.
    pub fn tangent_basis(&self, q: &DVector<f64>) -> DMatrix<f64> {
        match self {
            Embedding::Linear { basis } => basis.clone(),
            Embedding::Sphere { .. } => {
                let qh = DMatrix::from_column_slice(q.len(), 1, (q / q.norm()).as_slice());
                linalg::complement_basis(&qh, q.len())
            }
        }
    }

    pub fn tangent_projection(&self, q: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let t = self.tangent_basis(q);
        &t * (t.transpose() * v)
    }

    pub fn chart_at(&self, q0: &DVector<f64>) -> Chart {
        Chart {
            q0: q0.clone(),
            frame: self.tangent_basis(q0),
            radius: match self {
                Embedding::Linear { .. } => None,
                Embedding::Sphere { radius } => Some(*radius),
            },
        }
    }
}

/// A local section of `Q -> Q/K` into the fixed-isotropy set together with
/// invariant base coordinates and a closed-form alignment onto the section.
pub trait SectionModel: Send + Sync {
    fn base_dim(&self) -> usize;

    /// `s(x)`.
    fn section(&self, x: &DVector<f64>) -> DVector<f64>;

    fn section_jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        linalg::fd_jacobian(|y| Ok(self.section(y)), x).expect("section is total on its domain")
    }

    /// Invariant coordinates `psi(q)` with `psi(s(x)) = x`.
    fn base_coords(&self, q: &DVector<f64>) -> DVector<f64>;

    fn base_coords_jacobian(&self, q: &DVector<f64>) -> DMatrix<f64> {
        linalg::fd_jacobian(|y| Ok(self.base_coords(y)), q).expect("base coordinates are total")
    }

    fn in_domain(&self, x: &DVector<f64>) -> bool;

    /// Group element `k` (as an `n x n` matrix) and `x = psi(q)` with
    /// `k . q = s(x)`.
    fn canonicalize(&self, q: &DVector<f64>) -> Result<(DMatrix<f64>, DVector<f64>)>;
}

/// Embedded `K`-manifold of a single isotropy type with a chosen section.
#[derive(Clone)]
pub struct EquivariantManifold {
    action: LinearAction,
    embedding: Embedding,
    section: Arc<dyn SectionModel>,
    h_sub: Subspace,
    ann_h: Subspace,
}

impl fmt::Debug for EquivariantManifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EquivariantManifold")
            .field("ambient_dim", &self.action.ambient_dim())
            .field("embedding", &self.embedding)
            .field("base_dim", &self.section.base_dim())
            .field("h_dim", &self.h_sub.dim())
            .finish()
    }
}

/// Horizontal lifts of the coordinate directions of `Q/K` at `s(x)`.
#[derive(Debug, Clone)]
pub struct HorizontalFrame {
    pub q: DVector<f64>,
    /// Columns `C(e_j)`.
    pub lifts: DMatrix<f64>,
    /// Base metric `g_ij = <C e_i, C e_j>`.
    pub metric: DMatrix<f64>,
}

impl HorizontalFrame {
    pub fn lift(&self, w: &DVector<f64>) -> DVector<f64> {
        &self.lifts * w
    }
}

/// `I_q(X, Y) = <zeta_X(q), zeta_Y(q)>`.
#[derive(Debug, Clone)]
pub struct InertiaTensor {
    /// Full `m x m` matrix in the algebra basis (singular along `k_q`).
    pub matrix: DMatrix<f64>,
    /// `k_q^⊥`.
    pub perp: Subspace,
    /// Restriction to the orthonormal basis of `k_q^⊥`.
    pub restricted: DMatrix<f64>,
}

impl EquivariantManifold {
    pub fn new(
        action: LinearAction,
        embedding: Embedding,
        section: Arc<dyn SectionModel>,
        h_sub: Subspace,
    ) -> Self {
        let ann_h = action.algebra().annihilator(&h_sub);
        Self {
            action,
            embedding,
            section,
            h_sub,
            ann_h,
        }
    }

    pub fn action(&self) -> &LinearAction {
        &self.action
    }

    pub fn algebra(&self) -> &crate::lie::MatrixLieAlgebra {
        self.action.algebra()
    }

    pub fn embedding(&self) -> &Embedding {
        &self.embedding
    }

    pub fn section_model(&self) -> &dyn SectionModel {
        self.section.as_ref()
    }

    pub fn h_sub(&self) -> &Subspace {
        &self.h_sub
    }

    /// `Ann h` as a subspace of the dual.
    pub fn ann_h(&self) -> &Subspace {
        &self.ann_h
    }

    pub fn ambient_dim(&self) -> usize {
        self.action.ambient_dim()
    }

    pub fn dim(&self) -> usize {
        self.embedding.manifold_dim(self.ambient_dim())
    }

    pub fn base_dim(&self) -> usize {
        self.section.base_dim()
    }

    pub fn check_point(&self, q: &DVector<f64>) -> Result<()> {
        if q.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                got: q.len(),
                context: "ambient point",
            });
        }
        let residual = self.embedding.residual(q);
        if residual > MEMBERSHIP_TOL || !residual.is_finite() {
            return Err(Error::OffManifold { residual });
        }
        Ok(())
    }

    pub fn check_tangent(&self, q: &DVector<f64>, v: &DVector<f64>) -> Result<()> {
        let residual = (v - self.embedding.tangent_projection(q, v)).norm() / (1.0 + v.norm());
        if residual > MEMBERSHIP_TOL || !residual.is_finite() {
            return Err(Error::OffTangent { residual });
        }
        Ok(())
    }

    pub fn section(&self, x: &DVector<f64>) -> DVector<f64> {
        self.section.section(x)
    }

    pub fn in_domain(&self, x: &DVector<f64>) -> bool {
        x.len() == self.base_dim() && x.iter().all(|v| v.is_finite()) && self.section.in_domain(x)
    }

    pub fn fundamental_field(&self, x: &crate::lie::AlgebraElement, q: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_point(q)?;
        Ok(self.action.fundamental_field(x, q))
    }

    pub fn isotropy_algebra(&self, q: &DVector<f64>) -> Result<Subspace> {
        self.check_point(q)?;
        Ok(self.action.isotropy_algebra(q))
    }

    /// Orthonormal basis of the vertical space `T_q(K.q)`.
    pub fn vertical_basis(&self, q: &DVector<f64>) -> DMatrix<f64> {
        linalg::column_basis(&self.action.zeta_matrix(q))
    }

    /// Orthonormal basis of `Hor_q = Ver_q^⊥ ∩ T_q Q`.
    pub fn horizontal_basis(&self, q: &DVector<f64>) -> DMatrix<f64> {
        let t = self.embedding.tangent_basis(q);
        let v = self.vertical_basis(q);
        if v.ncols() == 0 {
            return t;
        }
        let split = linalg::rank_split(&(v.transpose() * &t));
        &t * split.kernel
    }

    pub fn vertical_horizontal_split(
        &self,
        q: &DVector<f64>,
        v: &DVector<f64>,
    ) -> Result<(DVector<f64>, DVector<f64>)> {
        self.check_point(q)?;
        self.check_tangent(q, v)?;
        let basis = self.vertical_basis(q);
        let ver = &basis * (basis.transpose() * v);
        let hor = v - &ver;
        Ok((ver, hor))
    }

    pub fn inertia_tensor(&self, q: &DVector<f64>) -> Result<InertiaTensor> {
        self.check_point(q)?;
        let z = self.action.zeta_matrix(q);
        let matrix = z.transpose() * &z;
        let perp = self.action.isotropy_algebra(q).orthocomplement();
        let u = perp.basis();
        let restricted = u.transpose() * &matrix * &u;
        if restricted.nrows() > 0 {
            let min = linalg::min_symmetric_eigenvalue(&restricted);
            let top = restricted.amax();
            if min <= linalg::RANK_RTOL * top.max(1.0) {
                return Err(Error::Degenerate { min_eigenvalue: min });
            }
        }
        Ok(InertiaTensor {
            matrix,
            perp,
            restricted,
        })
    }

    /// `<mu(q, p), X> = <p, zeta_X(q)>`.
    pub fn momentum_map(&self, q: &DVector<f64>, p: &DVector<f64>) -> CoAlgebraElement {
        CoAlgebraElement::new(self.action.zeta_matrix(q).transpose() * p)
    }

    /// `(psi(q), d psi(q))`.
    pub fn base_projection(&self, q: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
        self.check_point(q)?;
        Ok((self.section.base_coords(q), self.section.base_coords_jacobian(q)))
    }

    /// Horizontal lifts of the base coordinate directions at `s(x)`.
    pub fn horizontal_frame(&self, x: &DVector<f64>) -> Result<HorizontalFrame> {
        if !self.in_domain(x) {
            return Err(Error::InvalidPoint(format!("base point {:?} is outside the section domain", x.as_slice())));
        }
        let q = self.section(x);
        let hb = self.horizontal_basis(&q);
        let b = self.base_dim();
        if hb.ncols() != b {
            return Err(Error::SectionDegenerate);
        }
        let dpsi = self.section.base_coords_jacobian(&q);
        let sys = &dpsi * &hb;
        let split = linalg::rank_split(&sys);
        if split.rank < b {
            return Err(Error::SectionDegenerate);
        }
        let inv = sys.try_inverse().ok_or(Error::SectionDegenerate)?;
        let lifts = hb * inv;
        let metric = lifts.transpose() * &lifts;
        Ok(HorizontalFrame { q, lifts, metric })
    }

    /// Horizontal lift `C(w)` at `s(x)`.
    pub fn horizontal_lift(&self, x: &DVector<f64>, w: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.horizontal_frame(x)?.lift(w))
    }

    pub fn base_metric(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        Ok(self.horizontal_frame(x)?.metric)
    }
}
