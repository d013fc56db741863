//! Coadjoint orbits, the KKS form, symplectic slices of the residual
//! isotropy action on `O ∩ Ann h`, and the symplectic form on leaves.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::EquivariantManifold;
use crate::lie::{AlgebraElement, CoAlgebraElement, MatrixLieAlgebra, RankMargins, Subspace};
use crate::weinstein::{WeinsteinPoint, WeinsteinTangent};

/// Sign convention of the orbit form used throughout:
/// `Omega^O(ad*(X) l, ad*(Y) l) = <l, [X, Y]>`.
pub const KKS_CONVENTION: &str = "Omega^O(ad*(X)l, ad*(Y)l) = <l,[X,Y]>";

/// `T_lambda O = { ad*(X) lambda }` as a subspace of the dual.
pub fn orbit_tangent(alg: &MatrixLieAlgebra, lambda: &CoAlgebraElement) -> Subspace {
    Subspace::span(alg.dual_metric(), &alg.coadjoint_orbit_map(lambda))
}

/// Coadjoint-orbit invariants `tr(M^2)` and `tr(M^4)` of `M = lambda^sharp`
/// as a matrix.
pub fn orbit_invariants(alg: &MatrixLieAlgebra, lambda: &CoAlgebraElement) -> [f64; 2] {
    let m = alg.matrix_of(&alg.sharp(lambda));
    let m2 = &m * &m;
    [m2.trace(), (&m2 * &m2).trace()]
}

/// Least-squares generator `X` with `ad*(X) lambda = xi`, orthogonal to
/// `k_lambda`.
pub fn orbit_generator(
    alg: &MatrixLieAlgebra,
    lambda: &CoAlgebraElement,
    xi: &CoAlgebraElement,
) -> Result<AlgebraElement> {
    let map = alg.coadjoint_orbit_map(lambda);
    // Fit in whitened coordinates on both sides so the residual is metric-aware.
    let dual = alg.dual_metric();
    let mut wmap = DMatrix::zeros(map.nrows(), map.ncols());
    for j in 0..map.ncols() {
        wmap.set_column(j, &dual.whiten(&map.column(j).into_owned()));
    }
    let wmap = wmap * alg.unwhiten();
    let rhs = dual.whiten(&xi.coeffs);
    let y = crate::linalg::pseudo_solve(&wmap, &rhs);
    let residual = (&wmap * &y - &rhs).norm();
    if residual > 1e-8 * (1.0 + rhs.norm()) {
        return Err(Error::RepresentativeAmbiguity { residual });
    }
    Ok(AlgebraElement::new(alg.unwhiten() * y))
}

/// `Omega^O(xi1, xi2)` for orbit tangents, generators recovered by least
/// squares.
pub fn kks_form(
    alg: &MatrixLieAlgebra,
    lambda: &CoAlgebraElement,
    xi1: &CoAlgebraElement,
    xi2: &CoAlgebraElement,
) -> Result<f64> {
    let x1 = orbit_generator(alg, lambda, xi1)?;
    let x2 = orbit_generator(alg, lambda, xi2)?;
    Ok(alg.pair(lambda, &alg.bracket(&x1, &x2)))
}

/// Matrix of the KKS form on the orthonormal basis of `T_lambda O`.
pub fn kks_matrix(alg: &MatrixLieAlgebra, lambda: &CoAlgebraElement) -> Result<DMatrix<f64>> {
    let t = orbit_tangent(alg, lambda);
    let gens: Vec<AlgebraElement> = (0..t.dim())
        .map(|i| orbit_generator(alg, lambda, &CoAlgebraElement::new(t.basis_vector(i))))
        .collect::<Result<_>>()?;
    let d = t.dim();
    Ok(DMatrix::from_fn(d, d, |i, j| alg.pair(lambda, &alg.bracket(&gens[i], &gens[j]))))
}

/// Symplectic slice data for the residual isotropy `H` acting on the
/// coadjoint orbit through `lambda`.
#[derive(Debug, Clone)]
pub struct SliceData {
    pub orbit_tangent: Subspace,
    pub k_lambda: Subspace,
    /// `h . lambda`.
    pub h_orbit: Subspace,
    /// `(h . lambda)^Omega ∩ T_lambda O = T_lambda O ∩ Ann h`.
    pub symplectic_orthogonal: Subspace,
    /// Complement of `h . lambda` inside the symplectic orthogonal.
    pub v: Subspace,
    /// `h ∩ k_lambda`.
    pub l0: Subspace,
    pub v_fixed: Subspace,
    /// `h^⊥ ∩ k_lambda^⊥`.
    pub mixed: Subspace,
}

impl SliceData {
    /// Worst singular-value margins over all rank decisions involved.
    pub fn margins(&self) -> RankMargins {
        [
            &self.orbit_tangent,
            &self.k_lambda,
            &self.h_orbit,
            &self.symplectic_orthogonal,
            &self.v,
            &self.l0,
            &self.v_fixed,
            &self.mixed,
        ]
        .iter()
        .fold(RankMargins::EXACT, |acc, s| acc.worst(s.margins()))
    }
}

pub fn symplectic_slice(alg: &MatrixLieAlgebra, lambda: &CoAlgebraElement, h: &Subspace) -> SliceData {
    let dual = alg.dual_metric();
    let orbit = orbit_tangent(alg, lambda);
    let k_lambda = alg.isotropy_of_covector(lambda);
    let h_images: Vec<DVector<f64>> = (0..h.dim())
        .map(|i| alg.ad_star(&AlgebraElement::new(h.basis_vector(i)), lambda).coeffs)
        .collect();
    let h_orbit = if h_images.is_empty() {
        Subspace::zero(dual.clone())
    } else {
        Subspace::span(dual.clone(), &DMatrix::from_columns(&h_images))
    };
    let ann_h = alg.annihilator(h);
    let symplectic_orthogonal = orbit.intersect(&ann_h);
    let v = symplectic_orthogonal.intersect(&h_orbit.orthocomplement());
    let l0 = h.intersect(&k_lambda);
    let generators: Vec<DMatrix<f64>> = (0..l0.dim())
        .map(|i| -alg.ad_matrix(&AlgebraElement::new(l0.basis_vector(i))).transpose())
        .collect();
    let v_fixed = v.fixed_subspace(&generators);
    let mixed = h.orthocomplement().intersect(&k_lambda.orthocomplement());
    SliceData {
        orbit_tangent: orbit,
        k_lambda,
        h_orbit,
        symplectic_orthogonal,
        v,
        l0,
        v_fixed,
        mixed,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LeafDims {
    pub orbit: usize,
    pub k_lambda: usize,
    pub k_lambda_perp: usize,
    pub h_cap_k_lambda: usize,
    pub h_perp_cap_k_lambda_perp: usize,
    #[serde(rename = "V")]
    pub v: usize,
    #[serde(rename = "V_fixed")]
    pub v_fixed: usize,
    pub leaf: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct LeafReport {
    pub lambda: Vec<f64>,
    pub dims: LeafDims,
    /// Whether `<lambda, Curv>` is nonzero on horizontal pairs at the base
    /// point used for the report.
    pub magnetic_flag: bool,
    pub magnetic_max: f64,
    pub base_point: Vec<f64>,
    /// Smallest retained over largest singular value, worst case.
    pub retained_margin: f64,
    /// Largest discarded over largest singular value, worst case.
    pub discarded_ratio: f64,
    /// L0-fixedness is decided on the Lie algebra only.
    pub discrete_isotropy_ignored: bool,
    pub kks_convention: &'static str,
}

impl EquivariantManifold {
    pub fn symplectic_slice(&self, lambda: &CoAlgebraElement) -> Result<SliceData> {
        self.check_lambda(lambda)?;
        Ok(symplectic_slice(self.algebra(), lambda, self.h_sub()))
    }

    fn check_lambda(&self, lambda: &CoAlgebraElement) -> Result<()> {
        let m = self.algebra().dim();
        if lambda.dim() != m {
            return Err(Error::InvalidPoint(format!("expected {m} lambda coefficients, got {}", lambda.dim())));
        }
        let r = self.ann_h_residual(lambda);
        if r > crate::weinstein::ANN_H_TOL * (1.0 + lambda.coeffs.norm()) {
            return Err(Error::InvalidPoint(format!("lambda does not annihilate h (residual {r:.3e})")));
        }
        Ok(())
    }

    /// `2 dim(Q/K) + dim V_{L0}`.
    pub fn leaf_dimension(&self, lambda: &CoAlgebraElement) -> Result<usize> {
        Ok(2 * self.base_dim() + self.symplectic_slice(lambda)?.v_fixed.dim())
    }

    pub fn leaf_report(&self, lambda: &CoAlgebraElement, x: &DVector<f64>) -> Result<LeafReport> {
        let slice = self.symplectic_slice(lambda)?;
        let m = self.algebra().dim();
        let curv = self.reduced_curvature_form(x, lambda)?;
        let magnetic_max = curv.amax();
        let margins = slice.margins();
        Ok(LeafReport {
            lambda: lambda.coeffs.iter().copied().collect(),
            dims: LeafDims {
                orbit: slice.orbit_tangent.dim(),
                k_lambda: slice.k_lambda.dim(),
                k_lambda_perp: m - slice.k_lambda.dim(),
                h_cap_k_lambda: slice.l0.dim(),
                h_perp_cap_k_lambda_perp: slice.mixed.dim(),
                v: slice.v.dim(),
                v_fixed: slice.v_fixed.dim(),
                leaf: 2 * self.base_dim() + slice.v_fixed.dim(),
            },
            magnetic_flag: magnetic_max > 1e-8 * (1.0 + lambda.coeffs.norm()),
            magnetic_max,
            base_point: x.iter().copied().collect(),
            retained_margin: margins.retained,
            discarded_ratio: margins.discarded,
            discrete_isotropy_ignored: true,
            kks_convention: KKS_CONVENTION,
        })
    }

    /// Symplectic form of the leaf through `w`:
    /// `Omega^{Q/K} - dB((ds x_dot1, l_dot1), (ds x_dot2, l_dot2)) - Omega^O(l_dot1, l_dot2)`.
    pub fn leaf_form(&self, w: &WeinsteinPoint, t1: &WeinsteinTangent, t2: &WeinsteinTangent) -> Result<f64> {
        self.validate_point(w)?;
        let canonical = t1.x_dot.dot(&t2.eta_dot) - t2.x_dot.dot(&t1.eta_dot);
        let q = self.section(&w.x);
        let ds = self.section_model().section_jacobian(&w.x);
        let xi1 = crate::connection::ProductTangent {
            v: &ds * &t1.x_dot,
            lambda_dot: t1.lambda_dot.clone(),
        };
        let xi2 = crate::connection::ProductTangent {
            v: &ds * &t2.x_dot,
            lambda_dot: t2.lambda_dot.clone(),
        };
        let db = self.db_form(&q, &w.lambda, &xi1, &xi2)?;
        let orbit = if t1.lambda_dot.max_abs() == 0.0 || t2.lambda_dot.max_abs() == 0.0 {
            0.0
        } else {
            kks_form(self.algebra(), &w.lambda, &t1.lambda_dot, &t2.lambda_dot)?
        };
        Ok(canonical - db - orbit)
    }
}
