//! Matrix Lie algebras, their duals, subspaces and group actions.

mod algebra;
mod group;
mod subspace;

pub use algebra::{AlgebraElement, AlgebraSpec, CoAlgebraElement, MatrixEntry, MatrixLieAlgebra};
pub use group::{
    adjoint, adjoint_matrix, adjoint_star, group_exp, trivialized_momentum_maps, TrivializedMomenta,
};
pub use subspace::{Metric, RankMargins, Subspace};

use nalgebra::DMatrix;

impl MatrixLieAlgebra {
    /// Metric on algebra coefficients.
    pub fn algebra_metric(&self) -> Metric {
        Metric::new(self.whiten().clone(), self.unwhiten().clone())
    }

    /// Metric on dual coefficients, making the Riesz map an isometry.
    pub fn dual_metric(&self) -> Metric {
        Metric::new(self.unwhiten().transpose(), self.whiten().transpose())
    }

    /// Span of algebra elements.
    pub fn span(&self, elements: &[AlgebraElement]) -> Subspace {
        let mut cols = DMatrix::zeros(self.dim(), elements.len());
        for (j, e) in elements.iter().enumerate() {
            cols.set_column(j, &e.coeffs);
        }
        Subspace::span(self.algebra_metric(), &cols)
    }

    /// Span of dual elements.
    pub fn dual_span(&self, elements: &[CoAlgebraElement]) -> Subspace {
        let mut cols = DMatrix::zeros(self.dim(), elements.len());
        for (j, e) in elements.iter().enumerate() {
            cols.set_column(j, &e.coeffs);
        }
        Subspace::span(self.dual_metric(), &cols)
    }

    /// `Ann S` for a subspace `S` of the algebra.
    pub fn annihilator(&self, s: &Subspace) -> Subspace {
        s.orthocomplement().with_metric(self.dual_metric())
    }

    /// `k_lambda = { X : ad*(X) lambda = 0 }`.
    pub fn isotropy_of_covector(&self, lambda: &CoAlgebraElement) -> Subspace {
        Subspace::kernel(self.algebra_metric(), &self.coadjoint_orbit_map(lambda))
    }

    /// Element of the algebra from a coefficient column of a subspace basis.
    pub fn element(&self, coeffs: nalgebra::DVector<f64>) -> AlgebraElement {
        AlgebraElement::new(coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isotropy_of_so3_covector_is_its_riesz_line() {
        let g = MatrixLieAlgebra::so3();
        let l = CoAlgebraElement::from_slice(&[0.3, -1.2, 0.7]);
        let k = g.isotropy_of_covector(&l);
        assert_eq!(k.dim(), 1);
        assert!(k.distance(&g.sharp(&l).coeffs) < 1e-12);
        assert_eq!(g.isotropy_of_covector(&CoAlgebraElement::zeros(3)).dim(), 3);
    }

    #[test]
    fn annihilator_pairs_to_zero() {
        let g = MatrixLieAlgebra::so(4);
        let h = g.span(&[g.basis_element(0), g.basis_element(5)]);
        let ann = g.annihilator(&h);
        assert_eq!(ann.dim(), 4);
        let pairing = h.basis().transpose() * ann.basis();
        assert!(pairing.amax() < 1e-13);
    }
}
