//! Built-in scenarios: a bundled algebra, manifold, section and reference
//! data, plus the observables used to exercise them.

mod calogero;
mod hopf;
mod so3_r3;
mod so5_pairs;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::expr::ExprObservable;
use crate::geometry::EquivariantManifold;
use crate::lie::{group_exp, AlgebraElement, CoAlgebraElement, MatrixLieAlgebra};
use crate::rng::SampleRng;
use crate::weinstein::WeinsteinPoint;

pub use calogero::FREE_HAMILTONIAN as CALOGERO_FREE_HAMILTONIAN;
pub use so5_pairs::{so5_perp_split, so5_reference_lambda};

pub const SCENARIO_NAMES: [&str; 4] = ["calogero_so3", "hopf", "so3_r3", "so5_pairs"];

pub struct Scenario {
    pub name: &'static str,
    pub summary: &'static str,
    pub manifold: EquivariantManifold,
    /// Sampling box for base points, inside the section domain.
    pub x_box: Vec<(f64, f64)>,
    pub eta_scale: f64,
    pub lambda_scale: f64,
    /// Functions of `lambda` invariant under the residual isotropy.
    pub lambda_invariants: Vec<&'static str>,
    /// Default Hamiltonian.
    pub hamiltonian: &'static str,
    pub reference_lambda: Option<CoAlgebraElement>,
    /// Fixed point used for regression constants.
    pub designated_point: WeinsteinPoint,
    /// Curvature term of `{e1, e2}` at the designated point, where it is
    /// nonzero. Regression constant from the finite-difference curvature.
    pub magnetic_regression: Option<f64>,
}

impl std::fmt::Debug for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Scenario").field("name", &self.name).finish()
    }
}

impl Scenario {
    pub fn algebra(&self) -> &MatrixLieAlgebra {
        self.manifold.algebra()
    }

    pub fn observable(&self, text: &str) -> Result<ExprObservable> {
        ExprObservable::for_space(text, &self.manifold)
    }

    pub fn sample_x(&self, rng: &mut SampleRng) -> DVector<f64> {
        DVector::from_iterator(self.x_box.len(), self.x_box.iter().map(|(lo, hi)| rng.uniform(*lo, *hi)))
    }

    pub fn sample_lambda(&self, rng: &mut SampleRng) -> CoAlgebraElement {
        let m = self.algebra().dim();
        let raw = rng.normal_vec(m) * self.lambda_scale;
        CoAlgebraElement::new(self.manifold.ann_h().project(&raw))
    }

    pub fn sample_point(&self, rng: &mut SampleRng) -> WeinsteinPoint {
        let b = self.manifold.base_dim();
        WeinsteinPoint {
            x: self.sample_x(rng),
            eta: rng.normal_vec(b) * self.eta_scale,
            lambda: self.sample_lambda(rng),
        }
    }

    /// Random group element `exp(X)` with normally distributed `X`.
    pub fn sample_group(&self, rng: &mut SampleRng) -> DMatrix<f64> {
        let alg = self.algebra();
        group_exp(alg, &AlgebraElement::new(rng.normal_vec(alg.dim())))
    }

    /// Random point of `Q` on the orbit of a random section point.
    pub fn sample_q(&self, rng: &mut SampleRng) -> DVector<f64> {
        let x = self.sample_x(rng);
        let k = self.sample_group(rng);
        self.manifold.action().act(&k, &self.manifold.section(&x))
    }

    /// Random invariant observable as expression text: a constant plus
    /// three products of two factors drawn from the base coordinates,
    /// momenta and the invariant functions of `lambda`.
    pub fn random_observable_text(&self, rng: &mut SampleRng) -> String {
        let b = self.manifold.base_dim();
        let mut atoms: Vec<String> = Vec::new();
        for i in 1..=b {
            atoms.push(format!("x{i}"));
            atoms.push(format!("e{i}"));
            atoms.push(format!("sin(x{i})"));
            atoms.push(format!("exp(0.3*e{i})"));
        }
        for inv in &self.lambda_invariants {
            atoms.push(format!("({inv})"));
            atoms.push(format!("({inv})"));
        }
        let mut text = format!("{:.3}", rng.uniform(-1.0, 1.0));
        for _ in 0..3 {
            let c = rng.uniform(-1.0, 1.0);
            let a = &atoms[rng.index(atoms.len())];
            let d = &atoms[rng.index(atoms.len())];
            text.push_str(&format!(" + {c:.3}*{a}*{d}"));
        }
        text
    }

    pub fn random_observable(&self, rng: &mut SampleRng) -> ExprObservable {
        let text = self.random_observable_text(rng);
        self.observable(&text).expect("generated observables parse")
    }

    /// Construction-time checks: section lands on `Q` with isotropy `h`,
    /// `psi o s = id`, and canonicalization recovers section points.
    pub fn self_check(&self) -> Result<()> {
        let fail = |invariant: &str, detail: String| Error::ScenarioSelfCheckFailure {
            scenario: self.name.to_string(),
            invariant: invariant.to_string(),
            detail,
        };
        let m = &self.manifold;
        let mut rng = SampleRng::stream(0, self.name);
        for _ in 0..4 {
            let x = self.sample_x(&mut rng);
            if !m.in_domain(&x) {
                return Err(fail("sampling box", format!("{:?} outside the domain", x.as_slice())));
            }
            let s = m.section(&x);
            m.check_point(&s).map_err(|e| fail("section on Q", e.to_string()))?;
            let back = m.section_model().base_coords(&s);
            let err = (&back - &x).amax();
            if err > 1e-10 {
                return Err(fail("psi o s = id", format!("residual {err:.3e}")));
            }
            let iso = m.isotropy_algebra(&s)?;
            if iso.difference(m.h_sub()) > 1e-8 {
                return Err(fail("isotropy along section", format!("dim k_q = {}", iso.dim())));
            }
            let q = self.manifold.action().act(&self.sample_group(&mut rng), &s);
            let (k, x2) = m
                .section_model()
                .canonicalize(&q)
                .map_err(|e| fail("canonicalize", e.to_string()))?;
            let err = (m.action().act(&k, &q) - m.section(&x2)).norm();
            if err > 1e-8 {
                return Err(fail("canonicalize", format!("round trip residual {err:.3e}")));
            }
        }
        Ok(())
    }
}

pub fn builtin_scenarios() -> Vec<Scenario> {
    SCENARIO_NAMES
        .iter()
        .map(|n| scenario(n).expect("builtin scenarios pass their self checks"))
        .collect()
}

pub fn scenario(name: &str) -> Result<Scenario> {
    let s = match name {
        "so3_r3" => so3_r3::build()?,
        "hopf" => hopf::build()?,
        "calogero_so3" => calogero::build()?,
        "so5_pairs" => so5_pairs::build()?,
        _ => return Err(Error::UnknownScenario(name.to_string())),
    };
    s.self_check()?;
    Ok(s)
}
