//! Fixtures shared by the criterion benches.

use gauged_reduce::expr::ExprObservable;
use gauged_reduce::rng::SampleRng;
use gauged_reduce::scenarios::{scenario, Scenario};
use gauged_reduce::weinstein::WeinsteinPoint;

/// A scenario with a fixed random point and observable pair.
pub struct Fixture {
    pub scenario: Scenario,
    pub point: WeinsteinPoint,
    pub f: ExprObservable,
    pub g: ExprObservable,
    pub hamiltonian: ExprObservable,
}

impl Fixture {
    pub fn new(name: &str) -> Self {
        let s = scenario(name).expect("built-in scenario");
        let mut rng = SampleRng::stream(gauged_reduce::rng::DEFAULT_SEED, name);
        let point = s.sample_point(&mut rng);
        let f = s.random_observable(&mut rng);
        let g = s.random_observable(&mut rng);
        let hamiltonian = s.observable(s.hamiltonian).expect("default Hamiltonian parses");
        Fixture {
            scenario: s,
            point,
            f,
            g,
            hamiltonian,
        }
    }
}
