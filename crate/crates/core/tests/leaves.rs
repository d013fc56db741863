use gauged_reduce::leaves::{kks_form, orbit_generator, orbit_invariants, symplectic_slice, KKS_CONVENTION};
use gauged_reduce::rng::SampleRng;
use gauged_reduce::scenarios::{scenario, so5_reference_lambda};
use gauged_reduce::{AlgebraElement, CoAlgebraElement, Error, MatrixLieAlgebra};
use nalgebra::Vector3;
use proptest::prelude::*;

fn vec3() -> impl Strategy<Value = Vector3<f64>> {
    prop::array::uniform3(-2.0f64..2.0).prop_map(|a| Vector3::new(a[0], a[1], a[2]))
}

#[test]
fn so5_dimension_table() {
    let s = scenario("so5_pairs").unwrap();
    let lambda = so5_reference_lambda(s.algebra());
    let rep = s.manifold.leaf_report(&lambda, &s.designated_point.x).unwrap();
    let d = rep.dims;
    assert_eq!(d.k_lambda, 2);
    assert_eq!(d.k_lambda_perp, 8);
    assert_eq!(d.h_cap_k_lambda, 0);
    assert_eq!(d.h_perp_cap_k_lambda_perp, 5);
    assert_eq!(d.v, 2);
    assert_eq!(d.v_fixed, 2);
    assert_eq!(d.leaf, 6);
    assert_eq!(d.orbit, 8);
    assert!(rep.retained_margin >= 1e-6);
    assert!(rep.discarded_ratio < 1e-12);
    assert!(rep.magnetic_flag);
    assert_eq!(rep.kks_convention, KKS_CONVENTION);
}

#[test]
fn so5_leaf_report_serializes_with_capital_v() {
    let s = scenario("so5_pairs").unwrap();
    let rep = s.manifold.leaf_report(&s.designated_point.lambda, &s.designated_point.x).unwrap();
    let json = serde_json::to_value(&rep).unwrap();
    assert_eq!(json["dims"]["V"], 2);
    assert_eq!(json["dims"]["V_fixed"], 2);
    assert_eq!(json["dims"]["leaf"], 6);
}

#[test]
fn leaf_dimensions_of_small_scenarios() {
    let cases: [(&str, &[f64], usize); 6] = [
        ("so3_r3", &[1.0, 0.0, 0.0], 2),
        ("so3_r3", &[0.0, 0.0, 0.0], 2),
        ("hopf", &[1.0], 4),
        ("hopf", &[0.0], 4),
        ("calogero_so3", &[0.5, -0.4, 0.3], 6),
        ("calogero_so3", &[0.0, 0.0, 0.0], 4),
    ];
    for (name, l, dim) in cases {
        let s = scenario(name).unwrap();
        let got = s.manifold.leaf_dimension(&CoAlgebraElement::from_slice(l)).unwrap();
        assert_eq!(got, dim, "{name} {l:?}");
    }
}

#[test]
fn so3_r3_flat_leaves_have_no_magnetic_flag() {
    let s = scenario("so3_r3").unwrap();
    let rep = s.manifold.leaf_report(&s.designated_point.lambda, &s.designated_point.x).unwrap();
    assert!(!rep.magnetic_flag);
    let hopf = scenario("hopf").unwrap();
    let rep = hopf.manifold.leaf_report(&hopf.designated_point.lambda, &hopf.designated_point.x).unwrap();
    assert!(rep.magnetic_flag);
}

#[test]
fn lambda_outside_ann_h_is_rejected() {
    let s = scenario("so3_r3").unwrap();
    let bad = CoAlgebraElement::from_slice(&[0.0, 0.0, 1.0]);
    assert!(matches!(s.manifold.leaf_dimension(&bad), Err(Error::InvalidPoint(_))));
}

#[test]
fn leaf_form_reproduces_bracket_on_calogero() {
    let s = scenario("calogero_so3").unwrap();
    let sp = &s.manifold;
    let mut rng = SampleRng::stream(9, "calogero-leaf");
    for _ in 0..8 {
        let w = s.sample_point(&mut rng);
        let f = s.random_observable(&mut rng);
        let g = s.random_observable(&mut rng);
        let xf = sp.hamiltonian_field(&f, &w).unwrap();
        let xg = sp.hamiltonian_field(&g, &w).unwrap();
        let sigma = sp.leaf_form(&w, &xf, &xg).unwrap();
        let br = sp.reduced_bracket(&f, &g, &w).unwrap().total;
        assert!((sigma - br).abs() < 1e-7 * (1.0 + br.abs()), "{sigma} vs {br}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn so3_kks_is_triple_product(l in vec3(), x in vec3(), y in vec3()) {
        prop_assume!(l.norm() > 1e-2);
        let g = MatrixLieAlgebra::so3();
        let lam = CoAlgebraElement::from_slice(l.as_slice());
        let (xe, ye) = (AlgebraElement::from_slice(x.as_slice()), AlgebraElement::from_slice(y.as_slice()));
        let v = kks_form(&g, &lam, &g.ad_star(&xe, &lam), &g.ad_star(&ye, &lam)).unwrap();
        prop_assert!((v - l.dot(&x.cross(&y))).abs() < 1e-9 * (1.0 + l.norm() * x.norm() * y.norm()));
    }

    #[test]
    fn orbit_generator_recovers_x_modulo_isotropy(seed in prop::collection::vec(-1.0f64..1.0, 20)) {
        let g = MatrixLieAlgebra::so(5);
        let lam = CoAlgebraElement::from_slice(&seed[..10]);
        let x = AlgebraElement::from_slice(&seed[10..]);
        let xi = g.ad_star(&x, &lam);
        let y = orbit_generator(&g, &lam, &xi).unwrap();
        prop_assert!((g.ad_star(&y, &lam).coeffs - xi.coeffs).amax() < 1e-9);
    }

    #[test]
    fn orbit_invariants_are_coadjoint_invariant(seed in prop::collection::vec(-1.0f64..1.0, 20)) {
        let g = MatrixLieAlgebra::so(5);
        let lam = CoAlgebraElement::from_slice(&seed[..10]);
        let k = gauged_reduce::lie::group_exp(&g, &AlgebraElement::from_slice(&seed[10..]));
        let moved = gauged_reduce::lie::adjoint_star(&g, &k, &lam).unwrap();
        let (a, b) = (orbit_invariants(&g, &lam), orbit_invariants(&g, &moved));
        prop_assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
    }

    #[test]
    fn slice_dimensions_are_consistent(seed in prop::collection::vec(-1.0f64..1.0, 10)) {
        let g = MatrixLieAlgebra::so(5);
        let h = g.span(&[g.basis_element(7), g.basis_element(8), g.basis_element(9)]);
        let ann = g.annihilator(&h);
        let lam = CoAlgebraElement::new(ann.project(&nalgebra::DVector::from_column_slice(&seed)));
        let s = symplectic_slice(&g, &lam, &h);
        prop_assert_eq!(s.orbit_tangent.dim() % 2, 0);
        prop_assert_eq!(s.v.dim() % 2, 0);
        prop_assert_eq!(s.v.dim() + s.h_orbit.dim(), s.symplectic_orthogonal.dim());
        prop_assert!(s.v_fixed.dim() <= s.v.dim());
    }
}
