use gauged_reduce::check::tangent_gap;
use gauged_reduce::rng::SampleRng;
use gauged_reduce::scenarios::{scenario, SCENARIO_NAMES};
use gauged_reduce::weinstein::{fd_point_gradient, Observable, WeinsteinPoint};
use gauged_reduce::Error;
use proptest::prelude::*;

#[test]
fn so3_r3_canonical_pair() {
    let s = scenario("so3_r3").unwrap();
    let sp = &s.manifold;
    let w = WeinsteinPoint::from_slices(&[1.3], &[0.2], &[0.4, -0.9, 0.0]);
    let x1 = s.observable("x1").unwrap();
    let e1 = s.observable("e1").unwrap();
    let b = sp.reduced_bracket(&x1, &e1, &w).unwrap();
    assert!((b.total - 1.0).abs() < 1e-12);
    assert_eq!(b.curvature, 0.0);
    assert!((sp.oracle_bracket(&x1, &e1, &w).unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn so3_r3_field_is_centrifugal() {
    let s = scenario("so3_r3").unwrap();
    let h = s.observable(s.hamiltonian).unwrap();
    let mut rng = SampleRng::stream(1, "centrifugal");
    for _ in 0..10 {
        let w = s.sample_point(&mut rng);
        let f = s.manifold.hamiltonian_field(&h, &w).unwrap();
        let (x, e) = (w.x[0], w.eta[0]);
        let l2 = w.lambda.coeffs.norm_squared();
        assert!((f.x_dot[0] - e).abs() < 1e-12);
        assert!((f.eta_dot[0] - l2 / x.powi(3)).abs() < 1e-10 * (1.0 + l2 / x.powi(3)));
        assert!(f.lambda_dot.max_abs() < 1e-12);
    }
}

#[test]
fn so3_r3_flow_is_free_motion() {
    let s = scenario("so3_r3").unwrap();
    let h = s.observable(s.hamiltonian).unwrap();
    let w0 = &s.designated_point;
    let (x0, e0, l) = (w0.x[0], w0.eta[0], w0.lambda.coeffs.norm());
    let t = 2.0;
    let tr = s.manifold.integrate_flow(&h, w0, t, 1e-3).unwrap();
    let expected = ((x0 + e0 * t).powi(2) + (l * t / x0).powi(2)).sqrt();
    assert!((tr.last().x[0] - expected).abs() < 1e-9);
    assert_eq!(tr.points.len(), 2001);
}

#[test]
fn flow_leaving_the_domain_is_reported() {
    let s = scenario("so3_r3").unwrap();
    let h = s.observable("0.5*e1^2").unwrap();
    let w0 = WeinsteinPoint::from_slices(&[1.0], &[-3.0], &[0.0, 0.0, 0.0]);
    match s.manifold.integrate_flow(&h, &w0, 1.0, 1e-3) {
        Err(Error::StepOutOfDomain { t }) => assert!((t - 1.0 / 3.0).abs() < 2e-3, "t = {t}"),
        other => panic!("expected StepOutOfDomain, got {other:?}"),
    }
    assert!(s.manifold.integrate_flow(&h, &w0, 1.0, 0.0).is_err());
}

#[test]
fn non_invariant_observable_is_rejected() {
    let s = scenario("so3_r3").unwrap();
    let f = s.observable("l1").unwrap();
    let g = s.observable("x1").unwrap();
    let w = WeinsteinPoint::from_slices(&[1.0], &[0.0], &[1.0, 0.5, 0.0]);
    assert!(matches!(
        s.manifold.reduced_bracket(&f, &g, &w),
        Err(Error::InvarianceViolation { .. })
    ));
}

#[test]
fn vertical_derivative_of_norm_square() {
    let s = scenario("so3_r3").unwrap();
    let f = s.observable("lam2").unwrap();
    let w = WeinsteinPoint::from_slices(&[1.0], &[0.0], &[0.6, -0.8, 0.0]);
    let z = s.manifold.vertical_derivative(&f, &w).unwrap();
    assert!((z.coeffs - &w.lambda.coeffs * 2.0).amax() < 1e-12);
}

#[test]
fn invalid_points_are_rejected() {
    let s = scenario("so3_r3").unwrap();
    let sp = &s.manifold;
    let bad_h = WeinsteinPoint::from_slices(&[1.0], &[0.0], &[0.0, 0.0, 1.0]);
    assert!(matches!(sp.validate_point(&bad_h), Err(Error::InvalidPoint(_))));
    let bad_dim = WeinsteinPoint::from_slices(&[1.0, 2.0], &[0.0], &[0.0, 0.0, 0.0]);
    assert!(matches!(sp.validate_point(&bad_dim), Err(Error::InvalidPoint(_))));
    let outside = WeinsteinPoint::from_slices(&[-1.0], &[0.0], &[0.0, 0.0, 0.0]);
    assert!(matches!(sp.validate_point(&outside), Err(Error::InvalidPoint(_))));
}

#[test]
fn point_json_round_trip() {
    let w = WeinsteinPoint::from_json(r#"{"x": [0.3, -0.2], "eta": [0.4, 0.1], "lambda": [1.0]}"#).unwrap();
    let s = scenario("hopf").unwrap();
    assert_eq!(w, s.designated_point);
    let text = serde_json::to_string(&w.to_record()).unwrap();
    assert_eq!(WeinsteinPoint::from_json(&text).unwrap(), w);
    assert!(matches!(WeinsteinPoint::from_json("{\"x\": [1]}"), Err(Error::Json(_))));
}

#[test]
fn norm_square_is_a_casimir() {
    for name in SCENARIO_NAMES {
        let s = scenario(name).unwrap();
        let c = s.observable("lam2").unwrap();
        let mut rng = SampleRng::stream(2, name);
        for _ in 0..5 {
            let w = s.sample_point(&mut rng);
            let field = s.manifold.hamiltonian_field(&c, &w).unwrap();
            let zero = gauged_reduce::weinstein::WeinsteinTangent::zeros(w.x.len(), w.lambda.dim());
            assert!(tangent_gap(&s, &w, &field, &zero) < 1e-10, "{name}");
            let g = s.random_observable(&mut rng);
            assert!(s.manifold.reduced_bracket(&c, &g, &w).unwrap().total.abs() < 1e-9, "{name}");
        }
    }
}

#[test]
fn so5_bracket_matches_oracle() {
    let s = scenario("so5_pairs").unwrap();
    let sp = &s.manifold;
    let mut rng = SampleRng::stream(4, "so5-oracle");
    for _ in 0..10 {
        let w = s.sample_point(&mut rng);
        let f = s.random_observable(&mut rng);
        let g = s.random_observable(&mut rng);
        let oracle = sp.oracle_bracket(&f, &g, &w).unwrap();
        let reduced = sp.reduced_bracket(&f, &g, &w).unwrap().total;
        assert!((reduced - oracle).abs() <= 1e-6 * (1.0 + oracle.abs()), "{reduced} vs {oracle}");
    }
}

#[test]
fn cotangent_round_trip_through_group_action() {
    for name in SCENARIO_NAMES {
        let s = scenario(name).unwrap();
        let sp = &s.manifold;
        let mut rng = SampleRng::stream(6, name);
        for _ in 0..10 {
            let w = s.sample_point(&mut rng);
            let cv = sp.to_cotangent(&w).unwrap();
            let k = s.sample_group(&mut rng);
            let act = sp.action();
            let back = sp.from_cotangent(&act.act(&k, &cv.q), &act.act(&k, &cv.p)).unwrap();
            let d = gauged_reduce::check::point_distance(&s, &w, &back).unwrap();
            assert!(d < 1e-8, "{name}: {d}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn analytic_gradient_matches_finite_differences(seed in any::<u64>(), which in 0usize..4) {
        let s = scenario(SCENARIO_NAMES[which]).unwrap();
        let sp = &s.manifold;
        let mut rng = SampleRng::new(seed);
        let w = s.sample_point(&mut rng);
        let f = s.random_observable(&mut rng);
        let jet = f.gradient(sp, &w).unwrap();
        let fd = fd_point_gradient(|p| f.value(sp, p), sp, &w).unwrap();
        let perp = sp.h_sub().orthocomplement();
        let scale = 1.0 + jet.dx.amax().max(jet.deta.amax()).max(jet.dlambda.amax());
        prop_assert!((&jet.dx - &fd.dx).amax() < 1e-7 * scale);
        prop_assert!((&jet.deta - &fd.deta).amax() < 1e-7 * scale);
        prop_assert!((perp.project(&jet.dlambda) - perp.project(&fd.dlambda)).amax() < 1e-7 * scale);
    }

    #[test]
    fn bracket_is_antisymmetric(seed in any::<u64>(), which in 0usize..4) {
        let s = scenario(SCENARIO_NAMES[which]).unwrap();
        let mut rng = SampleRng::new(seed);
        let w = s.sample_point(&mut rng);
        let f = s.random_observable(&mut rng);
        let g = s.random_observable(&mut rng);
        let fg = s.manifold.reduced_bracket(&f, &g, &w).unwrap().total;
        let gf = s.manifold.reduced_bracket(&g, &f, &w).unwrap().total;
        prop_assert!((fg + gf).abs() < 1e-12 * (1.0 + fg.abs()));
    }
}
