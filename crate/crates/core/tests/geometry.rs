use gauged_reduce::connection::ProductTangent;
use gauged_reduce::linalg::rank_split;
use gauged_reduce::rng::SampleRng;
use gauged_reduce::scenarios::{scenario, SCENARIO_NAMES};
use gauged_reduce::{CoAlgebraElement, Error};
use nalgebra::{DMatrix, DVector, Vector3};
use proptest::prelude::*;

fn dv(v: Vector3<f64>) -> DVector<f64> {
    DVector::from_column_slice(v.as_slice())
}

fn point3() -> impl Strategy<Value = Vector3<f64>> {
    prop::array::uniform3(-2.0f64..2.0)
        .prop_map(|a| Vector3::new(a[0], a[1], a[2]))
        .prop_filter("away from the fixed point", |v| v.norm() > 0.2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn so3_r3_momentum_is_angular_momentum(q in point3(), p in point3()) {
        let s = scenario("so3_r3").unwrap();
        let mu = s.manifold.momentum_map(&dv(q), &dv(p));
        prop_assert!((mu.coeffs - dv(q.cross(&p))).amax() < 1e-12);
    }

    #[test]
    fn so3_r3_inertia_is_rigid_body_tensor(q in point3()) {
        let s = scenario("so3_r3").unwrap();
        let i = s.manifold.inertia_tensor(&dv(q)).unwrap().matrix;
        let expected = DMatrix::identity(3, 3) * q.norm_squared() - dv(q) * dv(q).transpose();
        prop_assert!((i - expected).amax() < 1e-12);
    }

    #[test]
    fn so3_r3_connection_is_angular_velocity(q in point3(), v in point3()) {
        let s = scenario("so3_r3").unwrap();
        let a = s.manifold.connection(&dv(q), &dv(v)).unwrap();
        let expected = q.cross(&v) / q.norm_squared();
        prop_assert!((a.coeffs - dv(expected)).amax() < 1e-12);
    }

    #[test]
    fn so3_r3_isotropy_is_the_radial_line(q in point3()) {
        let s = scenario("so3_r3").unwrap();
        let k = s.manifold.isotropy_algebra(&dv(q)).unwrap();
        prop_assert_eq!(k.dim(), 1);
        prop_assert!(k.distance(&dv(q)) < 1e-12 * q.norm());
    }
}

#[test]
fn hopf_curvature_matches_closed_form() {
    let s = scenario("hopf").unwrap();
    let sp = &s.manifold;
    let j = sp.action().generator(0).clone();
    let mut rng = SampleRng::stream(7, "hopf-curvature");
    for _ in 0..20 {
        let q = s.sample_q(&mut rng);
        let t = sp.embedding().tangent_basis(&q);
        let v1 = &t * rng.normal_vec(3);
        let v2 = &t * rng.normal_vec(3);
        let curv = sp.curvature(&q, &v1, &v2).unwrap();
        let expected = 2.0 * (&j * &v1).dot(&v2);
        assert!((curv.coeffs[0] - expected).abs() < 1e-8, "{} vs {expected}", curv.coeffs[0]);
    }
}

#[test]
fn hopf_magnetic_term_from_closed_form_curvature() {
    let s = scenario("hopf").unwrap();
    let sp = &s.manifold;
    let j = sp.action().generator(0).clone();
    let w = &s.designated_point;
    let h1 = sp.horizontal_lift(&w.x, &DVector::from_column_slice(&[1.0, 0.0])).unwrap();
    let h2 = sp.horizontal_lift(&w.x, &DVector::from_column_slice(&[0.0, 1.0])).unwrap();
    let expected = w.lambda.coeffs[0] * 2.0 * (&j * &h1).dot(&h2);
    let term = gauged_reduce::check::magnetic_term(&s).unwrap();
    assert!((term - expected).abs() < 1e-8, "{term} vs {expected}");
    assert!((term - s.magnetic_regression.unwrap()).abs() < 1e-8);
}

#[test]
fn so3_r3_horizontal_curvature_vanishes() {
    let s = scenario("so3_r3").unwrap();
    let sp = &s.manifold;
    let mut rng = SampleRng::stream(3, "flat");
    for _ in 0..20 {
        let q = s.sample_q(&mut rng);
        let hb = sp.horizontal_basis(&q);
        let v1 = &hb * rng.normal_vec(hb.ncols());
        let v2 = &hb * rng.normal_vec(hb.ncols());
        assert!(sp.curvature(&q, &v1, &v2).unwrap().max_abs() < 1e-10);
    }
}

#[test]
fn so3_r3_db_reference_value() {
    let s = scenario("so3_r3").unwrap();
    let sp = &s.manifold;
    let g = s.algebra();
    let q = DVector::from_column_slice(&[0.0, 0.0, 1.0]);
    let xi1 = ProductTangent {
        v: sp.fundamental_field(&g.basis_element(1), &q).unwrap(),
        lambda_dot: CoAlgebraElement::zeros(3),
    };
    let xi2 = ProductTangent {
        v: DVector::zeros(3),
        lambda_dot: CoAlgebraElement::from_slice(&[0.0, 1.0, 0.0]),
    };
    let lambda = CoAlgebraElement::from_slice(&[1.0, 0.0, 0.0]);
    let explicit = sp.db_form(&q, &lambda, &xi1, &xi2).unwrap();
    let fd = sp.db_form_fd(&q, &lambda, &xi1, &xi2).unwrap();
    assert!((explicit + 1.0).abs() < 1e-12);
    assert!((fd + 1.0).abs() < 1e-8);
}

#[test]
fn section_is_a_right_inverse_of_base_coords() {
    for name in SCENARIO_NAMES {
        let s = scenario(name).unwrap();
        let sp = &s.manifold;
        let mut rng = SampleRng::stream(11, name);
        for _ in 0..10 {
            let x = s.sample_x(&mut rng);
            let q = sp.section(&x);
            assert!(sp.embedding().residual(&q) < 1e-12, "{name}");
            assert!((sp.section_model().base_coords(&q) - &x).amax() < 1e-12, "{name}");
            let w = rng.normal_vec(sp.base_dim());
            let lift = sp.horizontal_lift(&x, &w).unwrap();
            assert!(sp.connection(&q, &lift).unwrap().max_abs() < 1e-10, "{name}");
        }
    }
}

#[test]
fn off_manifold_points_are_rejected() {
    let s = scenario("hopf").unwrap();
    let q = DVector::from_column_slice(&[1.0, 0.5, 0.0, 0.0]);
    assert!(matches!(s.manifold.inertia_tensor(&q), Err(Error::OffManifold { .. })));
    let on = DVector::from_column_slice(&[1.0, 0.0, 0.0, 0.0]);
    let radial = DVector::from_column_slice(&[1.0, 0.0, 0.0, 0.0]);
    assert!(matches!(s.manifold.connection(&on, &radial), Err(Error::OffTangent { .. })));
}

#[test]
fn hopf_lower_hemisphere_cannot_be_canonicalized() {
    let s = scenario("hopf").unwrap();
    let q = DVector::from_column_slice(&[0.3, 0.0, 0.9539392014169456, 0.0]);
    assert!(matches!(
        s.manifold.section_model().canonicalize(&q),
        Err(Error::CanonicalizationFailure(_))
    ));
}

#[test]
fn so5_dependent_pair_cannot_be_canonicalized() {
    let s = scenario("so5_pairs").unwrap();
    let mut q = DVector::zeros(10);
    q[0] = 0.6;
    q[5] = 0.8;
    assert!(matches!(
        s.manifold.section_model().canonicalize(&q),
        Err(Error::CanonicalizationFailure(_))
    ));
}

#[test]
fn so5_isotropy_is_so3_along_orbits() {
    let s = scenario("so5_pairs").unwrap();
    let mut rng = SampleRng::stream(5, "so5-iso");
    for _ in 0..20 {
        let q = s.sample_q(&mut rng);
        assert_eq!(s.manifold.isotropy_algebra(&q).unwrap().dim(), 3);
    }
}

#[test]
fn rank_split_handles_tiny_entries_beside_unit_ones() {
    let s = scenario("so5_pairs").unwrap();
    let q = DVector::from_column_slice(&[
        0.5404392349127828,
        0.00025781250139466743,
        1.3546578916840764e-19,
        1.0539775908968047e-19,
        2.5172184620591023e-20,
        -0.3792102069799362,
        0.7510825426155462,
        1.825617106489355e-19,
        -5.883177002155657e-20,
        -3.4805804842930823e-19,
    ]);
    let z = s.manifold.action().zeta_matrix(&q);
    let split = rank_split(&z);
    assert_eq!(split.rank, 7);
    let recon = &split.col_space
        * DMatrix::from_diagonal(&DVector::from_column_slice(&split.singular_values[..7]))
        * split.row_space.transpose();
    assert!((recon - &z).amax() < 1e-14);
}
