use gauged_reduce::expr::{parse, parse_with, BinOp, Dims, Expr, ExprObservable, Func, Var};
use gauged_reduce::scenarios::scenario;
use gauged_reduce::weinstein::{Observable, WeinsteinPoint};
use gauged_reduce::Error;
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0u32..1000, 0u32..4).prop_map(|(m, d)| Expr::Num(m as f64 / 10f64.powi(d as i32))),
        (0usize..3).prop_map(|i| Expr::Var(Var::X(i))),
        (0usize..3).prop_map(|i| Expr::Var(Var::E(i))),
        (0usize..5).prop_map(|i| Expr::Var(Var::L(i))),
        Just(Expr::Var(Var::Lam2)),
        Just(Expr::Var(Var::Kin)),
        Just(Expr::Var(Var::Gbase)),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(5, 48, 2, |inner| {
        let op = prop_oneof![
            Just(BinOp::Add),
            Just(BinOp::Sub),
            Just(BinOp::Mul),
            Just(BinOp::Div),
            Just(BinOp::Pow)
        ];
        let func = prop_oneof![Just(Func::Sin), Just(Func::Cos), Just(Func::Exp), Just(Func::Sqrt)];
        prop_oneof![
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (func, inner.clone()).prop_map(|(f, a)| Expr::Call(f, Box::new(a))),
            (op, inner.clone(), inner).prop_map(|(o, a, b)| Expr::Bin(o, Box::new(a), Box::new(b))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn display_then_parse_is_identity(e in expr()) {
        let text = e.to_string();
        let back = parse(&text).unwrap();
        prop_assert_eq!(back, e, "text: {}", text);
    }

    #[test]
    fn evaluation_matches_closure(a in -2.0f64..2.0, b in 0.1f64..2.0, c in -1.0f64..1.0) {
        let s = scenario("hopf").unwrap();
        let w = WeinsteinPoint::from_slices(&[0.1, 0.2], &[a, b], &[c]);
        let f = s.observable("sin(e1)*e2^2 - exp(l1)/e2 + sqrt(e2)*-e1").unwrap();
        let expected = a.sin() * b * b - c.exp() / b + b.sqrt() * -a;
        prop_assert!((f.value(&s.manifold, &w).unwrap() - expected).abs() < 1e-12 * (1.0 + expected.abs()));
    }
}

#[test]
fn precedence_follows_the_grammar() {
    let s = scenario("hopf").unwrap();
    let w = WeinsteinPoint::from_slices(&[0.5, 0.25], &[2.0, 3.0], &[1.5]);
    let cases = [
        ("-e1^2", -4.0),
        ("e1^e2^0.5", 8f64.sqrt()),
        ("2^-1", 0.5),
        ("e2 - e1 - 1", 0.0),
        ("e2 / e1 / 3", 0.5),
        ("1 + 2*e2^2", 19.0),
        ("2e1", 20.0),
        ("2*e1", 4.0),
        ("1.5E-1 * 10", 1.5),
        ("l1 * x1 + x2", 1.0),
    ];
    for (text, expected) in cases {
        let v = s.observable(text).unwrap().value(&s.manifold, &w).unwrap();
        assert!((v - expected).abs() < 1e-12, "{text}: {v} vs {expected}");
    }
}

#[test]
fn builtin_names_follow_their_definitions() {
    let s = scenario("so3_r3").unwrap();
    let w = WeinsteinPoint::from_slices(&[2.0], &[3.0], &[0.6, -0.8, 0.0]);
    let eval = |t: &str| s.observable(t).unwrap().value(&s.manifold, &w).unwrap();
    assert!((eval("lam2") - 1.0).abs() < 1e-12);
    assert!((eval("gbase") - 1.0).abs() < 1e-12);
    assert!((eval("kin") - 4.5).abs() < 1e-12);
}

#[test]
fn parse_errors_carry_positions() {
    let cases = [("x1 + * 2", 5), ("sin x1", 4), ("(x1 + 2", 7), ("x1 $ 2", 3), ("foo + 1", 0), ("1 2", 2)];
    for (text, pos) in cases {
        match parse(text) {
            Err(Error::Parse { position, .. }) => assert_eq!(position, pos, "{text}"),
            other => panic!("{text}: expected a parse error, got {other:?}"),
        }
    }
}

#[test]
fn indices_are_range_checked() {
    let dims = Dims { base: 1, algebra: 3 };
    assert!(parse_with("x1 + l3", Some(dims)).is_ok());
    assert!(matches!(parse_with("x2", Some(dims)), Err(Error::Parse { .. })));
    assert!(matches!(parse_with("l4", Some(dims)), Err(Error::Parse { .. })));
    assert!(matches!(parse_with("x0", Some(dims)), Err(Error::Parse { .. })));
}

#[test]
fn evaluation_errors_are_reported() {
    let s = scenario("so3_r3").unwrap();
    let w = WeinsteinPoint::from_slices(&[1.0], &[0.0], &[0.0, 0.0, 0.0]);
    for text in ["1/e1", "sqrt(e1 - 1)"] {
        let f = s.observable(text).unwrap();
        assert!(matches!(f.value(&s.manifold, &w), Err(Error::Eval(_))), "{text}");
    }
    let f = ExprObservable::parse("x1", Dims { base: 2, algebra: 1 }).unwrap();
    assert!(matches!(f.value(&s.manifold, &w), Err(Error::InvalidPoint(_))));
    assert_eq!(f.source(), "x1");
    assert_eq!(f.expr().variables(), vec![Var::X(0)]);
}
