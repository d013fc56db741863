use gauged_reduce::check::{run_checks, run_many, CheckConfig, Provenance};
use gauged_reduce::scenarios::{builtin_scenarios, scenario, SCENARIO_NAMES};
use gauged_reduce::Error;

#[test]
fn builtins_pass_their_self_checks() {
    let all = builtin_scenarios();
    assert_eq!(all.len(), SCENARIO_NAMES.len());
    for (s, name) in all.iter().zip(SCENARIO_NAMES) {
        assert_eq!(s.name, name);
        s.self_check().unwrap();
        s.manifold.validate_point(&s.designated_point).unwrap();
    }
}

#[test]
fn unknown_scenario_is_an_error() {
    assert!(matches!(scenario("so4_r4"), Err(Error::UnknownScenario(n)) if n == "so4_r4"));
    assert!(run_many(&["hopf", "nope"], &CheckConfig::default()).is_err());
}

#[test]
fn check_reports_pass_with_small_samples() {
    let cfg = CheckConfig {
        seed: 7,
        samples: 4,
        flow_time: 0.2,
        flow_dt: 1e-3,
    };
    let reports = run_many(&SCENARIO_NAMES, &cfg).unwrap();
    for r in &reports {
        let failures: Vec<_> = r.failures().map(|e| format!("{}/{}: {}", e.suite, e.name, e.actual)).collect();
        assert!(r.pass, "{}: {failures:?}", r.scenario);
        assert_eq!(r.seed, 7);
        assert!(r.leaf.is_some());
    }
    let so5 = &reports[3];
    let tagged: Vec<_> = so5.entries.iter().filter(|e| e.provenance == Provenance::Paper).collect();
    assert!(tagged.iter().any(|e| e.name == "leaf_dimension" && e.actual == 6.0));
    let json = serde_json::to_value(so5).unwrap();
    assert_eq!(json["scenario"], "so5_pairs");
    assert!(json["entries"].as_array().unwrap().iter().any(|e| e["provenance"] == "PAPER"));
}

#[test]
fn check_runs_are_reproducible() {
    let s = scenario("hopf").unwrap();
    let cfg = CheckConfig {
        samples: 3,
        flow_time: 0.1,
        ..CheckConfig::default()
    };
    let a = run_checks(&s, &cfg);
    let b = run_checks(&s, &cfg);
    for (x, y) in a.entries.iter().zip(&b.entries) {
        assert_eq!(x.name, y.name);
        assert_eq!(x.actual.to_bits(), y.actual.to_bits(), "{}", x.name);
    }
}
