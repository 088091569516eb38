use cclb_core::hierarchy::*;
use cclb_core::matrices::{gen_equality, gen_hamming_distance, hypercube_trace_lower, random_matrix};
use cclb_core::{CommMatrix, Convention, MeasureKind, MeasureReport, MeasureValue, Outcome};
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn caps() -> VerifyCaps {
    VerifyCaps::default()
}

fn assert_clean(m: &CommMatrix) -> VerificationReport {
    let r = verify_all(m, &caps(), DEFAULT_EPS);
    assert!(r.violations().is_empty(), "{}", render_text(&r));
    r
}

fn record(id: &str) -> RelationRecord {
    registry().into_iter().find(|r| r.id == id).unwrap()
}

#[test]
fn registry_contents() {
    let reg = registry();
    let asserted = reg.iter().filter(|r| r.severity == Severity::Assert).count();
    assert!(asserted >= 14, "{asserted} asserted records");
    assert!(reg.iter().any(|r| r.severity == Severity::Report));
    assert!(reg.iter().all(|r| !r.statement.is_empty()));
    validate_registry(&reg).unwrap();
    for r in &reg {
        for id in r.measures() {
            let spec = measure_spec(id).unwrap();
            if r.severity == Severity::Assert {
                assert!(spec.certified, "{} uses {id}", r.id);
            }
        }
    }
}

#[test]
fn registry_validation_catches_bad_records() {
    let mut reg = registry();
    let mut bad = record("rec-lambda");
    bad.id = "bad";
    bad.severity = Severity::Assert;
    reg.push(bad);
    assert!(validate_registry(&reg).is_err());
    let mut reg = registry();
    reg.push(record("cover-sum"));
    assert!(validate_registry(&reg).is_err());
}

#[test]
fn equality_two_is_clean() {
    let r = assert_clean(&gen_equality(2).unwrap());
    assert_eq!(r.value("D"), Some(3.0));
    assert_eq!(r.value("C"), Some(8.0));
    let held = r.relations.iter().filter(|o| o.outcome == Outcome::Holds).count();
    assert!(held >= 14, "{held} relations held");
}

#[test]
fn all_ones_values() {
    let r = assert_clean(&CommMatrix::all_ones(4, 4, Convention::Boolean01).unwrap());
    assert_eq!(r.value("D"), Some(0.0));
    assert!((r.value("gamma2").unwrap() - 1.0).abs() < 1e-5);
    assert!((r.value("prt").unwrap() - 1.0).abs() < 1e-6);
    assert!(r.skip_reason("N0").is_some());
    let nl = r.relations.iter().find(|o| o.id == "nondet-log").unwrap();
    assert_eq!(nl.outcome, Outcome::Holds);
    assert!(nl.reason.as_deref().unwrap().contains("N0"));
}

#[test]
fn exhaustive_three_by_three() {
    for mask in 0u32..512 {
        let m = CommMatrix::from_bool_fn(3, 3, |i, j| mask >> (3 * i + j) & 1 == 1).unwrap();
        assert_clean(&m);
    }
}

#[test]
fn random_suite() {
    for seed in 0..200u64 {
        let n = 4 + (seed % 2) as usize;
        let conv = if seed % 3 == 0 { Convention::SignPM1 } else { Convention::Boolean01 };
        assert_clean(&random_matrix(n, n, conv, seed).unwrap());
    }
}

#[test]
fn generator_instances() {
    for spec in ["eq:1", "eq:3", "hd:2", "hd:3", "hd:3:2", "gt:5", "gt:8", "hadamard:1", "hadamard:2"] {
        assert_clean(&parse_instance(spec).unwrap());
    }
}

#[test]
fn deterministic() {
    let m = random_matrix(4, 5, Convention::Boolean01, 3).unwrap();
    let a = verify_all(&m, &caps(), DEFAULT_EPS);
    let b = verify_all(&m, &caps(), DEFAULT_EPS);
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(MeasureReport::from_json(&a.to_json()).unwrap(), a);
}

#[test]
fn fabricated_violation_is_caught() {
    let m = gen_equality(1).unwrap();
    let mut r = MeasureReport::new("fake");
    r.push(MeasureValue::exact("C", 5.0));
    r.push(MeasureValue::exact("C0", 2.0));
    r.push(MeasureValue::exact("C1", 2.0));
    let out = record("cover-sum").evaluate(&m, &r);
    assert_eq!(out.outcome, Outcome::Violated);
    assert_eq!(out.margin, Some(-1.0));
    r.push(MeasureValue::exact("C", 4.0));
    assert_eq!(record("cover-sum").evaluate(&m, &r).outcome, Outcome::Holds);
}

#[test]
fn brackets_are_respected() {
    let m = gen_equality(1).unwrap();
    let lp = record("prt-log-D");
    let mut r = MeasureReport::new("fake");
    r.push(MeasureValue::exact("D", 1.0));
    // A one-sided lower bound at 2 cannot refute log2 prt <= 1.
    let mut lower = MeasureValue::with_kind("prt", 2.0, MeasureKind::LowerBound);
    lower.lower = Some(2.0);
    r.push(lower);
    assert_eq!(lp.evaluate(&m, &r).outcome, Outcome::Holds);
    r.push(MeasureValue::bracket("prt", 3.0, 2.9, 3.1));
    assert_eq!(lp.evaluate(&m, &r).outcome, Outcome::Violated);
    let empty = MeasureReport::new("empty");
    let out = lp.evaluate(&m, &empty);
    assert_eq!(out.outcome, Outcome::Skipped);
    assert!(out.reason.unwrap().contains("not computed"));
}

#[test]
fn convention_applicability() {
    let m = gen_equality(1).unwrap().to_sign();
    let out = record("rank-rank-plus").evaluate(&m, &MeasureReport::new("x"));
    assert_eq!(out.outcome, Outcome::Skipped);
    let stub = record("quantum-disc");
    assert_eq!(stub.severity, Severity::Document);
}

#[test]
fn unknown_measure_rejected() {
    assert!(compute_measure(&gen_equality(1).unwrap(), "nope", DEFAULT_EPS, &caps()).is_err());
    let r = measure_all(&gen_equality(1).unwrap(), &["D", "nope"], DEFAULT_EPS, &caps());
    assert_eq!(r.value("D"), Some(2.0));
    assert!(r.skip_reason("nope").is_some());
}

#[test]
fn equality_sweeps() {
    let t = sweep(Family::Eq, 1..=5, &["gamma2"], DEFAULT_EPS, &caps()).unwrap();
    assert_eq!(t.rows.len(), 5);
    assert!(t.rows.iter().all(|r| (r.value - 1.0).abs() < 1e-4));
    let fit = &t.fits[0];
    assert!(fit.exponent.abs() < 1e-4);
    let d = sweep(Family::Eq, 1..=3, &["D"], DEFAULT_EPS, &caps()).unwrap();
    assert_eq!(d.column("D"), vec![(1, 2.0), (2, 3.0), (3, 4.0)]);
}

#[test]
fn hamming_one_sweep() {
    let t = sweep(Family::parse("hd1").unwrap(), 2..=6, &["gamma2"], DEFAULT_EPS, &caps()).unwrap();
    let col = t.column("gamma2");
    assert_eq!(col.len(), 5);
    for w in col.windows(2) {
        assert!(w[1].1 >= w[0].1 - 1e-4);
    }
    for &(n, v) in &col {
        let lo = hypercube_trace_lower(n).unwrap().to_f64().unwrap();
        assert!(v >= lo - 1e-4 && v <= (n as f64).sqrt() + 1e-4, "n={n}: {v}");
    }
    let csv = t.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert_eq!(lines.count(), 5);
    assert!(csv.contains("hd1,4,gamma2,"));
}

#[test]
fn exponent_fit_recovers_power_law() {
    let pts: Vec<(usize, f64)> = (1..=6).map(|n| (n, 3.0 * (n as f64).powf(0.5))).collect();
    let f = fit_exponent("x", &pts).unwrap();
    assert!((f.exponent - 0.5).abs() < 1e-12);
    assert!((f.intercept.exp() - 3.0).abs() < 1e-12);
    assert!((f.r2 - 1.0).abs() < 1e-12);
    assert!(fit_exponent("x", &[(2, 1.0)]).is_none());
}

#[test]
fn instance_specs() {
    assert_eq!(parse_instance("eq:2").unwrap().rows(), 4);
    let hd = parse_instance("hd:2:1").unwrap();
    assert_eq!(hd, gen_hamming_distance(2, 1).unwrap());
    assert_eq!(parse_instance("hd:2").unwrap(), hd);
    assert_eq!(parse_instance("pgint:2").unwrap().rows(), 29);
    assert!(parse_instance("foo:2").is_err());
    assert!(parse_instance("eq").is_err());
    assert!(parse_instance("eq:x").is_err());
    assert_eq!(Family::parse("hd2").unwrap(), Family::Hd(2));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_small_matrices_are_clean(r in 1usize..5, c in 1usize..5, sign in any::<bool>(), seed in any::<u64>()) {
        let conv = if sign { Convention::SignPM1 } else { Convention::Boolean01 };
        let m = random_matrix(r, c, conv, seed).unwrap();
        let rep = verify_all(&m, &caps(), DEFAULT_EPS);
        prop_assert!(rep.violations().is_empty(), "{}", render_text(&rep));
    }

    #[test]
    fn transpose_preserves_exact_measures(r in 1usize..5, c in 1usize..5, seed in any::<u64>()) {
        let m = random_matrix(r, c, Convention::Boolean01, seed).unwrap();
        let ids = ["D", "CP", "C0", "C1", "rank"];
        let a = measure_all(&m, &ids, DEFAULT_EPS, &caps());
        let b = measure_all(&m.transpose(), &ids, DEFAULT_EPS, &caps());
        for id in ids {
            prop_assert_eq!(a.value(id), b.value(id));
        }
    }
}
