mod common;

use std::f64::consts::PI;

use common::{grid, random_vector, rng, torus_of_revolution, trig_poly};
use qe_core::qe::{
    killing_candidate, lemma21_check, lie_div_energy, qe_residual, section3_suite, substitution_residual, Tolerances,
};
use qe_core::{Bindings, Geometry, MetricField, QEData, ScalarField, VectorField, Verdict};
use rand::Rng;

fn entry_residual(report: &qe_core::IdentityReport, name: &str) -> f64 {
    report.entry(name).unwrap_or_else(|| panic!("missing {name}")).residual.unwrap()
}

#[test]
fn lemma21_on_flat_torus() {
    let chart = grid(2, 64);
    let geo = Geometry::new(MetricField::euclidean(&chart));
    let x = geo.gradient(&ScalarField::parse(&chart, "sin(u1)", &Bindings::new()).unwrap());
    let report = lemma21_check(&geo, &x, &Tolerances::default());
    let two_pi2 = 2.0 * PI * PI;
    assert!((report.scalars["integral_div_x_squared"] - two_pi2).abs() <= 1e-8);
    assert!((report.scalars["minus_integral_x_div_x"] - two_pi2).abs() <= 1e-8);
    assert!(report.passed());

    let mut r = rng(21);
    for _ in 0..5 {
        let x = random_vector(&chart, &mut r, 1.0);
        let report = lemma21_check(&geo, &x, &Tolerances::default());
        assert!(entry_residual(&report, "lemma21_product_rule") <= 1e-8);
        assert!(report.passed());
    }
}

#[test]
fn negative_control_flat_torus() {
    let chart = grid(2, 64);
    let geo = Geometry::new(MetricField::euclidean(&chart));
    let qe = QEData::new(1.0, -4.0, VectorField::coordinate(&chart, 0, 2.0)).unwrap();
    let res = qe_residual(&geo, &qe, &Tolerances::default()).unwrap();
    // E = -X*⊗X* + 4g = diag(0, 4)
    assert!((geo.linf_tensor(&res.e) - 4.0).abs() <= 1e-9);
    assert_eq!(res.report.entry("quasi_einstein").unwrap().verdict, Verdict::Fail);
}

#[test]
fn rewrite_with_defect_correction_on_arbitrary_fields() {
    let geo = torus_of_revolution(64);
    let chart = geo.chart().clone();
    let tol = Tolerances::default();
    let x = &geo.gradient(&ScalarField::parse(&chart, "sin(u1)", &Bindings::new()).unwrap())
        .add(&VectorField::coordinate(&chart, 1, 1.0));
    let gamma = ScalarField::parse(&chart, "2 + cos(u2)*sin(u1)/4", &Bindings::new()).unwrap();
    for (m, lambda) in [(3.0, 0.7), (-2.0, -1.0), (0.5, 4.0)] {
        let qe = QEData::new(m, lambda, x.clone()).unwrap();
        let k = killing_candidate(&geo, x, m, &gamma).unwrap().k;
        let report = section3_suite(&geo, &qe, &gamma, &k, &tol).unwrap();
        assert!(entry_residual(&report, "lie_rewrite") <= 1e-7, "m = {m}");
        assert!(report.scalars["sup_e"] > 1e-2);
    }

    let mut r = rng(6);
    for case in 0..10 {
        let x = random_vector(&chart, &mut r, 0.5);
        let gamma = trig_poly(&chart, &mut r, 0.3).add_const(2.0);
        let m = loop {
            let m: f64 = r.random_range(-5.0..5.0);
            if m.abs() > 0.2 {
                break m;
            }
        };
        let lambda = r.random_range(-2.0..2.0);
        let qe = QEData::new(m, lambda, x.clone()).unwrap();
        let k = killing_candidate(&geo, &x, m, &gamma).unwrap().k;
        let report = section3_suite(&geo, &qe, &gamma, &k, &tol).unwrap();
        let rewrite = entry_residual(&report, "lie_rewrite");
        assert!(rewrite <= 1e-7, "case {case}: {rewrite}");
        for name in ["ricci_rewrite", "divergence_rewrite", "trace_rewrite", "trace_divided", "derivative_identity"] {
            assert!(!report.entry(name).unwrap().verdict.is_fail(), "case {case}: {name}");
        }
        let c: f64 = r.random_range(-1.0..1.0);
        let sub = geo.linf(&substitution_residual(&geo, &x, m, lambda, c));
        assert!(sub <= 1e-8, "case {case}: {sub}");
    }
}

#[test]
fn energy_identity() {
    let tol = Tolerances::default();
    let chart = grid(2, 64);
    let flat = Geometry::new(MetricField::euclidean(&chart));
    let k = flat.gradient(&ScalarField::parse(&chart, "sin(u1)", &Bindings::new()).unwrap());
    let report = lie_div_energy(&flat, &k, &tol);
    let e = report.entry("energy").unwrap();
    assert!((e.rhs.unwrap() + 4.0 * PI * PI).abs() <= 1e-7);
    assert!(report.passed());

    let t3 = Geometry::new(MetricField::euclidean(&grid(3, 24)));
    let torus = torus_of_revolution(64);
    let mut r = rng(13);
    for geo in [&t3, &torus] {
        for _ in 0..10 {
            let k = random_vector(geo.chart(), &mut r, 1.0);
            let report = lie_div_energy(geo, &k, &tol);
            let e = report.entry("energy").unwrap();
            let (lhs, rhs) = (e.lhs.unwrap(), e.rhs.unwrap());
            assert!((lhs - rhs).abs() <= 1e-7 * rhs.abs().max(1.0), "{lhs} {rhs}");
        }
    }
}
