use qe_core::qe::{
    killing_candidate, killing_integral_condition, lemma21_check, qe_residual, section2_suite, section3_suite,
    structure_checks, theorem11_check, Tolerances,
};
use qe_core::zoo::{construct, Generator};
use qe_core::{GeneratorSpec, Geometry, IdentityReport, QEData, ScalarField, Verdict};

fn exact(g: Generator) -> (Geometry, QEData) {
    let (m, qe) = construct(&GeneratorSpec::new(g)).unwrap();
    (m.geometry, qe.expect("generator carries a solution"))
}

fn s1_cross(m: f64) -> Generator {
    Generator::S1CrossEinstein { rho: 1.0, m }
}

fn all_reports(geo: &Geometry, qe: &QEData) -> Vec<(&'static str, IdentityReport)> {
    let tol = Tolerances::default();
    let gamma = ScalarField::constant(geo.chart(), 1.0);
    let k = killing_candidate(geo, &qe.x, qe.m, &gamma).unwrap().k;
    vec![
        ("qe_residual", qe_residual(geo, qe, &tol).unwrap().report),
        ("lemma21", lemma21_check(geo, &qe.x, &tol)),
        ("section2", section2_suite(geo, qe, &tol).unwrap()),
        ("theorem11", theorem11_check(geo, qe, &tol).unwrap()),
        ("section3", section3_suite(geo, qe, &gamma, &k, &tol).unwrap()),
        ("killing_integral", killing_integral_condition(geo, qe, &gamma, &k, &tol).unwrap()),
        ("structure", structure_checks(geo, qe, &tol).unwrap()),
    ]
}

fn assert_no_failures(name: &str, reports: &[(&str, IdentityReport)]) {
    for (check, r) in reports {
        assert!(r.failures().next().is_none(), "{name}: {check} failed: {:?}", r.failures().collect::<Vec<_>>());
    }
}

#[test]
fn exact_solutions_have_vanishing_defect() {
    let cases = [
        ("circle", Generator::CircleQe { c: 1.5, m: 3.0 }),
        ("sphere", Generator::RoundSphere { radius: 1.0, m: Some(2.0) }),
        ("s1xs2 m=-2", s1_cross(-2.0)),
        ("s1xs2 m=-4", s1_cross(-4.0)),
    ];
    for (name, g) in cases {
        let (geo, qe) = exact(g);
        let res = qe_residual(&geo, &qe, &Tolerances::default()).unwrap();
        let sup_e = geo.linf_tensor(&res.e);
        assert!(sup_e <= 1e-10, "{name}: sup |E| = {sup_e}");
        let t11 = theorem11_check(&geo, &qe, &Tolerances::default()).unwrap();
        assert!(t11.failures().next().is_none(), "{name}");
        assert_no_failures(name, &all_reports(&geo, &qe));
    }
}

#[test]
fn killing_criterion_with_solved_gamma() {
    use qe_core::qe::{gamma_solve, GammaOptions};
    let tol = Tolerances::default();
    let flat_m2 = {
        let spec = GeneratorSpec::new(Generator::FlatTorus { dim: 2, periods: None }).with_resolution(16);
        let geo = construct(&spec).unwrap().0.geometry;
        let qe = QEData::new(2.0, 0.0, qe_core::VectorField::zeros(geo.chart())).unwrap();
        (geo, qe)
    };
    let circle = {
        let spec = GeneratorSpec::new(Generator::CircleQe { c: 1.5, m: 2.0 }).with_resolution(32);
        let (m, qe) = construct(&spec).unwrap();
        (m.geometry, qe.unwrap())
    };
    for (geo, qe) in [flat_m2, circle] {
        let sol = gamma_solve(&geo, &qe.x, qe.m, &GammaOptions::default()).unwrap();
        let k = killing_candidate(&geo, &qe.x, qe.m, &sol.gamma).unwrap().k;
        let report = killing_integral_condition(&geo, &qe, &sol.gamma, &k, &tol).unwrap();
        assert!(report.passed());
        let m2 = report.entry("m2_killing").unwrap();
        assert_eq!(m2.verdict, Verdict::Pass);
        assert_eq!(report.scalars["coefficient"], 0.0);
    }
}

#[test]
fn non_solution_skips_solution_only_checks() {
    let spec = GeneratorSpec::new(Generator::TorusOfRevolution { r0: 2.0, r: 1.0 }).with_resolution(32);
    let geo = construct(&spec).unwrap().0.geometry;
    let qe = QEData::new(3.0, 1.0, qe_core::VectorField::coordinate(geo.chart(), 0, 1.0)).unwrap();
    let tol = Tolerances::default();
    let t11 = theorem11_check(&geo, &qe, &tol).unwrap();
    assert!(matches!(t11.entry("theorem11").unwrap().verdict, Verdict::Skipped(_)));
    let s2 = section2_suite(&geo, &qe, &tol).unwrap();
    assert!(matches!(s2.entry("bgkw_identity").unwrap().verdict, Verdict::Skipped(_)));
    assert_eq!(s2.entry("substitution").unwrap().verdict, Verdict::Pass);
}
