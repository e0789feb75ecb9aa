mod common;

use std::time::Instant;

use common::{grid, torus_of_revolution};
use qe_core::qe::{gamma_solve, killing_candidate, GammaOptions, QeError};
use qe_core::zoo::{construct, Generator};
use qe_core::{Bindings, GeneratorSpec, Geometry, MetricField, ScalarField, VectorField};

#[test]
fn divergence_free_field_gives_constant_gamma() {
    let chart = grid(2, 16);
    let geo = Geometry::new(MetricField::euclidean(&chart));
    let x = VectorField::parse(&chart, &["sin(u2)", "0.5"], &Bindings::new()).unwrap();
    let sol = gamma_solve(&geo, &x, 3.0, &GammaOptions::default()).unwrap();
    assert!(sol.mu.abs() <= 1e-10, "{}", sol.mu);
    assert!((sol.gamma.max_value() - 1.0).abs() < 1e-12);
    assert!((sol.gamma.min_value() - 1.0).abs() < 1e-9);
}

#[test]
fn gradient_field_on_flat_torus() {
    let start = Instant::now();
    let chart = grid(2, 64);
    let geo = Geometry::new(MetricField::euclidean(&chart));
    let x = geo.gradient(&ScalarField::parse(&chart, "sin(u1)", &Bindings::new()).unwrap());
    let sol = gamma_solve(&geo, &x, 2.0, &GammaOptions::default()).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    assert!(sol.min_gamma > 0.0);
    let div_k = killing_candidate(&geo, &x, 2.0, &sol.gamma).unwrap().div_k;
    assert!(div_k.sup_abs() <= 1e-7, "{}", div_k.sup_abs());
    let exact = ScalarField::parse(&chart, "exp(-sin(u1) - 1)", &Bindings::new()).unwrap();
    assert!((&sol.gamma - &exact).sup_abs() < 1e-9);
    assert!(elapsed < 30.0, "{elapsed} s");
}

#[test]
fn curved_metric_with_drift() {
    let geo = torus_of_revolution(32);
    let chart = geo.chart().clone();
    let x = VectorField::parse(&chart, &["0.3*cos(u2)", "sin(u1) + 0.2"], &Bindings::new()).unwrap();
    let sol = gamma_solve(&geo, &x, -3.0, &GammaOptions::default()).unwrap();
    assert!(sol.min_gamma > 0.0);
    let div_k = killing_candidate(&geo, &x, -3.0, &sol.gamma).unwrap().div_k;
    assert!(div_k.sup_abs() <= 1e-7, "{}", div_k.sup_abs());
    // deterministic to the last bit
    let again = gamma_solve(&geo, &x, -3.0, &GammaOptions::default()).unwrap();
    assert_eq!(sol.gamma.values(), again.gamma.values());
}

#[test]
fn unsupported_inputs() {
    let (m, qe) = construct(&GeneratorSpec::new(Generator::S1CrossEinstein { rho: 1.0, m: -2.0 })).unwrap();
    let err = gamma_solve(&m.geometry, &qe.unwrap().x, -2.0, &GammaOptions::default()).unwrap_err();
    assert!(matches!(err, QeError::Unsupported(_)));
    let chart = grid(2, 8);
    let geo = Geometry::new(MetricField::euclidean(&chart));
    assert!(matches!(
        gamma_solve(&geo, &VectorField::zeros(&chart), 0.0, &GammaOptions::default()),
        Err(QeError::ZeroM)
    ));
    let opts = GammaOptions { max_nodes: 10, ..GammaOptions::default() };
    assert!(matches!(gamma_solve(&geo, &VectorField::zeros(&chart), 1.0, &opts), Err(QeError::Unsupported(_))));
}
