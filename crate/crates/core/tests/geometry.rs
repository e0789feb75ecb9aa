mod common;

use std::f64::consts::PI;
use std::time::Instant;

use common::{grid, perturbed_flat, random_vector, rng, torus_of_revolution, trig_poly};
use qe_core::{Geometry, MetricField, OneFormField, ScalarField};

fn bianchi_defect(geo: &Geometry) -> f64 {
    let div_ric = geo.div_symtensor(geo.ricci());
    let half_dr = geo.differential(geo.scalar_curvature());
    let diff = OneFormField::new(
        div_ric
            .comps
            .iter()
            .zip(&half_dr.comps)
            .map(|(a, b)| a - &b.scale(0.5))
            .collect(),
    );
    geo.linf_form(&diff)
}

#[test]
fn torus_of_revolution_scalar_curvature() {
    let start = Instant::now();
    let geo = torus_of_revolution(64);
    let elapsed = start.elapsed();
    let chart = geo.chart().clone();
    let (r0, r) = (2.0, 1.0);
    let exact = ScalarField::from_fn(&chart, |u| 2.0 * u[1].cos() / (r * (r0 + r * u[1].cos()))).unwrap();
    let err = (geo.scalar_curvature() - &exact).sup_abs();
    assert!(err <= 1e-8, "{err}");
    assert!(elapsed.as_secs_f64() < 5.0);
    assert!((geo.volume() - 4.0 * PI * PI * r0 * r).abs() < 1e-10);
    // Gauss-Bonnet: ∫ R = 4π χ = 0
    assert!(geo.integrate(geo.scalar_curvature()).abs() < 1e-9);
}

#[test]
fn contracted_bianchi() {
    let defect = bianchi_defect(&torus_of_revolution(64));
    assert!(defect <= 1e-7, "torus of revolution: {defect}");
    let chart = grid(2, 64);
    for seed in [1, 2] {
        let geo = perturbed_flat(&chart, &mut rng(seed), 0.1);
        let defect = bianchi_defect(&geo);
        assert!(defect <= 1e-7, "seed {seed}: {defect}");
    }
}

#[test]
fn divergence_theorem_and_hessian_trace() {
    let chart = grid(2, 64);
    let mut r = rng(7);
    let geo = perturbed_flat(&chart, &mut r, 0.15);
    let x = random_vector(&chart, &mut r, 1.0);
    let f = trig_poly(&chart, &mut r, 1.0);
    assert!(geo.integrate(&geo.div_vector(&x)).abs() < 1e-10);
    let lap = geo.laplacian(&f);
    assert!(geo.integrate(&lap).abs() < 1e-10);
    assert!((&geo.trace(&geo.hessian(&f)) - &lap).sup_abs() < 1e-10);
    // L_{∇f} g = 2 Hess f
    let lie = geo.lie_derivative(&geo.gradient(&f));
    assert!(geo.linf_tensor(&lie.sub(&geo.hessian(&f).scale(2.0))) < 1e-10);
    // div(f X) = f div X + X(f)
    let lhs = geo.div_vector(&x.mul_scalar(&f));
    let rhs = &(&f * &geo.div_vector(&x)) + &geo.directional(&f, &x);
    let err = (&lhs - &rhs).sup_abs();
    assert!(err < 1e-10, "{err}");
}

#[test]
fn flat_metric_in_skewed_coordinates_is_flat() {
    // the constant metric of a sheared lattice
    let chart = grid(2, 16);
    let comps = ["2", "0.5", "1"].map(|s| qe_core::parse(s).unwrap());
    let geo = Geometry::new(MetricField::from_exprs(&chart, &comps, &Default::default()).unwrap());
    assert_eq!(geo.ricci().sup_component(), 0.0);
    assert!((geo.volume() - 4.0 * PI * PI * 1.75f64.sqrt()).abs() < 1e-12);
}

#[test]
fn conformally_flat_torus_curvature() {
    // g = e^{2f} δ has R = -2 e^{-2f} Δ_0 f
    let chart = grid(2, 64);
    let f = ScalarField::from_fn(&chart, |u| 0.3 * u[0].sin() * u[1].cos()).unwrap();
    let w = f.scale(2.0).exp();
    let g = qe_core::SymTensorField::from_fn(2, |i, j| if i == j { w.clone() } else { ScalarField::zeros(&chart) });
    let geo = Geometry::new(MetricField::new(g).unwrap());
    let lap0 = ScalarField::from_fn(&chart, |u| -0.6 * u[0].sin() * u[1].cos()).unwrap();
    let exact = &f.scale(-2.0).exp().scale(-2.0) * &lap0;
    assert!((geo.scalar_curvature() - &exact).sup_abs() < 1e-9);
}
