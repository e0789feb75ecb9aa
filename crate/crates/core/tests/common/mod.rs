#![allow(dead_code)]

use std::sync::Arc;

use qe_core::field::sym_index;
use qe_core::zoo::{construct, Generator};
use qe_core::{Chart, ChartGrid, GeneratorSpec, Geometry, MetricField, ScalarField, SymTensorField, VectorField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A few low Fourier modes with random amplitudes and phases.
pub fn trig_poly(chart: &Arc<Chart>, rng: &mut ChaCha8Rng, amplitude: f64) -> ScalarField {
    let dim = chart.dim();
    let modes: Vec<(Vec<f64>, f64, f64)> = (0..4)
        .map(|_| {
            let k: Vec<f64> = (0..dim).map(|_| rng.random_range(-2i32..=2) as f64).collect();
            (k, rng.random_range(-amplitude..amplitude), rng.random_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    let offset = rng.random_range(-amplitude..amplitude);
    ScalarField::from_fn(chart, |u| {
        offset
            + modes
                .iter()
                .map(|(k, a, phase)| a * (k.iter().zip(u).map(|(k, u)| k * u).sum::<f64>() + phase).sin())
                .sum::<f64>()
    })
    .unwrap()
}

pub fn random_vector(chart: &Arc<Chart>, rng: &mut ChaCha8Rng, amplitude: f64) -> VectorField {
    VectorField::new((0..chart.dim()).map(|_| trig_poly(chart, rng, amplitude)).collect())
}

/// `δ_ij + ε h_ij` with small trigonometric `h`, positive definite for small `ε`.
pub fn perturbed_flat(chart: &Arc<Chart>, rng: &mut ChaCha8Rng, eps: f64) -> Geometry {
    let n = chart.dim();
    let comps: Vec<ScalarField> = (0..n * (n + 1) / 2).map(|_| trig_poly(chart, rng, eps)).collect();
    let g = SymTensorField::from_fn(n, |i, j| {
        let h = comps[sym_index(n, i, j)].clone();
        if i == j {
            h.add_const(1.0)
        } else {
            h
        }
    });
    Geometry::new(MetricField::new(g).unwrap())
}

pub fn grid(dim: usize, n: usize) -> Arc<Chart> {
    ChartGrid::uniform(dim, n).build().unwrap()
}

pub fn torus_of_revolution(n: usize) -> Geometry {
    let spec = GeneratorSpec::new(Generator::TorusOfRevolution { r0: 2.0, r: 1.0 }).with_resolution(n);
    construct(&spec).unwrap().0.geometry
}
