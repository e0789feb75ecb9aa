//! The Killing candidate `K = (2/m) Γ X + ∇Γ` and the search for a positive
//! `Γ` with `div K = 0`.

use faer::linalg::solvers::Solve;
use faer::{Mat, Par};

use crate::chart::Backend;
use crate::field::{ScalarField, VectorField};
use crate::metric::Geometry;

use super::{require_m, QeError};

pub struct KillingCandidate {
    pub k: VectorField,
    pub div_k: ScalarField,
}

pub fn killing_candidate(geo: &Geometry, x: &VectorField, m: f64, gamma: &ScalarField) -> Result<KillingCandidate, QeError> {
    require_m(m)?;
    let min = gamma.min_value();
    if !(min > 0.0) {
        return Err(QeError::NonPositiveGamma(min));
    }
    let k = x.mul_scalar(gamma).scale(2.0 / m).add(&geo.gradient(gamma));
    let div_k = geo.div_vector(&k);
    Ok(KillingCandidate { k, div_k })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaOptions {
    pub max_iterations: usize,
    /// Target for `‖L Γ - μ Γ‖ / ‖Γ‖`.
    pub residual: f64,
    /// Success requires `|μ| ≤ kernel · ‖L‖_∞`.
    pub kernel: f64,
    /// Largest grid the dense factorization accepts.
    pub max_nodes: usize,
}

impl Default for GammaOptions {
    fn default() -> Self {
        GammaOptions {
            max_iterations: 500,
            residual: 1e-10,
            kernel: 1e-8,
            max_nodes: 5000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GammaSolution {
    /// Normalized so that `max Γ = 1`.
    pub gamma: ScalarField,
    pub mu: f64,
    pub min_gamma: f64,
    /// `‖L‖_∞`, the scale `μ` is judged against.
    pub operator_scale: f64,
    pub iterations: usize,
    pub residual: f64,
    /// Shift actually used by the inverse iteration.
    pub shift: f64,
}

/// Dense matrix of `Γ ↦ div((2/m) Γ X + ∇Γ)` in node values.
///
/// Written in divergence form `S⁻¹ Σ_i D_i S (Σ_j G^ij D_j + (2/m) X^i)` with
/// `S = diag(√g)`, so the adjoint of the constants is preserved exactly.
fn assemble(geo: &Geometry, x: &VectorField, m: f64) -> Mat<f64> {
    let chart = geo.chart();
    let diff = match &chart.backend {
        Backend::Spectral(d) => d,
        Backend::Jet(_) => unreachable!("checked by the caller"),
    };
    let n = chart.dim();
    let len = chart.len();
    let s = geo.metric().sqrt_det().values();
    let counts: Vec<usize> = chart.axes().iter().map(|a| a.len()).collect();
    let strides: Vec<usize> = (0..n).map(|a| chart.stride(a)).collect();
    let coord = |p: usize, a: usize| (p / strides[a]) % counts[a];
    let mut mat = Mat::<f64>::zeros(len, len);

    for i in 0..n {
        let di = &diff[i];
        let ni = counts[i];
        let xi = x.comps[i].values();
        for j in 0..n {
            let dj = &diff[j];
            let nj = counts[j];
            let w: Vec<f64> = geo
                .metric()
                .inv(i, j)
                .values()
                .iter()
                .zip(&s)
                .map(|(g, s)| g * s)
                .collect();
            for p in 0..len {
                let (pi, pj) = (coord(p, i), coord(p, j));
                if i == j {
                    // p, r, q on one line along axis i
                    let base = p - pi * strides[i];
                    for qi in 0..ni {
                        let mut acc = 0.0;
                        for k in 0..ni {
                            let r = base + k * strides[i];
                            acc += di[pi * ni + k] * w[r] * di[k * ni + qi];
                        }
                        mat[(p, base + qi * strides[i])] += acc;
                    }
                } else {
                    // r shares axis j with p and axis i with q
                    let base = p - pi * strides[i] - pj * strides[j];
                    for qi in 0..ni {
                        let dpq = di[pi * ni + qi];
                        if dpq == 0.0 {
                            continue;
                        }
                        let r = base + qi * strides[i] + pj * strides[j];
                        for qj in 0..nj {
                            let q = base + qi * strides[i] + qj * strides[j];
                            mat[(p, q)] += dpq * w[r] * dj[pj * nj + qj];
                        }
                    }
                }
            }
        }
        // drift term D_i S (2/m) X^i
        for p in 0..len {
            let pi = coord(p, i);
            let base = p - pi * strides[i];
            for qi in 0..ni {
                let q = base + qi * strides[i];
                mat[(p, q)] += di[pi * ni + qi] * s[q] * (2.0 / m) * xi[q];
            }
        }
    }
    for p in 0..len {
        let inv = 1.0 / s[p];
        for q in 0..len {
            mat[(p, q)] *= inv;
        }
    }
    mat
}

/// Adds `s · P`, where `P` projects onto grid functions carrying a Nyquist
/// component along some axis. Fourier differentiation annihilates those modes,
/// so without the shift they pollute the kernel with checkerboard vectors.
fn shift_nyquist(a: &mut Mat<f64>, geo: &Geometry, s: f64) {
    let chart = geo.chart();
    let len = chart.len();
    let dim = chart.dim();
    let counts: Vec<usize> = chart.axes().iter().map(|a| a.len()).collect();
    let idx: Vec<Vec<usize>> = (0..len).map(|p| (0..dim).map(|ax| chart.node_index(p, ax)).collect()).collect();
    for p in 0..len {
        for q in 0..len {
            // I - ⊗_a (I - p_a), with p_a = (-1)^(i+j) / N_a
            let mut keep = 1.0;
            for ax in 0..dim {
                let (i, j) = (idx[p][ax], idx[q][ax]);
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                keep *= if i == j { 1.0 } else { 0.0 } - sign / counts[ax] as f64;
            }
            let proj = if p == q { 1.0 } else { 0.0 } - keep;
            a[(p, q)] += s * proj;
        }
    }
}

fn matvec(a: &Mat<f64>, v: &[f64]) -> Vec<f64> {
    (0..a.nrows())
        .map(|p| (0..a.ncols()).map(|q| a[(p, q)] * v[q]).sum())
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

struct Iteration {
    v: Vec<f64>,
    residual: f64,
    iterations: usize,
}

fn inverse_iteration(a: &Mat<f64>, shift: f64, opts: &GammaOptions) -> Option<Iteration> {
    let len = a.nrows();
    let mut shifted = a.clone();
    for p in 0..len {
        shifted[(p, p)] -= shift;
    }
    let lu = shifted.partial_piv_lu();
    let mut v = vec![1.0 / (len as f64).sqrt(); len];
    let mut last = None;
    for it in 1..=opts.max_iterations {
        let rhs = Mat::<f64>::from_fn(len, 1, |p, _| v[p]);
        let y = lu.solve(&rhs);
        let mut w: Vec<f64> = (0..len).map(|p| y[(p, 0)]).collect();
        let nw = norm(&w);
        if !(nw.is_finite() && nw > 0.0) {
            return None;
        }
        w.iter_mut().for_each(|x| *x /= nw);
        v = w;
        let av = matvec(a, &v);
        let mu: f64 = av.iter().zip(&v).map(|(a, b)| a * b).sum();
        let r: Vec<f64> = av.iter().zip(&v).map(|(a, b)| a - mu * b).collect();
        let residual = norm(&r);
        last = Some(Iteration {
            v: v.clone(),
            residual,
            iterations: it,
        });
        if residual <= opts.residual {
            break;
        }
    }
    last
}

/// Finds the positive `Γ` spanning the near-kernel of `Γ ↦ div K` by inverse
/// iteration on a dense factorization.
///
/// Only grid charts are supported. The factorization runs sequentially so
/// results are reproducible bit for bit.
pub fn gamma_solve(geo: &Geometry, x: &VectorField, m: f64, opts: &GammaOptions) -> Result<GammaSolution, QeError> {
    require_m(m)?;
    let chart = geo.chart();
    if !chart.is_grid() {
        return Err(QeError::Unsupported("gamma_solve requires a periodic grid chart".into()));
    }
    if chart.len() > opts.max_nodes {
        return Err(QeError::Unsupported(format!(
            "gamma_solve uses a dense factorization and accepts at most {} nodes (got {}); lower the grid resolution",
            opts.max_nodes,
            chart.len()
        )));
    }
    faer::set_global_parallelism(Par::Seq);
    let a = assemble(geo, x, m);
    // ‖L‖_∞ of the operator itself, before the Nyquist shift
    let scale = (0..a.nrows())
        .map(|p| (0..a.ncols()).map(|q| a[(p, q)].abs()).sum::<f64>())
        .fold(0.0, f64::max);

    // an exactly singular factorization overflows; retry slightly off zero
    let op = a.clone();
    let mut a = a;
    shift_nyquist(&mut a, geo, scale.max(1.0));
    let attempt = inverse_iteration(&a, 0.0, opts)
        .map(|it| (it, 0.0))
        .or_else(|| {
            let shift = 1e-12 * scale.max(1.0);
            inverse_iteration(&a, shift, opts).map(|it| (it, shift))
        });
    let (it, shift) = attempt.ok_or(QeError::NotConverged {
        iterations: 0,
        residual: f64::INFINITY,
    })?;
    if it.residual > opts.residual {
        return Err(QeError::NotConverged {
            iterations: it.iterations,
            residual: it.residual,
        });
    }
    // μ and the residual as seen by the unshifted operator
    let lv = matvec(&op, &it.v);
    let mu: f64 = lv.iter().zip(&it.v).map(|(a, b)| a * b).sum();
    let residual = norm(&lv.iter().zip(&it.v).map(|(a, b)| a - mu * b).collect::<Vec<_>>());
    let peak = it.v.iter().copied().fold(0.0_f64, |m, x| if x.abs() > m.abs() { x } else { m });
    let values: Vec<f64> = it.v.iter().map(|x| x / peak).collect();
    let min_gamma = values.iter().copied().fold(f64::INFINITY, f64::min);
    if !(mu.abs() <= opts.kernel * scale) || !(min_gamma > 0.0) {
        return Err(QeError::NoPositiveKernel { mu, min_gamma });
    }
    let gamma = ScalarField::from_values(chart, values).expect("grid field");
    Ok(GammaSolution {
        gamma,
        mu,
        min_gamma,
        operator_scale: scale,
        iterations: it.iterations,
        residual,
        shift,
    })
}
