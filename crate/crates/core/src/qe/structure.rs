//! Consequences for solutions with Killing X: the Einstein alternative, the
//! Ricci spectrum, parallelism, and triviality of gradient solutions.

use nalgebra::DMatrix;

use crate::chart::AxisKind;
use crate::field::{SymTensorField, VectorField};
use crate::metric::Geometry;

use super::report::{Entry, IdentityReport, PaperTag};
use super::{is_constant, require_m, solution_gate, QEData, QeError, Tolerances};

fn node_matrix(t: &SymTensorField, p: usize) -> DMatrix<f64> {
    let n = t.dim();
    DMatrix::from_fn(n, n, |i, j| t.get(i, j).value(p))
}

/// Eigenvalues of `g⁻¹ T` at node `p`, ascending.
pub fn relative_eigenvalues(geo: &Geometry, t: &SymTensorField, p: usize) -> Vec<f64> {
    let g = node_matrix(geo.metric().tensor(), p);
    let chol = g.cholesky().expect("metric is positive definite");
    let l_inv = chol.l().try_inverse().expect("triangular factor is invertible");
    let c = &l_inv * node_matrix(t, p) * l_inv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let mut ev: Vec<f64> = c.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `|∇T|² = g^ab g^ik g^jl ∇_a T_ij ∇_b T_kl` at every node, as a sup of roots.
fn sup_nabla_tensor(geo: &Geometry, t: &SymTensorField) -> f64 {
    let n = geo.dim();
    let nabla = geo.nabla_symtensor(t);
    let mut total = geo.constant(0.0);
    for a in 0..n {
        for b in 0..n {
            // g^ab ⟨∇_a T, ∇_b T⟩ via polarization of the full contraction
            let plus = geo.tensor_norm2(&nabla[a].add(&nabla[b]));
            let minus = geo.tensor_norm2(&nabla[a].sub(&nabla[b]));
            let inner = (&plus - &minus).scale(0.25);
            total = &total + &(geo.metric().inv(a, b) * &inner);
        }
    }
    total.values().iter().fold(0.0, |m, v| m.max(v.max(0.0).sqrt()))
}

/// `|∇X|² = g^ab g_jl ∇_a X^j ∇_b X^l`, sup of the root.
fn sup_nabla_vector(geo: &Geometry, x: &VectorField) -> f64 {
    let n = geo.dim();
    let nabla = geo.nabla_vector(x);
    let mut total = geo.constant(0.0);
    for a in 0..n {
        for b in 0..n {
            let va = VectorField::new(nabla[a].clone());
            let vb = VectorField::new(nabla[b].clone());
            total = &total + &(geo.metric().inv(a, b) * &geo.inner(&va, &vb));
        }
    }
    total.values().iter().fold(0.0, |m, v| m.max(v.max(0.0).sqrt()))
}

pub fn structure_checks(geo: &Geometry, qe: &QEData, tol: &Tolerances) -> Result<IdentityReport, QeError> {
    require_m(qe.m)?;
    let mut report = IdentityReport::new();
    let names = [
        ("einstein", PaperTag::Einstein),
        ("killing_reduced", PaperTag::KillingReduced),
        ("ricci_eigenvalues", PaperTag::RicciStructure),
        ("parallel", PaperTag::RicciStructure),
        ("parallel_identity", PaperTag::RicciStructure),
        ("gradient_trivial", PaperTag::ConstantCurvature),
    ];
    if let Err(reason) = solution_gate(geo, qe, tol) {
        for (name, tag) in names {
            report.push(Entry::skipped(name, tag, reason.clone()));
        }
        return Ok(report);
    }
    let (m, lambda) = (qe.m, qe.lambda);
    let n = geo.dim();
    let killing_tol = tol.get("killing");
    let ric = geo.ricci();
    let r = geo.scalar_curvature();
    let g = geo.metric().tensor();
    let sup_x = geo.linf_vector(&qe.x);
    let lie_x = geo.linf_tensor(&geo.lie_derivative(&qe.x));
    let killing = lie_x <= killing_tol;

    let einstein_dev = geo.linf_tensor(&ric.sub(&g.mul_scalar(&r.scale(1.0 / n as f64))));
    report.scalar("einstein_deviation", einstein_dev);
    report.scalar("sup_x", sup_x);
    report.scalar("sup_lie_x", lie_x);
    if n == 1 {
        report.push(Entry::skipped("einstein", PaperTag::Einstein, "n = 1: circles admit X ≠ 0"));
    } else if einstein_dev <= killing_tol {
        report.push(Entry::bound("einstein", PaperTag::Einstein, sup_x, killing_tol));
    } else {
        report.push(Entry::skipped("einstein", PaperTag::Einstein, "metric is not Einstein"));
    }

    if !killing {
        for (name, tag) in &names[1..5] {
            report.push(Entry::skipped(name, *tag, format!("X is not Killing (sup |L_X g| = {lie_x:.3e})")));
        }
    } else {
        let xf = geo.flat(&qe.x);
        let reduced = ric.sub(&SymTensorField::square(&xf).scale(1.0 / m)).sub(&g.scale(lambda));
        report.push(Entry::pointwise(
            "killing_reduced",
            PaperTag::KillingReduced,
            geo.linf_tensor(&reduced),
            geo.l2_tensor(&reduced),
            tol.solution(lambda),
        ));

        let x2 = geo.norm2(&qe.x).values();
        let mut worst: f64 = 0.0;
        let mut compared = 0usize;
        for (p, &x2p) in x2.iter().enumerate() {
            if x2p.sqrt() <= killing_tol {
                continue;
            }
            let mut want = vec![lambda; n - 1];
            want.push(lambda + x2p / m);
            want.sort_by(f64::total_cmp);
            let got = relative_eigenvalues(geo, ric, p);
            for (a, b) in got.iter().zip(&want) {
                worst = worst.max((a - b).abs());
            }
            compared += 1;
        }
        if compared == 0 {
            report.push(Entry::skipped("ricci_eigenvalues", PaperTag::RicciStructure, "X = 0 at every node"));
        } else {
            report.push(
                Entry::bound("ricci_eigenvalues", PaperTag::RicciStructure, worst, tol.get("eigen"))
                    .with_note(format!("{compared} nodes compared")),
            );
        }

        let nabla_ric = sup_nabla_tensor(geo, ric);
        let nabla_x = sup_nabla_vector(geo, &qe.x);
        report.scalar("sup_nabla_ric", nabla_ric);
        report.scalar("sup_nabla_x", nabla_x);
        report.push(
            Entry::logical("parallel", PaperTag::RicciStructure, (nabla_ric <= killing_tol) == (nabla_x <= killing_tol))
                .with_note(format!("sup |∇Ric| = {nabla_ric:.3e}, sup |∇X| = {nabla_x:.3e}")),
        );

        // ∇_k Ric = (1/m)(∇_k X* ⊗ X* + X* ⊗ ∇_k X*)
        let nabla = geo.nabla_symtensor(ric);
        let dx = geo.nabla_vector(&qe.x);
        let mut worst: f64 = 0.0;
        for (k, nk) in nabla.iter().enumerate() {
            let dxf = geo.flat(&VectorField::new(dx[k].clone()));
            let want = SymTensorField::symmetric_product(&dxf, &xf).scale(1.0 / m);
            worst = worst.max(geo.linf_tensor(&nk.sub(&want)));
        }
        report.push(Entry::bound("parallel_identity", PaperTag::RicciStructure, worst, tol.get("section3")));
    }

    // closed X* with zero periods is a gradient; with constant R it must vanish
    let xf = geo.flat(&qe.x);
    let mut curl: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            curl = curl.max((&xf.comps[i].partial(j) - &xf.comps[j].partial(i)).sup_abs());
        }
    }
    let chart = geo.chart();
    let weights = chart.weights();
    let total: f64 = weights.iter().sum();
    let mut period: f64 = 0.0;
    for (i, axis) in chart.axes().iter().enumerate() {
        if matches!(axis.kind, AxisKind::Periodic { .. }) {
            let mean = xf.comps[i].values().iter().zip(weights).map(|(v, w)| v * w).sum::<f64>() / total;
            period = period.max(mean.abs());
        }
    }
    report.scalar("sup_curl", curl);
    report.scalar("max_period", period);
    let gradient = curl <= killing_tol && period <= killing_tol;
    if !gradient {
        report.push(Entry::skipped("gradient_trivial", PaperTag::ConstantCurvature, "X is not a gradient"));
    } else if !is_constant(r, tol.get("constant")) {
        report.push(Entry::skipped("gradient_trivial", PaperTag::ConstantCurvature, "scalar curvature is not constant"));
    } else {
        report.push(Entry::bound("gradient_trivial", PaperTag::ConstantCurvature, sup_x, killing_tol));
    }
    Ok(report)
}
