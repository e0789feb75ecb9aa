use crate::field::{ScalarField, SymTensorField, VectorField};
use crate::metric::Geometry;

use super::report::{Entry, IdentityReport, PaperTag};
use super::{defect, require_m, QEData, QeError, Tolerances};

pub struct QeResidual {
    pub e: SymTensorField,
    /// `R + div X - (1/m)|X|² - λ n`.
    pub trace_residual: ScalarField,
    pub report: IdentityReport,
}

pub fn qe_residual(geo: &Geometry, qe: &QEData, tol: &Tolerances) -> Result<QeResidual, QeError> {
    require_m(qe.m)?;
    let n = geo.dim() as f64;
    let e = defect(geo, qe);
    let div_x = geo.div_vector(&qe.x);
    let x2 = geo.norm2(&qe.x);
    let r = geo.scalar_curvature();
    let trace_residual = (&(r + &div_x) - &x2.scale(1.0 / qe.m)).add_const(-qe.lambda * n);
    let trace_e = geo.trace(&e);
    let solution_tol = tol.solution(qe.lambda);

    let mut report = IdentityReport::new();
    report.push(Entry::pointwise(
        "quasi_einstein",
        PaperTag::QeEquation,
        geo.linf_tensor(&e),
        geo.l2_tensor(&e),
        solution_tol,
    ));
    report.push(Entry::pointwise(
        "trace",
        PaperTag::Trace,
        geo.linf(&trace_residual),
        geo.l2(&trace_residual),
        solution_tol * n,
    ));
    // tr E and the trace residual compute div X along different operator paths
    let scale = [r.sup_abs(), div_x.sup_abs(), x2.sup_abs() / qe.m.abs(), qe.lambda.abs() * n]
        .into_iter()
        .fold(1.0, f64::max);
    let consistency = &trace_e - &trace_residual;
    report.push(Entry::pointwise(
        "trace_consistency",
        PaperTag::Trace,
        geo.linf(&consistency),
        geo.l2(&consistency),
        tol.get("trace") * scale,
    ));

    let (mean_r, sd_r) = r.mean_sd();
    let c = r.scale(-1.0).add_const(qe.lambda * n);
    let (c_mean, c_sd) = c.mean_sd();
    report.scalar("sup_e", geo.linf_tensor(&e));
    report.scalar("mean_r", mean_r);
    report.scalar("sd_r", sd_r);
    report.scalar("c", c_mean);
    report.scalar("sd_c", c_sd);
    report.scalar("sup_lie_x", geo.linf_tensor(&geo.lie_derivative(&qe.x)));
    report.scalar("ricci_asymmetry", geo.ricci_asymmetry());
    Ok(QeResidual {
        e,
        trace_residual,
        report,
    })
}

/// `∫ (div X)² = -∫ ∇_X div X` and the pointwise product rule behind it.
pub fn lemma21_check(geo: &Geometry, x: &VectorField, tol: &Tolerances) -> IdentityReport {
    let div_x = geo.div_vector(x);
    let along = geo.directional(&div_x, x);
    let lhs = geo.integrate(&(&div_x * &div_x));
    let rhs = -geo.integrate(&along);

    let mut report = IdentityReport::new();
    report.push(Entry::integral(
        "lemma21_integral",
        PaperTag::IntegralLemma,
        lhs,
        rhs,
        tol.get("integral") * lhs.abs().max(rhs.abs()).max(1.0),
    ));
    let pointwise = &(&geo.div_vector(&x.mul_scalar(&div_x)) - &(&div_x * &div_x)) - &along;
    report.push(Entry::pointwise(
        "lemma21_product_rule",
        PaperTag::ProductRule,
        geo.linf(&pointwise),
        geo.l2(&pointwise),
        tol.get("identity"),
    ));
    report.scalar("integral_div_x_squared", lhs);
    report.scalar("minus_integral_x_div_x", rhs);
    report
}
