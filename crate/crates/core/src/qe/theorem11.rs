use crate::metric::Geometry;

use super::report::{Entry, IdentityReport, PaperTag};
use super::{require_m, solution_gate, QEData, QeError, Tolerances};

/// Constant scalar curvature holds exactly when X is Killing.
pub fn theorem11_check(geo: &Geometry, qe: &QEData, tol: &Tolerances) -> Result<IdentityReport, QeError> {
    require_m(qe.m)?;
    let (mean_r, sd_r) = geo.scalar_curvature().mean_sd();
    let lie = geo.linf_tensor(&geo.lie_derivative(&qe.x));
    let abs_x: Vec<f64> = geo.norm2(&qe.x).values().iter().map(|a| a.max(0.0).sqrt()).collect();
    let count = abs_x.len() as f64;
    let mean_x = abs_x.iter().sum::<f64>() / count;
    let sd_x = (abs_x.iter().map(|a| (a - mean_x).powi(2)).sum::<f64>() / count).sqrt();

    let mut report = IdentityReport::new();
    report.scalar("sd_r", sd_r);
    report.scalar("mean_r", mean_r);
    report.scalar("sup_lie_x", lie);
    report.scalar("sd_abs_x", sd_x);

    let constant_tol = tol.get("constant");
    let constant_r = sd_r <= constant_tol * mean_r.abs().max(1.0);
    let killing = lie <= tol.get("killing");
    let note = format!("sd(R) = {sd_r:.3e}, sup |L_X g| = {lie:.3e}, sd(|X|) = {sd_x:.3e}");

    if let Err(reason) = solution_gate(geo, qe, tol) {
        report.push(Entry::skipped("theorem11", PaperTag::ConstantCurvature, reason).with_note(note));
        return Ok(report);
    }
    if qe.m == -2.0 {
        report.push(
            Entry::skipped("theorem11", PaperTag::ConstantCurvature, "out of theorem scope: m = -2").with_note(note),
        );
        return Ok(report);
    }
    report.push(Entry::logical("theorem11", PaperTag::ConstantCurvature, constant_r == killing).with_note(note));
    if killing {
        report.push(Entry::bound(
            "constant_x_norm",
            PaperTag::ConstantCurvature,
            sd_x,
            constant_tol * mean_x.max(1.0),
        ));
    }
    Ok(report)
}
