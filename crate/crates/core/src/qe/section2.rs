use crate::field::{ScalarField, VectorField};
use crate::metric::Geometry;

use super::report::{Entry, IdentityReport, PaperTag};
use super::{is_constant, require_m, solution_gate, QEData, QeError, Tolerances};

struct Terms {
    div_x: ScalarField,
    lap_div: ScalarField,
    x_div: ScalarField,
    lie2: ScalarField,
}

fn terms(geo: &Geometry, x: &VectorField) -> Terms {
    let div_x = geo.div_vector(x);
    Terms {
        lap_div: geo.laplacian(&div_x),
        x_div: geo.directional(&div_x, x),
        lie2: geo.tensor_norm2(&geo.lie_derivative(x)),
        div_x,
    }
}

/// Left minus right side of the identity for `|X|²` replaced by an arbitrary
/// field `q` (the true identity uses `q = |X|²`).
fn d24(geo: &Geometry, t: &Terms, x: &VectorField, q: &ScalarField, m: f64, lambda: f64) -> ScalarField {
    let lhs = &(&geo.laplacian(q).scale(2.0 / m) + &geo.directional(q, x).scale(2.0 / m))
        - &t.lie2.scale(1.0 / m + 0.5);
    let rhs = [
        t.lap_div.scale(-1.0),
        t.x_div.scale(4.0 / m + 1.0),
        t.div_x.scale(-2.0 * lambda),
        (q * &t.div_x).scale(4.0 / (m * m)),
        (&t.div_x * &t.div_x).scale(2.0 / m),
    ]
    .into_iter()
    .reduce(|a, b| &a + &b)
    .unwrap();
    &lhs - &rhs
}

/// The identity after substituting `|X|² = m div X - m c` and simplifying.
fn d25(t: &Terms, m: f64, lambda: f64, c: f64) -> ScalarField {
    let lhs = &(&t.lap_div.scale(3.0) + &t.x_div.scale(1.0 - 4.0 / m)) - &t.lie2.scale(1.0 / m + 0.5);
    let rhs = &t.div_x.scale(-2.0 * lambda - 4.0 * c / m) + &(&t.div_x * &t.div_x).scale(6.0 / m);
    &lhs - &rhs
}

/// Pointwise difference between the substituted identity and its simplified
/// form; pure algebra, so it vanishes for any fields and any constant `c`.
pub fn substitution_residual(geo: &Geometry, x: &VectorField, m: f64, lambda: f64, c: f64) -> ScalarField {
    let t = terms(geo, x);
    let q = t.div_x.scale(m).add_const(-m * c);
    &d24(geo, &t, x, &q, m, lambda) - &d25(&t, m, lambda, c)
}

pub fn section2_suite(geo: &Geometry, qe: &QEData, tol: &Tolerances) -> Result<IdentityReport, QeError> {
    require_m(qe.m)?;
    let (m, lambda) = (qe.m, qe.lambda);
    let n = geo.dim() as f64;
    let r = geo.scalar_curvature();
    let (c, sd_c) = r.scale(-1.0).add_const(lambda * n).mean_sd();
    let t = terms(geo, &qe.x);
    let gate = solution_gate(geo, qe, tol);

    let mut report = IdentityReport::new();
    report.scalar("c", c);
    report.scalar("sd_c", sd_c);
    report.scalar("sd_r", r.mean_sd().1);

    match &gate {
        Ok(sup_e) => {
            let res = d24(geo, &t, &qe.x, &geo.norm2(&qe.x), m, lambda);
            report.push(
                Entry::pointwise("bgkw_identity", PaperTag::BgkwIdentity, geo.linf(&res), geo.l2(&res), tol.get("identity"))
                    .with_note(format!("sup |E| = {sup_e:.3e}")),
            );
        }
        Err(reason) => report.push(Entry::skipped("bgkw_identity", PaperTag::BgkwIdentity, reason.clone())),
    }

    let sub = substitution_residual(geo, &qe.x, m, lambda, c);
    report.push(Entry::pointwise(
        "substitution",
        PaperTag::Substituted,
        geo.linf(&sub),
        geo.l2(&sub),
        tol.get("identity"),
    ));

    let integral_gate = match gate {
        Err(reason) => Err(reason),
        Ok(_) if !is_constant(r, tol.get("constant")) => {
            Err(format!("scalar curvature is not constant (sd = {:.3e})", r.mean_sd().1))
        }
        Ok(_) => Ok(()),
    };
    let int_div2 = geo.integrate(&(&t.div_x * &t.div_x));
    let int_x_div = geo.integrate(&t.x_div);
    let int_lie2 = geo.integrate(&t.lie2);
    let rel = |a: f64, b: f64| tol.get("integral") * a.abs().max(b.abs()).max(1.0);
    match integral_gate {
        Err(reason) => {
            for (name, tag) in [
                ("integrated_balance", PaperTag::IntegratedBalance),
                ("lemma_rewrite", PaperTag::LemmaRewrite),
                ("signed_balance", PaperTag::SignedBalance),
            ] {
                report.push(Entry::skipped(name, tag, reason.clone()));
            }
        }
        Ok(()) => {
            let (l, r) = ((1.0 - 4.0 / m) * int_x_div, (1.0 / m + 0.5) * int_lie2 + 6.0 / m * int_div2);
            report.push(Entry::integral("integrated_balance", PaperTag::IntegratedBalance, l, r, rel(l, r)));
            let (l, r) = (-(1.0 + 2.0 / m) * int_div2, (0.5 + 1.0 / m) * int_lie2);
            report.push(Entry::integral("lemma_rewrite", PaperTag::LemmaRewrite, l, r, rel(l, r)));
            if m == -2.0 {
                report.push(Entry::skipped("signed_balance", PaperTag::SignedBalance, "m = -2"));
            } else {
                let (l, r) = (-2.0 * int_div2, int_lie2);
                report.push(Entry::integral("signed_balance", PaperTag::SignedBalance, l, r, rel(l, r)));
            }
        }
    }
    report.scalar("integral_div_x_squared", int_div2);
    report.scalar("integral_lie_x_squared", int_lie2);
    Ok(report)
}
