//! Identities for the Killing candidate `K = (2/m) Γ X + ∇Γ`.
//!
//! The rewrite of the equation in terms of `K` and `Γ` is carried with the
//! defect `E`: `L_K g - RHS = (4Γ/m) E` holds for arbitrary fields. Pieces
//! that assume `div K = 0` run only when `sup |div K|` passes the gate.

use crate::field::{OneFormField, ScalarField, SymTensorField, VectorField};
use crate::metric::Geometry;

use super::report::{Entry, IdentityReport, PaperTag};
use super::{defect, require_m, solution_gate, QEData, QeError, Tolerances};

fn form_entry(geo: &Geometry, check: &str, tag: PaperTag, diff: &OneFormField, tol: f64) -> Entry {
    Entry::pointwise(check, tag, geo.linf_form(diff), geo.l2_form(diff), tol)
}

fn scalar_entry(geo: &Geometry, check: &str, tag: PaperTag, diff: &ScalarField, tol: f64) -> Entry {
    Entry::pointwise(check, tag, geo.linf(diff), geo.l2(diff), tol)
}

fn sum_forms(forms: impl IntoIterator<Item = OneFormField>) -> OneFormField {
    forms.into_iter().reduce(|a, b| a.add(&b)).expect("at least one term")
}

/// The right-hand side of the `L_K g` rewrite, term by term.
struct Rewrite {
    kk: SymTensorField,
    gg: SymTensorField,
    ricci: SymTensorField,
    hess: SymTensorField,
    lambda: SymTensorField,
}

impl Rewrite {
    fn new(geo: &Geometry, m: f64, lambda: f64, gamma: &ScalarField, k: &VectorField) -> Self {
        let inv_gamma = gamma.recip();
        let kf = geo.flat(k);
        let dg = geo.differential(gamma);
        Rewrite {
            kk: SymTensorField::square(&kf).mul_scalar(&inv_gamma),
            gg: SymTensorField::square(&dg).mul_scalar(&inv_gamma).scale(-1.0),
            ricci: geo.ricci().mul_scalar(gamma).scale(-4.0 / m),
            hess: geo.hessian(gamma).scale(2.0),
            lambda: geo.metric().tensor().mul_scalar(gamma).scale(4.0 * lambda / m),
        }
    }

    fn total(&self) -> SymTensorField {
        self.kk.add(&self.gg).add(&self.ricci).add(&self.hess).add(&self.lambda)
    }
}

pub fn section3_suite(
    geo: &Geometry,
    qe: &QEData,
    gamma: &ScalarField,
    k: &VectorField,
    tol: &Tolerances,
) -> Result<IdentityReport, QeError> {
    require_m(qe.m)?;
    let min_gamma = gamma.min_value();
    if !(min_gamma > 0.0) {
        return Err(QeError::NonPositiveGamma(min_gamma));
    }
    let (m, lambda) = (qe.m, qe.lambda);
    let n = geo.dim() as f64;
    let e = defect(geo, qe);
    let lie_k = geo.lie_derivative(k);
    let rw = Rewrite::new(geo, m, lambda, gamma, k);
    let rhs36 = rw.total();
    let corr = e.mul_scalar(gamma).scale(4.0 / m);
    let inv_gamma = gamma.recip();
    let div_k = geo.div_vector(k);
    let sup_div_k = geo.linf(&div_k);

    let mut report = IdentityReport::new();
    report.scalar("sup_div_k", sup_div_k);
    report.scalar("sup_e", geo.linf_tensor(&e));
    report.scalar("min_gamma", min_gamma);

    // L_K g = RHS + (4Γ/m) E
    let diff = lie_k.sub(&rhs36).sub(&corr);
    report.push(Entry::pointwise(
        "lie_rewrite",
        PaperTag::LieRewrite,
        geo.linf_tensor(&diff),
        geo.l2_tensor(&diff),
        tol.get("rewrite"),
    ));
    // the same statement solved for Ric: Ric - E = RHS(Ric form)
    let ric_form = {
        let kf = geo.flat(k);
        let dg = geo.differential(gamma);
        let inv2 = (&inv_gamma * &inv_gamma).scale(m / 4.0);
        SymTensorField::square(&kf)
            .mul_scalar(&inv2)
            .sub(&SymTensorField::square(&dg).mul_scalar(&inv2))
            .sub(&lie_k.mul_scalar(&inv_gamma).scale(m / 4.0))
            .add(&geo.hessian(gamma).mul_scalar(&inv_gamma).scale(m / 2.0))
            .add(&geo.metric().tensor().scale(lambda))
    };
    let diff = geo.ricci().sub(&e).sub(&ric_form);
    report.push(Entry::pointwise(
        "ricci_rewrite",
        PaperTag::RicciRewrite,
        geo.linf_tensor(&diff),
        geo.l2_tensor(&diff),
        tol.get("rewrite"),
    ));

    // divergence of both sides, term by term; linear, so no gate
    let div_lie = geo.div_symtensor(&lie_k);
    let div_terms = [&rw.kk, &rw.gg, &rw.ricci, &rw.hess, &rw.lambda].map(|t| geo.div_symtensor(t));
    let div_corr = geo.div_symtensor(&corr);
    let diff = div_lie.sub(&sum_forms(div_terms.iter().cloned())).sub(&div_corr);
    report.push(form_entry(geo, "divergence_rewrite", PaperTag::DivergenceOfRewrite, &diff, tol.get("section3")));

    // trace chain, valid for arbitrary K
    let k2 = geo.norm2(k);
    let grad_gamma = geo.gradient(gamma);
    let g2 = geo.norm2(&grad_gamma);
    let lap = geo.laplacian(gamma);
    let r = geo.scalar_curvature();
    let tr_e = geo.trace(&e);
    let rhs316 = [
        &k2 * &inv_gamma,
        -(&g2 * &inv_gamma),
        (gamma * r).scale(-4.0 / m),
        lap.scale(2.0),
        gamma.scale(4.0 * lambda * n / m),
    ]
    .into_iter()
    .reduce(|a, b| &a + &b)
    .unwrap();
    let diff = &(&div_k.scale(2.0) - &rhs316) - &(gamma * &tr_e).scale(4.0 / m);
    report.push(scalar_entry(geo, "trace_rewrite", PaperTag::TraceRewrite, &diff, tol.get("section3")));

    let inv2 = &inv_gamma * &inv_gamma;
    let rhs317 = [
        &k2 * &inv2,
        -(&g2 * &inv2),
        (&lap * &inv_gamma).scale(2.0),
        geo.constant(4.0 * lambda * n / m),
        tr_e.scale(4.0 / m),
        (&div_k * &inv_gamma).scale(-2.0),
    ]
    .into_iter()
    .reduce(|a, b| &a + &b)
    .unwrap();
    let diff = &r.scale(4.0 / m) - &rhs317;
    report.push(scalar_entry(geo, "trace_divided", PaperTag::TraceDivided, &diff, tol.get("section3")));

    // derivative identity along K
    let half_gamma = gamma.scale(0.5);
    let lhs318 = (gamma * &geo.directional(r, k)).scale(2.0 / m);
    let direct = &half_gamma * &geo.directional(&rhs317, k);
    report.push(scalar_entry(
        geo,
        "derivative_identity",
        PaperTag::DerivativeIdentity,
        &(&lhs318 - &direct),
        tol.get("section3"),
    ));
    let grad_k = geo.inner(&grad_gamma, k);
    let nabla_kk = geo.covariant_along(k, k);
    let nabla_gg = geo.covariant_along(&grad_gamma, &grad_gamma);
    let grad_lap = geo.gradient(&lap);
    let correction = &tr_e.scale(4.0 / m) - &(&div_k * &inv_gamma).scale(2.0);
    let expanded = [
        &geo.inner(&nabla_kk, k) * &inv_gamma,
        -(&geo.inner(&nabla_gg, k) * &inv_gamma),
        -(&(&k2 * &inv2) * &grad_k),
        &(&g2 * &inv2) * &grad_k,
        geo.inner(&grad_lap, k),
        -(&(&lap * &inv_gamma) * &grad_k),
        &half_gamma * &geo.directional(&correction, k),
    ]
    .into_iter()
    .reduce(|a, b| &a + &b)
    .unwrap();
    report.push(scalar_entry(
        geo,
        "derivative_expanded",
        PaperTag::DerivativeIdentity,
        &(&lhs318 - &expanded),
        tol.get("section3"),
    ));

    // pieces that assume div K = 0
    let gate_tol = tol.get("div_k");
    let gated = [
        ("div_kk", PaperTag::DivKK),
        ("div_gamma_grad", PaperTag::DivGammaGrad),
        ("div_gamma_ricci", PaperTag::DivGammaRicci),
        ("div_hessian", PaperTag::DivHessian),
        ("contracted", PaperTag::Contracted),
        ("stokes_lambda", PaperTag::StokesLambda),
        ("stokes_laplacian", PaperTag::StokesLaplacian),
    ];
    if sup_div_k > gate_tol {
        let reason = format!("requires div K = 0 (sup |div K| = {sup_div_k:.3e} > {gate_tol:.1e})");
        for (name, tag) in gated {
            report.push(Entry::skipped(name, tag, reason.clone()));
        }
        return Ok(report);
    }
    let t = tol.get("section3");
    let kf = geo.flat(k);
    let dg = geo.differential(gamma);
    let ric_grad = geo.contract(geo.ricci(), &grad_gamma);

    let formula = geo.flat(&nabla_kk).mul_scalar(&inv_gamma).sub(&kf.mul_scalar(&(&grad_k * &inv2)));
    report.push(form_entry(geo, "div_kk", PaperTag::DivKK, &div_terms[0].sub(&formula), t));

    let formula = sum_forms([
        dg.mul_scalar(&(&lap * &inv_gamma)).scale(-1.0),
        geo.flat(&nabla_gg).mul_scalar(&inv_gamma).scale(-1.0),
        dg.mul_scalar(&(&g2 * &inv2)),
    ]);
    report.push(form_entry(geo, "div_gamma_grad", PaperTag::DivGammaGrad, &div_terms[1].sub(&formula), t));

    let formula = geo
        .differential(r)
        .mul_scalar(gamma)
        .scale(-2.0 / m)
        .sub(&ric_grad.scale(4.0 / m));
    report.push(form_entry(geo, "div_gamma_ricci", PaperTag::DivGammaRicci, &div_terms[2].sub(&formula), t));

    let formula = ric_grad.scale(2.0).add(&geo.differential(&lap).scale(2.0));
    report.push(form_entry(geo, "div_hessian", PaperTag::DivHessian, &div_terms[3].sub(&formula), t));

    // assembled pieces contracted with K, against div(L_K g - (4Γ/m) E)(K)
    let ric_gk = geo.pair(&ric_grad, k);
    let assembled = [
        &geo.inner(&nabla_kk, k) * &inv_gamma,
        -(&(&k2 * &inv2) * &grad_k),
        -(&(&lap * &inv_gamma) * &grad_k),
        -(&geo.inner(&nabla_gg, k) * &inv_gamma),
        &(&g2 * &inv2) * &grad_k,
        (gamma * &geo.directional(r, k)).scale(-2.0 / m),
        ric_gk.scale(-4.0 / m),
        ric_gk.scale(2.0),
        geo.inner(&grad_lap, k).scale(2.0),
        grad_k.scale(4.0 * lambda / m),
    ]
    .into_iter()
    .reduce(|a, b| &a + &b)
    .unwrap();
    let direct = geo.pair(&div_lie.sub(&div_corr), k);
    report.push(
        scalar_entry(geo, "contracted", PaperTag::Contracted, &(&direct - &assembled), t)
            .with_note("λ term enters as (4λ/m) div(Γ g)(K)"),
    );

    let lambda_term = geo.integrate(&geo.pair(&div_terms[4], k));
    report.push(Entry::integral("stokes_lambda", PaperTag::StokesLambda, lambda_term, 0.0, t));
    let lap_term = geo.integrate(&geo.inner(&grad_lap, k).scale(2.0));
    let pointwise = &geo.inner(&grad_lap, k).scale(2.0) - &geo.div_vector(&k.mul_scalar(&lap)).scale(2.0);
    report.push(
        Entry::integral("stokes_laplacian", PaperTag::StokesLaplacian, lap_term, 0.0, t)
            .with_note(format!("sup |2⟨∇ΔΓ, K⟩ - 2 div(ΔΓ K)| = {:.3e}", geo.linf(&pointwise))),
    );
    Ok(report)
}

/// `∫ div(L_K g)(K) dV = -½ ∫ |L_K g|² dV`, for any `K`.
pub fn lie_div_energy(geo: &Geometry, k: &VectorField, tol: &Tolerances) -> IdentityReport {
    let lie = geo.lie_derivative(k);
    let lhs = geo.integrate(&geo.pair(&geo.div_symtensor(&lie), k));
    let rhs = -0.5 * geo.integrate(&geo.tensor_norm2(&lie));
    let mut report = IdentityReport::new();
    report.push(Entry::integral(
        "energy",
        PaperTag::Energy,
        lhs,
        rhs,
        tol.get("energy") * rhs.abs().max(1.0),
    ));
    report.scalar("sup_lie_k", geo.linf_tensor(&lie));
    report
}

/// The integral criterion: `K` is Killing iff `(m - 2) ∫ Ric(∇Γ, K) dV = 0`.
pub fn killing_integral_condition(
    geo: &Geometry,
    qe: &QEData,
    gamma: &ScalarField,
    k: &VectorField,
    tol: &Tolerances,
) -> Result<IdentityReport, QeError> {
    require_m(qe.m)?;
    let m = qe.m;
    let mut report = IdentityReport::new();
    let checks = [
        ("integral_condition", PaperTag::IntegralCondition),
        ("killing_criterion", PaperTag::KillingCriterion),
        ("killing_condition", PaperTag::KillingCondition),
    ];

    let mut reasons = Vec::new();
    if let Err(r) = solution_gate(geo, qe, tol) {
        reasons.push(r);
    }
    let min_gamma = gamma.min_value();
    if !(min_gamma > 0.0) {
        reasons.push(format!("Γ is not positive (min {min_gamma:.3e})"));
    }
    let sup_div_k = geo.linf(&geo.div_vector(k));
    if sup_div_k > tol.get("gamma") {
        reasons.push(format!("div K is not zero (sup {sup_div_k:.3e})"));
    }
    report.scalar("sup_div_k", sup_div_k);
    if !reasons.is_empty() {
        let reason = format!("inapplicable: {}", reasons.join("; "));
        for (name, tag) in checks {
            report.push(Entry::skipped(name, tag, reason.clone()));
        }
        if m == 2.0 {
            report.push(Entry::skipped("m2_killing", PaperTag::KillingCriterion, reason));
        }
        return Ok(report);
    }

    let grad_gamma = geo.gradient(gamma);
    let integral = geo.integrate(&geo.bilinear(geo.ricci(), &grad_gamma, k));
    let coefficient = (2.0 * m - 4.0) / m;
    let lie = geo.lie_derivative(k);
    let energy = -0.5 * geo.integrate(&geo.tensor_norm2(&lie));
    let div_term = geo.integrate(&geo.pair(&geo.div_symtensor(&lie), k));
    let sup_lie = geo.linf_tensor(&lie);
    report.scalar("integral_ricci_grad_gamma_k", integral);
    report.scalar("coefficient", coefficient);
    report.scalar("energy", energy);
    report.scalar("integral_div_lie_k", div_term);
    report.scalar("sup_lie_k", sup_lie);

    let scale = energy.abs().max((coefficient * integral).abs()).max(1.0);
    report.push(
        Entry::integral(
            "integral_condition",
            PaperTag::IntegralCondition,
            energy,
            coefficient * integral,
            tol.get("integral") * scale,
        )
        .with_note(format!("∫ div(L_K g)(K) = {div_term:.6e}")),
    );
    let killing_tol = tol.get("killing");
    let condition = ((m - 2.0) * integral).abs() <= killing_tol * scale;
    let killing = sup_lie <= killing_tol;
    report.push(Entry::logical("killing_criterion", PaperTag::KillingCriterion, condition == killing).with_note(
        format!("(m - 2) ∫ Ric(∇Γ, K) = {:.3e}, sup |L_K g| = {sup_lie:.3e}", (m - 2.0) * integral),
    ));
    let vanishes = (coefficient * integral).abs() <= killing_tol * scale;
    report.push(Entry::logical("killing_condition", PaperTag::KillingCondition, vanishes == killing));
    if m == 2.0 {
        report.push(
            Entry::logical("m2_killing", PaperTag::KillingCriterion, coefficient == 0.0 && killing)
                .with_note(format!("coefficient = {coefficient}, sup |L_K g| = {sup_lie:.3e}")),
        );
    }
    // divergence-free X with constant Γ: X itself must be Killing
    let sup_div_x = geo.linf(&geo.div_vector(&qe.x));
    if sup_div_x <= killing_tol && geo.linf_vector(&grad_gamma) <= killing_tol {
        let lie_x = geo.linf_tensor(&geo.lie_derivative(&qe.x));
        report.push(Entry::bound("divergence_free", PaperTag::DivergenceFree, lie_x, killing_tol));
    }
    Ok(report)
}
