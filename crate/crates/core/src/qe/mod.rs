//! Checks of the m-quasi-Einstein equation
//! `Ric + ½ L_X g - (1/m) X*⊗X* = λ g` and the identities derived from it.
//!
//! Every check returns an [`IdentityReport`]. Identities that only hold on
//! solutions are either carried with the defect tensor `E` as an explicit
//! correction, or skipped with a reason when the input is not a solution.

pub mod killing;
pub mod report;
mod residual;
mod section2;
mod section3;
mod structure;
mod theorem11;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::field::{ScalarField, VectorField};
use crate::metric::Geometry;
use crate::GeometryError;

pub use killing::{gamma_solve, killing_candidate, GammaOptions, GammaSolution, KillingCandidate};
pub use report::{Entry, IdentityReport, PaperTag, Verdict};
pub use residual::{lemma21_check, qe_residual, QeResidual};
pub use section2::{section2_suite, substitution_residual};
pub use section3::{killing_integral_condition, lie_div_energy, section3_suite};
pub use structure::structure_checks;
pub use theorem11::theorem11_check;

#[derive(Debug, Error, PartialEq)]
pub enum QeError {
    #[error("m = 0: the quasi-Einstein equation is undefined")]
    ZeroM,
    #[error("Γ must be positive (min Γ = {0:e})")]
    NonPositiveGamma(f64),
    #[error("no positive near-kernel element at this resolution (μ = {mu:e}, min Γ = {min_gamma:e})")]
    NoPositiveKernel { mu: f64, min_gamma: f64 },
    #[error("inverse iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Parameters of a candidate triple: `m`, `λ`, the field `X`, optionally `Γ`.
#[derive(Debug, Clone)]
pub struct QEData {
    pub m: f64,
    pub lambda: f64,
    pub x: VectorField,
    pub gamma: Option<ScalarField>,
}

impl QEData {
    pub fn new(m: f64, lambda: f64, x: VectorField) -> Result<Self, QeError> {
        if m == 0.0 {
            return Err(QeError::ZeroM);
        }
        Ok(QEData {
            m,
            lambda,
            x,
            gamma: None,
        })
    }

    pub fn with_gamma(mut self, gamma: ScalarField) -> Result<Self, QeError> {
        let min = gamma.min_value();
        if !(min > 0.0) {
            return Err(QeError::NonPositiveGamma(min));
        }
        self.gamma = Some(gamma);
        Ok(self)
    }
}

/// Named tolerances. Unknown names are rejected so typos in overrides surface.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    values: BTreeMap<&'static str, f64>,
}

const DEFAULT_TOLERANCES: [(&str, f64, &str); 13] = [
    ("solution", 1e-8, "sup of E, relative to max(1, |λ|)"),
    ("constant", 1e-8, "sd of a field, relative to max(1, |mean|)"),
    ("killing", 1e-8, "sup of L_X g (or L_K g) counted as zero"),
    ("trace", 1e-12, "trace of E against the trace residual"),
    ("identity", 1e-8, "pointwise identities valid for arbitrary fields"),
    ("integral", 1e-8, "integral balances, relative to max(1, |sides|)"),
    ("energy", 1e-7, "energy identity, relative to max(1, |rhs|)"),
    ("rewrite", 1e-7, "corrected rewrite of the equation in terms of K and Γ"),
    ("section3", 1e-6, "divergence pieces and trace chain"),
    ("div_k", 1e-6, "gate on sup |div K| for identities that assume div K = 0"),
    ("gamma", 1e-7, "sup |div K| required of a solved Γ"),
    ("eigen", 1e-7, "Ricci eigenvalue multiset comparison"),
    ("kernel", 1e-8, "|μ| relative to the operator scale in the Γ solve"),
];

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            values: DEFAULT_TOLERANCES.iter().map(|(k, v, _)| (*k, *v)).collect(),
        }
    }
}

impl Tolerances {
    /// Names, defaults and one-line descriptions.
    pub fn describe() -> impl Iterator<Item = (&'static str, f64, &'static str)> {
        DEFAULT_TOLERANCES.iter().copied()
    }

    pub fn get(&self, name: &str) -> f64 {
        self.values[name]
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<(), String> {
        match self.values.keys().find(|k| **k == name) {
            Some(&key) if value >= 0.0 && value.is_finite() => {
                self.values.insert(key, value);
                Ok(())
            }
            Some(_) => Err(format!("tolerance {name} must be a non-negative number")),
            None => Err(format!("unknown tolerance '{name}'")),
        }
    }

    pub fn solution(&self, lambda: f64) -> f64 {
        self.get("solution") * lambda.abs().max(1.0)
    }
}

/// Unweighted mean and population standard deviation of the node values.
pub fn mean_sd(f: &ScalarField) -> (f64, f64) {
    f.mean_sd()
}

/// `sd ≤ tol · max(1, |mean|)`.
pub fn is_constant(f: &ScalarField, tol: f64) -> bool {
    let (mean, sd) = f.mean_sd();
    sd <= tol * mean.abs().max(1.0)
}

/// The defect `E = Ric + ½ L_X g - (1/m) X*⊗X* - λ g`.
pub fn defect(geo: &Geometry, qe: &QEData) -> crate::field::SymTensorField {
    let xf = geo.flat(&qe.x);
    let lie = geo.lie_derivative(&qe.x);
    geo.ricci()
        .add(&lie.scale(0.5))
        .sub(&crate::field::SymTensorField::square(&xf).scale(1.0 / qe.m))
        .sub(&geo.metric().tensor().scale(qe.lambda))
}

pub(crate) fn require_m(m: f64) -> Result<(), QeError> {
    if m == 0.0 {
        Err(QeError::ZeroM)
    } else {
        Ok(())
    }
}

/// Shared precondition: sup |E| within the solution tolerance.
pub(crate) fn solution_gate(geo: &Geometry, qe: &QEData, tol: &Tolerances) -> Result<f64, String> {
    let e = geo.linf_tensor(&defect(geo, qe));
    let bound = tol.solution(qe.lambda);
    if e <= bound {
        Ok(e)
    } else {
        Err(format!(
            "input is not a quasi-Einstein solution (sup |E| = {e:.3e} > {bound:.1e})"
        ))
    }
}
