//! Named residuals with pass/fail verdicts.

use std::collections::BTreeMap;
use std::fmt;

use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

/// Identity or statement an entry checks, named by role.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PaperTag {
    QeEquation,
    KillingReduced,
    IntegralLemma,
    ProductRule,
    Trace,
    BgkwIdentity,
    Substituted,
    IntegratedBalance,
    LemmaRewrite,
    SignedBalance,
    KillingCandidate,
    RicciRewrite,
    LieRewrite,
    DivergenceOfRewrite,
    DivKK,
    DivGammaGrad,
    DivGammaRicci,
    DivHessian,
    Contracted,
    Energy,
    StokesLambda,
    StokesLaplacian,
    TraceRewrite,
    TraceDivided,
    DerivativeIdentity,
    IntegralCondition,
    KillingCondition,
    ConstantCurvature,
    KillingCriterion,
    Einstein,
    DivergenceFree,
    RicciStructure,
}

impl PaperTag {
    pub const ALL: [PaperTag; 32] = [
        PaperTag::QeEquation,
        PaperTag::KillingReduced,
        PaperTag::IntegralLemma,
        PaperTag::ProductRule,
        PaperTag::Trace,
        PaperTag::BgkwIdentity,
        PaperTag::Substituted,
        PaperTag::IntegratedBalance,
        PaperTag::LemmaRewrite,
        PaperTag::SignedBalance,
        PaperTag::KillingCandidate,
        PaperTag::RicciRewrite,
        PaperTag::LieRewrite,
        PaperTag::DivergenceOfRewrite,
        PaperTag::DivKK,
        PaperTag::DivGammaGrad,
        PaperTag::DivGammaRicci,
        PaperTag::DivHessian,
        PaperTag::Contracted,
        PaperTag::Energy,
        PaperTag::StokesLambda,
        PaperTag::StokesLaplacian,
        PaperTag::TraceRewrite,
        PaperTag::TraceDivided,
        PaperTag::DerivativeIdentity,
        PaperTag::IntegralCondition,
        PaperTag::KillingCondition,
        PaperTag::ConstantCurvature,
        PaperTag::KillingCriterion,
        PaperTag::Einstein,
        PaperTag::DivergenceFree,
        PaperTag::RicciStructure,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PaperTag::QeEquation => "1.1",
            PaperTag::KillingReduced => "1.3",
            PaperTag::IntegralLemma => "2.1",
            PaperTag::ProductRule => "2.2",
            PaperTag::Trace => "2.3",
            PaperTag::BgkwIdentity => "2.4",
            PaperTag::Substituted => "2.5",
            PaperTag::IntegratedBalance => "2.6",
            PaperTag::LemmaRewrite => "2.7",
            PaperTag::SignedBalance => "2.8",
            PaperTag::KillingCandidate => "3.1",
            PaperTag::RicciRewrite => "3.5",
            PaperTag::LieRewrite => "3.6",
            PaperTag::DivergenceOfRewrite => "3.7",
            PaperTag::DivKK => "3.8",
            PaperTag::DivGammaGrad => "3.9",
            PaperTag::DivGammaRicci => "3.10",
            PaperTag::DivHessian => "3.11",
            PaperTag::Contracted => "3.12",
            PaperTag::Energy => "3.13",
            PaperTag::StokesLambda => "3.14",
            PaperTag::StokesLaplacian => "3.15",
            PaperTag::TraceRewrite => "3.16",
            PaperTag::TraceDivided => "3.17",
            PaperTag::DerivativeIdentity => "3.18",
            PaperTag::IntegralCondition => "3.19",
            PaperTag::KillingCondition => "3.20",
            PaperTag::ConstantCurvature => "T1.1",
            PaperTag::KillingCriterion => "T1.3",
            PaperTag::Einstein => "C1.2",
            PaperTag::DivergenceFree => "C1.4",
            PaperTag::RicciStructure => "R2.3",
        }
    }
}

impl fmt::Display for PaperTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for PaperTag {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Pass,
    Fail,
    Skipped(String),
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Skipped(_) => "skipped",
        }
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail)
    }
}

/// One checked statement.
///
/// `residual` is the quantity compared against `tolerance`; the verdict is
/// pass exactly when `residual <= tolerance`. Logical statements (one
/// condition holds iff another does) use residual 0 or 1 against tolerance 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub check: String,
    pub tag: PaperTag,
    pub linf: Option<f64>,
    pub l2: Option<f64>,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub note: Option<String>,
}

impl Entry {
    fn judged(check: &str, tag: PaperTag, residual: f64, tolerance: f64) -> Entry {
        let verdict = if residual <= tolerance {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Entry {
            check: check.to_string(),
            tag,
            linf: None,
            l2: None,
            lhs: None,
            rhs: None,
            residual: Some(residual),
            tolerance,
            verdict,
            note: None,
        }
    }

    /// Pointwise identity judged on its sup norm.
    pub fn pointwise(check: &str, tag: PaperTag, linf: f64, l2: f64, tolerance: f64) -> Entry {
        Entry {
            linf: Some(linf),
            l2: Some(l2),
            ..Entry::judged(check, tag, linf, tolerance)
        }
    }

    /// Equality of two numbers, judged on `|lhs - rhs|`.
    pub fn integral(check: &str, tag: PaperTag, lhs: f64, rhs: f64, tolerance: f64) -> Entry {
        Entry {
            lhs: Some(lhs),
            rhs: Some(rhs),
            ..Entry::judged(check, tag, (lhs - rhs).abs(), tolerance)
        }
    }

    /// A scalar that must not exceed the tolerance.
    pub fn bound(check: &str, tag: PaperTag, value: f64, tolerance: f64) -> Entry {
        Entry {
            linf: Some(value),
            ..Entry::judged(check, tag, value, tolerance)
        }
    }

    pub fn logical(check: &str, tag: PaperTag, holds: bool) -> Entry {
        Entry::judged(check, tag, if holds { 0.0 } else { 1.0 }, 0.0)
    }

    pub fn skipped(check: &str, tag: PaperTag, reason: impl Into<String>) -> Entry {
        Entry {
            check: check.to_string(),
            tag,
            linf: None,
            l2: None,
            lhs: None,
            rhs: None,
            residual: None,
            tolerance: 0.0,
            verdict: Verdict::Skipped(reason.into()),
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Entry {
        self.note = Some(note.into());
        self
    }
}

impl Serialize for Entry {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Entry", 11)?;
        st.serialize_field("check", &self.check)?;
        st.serialize_field("paper_tag", &self.tag)?;
        st.serialize_field("linf", &self.linf)?;
        st.serialize_field("l2", &self.l2)?;
        st.serialize_field("lhs", &self.lhs)?;
        st.serialize_field("rhs", &self.rhs)?;
        st.serialize_field("residual", &self.residual)?;
        st.serialize_field("tolerance", &self.tolerance)?;
        st.serialize_field("verdict", self.verdict.as_str())?;
        let reason = match &self.verdict {
            Verdict::Skipped(r) => Some(r.as_str()),
            _ => None,
        };
        st.serialize_field("reason", &reason)?;
        st.serialize_field("note", &self.note)?;
        st.end()
    }
}

/// Entries of one check plus the derived scalars it computed.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IdentityReport {
    pub entries: Vec<Entry>,
    pub scalars: BTreeMap<String, f64>,
}

impl IdentityReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, e: Entry) {
        self.entries.push(e);
    }

    pub fn scalar(&mut self, name: &str, value: f64) {
        self.scalars.insert(name.to_string(), value);
    }

    pub fn extend(&mut self, other: IdentityReport) {
        self.entries.extend(other.entries);
        self.scalars.extend(other.scalars);
    }

    /// True when no entry failed.
    pub fn passed(&self) -> bool {
        !self.entries.iter().any(|e| e.verdict.is_fail())
    }

    pub fn entry(&self, check: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.check == check)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Entry> {
        self.entries.iter().filter(|e| e.verdict.is_fail())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_follows_residual() {
        let e = Entry::pointwise("x", PaperTag::QeEquation, 1e-9, 0.0, 1e-8);
        assert_eq!(e.verdict, Verdict::Pass);
        let e = Entry::integral("x", PaperTag::Energy, 1.0, 1.1, 1e-8);
        assert_eq!(e.verdict, Verdict::Fail);
        let e = Entry::pointwise("x", PaperTag::QeEquation, f64::NAN, f64::NAN, 1e-8);
        assert_eq!(e.verdict, Verdict::Fail);
    }

    #[test]
    fn tags_are_distinct() {
        let mut names: Vec<_> = PaperTag::ALL.iter().map(|t| t.as_str()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), PaperTag::ALL.len());
    }
}
