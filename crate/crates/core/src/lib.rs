//! Numerical verification of m-quasi-Einstein triples `(M, g, X)`.
//!
//! Fields live on a [`Chart`]: either a periodic grid differentiated by
//! Fourier collocation, or an analytic chart whose fields are Taylor jets at
//! quadrature nodes. [`Geometry`] computes curvature and the tensor operators
//! used by the identity checks in [`qe`]. Left-invariant data on Lie algebras
//! is handled separately and exactly in [`homogeneous`].

pub mod chart;
pub mod expr;
pub mod field;
pub mod homogeneous;
mod jet;
pub mod metric;
pub mod qe;
pub mod zoo;

use thiserror::Error;

pub use chart::{Axis, AxisKind, Chart, ChartGrid, DEFAULT_GRID};
pub use expr::{eval, parse, Bindings, Expr, ExprError};
pub use field::{OneFormField, ScalarField, SymTensorField, VectorField};
pub use homogeneous::LieAlgebraModel;
pub use metric::{Geometry, MetricField};
pub use qe::report::{Entry, IdentityReport, PaperTag, Verdict};
pub use qe::QEData;
pub use zoo::{GeneratorSpec, Manifold};

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("fields live on different charts")]
    ChartMismatch,
    #[error("metric is not positive definite at node {node} (pivot {pivot:e})")]
    NotPositiveDefinite { node: usize, pivot: f64 },
    #[error("inverse metric check failed: |g^ik g_kj - δ| = {0:e}")]
    InverseInaccurate(f64),
    #[error("expected {expected} components, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Expr(#[from] ExprError),
}
