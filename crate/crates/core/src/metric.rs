//! Riemannian metric, Levi-Civita connection, curvature and the tensor
//! operators built on them.
//!
//! Index conventions: `Γ^k_ij` is symmetric in `i, j`; `Ric_ij` is the
//! contraction `R^k_ikj` so round spheres have positive Ricci; the Laplacian is
//! the trace of the Hessian and has negative spectrum.

use std::sync::Arc;

use crate::chart::Chart;
use crate::expr::{Bindings, Expr};
use crate::field::{sym_index, OneFormField, ScalarField, SymTensorField, VectorField};
use crate::GeometryError;

/// Bound on `|g^ik g_kj - δ|`, scaled by the conditioning of the metric.
const INVERSE_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct MetricField {
    g: SymTensorField,
    inv: SymTensorField,
    sqrt_det: ScalarField,
}

impl MetricField {
    /// Validates positive definiteness by an unpivoted LDLᵀ factorization at
    /// every node and caches the inverse and volume density.
    pub fn new(g: SymTensorField) -> Result<Self, GeometryError> {
        let n = g.dim();
        let chart = g.chart().clone();
        if n != chart.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: chart.dim(),
                got: n,
            });
        }
        // unit lower triangular L (strict part) and pivots D
        let mut l: Vec<Vec<ScalarField>> = vec![Vec::new(); n];
        let mut d: Vec<ScalarField> = Vec::with_capacity(n);
        let mut d_inv: Vec<ScalarField> = Vec::with_capacity(n);
        for j in 0..n {
            let mut dj = g.get(j, j).clone();
            for k in 0..j {
                dj = &dj - &(&(&l[j][k] * &l[j][k]) * &d[k]);
            }
            for (node, pivot) in dj.values().into_iter().enumerate() {
                if !(pivot > 0.0 && pivot.is_finite()) {
                    return Err(GeometryError::NotPositiveDefinite { node, pivot });
                }
            }
            let dj_inv = dj.recip();
            for i in (j + 1)..n {
                let mut s = g.get(i, j).clone();
                for k in 0..j {
                    s = &s - &(&(&l[i][k] * &l[j][k]) * &d[k]);
                }
                let lij = &s * &dj_inv;
                l[i].push(lij);
            }
            d.push(dj);
            d_inv.push(dj_inv);
        }
        // M = L⁻¹, unit lower triangular
        let mut m: Vec<Vec<Option<ScalarField>>> = vec![vec![None; n]; n];
        for j in 0..n {
            for i in (j + 1)..n {
                let mut s = l[i][j].clone();
                for k in (j + 1)..i {
                    if let Some(mkj) = &m[k][j] {
                        s = &s + &(&l[i][k] * mkj);
                    }
                }
                m[i][j] = Some(-s);
            }
        }
        let entry = |k: usize, i: usize| -> Option<ScalarField> {
            match k.cmp(&i) {
                std::cmp::Ordering::Equal => Some(ScalarField::constant(&chart, 1.0)),
                std::cmp::Ordering::Greater => m[k][i].clone(),
                std::cmp::Ordering::Less => None,
            }
        };
        let inv = SymTensorField::from_fn(n, |i, j| {
            let mut s = ScalarField::zeros(&chart);
            for k in i.max(j)..n {
                if let (Some(a), Some(b)) = (entry(k, i), entry(k, j)) {
                    s = &s + &(&(&a * &b) * &d_inv[k]);
                }
            }
            s
        });
        let mut det = ScalarField::constant(&chart, 1.0);
        for dk in &d {
            det = &det * dk;
        }
        let metric = MetricField {
            sqrt_det: det.sqrt(),
            g,
            inv,
        };
        metric.check_inverse()?;
        Ok(metric)
    }

    fn check_inverse(&self) -> Result<(), GeometryError> {
        let n = self.dim();
        let scale = (self.g.sup_component() * self.inv.sup_component()).max(1.0);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut s = ScalarField::zeros(self.chart());
                for k in 0..n {
                    s = &s + &(self.inv.get(i, k) * self.g.get(k, j));
                }
                let delta = if i == j { 1.0 } else { 0.0 };
                worst = worst.max(s.add_const(-delta).sup_abs());
            }
        }
        if worst > INVERSE_TOL * scale || !worst.is_finite() {
            return Err(GeometryError::InverseInaccurate(worst));
        }
        Ok(())
    }

    /// Packed upper-triangular component expressions `g11, g12, .., gnn`.
    pub fn from_exprs(chart: &Arc<Chart>, comps: &[Expr], params: &Bindings) -> Result<Self, GeometryError> {
        let n = chart.dim();
        let expected = n * (n + 1) / 2;
        if comps.len() != expected {
            return Err(GeometryError::DimensionMismatch {
                expected,
                got: comps.len(),
            });
        }
        let fields = comps
            .iter()
            .map(|e| ScalarField::from_expr(chart, e, params))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(SymTensorField::from_fn(n, |i, j| fields[sym_index(n, i, j)].clone()))
    }

    pub fn euclidean(chart: &Arc<Chart>) -> Self {
        let g = SymTensorField::from_fn(chart.dim(), |i, j| {
            ScalarField::constant(chart, if i == j { 1.0 } else { 0.0 })
        });
        Self::new(g).expect("identity metric")
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.g.chart()
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn g(&self, i: usize, j: usize) -> &ScalarField {
        self.g.get(i, j)
    }

    pub fn inv(&self, i: usize, j: usize) -> &ScalarField {
        self.inv.get(i, j)
    }

    pub fn tensor(&self) -> &SymTensorField {
        &self.g
    }

    pub fn inverse(&self) -> &SymTensorField {
        &self.inv
    }

    /// `√det g` at every node.
    pub fn sqrt_det(&self) -> &ScalarField {
        &self.sqrt_det
    }
}

/// A metric together with its connection and curvature.
#[derive(Debug, Clone)]
pub struct Geometry {
    metric: MetricField,
    // christoffel[k] holds Γ^k_ij
    christoffel: Vec<SymTensorField>,
    ricci: SymTensorField,
    scalar: ScalarField,
    ricci_asymmetry: f64,
}

fn sum(chart: &Arc<Chart>, terms: impl IntoIterator<Item = ScalarField>) -> ScalarField {
    let mut it = terms.into_iter();
    match it.next() {
        None => ScalarField::zeros(chart),
        Some(first) => it.fold(first, |acc, t| &acc + &t),
    }
}

impl Geometry {
    pub fn new(metric: MetricField) -> Self {
        let n = metric.dim();
        let chart = metric.chart().clone();
        // dg[k] holds ∂_k g_ij
        let dg: Vec<SymTensorField> = (0..n).map(|k| metric.g.map(|c| c.partial(k))).collect();
        // first kind: Γ_{l,ij}
        let first: Vec<SymTensorField> = (0..n)
            .map(|l| {
                SymTensorField::from_fn(n, |i, j| {
                    (&(dg[i].get(j, l) + dg[j].get(i, l)) - dg[l].get(i, j)).scale(0.5)
                })
            })
            .collect();
        let christoffel: Vec<SymTensorField> = (0..n)
            .map(|k| {
                SymTensorField::from_fn(n, |i, j| {
                    sum(&chart, (0..n).map(|l| metric.inv(k, l) * first[l].get(i, j)))
                })
            })
            .collect();
        let gamma = |k: usize, i: usize, j: usize| christoffel[k].get(i, j);

        // contracted Γ^k_kl
        let trace_gamma: Vec<ScalarField> = (0..n)
            .map(|l| sum(&chart, (0..n).map(|k| gamma(k, k, l).clone())))
            .collect();
        let d_trace: Vec<Vec<ScalarField>> = trace_gamma
            .iter()
            .map(|t| (0..n).map(|j| t.partial(j)).collect())
            .collect();
        let mut full = vec![vec![ScalarField::zeros(&chart); n]; n];
        for (i, row) in full.iter_mut().enumerate() {
            for (j, out) in row.iter_mut().enumerate() {
                let mut terms = Vec::new();
                for k in 0..n {
                    terms.push(gamma(k, i, j).partial(k));
                }
                terms.push(-&d_trace[i][j]);
                for l in 0..n {
                    terms.push(&trace_gamma[l] * gamma(l, i, j));
                    for k in 0..n {
                        terms.push(-(gamma(k, j, l) * gamma(l, i, k)));
                    }
                }
                *out = sum(&chart, terms);
            }
        }
        let mut asym: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                asym = asym.max((&full[i][j] - &full[j][i]).sup_abs());
            }
        }
        let ricci = SymTensorField::from_fn(n, |i, j| {
            if i == j {
                full[i][i].clone()
            } else {
                (&full[i][j] + &full[j][i]).scale(0.5)
            }
        });
        let scalar = sum(
            &chart,
            (0..n).flat_map(|i| {
                let (metric, ricci) = (&metric, &ricci);
                (0..n).map(move |j| metric.inv(i, j) * ricci.get(i, j))
            }),
        );
        Geometry {
            metric,
            christoffel,
            ricci,
            scalar,
            ricci_asymmetry: asym,
        }
    }

    pub fn metric(&self) -> &MetricField {
        &self.metric
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.metric.chart()
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    /// `Γ^k_ij`.
    pub fn christoffel(&self, k: usize, i: usize, j: usize) -> &ScalarField {
        self.christoffel[k].get(i, j)
    }

    pub fn ricci(&self) -> &SymTensorField {
        &self.ricci
    }

    pub fn scalar_curvature(&self) -> &ScalarField {
        &self.scalar
    }

    /// `max |Ric_ij - Ric_ji|` before symmetrization.
    pub fn ricci_asymmetry(&self) -> f64 {
        self.ricci_asymmetry
    }

    fn sum(&self, terms: impl IntoIterator<Item = ScalarField>) -> ScalarField {
        sum(self.chart(), terms)
    }

    pub fn constant(&self, c: f64) -> ScalarField {
        ScalarField::constant(self.chart(), c)
    }

    pub fn differential(&self, f: &ScalarField) -> OneFormField {
        OneFormField::new((0..self.dim()).map(|i| f.partial(i)).collect())
    }

    pub fn sharp(&self, w: &OneFormField) -> VectorField {
        let n = self.dim();
        VectorField::new(
            (0..n)
                .map(|i| self.sum((0..n).map(|j| self.metric.inv(i, j) * &w.comps[j])))
                .collect(),
        )
    }

    pub fn flat(&self, x: &VectorField) -> OneFormField {
        let n = self.dim();
        OneFormField::new(
            (0..n)
                .map(|i| self.sum((0..n).map(|j| self.metric.g(i, j) * &x.comps[j])))
                .collect(),
        )
    }

    pub fn gradient(&self, f: &ScalarField) -> VectorField {
        self.sharp(&self.differential(f))
    }

    /// `g(X, Y)`.
    pub fn inner(&self, x: &VectorField, y: &VectorField) -> ScalarField {
        let n = self.dim();
        self.sum((0..n).flat_map(|i| {
            (0..n).map(move |j| &(self.metric.g(i, j) * &x.comps[i]) * &y.comps[j])
        }))
    }

    /// `g^ij a_i b_j`.
    pub fn inner_forms(&self, a: &OneFormField, b: &OneFormField) -> ScalarField {
        let n = self.dim();
        self.sum((0..n).flat_map(|i| {
            (0..n).map(move |j| &(self.metric.inv(i, j) * &a.comps[i]) * &b.comps[j])
        }))
    }

    /// `ω(X) = ω_i X^i`.
    pub fn pair(&self, w: &OneFormField, x: &VectorField) -> ScalarField {
        self.sum(w.comps.iter().zip(&x.comps).map(|(a, b)| a * b))
    }

    pub fn norm2(&self, x: &VectorField) -> ScalarField {
        self.inner(x, x)
    }

    /// `|T|² = g^ik g^jl T_ij T_kl`.
    pub fn tensor_norm2(&self, t: &SymTensorField) -> ScalarField {
        let n = self.dim();
        // raise the first index: A^i_j = g^ik T_kj
        let mixed: Vec<Vec<ScalarField>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| self.sum((0..n).map(|k| self.metric.inv(i, k) * t.get(k, j))))
                    .collect()
            })
            .collect();
        // |T|² = A^i_j A^j_i
        self.sum((0..n).flat_map(|i| {
            let mixed = &mixed;
            (0..n).map(move |j| &mixed[i][j] * &mixed[j][i])
        }))
    }

    /// `g^ij T_ij`.
    pub fn trace(&self, t: &SymTensorField) -> ScalarField {
        let n = self.dim();
        self.sum((0..n).flat_map(|i| (0..n).map(move |j| self.metric.inv(i, j) * t.get(i, j))))
    }

    /// The one-form `T(X, ·)`.
    pub fn contract(&self, t: &SymTensorField, x: &VectorField) -> OneFormField {
        let n = self.dim();
        OneFormField::new(
            (0..n)
                .map(|j| self.sum((0..n).map(|i| t.get(i, j) * &x.comps[i])))
                .collect(),
        )
    }

    /// `T(X, Y)`.
    pub fn bilinear(&self, t: &SymTensorField, x: &VectorField, y: &VectorField) -> ScalarField {
        self.pair(&self.contract(t, x), y)
    }

    /// `∇_X f = X^i ∂_i f`.
    pub fn directional(&self, f: &ScalarField, x: &VectorField) -> ScalarField {
        self.sum(x.comps.iter().enumerate().map(|(i, xi)| xi * &f.partial(i)))
    }

    /// `[i][j] = ∇_i X^j`.
    pub fn nabla_vector(&self, x: &VectorField) -> Vec<Vec<ScalarField>> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let conn = (0..n).map(|k| self.christoffel(j, i, k) * &x.comps[k]);
                        &x.comps[j].partial(i) + &self.sum(conn)
                    })
                    .collect()
            })
            .collect()
    }

    /// `∇_X Y`.
    pub fn covariant_along(&self, x: &VectorField, y: &VectorField) -> VectorField {
        let n = self.dim();
        let dy = self.nabla_vector(y);
        VectorField::new(
            (0..n)
                .map(|j| self.sum((0..n).map(|i| &x.comps[i] * &dy[i][j])))
                .collect(),
        )
    }

    /// `[k] = ∇_k T`, each a symmetric tensor.
    pub fn nabla_symtensor(&self, t: &SymTensorField) -> Vec<SymTensorField> {
        let n = self.dim();
        (0..n)
            .map(|k| {
                SymTensorField::from_fn(n, |i, j| {
                    let conn = (0..n).flat_map(|l| {
                        [
                            self.christoffel(l, k, i) * t.get(l, j),
                            self.christoffel(l, k, j) * t.get(i, l),
                        ]
                    });
                    &t.get(i, j).partial(k) - &self.sum(conn)
                })
            })
            .collect()
    }

    /// `L_X g = ∇_i X_j + ∇_j X_i`.
    pub fn lie_derivative(&self, x: &VectorField) -> SymTensorField {
        let n = self.dim();
        let xf = self.flat(x);
        SymTensorField::from_fn(n, |i, j| {
            let conn = (0..n).map(|k| self.christoffel(k, i, j) * &xf.comps[k]);
            &(&xf.comps[j].partial(i) + &xf.comps[i].partial(j)) - &self.sum(conn).scale(2.0)
        })
    }

    /// `∂_i ∂_j f - Γ^k_ij ∂_k f`.
    pub fn hessian(&self, f: &ScalarField) -> SymTensorField {
        let n = self.dim();
        let df = self.differential(f);
        SymTensorField::from_fn(n, |i, j| {
            let conn = (0..n).map(|k| self.christoffel(k, i, j) * &df.comps[k]);
            &df.comps[j].partial(i) - &self.sum(conn)
        })
    }

    pub fn laplacian(&self, f: &ScalarField) -> ScalarField {
        self.trace(&self.hessian(f))
    }

    /// `(1/√g) ∂_i (√g X^i)`.
    pub fn div_vector(&self, x: &VectorField) -> ScalarField {
        let s = self.metric.sqrt_det();
        let flux = self.sum(x.comps.iter().enumerate().map(|(i, xi)| (s * xi).partial(i)));
        flux.div_field(s)
    }

    /// `(div T)_j = g^ik ∇_k T_ij`.
    pub fn div_symtensor(&self, t: &SymTensorField) -> OneFormField {
        let n = self.dim();
        let nabla = self.nabla_symtensor(t);
        OneFormField::new(
            (0..n)
                .map(|j| {
                    self.sum((0..n).flat_map(|i| {
                        let nabla = &nabla;
                        (0..n).map(move |k| self.metric.inv(i, k) * nabla[k].get(i, j))
                    }))
                })
                .collect(),
        )
    }

    /// `∫ f dV` by the chart quadrature; nodes are summed in index order.
    pub fn integrate(&self, f: &ScalarField) -> f64 {
        let w = self.chart().weights();
        let s = self.metric.sqrt_det().values();
        f.values()
            .iter()
            .zip(w)
            .zip(&s)
            .map(|((f, w), s)| f * w * s)
            .sum()
    }

    pub fn volume(&self) -> f64 {
        self.integrate(&self.constant(1.0))
    }

    /// Maximum over nodes of `|f|`.
    pub fn linf(&self, f: &ScalarField) -> f64 {
        f.sup_abs()
    }

    /// `(∫ f² dV)^½`.
    pub fn l2(&self, f: &ScalarField) -> f64 {
        self.integrate(&(f * f)).max(0.0).sqrt()
    }

    pub fn linf_form(&self, w: &OneFormField) -> f64 {
        self.inner_forms(w, w).values().iter().fold(0.0, |m, v| m.max(v.max(0.0).sqrt()))
    }

    pub fn l2_form(&self, w: &OneFormField) -> f64 {
        self.integrate(&self.inner_forms(w, w)).max(0.0).sqrt()
    }

    pub fn linf_vector(&self, x: &VectorField) -> f64 {
        self.norm2(x).values().iter().fold(0.0, |m, v| m.max(v.max(0.0).sqrt()))
    }

    pub fn linf_tensor(&self, t: &SymTensorField) -> f64 {
        self.tensor_norm2(t).values().iter().fold(0.0, |m, v| m.max(v.max(0.0).sqrt()))
    }

    pub fn l2_tensor(&self, t: &SymTensorField) -> f64 {
        self.integrate(&self.tensor_norm2(t)).max(0.0).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::ChartGrid;

    fn torus_of_revolution(n: usize) -> Geometry {
        let chart = ChartGrid::uniform(2, n).build().unwrap();
        let comps = ["(2 + cos(u2))^2", "0", "1"].map(|s| crate::expr::parse(s).unwrap());
        Geometry::new(MetricField::from_exprs(&chart, &comps, &Bindings::new()).unwrap())
    }

    #[test]
    fn flat_torus_has_zero_curvature() {
        let chart = ChartGrid::uniform(2, 16).build().unwrap();
        let geo = Geometry::new(MetricField::euclidean(&chart));
        assert_eq!(geo.scalar_curvature().sup_abs(), 0.0);
        assert_eq!(geo.ricci().sup_component(), 0.0);
        assert_eq!(geo.christoffel(0, 1, 1).sup_abs(), 0.0);
    }

    #[test]
    fn torus_scalar_curvature_matches_closed_form() {
        let geo = torus_of_revolution(64);
        let want = ScalarField::parse(geo.chart(), "2*cos(u2)/(2 + cos(u2))", &Bindings::new()).unwrap();
        assert!((geo.scalar_curvature() - &want).sup_abs() <= 1e-8);
        assert!(geo.ricci_asymmetry() <= 1e-12);
    }

    #[test]
    fn non_positive_metric_is_rejected() {
        let chart = ChartGrid::uniform(2, 8).build().unwrap();
        let comps = ["1", "2", "1"].map(|s| crate::expr::parse(s).unwrap());
        let err = MetricField::from_exprs(&chart, &comps, &Bindings::new()).unwrap_err();
        assert!(matches!(err, GeometryError::NotPositiveDefinite { .. }));
    }

    #[test]
    fn inverse_of_dense_metric() {
        let chart = ChartGrid::uniform(3, 8).build().unwrap();
        let comps = [
            "2 + sin(u1)",
            "0.3*cos(u2)",
            "0.1",
            "3 + cos(u3)",
            "0.2*sin(u1 + u3)",
            "1.5",
        ]
        .map(|s| crate::expr::parse(s).unwrap());
        let m = MetricField::from_exprs(&chart, &comps, &Bindings::new()).unwrap();
        // √det against a direct 3x3 determinant at one node
        let p = 77;
        let g = |i, j| m.g(i, j).value(p);
        let det = g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1))
            - g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0))
            + g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0));
        assert!((m.sqrt_det().value(p) - det.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn metric_tensor_has_norm_n() {
        let geo = torus_of_revolution(16);
        let norm = geo.tensor_norm2(geo.metric().tensor());
        assert!((&norm - &geo.constant(2.0)).sup_abs() < 1e-13);
    }
}
