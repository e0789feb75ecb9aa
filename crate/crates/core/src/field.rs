//! Sampled tensor fields on a [`Chart`].
//!
//! A [`ScalarField`] is either a plain array of node values (periodic grids)
//! or an array of per-node jets (analytic charts). Higher-rank fields are
//! collections of scalar components in chart coordinates.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::chart::{Backend, Chart};
use crate::expr::{self, BinaryOp, Bindings, Expr, ExprAlgebra, ExprError, UnaryOp};
use crate::jet::series;

#[derive(Debug, Clone)]
pub struct ScalarField {
    chart: Arc<Chart>,
    // retained jet order; always 0 on grids
    order: usize,
    data: Vec<f64>,
}

/// Elementary functions of a field, by their Taylor coefficients at a point.
#[derive(Clone, Copy)]
enum Elementary {
    Exp,
    Sin,
    Cos,
    Ln,
    Pow(f64),
}

impl Elementary {
    fn point(self, x: f64) -> f64 {
        match self {
            Elementary::Exp => x.exp(),
            Elementary::Sin => x.sin(),
            Elementary::Cos => x.cos(),
            Elementary::Ln => x.ln(),
            Elementary::Pow(p) => x.powf(p),
        }
    }

    fn series(self, x: f64, order: usize) -> Vec<f64> {
        match self {
            Elementary::Exp => series::exp(x, order),
            Elementary::Sin => series::sin(x, order),
            Elementary::Cos => series::cos(x, order),
            Elementary::Ln => series::ln(x, order),
            Elementary::Pow(p) => series::powf(x, p, order),
        }
    }
}

impl ScalarField {
    fn full_order(chart: &Chart) -> usize {
        chart.jet().map_or(0, |l| l.max_order())
    }

    fn stride(&self) -> usize {
        self.chart.jet().map_or(1, |l| l.len(self.order))
    }

    pub fn constant(chart: &Arc<Chart>, c: f64) -> Self {
        let order = Self::full_order(chart);
        let stride = chart.jet().map_or(1, |l| l.len(order));
        let mut data = vec![0.0; chart.len() * stride];
        for p in 0..chart.len() {
            data[p * stride] = c;
        }
        ScalarField {
            chart: chart.clone(),
            order,
            data,
        }
    }

    pub fn zeros(chart: &Arc<Chart>) -> Self {
        Self::constant(chart, 0.0)
    }

    /// The coordinate function `u_{axis+1}`.
    pub fn coordinate(chart: &Arc<Chart>, axis: usize) -> Self {
        match chart.jet() {
            None => ScalarField {
                chart: chart.clone(),
                order: 0,
                data: (0..chart.len()).map(|p| chart.coords(p)[axis]).collect(),
            },
            Some(layout) => {
                let order = layout.max_order();
                let stride = layout.len(order);
                let mut data = vec![0.0; chart.len() * stride];
                for p in 0..chart.len() {
                    let x = chart.axes()[axis].nodes[chart.node_index(p, axis)];
                    layout.seed(axis, x, &mut data[p * stride..(p + 1) * stride]);
                }
                ScalarField {
                    chart: chart.clone(),
                    order,
                    data,
                }
            }
        }
    }

    /// Grid field from node values. Fails on analytic charts, whose fields
    /// need derivative data.
    pub fn from_values(chart: &Arc<Chart>, values: Vec<f64>) -> Option<Self> {
        if !chart.is_grid() || values.len() != chart.len() {
            return None;
        }
        Some(ScalarField {
            chart: chart.clone(),
            order: 0,
            data: values,
        })
    }

    /// Grid field sampled from a closure of the node coordinates.
    pub fn from_fn(chart: &Arc<Chart>, f: impl Fn(&[f64]) -> f64) -> Option<Self> {
        let values = (0..chart.len()).map(|p| f(&chart.coords(p))).collect();
        Self::from_values(chart, values)
    }

    /// Evaluates an expression at every node; `u1..un` are the coordinates.
    pub fn from_expr(chart: &Arc<Chart>, e: &Expr, params: &Bindings) -> Result<Self, ExprError> {
        expr::eval_in(
            e,
            &FieldAlgebra {
                chart,
                params,
            },
        )
    }

    pub fn parse(chart: &Arc<Chart>, text: &str, params: &Bindings) -> Result<Self, ExprError> {
        Self::from_expr(chart, &expr::parse(text)?, params)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn same_chart(&self, other: &ScalarField) -> bool {
        Arc::ptr_eq(&self.chart, &other.chart)
    }

    /// Retained jet order (0 on grids).
    pub fn order(&self) -> usize {
        self.order
    }

    /// Point values at the nodes.
    pub fn values(&self) -> Vec<f64> {
        let s = self.stride();
        self.data.iter().step_by(s).copied().collect()
    }

    pub fn value(&self, node: usize) -> f64 {
        self.data[node * self.stride()]
    }

    fn with_order(&self, order: usize) -> ScalarField {
        if order == self.order {
            return self.clone();
        }
        let layout = self.chart.jet().expect("jet order change on a grid field");
        let (from, to) = (layout.len(self.order), layout.len(order));
        let mut data = Vec::with_capacity(self.chart.len() * to);
        for node in self.data.chunks(from) {
            data.extend_from_slice(&node[..to]);
        }
        ScalarField {
            chart: self.chart.clone(),
            order,
            data,
        }
    }

    fn check(&self, other: &ScalarField) {
        assert!(
            self.same_chart(other),
            "fields on different charts cannot be combined"
        );
    }

    fn zip(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        self.check(other);
        let order = self.order.min(other.order);
        let (a, b) = (self.with_order(order), other.with_order(order));
        ScalarField {
            chart: self.chart.clone(),
            order,
            data: a.data.iter().zip(&b.data).map(|(x, y)| f(*x, *y)).collect(),
        }
    }

    pub fn map_linear(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            chart: self.chart.clone(),
            order: self.order,
            data: self.data.iter().map(|x| f(*x)).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> ScalarField {
        self.map_linear(|x| c * x)
    }

    pub fn add_const(&self, c: f64) -> ScalarField {
        let s = self.stride();
        let mut out = self.clone();
        for v in out.data.iter_mut().step_by(s) {
            *v += c;
        }
        out
    }

    pub fn mul_field(&self, other: &ScalarField) -> ScalarField {
        self.check(other);
        match self.chart.jet() {
            None => self.zip(other, |x, y| x * y),
            Some(layout) => {
                let order = self.order.min(other.order);
                let (a, b) = (self.with_order(order), other.with_order(order));
                let s = layout.len(order);
                let mut data = vec![0.0; a.data.len()];
                for ((x, y), o) in a.data.chunks(s).zip(b.data.chunks(s)).zip(data.chunks_mut(s)) {
                    layout.mul(order, x, y, o);
                }
                ScalarField {
                    chart: self.chart.clone(),
                    order,
                    data,
                }
            }
        }
    }

    fn elementary(&self, f: Elementary) -> ScalarField {
        match self.chart.jet() {
            None => self.map_linear(|x| f.point(x)),
            Some(layout) => {
                let s = layout.len(self.order);
                let mut data = vec![0.0; self.data.len()];
                for (x, o) in self.data.chunks(s).zip(data.chunks_mut(s)) {
                    layout.compose(self.order, x, &f.series(x[0], self.order), o);
                }
                ScalarField {
                    chart: self.chart.clone(),
                    order: self.order,
                    data,
                }
            }
        }
    }

    pub fn recip(&self) -> ScalarField {
        self.elementary(Elementary::Pow(-1.0))
    }

    pub fn div_field(&self, other: &ScalarField) -> ScalarField {
        match self.chart.jet() {
            None => self.zip(other, |x, y| x / y),
            Some(_) => self.mul_field(&other.recip()),
        }
    }

    pub fn sqrt(&self) -> ScalarField {
        self.elementary(Elementary::Pow(0.5))
    }

    pub fn powf(&self, p: f64) -> ScalarField {
        if p == 2.0 {
            return self.mul_field(self);
        }
        self.elementary(Elementary::Pow(p))
    }

    pub fn exp(&self) -> ScalarField {
        self.elementary(Elementary::Exp)
    }

    pub fn ln(&self) -> ScalarField {
        self.elementary(Elementary::Ln)
    }

    pub fn sin(&self) -> ScalarField {
        self.elementary(Elementary::Sin)
    }

    pub fn cos(&self) -> ScalarField {
        self.elementary(Elementary::Cos)
    }

    pub fn abs(&self) -> ScalarField {
        match self.chart.jet() {
            None => self.map_linear(f64::abs),
            Some(layout) => {
                let s = layout.len(self.order);
                let mut out = self.clone();
                for node in out.data.chunks_mut(s) {
                    if node[0] < 0.0 {
                        node.iter_mut().for_each(|v| *v = -*v);
                    }
                }
                out
            }
        }
    }

    /// Some(c) when the field is the constant `c` (all derivatives zero).
    pub fn as_constant(&self) -> Option<f64> {
        let s = self.stride();
        let c = self.data[0];
        let constant = self
            .data
            .chunks(s)
            .all(|node| node[0] == c && node[1..].iter().all(|v| *v == 0.0));
        constant.then_some(c)
    }

    /// Partial derivative along a coordinate axis.
    pub fn partial(&self, axis: usize) -> ScalarField {
        match &self.chart.backend {
            Backend::Spectral(diff) => {
                let n = self.chart.axes()[axis].len();
                let stride = self.chart.stride(axis);
                let d = &diff[axis];
                let mut out = vec![0.0; self.data.len()];
                let mut line = vec![0.0; n];
                for base in 0..self.data.len() {
                    // visit each line once, from its first node
                    if self.chart.node_index(base, axis) != 0 {
                        continue;
                    }
                    for (k, v) in line.iter_mut().enumerate() {
                        *v = self.data[base + k * stride];
                    }
                    for j in 0..n {
                        let row = &d[j * n..(j + 1) * n];
                        // differences against the diagonal value make constants exact zeros
                        let s: f64 = row.iter().zip(&line).map(|(a, b)| a * (b - line[j])).sum();
                        out[base + j * stride] = s;
                    }
                }
                ScalarField {
                    chart: self.chart.clone(),
                    order: 0,
                    data: out,
                }
            }
            Backend::Jet(layout) => {
                assert!(
                    self.order > 0,
                    "jet order exhausted; build the analytic chart with a higher jet order"
                );
                let (from, to) = (layout.len(self.order), layout.len(self.order - 1));
                let mut data = vec![0.0; self.chart.len() * to];
                for (node, o) in self.data.chunks(from).zip(data.chunks_mut(to)) {
                    layout.derivative(axis, self.order, node, o);
                }
                ScalarField {
                    chart: self.chart.clone(),
                    order: self.order - 1,
                    data,
                }
            }
        }
    }

    /// Max of |value| over nodes.
    pub fn sup_abs(&self) -> f64 {
        self.values().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values().iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Unweighted mean and population standard deviation of node values.
    pub fn mean_sd(&self) -> (f64, f64) {
        let v = self.values();
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        (mean, var.sqrt())
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Mul for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: &ScalarField) -> ScalarField {
        self.mul_field(rhs)
    }
}

impl Mul<&ScalarField> for f64 {
    type Output = ScalarField;
    fn mul(self, rhs: &ScalarField) -> ScalarField {
        rhs.scale(self)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<ScalarField> for ScalarField {
            type Output = ScalarField;
            fn $m(self, rhs: ScalarField) -> ScalarField { (&self).$m(&rhs) }
        }
        impl $tr<&ScalarField> for ScalarField {
            type Output = ScalarField;
            fn $m(self, rhs: &ScalarField) -> ScalarField { (&self).$m(rhs) }
        }
        impl $tr<ScalarField> for &ScalarField {
            type Output = ScalarField;
            fn $m(self, rhs: ScalarField) -> ScalarField { self.$m(&rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Mul<ScalarField> for f64 {
    type Output = ScalarField;
    fn mul(self, rhs: ScalarField) -> ScalarField {
        rhs.scale(self)
    }
}

impl Neg for ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.scale(-1.0)
    }
}

struct FieldAlgebra<'a> {
    chart: &'a Arc<Chart>,
    params: &'a Bindings,
}

/// Parses `u<k>` into a zero-based axis index.
pub fn coordinate_axis(name: &str, dim: usize) -> Option<usize> {
    let k: usize = name.strip_prefix('u')?.parse().ok()?;
    (1..=dim).contains(&k).then(|| k - 1)
}

impl ExprAlgebra for FieldAlgebra<'_> {
    type Value = ScalarField;

    fn constant(&self, c: f64) -> ScalarField {
        ScalarField::constant(self.chart, c)
    }

    fn symbol(&self, name: &str) -> Option<ScalarField> {
        if let Some(axis) = coordinate_axis(name, self.chart.dim()) {
            return Some(ScalarField::coordinate(self.chart, axis));
        }
        self.params.get(name).map(|&c| ScalarField::constant(self.chart, c))
    }

    fn unary(&self, op: UnaryOp, a: &ScalarField) -> ScalarField {
        if self.chart.is_grid() {
            return a.map_linear(|x| expr::apply_unary(op, x));
        }
        match op {
            UnaryOp::Neg => -a,
            UnaryOp::Sin => a.sin(),
            UnaryOp::Cos => a.cos(),
            UnaryOp::Tan => a.sin().div_field(&a.cos()),
            UnaryOp::Exp => a.exp(),
            UnaryOp::Log => a.ln(),
            UnaryOp::Sqrt => a.sqrt(),
            UnaryOp::Abs => a.abs(),
        }
    }

    fn binary(&self, op: BinaryOp, a: &ScalarField, b: &ScalarField) -> ScalarField {
        if self.chart.is_grid() {
            return a.zip(b, |x, y| expr::apply_binary(op, x, y));
        }
        match op {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => a.div_field(b),
            BinaryOp::Pow => match b.as_constant() {
                Some(p) => a.powf(p),
                None => (b * &a.ln()).exp(),
            },
        }
    }

    fn all(&self, v: &ScalarField, pred: &dyn Fn(f64) -> bool) -> bool {
        v.values().into_iter().all(pred)
    }

    fn finite(&self, v: &ScalarField) -> bool {
        v.all_finite()
    }
}

/// Contravariant vector field, components `X^i`.
#[derive(Debug, Clone)]
pub struct VectorField {
    pub comps: Vec<ScalarField>,
}

/// Covariant one-form field, components `ω_i`.
#[derive(Debug, Clone)]
pub struct OneFormField {
    pub comps: Vec<ScalarField>,
}

macro_rules! rank_one {
    ($t:ident) => {
        impl $t {
            pub fn new(comps: Vec<ScalarField>) -> Self {
                assert!(
                    comps.windows(2).all(|w| w[0].same_chart(&w[1])),
                    "components on different charts"
                );
                $t { comps }
            }

            pub fn zeros(chart: &Arc<Chart>) -> Self {
                $t {
                    comps: (0..chart.dim()).map(|_| ScalarField::zeros(chart)).collect(),
                }
            }

            pub fn dim(&self) -> usize {
                self.comps.len()
            }

            pub fn chart(&self) -> &Arc<Chart> {
                self.comps[0].chart()
            }

            pub fn scale(&self, c: f64) -> Self {
                $t {
                    comps: self.comps.iter().map(|f| f.scale(c)).collect(),
                }
            }

            pub fn mul_scalar(&self, f: &ScalarField) -> Self {
                $t {
                    comps: self.comps.iter().map(|c| c * f).collect(),
                }
            }

            pub fn add(&self, other: &Self) -> Self {
                $t {
                    comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect(),
                }
            }

            pub fn sub(&self, other: &Self) -> Self {
                $t {
                    comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a - b).collect(),
                }
            }

            /// Max over nodes and components of |component|.
            pub fn sup_component(&self) -> f64 {
                self.comps.iter().fold(0.0, |m, c| m.max(c.sup_abs()))
            }
        }
    };
}

rank_one!(VectorField);
rank_one!(OneFormField);

impl VectorField {
    /// Components from expressions in the chart coordinates.
    pub fn from_exprs(chart: &Arc<Chart>, exprs: &[Expr], params: &Bindings) -> Result<Self, ExprError> {
        let comps = exprs
            .iter()
            .map(|e| ScalarField::from_expr(chart, e, params))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(VectorField { comps })
    }

    pub fn parse(chart: &Arc<Chart>, texts: &[&str], params: &Bindings) -> Result<Self, ExprError> {
        let exprs = texts.iter().map(|t| expr::parse(t)).collect::<Result<Vec<_>, _>>()?;
        Self::from_exprs(chart, &exprs, params)
    }

    /// Coordinate field `c ∂_{axis}`.
    pub fn coordinate(chart: &Arc<Chart>, axis: usize, c: f64) -> Self {
        let comps = (0..chart.dim())
            .map(|a| ScalarField::constant(chart, if a == axis { c } else { 0.0 }))
            .collect();
        VectorField { comps }
    }
}

/// Index of `(i, j)` in packed upper-triangular storage.
pub fn sym_index(dim: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * dim - i * (i + 1) / 2 + j
}

/// Symmetric covariant 2-tensor `T_ij`, packed storage.
#[derive(Debug, Clone)]
pub struct SymTensorField {
    dim: usize,
    comps: Vec<ScalarField>,
}

impl SymTensorField {
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> ScalarField) -> Self {
        let mut comps = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in i..dim {
                comps.push(f(i, j));
            }
        }
        SymTensorField { dim, comps }
    }

    pub fn zeros(chart: &Arc<Chart>) -> Self {
        Self::from_fn(chart.dim(), |_, _| ScalarField::zeros(chart))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.comps[0].chart()
    }

    pub fn get(&self, i: usize, j: usize) -> &ScalarField {
        &self.comps[sym_index(self.dim, i, j)]
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.comps
    }

    pub fn map(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        SymTensorField {
            dim: self.dim,
            comps: self.comps.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|x| x.scale(c))
    }

    pub fn mul_scalar(&self, f: &ScalarField) -> Self {
        self.map(|x| x * f)
    }

    pub fn add(&self, other: &Self) -> Self {
        SymTensorField {
            dim: self.dim,
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        SymTensorField {
            dim: self.dim,
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a - b).collect(),
        }
    }

    /// `ω ⊗ ω`.
    pub fn square(w: &OneFormField) -> Self {
        Self::from_fn(w.dim(), |i, j| &w.comps[i] * &w.comps[j])
    }

    /// `ω ⊗ η + η ⊗ ω`.
    pub fn symmetric_product(w: &OneFormField, h: &OneFormField) -> Self {
        Self::from_fn(w.dim(), |i, j| {
            &w.comps[i] * &h.comps[j] + &h.comps[i] * &w.comps[j]
        })
    }

    /// Max over nodes and components of |component|.
    pub fn sup_component(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, c| m.max(c.sup_abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{Axis, ChartGrid};
    use std::f64::consts::PI;

    #[test]
    fn spectral_derivative_of_sine() {
        let chart = ChartGrid::uniform(2, 32).build().unwrap();
        let f = ScalarField::parse(&chart, "sin(u1)", &Bindings::new()).unwrap();
        let df = f.partial(0);
        let want = ScalarField::parse(&chart, "cos(u1)", &Bindings::new()).unwrap();
        assert!((&df - &want).sup_abs() <= 1e-12);
        assert!(f.partial(1).sup_abs() <= 1e-13);
    }

    #[test]
    fn spectral_derivative_of_constant_is_zero() {
        let chart = ChartGrid::uniform(2, 16).build().unwrap();
        let f = ScalarField::constant(&chart, 3.5);
        assert_eq!(f.partial(0).sup_abs(), 0.0);
        assert_eq!(f.partial(1).sup_abs(), 0.0);
    }

    #[test]
    fn spectral_derivative_of_exp_sin() {
        // closed form: d/du exp(sin u) = cos u exp(sin u)
        let chart = ChartGrid::uniform(1, 64).build().unwrap();
        let f = ScalarField::parse(&chart, "exp(sin(u1))", &Bindings::new()).unwrap();
        let want = ScalarField::parse(&chart, "cos(u1)*exp(sin(u1))", &Bindings::new()).unwrap();
        assert!((&f.partial(0) - &want).sup_abs() <= 1e-9);
    }

    #[test]
    fn non_default_period() {
        let chart = ChartGrid::with_periods(vec![16], vec![3.0]).build().unwrap();
        let k = 2.0 * PI / 3.0;
        let f = ScalarField::from_fn(&chart, |u| (k * u[0]).sin()).unwrap();
        let want = ScalarField::from_fn(&chart, |u| k * (k * u[0]).cos()).unwrap();
        assert!((&f.partial(0) - &want).sup_abs() <= 1e-12);
    }

    #[test]
    fn jet_derivatives_are_exact() {
        let chart = Chart::analytic(vec![Axis::gauss_legendre(5, -1.0, 1.0), Axis::periodic(4, 2.0 * PI)], 3);
        let f = ScalarField::parse(&chart, "(1 - u1^2)*sin(u2) + exp(u1)", &Bindings::new()).unwrap();
        let d1 = f.partial(0);
        let want = ScalarField::parse(&chart, "-2*u1*sin(u2) + exp(u1)", &Bindings::new()).unwrap();
        assert!((&d1 - &want).sup_abs() < 1e-14);
        let d12 = d1.partial(1);
        let want = ScalarField::parse(&chart, "-2*u1*cos(u2)", &Bindings::new()).unwrap();
        assert!((&d12 - &want).sup_abs() < 1e-14);
        assert_eq!(d12.order(), 1);
    }

    #[test]
    fn jet_pow_with_negative_base_and_integer_exponent() {
        let chart = Chart::analytic(vec![Axis::gauss_legendre(4, -1.0, 1.0)], 3);
        let f = ScalarField::parse(&chart, "u1^3", &Bindings::new()).unwrap();
        let want = ScalarField::parse(&chart, "3*u1^2", &Bindings::new()).unwrap();
        assert!((&f.partial(0) - &want).sup_abs() < 1e-14);
    }

    #[test]
    fn constants_and_sym_index() {
        let chart = ChartGrid::uniform(1, 8).build().unwrap();
        assert_eq!(ScalarField::constant(&chart, 2.0).as_constant(), Some(2.0));
        assert_eq!(ScalarField::coordinate(&chart, 0).as_constant(), None);
        assert_eq!(sym_index(3, 0, 0), 0);
        assert_eq!(sym_index(3, 0, 2), 2);
        assert_eq!(sym_index(3, 1, 1), 3);
        assert_eq!(sym_index(3, 2, 1), 4);
        assert_eq!(sym_index(3, 2, 2), 5);
    }

    #[test]
    #[should_panic(expected = "different charts")]
    fn charts_never_mix() {
        let a = ChartGrid::uniform(1, 8).build().unwrap();
        let b = ChartGrid::uniform(1, 8).build().unwrap();
        let _ = &ScalarField::zeros(&a) + &ScalarField::zeros(&b);
    }
}
