//! Coordinate domains that fields live on.
//!
//! A [`Chart`] is a tensor product of one-dimensional axes with quadrature
//! nodes and weights. Periodic grids ([`ChartGrid`]) differentiate by Fourier
//! collocation; analytic charts carry fields as jets and differentiate them
//! exactly. Fields hold an `Arc<Chart>` and only combine with fields on the
//! same `Arc`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::jet::JetLayout;
use crate::GeometryError;

/// Default node count per periodic axis.
pub const DEFAULT_GRID: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum AxisKind {
    Periodic { period: f64 },
    Interval { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub kind: AxisKind,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Axis {
    /// Uniform nodes `k * period / count`, trapezoid weights.
    pub fn periodic(count: usize, period: f64) -> Self {
        let h = period / count as f64;
        Axis {
            kind: AxisKind::Periodic { period },
            nodes: (0..count).map(|k| k as f64 * h).collect(),
            weights: vec![h; count],
        }
    }

    /// Gauss-Legendre nodes on `[lo, hi]`.
    pub fn gauss_legendre(count: usize, lo: f64, hi: f64) -> Self {
        let (x, w) = gauss_legendre(count);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        Axis {
            kind: AxisKind::Interval { lo, hi },
            nodes: x.iter().map(|t| mid + half * t).collect(),
            weights: w.iter().map(|w| w * half).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.kind, AxisKind::Periodic { .. })
    }
}

/// Gauss-Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre(count: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; count];
    let mut weights = vec![0.0; count];
    let n = count as f64;
    for i in 0..count.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // three-term recurrence for P_n and its derivative
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=count {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let (p, pm1) = if count == 1 { (x, 1.0) } else { (p1, p0) };
            dp = n * (x * p - pm1) / (x * x - 1.0);
            let step = p / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[count - 1 - i] = x;
        weights[i] = w;
        weights[count - 1 - i] = w;
    }
    (nodes, weights)
}

/// Dense Fourier-collocation first-derivative matrix for `count` uniform
/// nodes on a period; the Nyquist mode is dropped.
pub fn fourier_diff_matrix(count: usize, period: f64) -> Vec<f64> {
    let h = 2.0 * PI / count as f64;
    let scale = 2.0 * PI / period;
    let mut d = vec![0.0; count * count];
    for j in 0..count {
        for k in 0..count {
            if j == k {
                continue;
            }
            let diff = j as isize - k as isize;
            let sign = if diff.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            d[j * count + k] = scale * 0.5 * sign / (0.5 * diff as f64 * h).tan();
        }
    }
    d
}

#[derive(Debug)]
pub(crate) enum Backend {
    /// Row-major differentiation matrix per axis.
    Spectral(Vec<Vec<f64>>),
    Jet(JetLayout),
}

#[derive(Debug)]
pub struct Chart {
    axes: Vec<Axis>,
    strides: Vec<usize>,
    len: usize,
    weights: Vec<f64>,
    pub(crate) backend: Backend,
}

impl Chart {
    fn assemble(axes: Vec<Axis>, backend: Backend) -> Arc<Chart> {
        let dim = axes.len();
        let mut strides = vec![1; dim];
        for a in (0..dim.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * axes[a + 1].len();
        }
        let len = axes.iter().map(Axis::len).product();
        let mut weights = vec![1.0; len];
        for (p, w) in weights.iter_mut().enumerate() {
            for (a, axis) in axes.iter().enumerate() {
                *w *= axis.weights[(p / strides[a]) % axis.len()];
            }
        }
        Arc::new(Chart {
            axes,
            strides,
            len,
            weights,
            backend,
        })
    }

    /// Chart whose fields are Taylor jets of the given order at every node.
    pub fn analytic(axes: Vec<Axis>, jet_order: usize) -> Arc<Chart> {
        let layout = JetLayout::new(axes.len(), jet_order);
        Chart::assemble(axes, Backend::Jet(layout))
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn is_grid(&self) -> bool {
        matches!(self.backend, Backend::Spectral(_))
    }

    pub(crate) fn jet(&self) -> Option<&JetLayout> {
        match &self.backend {
            Backend::Jet(l) => Some(l),
            Backend::Spectral(_) => None,
        }
    }

    /// Coordinate quadrature weight of each node (volume density excluded).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub(crate) fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    /// Coordinates of node `p`.
    pub fn coords(&self, p: usize) -> Vec<f64> {
        self.axes
            .iter()
            .enumerate()
            .map(|(a, axis)| axis.nodes[(p / self.strides[a]) % axis.len()])
            .collect()
    }

    pub fn node_index(&self, p: usize, axis: usize) -> usize {
        (p / self.strides[axis]) % self.axes[axis].len()
    }

    /// Coordinate volume `∑ w`.
    pub fn coordinate_volume(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Periodic tensor-product grid: `counts[i]` nodes on `[0, periods[i])`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartGrid {
    pub counts: Vec<usize>,
    pub periods: Vec<f64>,
}

impl ChartGrid {
    /// `dim` axes of `count` nodes with period 2π.
    pub fn uniform(dim: usize, count: usize) -> Self {
        ChartGrid {
            counts: vec![count; dim],
            periods: vec![2.0 * PI; dim],
        }
    }

    pub fn with_periods(counts: Vec<usize>, periods: Vec<f64>) -> Self {
        ChartGrid { counts, periods }
    }

    pub fn build(&self) -> Result<Arc<Chart>, GeometryError> {
        if self.counts.is_empty() {
            return Err(GeometryError::InvalidGrid("dimension must be at least 1".into()));
        }
        if self.counts.len() != self.periods.len() {
            return Err(GeometryError::InvalidGrid(
                "one period per axis required".into(),
            ));
        }
        for (&n, &l) in self.counts.iter().zip(&self.periods) {
            if n < 8 || n % 2 != 0 {
                return Err(GeometryError::InvalidGrid(format!(
                    "node count {n} must be even and at least 8"
                )));
            }
            if !(l > 0.0 && l.is_finite()) {
                return Err(GeometryError::InvalidGrid(format!("period {l} must be positive")));
            }
        }
        let axes: Vec<Axis> = self
            .counts
            .iter()
            .zip(&self.periods)
            .map(|(&n, &l)| Axis::periodic(n, l))
            .collect();
        let diff = self
            .counts
            .iter()
            .zip(&self.periods)
            .map(|(&n, &l)| fourier_diff_matrix(n, l))
            .collect();
        Ok(Chart::assemble(axes, Backend::Spectral(diff)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(6);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        // degree 10 is exact for 6 nodes: ∫ x^10 = 2/11
        let m10: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((m10 - 2.0 / 11.0).abs() < 1e-14);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn odd_and_single_node_rules() {
        let (x, w) = gauss_legendre(1);
        assert!(x[0].abs() < 1e-15 && (w[0] - 2.0).abs() < 1e-15);
        let (x, w) = gauss_legendre(5);
        assert!(x[2].abs() < 1e-15);
        let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((m4 - 0.4).abs() < 1e-14);
    }

    #[test]
    fn grid_validation() {
        assert!(ChartGrid::uniform(2, 6).build().is_err());
        assert!(ChartGrid::uniform(2, 9).build().is_err());
        assert!(ChartGrid::with_periods(vec![8], vec![-1.0]).build().is_err());
        let c = ChartGrid::uniform(3, 8).build().unwrap();
        assert_eq!(c.len(), 512);
        assert_eq!(c.coords(1), vec![0.0, 0.0, 2.0 * PI / 8.0]);
        assert!((c.coordinate_volume() - 8.0 * PI.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn diff_matrix_rows_sum_to_zero() {
        let d = fourier_diff_matrix(16, 2.0 * PI);
        for row in d.chunks(16) {
            assert!(row.iter().sum::<f64>().abs() < 1e-13);
        }
    }
}
