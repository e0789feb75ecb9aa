//! Truncated multivariate Taylor series ("jets").
//!
//! On analytic charts every field is stored at each quadrature node as the
//! coefficients of its Taylor expansion in the chart coordinates, truncated at
//! a fixed total degree. Products, quotients and elementary functions act on
//! the coefficients exactly, and a partial derivative is a coefficient shift
//! that lowers the retained order by one. No finite differences are involved,
//! so curvature of closed-form metrics is exact to round-off.
//!
//! Coefficients are graded: all monomials of degree 0, then degree 1, and so
//! on, so a jet of order `k` is a prefix of length `len(k)`.

use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq)]
pub struct JetLayout {
    max_order: usize,
    exponents: Vec<Vec<u8>>,
    len_by_order: Vec<usize>,
    // (lhs, rhs, out) triples sorted by output degree
    products: Vec<(u32, u32, u32)>,
    products_by_order: Vec<usize>,
    // per axis, per output coefficient: (source coefficient, factor)
    derivatives: Vec<Vec<(u32, f64)>>,
}

impl JetLayout {
    pub fn new(dim: usize, max_order: usize) -> Self {
        let mut exponents: Vec<Vec<u8>> = Vec::new();
        let mut len_by_order = Vec::with_capacity(max_order + 1);
        for degree in 0..=max_order {
            let mut current = vec![0u8; dim];
            push_monomials(&mut exponents, &mut current, 0, degree);
            len_by_order.push(exponents.len());
        }
        let index: HashMap<Vec<u8>, usize> = exponents
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        let degree = |e: &[u8]| e.iter().map(|&x| x as usize).sum::<usize>();

        let mut products = Vec::new();
        for (i, a) in exponents.iter().enumerate() {
            for (j, b) in exponents.iter().enumerate() {
                if degree(a) + degree(b) > max_order {
                    continue;
                }
                let sum: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                products.push((i as u32, j as u32, index[&sum] as u32));
            }
        }
        products.sort_by_key(|&(_, _, k)| degree(&exponents[k as usize]));
        let products_by_order = (0..=max_order)
            .map(|o| {
                products
                    .iter()
                    .take_while(|&&(_, _, k)| degree(&exponents[k as usize]) <= o)
                    .count()
            })
            .collect();

        let derivatives = (0..dim)
            .map(|axis| {
                let usable = if max_order == 0 { 0 } else { len_by_order[max_order - 1] };
                exponents[..usable]
                    .iter()
                    .map(|e| {
                        let mut src = e.clone();
                        src[axis] += 1;
                        (index[&src] as u32, (e[axis] + 1) as f64)
                    })
                    .collect()
            })
            .collect();

        JetLayout {
            max_order,
            exponents,
            len_by_order,
            products,
            products_by_order,
            derivatives,
        }
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Number of coefficients of a jet of the given order.
    pub fn len(&self, order: usize) -> usize {
        self.len_by_order[order]
    }

    #[cfg(test)]
    pub fn exponent(&self, coefficient: usize) -> &[u8] {
        &self.exponents[coefficient]
    }

    /// Coordinate `axis` expanded about `value`.
    pub fn seed(&self, axis: usize, value: f64, out: &mut [f64]) {
        out.fill(0.0);
        out[0] = value;
        if self.max_order > 0 && out.len() > 1 {
            out[1 + axis] = 1.0;
        }
    }

    /// `out = a * b` truncated at `order`; all three slices have `len(order)`.
    pub fn mul(&self, order: usize, a: &[f64], b: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for &(i, j, k) in &self.products[..self.products_by_order[order]] {
            out[k as usize] += a[i as usize] * b[j as usize];
        }
    }

    /// Partial derivative along `axis` of a jet of order `order >= 1`.
    pub fn derivative(&self, axis: usize, order: usize, a: &[f64], out: &mut [f64]) {
        let n = self.len(order - 1);
        for (o, &(src, factor)) in out[..n].iter_mut().zip(&self.derivatives[axis][..n]) {
            *o = factor * a[src as usize];
        }
    }

    /// Composes the univariate series `sum_k taylor[k] * t^k` (expanded about
    /// `a[0]`) with the jet `a`.
    pub fn compose(&self, order: usize, a: &[f64], taylor: &[f64], out: &mut [f64]) {
        let len = self.len(order);
        out[..len].fill(0.0);
        out[0] = taylor[0];
        if order == 0 {
            return;
        }
        let mut delta = a[..len].to_vec();
        delta[0] = 0.0;
        let mut power = delta.clone();
        let mut scratch = vec![0.0; len];
        for (k, &coef) in taylor.iter().enumerate().take(order + 1).skip(1) {
            if k > 1 {
                self.mul(order, &power, &delta, &mut scratch);
                std::mem::swap(&mut power, &mut scratch);
            }
            if coef != 0.0 {
                for (o, p) in out[..len].iter_mut().zip(&power) {
                    *o += coef * p;
                }
            }
        }
    }
}

fn push_monomials(out: &mut Vec<Vec<u8>>, current: &mut Vec<u8>, axis: usize, remaining: usize) {
    if axis + 1 == current.len() {
        current[axis] = remaining as u8;
        out.push(current.clone());
        return;
    }
    for k in (0..=remaining).rev() {
        current[axis] = k as u8;
        push_monomials(out, current, axis + 1, remaining - k);
    }
    current[axis] = 0;
}

/// Normalized Taylor coefficients `f^(k)(x)/k!`, k = 0..=order, for the
/// elementary functions used by jets.
pub(crate) mod series {
    pub fn exp(x: f64, order: usize) -> Vec<f64> {
        let ex = x.exp();
        let mut out = Vec::with_capacity(order + 1);
        let mut fact = 1.0;
        for k in 0..=order {
            if k > 0 {
                fact *= k as f64;
            }
            out.push(ex / fact);
        }
        out
    }

    pub fn sin(x: f64, order: usize) -> Vec<f64> {
        shifted_trig(x, order, 0)
    }

    pub fn cos(x: f64, order: usize) -> Vec<f64> {
        shifted_trig(x, order, 1)
    }

    // d^k/dx^k sin(x) cycles sin, cos, -sin, -cos
    fn shifted_trig(x: f64, order: usize, phase: usize) -> Vec<f64> {
        let (s, c) = x.sin_cos();
        let cycle = [s, c, -s, -c];
        let mut fact = 1.0;
        (0..=order)
            .map(|k| {
                if k > 0 {
                    fact *= k as f64;
                }
                cycle[(k + phase) % 4] / fact
            })
            .collect()
    }

    pub fn ln(x: f64, order: usize) -> Vec<f64> {
        (0..=order)
            .map(|k| {
                if k == 0 {
                    x.ln()
                } else {
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    sign / (k as f64 * x.powi(k as i32))
                }
            })
            .collect()
    }

    /// Generalized binomial series of `x^p`.
    pub fn powf(x: f64, p: f64, order: usize) -> Vec<f64> {
        let integer = p.fract() == 0.0 && p >= 0.0;
        let mut out = Vec::with_capacity(order + 1);
        let mut binom = 1.0;
        for k in 0..=order {
            if k > 0 {
                binom *= (p - (k as f64 - 1.0)) / k as f64;
            }
            if integer && k as f64 > p {
                out.push(0.0);
            } else {
                out.push(binom * x.powf(p - k as f64));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_counts() {
        let l = JetLayout::new(3, 3);
        assert_eq!(l.len(0), 1);
        assert_eq!(l.len(1), 4);
        assert_eq!(l.len(2), 10);
        assert_eq!(l.len(3), 20);
        assert_eq!(l.exponent(1), &[1, 0, 0]);
    }

    #[test]
    fn product_of_seeds() {
        // (x + 1)(y + 2) about (1, 2): value 2, d/dx = y = 2, d/dy = x = 1, d2/dxdy = 1
        let l = JetLayout::new(2, 2);
        let n = l.len(2);
        let (mut x, mut y, mut p) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        l.seed(0, 1.0, &mut x);
        l.seed(1, 2.0, &mut y);
        l.mul(2, &x, &y, &mut p);
        let coef = |e: &[u8]| p[(0..n).find(|&i| l.exponent(i) == e).unwrap()];
        assert_eq!(coef(&[0, 0]), 2.0);
        assert_eq!(coef(&[1, 0]), 2.0);
        assert_eq!(coef(&[0, 1]), 1.0);
        assert_eq!(coef(&[1, 1]), 1.0);
        assert_eq!(coef(&[2, 0]), 0.0);
    }

    #[test]
    fn compose_matches_finite_differences() {
        // exp(sin(x)) derivatives at x = 0.3 against central differences
        let l = JetLayout::new(1, 4);
        let n = l.len(4);
        let x0 = 0.3;
        let mut x = vec![0.0; n];
        l.seed(0, x0, &mut x);
        let mut s = vec![0.0; n];
        l.compose(4, &x, &series::sin(x0, 4), &mut s);
        let mut e = vec![0.0; n];
        l.compose(4, &s, &series::exp(s[0], 4), &mut e);
        let f = |t: f64| t.sin().exp();
        let h = 1e-3;
        let d1 = (f(x0 + h) - f(x0 - h)) / (2.0 * h);
        let d2 = (f(x0 + h) - 2.0 * f(x0) + f(x0 - h)) / (h * h);
        assert!((e[0] - f(x0)).abs() < 1e-15);
        assert!((e[1] - d1).abs() < 1e-6);
        assert!((2.0 * e[2] - d2).abs() < 1e-5);
    }

    #[test]
    fn derivative_shifts_coefficients() {
        // f = x^2 y about (1, 1); df/dx = 2xy -> value 2, d/dy of that 2
        let l = JetLayout::new(2, 3);
        let n = l.len(3);
        let (mut x, mut y) = (vec![0.0; n], vec![0.0; n]);
        l.seed(0, 1.0, &mut x);
        l.seed(1, 1.0, &mut y);
        let mut xx = vec![0.0; n];
        l.mul(3, &x, &x, &mut xx);
        let mut f = vec![0.0; n];
        l.mul(3, &xx, &y, &mut f);
        let mut fx = vec![0.0; l.len(2)];
        l.derivative(0, 3, &f, &mut fx);
        assert_eq!(fx[0], 2.0);
        let mut fxy = vec![0.0; l.len(1)];
        l.derivative(1, 2, &fx, &mut fxy);
        assert_eq!(fxy[0], 2.0);
    }

    #[test]
    fn integer_power_at_zero_is_finite() {
        let c = series::powf(0.0, 2.0, 4);
        assert_eq!(c, vec![0.0, 0.0, 1.0, 0.0, 0.0]);
    }
}
