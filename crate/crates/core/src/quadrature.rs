//! Gauss–Hermite quadrature for the weight `exp(-x^2)`.
//!
//! Nodes start from the Golub–Welsch eigenvalues of the symmetric Jacobi
//! matrix and are then polished with Newton steps on the normalized
//! recurrence; weights use the Christoffel–Darboux form
//! `w_i = sqrt(pi) / sum_k h_k(x_i)^2`, which keeps tiny tail weights
//! accurate in relative terms.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::hermite::normalized_hermite_polys;

pub const MAX_ORDER: usize = 200;

#[derive(Debug, Clone)]
pub struct GaussHermiteRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermiteRule {
    /// `sum_i w_i f(x_i)`, approximating `int f(x) exp(-x^2) dx`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `n`-point rule, exact for polynomials of degree `2n - 1`. Supports `1 <= n <= 200`.
pub fn gauss_hermite_rule(n: usize) -> Result<GaussHermiteRule> {
    if n == 0 || n > MAX_ORDER {
        return Err(Error::QuadratureOrder(n));
    }
    if n == 1 {
        return Ok(GaussHermiteRule { nodes: vec![0.0], weights: vec![PI.sqrt()] });
    }

    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for i in 0..n - 1 {
        let off = ((i + 1) as f64 / 2.0).sqrt();
        jacobi[(i, i + 1)] = off;
        jacobi[(i + 1, i)] = off;
    }
    let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // h_n'(x) = sqrt(2n) h_{n-1}(x)
    for x in nodes.iter_mut() {
        for _ in 0..4 {
            let h = normalized_hermite_polys(*x, n);
            let dh = (2.0 * n as f64).sqrt() * h[n - 1];
            if dh == 0.0 {
                break;
            }
            let step = h[n] / dh;
            *x -= step;
            if step.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
    }
    // exact symmetry
    for i in 0..n / 2 {
        let m = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        nodes[i] = -m;
        nodes[n - 1 - i] = m;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }

    let weights = nodes
        .iter()
        .map(|&x| {
            let h = normalized_hermite_polys(x, n - 1);
            PI.sqrt() / h.iter().map(|v| v * v).sum::<f64>()
        })
        .collect();

    Ok(GaussHermiteRule { nodes, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn one_point() {
        let r = gauss_hermite_rule(1).unwrap();
        assert_eq!(r.nodes, vec![0.0]);
        assert_relative_eq!(r.weights[0], PI.sqrt());
    }

    #[test]
    fn two_points() {
        let r = gauss_hermite_rule(2).unwrap();
        assert_relative_eq!(r.nodes[0], -1.0 / 2f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(r.nodes[1], 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        for w in &r.weights {
            assert_relative_eq!(*w, PI.sqrt() / 2.0, epsilon = 1e-15);
        }
        assert!((r.integrate(|x| x * x) - PI.sqrt() / 2.0).abs() < 1e-14);
    }

    #[test]
    fn moments_exact_to_degree_2n_minus_1() {
        // int x^{2k} e^{-x^2} = Gamma(k + 1/2) = sqrt(pi) (2k-1)!! / 2^k
        for n in [3usize, 8, 20, 60] {
            let r = gauss_hermite_rule(n).unwrap();
            let mut exact = PI.sqrt();
            for k in 0..n {
                if k > 0 {
                    exact *= (2 * k - 1) as f64 / 2.0;
                }
                let got = r.integrate(|x| x.powi(2 * k as i32));
                assert_relative_eq!(got, exact, max_relative = 1e-12);
                let odd = r.integrate(|x| x.powi(2 * k as i32 + 1));
                assert!(odd.abs() < 1e-12 * exact.max(1.0));
            }
        }
    }

    #[test]
    fn weights_sum_to_sqrt_pi_up_to_limit() {
        for n in [50usize, 120, 200] {
            let r = gauss_hermite_rule(n).unwrap();
            let s: f64 = r.weights.iter().sum();
            assert_relative_eq!(s, PI.sqrt(), max_relative = 1e-13);
        }
    }

    #[test]
    fn order_bounds() {
        assert!(gauss_hermite_rule(0).is_err());
        assert!(gauss_hermite_rule(201).is_err());
    }
}
