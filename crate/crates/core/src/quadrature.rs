//! Gauss–Hermite quadrature for the weight `e^{-x²}`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::hermite::{hermite_fn_batch, orthonormal_poly};

/// Largest supported order. Beyond it the outermost weights `~e^{-x²}` fall
/// below the smallest normal double.
pub const MAX_ORDER: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    /// Ascending nodes.
    pub nodes: Vec<f64>,
    /// Weights for `∫ g(x) e^{-x²} dx ≈ Σ w_i g(x_i)`.
    pub weights: Vec<f64>,
    /// Weights for plain `∫ g(x) dx ≈ Σ W_i g(x_i)`, i.e. `w_i e^{x_i²}`.
    pub dx_weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `Σ w_i g(x_i)`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * g(x)).sum()
    }

    /// Rule for the weight `e^{-a x²}`, `a > 0`, obtained by rescaling.
    /// `dx_weights` of the result integrate plain `dx` as before.
    pub fn rescaled(&self, a: f64) -> QuadratureRule {
        let s = a.sqrt().recip();
        QuadratureRule {
            nodes: self.nodes.iter().map(|x| x * s).collect(),
            weights: self.weights.iter().map(|w| w * s).collect(),
            dx_weights: self.dx_weights.iter().map(|w| w * s).collect(),
        }
    }
}

/// Gauss–Hermite rule of order `m` (exact for polynomials of degree `2m-1`).
///
/// Nodes start from the eigenvalues of the symmetric Jacobi matrix, are
/// polished by Newton steps on the orthonormal recurrence, and are then
/// paired `±x` so the rule is exactly symmetric. Weights use the
/// Christoffel form `1 / Σ_{k<m} p_k(x)²`.
pub fn gauss_hermite_rule(m: usize) -> Result<QuadratureRule> {
    if m == 0 || m > MAX_ORDER {
        return Err(Error::UnsupportedOrder {
            requested: m,
            max: MAX_ORDER,
        });
    }
    let mut jacobi = DMatrix::<f64>::zeros(m, m);
    for k in 1..m {
        let b = (k as f64 / 2.0).sqrt();
        jacobi[(k, k - 1)] = b;
        jacobi[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut raw: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    raw.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let polish = |mut x: f64| {
        for _ in 0..4 {
            let p = orthonormal_poly(m, x);
            let dp = (2.0 * m as f64).sqrt() * p[m - 1];
            if dp == 0.0 {
                break;
            }
            let step = p[m] / dp;
            x -= step;
            if step.abs() < 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        x
    };

    // Nonnegative half, mirrored.
    let half: Vec<f64> = raw[m / 2..]
        .iter()
        .map(|&x| if m % 2 == 1 && x.abs() < 1e-10 { 0.0 } else { polish(x).abs() })
        .collect();
    let mut nodes: Vec<f64> = Vec::with_capacity(m);
    for &x in half.iter().rev() {
        if m % 2 == 1 && x == 0.0 {
            continue;
        }
        nodes.push(-x);
    }
    nodes.extend(half.iter().copied());
    debug_assert_eq!(nodes.len(), m);

    let mut weights = Vec::with_capacity(m);
    let mut dx_weights = Vec::with_capacity(m);
    for &x in &nodes {
        let p = orthonormal_poly(m - 1, x);
        let s: f64 = p.iter().map(|v| v * v).sum();
        weights.push(s.recip());
        let h = hermite_fn_batch(m - 1, x);
        let sh: f64 = h.iter().map(|v| v * v).sum();
        dx_weights.push(sh.recip());
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        dx_weights,
    })
}

/// `∫ x^k e^{-x²} dx`.
pub fn gaussian_moment(k: usize) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    // Γ((k+1)/2) = (k-1)!! sqrt(π) / 2^{k/2}
    let mut v = PI.sqrt();
    let mut j = 1;
    while j < k {
        v *= j as f64 / 2.0;
        j += 2;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn five_point_moments() {
        let r = gauss_hermite_rule(5).unwrap();
        assert_relative_eq!(r.weights.iter().sum::<f64>(), PI.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(r.integrate(|x| x * x), PI.sqrt() / 2.0, max_relative = 1e-13);
    }

    #[test]
    fn exact_to_degree_2m_minus_1() {
        for m in [1usize, 2, 3, 7, 16, 30] {
            let r = gauss_hermite_rule(m).unwrap();
            for k in 0..2 * m {
                let q = r.integrate(|x| x.powi(k as i32));
                let e = gaussian_moment(k);
                let scale = gaussian_moment(k + k % 2);
                assert!((q - e).abs() <= 1e-12 * scale, "m={m} k={k} q={q} e={e}");
            }
        }
    }

    #[test]
    fn weight_sum_large_orders() {
        for m in [100usize, 240, 300] {
            let r = gauss_hermite_rule(m).unwrap();
            assert_relative_eq!(r.weights.iter().sum::<f64>(), PI.sqrt(), max_relative = 1e-13);
            assert!(r.weights.iter().all(|&w| w > 0.0));
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn symmetric_nodes() {
        let r = gauss_hermite_rule(11).unwrap();
        for i in 0..11 {
            assert_eq!(r.nodes[i], -r.nodes[10 - i]);
            assert_eq!(r.weights[i], r.weights[10 - i]);
        }
        assert_eq!(r.nodes[5], 0.0);
    }

    #[test]
    fn order_cap() {
        assert!(matches!(gauss_hermite_rule(0), Err(Error::UnsupportedOrder { .. })));
        assert!(matches!(gauss_hermite_rule(501), Err(Error::UnsupportedOrder { .. })));
    }

    #[test]
    fn dx_weights_integrate_gaussians() {
        let r = gauss_hermite_rule(40).unwrap();
        let q: f64 = r
            .nodes
            .iter()
            .zip(&r.dx_weights)
            .map(|(x, w)| w * (-x * x).exp() * x * x)
            .sum();
        assert_relative_eq!(q, PI.sqrt() / 2.0, max_relative = 1e-13);
    }

    #[test]
    fn h3_h5_orthogonal() {
        let r = gauss_hermite_rule(20).unwrap();
        let q = r.integrate(|x| {
            let h = crate::hermite::hermite_poly_real(5, x);
            h[3] * h[5]
        });
        assert!(q.abs() < 1e-12);
    }
}
