//! Mehler kernels and the reproducing-kernel space they generate.
//!
//! With `p_n` the orthonormal Hermite polynomials for `e^{-x²}`,
//!
//! ```text
//! K_ε(x, y) = Σ ε^n p_n(x) p_n(y)
//!           = ((1-ε²)π)^{-1/2} exp(-ε²/(1-ε²) (x² + y² - 2xy/ε))
//! ```
//!
//! and `K̃_ε(x, y) = e^{-(x²+y²)/2} K_ε(x, y) = Σ ε^n h_n(x) h_n(y)`.
//! The complex variant conjugates its second argument and is entire in
//! the first.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_epsilon, Error, Result};
use crate::hermite::{hermite_fn_batch_complex, orthonormal_poly_complex, pi_quarter_inv};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelVariant {
    /// Kernel for the weight `e^{-x²}`.
    K,
    /// Kernel in the Hermite-function basis.
    KTilde,
    /// `K` extended to `ℂ × ℂ`, antilinear in the second slot.
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelEval {
    pub epsilon: f64,
    pub variant: KernelVariant,
}

/// Partial sum of the kernel series with a bound on the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: Complex64,
    pub tail_bound: f64,
}

impl KernelEval {
    pub fn new(epsilon: f64, variant: KernelVariant) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(Self { epsilon, variant })
    }

    fn prefactor(&self) -> f64 {
        ((1.0 - self.epsilon * self.epsilon) * PI).sqrt().recip()
    }

    /// Closed form. The second argument is conjugated; on real inputs this
    /// has no effect.
    pub fn mehler_closed(&self, x: Complex64, y: Complex64) -> Complex64 {
        let e = self.epsilon;
        let d = 1.0 - e * e;
        let yb = y.conj();
        let exponent = match self.variant {
            KernelVariant::K | KernelVariant::Complex => -(e * e / d) * (x * x + yb * yb - x * yb * (2.0 / e)),
            KernelVariant::KTilde => -(x * x + yb * yb) * ((1.0 + e * e) / (2.0 * d)) + x * yb * (2.0 * e / d),
        };
        exponent.exp() * self.prefactor()
    }

    pub fn value_real(&self, x: f64, y: f64) -> f64 {
        self.mehler_closed(Complex64::new(x, 0.0), Complex64::new(y, 0.0)).re
    }

    /// Diagonal of `K̃_ε`: `((1-ε²)π)^{-1/2} e^{(ε-1)/(ε+1) x²}`.
    pub fn tilde_diagonal(&self, x: f64) -> f64 {
        let e = self.epsilon;
        self.prefactor() * ((e - 1.0) / (e + 1.0) * x * x).exp()
    }

    /// `Σ_{n≤N} ε^n b_n(x) conj(b_n(y))` with `b_n = p_n` or `h_n`.
    ///
    /// The tail bound uses `|p_n(z)| ≤ π^{-1/4} e^{√(2n)|z|}`.
    pub fn kernel_series(&self, x: Complex64, y: Complex64, n_max: usize) -> SeriesValue {
        let (bx, by) = match self.variant {
            KernelVariant::KTilde => (hermite_fn_batch_complex(n_max, x), hermite_fn_batch_complex(n_max, y)),
            _ => (orthonormal_poly_complex(n_max, x), orthonormal_poly_complex(n_max, y)),
        };
        let mut value = Complex64::new(0.0, 0.0);
        let mut pow = 1.0;
        for n in 0..=n_max {
            value += bx[n] * by[n].conj() * pow;
            pow *= self.epsilon;
        }
        let mut ln_scale = -0.5 * PI.ln();
        if self.variant == KernelVariant::KTilde {
            ln_scale -= 0.5 * ((x * x).re + (y * y).re);
        }
        let tail_bound = series_tail_bound(self.epsilon, x.norm() + y.norm(), n_max + 1, ln_scale);
        SeriesValue { value, tail_bound }
    }
}

/// Bound on `Σ_{n≥start} e^{ln_scale} ε^n e^{√(2n) s}`.
///
/// Terms are summed explicitly until the term ratio, which decreases in
/// `n`, drops below one; the rest is dominated by a geometric series.
pub fn series_tail_bound(epsilon: f64, s: f64, start: usize, ln_scale: f64) -> f64 {
    let ln_eps = epsilon.ln();
    let ln_term = |n: usize| ln_scale + n as f64 * ln_eps + (2.0 * n as f64).sqrt() * s;
    let mut acc = 0.0;
    let mut n = start;
    loop {
        let ln_ratio = ln_eps + ((2.0 * (n + 1) as f64).sqrt() - (2.0 * n as f64).sqrt()) * s;
        if ln_ratio < 0.0 {
            return acc + ln_term(n).exp() / (1.0 - ln_ratio.exp());
        }
        acc += ln_term(n).exp();
        if !acc.is_finite() || n > start + 10_000_000 {
            return f64::INFINITY;
        }
        n += 1;
    }
}

/// Coefficients `f_n` of `f = Σ f_n p_n` in the space with norm
/// `‖f‖² = Σ ε^{-n} |f_n|²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientVector {
    pub epsilon: f64,
    pub coeffs: Vec<f64>,
}

/// Evaluation of the entire extension with the Cauchy–Schwarz bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extension {
    pub value: Complex64,
    pub bound: f64,
}

impl CoefficientVector {
    pub fn new(epsilon: f64, coeffs: Vec<f64>) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(Self { epsilon, coeffs })
    }

    /// Unit vector `e_n`.
    pub fn basis(epsilon: f64, n: usize) -> Result<Self> {
        let mut c = vec![0.0; n + 1];
        c[n] = 1.0;
        Self::new(epsilon, c)
    }

    /// Coefficients of the kernel section `K_ε(·, y)`: `ε^n p_n(y)`.
    pub fn kernel_section(epsilon: f64, y: f64, n_max: usize) -> Result<Self> {
        let p = crate::hermite::orthonormal_poly(n_max, y);
        let mut pow = 1.0;
        let coeffs = p
            .iter()
            .map(|v| {
                let c = pow * v;
                pow *= epsilon;
                c
            })
            .collect();
        Self::new(epsilon, coeffs)
    }

    /// Monotone partial sums of `Σ ε^{-n} |f_n|²`.
    pub fn norm_partial_sums(&self) -> Vec<f64> {
        let inv = self.epsilon.recip();
        let mut w = 1.0;
        let mut acc = 0.0;
        self.coeffs
            .iter()
            .map(|c| {
                acc += w * c * c;
                w *= inv;
                acc
            })
            .collect()
    }

    pub fn rkhs_norm_sq(&self) -> Result<f64> {
        let s = self.norm_partial_sums().last().copied().unwrap_or(0.0);
        if s.is_finite() {
            Ok(s)
        } else {
            Err(Error::DivergentNorm)
        }
    }

    /// `Σ ε^{-n} f_n g_n`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        if self.epsilon != other.epsilon {
            return Err(Error::Dimension("inner product across different epsilon".into()));
        }
        let inv = self.epsilon.recip();
        let mut w = 1.0;
        let mut acc = 0.0;
        for (a, b) in self.coeffs.iter().zip(&other.coeffs) {
            acc += w * a * b;
            w *= inv;
        }
        if acc.is_finite() {
            Ok(acc)
        } else {
            Err(Error::DivergentNorm)
        }
    }

    /// Plain evaluation `Σ f_n p_n(z)`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        if self.coeffs.is_empty() {
            return Complex64::new(0.0, 0.0);
        }
        let p = orthonormal_poly_complex(self.coeffs.len() - 1, z);
        self.coeffs.iter().zip(&p).map(|(c, v)| v * *c).sum()
    }

    /// Value of the entire extension at `z`, with the bound
    /// `π^{-1/4} ‖f‖ (Σ_n ε^n e^{2√(2n)|z|})^{1/2}` (sum over the stored
    /// indices). Errors if the bound is violated.
    pub fn rkhs_extend(&self, z: Complex64) -> Result<Extension> {
        let norm = self.rkhs_norm_sq()?.sqrt();
        let value = self.eval(z);
        let r = z.norm();
        let ln_eps = self.epsilon.ln();
        // Sum in log space: exponents reach 2√(2n)|z| ≫ 700 for large n.
        let lns: Vec<f64> = (0..self.coeffs.len())
            .map(|n| n as f64 * ln_eps + 2.0 * (2.0 * n as f64).sqrt() * r)
            .collect();
        let m = lns.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ln_sum = m + lns.iter().map(|l| (l - m).exp()).sum::<f64>().ln();
        let bound = pi_quarter_inv() * norm * (0.5 * ln_sum).exp();
        if value.norm() > bound * (1.0 + 1e-12) {
            return Err(Error::BoundViolated {
                value: value.norm(),
                bound,
            });
        }
        Ok(Extension { value, bound })
    }
}

/// `[K(x_i, x_j)]` for real points.
pub fn kernel_gram(eval: &KernelEval, points: &[f64]) -> DMatrix<f64> {
    let n = points.len();
    DMatrix::from_fn(n, n, |i, j| eval.value_real(points[i], points[j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn closed_form_examples() {
        let k = KernelEval::new(0.5, KernelVariant::K).unwrap();
        assert_relative_eq!(k.value_real(0.0, 0.0), 1.0 / (0.75 * PI).sqrt(), max_relative = 1e-15);
        let kt = KernelEval::new(0.5, KernelVariant::KTilde).unwrap();
        assert_relative_eq!(
            kt.value_real(1.0, 1.0),
            (-1.0f64 / 3.0).exp() / (0.75 * PI).sqrt(),
            max_relative = 1e-14
        );
        assert_relative_eq!(kt.value_real(1.0, 1.0), kt.tilde_diagonal(1.0), max_relative = 1e-14);
        assert_eq!(k.value_real(1.3, -0.7), k.value_real(-0.7, 1.3));
        assert!(KernelEval::new(1.0, KernelVariant::K).is_err());
        assert!(KernelEval::new(0.0, KernelVariant::K).is_err());
    }

    #[test]
    fn tilde_is_weighted_k() {
        let k = KernelEval::new(0.7, KernelVariant::K).unwrap();
        let kt = KernelEval::new(0.7, KernelVariant::KTilde).unwrap();
        for &(x, y) in &[(0.3, -1.2), (2.0, 1.5), (-0.4, 0.0)] {
            let w = (-(x * x + y * y) / 2.0f64).exp();
            assert_relative_eq!(kt.value_real(x, y), w * k.value_real(x, y), max_relative = 1e-13);
        }
    }

    #[test]
    fn series_examples() {
        let kt = KernelEval::new(0.5, KernelVariant::KTilde).unwrap();
        let s = kt.kernel_series(c(0.0), c(0.0), 0);
        assert_relative_eq!(s.value.re, PI.sqrt().recip(), max_relative = 1e-15);

        let k = KernelEval::new(0.5, KernelVariant::K).unwrap();
        let s = k.kernel_series(c(1.0), c(-1.0), 100);
        let closed = k.value_real(1.0, -1.0);
        assert!((s.value.re - closed).abs() < 1e-12);
        assert!(s.tail_bound < 1e-12);

        let k9 = KernelEval::new(0.9, KernelVariant::K).unwrap();
        let s = k9.kernel_series(c(2.0), c(2.0), 400);
        let closed = k9.value_real(2.0, 2.0);
        assert!((s.value.re - closed).abs() <= 1e-10 * closed.abs().max(1.0));
    }

    #[test]
    fn tail_bound_dominates_actual_tail() {
        let k = KernelEval::new(0.6, KernelVariant::K).unwrap();
        for n in [5usize, 20, 40] {
            let s = k.kernel_series(c(0.8), c(-0.5), n);
            let err = (s.value.re - k.value_real(0.8, -0.5)).abs();
            assert!(err <= s.tail_bound, "n={n}: err {err:e} bound {:e}", s.tail_bound);
        }
    }

    #[test]
    fn complex_kernel_conjugates_second_argument() {
        let kc = KernelEval::new(0.6, KernelVariant::Complex).unwrap();
        let z = Complex64::new(0.4, 0.7);
        let w = Complex64::new(-0.3, 0.2);
        let a = kc.mehler_closed(z, w);
        let b = kc.mehler_closed(w, z);
        assert!((a - b.conj()).norm() < 1e-14);
        let s = kc.kernel_series(z, w, 120);
        assert!((s.value - a).norm() < 1e-12);
    }

    #[test]
    fn extension_examples() {
        let e0 = CoefficientVector::basis(0.5, 0).unwrap();
        let v = e0.rkhs_extend(Complex64::new(1.7, -2.0)).unwrap();
        assert_relative_eq!(v.value.re, pi_quarter_inv(), max_relative = 1e-15);
        assert!(v.value.im.abs() < 1e-16);

        let e1 = CoefficientVector::basis(0.5, 1).unwrap();
        let v = e1.rkhs_extend(Complex64::new(0.0, 1.0)).unwrap();
        let expect = 2.0 / (2.0 * PI.sqrt()).sqrt();
        assert!(v.value.re.abs() < 1e-16);
        assert_relative_eq!(v.value.im, expect, max_relative = 1e-14);
    }

    #[test]
    fn divergent_norm_detected() {
        let v = CoefficientVector::new(1e-3, vec![1.0; 200]).unwrap();
        assert!(matches!(v.rkhs_norm_sq(), Err(Error::DivergentNorm)));
        let sums = CoefficientVector::new(0.5, vec![1.0, 0.5, 0.25]).unwrap().norm_partial_sums();
        assert!(sums.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn reproducing_property_against_quadrature_sections() {
        // Section coefficients computed from the closed-form kernel by quadrature,
        // independent of the series.
        let eps = 0.6;
        let k = KernelEval::new(eps, KernelVariant::K).unwrap();
        let rule = crate::quadrature::gauss_hermite_rule(120).unwrap();
        let f = CoefficientVector::new(eps, vec![0.3, -0.2, 0.5, 0.0, 0.1, -0.05]).unwrap();
        let n = 40;
        for &y in &[-1.7, -0.4, 0.0, 0.9, 2.2] {
            let mut coeffs = vec![0.0; n + 1];
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let p = crate::hermite::orthonormal_poly(n, *x);
                let kv = k.value_real(*x, y);
                for j in 0..=n {
                    coeffs[j] += w * kv * p[j];
                }
            }
            let section = CoefficientVector::new(eps, coeffs).unwrap();
            let lhs = f.inner(&section).unwrap();
            let rhs = f.eval(c(y)).re;
            assert!((lhs - rhs).abs() < 1e-10, "y={y}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn gram_is_positive_semidefinite() {
        let kt = KernelEval::new(0.8, KernelVariant::KTilde).unwrap();
        let pts = [-2.5, -1.1, -0.3, 0.0, 0.2, 0.9, 1.6, 3.0];
        let g = kernel_gram(&kt, &pts);
        let eig = nalgebra::SymmetricEigen::new(g);
        assert!(eig.eigenvalues.iter().all(|&l| l > -1e-12));
    }
}
