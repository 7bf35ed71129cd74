//! Hermite polynomials `H_n` and Hermite functions `h_n`.
//!
//! Everything here is driven by three-term recurrences. The physicists'
//! polynomials use `H_{n+1} = 2z H_n - 2n H_{n-1}`; the orthonormal variants
//! use the normalized form
//!
//! ```text
//! p_{n+1} = sqrt(2/(n+1)) z p_n - sqrt(n/(n+1)) p_{n-1}
//! ```
//!
//! which never forms `n!` and stays in range for several hundred terms.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;

/// Magnitude above which polynomial values are carried with a binary exponent.
pub const SCALE_THRESHOLD: f64 = 1e300;

const RESCALE_BITS: i32 = 1000;

/// `π^{-1/4}`, the value of `h_0(0)`.
pub fn pi_quarter_inv() -> f64 {
    PI.powf(-0.25)
}

/// A value `mantissa · 2^exp2`. Values below [`SCALE_THRESHOLD`] always have
/// `exp2 == 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub mantissa: Complex64,
    pub exp2: i32,
}

impl Scaled {
    fn canonical(mantissa: Complex64, exp2: i32) -> Self {
        if exp2 != 0 {
            let ln = mantissa.norm().ln() + exp2 as f64 * LN_2;
            if ln < SCALE_THRESHOLD.ln() {
                return Self {
                    mantissa: mantissa * 2f64.powi(exp2),
                    exp2: 0,
                };
            }
        }
        Self { mantissa, exp2 }
    }

    /// Plain value; may be infinite when `exp2 > 0`.
    pub fn value(&self) -> Complex64 {
        if self.exp2 == 0 {
            self.mantissa
        } else {
            self.mantissa * 2f64.powi(self.exp2)
        }
    }

    /// `ln |value|`, finite whenever the mantissa is nonzero.
    pub fn ln_abs(&self) -> f64 {
        self.mantissa.norm().ln() + self.exp2 as f64 * LN_2
    }
}

/// Values `H_0(z), …, H_{n_max}(z)` at a single argument.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteBatch {
    pub argument: Complex64,
    pub values: Vec<Scaled>,
}

impl HermiteBatch {
    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    /// Plain values (overflowing entries become infinite).
    pub fn plain(&self) -> Vec<Complex64> {
        self.values.iter().map(Scaled::value).collect()
    }
}

/// Physicists' Hermite polynomials at a real or complex point.
///
/// Large values are rescaled instead of overflowing, so e.g. `H_200(40i)` is
/// still available through [`Scaled::ln_abs`].
pub fn hermite_poly_batch(n_max: usize, z: impl Into<Complex64>) -> HermiteBatch {
    let z: Complex64 = z.into();
    let mut values = Vec::with_capacity(n_max + 1);
    let mut exp2 = 0i32;
    let mut prev = Complex64::new(0.0, 0.0);
    let mut cur = Complex64::new(1.0, 0.0);
    values.push(Scaled::canonical(cur, 0));
    let growth = 2.0 * z.norm() + 2.0 * n_max as f64 + 1.0;
    for n in 0..n_max {
        if cur.norm().max(prev.norm()) * growth > SCALE_THRESHOLD {
            let s = 2f64.powi(-RESCALE_BITS);
            cur *= s;
            prev *= s;
            exp2 += RESCALE_BITS;
        }
        let next = 2.0 * z * cur - 2.0 * n as f64 * prev;
        prev = cur;
        cur = next;
        values.push(Scaled::canonical(cur, exp2));
    }
    HermiteBatch { argument: z, values }
}

/// Real Hermite polynomials without scaling. Callers keep `|x|` and `n_max`
/// in a range where `H_n(x)` is finite.
pub fn hermite_poly_real(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(1.0);
    if n_max >= 1 {
        out.push(2.0 * x);
    }
    for n in 1..n_max {
        let next = 2.0 * x * out[n] - 2.0 * n as f64 * out[n - 1];
        out.push(next);
    }
    out
}

/// Orthonormal polynomials for the weight `e^{-x²}`:
/// `p_n = H_n / sqrt(n! 2^n sqrt(π))`.
pub fn orthonormal_poly(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(pi_quarter_inv());
    if n_max >= 1 {
        out.push(2f64.sqrt() * x * out[0]);
    }
    for n in 1..n_max {
        let a = (2.0 / (n + 1) as f64).sqrt();
        let b = (n as f64 / (n + 1) as f64).sqrt();
        let next = a * x * out[n] - b * out[n - 1];
        out.push(next);
    }
    out
}

/// Complex version of [`orthonormal_poly`].
pub fn orthonormal_poly_complex(n_max: usize, z: Complex64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(Complex64::new(pi_quarter_inv(), 0.0));
    if n_max >= 1 {
        out.push(2f64.sqrt() * z * out[0]);
    }
    for n in 1..n_max {
        let a = (2.0 / (n + 1) as f64).sqrt();
        let b = (n as f64 / (n + 1) as f64).sqrt();
        let next = a * z * out[n] - b * out[n - 1];
        out.push(next);
    }
    out
}

/// Hermite functions `h_n(x) = (n! 2^n sqrt(π))^{-1/2} H_n(x) e^{-x²/2}`.
///
/// The Gaussian factor is carried as a logarithmic scale through the
/// recurrence so that neither the polynomial part nor `e^{-x²/2}` over- or
/// underflows on its own.
pub fn hermite_fn_batch(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut ln_scale = -0.5 * x * x;
    let mut prev = 0.0f64;
    let mut cur = pi_quarter_inv();
    let emit = |v: f64, ln_scale: f64| -> f64 {
        if v == 0.0 {
            0.0
        } else {
            v.signum() * (v.abs().ln() + ln_scale).exp()
        }
    };
    out.push(emit(cur, ln_scale));
    for n in 0..n_max {
        if cur.abs() > 1e150 {
            cur *= 1e-150;
            prev *= 1e-150;
            ln_scale += 150.0 * std::f64::consts::LN_10;
        }
        let a = (2.0 / (n + 1) as f64).sqrt();
        let b = (n as f64 / (n + 1) as f64).sqrt();
        let next = a * x * cur - b * prev;
        prev = cur;
        cur = next;
        out.push(emit(cur, ln_scale));
    }
    out
}

/// Hermite functions at a complex argument, `h_n(z)` with `e^{-z²/2}`.
pub fn hermite_fn_batch_complex(n_max: usize, z: Complex64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut ln_scale = -0.5 * z * z;
    let zero = Complex64::new(0.0, 0.0);
    let mut prev = zero;
    let mut cur = Complex64::new(pi_quarter_inv(), 0.0);
    let emit = |v: Complex64, ln_scale: Complex64| -> Complex64 {
        if v == zero {
            zero
        } else {
            (v.ln() + ln_scale).exp()
        }
    };
    out.push(emit(cur, ln_scale));
    for n in 0..n_max {
        if cur.norm() > 1e150 {
            cur *= 1e-150;
            prev *= 1e-150;
            ln_scale += 150.0 * std::f64::consts::LN_10;
        }
        let a = (2.0 / (n + 1) as f64).sqrt();
        let b = (n as f64 / (n + 1) as f64).sqrt();
        let next = a * z * cur - b * prev;
        prev = cur;
        cur = next;
        out.push(emit(cur, ln_scale));
    }
    out
}

/// `ln n!` for `n = 0..=n_max`.
pub fn ln_factorials(n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n_max {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// `ln` of the right-hand side of the growth estimate
/// `|H_n(z)| ≤ sqrt(n! 2^n) e^{sqrt(2n)|z|}`.
pub fn ln_growth_bound(n: usize, ln_n_factorial: f64, z_abs: f64) -> f64 {
    0.5 * (ln_n_factorial + n as f64 * LN_2) + (2.0 * n as f64).sqrt() * z_abs
}

/// `ln` of the Hermite-function estimate
/// `|h_n(z)| ≤ π^{-1/4} e^{sqrt(2n)|z| - Re(z²)/2}`.
pub fn ln_fn_bound(n: usize, z: Complex64) -> f64 {
    -0.25 * PI.ln() + (2.0 * n as f64).sqrt() * z.norm() - 0.5 * (z * z).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Independent oracle: the explicit finite sum
    /// `H_n(x) = n! Σ_m (-1)^m (2x)^{n-2m} / (m! (n-2m)!)`.
    fn explicit_sum(n: usize, x: f64) -> f64 {
        let fact = |k: usize| (1..=k).fold(1.0f64, |a, b| a * b as f64);
        (0..=n / 2)
            .map(|m| {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                sign * (2.0 * x).powi((n - 2 * m) as i32) / (fact(m) * fact(n - 2 * m))
            })
            .sum::<f64>()
            * fact(n)
    }

    #[test]
    fn small_values() {
        let b = hermite_poly_batch(2, 1.0);
        let v: Vec<f64> = b.plain().iter().map(|c| c.re).collect();
        assert_eq!(v, vec![1.0, 2.0, 2.0]);
        assert_eq!(hermite_poly_batch(0, 7.3).plain(), vec![Complex64::new(1.0, 0.0)]);
        assert_eq!(hermite_poly_real(3, 2.0)[3], 40.0);
    }

    #[test]
    fn matches_explicit_sum() {
        for n in 0..=15 {
            for &x in &[-2.5, -0.3, 0.0, 0.7, 1.9] {
                let r = hermite_poly_real(n, x)[n];
                assert_relative_eq!(r, explicit_sum(n, x), max_relative = 1e-12, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn recurrence_holds_for_batches() {
        let z = Complex64::new(0.8, -1.3);
        let v = hermite_poly_batch(40, z).plain();
        for n in 1..40 {
            let lhs = v[n + 1];
            let rhs = 2.0 * z * v[n] - 2.0 * n as f64 * v[n - 1];
            assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1.0));
        }
    }

    #[test]
    fn large_arguments_are_scaled_not_overflowed() {
        let b = hermite_poly_batch(300, Complex64::new(0.0, 40.0));
        let last = b.values[300];
        assert!(last.exp2 > 0);
        assert!(last.ln_abs().is_finite());
        // H_n(iy) has magnitude at least (2y)^n.
        assert!(last.ln_abs() >= 300.0 * 80f64.ln());
        let ln_fact = ln_factorials(300);
        assert!(last.ln_abs() <= ln_growth_bound(300, ln_fact[300], 40.0));
    }

    #[test]
    fn hermite_functions_basic_values() {
        assert_relative_eq!(hermite_fn_batch(0, 0.0)[0], PI.powf(-0.25), max_relative = 1e-15);
        let h = hermite_fn_batch(1, 0.0);
        assert_eq!(h[1], 0.0);
    }

    #[test]
    fn hermite_functions_match_definition() {
        let ln_fact = ln_factorials(30);
        for n in 0..=30 {
            for &x in &[-3.0, -0.4, 0.9, 2.2] {
                let hn = hermite_poly_real(n, x)[n];
                let norm = (ln_fact[n] + n as f64 * LN_2 + 0.5 * PI.ln()).exp().sqrt();
                let expect = hn / norm * (-x * x / 2.0).exp();
                let got = hermite_fn_batch(n, x)[n];
                assert!((got - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
            }
        }
    }

    #[test]
    fn hermite_function_bound_n60_x3() {
        let h = hermite_fn_batch(60, 3.0);
        for (n, v) in h.iter().enumerate() {
            let bound = ln_fn_bound(n, Complex64::new(3.0, 0.0)).exp();
            assert!(v.abs() <= bound, "n={n}");
        }
    }

    #[test]
    fn far_tail_does_not_underflow_prematurely() {
        // h_400 at x = 30 lies inside the oscillatory region (sqrt(801) ≈ 28.3 < 30
        // is just outside, so it is small but not zero).
        let h = hermite_fn_batch(400, 27.0);
        assert!(h[400].abs() > 1e-3);
        assert!(h[0] == 0.0 || h[0].abs() < 1e-150);
    }

    #[test]
    fn complex_functions_agree_with_real_on_axis() {
        let r = hermite_fn_batch(50, 1.7);
        let c = hermite_fn_batch_complex(50, Complex64::new(1.7, 0.0));
        for n in 0..=50 {
            assert!((r[n] - c[n].re).abs() < 1e-13 && c[n].im.abs() < 1e-13);
        }
    }

    #[test]
    fn generating_function() {
        let ln_fact = ln_factorials(80);
        for &x in &[-2.0, -0.5, 0.3, 2.0] {
            for &z in &[-0.5f64, -0.2, 0.1, 0.5] {
                let h = hermite_poly_real(80, x);
                let s: f64 = (0..=80)
                    .map(|n| {
                        let sign = if z < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
                        sign * h[n] * (n as f64 * z.abs().ln() - ln_fact[n]).exp()
                    })
                    .sum();
                let expect = (2.0 * x * z - z * z).exp();
                assert!((s - expect).abs() < 1e-10, "x={x} z={z}");
            }
        }
    }
}
