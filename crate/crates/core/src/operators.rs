//! Toeplitz-type operators `T_ε f` and `T̃_ε f` in several realizations.
//!
//! * matrices in the Hermite-function basis: `T̃_f = ε^A M_f`, i.e. the Gram
//!   matrix `⟨f h_m, h_n⟩` with row `n` scaled by `ε^n`;
//! * the defining integral summed over a weighted grid;
//! * the same integral after the substitution `y = εx - √(1-ε²) t`, which
//!   turns the kernel into the Gauss–Hermite weight in `t`;
//! * the factorization dilation ∘ Gaussian convolution ∘ dilation ∘ multiply
//!   on a uniform grid.
//!
//! Matrix convention: `M[(n, m)] = ⟨f h_m, h_n⟩`, so `M · c` maps the
//! coefficients of `u` to those of the image.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_epsilon, Error, Result};
use crate::hermite::hermite_fn_batch;
use crate::kernels::{KernelEval, KernelVariant};
use crate::quadrature::{gauss_hermite_rule, QuadratureRule};
use crate::symbols::Symbol1D;

/// Which orthonormal basis the matrix is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Hermite functions `h_n`, orthonormal in `L²(ℝ)`.
    HermiteFunction,
    /// Orthonormal polynomials `p_n`, orthonormal in `L²(ℝ, e^{-x²})`.
    OrthonormalPoly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub entries: DMatrix<f64>,
    pub basis: Basis,
    pub epsilon: Option<f64>,
}

impl OperatorMatrix {
    pub fn new(entries: DMatrix<f64>, basis: Basis, epsilon: Option<f64>) -> Self {
        Self { entries, basis, epsilon }
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    /// Largest singular value.
    pub fn norm(&self) -> f64 {
        operator_norm(&self.entries)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.entries - &other.entries).amax()
    }

    pub fn apply(&self, coeffs: &[f64]) -> Vec<f64> {
        let v = DVector::from_column_slice(coeffs);
        (&self.entries * v).iter().copied().collect()
    }

    /// Row-major CSV with a two-line header `N,epsilon,symbol` / values.
    pub fn write_csv<W: Write>(&self, mut w: W, symbol: &str) -> std::io::Result<()> {
        writeln!(w, "N,epsilon,symbol")?;
        let eps = self.epsilon.map(|e| e.to_string()).unwrap_or_default();
        writeln!(w, "{},{},\"{}\"", self.size(), eps, symbol.replace('"', "\"\""))?;
        write_matrix_rows(&mut w, &self.entries)
    }
}

pub(crate) fn write_matrix_rows<W: Write>(w: &mut W, m: &DMatrix<f64>) -> std::io::Result<()> {
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:e}", m[(i, j)])).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Largest singular value of a dense matrix.
pub fn operator_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

/// Samples of a function on a strictly increasing grid, with optional
/// quadrature weights for `∫ · dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T = f64> {
    pub nodes: Vec<f64>,
    pub values: Vec<T>,
    pub weights: Option<Vec<f64>>,
}

impl<T: Copy> GridFunction<T> {
    pub fn new(nodes: Vec<f64>, values: Vec<T>, weights: Option<Vec<f64>>) -> Result<Self> {
        if nodes.len() != values.len() || weights.as_ref().is_some_and(|w| w.len() != nodes.len()) {
            return Err(Error::Dimension("grid, values and weights must have equal length".into()));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::UnsortedGrid);
        }
        Ok(Self { nodes, values, weights })
    }

    pub fn sample<F: Fn(f64) -> T>(nodes: Vec<f64>, weights: Option<Vec<f64>>, f: F) -> Result<Self> {
        let values = nodes.iter().map(|&x| f(x)).collect();
        Self::new(nodes, values, weights)
    }

    pub fn map<U: Copy, F: Fn(f64, T) -> U>(&self, f: F) -> GridFunction<U> {
        GridFunction {
            nodes: self.nodes.clone(),
            values: self.nodes.iter().zip(&self.values).map(|(&x, &v)| f(x, v)).collect(),
            weights: self.weights.clone(),
        }
    }
}

impl GridFunction<f64> {
    /// Uniform grid on `[a, b]` with trapezoid weights.
    pub fn uniform<F: Fn(f64) -> f64>(a: f64, b: f64, points: usize, f: F) -> Result<Self> {
        let nodes = uniform_nodes(a, b, points)?;
        let h = nodes[1] - nodes[0];
        let mut w = vec![h; points];
        w[0] *= 0.5;
        w[points - 1] *= 0.5;
        Self::sample(nodes, Some(w), f)
    }

    /// Gauss–Hermite nodes with `dx` weights.
    pub fn gauss_hermite<F: Fn(f64) -> f64>(rule: &QuadratureRule, f: F) -> Result<Self> {
        Self::sample(rule.nodes.clone(), Some(rule.dx_weights.clone()), f)
    }

    /// `max |u - v|` over nodes with `|x| ≤ radius`.
    pub fn sup_dist(&self, other: &Self, radius: f64) -> f64 {
        self.nodes
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .filter(|(x, _)| x.abs() <= radius)
            .map(|(_, (a, b))| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `(∫ |u|² dx)^{1/2}` with the stored weights.
    pub fn l2_norm(&self) -> f64 {
        match &self.weights {
            Some(w) => self.values.iter().zip(w).map(|(v, w)| w * v * v).sum::<f64>().sqrt(),
            None => f64::NAN,
        }
    }
}

pub fn uniform_nodes(a: f64, b: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(a < b) {
        return Err(Error::Dimension("uniform grid needs a < b and at least two points".into()));
    }
    let h = (b - a) / (points - 1) as f64;
    Ok((0..points).map(|i| a + i as f64 * h).collect())
}

/// Hermite-function samples `Q[(i, n)] = h_n(x_i)`.
fn hermite_design(nodes: &[f64], n: usize) -> DMatrix<f64> {
    let mut q = DMatrix::zeros(nodes.len(), n);
    for (i, &x) in nodes.iter().enumerate() {
        let h = hermite_fn_batch(n - 1, x);
        for k in 0..n {
            q[(i, k)] = h[k];
        }
    }
    q
}

/// `Qᵀ diag(d) Q`.
fn weighted_gram(q: &DMatrix<f64>, d: &[f64]) -> DMatrix<f64> {
    let mut dq = q.clone();
    for (i, di) in d.iter().enumerate() {
        dq.row_mut(i).scale_mut(*di);
    }
    q.transpose() * dq
}

/// Minimal Gauss–Hermite order for which [`gram_matrix`] is exact.
pub fn required_order(f: &Symbol1D, n: usize) -> usize {
    n + f.degree() / 2 + 1
}

/// `⟨f h_m, h_n⟩` for `n, m < size`, exact for polynomial × Gaussian `f`.
///
/// The integrand is `p(x) e^{-(1+α)x²}` times a polynomial of degree
/// `2(size-1)`, so the rule is rescaled to the weight `e^{-(1+α)x²}`.
pub fn gram_matrix(f: &Symbol1D, size: usize, rule: &QuadratureRule) -> Result<OperatorMatrix> {
    let need = required_order(f, size);
    if rule.order() < need {
        return Err(Error::InsufficientQuadrature {
            have: rule.order(),
            need,
        });
    }
    let scaled = rule.rescaled(1.0 + f.alpha);
    let q = hermite_design(&scaled.nodes, size);
    let d: Vec<f64> = scaled
        .nodes
        .iter()
        .zip(&scaled.dx_weights)
        .map(|(&x, &w)| w * f.eval(x))
        .collect();
    let mut g = weighted_gram(&q, &d);
    g = (&g + g.transpose()) * 0.5;
    Ok(OperatorMatrix::new(g, Basis::HermiteFunction, None))
}

/// Gram matrix of a callable multiplier using the `dx` weights of `rule`.
///
/// The result is `Qᵀ diag(W f) Q` where `W^{1/2} Q` has orthonormal
/// columns when `rule.order() ≥ size`, so its norm never exceeds
/// `max_i |f(x_i)|`.
pub fn gram_matrix_fn<F: Fn(f64) -> f64>(f: F, size: usize, rule: &QuadratureRule) -> Result<OperatorMatrix> {
    if rule.order() < size {
        return Err(Error::InsufficientQuadrature {
            have: rule.order(),
            need: size,
        });
    }
    let q = hermite_design(&rule.nodes, size);
    let d: Vec<f64> = rule.nodes.iter().zip(&rule.dx_weights).map(|(&x, &w)| w * f(x)).collect();
    let g = weighted_gram(&q, &d);
    Ok(OperatorMatrix::new((&g + g.transpose()) * 0.5, Basis::HermiteFunction, None))
}

fn scale_rows(m: &mut DMatrix<f64>, eps: f64) {
    let mut pow = 1.0;
    for n in 0..m.nrows() {
        m.row_mut(n).scale_mut(pow);
        pow *= eps;
    }
}

/// `T̃_f = ε^A M_f` truncated to `size`.
pub fn toeplitz_tilde_matrix(f: &Symbol1D, eps: f64, size: usize, rule: &QuadratureRule) -> Result<OperatorMatrix> {
    check_epsilon(eps)?;
    let mut m = gram_matrix(f, size, rule)?;
    scale_rows(&mut m.entries, eps);
    m.epsilon = Some(eps);
    Ok(m)
}

pub fn toeplitz_tilde_matrix_fn<F: Fn(f64) -> f64>(
    f: F,
    eps: f64,
    size: usize,
    rule: &QuadratureRule,
) -> Result<OperatorMatrix> {
    check_epsilon(eps)?;
    let mut m = gram_matrix_fn(f, size, rule)?;
    scale_rows(&mut m.entries, eps);
    m.epsilon = Some(eps);
    Ok(m)
}

/// `T_f` in the orthonormal-polynomial basis. Since `p_n ↦ h_n` is the
/// unitary `u ↦ e^{-x²/2} u`, this has the same entries as `T̃_f` in the
/// Hermite-function basis.
pub fn toeplitz_matrix_poly_basis(f: &Symbol1D, eps: f64, size: usize, rule: &QuadratureRule) -> Result<OperatorMatrix> {
    let mut m = toeplitz_tilde_matrix(f, eps, size, rule)?;
    m.basis = Basis::OrthonormalPoly;
    Ok(m)
}

/// Coefficient map `f_n ↦ ε^n f_n`, defined for `0 < ε ≤ 1`.
pub fn epsilon_power_a(eps: f64, coeffs: &[f64]) -> Result<Vec<f64>> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::EpsilonOutOfRange(eps));
    }
    let mut pow = 1.0;
    Ok(coeffs
        .iter()
        .map(|c| {
            let v = pow * c;
            pow *= eps;
            v
        })
        .collect())
}

/// Number operator, derivative and position in the Hermite-function basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMatrices {
    pub a: OperatorMatrix,
    pub d: OperatorMatrix,
    pub x: OperatorMatrix,
}

/// `A = diag(n)`, `h_n' = √(n/2) h_{n-1} - √((n+1)/2) h_{n+1}`,
/// `x h_n = √(n/2) h_{n-1} + √((n+1)/2) h_{n+1}`.
pub fn spectral_matrices(size: usize) -> SpectralMatrices {
    let mut a = DMatrix::zeros(size, size);
    let mut d = DMatrix::zeros(size, size);
    let mut x = DMatrix::zeros(size, size);
    for n in 0..size {
        a[(n, n)] = n as f64;
        if n >= 1 {
            let s = (n as f64 / 2.0).sqrt();
            d[(n - 1, n)] = s;
            x[(n - 1, n)] = s;
        }
        if n + 1 < size {
            let s = ((n + 1) as f64 / 2.0).sqrt();
            d[(n + 1, n)] = -s;
            x[(n + 1, n)] = s;
        }
    }
    let wrap = |m| OperatorMatrix::new(m, Basis::HermiteFunction, None);
    SpectralMatrices {
        a: wrap(a),
        d: wrap(d),
        x: wrap(x),
    }
}

/// `d/dx` in the orthonormal-polynomial basis: `p_k' = √(2k) p_{k-1}`.
pub fn derivative_poly_basis(size: usize) -> OperatorMatrix {
    let mut d = DMatrix::zeros(size, size);
    for k in 1..size {
        d[(k - 1, k)] = (2.0 * k as f64).sqrt();
    }
    OperatorMatrix::new(d, Basis::OrthonormalPoly, None)
}

/// Which of the two operators to realize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// `T_ε f u(x) = ∫ u f K_ε(x, y) e^{-y²} dy`.
    T,
    /// `T̃_ε f u(x) = ∫ u f K̃_ε(x, y) dy`.
    TTilde,
}

/// Decay required of `|u| · weight` at both grid ends.
pub const DECAY_TOLERANCE: f64 = 1e-12;

/// Defining integral summed over the weighted grid of `u`; output on the
/// same nodes. Uniform grids with trapezoid weights are spectrally accurate
/// here as long as the step resolves the kernel width `√((1-ε²)/2)`.
pub fn toeplitz_apply_grid<F: Fn(f64) -> f64>(
    f: F,
    eps: f64,
    u: &GridFunction,
    variant: Variant,
) -> Result<GridFunction> {
    check_epsilon(eps)?;
    let w = u
        .weights
        .as_ref()
        .ok_or_else(|| Error::Dimension("grid path needs quadrature weights".into()))?;
    let weight = |y: f64| match variant {
        Variant::T => (-y * y).exp(),
        Variant::TTilde => 1.0,
    };
    let n = u.nodes.len();
    for i in [0, n - 1] {
        let v = u.values[i].abs() * weight(u.nodes[i]);
        if v >= DECAY_TOLERANCE {
            return Err(Error::NonDecaying(v));
        }
    }
    let kernel = KernelEval::new(
        eps,
        match variant {
            Variant::T => KernelVariant::K,
            Variant::TTilde => KernelVariant::KTilde,
        },
    )?;
    let fu: Vec<f64> = u
        .nodes
        .iter()
        .zip(&u.values)
        .zip(w)
        .map(|((&y, &v), &wy)| wy * v * f(y) * weight(y))
        .collect();
    let values = u
        .nodes
        .iter()
        .map(|&x| {
            u.nodes
                .iter()
                .zip(&fu)
                .map(|(&y, &g)| if g == 0.0 { 0.0 } else { g * kernel.value_real(x, y) })
                .sum()
        })
        .collect();
    GridFunction::new(u.nodes.clone(), values, u.weights.clone())
}

/// Default Gauss–Hermite order in `t` for [`toeplitz_apply_fn`].
pub const T_QUAD_ORDER: usize = 120;

/// Realization through `y = εx - √(1-ε²) t`:
///
/// ```text
/// T u(x) = π^{-1/2} ∫ (fu)(εx - √(1-ε²) t) e^{-t²} dt
/// T̃ u(x) = π^{-1/2} ∫ (fu)(y) e^{(y² - x²)/2} e^{-t²} dt
/// ```
///
/// `u` is a callable; the output lives on `nodes`.
pub fn toeplitz_apply_fn<F, U>(f: F, eps: f64, u: U, nodes: &[f64], variant: Variant, t_order: usize) -> Result<GridFunction>
where
    F: Fn(f64) -> f64,
    U: Fn(f64) -> f64,
{
    check_epsilon(eps)?;
    let rule = gauss_hermite_rule(t_order)?;
    let r = (1.0 - eps * eps).sqrt();
    let inv_sqrt_pi = PI.sqrt().recip();
    let values = nodes
        .iter()
        .map(|&x| {
            rule.nodes
                .iter()
                .zip(&rule.weights)
                .map(|(&t, &w)| {
                    let y = eps * x - r * t;
                    let g = f(y) * u(y);
                    match variant {
                        Variant::T => w * g,
                        Variant::TTilde => w * g * (0.5 * (y * y - x * x)).exp(),
                    }
                })
                .sum::<f64>()
                * inv_sqrt_pi
        })
        .collect();
    GridFunction::new(nodes.to_vec(), values, None)
}

/// `T_ε f u` through the factorization `δ_{ε/r} G δ_r M_f`, `r = √(1-ε²)`,
/// with `(δ_a v)(s) = v(a s)` and `G v = π^{-1/2} ∫ v(s - t) e^{-t²} dt`.
///
/// `u` must live on a uniform grid. The dilation `δ_r` only relabels the
/// grid (step `h / r`), the convolution is a trapezoid sum and the outer
/// dilation evaluates that sum at `s = εx / r`.
pub fn toeplitz_factored_apply<F: Fn(f64) -> f64>(f: F, eps: f64, u: &GridFunction, out_nodes: &[f64]) -> Result<GridFunction> {
    check_epsilon(eps)?;
    let n = u.nodes.len();
    if n < 3 {
        return Err(Error::Dimension("factored path needs at least three grid points".into()));
    }
    let h = u.nodes[1] - u.nodes[0];
    if u.nodes.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
        return Err(Error::Dimension("factored path needs a uniform grid".into()));
    }
    for i in [0, n - 1] {
        if u.values[i].abs() >= DECAY_TOLERANCE {
            return Err(Error::NonDecaying(u.values[i].abs()));
        }
    }
    let r = (1.0 - eps * eps).sqrt();
    // multiply
    let v: Vec<f64> = u.nodes.iter().zip(&u.values).map(|(&x, &uv)| f(x) * uv).collect();
    // dilate: w(s) = v(r s) lives on s_j = x_j / r
    let s_nodes: Vec<f64> = u.nodes.iter().map(|x| x / r).collect();
    let hs = h / r;
    // convolve, then dilate by ε / r
    let c = hs / PI.sqrt();
    let values = out_nodes
        .iter()
        .map(|&x| {
            let s = eps * x / r;
            s_nodes
                .iter()
                .zip(&v)
                .map(|(&sj, &vj)| vj * (-(s - sj) * (s - sj)).exp())
                .sum::<f64>()
                * c
        })
        .collect();
    GridFunction::new(out_nodes.to_vec(), values, None)
}

/// `(4πε)^{-1/2}`.
pub fn c_epsilon(eps: f64) -> f64 {
    (4.0 * PI * eps).sqrt().recip()
}

/// Bound `‖T_f‖ ≤ ε^{-1/2} ‖f‖_∞` that the factorization yields with
/// `‖δ_a‖ = a^{-1/2}` and `‖G‖ ≤ 1`.
pub fn factored_norm_bound(eps: f64) -> f64 {
    eps.sqrt().recip()
}

/// Coefficients `⟨u, h_n⟩` of a sampled function.
pub fn hermite_coefficients(u: &GridFunction, size: usize) -> Result<Vec<f64>> {
    let w = u
        .weights
        .as_ref()
        .ok_or_else(|| Error::Dimension("coefficients need quadrature weights".into()))?;
    let mut c = vec![0.0; size];
    for ((&x, &v), &wx) in u.nodes.iter().zip(&u.values).zip(w) {
        if v == 0.0 {
            continue;
        }
        let h = hermite_fn_batch(size - 1, x);
        for (ck, hk) in c.iter_mut().zip(&h) {
            *ck += wx * v * hk;
        }
    }
    Ok(c)
}

/// `Σ c_n h_n(x)` on the given nodes.
pub fn synthesize(coeffs: &[f64], nodes: &[f64]) -> Vec<f64> {
    if coeffs.is_empty() {
        return vec![0.0; nodes.len()];
    }
    nodes
        .iter()
        .map(|&x| {
            let h = hermite_fn_batch(coeffs.len() - 1, x);
            coeffs.iter().zip(&h).map(|(c, v)| c * v).sum()
        })
        .collect()
}

/// Truncation size used by the completeness check.
pub fn completeness_size(eps: f64) -> usize {
    (20.0 / (1.0 - eps)).ceil() as usize
}

/// `‖Σ_{n<N} ε^n ⟨u, h_n⟩ h_n - u‖` on the grid of `u`, with
/// `N = ⌈20/(1-ε)⌉`. Tends to zero as `ε → 1`.
pub fn completeness_error(u: &GridFunction, eps: f64) -> Result<f64> {
    check_epsilon(eps)?;
    let size = completeness_size(eps);
    let c = epsilon_power_a(eps, &hermite_coefficients(u, size)?)?;
    let approx = synthesize(&c, &u.nodes);
    let diff = GridFunction::new(
        u.nodes.clone(),
        approx.iter().zip(&u.values).map(|(a, b)| a - b).collect(),
        u.weights.clone(),
    )?;
    Ok(diff.l2_norm())
}
