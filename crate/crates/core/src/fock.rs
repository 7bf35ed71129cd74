//! Fock space `F_ε`, the Hermite–Bargmann transform and the Weyl
//! correspondence for Toeplitz operators.
//!
//! `F_ε` is the space of entire functions square integrable against
//! `dμ_ε = e^{-A|z|²} dz` with `A = 2ε/(1-ε²)`. Its orthonormal basis
//!
//! ```text
//! E_n(z) = ε^{n/2} p_n(z) · c · e^{b z²},  c = √(2ε) / ((1-ε²)π)^{1/4},  b = ε²/(1-ε²)
//! ```
//!
//! is the image of `h_n` under the unitary `V`. Since
//! `|e^{bz²}|² e^{-A|z|²} = e^{-a_x x² - a_y y²}` with `a_x = 2ε/(1+ε)`,
//! `a_y = 2ε/(1-ε)`, inner products of `E_n` reduce to tensor Gauss–Hermite
//! sums that are exact for polynomial × Gaussian symbols.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{fit_slope, SlopeReport};
use crate::error::{check_epsilon, Error, Result};
use crate::hermite::{hermite_fn_batch, hermite_poly_batch, orthonormal_poly_complex, pi_quarter_inv};
use crate::operators::{gram_matrix, spectral_matrices, GridFunction};
use crate::quadrature::{gauss_hermite_rule, QuadratureRule};
use crate::symbols::{poisson_bracket, Symbol1D, Symbol2D};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest `ε` for which the anisotropic tensor rules are trusted.
pub const ANISOTROPY_CAP: f64 = 0.95;
/// Default matrix truncation.
pub const DEFAULT_SIZE: usize = 40;
/// Default Gauss–Hermite order per axis.
pub const DEFAULT_ORDER: usize = 80;

/// Constants of `F_ε` and its basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockConstants {
    pub epsilon: f64,
    /// Measure exponent `2ε/(1-ε²)`.
    pub a: f64,
    /// `ε²/(1-ε²)`.
    pub b: f64,
    /// `√(2ε) / ((1-ε²)π)^{1/4}`.
    pub c: f64,
    pub a_x: f64,
    pub a_y: f64,
}

impl FockConstants {
    pub fn new(eps: f64) -> Result<Self> {
        check_epsilon(eps)?;
        let d = 1.0 - eps * eps;
        Ok(Self {
            epsilon: eps,
            a: 2.0 * eps / d,
            b: eps * eps / d,
            c: (2.0 * eps).sqrt() / (d * PI).powf(0.25),
            a_x: 2.0 * eps / (1.0 + eps),
            a_y: 2.0 * eps / (1.0 - eps),
        })
    }
}

/// `E_0(z), …, E_{n_max}(z)`.
pub fn fock_basis(eps: f64, n_max: usize, z: Complex64) -> Result<Vec<Complex64>> {
    let k = FockConstants::new(eps)?;
    Ok(reduced_basis(&k, n_max, z)
        .into_iter()
        .map(|v| v * (z * z * k.b).exp())
        .collect())
}

/// `E_n(z) e^{-b z²}`: the polynomial part, free of overflow.
fn reduced_basis(k: &FockConstants, n_max: usize, z: Complex64) -> Vec<Complex64> {
    let p = orthonormal_poly_complex(n_max, z);
    let se = k.epsilon.sqrt();
    let mut pow = k.c;
    p.into_iter()
        .map(|v| {
            let out = v * pow;
            pow *= se;
            out
        })
        .collect()
}

/// Point evaluation of one basis function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FockBasisEval {
    pub epsilon: f64,
    pub n: usize,
    pub z: Complex64,
}

impl FockBasisEval {
    pub fn value(&self) -> Result<Complex64> {
        Ok(fock_basis(self.epsilon, self.n, self.z)?[self.n])
    }
}

/// `β(z, y) = Σ h_n(y) E_n(z)` in closed form.
pub fn beta_kernel(eps: f64, z: Complex64, y: f64) -> Result<Complex64> {
    check_epsilon(eps)?;
    let d = 1.0 - eps * eps;
    let pre = (2.0 * eps).sqrt() / (d.powf(0.25) * (1.0 - eps).sqrt() * PI.powf(0.75));
    let expo = -z * z * (eps / d) - (1.0 + eps) / (2.0 * (1.0 - eps)) * y * y + z * y * (2.0 * eps.sqrt() / (1.0 - eps));
    Ok(expo.exp() * pre)
}

/// Partial sum `Σ_{n≤N} h_n(y) E_n(z)`.
pub fn beta_series(eps: f64, z: Complex64, y: f64, n_max: usize) -> Result<Complex64> {
    let e = fock_basis(eps, n_max, z)?;
    let h = hermite_fn_batch(n_max, y);
    Ok(e.iter().zip(&h).map(|(a, b)| a * *b).sum())
}

/// `V f = Σ f_n E_n` on a set of points, from Hermite coefficients `f_n`.
pub fn bargmann_v(eps: f64, coeffs: &[f64], z_grid: &[Complex64]) -> Result<GridFunction<Complex64>> {
    check_epsilon(eps)?;
    if coeffs.is_empty() {
        return Err(Error::Dimension("empty coefficient vector".into()));
    }
    let values = z_grid
        .iter()
        .map(|&z| {
            let e = fock_basis(eps, coeffs.len() - 1, z)?;
            Ok(e.iter().zip(coeffs).map(|(a, c)| a * *c).sum())
        })
        .collect::<Result<Vec<_>>>()?;
    // Complex points carry no ordering; index them along the real line.
    let nodes = (0..z_grid.len()).map(|i| i as f64).collect();
    GridFunction::new(nodes, values, None)
}

/// Tensor Gauss–Hermite rule for `∫_ℂ g(z) e^{-ax x² - ay y²} dx dy`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorRule {
    pub points: Vec<Complex64>,
    pub weights: Vec<f64>,
}

impl TensorRule {
    pub fn new(ax: f64, ay: f64, order: usize) -> Result<Self> {
        let base = gauss_hermite_rule(order)?;
        Ok(Self::from_rules(&base.rescaled(ax), &base.rescaled(ay)))
    }

    fn from_rules(rx: &QuadratureRule, ry: &QuadratureRule) -> Self {
        let mut points = Vec::with_capacity(rx.order() * ry.order());
        let mut weights = Vec::with_capacity(points.capacity());
        for (x, wx) in rx.nodes.iter().zip(&rx.weights) {
            for (y, wy) in ry.nodes.iter().zip(&ry.weights) {
                points.push(Complex64::new(*x, *y));
                weights.push(wx * wy);
            }
        }
        Self { points, weights }
    }

    pub fn integrate<F: Fn(Complex64) -> Complex64>(&self, g: F) -> Complex64 {
        self.points.iter().zip(&self.weights).map(|(&z, &w)| g(z) * w).sum()
    }
}

/// Inner products in `F_ε` by the anisotropic tensor rule.
#[derive(Debug, Clone, PartialEq)]
pub struct FockQuadrature {
    pub constants: FockConstants,
    pub rule: TensorRule,
}

impl FockQuadrature {
    pub fn new(eps: f64, order: usize) -> Result<Self> {
        let k = FockConstants::new(eps)?;
        Ok(Self {
            constants: k,
            rule: TensorRule::new(k.a_x, k.a_y, order)?,
        })
    }

    /// `⟨f, g⟩_{F_ε}` for `f = e^{bz²} f̂`, `g = e^{bz²} ĝ`, given `f̂, ĝ`.
    pub fn inner_reduced<F, G>(&self, f_hat: F, g_hat: G) -> Complex64
    where
        F: Fn(Complex64) -> Complex64,
        G: Fn(Complex64) -> Complex64,
    {
        self.rule.integrate(|z| f_hat(z) * g_hat(z).conj())
    }

    /// `⟨f, g⟩_{F_ε}` for plain callables.
    pub fn inner<F, G>(&self, f: F, g: G) -> Complex64
    where
        F: Fn(Complex64) -> Complex64,
        G: Fn(Complex64) -> Complex64,
    {
        let b = self.constants.b;
        self.rule.integrate(|z| f(z) * g(z).conj() * (-2.0 * b * (z * z).re).exp())
    }

    /// Gram matrix `⟨E_m, E_n⟩` for `n, m < size`.
    pub fn basis_gram(&self, size: usize) -> DMatrix<Complex64> {
        let vals: Vec<Vec<Complex64>> = self
            .rule
            .points
            .iter()
            .map(|&z| reduced_basis(&self.constants, size - 1, z))
            .collect();
        DMatrix::from_fn(size, size, |n, m| {
            vals.iter()
                .zip(&self.rule.weights)
                .map(|(v, &w)| v[m] * v[n].conj() * w)
                .sum()
        })
    }
}

/// Quadrature value and closed form of `∫_ℂ H_n(z) conj(H_m(z)) e^{-a_x x² - a_y y²} dx dy`,
/// the latter `√(1-ε²)/(2ε) n! 2^n π ε^{-n} δ_{nm}`.
pub fn complex_orthogonality(n: usize, m: usize, eps: f64, order: usize) -> Result<(Complex64, f64)> {
    check_epsilon(eps)?;
    if eps > ANISOTROPY_CAP {
        return Err(Error::QuadratureResolution(eps));
    }
    if n > 30 || m > 30 {
        return Err(Error::Dimension("complex orthogonality supports n, m <= 30".into()));
    }
    if order < (n + m) / 2 + 1 {
        return Err(Error::InsufficientQuadrature {
            have: order,
            need: (n + m) / 2 + 1,
        });
    }
    let k = FockConstants::new(eps)?;
    let rule = TensorRule::new(k.a_x, k.a_y, order)?;
    let nm = n.max(m);
    let value = rule.integrate(|z| {
        let h = hermite_poly_batch(nm, z).plain();
        h[n] * h[m].conj()
    });
    let expected = if n == m {
        let ln = (1..=n).map(|j| (j as f64).ln()).sum::<f64>() + n as f64 * (2.0 / eps).ln();
        (1.0 - eps * eps).sqrt() / (2.0 * eps) * PI * ln.exp()
    } else {
        0.0
    };
    Ok((value, expected))
}

/// `⟨T_φ E_m, E_n⟩ = ∫ φ E_m conj(E_n) dμ_ε` for `n, m < size`, i.e. the
/// matrix of `V* T_φ V` in the Hermite basis. Exact once
/// `order ≥ size + deg φ / 2`.
pub fn fock_toeplitz_matrix(phi: &Symbol2D, eps: f64, size: usize, order: usize) -> Result<DMatrix<Complex64>> {
    let k = FockConstants::new(eps)?;
    let need = size + phi.max_degree() / 2;
    if order < need {
        return Err(Error::InsufficientQuadrature { have: order, need });
    }
    let rule = TensorRule::new(k.a_x + phi.alpha_x, k.a_y + phi.alpha_xi, order)?;
    let mut basis = DMatrix::<Complex64>::zeros(rule.points.len(), size);
    let mut weighted = basis.clone();
    for (i, (&z, &w)) in rule.points.iter().zip(&rule.weights).enumerate() {
        let e = reduced_basis(&k, size - 1, z);
        let f = phi.eval_poly(z.re, z.im) * w;
        for n in 0..size {
            basis[(i, n)] = e[n];
            weighted[(i, n)] = e[n] * f;
        }
    }
    Ok(basis.adjoint() * weighted)
}

/// Heat time `(1-ε²)/(16ε)` of the Toeplitz-to-Weyl map.
pub fn heat_time(eps: f64) -> f64 {
    (1.0 - eps * eps) / (16.0 * eps)
}

/// Axis factors of the pullback `(x, ξ) ↦ (c₁x, -c₂ξ)`.
pub fn pullback_factors(eps: f64) -> (f64, f64) {
    let s = 2.0 * eps.sqrt();
    ((1.0 + eps) / s, -(1.0 - eps) / s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Given,
    FromToeplitz { phi: Symbol2D, epsilon: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylSymbol {
    pub a: Symbol2D,
    pub provenance: Provenance,
}

/// Weyl symbol of `V* T_φ V`: heat smoothing for time `(1-ε²)/(16ε)`
/// followed by the pullback `(x, ξ) ↦ ((1+ε)/(2√ε) x, -(1-ε)/(2√ε) ξ)`.
pub fn weyl_symbol_of_toeplitz(phi: &Symbol2D, eps: f64) -> Result<WeylSymbol> {
    check_epsilon(eps)?;
    let (c1, c2) = pullback_factors(eps);
    let a = phi.heat_flow(heat_time(eps))?.pullback(c1, c2);
    Ok(WeylSymbol {
        a,
        provenance: Provenance::FromToeplitz {
            phi: phi.clone(),
            epsilon: eps,
        },
    })
}

/// Integral form
/// `a(s, η) = 4ε/((1-ε²)π) ∫ φ(z) exp(-([(1+ε)s - 2√ε z₁]² + [(1-ε)η + 2√ε z₂]²)/(1-ε²)) dz`,
/// evaluated by Gauss–Hermite after centering the Gaussian.
pub fn weyl_symbol_integral(phi: &Symbol2D, eps: f64, s: f64, eta: f64, order: usize) -> Result<Complex64> {
    check_epsilon(eps)?;
    let rule = gauss_hermite_rule(order)?;
    let se = eps.sqrt();
    let sigma = (1.0 - eps * eps).sqrt() / (2.0 * se);
    let m1 = (1.0 + eps) * s / (2.0 * se);
    let m2 = -(1.0 - eps) * eta / (2.0 * se);
    let mut acc = ZERO;
    for (u, wu) in rule.nodes.iter().zip(&rule.weights) {
        for (v, wv) in rule.nodes.iter().zip(&rule.weights) {
            acc += phi.eval(m1 + sigma * u, m2 + sigma * v) * (wu * wv);
        }
    }
    Ok(acc / PI)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

fn complex_gram(poly: &[Complex64], alpha: f64, size: usize, rule: &QuadratureRule) -> Result<DMatrix<Complex64>> {
    let re = Symbol1D::new(poly.iter().map(|c| c.re).collect(), alpha)?;
    let im = Symbol1D::new(poly.iter().map(|c| c.im).collect(), alpha)?;
    let gr = gram_matrix(&re, size, rule)?.entries;
    let gi = gram_matrix(&im, size, rule)?.entries;
    Ok(DMatrix::from_fn(size, size, |i, j| Complex64::new(gr[(i, j)], gi[(i, j)])))
}

fn real_to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|v| Complex64::new(v, 0.0))
}

/// `ǎ_j(r)` for `ξ^j e^{-α ξ²}`: `(2π)^{-1} ∫ ξ^j e^{-αξ²} e^{irξ} dξ`
/// `= i^j (2√α)^{-j} H_j(r/(2√α)) e^{-r²/(4α)} / (2√(πα))`.
fn inverse_fourier_monomial(j: usize, alpha: f64, r: f64) -> Complex64 {
    let q = 2.0 * alpha.sqrt();
    let h = crate::hermite::hermite_poly_real(j, r / q)[j];
    let base = (-r * r / (4.0 * alpha)).exp() / (2.0 * (PI * alpha).sqrt());
    I.powu(j as u32) * (h * q.powi(-(j as i32)) * base)
}

/// Matrix `⟨W_a h_m, h_n⟩` of the Weyl operator for `n, m < size`.
///
/// With momentum decay the kernel `ǎ(s, r)` is a Gaussian and the entries
/// are exact tensor Gauss–Hermite sums in `s = (x+y)/2`, `r = x-y`. Without
/// it, `a = Σ_j A_j(x) ξ^j` is quantized by
/// `W = Σ_j (-i)^j Σ_k C(j,k) 2^{-k} M_{A_j^{(k)}} D^{j-k}`.
pub fn weyl_matrix(a: &Symbol2D, size: usize) -> Result<DMatrix<Complex64>> {
    if a.alpha_xi > 0.0 {
        weyl_matrix_gaussian(a, size)
    } else {
        weyl_matrix_ordered(a, size)
    }
}

fn weyl_matrix_gaussian(a: &Symbol2D, size: usize) -> Result<DMatrix<Complex64>> {
    let order = size + a.max_degree() + 2;
    let base = gauss_hermite_rule(order)?;
    let rs = base.rescaled(1.0 + a.alpha_x);
    let rr = base.rescaled(0.25 + 0.25 / a.alpha_xi);
    let jmax = a.degree_xi();
    let slices: Vec<Vec<Complex64>> = (0..=jmax as u32).map(|j| a.xi_slice(j)).collect();
    let mut out = DMatrix::<Complex64>::zeros(size, size);
    for (&s, &ws) in rs.nodes.iter().zip(&rs.dx_weights) {
        let s_decay = (-a.alpha_x * s * s).exp();
        for (&r, &wr) in rr.nodes.iter().zip(&rr.dx_weights) {
            let mut kernel = ZERO;
            for (j, poly) in slices.iter().enumerate() {
                if poly.iter().all(|c| *c == ZERO) {
                    continue;
                }
                let p: Complex64 = poly.iter().rev().fold(ZERO, |acc, c| acc * s + c);
                kernel += p * inverse_fourier_monomial(j, a.alpha_xi, r);
            }
            let kernel = kernel * (s_decay * ws * wr);
            if kernel == ZERO {
                continue;
            }
            let hx = hermite_fn_batch(size - 1, s + 0.5 * r);
            let hy = hermite_fn_batch(size - 1, s - 0.5 * r);
            for n in 0..size {
                let kn = kernel * hx[n];
                for m in 0..size {
                    out[(n, m)] += kn * hy[m];
                }
            }
        }
    }
    Ok(out)
}

fn weyl_matrix_ordered(a: &Symbol2D, size: usize) -> Result<DMatrix<Complex64>> {
    let jmax = a.degree_xi();
    let big = size + jmax;
    let rule = gauss_hermite_rule(big + a.degree_x() / 2 + jmax + 2)?;
    let d = real_to_complex(&spectral_matrices(big).d.entries);
    let mut d_pows = vec![DMatrix::<Complex64>::identity(big, big)];
    for _ in 0..jmax {
        let next = d_pows.last().unwrap() * &d;
        d_pows.push(next);
    }
    let mut out = DMatrix::<Complex64>::zeros(big, big);
    for j in 0..=jmax {
        let poly = a.xi_slice(j as u32);
        if poly.iter().all(|c| *c == ZERO) {
            continue;
        }
        // A_j(x) = poly(x) e^{-α_x x²}, differentiated k times.
        let mut deriv_re = Symbol1D::new(poly.iter().map(|c| c.re).collect(), a.alpha_x)?;
        let mut deriv_im = Symbol1D::new(poly.iter().map(|c| c.im).collect(), a.alpha_x)?;
        let phase = (-I).powu(j as u32);
        for k in 0..=j {
            let n = deriv_re.poly.len().max(deriv_im.poly.len());
            let coeffs: Vec<Complex64> = (0..n)
                .map(|i| {
                    Complex64::new(
                        deriv_re.poly.get(i).copied().unwrap_or(0.0),
                        deriv_im.poly.get(i).copied().unwrap_or(0.0),
                    )
                })
                .collect();
            let g = complex_gram(&coeffs, a.alpha_x, big, &rule)?;
            out += g * &d_pows[j - k] * (phase * (binomial(j, k) * 0.5f64.powi(k as i32)));
            deriv_re = deriv_re.derivative();
            deriv_im = deriv_im.derivative();
        }
    }
    Ok(out.view((0, 0), (size, size)).into_owned())
}

/// `W_a u(x) = ∫ ǎ((x+y)/2, x-y) u(y) dy` over the weighted grid of `u`.
///
/// Symbols without momentum dependence act by multiplication. Symbols with
/// polynomial momentum dependence and no momentum decay have a
/// distributional kernel and are rejected.
pub fn weyl_apply(a: &Symbol2D, u: &GridFunction<Complex64>) -> Result<GridFunction<Complex64>> {
    if a.alpha_xi == 0.0 {
        if a.degree_xi() > 0 {
            return Err(Error::DistributionKernel);
        }
        return Ok(u.map(|x, v| v * a.eval(x, 0.0)));
    }
    let w = u
        .weights
        .as_ref()
        .ok_or_else(|| Error::Dimension("grid path needs quadrature weights".into()))?;
    let jmax = a.degree_xi();
    let slices: Vec<Vec<Complex64>> = (0..=jmax as u32).map(|j| a.xi_slice(j)).collect();
    let kernel = |s: f64, r: f64| -> Complex64 {
        let mut k = ZERO;
        for (j, poly) in slices.iter().enumerate() {
            let p: Complex64 = poly.iter().rev().fold(ZERO, |acc, c| acc * s + c);
            if p != ZERO {
                k += p * inverse_fourier_monomial(j, a.alpha_xi, r);
            }
        }
        k * (-a.alpha_x * s * s).exp()
    };
    let values = u
        .nodes
        .iter()
        .map(|&x| {
            u.nodes
                .iter()
                .zip(&u.values)
                .zip(w)
                .map(|((&y, &v), &wy)| kernel(0.5 * (x + y), x - y) * v * wy)
                .sum()
        })
        .collect();
    GridFunction::new(u.nodes.clone(), values, u.weights.clone())
}

/// Terms `k = 0..=K` of the Moyal product
/// `(i/2)^k/k! Σ_p C(k,p) (-1)^{k-p} ∂_x^p ∂_ξ^{k-p} a · ∂_ξ^p ∂_x^{k-p} b`.
pub fn star_product(a: &Symbol2D, b: &Symbol2D, max_order: usize) -> Result<Vec<Symbol2D>> {
    if max_order > 6 {
        return Err(Error::OrderCap {
            requested: max_order,
            cap: 6,
        });
    }
    let mut out = Vec::with_capacity(max_order + 1);
    let mut fact = 1.0;
    for k in 0..=max_order {
        if k > 0 {
            fact *= k as f64;
        }
        let mut acc = Symbol2D::constant(0.0);
        for p in 0..=k {
            let sign = if (k - p) % 2 == 0 { 1.0 } else { -1.0 };
            let t = a.derive(p, k - p)?.mul(&b.derive(k - p, p)?)?;
            acc = acc.add(&t.scale_re(sign * binomial(k, p)))?;
        }
        let coeff = (I * 0.5).powu(k as u32) / fact;
        let mut term = acc.scale(coeff);
        if term.is_zero() {
            term.alpha_x = a.alpha_x + b.alpha_x;
            term.alpha_xi = a.alpha_xi + b.alpha_xi;
        }
        out.push(term);
    }
    Ok(out)
}

/// Exact Toeplitz operators on `F_ε` in the monomial basis
/// `e_k = √(A^{k+1}/(π k!)) z^k`.
///
/// For `z^a z̄^b e^{-α|z|²}` the only nonzero entries are
/// `⟨T e_k, e_j⟩ = √(A^{k+1} A^{j+1} / (k! j!)) p! / (A+α)^{p+1}` with
/// `p = a + k = b + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialFock {
    pub constants: FockConstants,
    /// Truncation of the monomial basis.
    pub len: usize,
    ln_fact: Vec<f64>,
}

impl MonomialFock {
    /// Truncation long enough for the first `size` basis vectors `E_n`,
    /// whose monomial coefficients decay like `ε^{k/2}`.
    pub fn new(eps: f64, size: usize) -> Result<Self> {
        let len = 2 * (45.0 / eps.ln().abs()).ceil() as usize + 4 * size;
        Self::with_len(eps, len)
    }

    /// Explicit truncation `e_0, …, e_{len-1}`.
    pub fn with_len(eps: f64, len: usize) -> Result<Self> {
        let constants = FockConstants::new(eps)?;
        Ok(Self {
            constants,
            len,
            ln_fact: crate::hermite::ln_factorials(len + 64),
        })
    }

    fn ln_norm(&self, k: usize) -> f64 {
        // ln c_k, c_k = √(A^{k+1}/(π k!))
        0.5 * ((k + 1) as f64 * self.constants.a.ln() - PI.ln() - self.ln_fact[k])
    }

    /// `T_φ v` for a radial-Gaussian symbol.
    pub fn apply(&self, phi: &Symbol2D, v: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        if phi.alpha_x != phi.alpha_xi {
            return Err(Error::UnsupportedSymbol("monomial Toeplitz needs an isotropic Gaussian".into()));
        }
        let alpha = phi.alpha_x;
        let la = self.constants.a.ln();
        let lc = (self.constants.a + alpha).ln();
        let hol = phi.to_holomorphic_coords();
        let mut out = DVector::<Complex64>::zeros(self.len);
        for (&(a, b), &c) in &hol {
            let (a, b) = (a as i64, b as i64);
            for j in 0..self.len as i64 {
                let k = b + j - a;
                if k < 0 || k >= self.len as i64 {
                    continue;
                }
                let p = (a + k) as usize;
                if p >= self.ln_fact.len() {
                    continue;
                }
                let (ku, ju) = (k as usize, j as usize);
                let ln_v = 0.5 * ((ku + 1) as f64 * la + (ju + 1) as f64 * la - self.ln_fact[ku] - self.ln_fact[ju])
                    + self.ln_fact[p]
                    - (p + 1) as f64 * lc;
                out[ju] += c * ln_v.exp() * v[ku];
            }
        }
        Ok(out)
    }

    /// Monomial coefficients of `E_0, …, E_{size-1}` as columns.
    pub fn basis_vectors(&self, size: usize) -> DMatrix<f64> {
        let k = &self.constants;
        let eps = k.epsilon;
        let mut e = DMatrix::<f64>::zeros(self.len, size);
        // E_0 = c π^{-1/4} Σ_j b^j z^{2j} / j!
        let ln_c0 = (k.c * pi_quarter_inv()).ln();
        for j in 0..self.len.div_ceil(2) {
            let idx = 2 * j;
            if idx >= self.len {
                break;
            }
            let ln = ln_c0 + j as f64 * k.b.ln() - self.ln_fact[j] - self.ln_norm(idx);
            e[(idx, 0)] = ln.exp();
        }
        // E_{n+1} = √(2ε/(n+1)) z E_n - ε √(n/(n+1)) E_{n-1},  z e_k = √((k+1)/A) e_{k+1}
        for n in 0..size.saturating_sub(1) {
            let c1 = (2.0 * eps / (n + 1) as f64).sqrt();
            let c2 = eps * (n as f64 / (n + 1) as f64).sqrt();
            for kk in (0..self.len).rev() {
                let mut v = 0.0;
                if kk >= 1 {
                    v += c1 * (kk as f64 / k.a).sqrt() * e[(kk - 1, n)];
                }
                if n >= 1 {
                    v -= c2 * e[(kk, n - 1)];
                }
                e[(kk, n + 1)] = v;
            }
        }
        e
    }
}

/// Where operator products are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Window {
    /// Compression to the span of `E_0, …, E_{size-1}`, i.e. the `size × size`
    /// Hermite block of `V* T V`.
    Compressed { size: usize },
    /// The operator on the span of the monomials `e_k` whose circles
    /// `|z|² ≈ (k+1)/A` meet the support of the symbols, where the symbol
    /// Gaussians exceed `e^{-36}`.
    Support,
}

/// Matrices of `T_{φ_1} … T_{φ_r}` in a window.
struct Compressor {
    fock: MonomialFock,
    /// Columns spanning the window, in monomial coordinates.
    basis: DMatrix<Complex64>,
    /// The window is the leading coordinate block.
    coordinate: bool,
}

impl Compressor {
    fn new(eps: f64, window: Window, symbols: &[&Symbol2D]) -> Result<Self> {
        match window {
            Window::Compressed { size } => {
                let fock = MonomialFock::new(eps, size)?;
                let basis = real_to_complex(&fock.basis_vectors(size));
                Ok(Self {
                    fock,
                    basis,
                    coordinate: false,
                })
            }
            Window::Support => {
                let alpha = symbols
                    .iter()
                    .map(|s| s.alpha_x.min(s.alpha_xi))
                    .fold(f64::INFINITY, f64::min);
                if !(alpha > 0.0) {
                    return Err(Error::UnsupportedSymbol("support window needs Gaussian decay".into()));
                }
                let k = FockConstants::new(eps)?;
                let span = (k.a * 36.0 / alpha).ceil() as usize + 16;
                let pad: usize = symbols.iter().map(|s| s.max_degree()).sum::<usize>() + 4;
                let fock = MonomialFock::with_len(eps, span + pad)?;
                let basis = DMatrix::from_fn(fock.len, span, |i, j| {
                    if i == j {
                        Complex64::new(1.0, 0.0)
                    } else {
                        ZERO
                    }
                });
                Ok(Self {
                    fock,
                    basis,
                    coordinate: true,
                })
            }
        }
    }

    fn product(&self, symbols: &[&Symbol2D]) -> Result<DMatrix<Complex64>> {
        let mut cols = self.basis.clone();
        for phi in symbols.iter().rev() {
            for c in 0..cols.ncols() {
                let v = self.fock.apply(phi, &cols.column(c).into_owned())?;
                cols.set_column(c, &v);
            }
        }
        if self.coordinate {
            let n = cols.ncols();
            return Ok(cols.rows(0, n).into_owned());
        }
        Ok(self.basis.adjoint() * cols)
    }
}

/// Largest singular value of a complex matrix.
pub fn complex_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    (m.adjoint() * m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(0.0, f64::max)
        .sqrt()
}

/// `h = (1-ε²)π/(2ε)`.
pub fn planck(eps: f64) -> f64 {
    (1.0 - eps * eps) * PI / (2.0 * eps)
}

/// `(∂_xφ - i∂_ξφ)(∂_xψ + i∂_ξψ)`.
pub fn product_defect_symbol(phi: &Symbol2D, psi: &Symbol2D) -> Result<Symbol2D> {
    let left = phi.d_x().sub(&phi.d_xi().scale(I))?;
    let right = psi.d_x().add(&psi.d_xi().scale(I))?;
    left.mul(&right)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceReport {
    /// `‖[T_φ,T_ψ] - (ih/2π) T_{{φ,ψ}}‖`, fitted against `h`.
    pub commutator: SlopeReport,
    /// `‖T_φT_ψ - T_{φψ} + 2t T_χ‖`, fitted against `t`.
    pub product: SlopeReport,
    /// `exp(intercept)` of the commutator fit: the constant `C` in `C h^slope`.
    pub leading_constant: f64,
    /// Norm of `[T_φ, T_ψ]` itself at each `ε`, for scale.
    pub commutator_norms: Vec<f64>,
}

/// Residuals of the correspondence principle at one `ε`:
/// `(commutator residual, product residual, commutator norm)`.
pub fn correspondence_residuals(phi: &Symbol2D, psi: &Symbol2D, eps: f64, window: Window) -> Result<(f64, f64, f64)> {
    let bracket = poisson_bracket(phi, psi)?;
    let prod = phi.mul(psi)?;
    let chi = product_defect_symbol(phi, psi)?;
    let comp = Compressor::new(eps, window, &[phi, psi])?;
    let tt = comp.product(&[phi, psi])?;
    let tt_rev = comp.product(&[psi, phi])?;
    let t_bracket = comp.product(&[&bracket])?;
    let comm = &tt - &tt_rev;
    let scale = I * (planck(eps) / (2.0 * PI));
    let comm_res = complex_norm(&(&comm - t_bracket * scale));
    let t_prod = comp.product(&[&prod])?;
    let t_chi = comp.product(&[&chi])?;
    let t = heat_time(eps);
    let prod_res = complex_norm(&(&tt - t_prod + t_chi * Complex64::new(2.0 * t, 0.0)));
    Ok((comm_res, prod_res, complex_norm(&comm)))
}

/// Commutator and product-defect residual orders over `ε_list`.
///
/// Operator norms need [`Window::Support`]: a fixed Hermite block only sees a
/// momentum strip of width `O(1-ε)` in Fock coordinates.
pub fn correspondence_experiment(
    phi: &Symbol2D,
    psi: &Symbol2D,
    epsilons: &[f64],
    window: Window,
) -> Result<CorrespondenceReport> {
    let mut comm = Vec::new();
    let mut prod = Vec::new();
    let mut norms = Vec::new();
    for &e in epsilons {
        let (c, p, n) = correspondence_residuals(phi, psi, e, window)?;
        comm.push(c);
        prod.push(p);
        norms.push(n);
    }
    let hs: Vec<f64> = epsilons.iter().map(|&e| planck(e)).collect();
    let ts: Vec<f64> = epsilons.iter().map(|&e| heat_time(e)).collect();
    let (s1, c1, r1) = fit_slope(&hs, &comm)?;
    let (s2, c2, r2) = fit_slope(&ts, &prod)?;
    Ok(CorrespondenceReport {
        commutator: SlopeReport {
            epsilons: epsilons.to_vec(),
            residual_norms: comm,
            fitted_slope: s1,
            intercept: c1,
            r_squared: r1,
        },
        product: SlopeReport {
            epsilons: epsilons.to_vec(),
            residual_norms: prod,
            fitted_slope: s2,
            intercept: c2,
            r_squared: r2,
        },
        leading_constant: c1.exp(),
        commutator_norms: norms,
    })
}

/// `U`: the normalized monomial `e_n` goes to `E_n`, so coefficients in
/// `{e_n}` become the same coefficients in `{E_n}`.
pub fn bargmann_u(monomial_coeffs: &[Complex64], eps: f64) -> Result<Vec<Complex64>> {
    check_epsilon(eps)?;
    Ok(monomial_coeffs.to_vec())
}

/// Normalized monomial `e_n(z)`.
pub fn monomial(eps: f64, n: usize, z: Complex64) -> Result<Complex64> {
    let k = FockConstants::new(eps)?;
    let lf: f64 = (1..=n).map(|j| (j as f64).ln()).sum();
    let ln_c = 0.5 * ((n + 1) as f64 * k.a.ln() - PI.ln() - lf);
    Ok(z.powu(n as u32) * ln_c.exp())
}

/// Largest deviation over `points` between `E_n` and
/// `(1-ε²)^{1/4} T_{1/ψ} δ T*_ψ e_n`, `ψ(z) = e^{-bz²}`,
/// `δ g(w) = g(√(1-ε²) w)`. The adjoint Toeplitz operator is evaluated
/// through the reproducing kernel `(A/π) e^{A w z̄}` by quadrature.
pub fn u_factorization_error(eps: f64, n: usize, points: &[Complex64], order: usize) -> Result<f64> {
    let k = FockConstants::new(eps)?;
    let base = gauss_hermite_rule(order)?.rescaled(k.a);
    let rule = TensorRule::from_rules(&base, &base);
    let s = (1.0 - eps * eps).sqrt();
    let mut worst = 0.0f64;
    for &w in points {
        let w_dil = w * s;
        let adj = rule.integrate(|z| {
            let psi_bar = (-(z.conj() * z.conj()) * k.b).exp();
            let en = monomial(eps, n, z).unwrap_or(ZERO);
            psi_bar * en * (w_dil * z.conj() * k.a).exp() * (k.a / PI)
        });
        let lhs = adj * (w * w * k.b).exp() * (1.0 - eps * eps).powf(0.25);
        let rhs = fock_basis(eps, n, w)?[n];
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// Row-major real and imaginary parts as two CSV blocks.
pub fn write_complex_csv<W: Write>(mut w: W, m: &DMatrix<Complex64>) -> std::io::Result<()> {
    writeln!(w, "part,N")?;
    writeln!(w, "re,{}", m.nrows())?;
    crate::operators::write_matrix_rows(&mut w, &m.map(|c| c.re))?;
    writeln!(w, "im,{}", m.nrows())?;
    crate::operators::write_matrix_rows(&mut w, &m.map(|c| c.im))
}

/// Symbols used for the operator-level Toeplitz/Weyl comparison.
pub fn weyl_corpus() -> Vec<(&'static str, Symbol2D)> {
    vec![
        ("one", Symbol2D::constant(1.0)),
        ("x", Symbol2D::x()),
        ("xi_regulated", {
            let mut s = Symbol2D::xi();
            s.alpha_x = 0.1;
            s.alpha_xi = 0.1;
            s
        }),
        ("gauss", Symbol2D::gaussian(1.0)),
        ("r2_gauss", {
            let mut s = Symbol2D::from_real(&[((2, 0), 1.0), ((0, 2), 1.0)], 1.0).unwrap();
            s.alpha_x = 1.0;
            s
        }),
    ]
}
