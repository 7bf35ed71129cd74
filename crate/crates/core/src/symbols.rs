//! Polynomial × centered-Gaussian symbols in one and two real variables.
//!
//! [`Symbol1D`] is `p(x) e^{-αx²}`; [`Symbol2D`] is
//! `p(x, ξ) e^{-α_x x² - α_ξ ξ²}` with complex coefficients. Both classes are
//! closed under differentiation and products, so every derivative the
//! expansions need is exact at coefficient level. The two-variable class also
//! carries the heat semigroup `e^{tΔ}` in closed form.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximal polynomial degree (per variable) a symbol may carry.
pub const DEGREE_CAP: usize = 64;

const C0: Complex64 = Complex64::new(0.0, 0.0);

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

fn double_factorial_odd(q: usize) -> f64 {
    // (2q-1)!!
    (1..=q).fold(1.0, |acc, j| acc * (2 * j - 1) as f64)
}

/// One-variable symbol `p(x) e^{-αx²}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Symbol1D {
    /// Ascending coefficients of `p`.
    pub poly: Vec<f64>,
    pub alpha: f64,
}

impl Symbol1D {
    pub fn new(poly: Vec<f64>, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::Parse(format!("alpha must be finite and >= 0, got {alpha}")));
        }
        let s = Self { poly, alpha }.trimmed();
        s.check_cap()?;
        Ok(s)
    }

    pub fn constant(c: f64) -> Self {
        Self { poly: vec![c], alpha: 0.0 }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn x() -> Self {
        Self { poly: vec![0.0, 1.0], alpha: 0.0 }
    }

    pub fn gaussian(alpha: f64) -> Self {
        Self { poly: vec![1.0], alpha }
    }

    /// `H_n(x) e^{-x²/2}`, proportional to the Hermite function `h_n`.
    pub fn hermite_shaped(n: usize) -> Self {
        let mut prev = vec![0.0];
        let mut cur = vec![1.0];
        for k in 0..n {
            let mut next = vec![0.0; cur.len() + 1];
            for (i, c) in cur.iter().enumerate() {
                next[i + 1] += 2.0 * c;
            }
            for (i, c) in prev.iter().enumerate() {
                next[i] -= 2.0 * k as f64 * c;
            }
            prev = cur;
            cur = next;
        }
        Self { poly: cur, alpha: 0.5 }.trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.poly.len() > 1 && *self.poly.last().unwrap() == 0.0 {
            self.poly.pop();
        }
        if self.poly.is_empty() {
            self.poly.push(0.0);
        }
        self
    }

    fn check_cap(&self) -> Result<()> {
        if self.degree() > DEGREE_CAP {
            Err(Error::DegreeCap {
                degree: self.degree(),
                cap: DEGREE_CAP,
            })
        } else {
            Ok(())
        }
    }

    pub fn degree(&self) -> usize {
        self.poly.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.poly.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let p = self.poly.iter().rev().fold(0.0, |acc, &c| acc * x + c);
        if self.alpha == 0.0 {
            p
        } else {
            p * (-self.alpha * x * x).exp()
        }
    }

    /// Value of the polynomial part only.
    pub fn eval_poly(&self, x: f64) -> f64 {
        self.poly.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// `d/dx [p e^{-αx²}] = (p' - 2αx p) e^{-αx²}`.
    pub fn derivative(&self) -> Self {
        let n = self.poly.len();
        let mut out = vec![0.0; n + 1];
        for i in 1..n {
            out[i - 1] += i as f64 * self.poly[i];
        }
        if self.alpha != 0.0 {
            for i in 0..n {
                out[i + 1] -= 2.0 * self.alpha * self.poly[i];
            }
        }
        Self { poly: out, alpha: self.alpha }.trimmed()
    }

    pub fn derive(&self, order: usize) -> Result<Self> {
        let mut s = self.clone();
        for _ in 0..order {
            s = s.derivative();
            s.check_cap()?;
        }
        Ok(s)
    }

    pub fn mul_x(&self) -> Self {
        let mut poly = vec![0.0];
        poly.extend_from_slice(&self.poly);
        Self { poly, alpha: self.alpha }.trimmed()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            poly: self.poly.iter().map(|v| v * c).collect(),
            alpha: self.alpha,
        }
        .trimmed()
    }

    /// Exact product; Gaussian decays add.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut poly = vec![0.0; self.poly.len() + other.poly.len() - 1];
        for (i, a) in self.poly.iter().enumerate() {
            for (j, b) in other.poly.iter().enumerate() {
                poly[i + j] += a * b;
            }
        }
        let s = Self {
            poly,
            alpha: self.alpha + other.alpha,
        }
        .trimmed();
        s.check_cap()?;
        Ok(s)
    }

    /// Sum of two symbols sharing the same Gaussian decay. A zero operand is
    /// accepted regardless of its decay.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.alpha != other.alpha {
            return Err(Error::AlphaMismatch(self.alpha, other.alpha));
        }
        let n = self.poly.len().max(other.poly.len());
        let poly = (0..n)
            .map(|i| self.poly.get(i).copied().unwrap_or(0.0) + other.poly.get(i).copied().unwrap_or(0.0))
            .collect();
        Ok(Self { poly, alpha: self.alpha }.trimmed())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// Multiply by `e^{-a x²}`.
    pub fn with_extra_alpha(&self, a: f64) -> Self {
        Self {
            poly: self.poly.clone(),
            alpha: self.alpha + a,
        }
    }

    /// Largest coefficient difference, for symbols with equal decay.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        let n = self.poly.len().max(other.poly.len());
        (0..n)
            .map(|i| (self.poly.get(i).copied().unwrap_or(0.0) - other.poly.get(i).copied().unwrap_or(0.0)).abs())
            .fold(0.0, f64::max)
    }

    /// `sup_x |f(x)|`, located by sampling and refined by golden-section search.
    /// Returns infinity for unbounded symbols.
    pub fn sup_norm(&self) -> f64 {
        if self.alpha == 0.0 {
            return if self.degree() == 0 { self.poly[0].abs() } else { f64::INFINITY };
        }
        // Beyond this radius the Gaussian has beaten the polynomial.
        let radius = 4.0 + ((self.degree() as f64 + 40.0) / self.alpha).sqrt();
        let steps = 4000;
        let h = 2.0 * radius / steps as f64;
        let g = |x: f64| self.eval(x).abs();
        let mut best = 0.0f64;
        let samples: Vec<f64> = (0..=steps).map(|i| g(-radius + i as f64 * h)).collect();
        for i in 0..=steps {
            let left = if i == 0 { 0.0 } else { samples[i - 1] };
            let right = if i == steps { 0.0 } else { samples[i + 1] };
            if samples[i] >= left && samples[i] >= right {
                let x = -radius + i as f64 * h;
                best = best.max(golden_max(&g, x - h, x + h));
            }
        }
        best
    }
}

fn golden_max<F: Fn(f64) -> f64>(g: &F, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..80 {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
    }
    gc.max(gd).max(g(0.5 * (a + b)))
}

impl fmt::Display for Symbol1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "poly:")?;
        for c in &self.poly {
            write!(f, " {c}")?;
        }
        write!(f, "; alpha: {}", self.alpha)
    }
}

impl FromStr for Symbol1D {
    type Err = Error;

    /// `poly: c0 c1 ...; alpha: a` (alpha optional, default 0).
    fn from_str(s: &str) -> Result<Self> {
        let mut poly = None;
        let mut alpha = 0.0;
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, val) = part
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected `key: value`, got `{part}`")))?;
            match key.trim() {
                "poly" => {
                    let cs = val
                        .split_whitespace()
                        .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("coefficient `{t}`: {e}"))))
                        .collect::<Result<Vec<_>>>()?;
                    if cs.is_empty() {
                        return Err(Error::Parse("empty polynomial".into()));
                    }
                    poly = Some(cs);
                }
                "alpha" => {
                    alpha = val
                        .trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("alpha `{}`: {e}", val.trim())))?;
                }
                other => return Err(Error::Parse(format!("unknown key `{other}`"))),
            }
        }
        let poly = poly.ok_or_else(|| Error::Parse("missing `poly`".into()))?;
        Symbol1D::new(poly, alpha)
    }
}

/// Central five-point finite differences for callables that are not in the
/// symbol class. Step `1e-4` by default.
pub mod finite_diff {
    pub const STEP: f64 = 1e-4;

    pub fn first<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64) -> f64 {
        (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
    }

    pub fn second<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64) -> f64 {
        (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h * h)
    }
}

/// Two-variable symbol `Σ c_{ij} x^i ξ^j · e^{-α_x x² - α_ξ ξ²}`.
///
/// The Gaussian may be anisotropic: the affine pullbacks used for Weyl symbols
/// stretch the two axes differently.
#[derive(Debug, Clone, PartialEq)]
pub struct Symbol2D {
    pub terms: BTreeMap<(u32, u32), Complex64>,
    pub alpha_x: f64,
    pub alpha_xi: f64,
}

impl Symbol2D {
    pub fn new(terms: BTreeMap<(u32, u32), Complex64>, alpha_x: f64, alpha_xi: f64) -> Result<Self> {
        for a in [alpha_x, alpha_xi] {
            if !(a >= 0.0 && a.is_finite()) {
                return Err(Error::Parse(format!("alpha must be finite and >= 0, got {a}")));
            }
        }
        let s = Self {
            terms,
            alpha_x,
            alpha_xi,
        }
        .pruned();
        s.check_cap()?;
        Ok(s)
    }

    pub fn from_real(terms: &[((u32, u32), f64)], alpha: f64) -> Result<Self> {
        let map = terms.iter().map(|&(k, c)| (k, Complex64::new(c, 0.0))).collect();
        Self::new(map, alpha, alpha)
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial(0, 0, Complex64::new(c, 0.0))
    }

    pub fn monomial(i: u32, j: u32, c: Complex64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((i, j), c);
        Self {
            terms,
            alpha_x: 0.0,
            alpha_xi: 0.0,
        }
        .pruned()
    }

    pub fn x() -> Self {
        Self::monomial(1, 0, Complex64::new(1.0, 0.0))
    }

    pub fn xi() -> Self {
        Self::monomial(0, 1, Complex64::new(1.0, 0.0))
    }

    /// `e^{-α(x² + ξ²)}`.
    pub fn gaussian(alpha: f64) -> Self {
        let mut s = Self::constant(1.0);
        s.alpha_x = alpha;
        s.alpha_xi = alpha;
        s
    }

    fn pruned(mut self) -> Self {
        self.terms.retain(|_, c| *c != C0);
        self
    }

    fn check_cap(&self) -> Result<()> {
        let d = self.max_degree();
        if d > DEGREE_CAP {
            Err(Error::DegreeCap { degree: d, cap: DEGREE_CAP })
        } else {
            Ok(())
        }
    }

    /// Largest per-variable degree.
    pub fn max_degree(&self) -> usize {
        self.terms.keys().map(|&(i, j)| i.max(j) as usize).max().unwrap_or(0)
    }

    pub fn degree_x(&self) -> usize {
        self.terms.keys().map(|&(i, _)| i as usize).max().unwrap_or(0)
    }

    pub fn degree_xi(&self) -> usize {
        self.terms.keys().map(|&(_, j)| j as usize).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_isotropic(&self) -> bool {
        self.alpha_x == self.alpha_xi
    }

    pub fn coeff(&self, i: u32, j: u32) -> Complex64 {
        self.terms.get(&(i, j)).copied().unwrap_or(C0)
    }

    pub fn eval(&self, x: f64, xi: f64) -> Complex64 {
        self.eval_poly(x, xi) * (-self.alpha_x * x * x - self.alpha_xi * xi * xi).exp()
    }

    pub fn eval_poly(&self, x: f64, xi: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(&(i, j), &c)| c * x.powi(i as i32) * xi.powi(j as i32))
            .sum()
    }

    /// Value at a complex point `z = x + iξ`.
    pub fn eval_z(&self, z: Complex64) -> Complex64 {
        self.eval(z.re, z.im)
    }

    pub fn d_x(&self) -> Self {
        let mut terms: BTreeMap<(u32, u32), Complex64> = BTreeMap::new();
        for (&(i, j), &c) in &self.terms {
            if i > 0 {
                *terms.entry((i - 1, j)).or_insert(C0) += c * i as f64;
            }
            if self.alpha_x != 0.0 {
                *terms.entry((i + 1, j)).or_insert(C0) -= c * 2.0 * self.alpha_x;
            }
        }
        Self {
            terms,
            alpha_x: self.alpha_x,
            alpha_xi: self.alpha_xi,
        }
        .pruned()
    }

    pub fn d_xi(&self) -> Self {
        let mut terms: BTreeMap<(u32, u32), Complex64> = BTreeMap::new();
        for (&(i, j), &c) in &self.terms {
            if j > 0 {
                *terms.entry((i, j - 1)).or_insert(C0) += c * j as f64;
            }
            if self.alpha_xi != 0.0 {
                *terms.entry((i, j + 1)).or_insert(C0) -= c * 2.0 * self.alpha_xi;
            }
        }
        Self {
            terms,
            alpha_x: self.alpha_x,
            alpha_xi: self.alpha_xi,
        }
        .pruned()
    }

    /// `∂_x^i ∂_ξ^j`.
    pub fn derive(&self, i: usize, j: usize) -> Result<Self> {
        let mut s = self.clone();
        for _ in 0..i {
            s = s.d_x();
        }
        for _ in 0..j {
            s = s.d_xi();
        }
        s.check_cap()?;
        Ok(s)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            terms: self.terms.iter().map(|(&k, &v)| (k, v * c)).collect(),
            alpha_x: self.alpha_x,
            alpha_xi: self.alpha_xi,
        }
        .pruned()
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn conj(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(&k, v)| (k, v.conj())).collect(),
            alpha_x: self.alpha_x,
            alpha_xi: self.alpha_xi,
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut terms: BTreeMap<(u32, u32), Complex64> = BTreeMap::new();
        for (&(i, j), &a) in &self.terms {
            for (&(k, l), &b) in &other.terms {
                *terms.entry((i + k, j + l)).or_insert(C0) += a * b;
            }
        }
        let s = Self {
            terms,
            alpha_x: self.alpha_x + other.alpha_x,
            alpha_xi: self.alpha_xi + other.alpha_xi,
        }
        .pruned();
        s.check_cap()?;
        Ok(s)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.alpha_x != other.alpha_x {
            return Err(Error::AlphaMismatch(self.alpha_x, other.alpha_x));
        }
        if self.alpha_xi != other.alpha_xi {
            return Err(Error::AlphaMismatch(self.alpha_xi, other.alpha_xi));
        }
        let mut terms = self.terms.clone();
        for (&k, &v) in &other.terms {
            *terms.entry(k).or_insert(C0) += v;
        }
        Ok(Self {
            terms,
            alpha_x: self.alpha_x,
            alpha_xi: self.alpha_xi,
        }
        .pruned())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale_re(-1.0))
    }

    /// `Δ = ∂_x² + ∂_ξ²`.
    pub fn laplacian(&self) -> Result<Self> {
        self.derive(2, 0)?.add(&self.derive(0, 2)?)
    }

    /// Heat semigroup `e^{tΔ}` in closed form.
    ///
    /// Each axis is convolved with the 1D heat kernel. For
    /// `x^i e^{-a x²}` this gives, with `s = 1 + 4ta`,
    ///
    /// ```text
    /// s^{-1/2} e^{-a x²/s} Σ_q C(i,2q) (x/s)^{i-2q} (2q-1)!! (2t/s)^q
    /// ```
    pub fn heat_flow(&self, t: f64) -> Result<Self> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidHeatTime(t));
        }
        if t == 0.0 {
            return Ok(self.clone());
        }
        let sx = 1.0 + 4.0 * t * self.alpha_x;
        let sxi = 1.0 + 4.0 * t * self.alpha_xi;
        let prefactor = (sx * sxi).sqrt().recip();
        let axis = |deg: u32, s: f64| -> Vec<(u32, f64)> {
            let i = deg as usize;
            (0..=i / 2)
                .map(|q| {
                    let c = binomial(i, 2 * q)
                        * s.powi(-((i - 2 * q) as i32))
                        * double_factorial_odd(q)
                        * (2.0 * t / s).powi(q as i32);
                    ((i - 2 * q) as u32, c)
                })
                .collect()
        };
        let mut terms: BTreeMap<(u32, u32), Complex64> = BTreeMap::new();
        for (&(i, j), &c) in &self.terms {
            for (pi, ci) in axis(i, sx) {
                for &(pj, cj) in &axis(j, sxi) {
                    *terms.entry((pi, pj)).or_insert(C0) += c * (ci * cj * prefactor);
                }
            }
        }
        Ok(Self {
            terms,
            alpha_x: self.alpha_x / sx,
            alpha_xi: self.alpha_xi / sxi,
        }
        .pruned())
    }

    /// Affine pullback `(x, ξ) ↦ φ(cx·x, cξ·ξ)`.
    pub fn pullback(&self, cx: f64, cxi: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(&(i, j), &c)| ((i, j), c * cx.powi(i as i32) * cxi.powi(j as i32)))
                .collect(),
            alpha_x: self.alpha_x * cx * cx,
            alpha_xi: self.alpha_xi * cxi * cxi,
        }
        .pruned()
    }

    /// Largest coefficient difference (decays must match).
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        let mut keys: Vec<_> = self.terms.keys().chain(other.terms.keys()).copied().collect();
        keys.sort();
        keys.dedup();
        keys.iter()
            .map(|&(i, j)| (self.coeff(i, j) - other.coeff(i, j)).norm())
            .fold(0.0, f64::max)
    }

    /// Restrict to a function of `x` alone at fixed momentum power `j`:
    /// returns the coefficient polynomial of `ξ^j` (complex, ascending in x).
    pub fn xi_slice(&self, j: u32) -> Vec<Complex64> {
        let deg = self.degree_x();
        let mut out = vec![C0; deg + 1];
        for (&(i, jj), &c) in &self.terms {
            if jj == j {
                out[i as usize] += c;
            }
        }
        out
    }

    /// Coefficients in `z^a z̄^b` where `z = x + iξ`.
    pub fn to_holomorphic_coords(&self) -> BTreeMap<(u32, u32), Complex64> {
        // x = (z + z̄)/2, ξ = (z - z̄)/(2i)
        let i_unit = Complex64::new(0.0, 1.0);
        let mut out: BTreeMap<(u32, u32), Complex64> = BTreeMap::new();
        for (&(p, q), &c) in &self.terms {
            let (p, q) = (p as usize, q as usize);
            let scale = c * Complex64::new(0.5f64.powi(p as i32), 0.0) * (2.0 * i_unit).powi(-(q as i32));
            for k in 0..=p {
                for l in 0..=q {
                    let sign = if (q - l) % 2 == 0 { 1.0 } else { -1.0 };
                    let v = scale * (binomial(p, k) * binomial(q, l) * sign);
                    let a = (k + l) as u32;
                    let b = (p - k + q - l) as u32;
                    *out.entry((a, b)).or_insert(C0) += v;
                }
            }
        }
        out.retain(|_, v| *v != C0);
        out
    }
}

/// Poisson bracket `{φ, ψ} = ∂_ξφ ∂_xψ - ∂_xφ ∂_ξψ`.
pub fn poisson_bracket(phi: &Symbol2D, psi: &Symbol2D) -> Result<Symbol2D> {
    let a = phi.d_xi().mul(&psi.d_x())?;
    let b = phi.d_x().mul(&psi.d_xi())?;
    a.sub(&b)
}

fn format_complex(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        format!("{}i", c.im)
    } else if c.im < 0.0 || c.im.is_sign_negative() {
        format!("{}{}i", c.re, c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

fn parse_complex(t: &str) -> Result<Complex64> {
    let err = |e: String| Error::Parse(format!("coefficient `{t}`: {e}"));
    if let Some(body) = t.strip_suffix('i') {
        // Find the split between real and imaginary parts: last sign that is
        // not leading and does not follow an exponent marker.
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
                split = Some(k);
                break;
            }
        }
        let (re, im) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => "1",
            "-" => "-1",
            s => s,
        };
        let re: f64 = re.parse().map_err(|e: std::num::ParseFloatError| err(e.to_string()))?;
        let im: f64 = im.parse().map_err(|e: std::num::ParseFloatError| err(e.to_string()))?;
        Ok(Complex64::new(re, im))
    } else {
        t.parse::<f64>()
            .map(|v| Complex64::new(v, 0.0))
            .map_err(|e| err(e.to_string()))
    }
}

impl fmt::Display for Symbol2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "terms:")?;
        if self.terms.is_empty() {
            write!(f, " 0,0:0")?;
        }
        for (&(i, j), &c) in &self.terms {
            write!(f, " {i},{j}:{}", format_complex(c))?;
        }
        if self.is_isotropic() {
            write!(f, "; alpha: {}", self.alpha_x)
        } else {
            write!(f, "; alpha: {} {}", self.alpha_x, self.alpha_xi)
        }
    }
}

impl FromStr for Symbol2D {
    type Err = Error;

    /// `terms: i,j:c ...; alpha: a [b]`. Coefficients may be complex
    /// (`1.5`, `2i`, `1-0.5i`).
    fn from_str(s: &str) -> Result<Self> {
        let mut terms: Option<BTreeMap<(u32, u32), Complex64>> = None;
        let (mut ax, mut axi) = (0.0, 0.0);
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, val) = part
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected `key: value`, got `{part}`")))?;
            match key.trim() {
                "terms" => {
                    let mut map = BTreeMap::new();
                    for tok in val.split_whitespace() {
                        let (idx, c) = tok
                            .split_once(':')
                            .ok_or_else(|| Error::Parse(format!("term `{tok}` must be `i,j:c`")))?;
                        let (i, j) = idx
                            .split_once(',')
                            .ok_or_else(|| Error::Parse(format!("term index `{idx}` must be `i,j`")))?;
                        let i: u32 = i.parse().map_err(|e| Error::Parse(format!("index `{i}`: {e}")))?;
                        let j: u32 = j.parse().map_err(|e| Error::Parse(format!("index `{j}`: {e}")))?;
                        *map.entry((i, j)).or_insert(C0) += parse_complex(c)?;
                    }
                    terms = Some(map);
                }
                "alpha" => {
                    let vals = val
                        .split_whitespace()
                        .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("alpha `{t}`: {e}"))))
                        .collect::<Result<Vec<_>>>()?;
                    match vals.as_slice() {
                        [a] => {
                            ax = *a;
                            axi = *a;
                        }
                        [a, b] => {
                            ax = *a;
                            axi = *b;
                        }
                        _ => return Err(Error::Parse("alpha takes one or two values".into())),
                    }
                }
                other => return Err(Error::Parse(format!("unknown key `{other}`"))),
            }
        }
        let terms = terms.ok_or_else(|| Error::Parse("missing `terms`".into()))?;
        Symbol2D::new(terms, ax, axi)
    }
}

impl Serialize for Symbol2D {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Symbol2D {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn derivative_examples() {
        let s = Symbol1D::new(vec![0.0, 1.0], 1.0).unwrap().derivative();
        assert_eq!(s, Symbol1D::new(vec![1.0, 0.0, -2.0], 1.0).unwrap());
        let cube = Symbol1D::new(vec![0.0, 0.0, 0.0, 1.0], 0.0).unwrap();
        assert_eq!(cube.derive(2).unwrap(), Symbol1D::new(vec![0.0, 6.0], 0.0).unwrap());
        let x2xi = Symbol2D::monomial(2, 1, c(1.0));
        assert_eq!(x2xi.d_xi(), Symbol2D::monomial(2, 0, c(1.0)));
    }

    #[test]
    fn product_examples() {
        let x = Symbol1D::x();
        assert_eq!(x.mul(&x).unwrap().poly, vec![0.0, 0.0, 1.0]);
        let g = Symbol1D::gaussian(1.0);
        assert_eq!(g.mul(&g).unwrap(), Symbol1D::gaussian(2.0));
        let a = Symbol1D::new(vec![1.0, 1.0], 0.0).unwrap();
        let b = Symbol1D::new(vec![1.0, -1.0], 0.0).unwrap();
        assert_eq!(a.mul(&b).unwrap().poly, vec![1.0, 0.0, -1.0]);
    }

    #[test]
    fn add_requires_matching_decay() {
        let a = Symbol1D::gaussian(1.0);
        let b = Symbol1D::gaussian(0.5);
        assert!(matches!(a.add(&b), Err(Error::AlphaMismatch(..))));
        assert_eq!(a.add(&Symbol1D::zero()).unwrap(), a);
    }

    #[test]
    fn degree_cap_enforced() {
        let p = Symbol1D::new(vec![0.0; 40].into_iter().chain([1.0]).collect(), 0.0).unwrap();
        assert!(matches!(p.mul(&p), Err(Error::DegreeCap { .. })));
    }

    #[test]
    fn hermite_shaped_coefficients() {
        assert_eq!(Symbol1D::hermite_shaped(2).poly, vec![-2.0, 0.0, 4.0]);
        assert_eq!(Symbol1D::hermite_shaped(3).poly, vec![0.0, -12.0, 0.0, 8.0]);
    }

    #[test]
    fn sup_norms() {
        assert_relative_eq!(Symbol1D::gaussian(1.0).sup_norm(), 1.0, max_relative = 1e-15);
        let xg = Symbol1D::new(vec![0.0, 1.0], 1.0).unwrap();
        assert_relative_eq!(xg.sup_norm(), (2.0 * std::f64::consts::E).sqrt().recip(), max_relative = 1e-14);
        let f = Symbol1D::new(vec![1.0, 0.0, -1.0], 0.5).unwrap();
        assert_relative_eq!(f.sup_norm(), 1.0, max_relative = 1e-15);
        assert!(Symbol1D::x().sup_norm().is_infinite());
    }

    #[test]
    fn finite_differences_track_exact_derivatives() {
        let f = Symbol1D::new(vec![0.3, -1.0, 0.5], 0.7).unwrap();
        let d1 = f.derivative();
        let d2 = d1.derivative();
        let g = |x: f64| f.eval(x);
        for &x in &[-1.3, 0.0, 0.4, 2.1] {
            assert!((finite_diff::first(&g, x, finite_diff::STEP) - d1.eval(x)).abs() < 1e-10);
            assert!((finite_diff::second(&g, x, finite_diff::STEP) - d2.eval(x)).abs() < 1e-6);
        }
    }

    #[test]
    fn poisson_examples() {
        let x = Symbol2D::x();
        let xi = Symbol2D::xi();
        assert_eq!(poisson_bracket(&x, &xi).unwrap(), Symbol2D::constant(-1.0));
        let phi = Symbol2D::from_real(&[((2, 1), 1.0), ((0, 3), -2.0)], 0.5).unwrap();
        assert!(poisson_bracket(&phi, &phi).unwrap().is_zero());
        let x2 = Symbol2D::monomial(2, 0, c(1.0));
        assert_eq!(poisson_bracket(&x2, &xi).unwrap(), Symbol2D::monomial(1, 0, c(-2.0)));
    }

    #[test]
    fn heat_flow_examples() {
        let one = Symbol2D::constant(1.0);
        assert_eq!(one.heat_flow(0.3).unwrap(), one);
        let r2 = Symbol2D::from_real(&[((2, 0), 1.0), ((0, 2), 1.0)], 0.0).unwrap();
        let t = 0.37;
        let expect = Symbol2D::from_real(&[((2, 0), 1.0), ((0, 2), 1.0), ((0, 0), 4.0 * t)], 0.0).unwrap();
        assert!(r2.heat_flow(t).unwrap().max_coeff_diff(&expect) < 1e-15);
        let g = Symbol2D::gaussian(1.0).heat_flow(0.125).unwrap();
        assert_relative_eq!(g.coeff(0, 0).re, 2.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(g.alpha_x, 2.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(g.alpha_xi, 2.0 / 3.0, max_relative = 1e-15);
        assert!(one.heat_flow(-1.0).is_err());
    }

    #[test]
    fn heat_flow_matches_taylor_series_on_polynomials() {
        let phi = Symbol2D::from_real(&[((4, 1), 0.5), ((2, 2), -1.0), ((0, 3), 2.0), ((1, 0), 3.0)], 0.0).unwrap();
        let t: f64 = 0.21;
        let mut series = Symbol2D::constant(0.0);
        let mut term = phi.clone();
        let mut fact = 1.0;
        for k in 0..6 {
            if k > 0 {
                fact *= k as f64;
                term = term.laplacian().unwrap();
            }
            series = series.add(&term.scale_re(t.powi(k) / fact)).unwrap();
        }
        assert!(phi.heat_flow(t).unwrap().max_coeff_diff(&series) < 1e-13);
    }

    #[test]
    fn heat_flow_matches_convolution_quadrature() {
        // Gaussian-weighted convolution by tensor Gauss–Hermite, 20 sample points.
        let rule = crate::quadrature::gauss_hermite_rule(30).unwrap();
        let phi = Symbol2D::from_real(&[((3, 0), 1.0), ((1, 2), -0.5), ((0, 1), 2.0), ((0, 0), 0.25)], 0.0).unwrap();
        for &t in &[0.01, 0.1] {
            let flowed = phi.heat_flow(t).unwrap();
            let sd = (4.0 * t).sqrt();
            for k in 0..20 {
                let x = -2.0 + 0.21 * k as f64;
                let xi = 1.5 - 0.17 * k as f64;
                let mut acc = C0;
                for (a, wa) in rule.nodes.iter().zip(&rule.weights) {
                    for (b, wb) in rule.nodes.iter().zip(&rule.weights) {
                        acc += phi.eval(x - sd * a, xi - sd * b) * (wa * wb);
                    }
                }
                acc /= std::f64::consts::PI;
                let v = flowed.eval(x, xi);
                assert!((acc - v).norm() <= 1e-8 * v.norm().max(1.0), "t={t} k={k}");
            }
        }
    }

    #[test]
    fn parse_and_print() {
        let s: Symbol1D = "poly: 1 0 -1; alpha: 0.5".parse().unwrap();
        assert_eq!(s, Symbol1D::new(vec![1.0, 0.0, -1.0], 0.5).unwrap());
        assert_eq!(s.to_string().parse::<Symbol1D>().unwrap(), s);
        let t: Symbol2D = "terms: 2,0:1 0,2:1 1,1:0.5-2i; alpha: 1 0.25".parse().unwrap();
        assert_eq!(t.coeff(1, 1), Complex64::new(0.5, -2.0));
        assert_eq!(t.alpha_xi, 0.25);
        assert_eq!(t.to_string().parse::<Symbol2D>().unwrap(), t);
        assert!("poly: ; alpha: 1".parse::<Symbol1D>().is_err());
        assert!("poly: 1; beta: 2".parse::<Symbol1D>().is_err());
        assert!("terms: 1:2".parse::<Symbol2D>().is_err());
        assert_eq!(parse_complex("-3i").unwrap(), Complex64::new(0.0, -3.0));
        assert_eq!(parse_complex("1e-3+2e-1i").unwrap(), Complex64::new(1e-3, 0.2));
    }

    #[test]
    fn holomorphic_coordinates() {
        // x = (z + z̄)/2
        let h = Symbol2D::x().to_holomorphic_coords();
        assert_eq!(h.get(&(1, 0)), Some(&c(0.5)));
        assert_eq!(h.get(&(0, 1)), Some(&c(0.5)));
        // x² + ξ² = z z̄
        let r2 = Symbol2D::from_real(&[((2, 0), 1.0), ((0, 2), 1.0)], 0.0).unwrap().to_holomorphic_coords();
        assert!((r2[&(1, 1)] - c(1.0)).norm() < 1e-15);
        assert!(r2.get(&(2, 0)).is_none_or(|v| v.norm() < 1e-15));
    }
}
