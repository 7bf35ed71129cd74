//! Individual checks. Each returns one or more [`Record`]s and never panics
//! on numerical failure: errors become `FAIL` records.

use std::f64::consts::PI;

use mehler::asymptotics::{residual_slope, ExperimentDescriptor, ResidualSettings, SlopeReport, MIN_R_SQUARED};
use mehler::fock::{
    beta_kernel, beta_series, complex_norm, complex_orthogonality, correspondence_experiment, fock_toeplitz_matrix,
    star_product, u_factorization_error, weyl_matrix, weyl_symbol_integral, weyl_symbol_of_toeplitz, FockQuadrature,
    Window,
};
use mehler::hermite::{hermite_fn_batch_complex, hermite_poly_batch, ln_factorials, ln_fn_bound, ln_growth_bound};
use mehler::kernels::{kernel_gram, CoefficientVector, KernelEval, KernelVariant};
use mehler::operators::{
    c_epsilon, factored_norm_bound, gram_matrix_fn, operator_norm, synthesize, toeplitz_apply_grid,
    toeplitz_factored_apply, toeplitz_tilde_matrix, GridFunction, Variant,
};
use mehler::quadrature::gauss_hermite_rule;
use mehler::{Error, Symbol1D, Symbol2D};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::report::Record;

pub mod anchor {
    pub const MEHLER: &str = "mehler-identity";
    pub const REPRODUCING: &str = "reproducing-property";
    pub const POSITIVITY: &str = "kernel-positivity";
    pub const ORTHOGONALITY: &str = "hermite-orthogonality";
    pub const GROWTH: &str = "hermite-growth-estimate";
    pub const FN_GROWTH: &str = "hermite-function-estimate";
    pub const EVALUATION: &str = "evaluation-bound";
    pub const SPECTRAL: &str = "spectral-identity";
    pub const REALIZATIONS: &str = "grid-matrix-agreement";
    pub const CONTRACTION: &str = "tilde-norm-bound";
    pub const FACTORED: &str = "factored-norm-bound";
    pub const SEMICLASSICAL: &str = "semiclassical-order";
    pub const COMPLEX_ORTHOGONALITY: &str = "complex-orthogonality";
    pub const FOCK_BASIS: &str = "fock-basis-orthonormality";
    pub const BETA: &str = "bargmann-kernel";
    pub const WEYL_INTEGRAL: &str = "weyl-symbol-integral-form";
    pub const TOEPLITZ_WEYL: &str = "toeplitz-weyl-identity";
    pub const STAR: &str = "star-product";
    pub const CORRESPONDENCE: &str = "correspondence-principle";
    pub const FACTORIZATION: &str = "bargmann-factorization";
}

/// Uniform `[-3, 3]` grid with 21 points.
fn grid21() -> Vec<f64> {
    (0..21).map(|i| -3.0 + 0.3 * i as f64).collect()
}

fn ch(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Series length whose omitted tail is below `1e-13` on `[-3, 3]²`, using
/// `|h_n| ≤ π^{-1/4}` (and `|p_n(x)| ≤ π^{-1/4} e^{x²/2}`).
pub fn mehler_series_length(eps: f64, variant: KernelVariant) -> usize {
    let ln_scale = match variant {
        KernelVariant::KTilde => 0.0,
        _ => 9.0,
    };
    // ε^{N+1}/(1-ε) π^{-1/2} e^{ln_scale} ≤ 1e-13
    let need = ((1e-13f64).ln() + (1.0 - eps).ln() + 0.5 * PI.ln() - ln_scale) / eps.ln();
    (need.ceil().max(0.0) as usize).max(300)
}

/// Largest `|series − closed| / (1 + |closed|)` over the 21×21 grid.
pub fn mehler_identity(eps: f64, variant: KernelVariant, n_series: Option<usize>) -> Record {
    let n = n_series.unwrap_or_else(|| mehler_series_length(eps, variant));
    let id = format!("kernels.mehler.{variant:?}.eps={eps}");
    let inputs = format!("eps={eps}; variant={variant:?}; N={n}; grid=21x21 on [-3,3]^2");
    let k = match KernelEval::new(eps, variant) {
        Ok(k) => k,
        Err(e) => return Record::error(id, anchor::MEHLER, inputs, e),
    };
    let g = grid21();
    let mut worst = 0.0f64;
    for &x in &g {
        for &y in &g {
            let closed = k.mehler_closed(ch(x), ch(y));
            let series = k.kernel_series(ch(x), ch(y), n).value;
            worst = worst.max((series - closed).norm() / (1.0 + closed.norm()));
        }
    }
    Record::check(id, anchor::MEHLER, inputs, worst, 0.0, 1e-9)
}

/// `⟨K(·,x), K(·,y)⟩ = K(x, y)` through coefficient inner products.
pub fn reproducing_property(eps: f64) -> Record {
    let n = mehler_series_length(eps, KernelVariant::K);
    let id = format!("kernels.reproducing.eps={eps}");
    let inputs = format!("eps={eps}; N={n}; points=7 on [-2.4,2.4]");
    let run = || -> mehler::Result<f64> {
        let k = KernelEval::new(eps, KernelVariant::K)?;
        let pts: Vec<f64> = (0..7).map(|i| -2.4 + 0.8 * i as f64).collect();
        let mut worst = 0.0f64;
        for &x in &pts {
            let kx = CoefficientVector::kernel_section(eps, x, n)?;
            for &y in &pts {
                let ky = CoefficientVector::kernel_section(eps, y, n)?;
                let closed = k.value_real(x, y);
                worst = worst.max((kx.inner(&ky)? - closed).abs() / (1.0 + closed.abs()));
            }
        }
        Ok(worst)
    };
    match run() {
        Ok(w) => Record::check(id, anchor::REPRODUCING, inputs, w, 0.0, 1e-9),
        Err(e) => Record::error(id, anchor::REPRODUCING, inputs, e),
    }
}

/// Smallest eigenvalue of the kernel Gram matrix relative to the largest,
/// clipped at zero from above: positive semidefiniteness.
pub fn kernel_positivity(eps: f64) -> Record {
    let id = format!("kernels.positivity.eps={eps}");
    let inputs = format!("eps={eps}; points=15 on [-3,3]");
    let k = match KernelEval::new(eps, KernelVariant::K) {
        Ok(k) => k,
        Err(e) => return Record::error(id, anchor::POSITIVITY, inputs, e),
    };
    let pts: Vec<f64> = (0..15).map(|i| -3.0 + 6.0 * i as f64 / 14.0).collect();
    let ev = kernel_gram(&k, &pts).symmetric_eigenvalues();
    let max = ev.max();
    let min = ev.min();
    let violation = (-min / max).max(0.0);
    Record::check(id, anchor::POSITIVITY, inputs, violation, 0.0, 1e-10)
}

/// `∫ H_n H_m e^{-x²} = 2^n n! √π δ_{nm}` by Gauss–Hermite, relative on the
/// diagonal and scaled by `√(d_n d_m)` off it.
pub fn hermite_orthogonality(n_max: usize, order: usize) -> Record {
    let id = format!("kernels.orthogonality.n<={n_max}");
    let inputs = format!("n,m<={n_max}; order={order}");
    let rule = match gauss_hermite_rule(order) {
        Ok(r) => r,
        Err(e) => return Record::error(id, anchor::ORTHOGONALITY, inputs, e),
    };
    let lf = ln_factorials(n_max);
    let ln_d: Vec<f64> = (0..=n_max)
        .map(|n| n as f64 * std::f64::consts::LN_2 + lf[n] + 0.5 * PI.ln())
        .collect();
    // Normalize by √d_n inside the sum so that large n do not overflow.
    let vals: Vec<Vec<f64>> = rule
        .nodes
        .iter()
        .map(|&x| {
            let h = hermite_poly_batch(n_max, x);
            h.values
                .iter()
                .zip(&ln_d)
                .map(|(v, l)| v.mantissa.re * (v.exp2 as f64 * std::f64::consts::LN_2 - 0.5 * l).exp())
                .collect()
        })
        .collect();
    let mut worst = 0.0f64;
    for n in 0..=n_max {
        for m in 0..=n {
            let g: f64 = vals.iter().zip(&rule.weights).map(|(v, w)| w * v[n] * v[m]).sum();
            let target = if n == m { 1.0 } else { 0.0 };
            worst = worst.max((g - target).abs());
        }
    }
    Record::check(id, anchor::ORTHOGONALITY, inputs, worst, 0.0, 1e-8)
}

/// Both estimates are equalities at `n = 0`; logs are compared up to roundoff.
const LN_ROUNDOFF: f64 = 1e-12;

/// Violations of `|H_n(z)| ≤ √(n! 2^n) e^{√(2n)|z|}` and
/// `|h_n(z)| ≤ π^{-1/4} e^{√(2n)|z| - Re(z²)/2}` on random `(n, z)`.
pub fn growth_estimates(seed: u64, samples: usize) -> Vec<Record> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6872_6f77);
    let lf = ln_factorials(60);
    let mut poly_viol = 0usize;
    let mut fn_viol = 0usize;
    for _ in 0..samples {
        let n = rng.gen_range(0..=60usize);
        let r = 4.0 * rng.gen::<f64>().sqrt();
        let t = rng.gen_range(0.0..2.0 * PI);
        let z = Complex64::from_polar(r, t);
        let h = hermite_poly_batch(n, z);
        if h.values[n].ln_abs() > ln_growth_bound(n, lf[n], z.norm()) + LN_ROUNDOFF {
            poly_viol += 1;
        }
        let hf = hermite_fn_batch_complex(n, z)[n];
        if hf.norm() > 0.0 && hf.norm().ln() > ln_fn_bound(n, z) + LN_ROUNDOFF {
            fn_viol += 1;
        }
    }
    let inputs = format!("seed={seed}; samples={samples}; n<=60; |z|<=4");
    vec![
        Record::check(
            "kernels.estimates.hermite_growth",
            anchor::GROWTH,
            inputs.clone(),
            poly_viol as f64,
            0.0,
            0.0,
        ),
        Record::check(
            "kernels.estimates.hermite_function_growth",
            anchor::FN_GROWTH,
            inputs,
            fn_viol as f64,
            0.0,
            0.0,
        ),
    ]
}

/// Cauchy–Schwarz evaluation bound for random finite coefficient vectors.
pub fn evaluation_bound(eps: f64, seed: u64, vectors: usize, points: usize) -> Record {
    let id = format!("kernels.estimates.evaluation_bound.eps={eps}");
    let inputs = format!("eps={eps}; seed={seed}; vectors={vectors}; points={points}; |z|<=4");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6576_616c);
    let mut violations = 0usize;
    for _ in 0..vectors {
        let len = rng.gen_range(1..=40usize);
        let coeffs: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = match CoefficientVector::new(eps, coeffs) {
            Ok(f) => f,
            Err(e) => return Record::error(id, anchor::EVALUATION, inputs, e),
        };
        for _ in 0..points {
            let z = Complex64::from_polar(4.0 * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..2.0 * PI));
            match f.rkhs_extend(z) {
                Ok(_) => {}
                Err(Error::BoundViolated { .. }) => violations += 1,
                Err(e) => return Record::error(id, anchor::EVALUATION, inputs, e),
            }
        }
    }
    Record::check(id, anchor::EVALUATION, inputs, violations as f64, 0.0, 0.0)
}

/// `‖T̃_f − diag(ε^n) Gram(f)‖_max`, with the Gram matrix assembled from
/// pointwise evaluation of `f`.
pub fn spectral_identity(eps: f64, name: &str, f: &Symbol1D, size: usize, order: usize) -> Record {
    let id = format!("operators.spectral_identity.{name}.eps={eps}");
    let oracle_order = order.max(2 * size + 40);
    let inputs = format!("eps={eps}; f={f}; N={size}; order={order}; oracle order={oracle_order}");
    let run = || -> mehler::Result<f64> {
        let rule = gauss_hermite_rule(order)?;
        let t = toeplitz_tilde_matrix(f, eps, size, &rule)?;
        let g = gram_matrix_fn(|x| f.eval(x), size, &gauss_hermite_rule(oracle_order)?)?;
        let mut worst = 0.0f64;
        let mut pow = 1.0;
        for i in 0..size {
            for j in 0..size {
                worst = worst.max((t.entries[(i, j)] - pow * g.entries[(i, j)]).abs());
            }
            pow *= eps;
        }
        Ok(worst)
    };
    match run() {
        Ok(w) => Record::check(id, anchor::SPECTRAL, inputs, w, 0.0, 1e-10),
        Err(e) => Record::error(id, anchor::SPECTRAL, inputs, e),
    }
}

/// Sup distance on `[-8, 8]` between the kernel integral of `T̃_f u` on a
/// uniform grid and the synthesized matrix product.
pub fn grid_vs_matrix(eps: f64, (fname, f): (&str, &Symbol1D), (uname, u): (&str, &Symbol1D), size: usize) -> Record {
    let id = format!("operators.grid_vs_matrix.{fname}.{uname}.eps={eps}");
    let inputs = format!("eps={eps}; f={f}; u={u}; N={size}; grid=2801 on [-14,14]; radius=8");
    let run = || -> mehler::Result<f64> {
        let grid = GridFunction::uniform(-14.0, 14.0, 2801, |x| u.eval(x))?;
        let direct = toeplitz_apply_grid(|x| f.eval(x), eps, &grid, Variant::TTilde)?;
        let rule = gauss_hermite_rule(size + (f.degree() + u.degree()) / 2 + 8)?;
        let t = toeplitz_tilde_matrix(f, eps, size, &rule)?;
        let c = mehler::asymptotics::symbol_coefficients(u, size, &rule)?;
        let via = GridFunction::new(grid.nodes.clone(), synthesize(&t.apply(&c), &grid.nodes), None)?;
        Ok(direct.sup_dist(&via, 8.0))
    };
    match run() {
        Ok(w) => Record::check(id, anchor::REALIZATIONS, inputs, w, 0.0, 1e-7),
        Err(e) => Record::error(id, anchor::REALIZATIONS, inputs, e),
    }
}

/// `max(0, ‖T̃_f‖ − ‖f‖_∞)` for the `N × N` matrix.
pub fn tilde_norm_bound(eps: f64, name: &str, f: &Symbol1D, size: usize, order: usize) -> Record {
    let id = format!("operators.norm_bound.tilde.{name}.eps={eps}");
    let sup = f.sup_norm();
    let inputs = format!("eps={eps}; f={f}; N={size}; sup={sup:?}");
    let run = || -> mehler::Result<f64> {
        let rule = gauss_hermite_rule(order)?;
        let t = toeplitz_tilde_matrix(f, eps, size, &rule)?;
        Ok((operator_norm(&t.entries) - sup).max(0.0))
    };
    match run() {
        Ok(w) => Record::check(id, anchor::CONTRACTION, inputs, w, 0.0, 1e-10),
        Err(e) => Record::error(id, anchor::CONTRACTION, inputs, e),
    }
}

/// Largest `‖T_f u‖ / (‖u‖ ‖f‖_∞)` over Gaussians `u` of widths 0.5–8,
/// through the factored realization. Asserted against `ε^{-1/2}`; the
/// comparison with `C_ε = (4πε)^{-1/2}` is reported.
pub fn factored_norm(eps: f64, name: &str, f: &Symbol1D) -> Vec<Record> {
    let sup = f.sup_norm();
    let widths = [0.5, 1.0, 2.0, 4.0, 8.0];
    let inputs = format!("eps={eps}; f={f}; widths={widths:?}");
    let id = format!("operators.norm_bound.factored.{name}.eps={eps}");
    let run = || -> mehler::Result<f64> {
        let r = (1.0 - eps * eps).sqrt();
        let step = 0.25 * r;
        let mut best = 0.0f64;
        for &s in &widths {
            let half = 48.0f64.max(10.0 * s);
            let points = (2.0 * half / step).round() as usize + 1;
            let u = GridFunction::uniform(-half, half, points, |x| (-x * x / (2.0 * s * s)).exp())?;
            let out_half = half / eps;
            let out_step = 0.25;
            let out_points = (2.0 * out_half / out_step).round() as usize + 1;
            let out: Vec<f64> = (0..out_points).map(|i| -out_half + out_step * i as f64).collect();
            let tu = toeplitz_factored_apply(|x| f.eval(x), eps, &u, &out)?;
            let norm_tu = (tu.values.iter().map(|v| v * v).sum::<f64>() * out_step).sqrt();
            let norm_u = (u.values.iter().map(|v| v * v).sum::<f64>() * step).sqrt();
            best = best.max(norm_tu / (norm_u * sup));
        }
        Ok(best)
    };
    match run() {
        Ok(ratio) => vec![
            Record::check(
                id.clone(),
                anchor::FACTORED,
                format!("{inputs}; bound=eps^-1/2={:?}; measured=max(0, ratio - bound)", factored_norm_bound(eps)),
                (ratio - factored_norm_bound(eps)).max(0.0),
                0.0,
                1e-8,
            ),
            Record::report(
                format!("{id}.c_epsilon"),
                anchor::FACTORED,
                format!("{inputs}; expected=C_eps=(4 pi eps)^-1/2; ratio above it means the stated constant fails"),
                ratio,
                c_epsilon(eps),
            ),
        ],
        Err(e) => vec![Record::error(id, anchor::FACTORED, inputs, e)],
    }
}

fn slope_records(id: &str, anchor: &str, inputs: &str, expected: f64, report: &SlopeReport) -> Vec<Record> {
    let residuals = format!("{inputs}; residuals={:?}", report.residual_norms);
    vec![
        Record::check(format!("{id}.slope"), anchor, residuals, report.fitted_slope, expected, 0.2),
        Record::check(
            format!("{id}.r2"),
            anchor,
            inputs.to_string(),
            report.r_squared,
            1.0,
            1.0 - MIN_R_SQUARED,
        ),
    ]
}

/// Slope and fit-quality records of one residual study.
pub fn semiclassical_slope(
    id: &str,
    exp: &ExperimentDescriptor,
    epsilons: &[f64],
    settings: &ResidualSettings,
    labels: &str,
) -> Vec<Record> {
    let inputs = format!("eps={epsilons:?}; N={}; {labels}", settings.basis_size);
    match residual_slope(exp, epsilons, settings) {
        Ok(r) => slope_records(id, anchor::SEMICLASSICAL, &inputs, exp.expected_slope(), &r),
        Err(e) => vec![Record::error(format!("{id}.slope"), anchor::SEMICLASSICAL, inputs, e)],
    }
}

/// The same study, reported without a verdict.
pub fn semiclassical_slope_report(
    id: &str,
    exp: &ExperimentDescriptor,
    epsilons: &[f64],
    settings: &ResidualSettings,
    labels: &str,
) -> Vec<Record> {
    let inputs = format!("eps={epsilons:?}; N={}; {labels}", settings.basis_size);
    match residual_slope(exp, epsilons, settings) {
        Ok(r) => vec![Record::report(
            format!("{id}.slope"),
            anchor::SEMICLASSICAL,
            format!("{inputs}; r2={:?}", r.r_squared),
            r.fitted_slope,
            exp.expected_slope(),
        )],
        Err(e) => vec![Record::error(format!("{id}.slope"), anchor::SEMICLASSICAL, inputs, e)],
    }
}

/// Complex orthogonality of `H_n` against the anisotropic Gaussian.
pub fn complex_orthogonality_check(eps: f64, n_max: usize, order: usize) -> Record {
    let id = format!("fock.complex_orthogonality.eps={eps}");
    let inputs = format!("eps={eps}; n,m<={n_max}; order={order}");
    let run = || -> mehler::Result<f64> {
        let diag: Vec<f64> = (0..=n_max)
            .map(|n| complex_orthogonality(n, n, eps, order).map(|(_, e)| e))
            .collect::<mehler::Result<_>>()?;
        let mut worst = 0.0f64;
        for n in 0..=n_max {
            for m in 0..=n {
                let (v, e) = complex_orthogonality(n, m, eps, order)?;
                let scale = (diag[n] * diag[m]).sqrt();
                worst = worst.max((v - e).norm() / scale);
            }
        }
        Ok(worst)
    };
    match run() {
        Ok(w) => Record::check(id, anchor::COMPLEX_ORTHOGONALITY, inputs, w, 0.0, 1e-8),
        Err(e) => Record::error(id, anchor::COMPLEX_ORTHOGONALITY, inputs, e),
    }
}

/// Entrywise deviation of the `E_n` Gram matrix from the identity.
pub fn fock_basis_gram(eps: f64, n_max: usize, order: usize) -> Record {
    let id = format!("fock.basis_orthonormality.eps={eps}");
    let inputs = format!("eps={eps}; n<={n_max}; order={order}");
    match FockQuadrature::new(eps, order) {
        Ok(q) => {
            let g = q.basis_gram(n_max + 1);
            let dev = (g - DMatrix::<Complex64>::identity(n_max + 1, n_max + 1)).map(|c| c.norm()).max();
            Record::check(id, anchor::FOCK_BASIS, inputs, dev, 0.0, 1e-7)
        }
        Err(e) => Record::error(id, anchor::FOCK_BASIS, inputs, e),
    }
}

/// `Σ h_n(y) E_n(z)` against the closed form at a few points.
pub fn beta_series_check(eps: f64) -> Record {
    let n = ((1e-15f64).ln() * 4.0 / eps.ln()).ceil().max(150.0) as usize;
    let id = format!("fock.beta_series.eps={eps}");
    let pts = [
        (Complex64::new(0.5, 0.3), 0.7),
        (Complex64::new(-0.8, 0.2), 0.1),
        (Complex64::new(0.0, -0.6), -1.2),
    ];
    let inputs = format!("eps={eps}; N={n}; points={pts:?}");
    let run = || -> mehler::Result<f64> {
        let mut worst = 0.0f64;
        for (z, y) in pts {
            let c = beta_kernel(eps, z, y)?;
            let s = beta_series(eps, z, y, n)?;
            worst = worst.max((c - s).norm() / (1.0 + c.norm()));
        }
        Ok(worst)
    };
    match run() {
        Ok(w) => Record::check(id, anchor::BETA, inputs, w, 0.0, 1e-9),
        Err(e) => Record::error(id, anchor::BETA, inputs, e),
    }
}

/// Affine-substitution Weyl symbol against the Gaussian integral form on a
/// 9×9 grid of `[-2, 2]²`.
pub fn weyl_integral_check(eps: f64, name: &str, phi: &Symbol2D) -> Record {
    let id = format!("fock.weyl_symbol.{name}.eps={eps}");
    let inputs = format!("eps={eps}; phi={phi}; grid=9x9 on [-2,2]^2; order=40");
    let run = || -> mehler::Result<f64> {
        let a = weyl_symbol_of_toeplitz(phi, eps)?.a;
        let mut worst = 0.0f64;
        for i in 0..9 {
            for j in 0..9 {
                let (s, e) = (-2.0 + 0.5 * i as f64, -2.0 + 0.5 * j as f64);
                let oracle = weyl_symbol_integral(phi, eps, s, e, 40)?;
                worst = worst.max((a.eval(s, e) - oracle).norm());
            }
        }
        Ok(worst)
    };
    match run() {
        Ok(w) => Record::check(id, anchor::WEYL_INTEGRAL, inputs, w, 0.0, 1e-6),
        Err(e) => Record::error(id, anchor::WEYL_INTEGRAL, inputs, e),
    }
}

/// `‖V* T_φ V − W_a‖` at truncation `size`.
pub fn toeplitz_weyl_check(eps: f64, name: &str, phi: &Symbol2D, size: usize, order: usize) -> Record {
    let id = format!("fock.toeplitz_weyl.{name}.eps={eps}");
    let inputs = format!("eps={eps}; phi={phi}; size={size}; order={order}");
    let run = || -> mehler::Result<f64> {
        let t = fock_toeplitz_matrix(phi, eps, size, order)?;
        let a = weyl_symbol_of_toeplitz(phi, eps)?.a;
        let w = weyl_matrix(&a, size)?;
        Ok(complex_norm(&(t - w)))
    };
    match run() {
        Ok(w) => Record::check(id, anchor::TOEPLITZ_WEYL, inputs, w, 0.0, 1e-5),
        Err(e) => Record::error(id, anchor::TOEPLITZ_WEYL, inputs, e),
    }
}

/// `U e_n = (1−ε²)^{1/4} T_{1/ψ} δ T*_ψ e_n` for `n = 0, 1`.
pub fn u_factorization_check(eps: f64) -> Record {
    let id = format!("fock.u_factorization.eps={eps}");
    let pts = [Complex64::new(0.3, 0.2), Complex64::new(-0.5, 0.1), Complex64::new(0.0, -0.4)];
    let inputs = format!("eps={eps}; n=0,1; points={pts:?}; order=80");
    let run = || -> mehler::Result<f64> {
        let mut worst = 0.0f64;
        for n in 0..2 {
            worst = worst.max(u_factorization_error(eps, n, &pts, 80)?);
        }
        Ok(worst)
    };
    match run() {
        Ok(w) => Record::check(id, anchor::FACTORIZATION, inputs, w, 0.0, 1e-6),
        Err(e) => Record::error(id, anchor::FACTORIZATION, inputs, e),
    }
}

fn random_cubic(rng: &mut ChaCha8Rng) -> Symbol2D {
    let mut terms = Vec::new();
    for d in 0..=3u32 {
        for i in 0..=d {
            terms.push(((i, d - i), rng.gen_range(-1.0..1.0)));
        }
    }
    Symbol2D::from_real(&terms, 0.0).expect("finite coefficients")
}

fn collect_order(rows: &[Vec<Symbol2D>], order: usize) -> mehler::Result<Symbol2D> {
    let mut acc = Symbol2D::constant(0.0);
    for (k1, row) in rows.iter().enumerate() {
        if order >= k1 && order - k1 < row.len() {
            acc = acc.add(&row[order - k1])?;
        }
    }
    Ok(acc)
}

/// Order-collected `(a#b)#c` against `a#(b#c)` up to order two.
pub fn star_associativity(seed: u64, cases: usize) -> Record {
    let inputs = format!("seed={seed}; cases={cases}; degree<=3; orders 0..=2");
    let id = "fock.star_product.associativity";
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7374_6172);
    let mut run = || -> mehler::Result<f64> {
        let mut worst = 0.0f64;
        for _ in 0..cases {
            let (a, b, c) = (random_cubic(&mut rng), random_cubic(&mut rng), random_cubic(&mut rng));
            let left: Vec<Vec<Symbol2D>> = star_product(&a, &b, 2)?
                .iter()
                .map(|t| star_product(t, &c, 2))
                .collect::<mehler::Result<_>>()?;
            let right: Vec<Vec<Symbol2D>> = star_product(&b, &c, 2)?
                .iter()
                .map(|t| star_product(&a, t, 2))
                .collect::<mehler::Result<_>>()?;
            for order in 0..=2 {
                worst = worst.max(collect_order(&left, order)?.max_coeff_diff(&collect_order(&right, order)?));
            }
        }
        Ok(worst)
    };
    match run() {
        Ok(w) => Record::check(id, anchor::STAR, inputs, w, 0.0, 1e-12),
        Err(e) => Record::error(id, anchor::STAR, inputs, e),
    }
}

/// `x # ξ = xξ + i/2`.
pub fn star_x_xi() -> Record {
    let id = "fock.star_product.x_xi";
    let inputs = "a=x; b=xi; K=2";
    let run = || -> mehler::Result<f64> {
        let terms = star_product(&Symbol2D::x(), &Symbol2D::xi(), 2)?;
        let mut sum = Symbol2D::constant(0.0);
        for t in &terms {
            sum = sum.add(t)?;
        }
        let expected = Symbol2D::monomial(1, 1, ch(1.0)).add(&Symbol2D::monomial(0, 0, Complex64::new(0.0, 0.5)))?;
        Ok(sum.max_coeff_diff(&expected))
    };
    match run() {
        Ok(w) => Record::check(id, anchor::STAR, inputs, w, 0.0, 1e-15),
        Err(e) => Record::error(id, anchor::STAR, inputs, e),
    }
}

/// The standard pair `φ = e^{-|z|²}`, `ψ = x e^{-|z|²}`.
pub fn correspondence_pair() -> (Symbol2D, Symbol2D) {
    let phi = Symbol2D::gaussian(1.0);
    let psi = Symbol2D::x().mul(&phi).expect("product of corpus symbols");
    (phi, psi)
}

/// Commutator and product-defect orders. With the support window they
/// are asserted; with a compressed window they are reported.
pub fn correspondence_checks(epsilons: &[f64], window: Window) -> Vec<Record> {
    let (phi, psi) = correspondence_pair();
    let (tag, assert) = match window {
        Window::Support => ("support".to_string(), true),
        Window::Compressed { size } => (format!("compressed{size}"), false),
    };
    let base = format!("fock.correspondence.{tag}");
    let inputs = format!("eps={epsilons:?}; phi={phi}; psi={psi}; window={tag}");
    match correspondence_experiment(&phi, &psi, epsilons, window) {
        Ok(r) => {
            let ci = format!("{inputs}; abscissa=h=(1-eps^2)pi/(2 eps)");
            let pi = format!("{inputs}; abscissa=t=(1-eps^2)/(16 eps)");
            if assert {
                let mut out = slope_records(&format!("{base}.commutator"), anchor::CORRESPONDENCE, &ci, 2.0, &r.commutator);
                out.extend(slope_records(
                    &format!("{base}.product_defect"),
                    anchor::CORRESPONDENCE,
                    &pi,
                    2.0,
                    &r.product,
                ));
                out.push(Record::report(
                    format!("{base}.leading_constant"),
                    anchor::CORRESPONDENCE,
                    format!("{ci}; C in C h^slope"),
                    r.leading_constant,
                    0.0,
                ));
                out
            } else {
                vec![
                    Record::report(
                        format!("{base}.commutator.slope"),
                        anchor::CORRESPONDENCE,
                        format!("{ci}; residuals={:?}", r.commutator.residual_norms),
                        r.commutator.fitted_slope,
                        2.0,
                    ),
                    Record::report(
                        format!("{base}.product_defect.slope"),
                        anchor::CORRESPONDENCE,
                        format!("{pi}; residuals={:?}", r.product.residual_norms),
                        r.product.fitted_slope,
                        2.0,
                    ),
                ]
            }
        }
        Err(e) => vec![Record::error(format!("{base}.commutator.slope"), anchor::CORRESPONDENCE, inputs, e)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Verdict;

    #[test]
    fn series_length_grows_toward_one() {
        assert_eq!(mehler_series_length(0.3, KernelVariant::K), 300);
        assert!(mehler_series_length(0.98, KernelVariant::K) > 1500);
    }

    #[test]
    fn kernel_checks_pass_at_half() {
        for r in [
            mehler_identity(0.5, KernelVariant::K, None),
            mehler_identity(0.5, KernelVariant::KTilde, None),
            reproducing_property(0.5),
            kernel_positivity(0.5),
            hermite_orthogonality(20, 30),
            evaluation_bound(0.5, 0, 5, 3),
        ] {
            assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        }
        assert!(growth_estimates(0, 50).iter().all(|r| r.verdict == Verdict::Pass));
    }

    #[test]
    fn star_checks_pass() {
        assert_eq!(star_x_xi().verdict, Verdict::Pass);
        assert_eq!(star_associativity(1, 3).verdict, Verdict::Pass);
    }

    #[test]
    fn errors_become_failures() {
        let r = spectral_identity(1.5, "bad", &Symbol1D::gaussian(1.0), 8, 12);
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.measured.is_none());
    }
}
