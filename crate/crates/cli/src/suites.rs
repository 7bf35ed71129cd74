//! Suite assembly: which checks run for a configuration.

use mehler::asymptotics::{
    corpus, corpus_triples, narrow_corpus_triples, ExperimentDescriptor, ResidualSettings, DEFAULT_EPSILONS,
};
use mehler::fock::{weyl_corpus, Window, ANISOTROPY_CAP, DEFAULT_SIZE};
use mehler::kernels::KernelVariant;
use mehler::{Symbol1D, Symbol2D};
use rayon::prelude::*;

use crate::checks::{self, anchor};
use crate::config::{ExperimentConfig, Suite, SymbolLiteral, UsageError};
use crate::report::{Record, Report};

/// Sweep for the correspondence experiment when fewer than three values are configured.
pub const CORRESPONDENCE_EPSILONS: [f64; 3] = [0.90, 0.93, 0.96];

type Job = Box<dyn Fn() -> Vec<Record> + Send + Sync>;

fn job<F: Fn() -> Vec<Record> + Send + Sync + 'static>(f: F) -> Job {
    Box::new(f)
}

fn one<F: Fn() -> Record + Send + Sync + 'static>(f: F) -> Job {
    Box::new(move || vec![f()])
}

/// Semiclassical sweep: the configured values if there are at least four.
pub fn semiclassical_sweep(cfg: &ExperimentConfig) -> Vec<f64> {
    if cfg.epsilons.len() >= 4 {
        cfg.epsilons.clone()
    } else {
        DEFAULT_EPSILONS.to_vec()
    }
}

/// Correspondence sweep: the configured values if there are at least three.
pub fn correspondence_sweep(cfg: &ExperimentConfig) -> Vec<f64> {
    if cfg.epsilons.len() >= 3 {
        cfg.epsilons.clone()
    } else {
        CORRESPONDENCE_EPSILONS.to_vec()
    }
}

fn line_symbols(cfg: &ExperimentConfig) -> Result<Vec<(String, Symbol1D)>, UsageError> {
    let mut out: Vec<(String, Symbol1D)> = corpus().into_iter().map(|(n, s)| (n.to_string(), s)).collect();
    for (i, s) in cfg.parsed_symbols()?.into_iter().enumerate() {
        if let SymbolLiteral::Line(s) = s {
            out.push((format!("symbols[{i}]"), s));
        }
    }
    Ok(out)
}

fn phase_symbols(cfg: &ExperimentConfig) -> Result<Vec<(String, Symbol2D)>, UsageError> {
    let mut out: Vec<(String, Symbol2D)> = weyl_corpus().into_iter().map(|(n, s)| (n.to_string(), s)).collect();
    for (i, s) in cfg.parsed_symbols()?.into_iter().enumerate() {
        if let SymbolLiteral::Phase(s) = s {
            out.push((format!("symbols[{i}]"), s));
        }
    }
    Ok(out)
}

fn kernel_jobs(cfg: &ExperimentConfig) -> Vec<Job> {
    let mut jobs = Vec::new();
    let seed = cfg.seed;
    for &eps in &cfg.epsilons {
        jobs.push(one(move || checks::mehler_identity(eps, KernelVariant::K, None)));
        jobs.push(one(move || checks::mehler_identity(eps, KernelVariant::KTilde, None)));
        jobs.push(one(move || checks::reproducing_property(eps)));
        jobs.push(one(move || checks::kernel_positivity(eps)));
        jobs.push(one(move || checks::evaluation_bound(eps, seed, 50, 10)));
    }
    let (n, q) = (cfg.basis_size - 1, cfg.quad_order);
    jobs.push(one(move || checks::hermite_orthogonality(n, q)));
    jobs.push(job(move || checks::growth_estimates(seed, 200)));
    jobs
}

/// Five `(f, u)` pairs for the grid/matrix comparison.
pub const REALIZATION_PAIRS: [(&str, &str); 5] = [
    ("gauss", "x_gauss"),
    ("x_gauss", "half_gauss"),
    ("one_minus_x2_half_gauss", "x_half_gauss"),
    ("half_gauss", "hermite2_shape"),
    ("one_plus_x_half_gauss", "gauss"),
];

/// Looks up a member of the one-dimensional corpus by name.
pub fn corpus_symbol(name: &str) -> Symbol1D {
    corpus()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| s)
        .expect("corpus member")
}

fn operator_jobs(cfg: &ExperimentConfig) -> Result<Vec<Job>, UsageError> {
    let mut jobs = Vec::new();
    let (n, q) = (cfg.basis_size, cfg.quad_order);
    let symbols = line_symbols(cfg)?;
    for &eps in &cfg.epsilons {
        for (name, f) in &symbols {
            let (a, b) = (name.clone(), f.clone());
            jobs.push(one(move || checks::spectral_identity(eps, &a, &b, n, q)));
            if f.sup_norm().is_finite() {
                let (a, b) = (name.clone(), f.clone());
                jobs.push(one(move || checks::tilde_norm_bound(eps, &a, &b, n, q)));
                let (a, b) = (name.clone(), f.clone());
                jobs.push(job(move || checks::factored_norm(eps, &a, &b)));
            }
        }
        jobs.push(job(move || checks::factored_norm(eps, "one", &Symbol1D::constant(1.0))));
        for (fname, uname) in REALIZATION_PAIRS {
            jobs.push(one(move || {
                checks::grid_vs_matrix(eps, (fname, &corpus_symbol(fname)), (uname, &corpus_symbol(uname)), n)
            }));
        }
    }
    Ok(jobs)
}

fn asymptotic_jobs(cfg: &ExperimentConfig) -> Vec<Job> {
    let sweep = semiclassical_sweep(cfg);
    let settings = ResidualSettings {
        basis_size: cfg.basis_size,
        ..ResidualSettings::default()
    };
    let mut jobs = Vec::new();
    for (t, (f, g, u)) in corpus_triples().into_iter().enumerate() {
        let labels = format!("f={f}; g={g}; u={u}");
        let exps = [
            ExperimentDescriptor::FirstOrder { f: f.clone(), u: u.clone() },
            ExperimentDescriptor::Product { f: f.clone(), g: g.clone(), u: u.clone() },
            ExperimentDescriptor::Commutator { f: f.clone(), g: g.clone(), u: u.clone() },
            ExperimentDescriptor::CommutatorT { f: f.clone(), g: g.clone(), u: u.clone() },
            ExperimentDescriptor::ProductT { f, g, u },
        ];
        for exp in exps {
            let (sweep, labels) = (sweep.clone(), labels.clone());
            let id = format!("asymptotics.{}.triple{t}", exp.name());
            jobs.push(job(move || checks::semiclassical_slope(&id, &exp, &sweep, &settings, &labels)));
        }
    }
    let f = corpus_symbol("gauss");
    let u = corpus_symbol("one_minus_x2_half_gauss");
    for k in 1..=2 {
        let exp = ExperimentDescriptor::Spectral {
            f: f.clone(),
            u: u.clone(),
            max_power: k,
        };
        let (sweep, labels) = (sweep.clone(), format!("f={f}; u={u}; K={k}"));
        let id = format!("asymptotics.spectral.K{k}");
        jobs.push(job(move || checks::semiclassical_slope(&id, &exp, &sweep, &settings, &labels)));
    }
    let h2 = corpus_symbol("hermite2_shape");
    let exp = ExperimentDescriptor::ZerothOrder { f: f.clone(), u: h2.clone() };
    let (s, labels) = (sweep.clone(), format!("f={f}; u={h2}"));
    jobs.push(job(move || checks::semiclassical_slope("asymptotics.zeroth_order", &exp, &s, &settings, &labels)));
    for (t, (f, g, u)) in narrow_corpus_triples().into_iter().enumerate() {
        let labels = format!("f={f}; g={g}; u={u}; pre-asymptotic on this sweep");
        for exp in [
            ExperimentDescriptor::Product { f: f.clone(), g: g.clone(), u: u.clone() },
            ExperimentDescriptor::Commutator { f: f.clone(), g: g.clone(), u: u.clone() },
        ] {
            let (sweep, labels) = (sweep.clone(), labels.clone());
            let id = format!("asymptotics.narrow.{}.triple{t}", exp.name());
            jobs.push(job(move || checks::semiclassical_slope_report(&id, &exp, &sweep, &settings, &labels)));
        }
    }
    jobs
}

fn fock_jobs(cfg: &ExperimentConfig) -> Result<Vec<Job>, UsageError> {
    let size = cfg.basis_size.min(DEFAULT_SIZE);
    let order = cfg.quad_order;
    let symbols = phase_symbols(cfg)?;
    let mut jobs = Vec::new();
    for &eps in &cfg.epsilons {
        jobs.push(one(move || checks::beta_series_check(eps)));
        jobs.push(one(move || checks::u_factorization_check(eps)));
        for (name, phi) in &symbols {
            let (a, b) = (name.clone(), phi.clone());
            jobs.push(one(move || checks::weyl_integral_check(eps, &a, &b)));
        }
        if eps > ANISOTROPY_CAP {
            jobs.push(one(move || {
                Record::report(
                    format!("fock.anisotropic_quadrature.eps={eps}"),
                    anchor::COMPLEX_ORTHOGONALITY,
                    "skipped: tensor rules are not trusted above the anisotropy cap",
                    eps,
                    ANISOTROPY_CAP,
                )
            }));
            continue;
        }
        jobs.push(one(move || checks::complex_orthogonality_check(eps, 20, order.max(21))));
        jobs.push(one(move || checks::fock_basis_gram(eps, 20, order.max(21))));
        for (name, phi) in &symbols {
            let (a, b) = (name.clone(), phi.clone());
            let need = size + phi.max_degree() / 2;
            jobs.push(one(move || checks::toeplitz_weyl_check(eps, &a, &b, size, order.max(need))));
        }
    }
    let seed = cfg.seed;
    jobs.push(one(move || checks::star_associativity(seed, 16)));
    jobs.push(one(checks::star_x_xi));
    let sweep = correspondence_sweep(cfg);
    let s2 = sweep.clone();
    jobs.push(job(move || checks::correspondence_checks(&sweep, Window::Support)));
    jobs.push(job(move || checks::correspondence_checks(&s2, Window::Compressed { size: DEFAULT_SIZE })));
    Ok(jobs)
}

fn suite_jobs(cfg: &ExperimentConfig, suite: Suite) -> Result<Vec<Job>, UsageError> {
    Ok(match suite {
        Suite::Kernels => kernel_jobs(cfg),
        Suite::Operators => operator_jobs(cfg)?,
        Suite::Asymptotics => asymptotic_jobs(cfg),
        Suite::Fock => fock_jobs(cfg)?,
        Suite::All => {
            let mut all = Vec::new();
            for s in Suite::MODULES {
                all.extend(suite_jobs(cfg, s)?);
            }
            all
        }
    })
}

/// Runs every check of the configured suite. Checks run in parallel; the
/// report is ordered by id.
pub fn run_suite(cfg: &ExperimentConfig) -> Result<Report, UsageError> {
    cfg.validate()?;
    let jobs = suite_jobs(cfg, cfg.suite)?;
    let records: Vec<Record> = jobs.par_iter().flat_map_iter(|j| j()).collect();
    Ok(Report::new(records))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweeps_fall_back_to_standard() {
        let cfg = ExperimentConfig::default();
        assert_eq!(semiclassical_sweep(&cfg), DEFAULT_EPSILONS.to_vec());
        assert_eq!(correspondence_sweep(&cfg), CORRESPONDENCE_EPSILONS.to_vec());
        let cfg = ExperimentConfig {
            epsilons: vec![0.9, 0.92, 0.94],
            ..Default::default()
        };
        assert_eq!(correspondence_sweep(&cfg), vec![0.9, 0.92, 0.94]);
        assert_eq!(semiclassical_sweep(&cfg), DEFAULT_EPSILONS.to_vec());
    }

    #[test]
    fn ids_are_unique() {
        let cfg = ExperimentConfig::default();
        let jobs = suite_jobs(&cfg, Suite::Kernels).unwrap();
        let mut ids: Vec<String> = jobs.iter().flat_map(|j| j()).map(|r| r.id).collect();
        let n = ids.len();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), n);
    }
}
