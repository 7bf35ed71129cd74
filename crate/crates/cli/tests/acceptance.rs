//! Acceptance criteria 1–9. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use mehler::asymptotics::{corpus, corpus_triples, ExperimentDescriptor, ResidualSettings, DEFAULT_EPSILONS};
use mehler::fock::{weyl_corpus, Window};
use mehler::kernels::KernelVariant;
use mehler_cli::checks;
use mehler_cli::report::parse_json;
use mehler_cli::suites::{corpus_symbol, CORRESPONDENCE_EPSILONS, REALIZATION_PAIRS};
use mehler_cli::{Record, Verdict};

struct Outcome {
    records: Vec<Record>,
    notes: Vec<String>,
}

impl From<Vec<Record>> for Outcome {
    fn from(records: Vec<Record>) -> Self {
        Self { records, notes: Vec::new() }
    }
}

fn criterion(number: usize, title: &str, limit: Option<Duration>, body: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = body();
    let elapsed = start.elapsed();
    let failed: Vec<&Record> = out.records.iter().filter(|r| r.verdict == Verdict::Fail).collect();
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let ok = failed.is_empty() && out.notes.is_empty() && in_time;
    let reported = out.records.iter().filter(|r| r.verdict == Verdict::Report).count();
    let limit_text = limit.map(|l| format!(" (limit {} s)", l.as_secs())).unwrap_or_default();
    println!(
        "criterion {number}: {} {title} [{} checks, {reported} reported, {:.2} s{limit_text}]",
        if ok { "PASS" } else { "FAIL" },
        out.records.len(),
        elapsed.as_secs_f64(),
    );
    for r in failed {
        println!("    failed {}: measured {:?}, expected {} ± {}; {}", r.id, r.measured, r.expected, r.tolerance, r.inputs);
    }
    for n in &out.notes {
        println!("    {n}");
    }
    if !in_time {
        println!("    runtime exceeded");
    }
    ok
}

fn bounded_corpus() -> Vec<(&'static str, mehler::Symbol1D)> {
    corpus().into_iter().filter(|(_, f)| f.sup_norm().is_finite()).collect()
}

fn mehler_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_mehler"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn main() -> ExitCode {
    let mut all = true;

    all &= criterion(1, "Mehler identity, N=300", Some(Duration::from_secs(5)), || {
        [0.3, 0.6, 0.9]
            .into_iter()
            .map(|e| checks::mehler_identity(e, KernelVariant::K, Some(300)))
            .collect::<Vec<_>>()
            .into()
    });

    all &= criterion(2, "Hermite and complex orthogonality, n,m <= 20", Some(Duration::from_secs(10)), || {
        let mut r = vec![checks::hermite_orthogonality(20, 40)];
        for e in [0.4, 0.6] {
            r.push(checks::complex_orthogonality_check(e, 20, 80));
        }
        r.into()
    });

    all &= criterion(3, "spectral identity and grid/matrix agreement, N=120", Some(Duration::from_secs(30)), || {
        let mut r = Vec::new();
        for e in [0.5, 0.9] {
            for (name, f) in corpus() {
                r.push(checks::spectral_identity(e, name, &f, 120, 130));
            }
            for (f, u) in REALIZATION_PAIRS {
                r.push(checks::grid_vs_matrix(e, (f, &corpus_symbol(f)), (u, &corpus_symbol(u)), 120));
            }
        }
        r.into()
    });

    all &= criterion(4, "norm bounds, N=120", None, || {
        let mut r = Vec::new();
        for e in [0.5, 0.9] {
            for (name, f) in bounded_corpus() {
                r.push(checks::tilde_norm_bound(e, name, &f, 120, 130));
                r.extend(checks::factored_norm(e, name, &f));
            }
        }
        let mut out: Outcome = r.into();
        if out.records.iter().filter(|r| r.id.contains(".norm_bound.tilde.")).count() < 10 {
            out.notes.push("fewer than 5 bounded corpus symbols".into());
        }
        out
    });

    all &= criterion(5, "semiclassical orders, N=120", Some(Duration::from_secs(120)), || {
        let settings = ResidualSettings {
            basis_size: 120,
            ..ResidualSettings::default()
        };
        let mut r = Vec::new();
        for (t, (f, g, u)) in corpus_triples().into_iter().enumerate() {
            let labels = format!("f={f}; g={g}; u={u}");
            for exp in [
                ExperimentDescriptor::FirstOrder { f: f.clone(), u: u.clone() },
                ExperimentDescriptor::Product { f: f.clone(), g: g.clone(), u: u.clone() },
                ExperimentDescriptor::Commutator { f: f.clone(), g: g.clone(), u: u.clone() },
                ExperimentDescriptor::CommutatorT { f, g, u },
            ] {
                let id = format!("asymptotics.{}.triple{t}", exp.name());
                r.extend(checks::semiclassical_slope(&id, &exp, &DEFAULT_EPSILONS, &settings, &labels));
            }
        }
        let (f, u) = (corpus_symbol("gauss"), corpus_symbol("one_minus_x2_half_gauss"));
        for k in 1..=2 {
            let exp = ExperimentDescriptor::Spectral {
                f: f.clone(),
                u: u.clone(),
                max_power: k,
            };
            let id = format!("asymptotics.spectral.K{k}");
            r.extend(checks::semiclassical_slope(&id, &exp, &DEFAULT_EPSILONS, &settings, &format!("K={k}")));
        }
        let mut out: Outcome = r.into();
        if corpus_triples().len() < 3 {
            out.notes.push("fewer than 3 corpus triples".into());
        }
        out
    });

    all &= criterion(6, "Toeplitz operators as Weyl operators, truncation 40", Some(Duration::from_secs(60)), || {
        let mut r = Vec::new();
        for e in [0.5, 0.7] {
            for (name, phi) in weyl_corpus() {
                r.push(checks::toeplitz_weyl_check(e, name, &phi, 40, 80));
                r.push(checks::weyl_integral_check(e, name, &phi));
            }
        }
        r.into()
    });

    all &= criterion(7, "correspondence principle", Some(Duration::from_secs(60)), || {
        checks::correspondence_checks(&CORRESPONDENCE_EPSILONS, Window::Support).into()
    });

    all &= criterion(8, "growth and evaluation estimates", None, || {
        let mut r = checks::growth_estimates(0, 200);
        for e in [0.5, 0.9] {
            r.push(checks::evaluation_bound(e, 0, 50, 10));
        }
        r.into()
    });

    all &= criterion(9, "determinism and exit status", None, || {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("all.toml");
        std::fs::write(&cfg, "suite = \"all\"\nepsilons = [0.5, 0.9]\nseed = 0\n").unwrap();
        let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
        let mut notes = Vec::new();
        for target in [&a, &b] {
            let out = mehler_cli(&["run", "--config", cfg.to_str().unwrap(), "--output", target.to_str().unwrap()]);
            if out.status.code() != Some(0) {
                notes.push(format!("suite all exited with {:?}", out.status.code()));
            }
        }
        let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        if ta != tb {
            notes.push("reports differ between runs".into());
        }
        let records = parse_json(std::str::from_utf8(&ta).unwrap()).unwrap().records;

        let failing = mehler_cli(&["run", "--suite", "asymptotics", "--basis-size", "6"]);
        let has_fail = parse_json(std::str::from_utf8(&failing.stdout).unwrap())
            .map(|r| r.has_failures())
            .unwrap_or(false);
        if !has_fail || failing.status.code() != Some(1) {
            notes.push(format!("report with FAIL exited with {:?}", failing.status.code()));
        }
        let rejected = mehler_cli(&["run", "--suite", "all", "--basis-size", "4", "--quad-order", "3"]);
        if rejected.status.success() {
            notes.push("invalid config was accepted".into());
        }
        Outcome { records, notes }
    });

    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
