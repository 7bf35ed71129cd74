use mehler::asymptotics::{
    corpus, corpus_triples, residual_slope, ExperimentDescriptor, ResidualSettings, DEFAULT_EPSILONS,
};
use mehler::Symbol1D;

fn check(exp: &ExperimentDescriptor, lo: f64, hi: f64) {
    let report = residual_slope(exp, &DEFAULT_EPSILONS, &ResidualSettings::default()).unwrap();
    eprintln!(
        "{}: slope {:.4} r2 {:.5} residuals {:?}",
        exp.name(),
        report.fitted_slope,
        report.r_squared,
        report.residual_norms
    );
    assert!(report.passes(lo, hi), "{exp:?}: {report:?}");
}

#[test]
fn first_order_term_has_order_two() {
    let f = Symbol1D::gaussian(1.0);
    let u = Symbol1D::hermite_shaped(2);
    check(&ExperimentDescriptor::FirstOrder { f: f.clone(), u: u.clone() }, 1.8, 2.2);
    check(&ExperimentDescriptor::ZerothOrder { f, u }, 0.8, 1.2);
}

#[test]
fn first_order_on_corpus() {
    for (f, _, u) in corpus_triples() {
        check(&ExperimentDescriptor::FirstOrder { f, u }, 1.8, 2.2);
    }
}

#[test]
fn spectral_truncations() {
    let (_, f) = &corpus()[0];
    let (_, u) = &corpus()[2];
    for k in 1..=2 {
        check(
            &ExperimentDescriptor::Spectral {
                f: f.clone(),
                u: u.clone(),
                max_power: k,
            },
            k as f64 + 0.8,
            k as f64 + 1.2,
        );
    }
}

#[test]
fn product_and_commutator_models() {
    for (f, g, u) in corpus_triples() {
        check(&ExperimentDescriptor::Product { f: f.clone(), g: g.clone(), u: u.clone() }, 1.8, 2.2);
        check(&ExperimentDescriptor::Commutator { f: f.clone(), g: g.clone(), u: u.clone() }, 1.8, 2.2);
        check(&ExperimentDescriptor::CommutatorT { f: f.clone(), g: g.clone(), u: u.clone() }, 1.8, 2.2);
        check(&ExperimentDescriptor::ProductT { f, g, u }, 1.8, 2.2);
    }
}

#[test]
fn narrow_triples_reach_order_two_closer_to_one() {
    let near_one = [0.99, 0.993, 0.996, 0.998];
    for (f, g, u) in mehler::asymptotics::narrow_corpus_triples() {
        for exp in [
            ExperimentDescriptor::Product { f: f.clone(), g: g.clone(), u: u.clone() },
            ExperimentDescriptor::Commutator { f: f.clone(), g: g.clone(), u: u.clone() },
        ] {
            let far = residual_slope(&exp, &DEFAULT_EPSILONS, &ResidualSettings::default()).unwrap();
            let near = residual_slope(&exp, &near_one, &ResidualSettings::default()).unwrap();
            eprintln!("{}: {:.4} -> {:.4}", exp.name(), far.fitted_slope, near.fitted_slope);
            assert!(near.fitted_slope > far.fitted_slope);
            assert!(near.passes(1.9, 2.1), "{near:?}");
        }
    }
}
