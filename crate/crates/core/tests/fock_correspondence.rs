use mehler::fock::{
    correspondence_experiment, correspondence_residuals, fock_toeplitz_matrix, star_product, weyl_corpus, weyl_matrix,
    weyl_symbol_of_toeplitz, Window, DEFAULT_ORDER, DEFAULT_SIZE,
};
use mehler::Symbol2D;
use num_complex::Complex64;
use proptest::prelude::*;

#[test]
fn toeplitz_equals_weyl_of_smoothed_symbol() {
    for eps in [0.5, 0.7] {
        for (name, phi) in weyl_corpus() {
            let t = fock_toeplitz_matrix(&phi, eps, DEFAULT_SIZE, DEFAULT_ORDER).unwrap();
            let a = weyl_symbol_of_toeplitz(&phi, eps).unwrap().a;
            let w = weyl_matrix(&a, DEFAULT_SIZE).unwrap();
            let err = (t - w).map(|c| c.norm()).max();
            eprintln!("{name} eps={eps}: {err:e}");
            assert!(err <= 1e-5, "{name} eps={eps}: {err:e}");
        }
    }
}

#[test]
fn gaussian_operator_identity_at_0_6() {
    let phi = Symbol2D::gaussian(1.0);
    let t = fock_toeplitz_matrix(&phi, 0.6, 40, 80).unwrap();
    let w = weyl_matrix(&weyl_symbol_of_toeplitz(&phi, 0.6).unwrap().a, 40).unwrap();
    assert!(mehler::fock::complex_norm(&(t - w)) <= 1e-6);
}

#[test]
fn commutator_and_product_defect_orders() {
    let phi = Symbol2D::gaussian(1.0);
    let psi = Symbol2D::x().mul(&Symbol2D::gaussian(1.0)).unwrap();
    let report = correspondence_experiment(&phi, &psi, &[0.90, 0.93, 0.96], Window::Support).unwrap();
    eprintln!("{report:?}");
    let truncated =
        correspondence_experiment(&phi, &psi, &[0.90, 0.93, 0.96], Window::Compressed { size: DEFAULT_SIZE }).unwrap();
    eprintln!("{truncated:?}");
    assert!(report.commutator.passes(1.8, 2.2), "{:?}", report.commutator);
    assert!(report.product.passes(1.8, 2.2), "{:?}", report.product);
}

#[test]
fn equal_symbols_commute() {
    let phi = Symbol2D::gaussian(1.0);
    let (c, _, n) = correspondence_residuals(&phi, &phi, 0.9, Window::Compressed { size: 20 }).unwrap();
    assert_eq!(n, 0.0);
    assert_eq!(c, 0.0);
    assert!(correspondence_experiment(&phi, &phi, &[0.9, 0.93, 0.96], Window::Compressed { size: 20 }).is_err());
}

fn collected(terms: &[Vec<Symbol2D>], order: usize) -> Symbol2D {
    let mut acc = Symbol2D::constant(0.0);
    for (k1, row) in terms.iter().enumerate() {
        if order >= k1 && order - k1 < row.len() {
            acc = acc.add(&row[order - k1]).unwrap();
        }
    }
    acc
}

fn poly3() -> impl Strategy<Value = Symbol2D> {
    prop::collection::vec(-1.0f64..1.0, 10).prop_map(|c| {
        let mut terms = Vec::new();
        let mut idx = 0;
        for d in 0..=3u32 {
            for i in 0..=d {
                terms.push(((i, d - i), c[idx]));
                idx += 1;
            }
        }
        Symbol2D::from_real(&terms, 0.0).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn star_product_is_associative_to_second_order(a in poly3(), b in poly3(), c in poly3()) {
        let ab = star_product(&a, &b, 2).unwrap();
        let bc = star_product(&b, &c, 2).unwrap();
        let left: Vec<Vec<Symbol2D>> = ab.iter().map(|t| star_product(t, &c, 2).unwrap()).collect();
        let right_rows: Vec<Vec<Symbol2D>> = bc.iter().map(|t| star_product(&a, t, 2).unwrap()).collect();
        for order in 0..=2 {
            let l = collected(&left, order);
            let r = collected(&right_rows, order);
            prop_assert!(l.max_coeff_diff(&r) <= 1e-12, "order {}", order);
        }
    }

    #[test]
    fn x_star_xi(s in -2.0f64..2.0, t in -2.0f64..2.0) {
        let terms = star_product(&Symbol2D::x(), &Symbol2D::xi(), 2).unwrap();
        let v: Complex64 = terms.iter().map(|k| k.eval(s, t)).sum();
        prop_assert!((v - Complex64::new(s * t, 0.5)).norm() < 1e-14);
    }
}
