use mehler::symbols::{poisson_bracket, Symbol1D, Symbol2D};
use num_complex::Complex64;
use proptest::prelude::*;

fn poly2d(max_deg: u32) -> impl Strategy<Value = Symbol2D> {
    prop::collection::vec(((0..=max_deg), (0..=max_deg), -2.0f64..2.0), 1..6).prop_map(|terms| {
        let t: Vec<((u32, u32), f64)> = terms.into_iter().map(|(i, j, c)| ((i, j), c)).collect();
        Symbol2D::from_real(&t, 0.0).unwrap()
    })
}

fn poly1d() -> impl Strategy<Value = Symbol1D> {
    (prop::collection::vec(-2.0f64..2.0, 1..6), 0.0f64..1.5).prop_map(|(c, a)| Symbol1D::new(c, a).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn heat_flow_semigroup(phi in poly2d(5), s in 0.0f64..0.5, t in 0.0f64..0.5) {
        let two_steps = phi.heat_flow(s).unwrap().heat_flow(t).unwrap();
        let one_step = phi.heat_flow(s + t).unwrap();
        prop_assert!(two_steps.max_coeff_diff(&one_step) < 1e-12);
    }

    #[test]
    fn heat_flow_semigroup_with_decay(s in 0.0f64..0.5, t in 0.0f64..0.5, a in 0.1f64..2.0) {
        let phi = Symbol2D::from_real(&[((2, 1), 1.0), ((0, 0), -0.5), ((1, 3), 0.25)], a).unwrap();
        let two_steps = phi.heat_flow(s).unwrap().heat_flow(t).unwrap();
        let one_step = phi.heat_flow(s + t).unwrap();
        prop_assert!((two_steps.alpha_x - one_step.alpha_x).abs() < 1e-14);
        prop_assert!(two_steps.max_coeff_diff(&one_step) < 1e-12);
    }

    #[test]
    fn poisson_leibniz(phi in poly2d(3), psi in poly2d(3), chi in poly2d(3)) {
        let lhs = poisson_bracket(&phi, &psi.mul(&chi).unwrap()).unwrap();
        let rhs = poisson_bracket(&phi, &psi).unwrap().mul(&chi).unwrap()
            .add(&psi.mul(&poisson_bracket(&phi, &chi).unwrap()).unwrap()).unwrap();
        let scale = 1.0 + lhs.terms.values().map(|c| c.norm()).fold(0.0, f64::max);
        prop_assert!(lhs.max_coeff_diff(&rhs) <= 1e-13 * scale);
    }

    #[test]
    fn poisson_antisymmetry(phi in poly2d(4), psi in poly2d(4)) {
        let a = poisson_bracket(&phi, &psi).unwrap();
        let b = poisson_bracket(&psi, &phi).unwrap().scale(Complex64::new(-1.0, 0.0));
        prop_assert!(a.max_coeff_diff(&b) < 1e-12);
    }

    #[test]
    fn product_rule_1d(f in poly1d(), g in poly1d()) {
        let lhs = f.mul(&g).unwrap().derivative();
        let rhs = f.derivative().mul(&g).unwrap().add(&f.mul(&g.derivative()).unwrap()).unwrap();
        prop_assert!(lhs.max_coeff_diff(&rhs) < 1e-12);
    }

    #[test]
    fn evaluation_respects_product(f in poly1d(), g in poly1d(), x in -3.0f64..3.0) {
        let fg = f.mul(&g).unwrap();
        let expect = f.eval(x) * g.eval(x);
        prop_assert!((fg.eval(x) - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
    }

    #[test]
    fn text_round_trip(phi in poly2d(4)) {
        let back: Symbol2D = phi.to_string().parse().unwrap();
        prop_assert_eq!(back, phi);
    }
}
