use proptest::prelude::*;

use ncorlicz::algebra::{modular, random_operator, C64};
use ncorlicz::direct_sum::{nu_pairing, tuple_norm, Component, Exponent, TupleOperator, TupleSpace};
use ncorlicz::norms::{gauge_norm, luxemburg_norm, orlicz_norm, Gauge};
use ncorlicz::{OperatorKind, OrliczFunction, TracialAlgebra};

fn catalog() -> impl Strategy<Value = OrliczFunction> {
    prop_oneof![
        (1.1f64..4.0).prop_map(|a| OrliczFunction::power(a).unwrap()),
        Just(OrliczFunction::expm()),
        Just(OrliczFunction::linlog()),
    ]
}

fn algebra() -> impl Strategy<Value = TracialAlgebra> {
    prop_oneof![
        (1usize..=4).prop_map(TracialAlgebra::matrix),
        (1usize..=3, 1usize..=2).prop_map(|(a, b)| TracialAlgebra::from_dims(&[a, b]).unwrap()),
        (2usize..=3).prop_map(TracialAlgebra::normalized),
    ]
}

fn gauge() -> impl Strategy<Value = Gauge> {
    prop_oneof![Just(Gauge::Luxemburg), Just(Gauge::Orlicz)]
}

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_axioms(phi in catalog(), alg in algebra(), g in gauge(), seed in any::<u64>(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let a = random_operator(&alg, OperatorKind::General, 1.0, seed).unwrap();
        let b = random_operator(&alg, OperatorKind::General, 1.0, seed ^ 1).unwrap();
        let u = random_operator(&alg, OperatorKind::Unitary, 1.0, seed ^ 2).unwrap();
        let n = |x: &ncorlicz::Operator| gauge_norm(x, &phi, g).unwrap();
        let na = n(&a);
        let c = C64::new(re, im);
        prop_assume!(c.norm() > 1e-3);
        prop_assert!(rel(n(&a.scale(c)), c.norm() * na) < 1e-9);
        prop_assert!(n(&a.add(&b).unwrap()) <= (na + n(&b)) * (1.0 + 1e-9));
        prop_assert!(rel(n(&u.mul(&a).unwrap()), na) < 1e-9);
        prop_assert!(rel(n(&a.adjoint()), na) < 1e-9);
    }

    #[test]
    fn luxemburg_sits_on_the_modular_unit_sphere(phi in catalog(), alg in algebra(), seed in any::<u64>()) {
        let a = random_operator(&alg, OperatorKind::General, 1.0, seed).unwrap();
        let n = luxemburg_norm(&a, &phi).unwrap().value;
        prop_assert!((modular(&phi, &a.scale_real(1.0 / n)).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn luxemburg_and_orlicz_sandwich(phi in catalog(), alg in algebra(), seed in any::<u64>(), scale in 0.05f64..5.0) {
        let a = random_operator(&alg, OperatorKind::General, scale, seed).unwrap();
        let lux = luxemburg_norm(&a, &phi).unwrap().value;
        let orl = orlicz_norm(&a, &phi).unwrap().value;
        prop_assert!(lux <= orl * (1.0 + 1e-12));
        prop_assert!(orl <= 2.0 * lux + 1e-8);
    }

    #[test]
    fn young_inequality(phi in catalog(), u in 0.0f64..8.0, v in 0.0f64..8.0) {
        let psi = phi.complementary();
        prop_assert!(u * v <= phi.eval(u).unwrap() + psi.eval(v).unwrap() + 1e-12 * (1.0 + u * v));
    }

    #[test]
    fn intermediate_inverse_is_geometric_mean(a in 1.1f64..4.0, s in 0.0f64..=1.0, y in 0.01f64..50.0) {
        let phi1 = OrliczFunction::power(a).unwrap();
        let phi2 = OrliczFunction::expm();
        let mid = OrliczFunction::intermediate(&phi1, &phi2, s).unwrap();
        let expected = phi1.inverse(y).unwrap().powf(1.0 - s) * phi2.inverse(y).unwrap().powf(s);
        prop_assert!(rel(mid.inverse(y).unwrap(), expected) < 1e-9);
    }

    #[test]
    fn tuple_norm_is_a_norm_and_holder_holds(
        phis in proptest::collection::vec(catalog(), 1..=3),
        p in prop_oneof![1.0f64..5.0, Just(f64::INFINITY)],
        g in gauge(),
        seed in any::<u64>(),
    ) {
        let alg = TracialAlgebra::matrix(2);
        let weights: Vec<f64> = (0..phis.len()).map(|j| 0.3 + j as f64).collect();
        let components = phis.iter().map(|phi| Component { phi: phi.clone(), algebra: alg.clone() }).collect();
        let space = TupleSpace::new(components, weights, Exponent::new(p).unwrap(), g).unwrap();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let a = space.random_tuple(&mut rng, OperatorKind::General, 1.0).unwrap();
        let b = space.random_tuple(&mut rng, OperatorKind::General, 1.0).unwrap();
        let na = tuple_norm(&space, &a).unwrap();
        prop_assert!(rel(tuple_norm(&space, &a.scale_real(-2.5)).unwrap(), 2.5 * na) < 1e-9);
        prop_assert!(tuple_norm(&space, &a.add(&b).unwrap()).unwrap() <= (na + tuple_norm(&space, &b).unwrap()) * (1.0 + 1e-9));
        if !space.exponent().is_infinite() {
            let lux = space.with_gauge(Gauge::Luxemburg);
            let conj = lux.conjugate_space();
            let c = conj.random_tuple(&mut rng, OperatorKind::General, 1.0).unwrap();
            let lhs = nu_pairing(&lux, &a, &c).unwrap().norm();
            let rhs = tuple_norm(&lux, &a).unwrap() * tuple_norm(&conj, &c).unwrap();
            prop_assert!(lhs <= rhs * (1.0 + 1e-9));
        }
    }

    #[test]
    fn zero_tuple_has_zero_norm(p in 1.0f64..4.0) {
        let alg = TracialAlgebra::from_dims(&[1, 2]).unwrap();
        let phi = OrliczFunction::expm();
        let space = TupleSpace::uniform(&phi, &alg, vec![1.0, 2.0], Exponent::new(p).unwrap(), Gauge::Orlicz).unwrap();
        let z: TupleOperator = space.zero();
        prop_assert_eq!(tuple_norm(&space, &z).unwrap(), 0.0);
    }
}
