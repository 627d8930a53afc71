mod common;

use common::{c, random_expr};
use dbar_core::expr::parse;
use dbar_core::forms::{manufacture_form, OneForm, ProductDomain};
use dbar_core::kernel::{big_g, decompose_inverse_product, IndexSet};
use dbar_core::operator_t::{solve_t, SolveOptions};
use dbar_core::quadrature::{QuadratureSuite, RuleSizes};
use dbar_core::C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn complex(lo: f64, hi: f64) -> impl Strategy<Value = C64> {
    (lo..hi, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| C64::from_polar(r, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decomposition_sums_to_inverse_product(a in prop::collection::vec(complex(0.1, 10.0), 1..9)) {
        let sum: C64 = decompose_inverse_product(&a).unwrap().iter().sum();
        let exact = a.iter().product::<C64>().inv();
        prop_assert!((sum - exact).norm() <= 1e-12 * exact.norm());
    }

    #[test]
    fn g_is_rotation_invariant(a in prop::collection::vec(complex(0.1, 5.0), 1..6), phi in 0.0..6.0f64) {
        let rotated: Vec<C64> = a.iter().map(|x| x * C64::from_polar(1.0, phi)).collect();
        let (g, h) = (big_g(&a).unwrap(), big_g(&rotated).unwrap());
        prop_assert!((g - h).abs() <= 1e-12 * g);
    }

    #[test]
    fn printed_expressions_reparse(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_expr(&mut rng, 3, 4);
        let back = parse(&e.to_string(), 3).unwrap();
        let z = [c(0.3, -0.2), c(-0.1, 0.4), c(0.5, 0.5)];
        let (x, y) = (e.eval(&z).unwrap(), back.eval(&z).unwrap());
        prop_assert!((x - y).norm() <= 1e-12 * x.norm().max(1.0), "{} vs {}", e, back);
    }

    #[test]
    fn index_set_labels_are_one_based(bits in 1u32..256) {
        let idx: Vec<usize> = (0..8).filter(|v| bits & (1 << v) != 0).collect();
        let set = IndexSet::new(idx.clone()).unwrap();
        let label: Vec<usize> = set.label().split(',').map(|s| s.parse().unwrap()).collect();
        prop_assert_eq!(label, idx.iter().map(|v| v + 1).collect::<Vec<_>>());
    }
}

#[test]
fn t_is_linear() {
    let omega = ProductDomain::unit_polydisk(2).unwrap();
    let suite = QuadratureSuite::uniform(omega, RuleSizes::new(8, 12)).unwrap();
    let f = manufacture_form(&parse("exp(conj(z1))*conj(z2)", 2).unwrap(), 2).unwrap();
    let g = manufacture_form(&parse("conj(z1)^2*z2 + sin(conj(z2))", 2).unwrap(), 2).unwrap();
    let (alpha, beta) = (c(0.5, -2.0), c(3.0, 1.0));
    let h = OneForm::combine(alpha, &f, beta, &g).unwrap();
    let pts = vec![vec![c(0.2, 0.1), c(-0.3, 0.4)]];
    let o = SolveOptions::default();
    let v = |x: &OneForm| solve_t(x, &pts, &suite, o).unwrap().points[0].value;
    let lhs = v(&h);
    let rhs = alpha * v(&f) + beta * v(&g);
    assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm());
}
