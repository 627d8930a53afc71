//! Parallel and sequential execution give bit-identical results.

use dbar_core::exec::{is_parallel, set_parallel};
use dbar_core::expr::parse;
use dbar_core::forms::{manufacture_form, ProductDomain, SamplePlan};
use dbar_core::operator_t::{solve_t, SolveOptions};
use dbar_core::operator_ttilde::solve_ttilde;
use dbar_core::quadrature::{QuadratureSuite, RuleSizes};

#[test]
fn modes_agree_bitwise() {
    let omega = ProductDomain::unit_polydisk(2).unwrap();
    let suite = QuadratureSuite::uniform(omega.clone(), RuleSizes::new(8, 12)).unwrap();
    let f = manufacture_form(&parse("exp(conj(z1))*conj(z2)^2", 2).unwrap(), 2).unwrap();
    let pts = SamplePlan::random(4, 0.05, 17).resolve(&omega).unwrap();
    let o = SolveOptions::default();
    let run = || (solve_t(&f, &pts, &suite, o).unwrap(), solve_ttilde(&f, &pts, &suite, o).unwrap());
    let was = is_parallel();
    set_parallel(true);
    let par = run();
    set_parallel(false);
    let seq = run();
    set_parallel(was);
    assert_eq!(par, seq);
}
