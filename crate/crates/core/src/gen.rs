//! Seeded random formulas for sampling-based tests.

use rand::Rng;

use crate::formula::Formula;

/// A random formula over `vars` of AST depth at most `depth`, built from
/// the primitive connectives only.
pub fn random_formula(rng: &mut impl Rng, depth: usize, vars: &[&str]) -> Formula {
    assert!(!vars.is_empty(), "need at least one variable");
    if depth == 0 || rng.gen_bool(0.2) {
        return Formula::var(vars[rng.gen_range(0..vars.len())]);
    }
    let d = depth - 1;
    match rng.gen_range(0..10) {
        0..=1 => Formula::neg(random_formula(rng, d, vars)),
        2..=4 => Formula::imp(random_formula(rng, d, vars), random_formula(rng, d, vars)),
        5..=6 => Formula::boxed(random_formula(rng, d, vars)),
        _ => Formula::rhd(random_formula(rng, d, vars), random_formula(rng, d, vars)),
    }
}

/// The IL axiom schemes, instantiated with the given formulas.
pub fn il_axioms(a: &Formula, b: &Formula, c: &Formula) -> Vec<(&'static str, Formula)> {
    let (a, b, c) = (a.clone(), b.clone(), c.clone());
    let bx = Formula::boxed;
    let imp = Formula::imp;
    let rhd = Formula::rhd;
    let and = Formula::and;
    vec![
        (
            "L1",
            imp(
                bx(imp(a.clone(), b.clone())),
                imp(bx(a.clone()), bx(b.clone())),
            ),
        ),
        ("L2", imp(bx(imp(bx(a.clone()), a.clone())), bx(a.clone()))),
        (
            "J1",
            imp(bx(imp(a.clone(), b.clone())), rhd(a.clone(), b.clone())),
        ),
        (
            "J2",
            imp(
                and(rhd(a.clone(), b.clone()), rhd(b.clone(), c.clone())),
                rhd(a.clone(), c.clone()),
            ),
        ),
        (
            "J3",
            imp(
                and(rhd(a.clone(), c.clone()), rhd(b.clone(), c.clone())),
                rhd(Formula::or(a.clone(), b.clone()), c.clone()),
            ),
        ),
        (
            "J4",
            imp(
                rhd(a.clone(), b.clone()),
                imp(Formula::diamond(a.clone()), Formula::diamond(b)),
            ),
        ),
        ("J5", rhd(Formula::diamond(a.clone()), a)),
    ]
}
