//! Two-stage equality oracle.
//!
//! Stage one: `simplify(a - b)` is the constant zero.
//! Stage two: `|a - b| < 1e-9` at 32 assignments drawn uniformly from
//! `[-2, 2]` by a ChaCha8 generator seeded with [`EQUIV_SEED`]. Variables
//! are drawn in canonical order, one value per variable per sample.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::eval::{evaluate_with, EvalError};
use super::expr::{Expr, VarRef};
use super::simplify::simplify;

pub const EQUIV_SEED: u64 = 0x5EED;
pub const EQUIV_SAMPLES: usize = 32;
pub const EQUIV_TOL: f64 = 1e-9;
pub const EQUIV_RANGE: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub enum Equivalence {
    /// The simplified difference is the constant zero.
    Exact,
    /// All random samples agree.
    Sampled,
    /// A sample disagrees by `gap`.
    Different { gap: f64 },
    /// Evaluation failed at some sample.
    Inconclusive(EvalError),
}

impl Equivalence {
    pub fn holds(&self) -> bool {
        matches!(self, Equivalence::Exact | Equivalence::Sampled)
    }
}

/// Deterministic random assignments over `vars`.
pub fn sample_points(vars: &BTreeSet<VarRef>, count: usize, seed: u64) -> Vec<Vec<(VarRef, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            vars.iter()
                .map(|v| (*v, rng.gen_range(-EQUIV_RANGE..=EQUIV_RANGE)))
                .collect()
        })
        .collect()
}

fn lookup(point: &[(VarRef, f64)], v: VarRef) -> Option<f64> {
    point.iter().find(|(w, _)| *w == v).map(|(_, x)| *x)
}

pub fn check_equivalent(a: &Expr, b: &Expr) -> Equivalence {
    let diff = simplify(&(a - b));
    if diff.is_zero() {
        return Equivalence::Exact;
    }
    let mut vars = a.variables();
    vars.extend(b.variables());
    for point in sample_points(&vars, EQUIV_SAMPLES, EQUIV_SEED) {
        let value = |e: &Expr| evaluate_with::<f64, _>(e, &|v| lookup(&point, v));
        let gap = match (value(a), value(b)) {
            (Ok(x), Ok(y)) => (x - y).abs(),
            (Err(err), _) | (_, Err(err)) => return Equivalence::Inconclusive(err),
        };
        if !(gap < EQUIV_TOL) {
            return Equivalence::Different { gap };
        }
    }
    Equivalence::Sampled
}

pub fn equivalent(a: &Expr, b: &Expr) -> bool {
    check_equivalent(a, b).holds()
}

/// True when `a ≡ c·b` for some nonzero constant `c`.
pub fn proportional(a: &Expr, b: &Expr) -> bool {
    let sa = simplify(a);
    let sb = simplify(b);
    if sa.is_zero() || sb.is_zero() {
        return sa.is_zero() && sb.is_zero();
    }
    if equivalent(&sa, &sb) || equivalent(&sa, &-sb.clone()) {
        return true;
    }
    let mut vars = sa.variables();
    vars.extend(sb.variables());
    for point in sample_points(&vars, EQUIV_SAMPLES, EQUIV_SEED) {
        let value = |e: &Expr| evaluate_with::<f64, _>(e, &|v| lookup(&point, v));
        if let (Ok(x), Ok(y)) = (value(&sa), value(&sb)) {
            if y.abs() > 1e-6 && x.abs() > 1e-6 {
                let c = Expr::float(x / y);
                return equivalent(&sa, &(c * sb));
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::parse::parse;

    fn eq(a: &str, b: &str) -> Equivalence {
        check_equivalent(&parse(a).unwrap(), &parse(b).unwrap())
    }

    #[test]
    fn commutativity_is_exact() {
        assert_eq!(eq("q1_1+q1_3", "q1_3+q1_1"), Equivalence::Exact);
    }

    #[test]
    fn distinct_variables() {
        assert!(!eq("q1_1", "q1_2").holds());
    }

    #[test]
    fn pythagoras_needs_sampling() {
        assert_eq!(eq("sin(q1_0)^2+cos(q1_0)^2", "1"), Equivalence::Sampled);
    }

    #[test]
    fn domain_errors_are_inconclusive() {
        let v = eq(
            "ln(q1_0)",
            "ln(q1_0) + 0*q1_1 + sin(q1_0)^2 + cos(q1_0)^2 - 1",
        );
        assert!(matches!(v, Equivalence::Inconclusive(_)));
        assert!(!v.holds());
    }

    #[test]
    fn sign_and_scale() {
        let a = parse("-(q1_4 + q1_2)").unwrap();
        let b = parse("q1_4 + q1_2").unwrap();
        assert!(!equivalent(&a, &b));
        assert!(proportional(&a, &b));
        assert!(proportional(
            &parse("3*q1_0 + 1.5").unwrap(),
            &parse("2*q1_0 + 1").unwrap()
        ));
        assert!(!proportional(
            &parse("q1_0").unwrap(),
            &parse("q1_0 + 1").unwrap()
        ));
    }
}
