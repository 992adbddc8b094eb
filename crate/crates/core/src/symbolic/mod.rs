//! Small computer-algebra kernel over jet and momentum variables.

mod diff;
mod equiv;
mod eval;
mod expr;
mod format;
mod num;
mod parse;
mod simplify;

use std::collections::HashMap;

pub use diff::{differentiate, gradient};
pub use equiv::{
    check_equivalent, equivalent, proportional, sample_points, Equivalence, EQUIV_SAMPLES,
    EQUIV_SEED, EQUIV_TOL,
};
pub use eval::{evaluate, evaluate_with, EvalError, Scalar};
pub use expr::{Expr, Func, Node, VarKind, VarRef};
pub use format::format;
pub use num::Num;
pub use parse::{parse, ParseError};
pub use simplify::{simplify, EXPANSION_LIMIT};

/// Simultaneous substitution followed by simplification.
pub fn substitute(e: &Expr, bindings: &HashMap<VarRef, Expr>) -> Expr {
    simplify(&replace(e, bindings))
}

fn replace(e: &Expr, bindings: &HashMap<VarRef, Expr>) -> Expr {
    if bindings.is_empty() {
        return e.clone();
    }
    match e.node() {
        Node::Const(_) => e.clone(),
        Node::Var(v) => bindings.get(v).cloned().unwrap_or_else(|| e.clone()),
        Node::Sum(ts) => Expr::sum(ts.iter().map(|t| replace(t, bindings)).collect()),
        Node::Product(fs) => Expr::product(fs.iter().map(|f| replace(f, bindings)).collect()),
        Node::Pow(b, n) => Expr::pow(replace(b, bindings), *n),
        Node::Func(f, a) => Expr::func(*f, replace(a, bindings)),
        Node::Neg(a) => Expr::negate(replace(a, bindings)),
    }
}

/// Splits `e` as `Σ cᵢ·xᵢ + r` with every `cᵢ` and `r` free of `vars`.
/// Returns `None` when `e` is not affine in `vars`.
pub fn affine_parts(e: &Expr, vars: &[VarRef]) -> Option<(Vec<Expr>, Expr)> {
    let coeffs = gradient(e, vars);
    let free = |x: &Expr| vars.iter().all(|v| !x.contains_var(*v));
    if !coeffs.iter().all(free) {
        return None;
    }
    let mut terms = vec![e.clone()];
    for (c, v) in coeffs.iter().zip(vars) {
        terms.push(-(c * &Expr::var(*v)));
    }
    let rest = simplify(&Expr::sum(terms));
    free(&rest).then_some((coeffs, rest))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(text: &str) -> Expr {
        parse(text).unwrap()
    }

    #[test]
    fn substitution_examples() {
        let mut b = HashMap::new();
        b.insert(VarRef::q(1, 2), p("-p1_1"));
        assert_eq!(substitute(&p("-q1_2"), &b), simplify(&p("p1_1")));

        let e = p("q1_1 + 0*q1_3");
        assert_eq!(substitute(&e, &HashMap::new()), simplify(&e));

        let mut id = HashMap::new();
        id.insert(VarRef::q(1, 1), p("q1_1"));
        assert_eq!(substitute(&p("q1_1^2"), &id), simplify(&p("q1_1^2")));
    }

    #[test]
    fn substitution_is_simultaneous() {
        let mut b = HashMap::new();
        b.insert(VarRef::q(1, 0), p("q2_0"));
        b.insert(VarRef::q(2, 0), p("q1_0"));
        assert_eq!(
            substitute(&p("q1_0 - 2*q2_0"), &b),
            simplify(&p("q2_0 - 2*q1_0"))
        );
    }

    #[test]
    fn affine_split() {
        let vars = [VarRef::q(1, 2), VarRef::q(2, 2)];
        let (c, r) = affine_parts(&p("q1_0*q1_2 + 3*q2_2 - q1_1^2"), &vars).unwrap();
        assert_eq!(c, vec![simplify(&p("q1_0")), Expr::int(3)]);
        assert_eq!(r, simplify(&p("-q1_1^2")));
        assert!(affine_parts(&p("q1_2^2"), &vars).is_none());
        assert!(affine_parts(&p("q1_2*q2_2"), &vars).is_none());
    }
}
