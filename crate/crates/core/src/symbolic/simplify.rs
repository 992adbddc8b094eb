//! Rule-based canonicalizer.
//!
//! Canonical form:
//! - `Sum`: flattened, at least two terms, like terms merged, at most one
//!   constant (placed last), terms ordered by their non-constant part.
//! - `Product`: flattened, at least two factors, at most one leading
//!   constant (never `0` or `1`), equal bases merged into integer powers.
//! - `Pow(b, n)`: `n ∉ {0, 1}`, `b` is neither a constant, a product nor a power.
//! - No `Neg` nodes.
//!
//! Products of sums and positive integer powers of sums are expanded as long
//! as the result stays below [`EXPANSION_LIMIT`] terms; `s^-n` is stored as
//! the reciprocal of the expanded `s^n` under the same limit. No trig
//! identities, no factoring.

use std::collections::BTreeMap;

use super::expr::{Expr, Func, Node};
use super::num::Num;

/// Maximum number of raw terms an expansion may produce.
pub const EXPANSION_LIMIT: usize = 4096;

pub fn simplify(e: &Expr) -> Expr {
    match e.node() {
        Node::Const(_) | Node::Var(_) => e.clone(),
        Node::Neg(a) => mul_all(vec![Expr::int(-1), simplify(a)]),
        Node::Func(f, a) => fold_func(*f, simplify(a)),
        Node::Pow(b, n) => pow_canon(simplify(b), *n),
        Node::Sum(xs) => add_all(xs.iter().map(simplify).collect()),
        Node::Product(xs) => mul_all(xs.iter().map(simplify).collect()),
    }
}

/// Splits a canonical term into `(coefficient, rest)`; `rest` is `None` for constants.
fn split_coeff(t: &Expr) -> (Num, Option<Expr>) {
    match t.node() {
        Node::Const(c) => (*c, None),
        Node::Product(fs) => match fs[0].as_const() {
            Some(c) => {
                let rest = if fs.len() == 2 {
                    fs[1].clone()
                } else {
                    Expr::product(fs[1..].to_vec())
                };
                (*c, Some(rest))
            }
            None => (Num::one(), Some(t.clone())),
        },
        _ => (Num::one(), Some(t.clone())),
    }
}

fn make_term(coeff: Num, rest: Expr) -> Expr {
    if coeff.is_one() {
        return rest;
    }
    match rest.node() {
        Node::Product(fs) => {
            let mut v = Vec::with_capacity(fs.len() + 1);
            v.push(Expr::constant(coeff));
            v.extend(fs.iter().cloned());
            Expr::product(v)
        }
        _ => Expr::product(vec![Expr::constant(coeff), rest]),
    }
}

/// Sum of canonical terms, returned canonical.
pub(crate) fn add_all(terms: Vec<Expr>) -> Expr {
    let mut constant = Num::zero();
    let mut collected: BTreeMap<Expr, Num> = BTreeMap::new();
    let mut stack = terms;
    while let Some(t) = stack.pop() {
        if let Node::Sum(inner) = t.node() {
            stack.extend(inner.iter().cloned());
            continue;
        }
        match split_coeff(&t) {
            (c, None) => constant = constant.add(&c),
            (c, Some(rest)) => {
                let slot = collected.entry(rest).or_insert_with(Num::zero);
                *slot = slot.add(&c);
            }
        }
    }
    let mut out: Vec<Expr> = collected
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(rest, c)| make_term(c, rest))
        .collect();
    if !constant.is_zero() {
        out.push(Expr::constant(constant));
    }
    match out.len() {
        0 => Expr::zero(),
        1 => out.pop().unwrap(),
        _ => Expr::sum(out),
    }
}

fn sum_terms(e: &Expr) -> Option<&[Expr]> {
    match e.node() {
        Node::Sum(ts) => Some(ts),
        _ => None,
    }
}

/// Product of canonical factors, returned canonical.
pub(crate) fn mul_all(factors: Vec<Expr>) -> Expr {
    let mut coeff = Num::one();
    let mut powers: BTreeMap<Expr, i64> = BTreeMap::new();
    let mut stack = factors;
    while let Some(f) = stack.pop() {
        match f.node() {
            Node::Const(c) => coeff = coeff.mul(c),
            Node::Product(inner) => stack.extend(inner.iter().cloned()),
            Node::Pow(b, n) if b.as_const().is_none() => {
                *powers.entry(b.clone()).or_insert(0) += n;
            }
            _ => *powers.entry(f.clone()).or_insert(0) += 1,
        }
    }
    if coeff.is_zero() {
        return Expr::zero();
    }
    powers.retain(|_, n| *n != 0);

    // `s^-n` with `n > 1` becomes `(expanded s^n)^-1`, matching `1/s^n`.
    let reciprocal = |b: &Expr, n: i64| n < -1 && expansion_fits(b, -n);
    if powers.iter().any(|(b, n)| reciprocal(b, *n)) {
        let mut factors = vec![Expr::constant(coeff)];
        for (b, n) in powers {
            if reciprocal(&b, n) {
                factors.push(pow_canon(mul_all(vec![Expr::pow(b, -n)]), -1));
            } else {
                factors.push(pow_factor(b, n));
            }
        }
        return mul_all(factors);
    }

    // Decide on expansion of positive powers of sums.
    let mut expanded_size: usize = 1;
    let mut has_sum = false;
    for (b, n) in &powers {
        if let (Some(ts), true) = (sum_terms(b), *n > 0) {
            has_sum = true;
            for _ in 0..*n {
                expanded_size = expanded_size.saturating_mul(ts.len());
            }
        }
    }
    if has_sum && expanded_size <= EXPANSION_LIMIT {
        let mut plain = vec![Expr::constant(coeff)];
        let mut sums: Vec<(Expr, i64)> = Vec::new();
        for (b, n) in powers {
            if sum_terms(&b).is_some() && n > 0 {
                sums.push((b, n));
            } else {
                plain.push(pow_factor(b, n));
            }
        }
        let mut partial = vec![mul_all(plain)];
        for (s, n) in sums {
            let ts = sum_terms(&s).unwrap().to_vec();
            for _ in 0..n {
                let mut next = Vec::with_capacity(partial.len() * ts.len());
                for a in &partial {
                    for t in &ts {
                        next.push(mul_all(vec![a.clone(), t.clone()]));
                    }
                }
                partial = next;
            }
        }
        return add_all(partial);
    }

    let mut out: Vec<Expr> = Vec::with_capacity(powers.len() + 1);
    if !coeff.is_one() {
        out.push(Expr::constant(coeff));
    }
    out.extend(powers.into_iter().map(|(b, n)| pow_factor(b, n)));
    match out.len() {
        0 => Expr::constant(coeff),
        1 => out.pop().unwrap(),
        _ => Expr::product(out),
    }
}

fn expansion_fits(base: &Expr, n: i64) -> bool {
    let Some(ts) = sum_terms(base) else {
        return false;
    };
    let mut size: usize = 1;
    for _ in 0..n {
        size = size.saturating_mul(ts.len());
        if size > EXPANSION_LIMIT {
            return false;
        }
    }
    true
}

fn pow_factor(base: Expr, n: i64) -> Expr {
    if n == 1 {
        base
    } else {
        Expr::pow(base, n)
    }
}

/// `base^n` for canonical `base`, returned canonical.
pub(crate) fn pow_canon(base: Expr, n: i64) -> Expr {
    if n == 0 {
        return Expr::one();
    }
    if n == 1 {
        return base;
    }
    match base.node() {
        Node::Const(c) => match c.powi(n) {
            Some(v) => Expr::constant(v),
            None => Expr::pow(base.clone(), n),
        },
        Node::Pow(b, m) => match m.checked_mul(n) {
            Some(mn) => pow_canon(b.clone(), mn),
            None => Expr::pow(base.clone(), n),
        },
        Node::Product(fs) => mul_all(fs.iter().map(|f| pow_canon(f.clone(), n)).collect()),
        _ => mul_all(vec![Expr::pow(base, n)]),
    }
}

fn fold_func(f: Func, arg: Expr) -> Expr {
    let exact = arg.as_const().filter(|c| c.is_exact());
    match (f, exact) {
        (Func::Sin, Some(c)) if c.is_zero() => Expr::zero(),
        (Func::Cos, Some(c)) if c.is_zero() => Expr::one(),
        (Func::Exp, Some(c)) if c.is_zero() => Expr::one(),
        (Func::Ln, Some(c)) if c.is_one() => Expr::zero(),
        (Func::Sqrt, Some(c)) if c.is_zero() || c.is_one() => arg,
        (Func::Ln, None) => match arg.node() {
            Node::Func(Func::Exp, inner) => inner.clone(),
            _ => Expr::func(f, arg),
        },
        _ => Expr::func(f, arg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::parse::parse;

    fn s(text: &str) -> Expr {
        simplify(&parse(text).unwrap())
    }

    #[test]
    fn zero_annihilation() {
        assert_eq!(s("q1_1 + 0*q1_2"), s("q1_1"));
    }

    #[test]
    fn like_term_cancellation() {
        assert_eq!(s("q1_3 + q1_1 - q1_1"), parse("q1_3").unwrap());
    }

    #[test]
    fn constant_folding() {
        assert_eq!(s("2*(0.5*q1_2)"), parse("q1_2").unwrap());
        assert_eq!(s("2 + 3*4 - 1/2"), Expr::ratio(27, 2));
    }

    #[test]
    fn negative_powers_of_sums_are_reciprocals() {
        assert_eq!(s("(q1_0 + 1)^-2"), s("1/(q1_0^2 + 2*q1_0 + 1)"));
        assert_eq!(s("1/(q1_0 + 1) * 1/(q1_0 + 1)"), s("1/((q1_0 + 1)^2)"));
        assert_eq!(s("(q1_0 + 1)^-2 * (q1_0 + 1)^2"), Expr::one());
    }

    #[test]
    fn powers_merge_and_vanish() {
        assert_eq!(
            s("q1_1*q1_1"),
            Expr::pow(Expr::var(crate::VarRef::q(1, 1)), 2)
        );
        assert_eq!(s("q1_1^3/q1_1^3"), Expr::one());
        assert_eq!(s("(q1_1^2)^3"), s("q1_1^6"));
        assert_eq!(s("q1_1^1"), s("q1_1"));
        assert_eq!(s("q1_1^0"), Expr::one());
    }

    #[test]
    fn expansion_merges_polynomials() {
        assert_eq!(s("(q1_1 + q1_2)^2"), s("q1_1^2 + 2*q1_1*q1_2 + q1_2^2"));
        assert_eq!(s("(-p1_1)^2"), s("p1_1^2"));
        assert_eq!(
            s("q1_1*(q1_1 + q1_3) + q1_2*(-q1_2) - 0.5*(q1_1^2 - q1_2^2)"),
            s("0.5*q1_1^2 + q1_1*q1_3 - 0.5*q1_2^2")
        );
    }

    #[test]
    fn no_neg_nodes_survive() {
        let e = s("-(-(q1_1))");
        assert_eq!(e, parse("q1_1").unwrap());
        let e = s("-q1_1");
        assert!(matches!(e.node(), Node::Product(_)));
    }

    #[test]
    fn function_folding_is_conservative() {
        assert_eq!(s("sin(0) + cos(0)"), Expr::one());
        assert_eq!(s("ln(exp(q1_0))"), s("q1_0"));
        assert!(matches!(
            s("exp(ln(q1_0))").node(),
            Node::Func(Func::Exp, _)
        ));
        assert!(matches!(
            s("sin(q1_0)^2 + cos(q1_0)^2").node(),
            Node::Sum(_)
        ));
    }

    #[test]
    fn idempotent_on_examples() {
        for text in [
            "q1_1 + q1_3",
            "0.5*(q1_1^2 - q1_2^2)",
            "p1_0*q1_1 - 0.5*(q1_1^2 + p1_1^2)",
            "(q1_0 + 1)^-2*(q1_0+1)^3",
            "sin(q1_0 + q1_0)*2/3",
            "exp(q2_1)^2*exp(q2_1)^-1",
        ] {
            let once = s(text);
            assert_eq!(simplify(&once), once, "{text}");
        }
    }
}
