//! Deterministic, re-parseable printer.

use super::expr::{Expr, Node};
use super::num::Num;

const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

pub fn format(e: &Expr) -> String {
    match e.node() {
        Node::Const(c) => c.to_string(),
        Node::Var(v) => v.to_string(),
        Node::Func(f, a) => format!("{}({})", f.name(), format(a)),
        Node::Neg(a) => format!("-{}", wrap(a, UNARY)),
        Node::Pow(b, n) if *n < 0 => format!("1/{}", power_text(b, -n)),
        Node::Pow(b, n) => power_text(b, *n),
        Node::Product(fs) => product_text(fs),
        Node::Sum(ts) => sum_text(ts),
    }
}

fn power_text(base: &Expr, n: i64) -> String {
    if n == 1 {
        wrap(base, POWER)
    } else {
        format!("{}^{}", wrap(base, ATOM), n)
    }
}

fn const_precedence(c: &Num) -> u8 {
    let text = c.to_string();
    if text.contains('/') {
        PRODUCT
    } else if c.is_negative() {
        UNARY
    } else {
        ATOM
    }
}

fn precedence(e: &Expr) -> u8 {
    match e.node() {
        Node::Const(c) => const_precedence(c),
        Node::Var(_) | Node::Func(..) => ATOM,
        Node::Pow(_, n) if *n < 0 => PRODUCT,
        Node::Pow(..) => POWER,
        Node::Neg(_) => UNARY,
        Node::Product(_) => PRODUCT,
        Node::Sum(_) => SUM,
    }
}

fn wrap(e: &Expr, min: u8) -> String {
    let text = format(e);
    if precedence(e) >= min {
        text
    } else {
        format!("({text})")
    }
}

fn product_text(fs: &[Expr]) -> String {
    let mut out = String::new();
    let mut rest = fs;
    if let Some(c) = fs.first().and_then(Expr::as_const) {
        if fs.len() > 1 && c.neg().is_one() {
            out.push('-');
            rest = &fs[1..];
        }
    }
    let mut numer: Vec<String> = Vec::new();
    let mut denom: Vec<String> = Vec::new();
    for (idx, f) in rest.iter().enumerate() {
        match f.node() {
            Node::Pow(b, n) if *n < 0 => denom.push(power_text(b, -n)),
            Node::Const(_) if idx == 0 && out.is_empty() => numer.push(format(f)),
            _ if idx == 0 && out.is_empty() => numer.push(wrap(f, UNARY)),
            _ => numer.push(wrap(f, POWER)),
        }
    }
    if numer.is_empty() {
        numer.push("1".to_string());
    }
    out.push_str(&numer.join("*"));
    for d in denom {
        out.push('/');
        out.push_str(&d);
    }
    out
}

/// If `t` prints with a leading minus sign, returns the text of `-t`.
fn negated_text(t: &Expr) -> Option<String> {
    match t.node() {
        Node::Const(c) if c.is_negative() => Some(Expr::constant(c.neg()).to_string()),
        Node::Neg(a) => Some(wrap(a, PRODUCT)),
        Node::Product(fs) => {
            let c = fs[0].as_const()?;
            if !c.is_negative() {
                return None;
            }
            let flipped = c.neg();
            let mut v: Vec<Expr> = Vec::with_capacity(fs.len());
            if !flipped.is_one() {
                v.push(Expr::constant(flipped));
            }
            v.extend(fs[1..].iter().cloned());
            Some(if v.len() == 1 {
                wrap(&v[0], PRODUCT)
            } else {
                product_text(&v)
            })
        }
        _ => None,
    }
}

fn sum_text(ts: &[Expr]) -> String {
    let mut out = String::new();
    for (idx, t) in ts.iter().enumerate() {
        if idx == 0 {
            out.push_str(&wrap(t, PRODUCT));
            continue;
        }
        match negated_text(t) {
            Some(text) => {
                out.push_str(" - ");
                out.push_str(&text);
            }
            None => {
                out.push_str(" + ");
                out.push_str(&wrap(t, PRODUCT));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{parse::parse, simplify::simplify, VarRef};

    fn canon(text: &str) -> String {
        format(&simplify(&parse(text).unwrap()))
    }

    #[test]
    fn basic_shapes() {
        let e = Expr::sum(vec![Expr::var(VarRef::q(1, 1)), Expr::var(VarRef::q(1, 3))]);
        assert_eq!(format(&e), "q1_1 + q1_3");
        assert_eq!(format(&Expr::zero()), "0");
    }

    #[test]
    fn canonical_printing() {
        assert_eq!(canon("-q1_2"), "-q1_2");
        assert_eq!(canon("q1_3 + q1_1"), "q1_1 + q1_3");
        assert_eq!(canon("0.5*(q1_1^2 - q1_2^2)"), "0.5*q1_1^2 - 0.5*q1_2^2");
        assert_eq!(canon("q1_1/3"), "1/3*q1_1");
        assert_eq!(canon("1/q1_1^2"), "1/q1_1^2");
        assert_eq!(canon("2/(q1_1 + 1)"), "2/(q1_1 + 1)");
        assert_eq!(canon("-(q1_0 + 1)^-1"), "-1/(q1_0 + 1)");
        assert_eq!(canon("1 - q1_0"), "-q1_0 + 1");
    }

    #[test]
    fn raw_trees_reparse() {
        for text in [
            "-(q1_1 + q1_2)",
            "(-2)^3",
            "q1_1 - (q1_2 - q1_3)",
            "q1_1*(q1_2 + 1)^2",
            "2/(1/3)",
            "sin(-q1_0)^2",
            "-1.5e-7*q1_0",
            "q1_0^-1*q1_1",
        ] {
            let e = parse(text).unwrap();
            let again = parse(&format(&e)).unwrap();
            assert_eq!(simplify(&again), simplify(&e), "{text} -> {}", format(&e));
        }
    }
}
