use super::expr::{Expr, Func, Node, VarRef};
use super::num::Num;
use super::simplify::{add_all, mul_all, pow_canon, simplify};

/// Partial derivative of `e` with respect to `v`, in canonical form.
pub fn differentiate(e: &Expr, v: VarRef) -> Expr {
    if !e.contains_var(v) {
        return Expr::zero();
    }
    derive(&simplify(e), v)
}

// `e` must be canonical; the result is canonical.
fn derive(e: &Expr, v: VarRef) -> Expr {
    if !e.contains_var(v) {
        return Expr::zero();
    }
    match e.node() {
        Node::Const(_) => Expr::zero(),
        Node::Var(w) => {
            if *w == v {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Sum(ts) => add_all(ts.iter().map(|t| derive(t, v)).collect()),
        Node::Product(fs) => {
            let mut terms = Vec::new();
            for (i, f) in fs.iter().enumerate() {
                let df = derive(f, v);
                if df.is_zero() {
                    continue;
                }
                let mut factors: Vec<Expr> = fs.to_vec();
                factors[i] = df;
                terms.push(mul_all(factors));
            }
            add_all(terms)
        }
        Node::Pow(b, n) => mul_all(vec![
            Expr::int(*n),
            pow_canon(b.clone(), n - 1),
            derive(b, v),
        ]),
        Node::Func(f, a) => {
            let outer = match f {
                Func::Sin => Expr::cos(a.clone()),
                Func::Cos => mul_all(vec![Expr::int(-1), Expr::sin(a.clone())]),
                Func::Exp => e.clone(),
                Func::Ln => pow_canon(a.clone(), -1),
                Func::Sqrt => mul_all(vec![
                    Expr::constant(Num::ratio(1, 2)),
                    pow_canon(e.clone(), -1),
                ]),
            };
            mul_all(vec![outer, derive(a, v)])
        }
        Node::Neg(a) => mul_all(vec![Expr::int(-1), derive(a, v)]),
    }
}

/// Gradient with respect to each of `vars`, in order.
pub fn gradient(e: &Expr, vars: &[VarRef]) -> Vec<Expr> {
    let canon = simplify(e);
    vars.iter().map(|v| derive(&canon, *v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::parse::parse;

    fn d(text: &str, v: VarRef) -> Expr {
        differentiate(&parse(text).unwrap(), v)
    }

    fn p(text: &str) -> Expr {
        simplify(&parse(text).unwrap())
    }

    #[test]
    fn javelin_top_momentum() {
        assert_eq!(d("0.5*(q1_1^2 - q1_2^2)", VarRef::q(1, 2)), p("-q1_2"));
    }

    #[test]
    fn independent_variable() {
        assert_eq!(d("q1_1", VarRef::q(1, 0)), Expr::zero());
    }

    #[test]
    fn hamiltonian_partial() {
        let h = "p1_0*q1_1 - 0.5*(q1_1^2 + p1_1^2)";
        assert_eq!(d(h, VarRef::p(1, 1)), p("-p1_1"));
        assert_eq!(d(h, VarRef::p(1, 0)), p("q1_1"));
        assert_eq!(d(h, VarRef::q(1, 1)), p("p1_0 - q1_1"));
    }

    #[test]
    fn chain_rules() {
        let x = VarRef::q(1, 0);
        assert_eq!(d("sin(q1_0^2)", x), p("2*q1_0*cos(q1_0^2)"));
        assert_eq!(d("cos(q1_0)", x), p("-sin(q1_0)"));
        assert_eq!(d("exp(2*q1_0)", x), p("2*exp(2*q1_0)"));
        assert_eq!(d("ln(q1_0)", x), p("1/q1_0"));
        assert_eq!(d("sqrt(q1_0)", x), p("0.5/sqrt(q1_0)"));
        assert_eq!(d("1/(1 + q1_0)", x), p("-(1 + q1_0)^-2"));
    }

    #[test]
    fn non_canonical_input() {
        assert_eq!(d("-(q1_0*q1_0)", VarRef::q(1, 0)), p("-2*q1_0"));
    }
}
