//! Numeric evaluation over `f64` or exact big rationals.

use std::collections::HashMap;
use std::ops::{Add, Div, Mul, Neg};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use super::expr::{Expr, Func, Node, VarRef};
use super::num::Num;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable {0}")]
    UnboundVariable(VarRef),
    #[error("{func} is undefined at {arg}")]
    Domain { func: &'static str, arg: f64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} has no exact rational value")]
    NotRational(&'static str),
}

/// Number types an expression can be evaluated in.
pub trait Scalar:
    Clone
    + Zero
    + One
    + Add<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Div<Output = Self>
{
    fn from_num(c: &Num) -> Result<Self, EvalError>;
    fn apply(f: Func, x: Self) -> Result<Self, EvalError>;
    fn to_f64(&self) -> f64;
}

impl Scalar for f64 {
    fn from_num(c: &Num) -> Result<Self, EvalError> {
        Ok(c.to_f64())
    }

    fn apply(f: Func, x: f64) -> Result<f64, EvalError> {
        Ok(match f {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Exp => x.exp(),
            Func::Ln if x > 0.0 => x.ln(),
            Func::Sqrt if x >= 0.0 => x.sqrt(),
            Func::Ln | Func::Sqrt => {
                return Err(EvalError::Domain {
                    func: f.name(),
                    arg: x,
                })
            }
        })
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    fn from_num(c: &Num) -> Result<Self, EvalError> {
        match c {
            Num::Rational(r) => Ok(BigRational::new(
                BigInt::from(*r.numer()),
                BigInt::from(*r.denom()),
            )),
            Num::Float(f) => BigRational::from_float(*f).ok_or(EvalError::NotRational("float")),
        }
    }

    fn apply(f: Func, x: BigRational) -> Result<Self, EvalError> {
        match f {
            Func::Sin | Func::Sqrt if x.is_zero() => Ok(x),
            Func::Cos | Func::Exp if x.is_zero() => Ok(BigRational::one()),
            Func::Sqrt if x.is_one() => Ok(x),
            Func::Ln if x.is_one() => Ok(BigRational::zero()),
            _ => Err(EvalError::NotRational(f.name())),
        }
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

fn power<T: Scalar>(base: T, n: i64) -> Result<T, EvalError> {
    let mut acc = T::one();
    let mut sq = base.clone();
    let mut m = n.unsigned_abs();
    while m > 0 {
        if m & 1 == 1 {
            acc = acc * sq.clone();
        }
        m >>= 1;
        if m > 0 {
            sq = sq.clone() * sq;
        }
    }
    if n < 0 {
        if acc.is_zero() {
            return Err(EvalError::DivisionByZero);
        }
        acc = T::one() / acc;
    }
    Ok(acc)
}

/// Evaluates `e`, looking variables up through `lookup`.
pub fn evaluate_with<T, F>(e: &Expr, lookup: &F) -> Result<T, EvalError>
where
    T: Scalar,
    F: Fn(VarRef) -> Option<T>,
{
    match e.node() {
        Node::Const(c) => T::from_num(c),
        Node::Var(v) => lookup(*v).ok_or(EvalError::UnboundVariable(*v)),
        Node::Sum(ts) => {
            let mut acc = T::zero();
            for t in ts {
                acc = acc + evaluate_with(t, lookup)?;
            }
            Ok(acc)
        }
        Node::Product(fs) => {
            let mut acc = T::one();
            for f in fs {
                acc = acc * evaluate_with(f, lookup)?;
            }
            Ok(acc)
        }
        Node::Pow(b, n) => power(evaluate_with(b, lookup)?, *n),
        Node::Func(f, a) => T::apply(*f, evaluate_with(a, lookup)?),
        Node::Neg(a) => Ok(-evaluate_with(a, lookup)?),
    }
}

/// IEEE double evaluation under a total assignment.
pub fn evaluate(e: &Expr, assignment: &HashMap<VarRef, f64>) -> Result<f64, EvalError> {
    evaluate_with(e, &|v| assignment.get(&v).copied())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::parse::parse;

    fn at(text: &str, pairs: &[(VarRef, f64)]) -> Result<f64, EvalError> {
        let a: HashMap<_, _> = pairs.iter().copied().collect();
        evaluate(&parse(text).unwrap(), &a)
    }

    #[test]
    fn examples() {
        let (q1, q2, q3) = (VarRef::q(1, 1), VarRef::q(1, 2), VarRef::q(1, 3));
        assert_eq!(
            at("0.5*(q1_1^2 - q1_2^2)", &[(q1, 2.0), (q2, 0.0)]),
            Ok(2.0)
        );
        assert_eq!(at("q1_1 + q1_3", &[(q1, 1.0), (q3, -1.0)]), Ok(0.0));
        let h = "p1_0*q1_1 - 0.5*(q1_1^2 + p1_1^2)";
        let a = [
            (VarRef::q(1, 0), 0.0),
            (q1, 1.0),
            (VarRef::p(1, 0), 1.0),
            (VarRef::p(1, 1), 0.0),
        ];
        assert_eq!(at(h, &a), Ok(0.5));
    }

    #[test]
    fn errors() {
        assert_eq!(
            at("q1_1 + q1_3", &[(VarRef::q(1, 1), 1.0)]),
            Err(EvalError::UnboundVariable(VarRef::q(1, 3)))
        );
        assert!(matches!(
            at("ln(q1_0)", &[(VarRef::q(1, 0), -1.0)]),
            Err(EvalError::Domain { func: "ln", .. })
        ));
        assert!(matches!(
            at("sqrt(q1_0)", &[(VarRef::q(1, 0), -1.0)]),
            Err(EvalError::Domain { func: "sqrt", .. })
        ));
    }

    #[test]
    fn exact_rationals() {
        let e = parse("q1_0/3 + 1/6 - q1_0^-1").unwrap();
        let x = BigRational::new(BigInt::from(2), BigInt::from(1));
        let r: BigRational = evaluate_with(&e, &|_| Some(x.clone())).unwrap();
        assert_eq!(r, BigRational::new(BigInt::from(1), BigInt::from(3)));
        let zero = BigRational::zero();
        let err = evaluate_with::<BigRational, _>(&e, &|_| Some(zero.clone()));
        assert_eq!(err, Err(EvalError::DivisionByZero));
    }
}
