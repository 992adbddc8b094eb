use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use super::num::Num;

/// Which family of coordinates a variable belongs to.
///
/// The declaration order is the total order used when sorting variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarKind {
    /// Jet coordinate `q^i_(j)`.
    Q,
    /// Momentum `p_i^(j)`.
    P,
    /// Fiber velocity `v^i_(j)` on `T T^(k-1) Q`.
    V,
    /// Lagrange multiplier `λ_i`; a nonzero level denotes its `j`-th time derivative.
    Lambda,
}

/// A typed variable handle. Ordered by kind, then index, then level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarRef {
    pub kind: VarKind,
    pub index: u32,
    pub level: u32,
}

impl VarRef {
    pub const fn new(kind: VarKind, index: u32, level: u32) -> Self {
        Self { kind, index, level }
    }

    pub const fn q(index: u32, level: u32) -> Self {
        Self::new(VarKind::Q, index, level)
    }

    pub const fn p(index: u32, level: u32) -> Self {
        Self::new(VarKind::P, index, level)
    }

    pub const fn v(index: u32, level: u32) -> Self {
        Self::new(VarKind::V, index, level)
    }

    pub const fn lambda(index: u32) -> Self {
        Self::new(VarKind::Lambda, index, 0)
    }

    pub const fn lambda_derivative(index: u32, level: u32) -> Self {
        Self::new(VarKind::Lambda, index, level)
    }

    /// Same variable, one derivative level higher.
    pub const fn raised(self) -> Self {
        Self::new(self.kind, self.index, self.level + 1)
    }
}

impl fmt::Display for VarRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            VarKind::Q => write!(f, "q{}_{}", self.index, self.level),
            VarKind::P => write!(f, "p{}_{}", self.index, self.level),
            VarKind::V => write!(f, "v{}_{}", self.index, self.level),
            VarKind::Lambda if self.level == 0 => write!(f, "lam{}", self.index),
            VarKind::Lambda => write!(f, "lam{}_{}", self.index, self.level),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

/// Expression node. The variant order doubles as the canonical sort order
/// of terms and factors, so keep it stable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Const(Num),
    Var(VarRef),
    Pow(Expr, i64),
    Product(Vec<Expr>),
    Sum(Vec<Expr>),
    Func(Func, Expr),
    Neg(Expr),
}

/// Immutable, cheaply clonable expression tree.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr(Arc<Node>);

impl Expr {
    pub fn from_node(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(value: impl Into<Num>) -> Self {
        Self::from_node(Node::Const(value.into()))
    }

    pub fn int(value: i64) -> Self {
        Self::constant(Num::int(value))
    }

    pub fn ratio(numer: i64, denom: i64) -> Self {
        Self::constant(Num::ratio(numer, denom))
    }

    pub fn float(value: f64) -> Self {
        Self::constant(Num::float(value))
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn var(v: VarRef) -> Self {
        Self::from_node(Node::Var(v))
    }

    pub fn sum(terms: Vec<Expr>) -> Self {
        Self::from_node(Node::Sum(terms))
    }

    pub fn product(factors: Vec<Expr>) -> Self {
        Self::from_node(Node::Product(factors))
    }

    pub fn pow(base: Expr, exp: i64) -> Self {
        Self::from_node(Node::Pow(base, exp))
    }

    pub fn func(f: Func, arg: Expr) -> Self {
        Self::from_node(Node::Func(f, arg))
    }

    pub fn sin(arg: Expr) -> Self {
        Self::func(Func::Sin, arg)
    }

    pub fn cos(arg: Expr) -> Self {
        Self::func(Func::Cos, arg)
    }

    pub fn exp(arg: Expr) -> Self {
        Self::func(Func::Exp, arg)
    }

    pub fn ln(arg: Expr) -> Self {
        Self::func(Func::Ln, arg)
    }

    pub fn sqrt(arg: Expr) -> Self {
        Self::func(Func::Sqrt, arg)
    }

    pub fn negate(arg: Expr) -> Self {
        Self::from_node(Node::Neg(arg))
    }

    pub fn as_const(&self) -> Option<&Num> {
        match self.node() {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<VarRef> {
        match self.node() {
            Node::Var(v) => Some(*v),
            _ => None,
        }
    }

    /// True when the tree is literally the constant zero (no simplification applied).
    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(Num::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(Num::is_one)
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self.node() {
            Node::Const(_) | Node::Var(_) => Vec::new(),
            Node::Pow(b, _) => vec![b],
            Node::Func(_, a) | Node::Neg(a) => vec![a],
            Node::Sum(xs) | Node::Product(xs) => xs.iter().collect(),
        }
    }

    /// All variables occurring in the tree, in canonical order.
    pub fn variables(&self) -> BTreeSet<VarRef> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<VarRef>) {
        if let Node::Var(v) = self.node() {
            out.insert(*v);
        }
        for c in self.children() {
            c.collect_vars(out);
        }
    }

    pub fn contains_var(&self, v: VarRef) -> bool {
        match self.node() {
            Node::Var(w) => *w == v,
            _ => self.children().into_iter().any(|c| c.contains_var(v)),
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self
            .children()
            .into_iter()
            .map(Expr::node_count)
            .sum::<usize>()
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", super::format::format(self))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::format::format(self))
    }
}

impl From<VarRef> for Expr {
    fn from(v: VarRef) -> Self {
        Expr::var(v)
    }
}

impl From<i64> for Expr {
    fn from(v: i64) -> Self {
        Expr::int(v)
    }
}

// Operator overloads build raw (unsimplified) trees.
impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::sum(vec![self, rhs])
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sum(vec![self, Expr::negate(rhs)])
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::product(vec![self, rhs])
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::product(vec![self, Expr::pow(rhs, -1)])
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::negate(self)
    }
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        self.clone() + rhs.clone()
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        self.clone() - rhs.clone()
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        self.clone() * rhs.clone()
    }
}

impl Div for &Expr {
    type Output = Expr;
    fn div(self, rhs: &Expr) -> Expr {
        self.clone() / rhs.clone()
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -self.clone()
    }
}
