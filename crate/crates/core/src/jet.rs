//! Charts on the jet, tangent and cotangent bundles, the Tulczyjew
//! derivation `d_T`, holonomy constraints and analytic test curves.
//!
//! State vectors are ordered block by block. Inside a block the derivative
//! level `j` is the outer index and the degree of freedom `i` the inner one,
//! so coordinate `(i, j)` of a block sits at offset `j*n + (i-1)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::symbolic::{differentiate, simplify, Expr, VarKind, VarRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChartKind {
    /// `T^(m)Q`: `q_(0..m)`.
    JetQ(u32),
    /// `T T^(k-1)Q`: `q_(0..k-1)`, `v_(0..k-1)`.
    TanJet(u32),
    /// `T* T^(k-1)Q`: `q_(0..k-1)`, `p^(0..k-1)`.
    CotJet(u32),
    /// `T T* T^(k-1)Q`: `q`, `p`, `q̇`, `ṗ`.
    TanCotJet(u32),
    /// `T* T T^(k-1)Q`: `q`, `v`, `p`, `p̃`.
    CotTanJet(u32),
    /// `T* T* T^(k-1)Q`: `q`, `p`, and their conjugates `cq`, `cp`.
    CotCotJet(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Chart {
    pub kind: ChartKind,
    pub n: u32,
}

impl Chart {
    pub fn new(kind: ChartKind, n: u32) -> Self {
        Chart { kind, n }
    }

    pub fn jet(m: u32, n: u32) -> Self {
        Chart::new(ChartKind::JetQ(m), n)
    }

    pub fn tan_jet(k: u32, n: u32) -> Self {
        Chart::new(ChartKind::TanJet(k), n)
    }

    pub fn cot_jet(k: u32, n: u32) -> Self {
        Chart::new(ChartKind::CotJet(k), n)
    }

    pub fn tan_cot_jet(k: u32, n: u32) -> Self {
        Chart::new(ChartKind::TanCotJet(k), n)
    }

    pub fn cot_tan_jet(k: u32, n: u32) -> Self {
        Chart::new(ChartKind::CotTanJet(k), n)
    }

    pub fn cot_cot_jet(k: u32, n: u32) -> Self {
        Chart::new(ChartKind::CotCotJet(k), n)
    }

    /// Block prefixes and the number of levels per block.
    fn blocks(&self) -> (Vec<&'static str>, u32) {
        match self.kind {
            ChartKind::JetQ(m) => (vec!["q"], m + 1),
            ChartKind::TanJet(k) => (vec!["q", "v"], k),
            ChartKind::CotJet(k) => (vec!["q", "p"], k),
            ChartKind::TanCotJet(k) => (vec!["q", "p", "qdot", "pdot"], k),
            ChartKind::CotTanJet(k) => (vec!["q", "v", "p", "pt"], k),
            ChartKind::CotCotJet(k) => (vec!["q", "p", "cq", "cp"], k),
        }
    }

    /// Number of levels in each block.
    pub fn levels(&self) -> u32 {
        self.blocks().1
    }

    pub fn dim(&self) -> usize {
        let (names, levels) = self.blocks();
        names.len() * (levels * self.n) as usize
    }

    /// Offset of coordinate `(i, j)` (1-based `i`) within block `block`.
    pub fn offset(&self, block: usize, i: u32, j: u32) -> usize {
        let per_block = (self.levels() * self.n) as usize;
        block * per_block + (j * self.n + (i - 1)) as usize
    }

    /// Coordinate names in state-vector order.
    pub fn names(&self) -> Vec<String> {
        let (prefixes, levels) = self.blocks();
        let mut out = Vec::with_capacity(self.dim());
        for prefix in prefixes {
            for j in 0..levels {
                for i in 1..=self.n {
                    out.push(format!("{prefix}{i}_{j}"));
                }
            }
        }
        out
    }

    /// Expression variables for charts whose coordinates have one.
    pub fn vars(&self) -> Option<Vec<VarRef>> {
        let kinds: &[VarKind] = match self.kind {
            ChartKind::JetQ(_) => &[VarKind::Q],
            ChartKind::TanJet(_) => &[VarKind::Q, VarKind::V],
            ChartKind::CotJet(_) => &[VarKind::Q, VarKind::P],
            _ => return None,
        };
        let mut out = Vec::with_capacity(self.dim());
        for kind in kinds {
            for j in 0..self.levels() {
                for i in 1..=self.n {
                    out.push(VarRef::new(*kind, i, j));
                }
            }
        }
        Some(out)
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (name, order) = match self.kind {
            ChartKind::JetQ(m) => ("JetQ", m),
            ChartKind::TanJet(k) => ("TanJet", k),
            ChartKind::CotJet(k) => ("CotJet", k),
            ChartKind::TanCotJet(k) => ("TanCotJet", k),
            ChartKind::CotTanJet(k) => ("CotTanJet", k),
            ChartKind::CotCotJet(k) => ("CotCotJet", k),
        };
        write!(f, "{name}({order}), n={}", self.n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatePoint {
    pub chart: Chart,
    pub values: Vec<f64>,
}

impl StatePoint {
    pub fn new(chart: Chart, values: Vec<f64>) -> Result<Self> {
        if values.len() != chart.dim() {
            return Err(Error::DimensionMismatch {
                expected: chart.dim(),
                found: values.len(),
            });
        }
        Ok(StatePoint { chart, values })
    }

    pub fn expect_chart(&self, chart: Chart) -> Result<()> {
        if self.chart != chart {
            return Err(Error::ChartMismatch {
                expected: chart.to_string(),
                found: self.chart.to_string(),
            });
        }
        Ok(())
    }

    /// Coordinate `(i, j)` of block `block`.
    pub fn get(&self, block: usize, i: u32, j: u32) -> f64 {
        self.values[self.chart.offset(block, i, j)]
    }

    /// Value lookup for the chart's expression variables.
    pub fn lookup(&self, v: VarRef) -> Option<f64> {
        let block = match (self.chart.kind, v.kind) {
            (ChartKind::JetQ(_), VarKind::Q)
            | (ChartKind::TanJet(_), VarKind::Q)
            | (ChartKind::CotJet(_), VarKind::Q) => 0,
            (ChartKind::TanJet(_), VarKind::V) | (ChartKind::CotJet(_), VarKind::P) => 1,
            _ => return None,
        };
        if v.index == 0 || v.index > self.chart.n || v.level >= self.chart.levels() {
            return None;
        }
        Some(self.get(block, v.index, v.level))
    }
}

/// `d/dt` applied to every variable of `e`, raising `Q` and `Lambda`
/// levels by one. No validation.
pub(crate) fn total_derivative(e: &Expr) -> Expr {
    let terms = e
        .variables()
        .into_iter()
        .map(|v| Expr::var(v.raised()) * differentiate(e, v))
        .collect();
    simplify(&Expr::sum(terms))
}

/// Tulczyjew derivation `d_T e = Σ q_(j+1) ∂e/∂q_(j)` on `T^(order_bound)Q`.
pub fn tulczyjew_derivative(e: &Expr, order_bound: u32) -> Result<Expr> {
    for v in e.variables() {
        if v.kind != VarKind::Q {
            return Err(Error::NonJetVariable(v));
        }
        if v.level > order_bound {
            return Err(Error::LevelExceedsBound {
                var: v,
                bound: order_bound,
            });
        }
    }
    Ok(total_derivative(e))
}

/// `d_T` applied `j` times, starting on `T^(order_bound)Q`.
pub fn iterated_dt(e: &Expr, j: u32, order_bound: u32) -> Result<Expr> {
    let mut out = simplify(e);
    for step in 0..j {
        out = tulczyjew_derivative(&out, order_bound + step)?;
    }
    Ok(out)
}

/// `v_(j) - q_(j+1)` for `j = 0..k-2`, in chart order.
pub fn holonomy_residual(k: u32, n: u32, point: &StatePoint) -> Result<Vec<f64>> {
    point.expect_chart(Chart::tan_jet(k, n))?;
    let mut out = Vec::with_capacity(((k.saturating_sub(1)) * n) as usize);
    for j in 0..k.saturating_sub(1) {
        for i in 1..=n {
            out.push(point.get(1, i, j) - point.get(0, i, j + 1));
        }
    }
    Ok(out)
}

/// Building blocks of analytic test curves, closed under differentiation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// `t^p` with `p ≤ 3`.
    Power(u32),
    Sin,
    Cos,
}

impl Basis {
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name.trim() {
            "1" => Basis::Power(0),
            "t" => Basis::Power(1),
            "t^2" => Basis::Power(2),
            "t^3" => Basis::Power(3),
            "sin" | "sin(t)" => Basis::Sin,
            "cos" | "cos(t)" => Basis::Cos,
            other => return Err(Error::UnsupportedBasis(other.to_string())),
        })
    }

    /// `j`-th derivative at `t`.
    pub fn derivative(self, j: u32, t: f64) -> f64 {
        match self {
            Basis::Power(p) if j > p => 0.0,
            Basis::Power(p) => {
                let falling: f64 = (p - j + 1..=p).map(f64::from).product();
                falling * t.powi((p - j) as i32)
            }
            Basis::Sin => match j % 4 {
                0 => t.sin(),
                1 => t.cos(),
                2 => -t.sin(),
                _ => -t.cos(),
            },
            Basis::Cos => match j % 4 {
                0 => t.cos(),
                1 => -t.sin(),
                2 => -t.cos(),
                _ => t.sin(),
            },
        }
    }
}

/// A curve in `Q` given per degree of freedom as a linear combination of [`Basis`] terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub components: Vec<Vec<(f64, Basis)>>,
}

impl Curve {
    pub fn new(components: Vec<Vec<(f64, Basis)>>) -> Result<Self> {
        for term in components.iter().flatten() {
            if let (_, Basis::Power(p)) = term {
                if *p > 3 {
                    return Err(Error::UnsupportedBasis(format!("t^{p}")));
                }
            }
        }
        Ok(Curve { components })
    }

    /// `c1 + c2 t + c3 sin t + c4 cos t` for each degree of freedom.
    pub fn javelin(coeffs: &[[f64; 4]]) -> Self {
        Curve {
            components: coeffs
                .iter()
                .map(|c| {
                    vec![
                        (c[0], Basis::Power(0)),
                        (c[1], Basis::Power(1)),
                        (c[2], Basis::Sin),
                        (c[3], Basis::Cos),
                    ]
                })
                .collect(),
        }
    }

    pub fn dof(&self) -> u32 {
        self.components.len() as u32
    }

    /// `j`-th time derivative of component `i` (1-based).
    pub fn derivative(&self, i: u32, j: u32, t: f64) -> f64 {
        self.components[(i - 1) as usize]
            .iter()
            .map(|(c, b)| c * b.derivative(j, t))
            .sum()
    }

    /// The lift to `T^(m)Q` at time `t`.
    pub fn lift(&self, m: u32, t: f64) -> StatePoint {
        let n = self.dof();
        let mut values = Vec::with_capacity(((m + 1) * n) as usize);
        for j in 0..=m {
            for i in 1..=n {
                values.push(self.derivative(i, j, t));
            }
        }
        StatePoint {
            chart: Chart::jet(m, n),
            values,
        }
    }
}

/// The prolongation `t ↦ γ^(m)(t)` of a test curve.
#[derive(Debug, Clone)]
pub struct Prolongation {
    pub curve: Curve,
    pub m: u32,
}

impl Prolongation {
    pub fn at(&self, t: f64) -> StatePoint {
        self.curve.lift(self.m, t)
    }
}

pub fn prolong_polynomial_curve(
    components: Vec<Vec<(f64, Basis)>>,
    m: u32,
) -> Result<Prolongation> {
    Ok(Prolongation {
        curve: Curve::new(components)?,
        m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::parse;

    fn p(text: &str) -> Expr {
        simplify(&parse(text).unwrap())
    }

    #[test]
    fn chart_dimensions_and_names() {
        assert_eq!(Chart::jet(3, 2).dim(), 8);
        assert_eq!(Chart::tan_jet(2, 3).dim(), 12);
        assert_eq!(Chart::cot_jet(2, 3).dim(), 12);
        assert_eq!(Chart::tan_cot_jet(2, 3).dim(), 24);
        assert_eq!(Chart::cot_tan_jet(2, 3).dim(), 24);
        assert_eq!(
            Chart::cot_jet(2, 2).names(),
            ["q1_0", "q2_0", "q1_1", "q2_1", "p1_0", "p2_0", "p1_1", "p2_1"]
        );
        assert_eq!(
            Chart::tan_cot_jet(1, 1).names(),
            ["q1_0", "p1_0", "qdot1_0", "pdot1_0"]
        );
    }

    #[test]
    fn derivation_examples() {
        assert_eq!(tulczyjew_derivative(&p("q1_0"), 0).unwrap(), p("q1_1"));
        assert_eq!(tulczyjew_derivative(&p("-q1_2"), 2).unwrap(), p("-q1_3"));
        assert_eq!(
            tulczyjew_derivative(&p("q1_0*q2_0"), 0).unwrap(),
            p("q1_1*q2_0 + q1_0*q2_1")
        );
        assert_eq!(iterated_dt(&p("q1_0"), 2, 0).unwrap(), p("q1_2"));
        assert_eq!(iterated_dt(&p("-q1_2"), 2, 2).unwrap(), p("-q1_4"));
        assert_eq!(
            iterated_dt(&p("q1_0*sin(q1_1)"), 0, 1).unwrap(),
            p("q1_0*sin(q1_1)")
        );
    }

    #[test]
    fn derivation_rejects_non_jet_input() {
        assert!(matches!(
            tulczyjew_derivative(&p("p1_0*q1_1"), 2),
            Err(Error::NonJetVariable(_))
        ));
        assert!(matches!(
            tulczyjew_derivative(&p("q1_3"), 2),
            Err(Error::LevelExceedsBound { .. })
        ));
    }

    #[test]
    fn holonomy_examples() {
        let c = Chart::tan_jet(2, 1);
        let on = StatePoint::new(c, vec![0.0, 3.0, 3.0, 7.0]).unwrap();
        assert_eq!(holonomy_residual(2, 1, &on).unwrap(), vec![0.0]);
        let off = StatePoint::new(c, vec![0.0, 3.0, 2.0, 7.0]).unwrap();
        assert_eq!(holonomy_residual(2, 1, &off).unwrap(), vec![-1.0]);
        let first = StatePoint::new(Chart::tan_jet(1, 1), vec![1.0, 2.0]).unwrap();
        assert!(holonomy_residual(1, 1, &first).unwrap().is_empty());
        assert!(holonomy_residual(2, 1, &first).is_err());
    }

    #[test]
    fn curve_lifts() {
        let sq = prolong_polynomial_curve(vec![vec![(1.0, Basis::Power(2))]], 3).unwrap();
        assert_eq!(sq.at(1.5).values, vec![2.25, 3.0, 2.0, 0.0]);
        let s = prolong_polynomial_curve(vec![vec![(1.0, Basis::Sin)]], 3).unwrap();
        assert_eq!(s.at(0.0).values, vec![0.0, 1.0, 0.0, -1.0]);
        assert!(Basis::from_name("t^4").is_err());
        assert!(Curve::new(vec![vec![(1.0, Basis::Power(5))]]).is_err());
    }

    #[test]
    fn javelin_family_solves_fourth_order_equation() {
        let g = Curve::javelin(&[[0.3, -1.2, 0.7, 2.0]]);
        for t in [0.0, 0.4, 1.3, 7.9] {
            let x = g.lift(4, t);
            assert!((x.values[4] + x.values[2]).abs() < 1e-12);
        }
    }
}
