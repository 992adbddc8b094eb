//! Quantities derived from a kth-order Lagrangian `L(q_(0), ..., q_(k))`.

use crate::error::{Error, Result};
use crate::jet::{total_derivative, Chart, StatePoint};
use crate::linalg;
use crate::symbolic::{
    differentiate, evaluate_with, parse, simplify, EvalError, Expr, Scalar, VarKind, VarRef,
};

/// Absolute threshold on the row-scaled Hessian determinant.
pub const REGULARITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianSystem {
    n: u32,
    k: u32,
    lagrangian: Expr,
    multipliers: u32,
}

/// `p̂^(r)_i` for `i = 1..n`, `r = 0..k-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentaTable {
    pub n: u32,
    pub k: u32,
    entries: Vec<Vec<Expr>>,
}

impl MomentaTable {
    /// `p̂^(r)_i`, with 1-based `i`.
    pub fn get(&self, i: u32, r: u32) -> &Expr {
        &self.entries[(i - 1) as usize][r as usize]
    }

    /// Entries in `CotJet` momentum order (`r` outer, `i` inner).
    pub fn in_chart_order(&self) -> Vec<Expr> {
        let mut out = Vec::with_capacity((self.n * self.k) as usize);
        for r in 0..self.k {
            for i in 1..=self.n {
                out.push(self.get(i, r).clone());
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularity {
    pub regular: bool,
    /// Plain determinant of the highest Hessian.
    pub det: f64,
    /// Determinant after row scaling; this is what the threshold applies to.
    pub scaled_det: f64,
}

/// Value of `v` in a `JetQ` state vector with `n` dofs. Multipliers read as zero.
pub(crate) fn jet_value<T: Scalar>(values: &[T], n: u32, v: VarRef) -> Option<T> {
    match v.kind {
        VarKind::Q if v.index >= 1 && v.index <= n => {
            values.get((v.level * n + v.index - 1) as usize).cloned()
        }
        VarKind::Lambda => Some(T::zero()),
        _ => None,
    }
}

pub(crate) fn eval_on_jet<T: Scalar>(e: &Expr, values: &[T], n: u32) -> Result<T, EvalError> {
    evaluate_with(e, &|v| jet_value(values, n, v))
}

impl LagrangianSystem {
    pub fn new(n: u32, k: u32, lagrangian: Expr) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(Error::InvalidSystem(
                "dof count and order must be at least 1".into(),
            ));
        }
        for v in lagrangian.variables() {
            check_jet_var(v, n, k)?;
        }
        Ok(LagrangianSystem {
            n,
            k,
            lagrangian: simplify(&lagrangian),
            multipliers: 0,
        })
    }

    pub fn parse(n: u32, k: u32, text: &str) -> Result<Self> {
        Self::new(n, k, parse(text)?)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn lagrangian(&self) -> &Expr {
        &self.lagrangian
    }

    /// Number of multipliers `λ_α` added by [`Self::extend_with_constraints`].
    pub fn multipliers(&self) -> u32 {
        self.multipliers
    }

    /// `q^i_(j)` for `j = 0..=m`, in `JetQ(m)` order.
    pub fn jet_vars(&self, m: u32) -> Vec<VarRef> {
        let mut out = Vec::with_capacity(((m + 1) * self.n) as usize);
        for j in 0..=m {
            for i in 1..=self.n {
                out.push(VarRef::q(i, j));
            }
        }
        out
    }

    /// `q^i_(k)` for each dof.
    pub fn top_vars(&self) -> Vec<VarRef> {
        (1..=self.n).map(|i| VarRef::q(i, self.k)).collect()
    }

    pub fn jacobi_ostrogradsky_momenta(&self) -> MomentaTable {
        let k = self.k;
        let entries = (1..=self.n)
            .map(|i| {
                // p̂^(r-1) = ∂L/∂q_(r) - d_T p̂^(r), built from the top down.
                let mut row = vec![Expr::zero(); k as usize];
                let mut above = Expr::zero();
                for r in (1..=k).rev() {
                    let partial = differentiate(&self.lagrangian, VarRef::q(i, r));
                    let value = simplify(&(partial - total_derivative(&above)));
                    row[(r - 1) as usize] = value.clone();
                    above = value;
                }
                row
            })
            .collect();
        MomentaTable {
            n: self.n,
            k,
            entries,
        }
    }

    /// Coefficients of the Poincaré–Cartan form `θ_L = p̂^(j)_i dq^i_(j)`.
    pub fn poincare_cartan_coefficients(&self) -> MomentaTable {
        self.jacobi_ostrogradsky_momenta()
    }

    /// Residuals `Σ_j (-1)^j d_T^j ∂L/∂q^i_(j)`: one per dof, then one per multiplier.
    pub fn euler_lagrange(&self) -> Vec<Expr> {
        let mut coords: Vec<VarRef> = (1..=self.n).map(|i| VarRef::q(i, 0)).collect();
        coords.extend((1..=self.multipliers).map(VarRef::lambda));
        coords
            .into_iter()
            .map(|base| {
                let mut acc = Expr::zero();
                for j in (0..=self.k).rev() {
                    let v = VarRef::new(base.kind, base.index, j);
                    // Horner form: acc ↦ ∂L/∂q_(j) - d_T acc
                    acc = simplify(&(differentiate(&self.lagrangian, v) - total_derivative(&acc)));
                }
                acc
            })
            .collect()
    }

    pub fn legendre_ostrogradsky(&self) -> LegendreMap {
        LegendreMap {
            n: self.n,
            k: self.k,
            momenta: self.jacobi_ostrogradsky_momenta().in_chart_order(),
        }
    }

    /// `∂²L/∂q^i_(k)∂q^j_(k)`.
    pub fn highest_hessian(&self) -> Vec<Vec<Expr>> {
        let top = self.top_vars();
        top.iter()
            .map(|a| {
                let da = differentiate(&self.lagrangian, *a);
                top.iter().map(|b| differentiate(&da, *b)).collect()
            })
            .collect()
    }

    pub fn is_regular_at(&self, point: &StatePoint) -> Result<Regularity> {
        self.is_regular_at_with(point, REGULARITY_TOL)
    }

    /// Regularity test with a custom threshold. Multipliers are taken as zero.
    pub fn is_regular_at_with(&self, point: &StatePoint, tol: f64) -> Result<Regularity> {
        point.expect_chart(Chart::jet(self.k, self.n))?;
        let hessian = self.highest_hessian();
        let mut rows = Vec::with_capacity(hessian.len());
        for row in &hessian {
            let mut values = Vec::with_capacity(row.len());
            for e in row {
                values.push(eval_on_jet(e, &point.values, self.n)?);
            }
            rows.push(values);
        }
        let det = linalg::det(&rows);
        let scaled_det = linalg::row_scaled_det(&rows);
        Ok(Regularity {
            regular: scaled_det.abs() > tol,
            det,
            scaled_det,
        })
    }

    /// `E_L = Σ_r q_(r)·p̂^(r-1) - L`.
    pub fn lagrangian_energy(&self) -> Expr {
        let momenta = self.jacobi_ostrogradsky_momenta();
        let mut terms = Vec::new();
        for r in 1..=self.k {
            for i in 1..=self.n {
                terms.push(Expr::var(VarRef::q(i, r)) * momenta.get(i, r - 1).clone());
            }
        }
        terms.push(-self.lagrangian.clone());
        simplify(&Expr::sum(terms))
    }

    /// `𝓛 = L + Σ λ_α Φ^α`, with each `λ_α` a new configuration coordinate.
    pub fn extend_with_constraints(&self, constraints: &[Expr]) -> Result<LagrangianSystem> {
        if constraints.is_empty() {
            return Ok(self.clone());
        }
        let mut terms = vec![self.lagrangian.clone()];
        for (offset, phi) in constraints.iter().enumerate() {
            for v in phi.variables() {
                check_jet_var(v, self.n, self.k)?;
            }
            let alpha = self.multipliers + offset as u32 + 1;
            terms.push(Expr::var(VarRef::lambda(alpha)) * phi.clone());
        }
        Ok(LagrangianSystem {
            n: self.n,
            k: self.k,
            lagrangian: simplify(&Expr::sum(terms)),
            multipliers: self.multipliers + constraints.len() as u32,
        })
    }
}

fn check_jet_var(v: VarRef, n: u32, k: u32) -> Result<()> {
    if v.kind != VarKind::Q {
        return Err(Error::InvalidSystem(format!(
            "{v} is not allowed in a Lagrangian"
        )));
    }
    if v.index > n {
        return Err(Error::InvalidSystem(format!(
            "{v}: dof index {} exceeds {n}",
            v.index
        )));
    }
    if v.level > k {
        return Err(Error::InvalidSystem(format!(
            "{v}: level {} exceeds order {k}",
            v.level
        )));
    }
    Ok(())
}

/// `leg_L: T^(2k-1)Q → T*T^(k-1)Q`, `(q_(0..2k-1)) ↦ (q_(0..k-1), p̂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendreMap {
    pub n: u32,
    pub k: u32,
    /// `p̂^(r)_i` in chart order.
    pub momenta: Vec<Expr>,
}

impl LegendreMap {
    /// All `2kn` output components as expressions over `JetQ(2k-1)`.
    pub fn components(&self) -> Vec<Expr> {
        let mut out: Vec<Expr> = (0..self.k)
            .flat_map(|j| (1..=self.n).map(move |i| Expr::var(VarRef::q(i, j))))
            .collect();
        out.extend(self.momenta.iter().cloned());
        out
    }

    pub fn apply_values<T: Scalar>(&self, jet: &[T]) -> Result<Vec<T>, EvalError> {
        let base = (self.k * self.n) as usize;
        let mut out: Vec<T> = jet[..base].to_vec();
        for p in &self.momenta {
            out.push(eval_on_jet(p, jet, self.n)?);
        }
        Ok(out)
    }

    pub fn apply(&self, point: &StatePoint) -> Result<StatePoint> {
        point.expect_chart(Chart::jet(2 * self.k - 1, self.n))?;
        let values = self.apply_values(&point.values)?;
        StatePoint::new(Chart::cot_jet(self.k, self.n), values)
    }
}
