//! Hamiltonians on `T*T^(k-1)Q`: fiber derivatives, the kth-order
//! condition, regularity, Hamilton's vector field, and the passage to and
//! from a Lagrangian.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::jet::{Chart, StatePoint};
use crate::lagrangian::{eval_on_jet, LagrangianSystem, Regularity, REGULARITY_TOL};
use crate::linalg;
use crate::symbolic::{
    affine_parts, check_equivalent, differentiate, equivalent, evaluate_with, parse, sample_points,
    simplify, substitute, EvalError, Expr, Scalar, VarKind, VarRef, EQUIV_SEED,
};

pub const NEWTON_MAX_ITER: usize = 50;
pub const NEWTON_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSystem {
    n: u32,
    k: u32,
    hamiltonian: Expr,
}

/// Value of `v` in a `CotJet(k)` state vector with `n` dofs.
pub(crate) fn cot_value<T: Scalar>(values: &[T], n: u32, k: u32, v: VarRef) -> Option<T> {
    if v.index == 0 || v.index > n || v.level >= k {
        return None;
    }
    let local = (v.level * n + v.index - 1) as usize;
    match v.kind {
        VarKind::Q => values.get(local).cloned(),
        VarKind::P => values.get((k * n) as usize + local).cloned(),
        _ => None,
    }
}

pub(crate) fn eval_on_cot<T: Scalar>(
    e: &Expr,
    values: &[T],
    n: u32,
    k: u32,
) -> Result<T, EvalError> {
    evaluate_with(e, &|v| cot_value(values, n, k, v))
}

/// One failed identity `∂H/∂p^(j)_i ≡ q^i_(j+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KthOrderFailure {
    pub momentum: VarRef,
    pub expected: VarRef,
    pub partial: Expr,
}

impl fmt::Display for KthOrderFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "∂H/∂{} = {} ≠ {}",
            self.momentum, self.partial, self.expected
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct KthOrderReport {
    pub checked: usize,
    pub failures: Vec<KthOrderFailure>,
}

impl KthOrderReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for KthOrderReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.holds() {
            return write!(f, "{} identities hold", self.checked);
        }
        let parts: Vec<String> = self.failures.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("; "))
    }
}

/// A map given by one expression per target coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateMap {
    pub source: Chart,
    pub target: Chart,
    pub components: Vec<Expr>,
}

impl CoordinateMap {
    pub fn apply(&self, point: &StatePoint) -> Result<StatePoint> {
        point.expect_chart(self.source)?;
        let values = match self.source.kind {
            crate::ChartKind::CotJet(k) => self
                .components
                .iter()
                .map(|e| eval_on_cot(e, &point.values, self.source.n, k))
                .collect::<Result<Vec<f64>, _>>()?,
            _ => self
                .components
                .iter()
                .map(|e| evaluate_with(e, &|v| point.lookup(v)))
                .collect::<Result<Vec<f64>, _>>()?,
        };
        StatePoint::new(self.target, values)
    }
}

impl HamiltonianSystem {
    pub fn new(n: u32, k: u32, hamiltonian: Expr) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(Error::InvalidSystem(
                "dof count and order must be at least 1".into(),
            ));
        }
        for v in hamiltonian.variables() {
            let ok = matches!(v.kind, VarKind::Q | VarKind::P);
            if !ok {
                return Err(Error::InvalidSystem(format!(
                    "{v} is not allowed in a Hamiltonian"
                )));
            }
            if v.index > n {
                return Err(Error::InvalidSystem(format!(
                    "{v}: dof index {} exceeds {n}",
                    v.index
                )));
            }
            if v.level >= k {
                return Err(Error::InvalidSystem(format!(
                    "{v}: level {} exceeds {}",
                    v.level,
                    k - 1
                )));
            }
        }
        Ok(HamiltonianSystem {
            n,
            k,
            hamiltonian: simplify(&hamiltonian),
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

    pub fn hamiltonian(&self) -> &Expr {
        &self.hamiltonian
    }

    pub fn chart(&self) -> Chart {
        Chart::cot_jet(self.k, self.n)
    }

    fn base_vars(&self) -> Vec<VarRef> {
        (0..self.k)
            .flat_map(|j| (1..=self.n).map(move |i| VarRef::q(i, j)))
            .collect()
    }

    fn momentum_vars(&self) -> Vec<VarRef> {
        (0..self.k)
            .flat_map(|j| (1..=self.n).map(move |i| VarRef::p(i, j)))
            .collect()
    }

    fn top_momenta(&self) -> Vec<VarRef> {
        (1..=self.n).map(|i| VarRef::p(i, self.k - 1)).collect()
    }

    pub fn value_at(&self, values: &[f64]) -> Result<f64> {
        Ok(eval_on_cot(&self.hamiltonian, values, self.n, self.k)?)
    }

    /// `FH: (q_(j); p^(j)) ↦ (q_(j); ∂H/∂p^(j))`.
    pub fn fiber_derivative(&self) -> CoordinateMap {
        let mut components: Vec<Expr> = self.base_vars().into_iter().map(Expr::var).collect();
        components.extend(
            self.momentum_vars()
                .into_iter()
                .map(|p| differentiate(&self.hamiltonian, p)),
        );
        CoordinateMap {
            source: self.chart(),
            target: Chart::tan_jet(self.k, self.n),
            components,
        }
    }

    /// Checks `∂H/∂p^(j)_i ≡ q^i_(j+1)` for `j ≤ k-2`.
    pub fn is_kth_order(&self) -> KthOrderReport {
        let mut report = KthOrderReport::default();
        for j in 0..self.k.saturating_sub(1) {
            for i in 1..=self.n {
                let momentum = VarRef::p(i, j);
                let expected = VarRef::q(i, j + 1);
                let partial = differentiate(&self.hamiltonian, momentum);
                report.checked += 1;
                if !equivalent(&partial, &Expr::var(expected)) {
                    report.failures.push(KthOrderFailure {
                        momentum,
                        expected,
                        partial,
                    });
                }
            }
        }
        report
    }

    fn require_kth_order(&self) -> Result<()> {
        let report = self.is_kth_order();
        if report.holds() {
            Ok(())
        } else {
            Err(Error::NotKthOrder(report.to_string()))
        }
    }

    /// `FH_o: (q_(0..k-1); p) ↦ (q_(0..k-1), ∂H/∂p^(k-1))`.
    pub fn reduced_fiber_derivative(&self) -> Result<CoordinateMap> {
        self.require_kth_order()?;
        let mut components: Vec<Expr> = self.base_vars().into_iter().map(Expr::var).collect();
        components.extend(self.top_fiber_derivative());
        Ok(CoordinateMap {
            source: self.chart(),
            target: Chart::jet(self.k, self.n),
            components,
        })
    }

    /// `∂H/∂p^(k-1)_i` for each dof.
    pub fn top_fiber_derivative(&self) -> Vec<Expr> {
        self.top_momenta()
            .into_iter()
            .map(|p| differentiate(&self.hamiltonian, p))
            .collect()
    }

    /// `∂²H/∂p^(k-1)_i ∂p^(k-1)_j`.
    pub fn top_momentum_hessian(&self) -> Vec<Vec<Expr>> {
        let top = self.top_momenta();
        self.top_fiber_derivative()
            .iter()
            .map(|d| top.iter().map(|p| differentiate(d, *p)).collect())
            .collect()
    }

    /// `∂²H/∂p^(s)_i ∂p^(k-1)_j` for all `s ≤ k-2`.
    pub fn cross_momenta_derivatives(&self) -> Vec<Expr> {
        let top = self.top_fiber_derivative();
        let mut out = Vec::new();
        for s in 0..self.k.saturating_sub(1) {
            for i in 1..=self.n {
                for d in &top {
                    out.push(differentiate(d, VarRef::p(i, s)));
                }
            }
        }
        out
    }

    pub fn is_regular_hamiltonian_at(&self, point: &StatePoint) -> Result<Regularity> {
        self.is_regular_hamiltonian_at_with(point, REGULARITY_TOL)
    }

    pub fn is_regular_hamiltonian_at_with(
        &self,
        point: &StatePoint,
        tol: f64,
    ) -> Result<Regularity> {
        self.require_kth_order()?;
        point.expect_chart(self.chart())?;
        let rows = self.hessian_values(&point.values)?;
        let scaled_det = linalg::row_scaled_det(&rows);
        Ok(Regularity {
            regular: scaled_det.abs() > tol,
            det: linalg::det(&rows),
            scaled_det,
        })
    }

    pub(crate) fn hessian_values(&self, values: &[f64]) -> Result<Vec<Vec<f64>>> {
        let mut rows = Vec::new();
        for row in self.top_momentum_hessian() {
            let mut r = Vec::new();
            for e in &row {
                r.push(eval_on_cot(e, values, self.n, self.k)?);
            }
            rows.push(r);
        }
        Ok(rows)
    }

    /// `q̇_(j) = ∂H/∂p^(j)`, `ṗ^(j) = -∂H/∂q_(j)`, in `CotJet` order.
    pub fn hamilton_vector_field(&self) -> Vec<Expr> {
        let mut out: Vec<Expr> = self
            .momentum_vars()
            .into_iter()
            .map(|p| differentiate(&self.hamiltonian, p))
            .collect();
        out.extend(
            self.base_vars()
                .into_iter()
                .map(|q| simplify(&-differentiate(&self.hamiltonian, q))),
        );
        out
    }

    /// `θ(X_H) - H = Σ p^(j)·∂H/∂p^(j) - H`.
    pub fn theta_minus_h(&self) -> Expr {
        let mut terms: Vec<Expr> = self
            .momentum_vars()
            .into_iter()
            .map(|p| Expr::var(p) * differentiate(&self.hamiltonian, p))
            .collect();
        terms.push(-self.hamiltonian.clone());
        simplify(&Expr::sum(terms))
    }

    fn require_regular_symbolically(&self) -> Result<()> {
        let det = linalg::det_symbolic(&self.top_momentum_hessian());
        if equivalent(&det, &Expr::zero()) {
            return Err(Error::Irregular(format!(
                "det ∂²H/∂p^({})∂p^({}) vanishes identically",
                self.k - 1,
                self.k - 1
            )));
        }
        Ok(())
    }
}

/// Newton solver for `p^(k-1) = ∂L/∂q_(k)` at a fixed base point.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonInverse {
    pub n: u32,
    pub k: u32,
    /// `∂L/∂q^i_(k)`.
    pub gradient: Vec<Expr>,
    /// `∂²L/∂q^i_(k)∂q^j_(k)`.
    pub hessian: Vec<Vec<Expr>>,
}

impl NewtonInverse {
    /// Solves for `q_(k)` given a `CotJet(k)` state vector.
    pub fn solve(&self, cot: &[f64]) -> Result<Vec<f64>> {
        let (n, k) = (self.n as usize, self.k as usize);
        let base = &cot[..k * n];
        let target = &cot[(2 * k - 1) * n..2 * k * n];
        let mut top = vec![0.0; n];
        let mut residual = f64::INFINITY;
        for _ in 0..NEWTON_MAX_ITER {
            let mut jet = base.to_vec();
            jet.extend_from_slice(&top);
            let mut f = Vec::with_capacity(n);
            for (g, p) in self.gradient.iter().zip(target) {
                f.push(eval_on_jet(g, &jet, self.n)? - p);
            }
            residual = f.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            if residual < NEWTON_TOL {
                return Ok(top);
            }
            let mut jac = Vec::with_capacity(n);
            for row in &self.hessian {
                let mut r = Vec::with_capacity(n);
                for e in row {
                    r.push(eval_on_jet(e, &jet, self.n)?);
                }
                jac.push(r);
            }
            let step = linalg::solve(&jac, &f).ok_or(Error::InversionFailed {
                iterations: NEWTON_MAX_ITER,
                residual,
            })?;
            for (x, d) in top.iter_mut().zip(step) {
                *x -= d;
            }
        }
        Err(Error::InversionFailed {
            iterations: NEWTON_MAX_ITER,
            residual,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LegendreInverse {
    /// `q̃^i_(k)` as expressions over `CotJet(k)`.
    Symbolic(Vec<Expr>),
    Numeric(NewtonInverse),
}

impl LegendreInverse {
    /// `q̃_(k)` at a `CotJet(k)` state vector.
    pub fn top_values(&self, n: u32, k: u32, cot: &[f64]) -> Result<Vec<f64>> {
        match self {
            LegendreInverse::Symbolic(exprs) => exprs
                .iter()
                .map(|e| Ok(eval_on_cot(e, cot, n, k)?))
                .collect(),
            LegendreInverse::Numeric(newton) => newton.solve(cot),
        }
    }
}

/// Canonical Hamiltonian evaluated pointwise through the Newton inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericHamiltonian {
    pub lagrangian: LagrangianSystem,
    pub inverse: NewtonInverse,
}

impl NumericHamiltonian {
    fn lifted(&self, cot: &[f64]) -> Result<Vec<f64>> {
        let (n, k) = (self.lagrangian.n() as usize, self.lagrangian.k() as usize);
        let mut jet = cot[..k * n].to_vec();
        jet.extend(self.inverse.solve(cot)?);
        Ok(jet)
    }

    pub fn value_at(&self, cot: &[f64]) -> Result<f64> {
        let (n, k) = (self.lagrangian.n() as usize, self.lagrangian.k() as usize);
        let jet = self.lifted(cot)?;
        let mut h = -eval_on_jet(self.lagrangian.lagrangian(), &jet, n as u32)?;
        // Σ_j p^(j)·q_(j+1), where q_(k) is the inverted value.
        for (p, q) in cot[k * n..].iter().zip(&jet[n..]) {
            h += p * q;
        }
        Ok(h)
    }

    /// Hamilton's vector field via the envelope identities
    /// `∂H/∂p^(j) = q_(j+1)` and `∂H/∂q_(j) = p^(j-1) - ∂L/∂q_(j)`.
    pub fn vector_field(&self, cot: &[f64]) -> Result<Vec<f64>> {
        let (n, k) = (self.lagrangian.n() as usize, self.lagrangian.k() as usize);
        let jet = self.lifted(cot)?;
        let mut out: Vec<f64> = jet[n..].to_vec();
        for j in 0..k {
            for i in 1..=n {
                let dl = differentiate(self.lagrangian.lagrangian(), VarRef::q(i as u32, j as u32));
                let mut dh = -eval_on_jet(&dl, &jet, n as u32)?;
                if j > 0 {
                    dh += cot[k * n + (j - 1) * n + i - 1];
                }
                out.push(-dh);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CanonicalHamiltonian {
    Symbolic(HamiltonianSystem),
    Numeric(NumericHamiltonian),
}

impl CanonicalHamiltonian {
    pub fn symbolic(&self) -> Option<&HamiltonianSystem> {
        match self {
            CanonicalHamiltonian::Symbolic(h) => Some(h),
            CanonicalHamiltonian::Numeric(_) => None,
        }
    }

    pub fn value_at(&self, cot: &[f64]) -> Result<f64> {
        match self {
            CanonicalHamiltonian::Symbolic(h) => h.value_at(cot),
            CanonicalHamiltonian::Numeric(h) => h.value_at(cot),
        }
    }
}

/// `H = Σ_{j≤k-2} p^(j)q_(j+1) + p^(k-1)·q̃_(k) - L|_{q_(k)=q̃_(k)}`.
///
/// Symbolic when `∂L/∂q_(k)` is affine in `q_(k)`, Newton otherwise.
pub fn canonical_hamiltonian(
    lsys: &LagrangianSystem,
) -> Result<(CanonicalHamiltonian, LegendreInverse)> {
    if lsys.multipliers() > 0 {
        return Err(Error::InvalidSystem(
            "canonical Hamiltonian of a multiplier-extended system".into(),
        ));
    }
    let (n, k) = (lsys.n(), lsys.k());
    let top = lsys.top_vars();
    let gradient: Vec<Expr> = top
        .iter()
        .map(|v| differentiate(lsys.lagrangian(), *v))
        .collect();
    let hessian = lsys.highest_hessian();
    if n <= 4 && equivalent(&linalg::det_symbolic(&hessian), &Expr::zero()) {
        return Err(Error::SingularLagrangian(
            "det ∂²L/∂q_(k)∂q_(k) vanishes identically".into(),
        ));
    }

    let affine: Option<Vec<(Vec<Expr>, Expr)>> =
        gradient.iter().map(|g| affine_parts(g, &top)).collect();
    let Some(affine) = affine else {
        let inverse = NewtonInverse {
            n,
            k,
            gradient,
            hessian,
        };
        let h = NumericHamiltonian {
            lagrangian: lsys.clone(),
            inverse: inverse.clone(),
        };
        return Ok((
            CanonicalHamiltonian::Numeric(h),
            LegendreInverse::Numeric(inverse),
        ));
    };

    let w: Vec<Vec<Expr>> = affine.iter().map(|(c, _)| c.clone()).collect();
    let rhs: Vec<Expr> = affine
        .iter()
        .enumerate()
        .map(|(i, (_, r))| Expr::var(VarRef::p(i as u32 + 1, k - 1)) - r.clone())
        .collect();
    let q_tilde = linalg::solve_symbolic(&w, &rhs)
        .ok_or_else(|| Error::SingularLagrangian("no nonzero pivot in ∂²L/∂q_(k)∂q_(k)".into()))?;

    let bindings: HashMap<VarRef, Expr> =
        top.iter().copied().zip(q_tilde.iter().cloned()).collect();
    let mut terms = Vec::new();
    for j in 0..k - 1 {
        for i in 1..=n {
            terms.push(Expr::var(VarRef::p(i, j)) * Expr::var(VarRef::q(i, j + 1)));
        }
    }
    for (i, qt) in q_tilde.iter().enumerate() {
        terms.push(Expr::var(VarRef::p(i as u32 + 1, k - 1)) * qt.clone());
    }
    terms.push(-substitute(lsys.lagrangian(), &bindings));
    let h = HamiltonianSystem::new(n, k, simplify(&Expr::sum(terms)))?;
    Ok((
        CanonicalHamiltonian::Symbolic(h),
        LegendreInverse::Symbolic(q_tilde),
    ))
}

/// Lagrangian evaluated pointwise, for Hamiltonians whose top fiber
/// derivative is not affine in the top momenta.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericLagrangian {
    pub hamiltonian: HamiltonianSystem,
    /// `θ(X_H) - H`.
    pub generator: Expr,
}

impl NumericLagrangian {
    /// `L` at a `JetQ(k)` state vector.
    pub fn value_at(&self, jet: &[f64]) -> Result<f64> {
        let (n, k) = (self.hamiltonian.n() as usize, self.hamiltonian.k() as usize);
        let fiber = self.hamiltonian.top_fiber_derivative();
        let target = &jet[k * n..(k + 1) * n];
        let mut cot = jet[..k * n].to_vec();
        cot.extend(std::iter::repeat_n(0.0, k * n));
        let top_slot = (2 * k - 1) * n;
        let mut residual = f64::INFINITY;
        for _ in 0..NEWTON_MAX_ITER {
            let mut f = Vec::with_capacity(n);
            for (e, q) in fiber.iter().zip(target) {
                f.push(eval_on_cot(e, &cot, n as u32, k as u32)? - q);
            }
            residual = f.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            if residual < NEWTON_TOL {
                return Ok(eval_on_cot(&self.generator, &cot, n as u32, k as u32)?);
            }
            let rows = self.hamiltonian.hessian_values(&cot)?;
            let step = linalg::solve(&rows, &f).ok_or(Error::InversionFailed {
                iterations: NEWTON_MAX_ITER,
                residual,
            })?;
            for (idx, d) in step.into_iter().enumerate() {
                cot[top_slot + idx] -= d;
            }
        }
        Err(Error::InversionFailed {
            iterations: NEWTON_MAX_ITER,
            residual,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReconstructedLagrangian {
    Symbolic(LagrangianSystem),
    Numeric(NumericLagrangian),
}

impl ReconstructedLagrangian {
    pub fn symbolic(&self) -> Option<&LagrangianSystem> {
        match self {
            ReconstructedLagrangian::Symbolic(l) => Some(l),
            ReconstructedLagrangian::Numeric(_) => None,
        }
    }
}

/// Recovers `L` with `(FH_o)^* L = θ(X_H) - H`.
pub fn reconstruct_lagrangian(hsys: &HamiltonianSystem) -> Result<ReconstructedLagrangian> {
    hsys.require_kth_order()?;
    hsys.require_regular_symbolically()?;
    let (n, k) = (hsys.n(), hsys.k());
    let generator = hsys.theta_minus_h();

    for s in 0..k - 1 {
        for i in 1..=n {
            let var = VarRef::p(i, s);
            let partial = differentiate(&generator, var);
            if !check_equivalent(&partial, &Expr::zero()).holds() {
                return Err(Error::NotProjectable {
                    var,
                    partial: partial.to_string(),
                });
            }
        }
    }

    let top_p = hsys.top_momenta();
    let fiber = hsys.top_fiber_derivative();
    let affine: Option<Vec<(Vec<Expr>, Expr)>> =
        fiber.iter().map(|f| affine_parts(f, &top_p)).collect();
    let Some(affine) = affine else {
        return Ok(ReconstructedLagrangian::Numeric(NumericLagrangian {
            hamiltonian: hsys.clone(),
            generator,
        }));
    };
    let w: Vec<Vec<Expr>> = affine.iter().map(|(c, _)| c.clone()).collect();
    let rhs: Vec<Expr> = affine
        .iter()
        .enumerate()
        .map(|(i, (_, r))| Expr::var(VarRef::q(i as u32 + 1, k)) - r.clone())
        .collect();
    let p_tilde = linalg::solve_symbolic(&w, &rhs)
        .ok_or_else(|| Error::Irregular("top fiber derivative is not invertible".into()))?;

    let mut bindings: HashMap<VarRef, Expr> = top_p.iter().copied().zip(p_tilde).collect();
    for s in 0..k - 1 {
        for i in 1..=n {
            bindings.insert(VarRef::p(i, s), Expr::zero());
        }
    }
    let l = substitute(&generator, &bindings);
    if let Some(v) = l.variables().into_iter().find(|v| v.kind == VarKind::P) {
        return Err(Error::NotProjectable {
            var: v,
            partial: l.to_string(),
        });
    }
    let lsys = LagrangianSystem::new(n, k, l)?;

    // (FH_o)^* L must reproduce the generator.
    let pullback: HashMap<VarRef, Expr> = (1..=n).map(|i| VarRef::q(i, k)).zip(fiber).collect();
    let pulled = substitute(lsys.lagrangian(), &pullback);
    if !equivalent(&pulled, &generator) {
        return Err(Error::NotProjectable {
            var: top_p[0],
            partial: simplify(&(pulled - generator)).to_string(),
        });
    }
    Ok(ReconstructedLagrangian::Symbolic(lsys))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectionCheck {
    /// `∂H/∂p^(k-1) ∘ leg_L ≡ q_(k)` symbolically.
    pub symbolic: bool,
    /// Largest `|FH_o(Υ(x)) - x|` over the sampled points.
    pub max_deviation: f64,
    pub samples: usize,
}

impl SectionCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.symbolic && self.max_deviation <= tol
    }
}

/// Verifies `FH_o ∘ leg_L = τ` and `FH_o ∘ Υ = Id` with `Υ = leg_L ∘ Ψ`,
/// `Ψ` the zero-padding section `T^(k)Q → T^(2k-1)Q`.
pub fn fho_section_check(
    lsys: &LagrangianSystem,
    hsys: &HamiltonianSystem,
) -> Result<SectionCheck> {
    let fho = hsys.reduced_fiber_derivative()?;
    let (n, k) = (lsys.n(), lsys.k());
    let leg = lsys.legendre_ostrogradsky();
    let momenta = lsys.jacobi_ostrogradsky_momenta();
    let mut bindings = HashMap::new();
    for r in 0..k {
        for i in 1..=n {
            bindings.insert(VarRef::p(i, r), momenta.get(i, r).clone());
        }
    }
    let top = hsys.top_fiber_derivative();
    let symbolic = top.iter().enumerate().all(|(i, f)| {
        equivalent(
            &substitute(f, &bindings),
            &Expr::var(VarRef::q(i as u32 + 1, k)),
        )
    });

    let order = lsys.jet_vars(k);
    let vars = order.iter().copied().collect();
    let points = sample_points(&vars, 32, EQUIV_SEED);
    let mut max_deviation = 0.0f64;
    for point in &points {
        let lookup: HashMap<VarRef, f64> = point.iter().copied().collect();
        let x: Vec<f64> = order.iter().map(|v| lookup[v]).collect();
        let mut padded = x.clone();
        padded.extend(std::iter::repeat_n(0.0, ((k - 1) * n) as usize));
        let cot = leg.apply(&StatePoint::new(Chart::jet(2 * k - 1, n), padded)?)?;
        let back = fho.apply(&cot)?;
        for (a, b) in back.values.iter().zip(&x) {
            max_deviation = max_deviation.max((a - b).abs());
        }
    }
    Ok(SectionCheck {
        symbolic,
        max_deviation,
        samples: points.len(),
    })
}
