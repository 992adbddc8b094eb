//! Coordinate form of the kth-order Tulczyjew triple
//! `T*TM ←α− TT*M −β→ T*T*M`, `M = T^(k-1)Q`, with `R_k: T*TM → T*T*M`,
//! and the Lagrangian submanifold `Σ_L ⊂ T*TM`.
//!
//! Every chart involved has four blocks of `kn` coordinates:
//! - `TanCotJet`: `(q, p, q̇, ṗ)`
//! - `CotTanJet`: `(q, v, p, p̃)`
//! - `CotCotJet`: `(q, p, cq, cp)`

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::jet::{total_derivative, Chart, ChartKind, Curve, StatePoint};
use crate::lagrangian::{eval_on_jet, LagrangianSystem};
use crate::symbolic::{differentiate, Expr, Num, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct LinearChartMap {
    pub source: Chart,
    pub target: Chart,
    pub matrix: DMatrix<i64>,
}

/// Result of comparing `Mᵀ Ω_tgt M` with `Ω_src`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PullbackSign {
    Symplectic,
    AntiSymplectic,
    Neither,
}

impl PullbackSign {
    pub fn as_i32(self) -> Option<i32> {
        match self {
            PullbackSign::Symplectic => Some(1),
            PullbackSign::AntiSymplectic => Some(-1),
            PullbackSign::Neither => None,
        }
    }
}

/// `(target block, source block, sign)` triples.
fn block_map(
    k: u32,
    n: u32,
    source: Chart,
    target: Chart,
    blocks: [(usize, usize, i64); 4],
) -> LinearChartMap {
    let size = (k * n) as usize;
    let mut matrix = DMatrix::<i64>::zeros(4 * size, 4 * size);
    for (tgt, src, sign) in blocks {
        for r in 0..size {
            matrix[(tgt * size + r, src * size + r)] = sign;
        }
    }
    LinearChartMap {
        source,
        target,
        matrix,
    }
}

/// `α(q, p, q̇, ṗ) = (q, q̇, ṗ, p)`.
pub fn alpha_map(k: u32, n: u32) -> LinearChartMap {
    block_map(
        k,
        n,
        Chart::tan_cot_jet(k, n),
        Chart::cot_tan_jet(k, n),
        [(0, 0, 1), (1, 2, 1), (2, 3, 1), (3, 1, 1)],
    )
}

/// `β(q, p, q̇, ṗ) = (q, p, -ṗ, q̇)`, so that `β = R_k ∘ α`.
pub fn beta_map(k: u32, n: u32) -> LinearChartMap {
    block_map(
        k,
        n,
        Chart::tan_cot_jet(k, n),
        Chart::cot_cot_jet(k, n),
        [(0, 0, 1), (1, 1, 1), (2, 3, -1), (3, 2, 1)],
    )
}

/// `R_k(q, v, p, p̃) = (q, p̃, -p, v)`.
pub fn rk_map(k: u32, n: u32) -> LinearChartMap {
    block_map(
        k,
        n,
        Chart::cot_tan_jet(k, n),
        Chart::cot_cot_jet(k, n),
        [(0, 0, 1), (1, 3, 1), (2, 2, -1), (3, 1, 1)],
    )
}

impl LinearChartMap {
    pub fn is_signed_permutation(&self) -> bool {
        let m = &self.matrix;
        let unit_rows = m
            .row_iter()
            .all(|r| r.iter().filter(|x| **x != 0).count() == 1);
        let unit_cols = m
            .column_iter()
            .all(|c| c.iter().filter(|x| **x != 0).count() == 1);
        m.is_square() && unit_rows && unit_cols && m.iter().all(|x| x.abs() <= 1)
    }

    /// Inverse of a signed permutation is its transpose.
    pub fn inverse(&self) -> LinearChartMap {
        LinearChartMap {
            source: self.target,
            target: self.source,
            matrix: self.matrix.transpose(),
        }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &LinearChartMap) -> Result<LinearChartMap> {
        if inner.target != self.source {
            return Err(Error::ChartMismatch {
                expected: self.source.to_string(),
                found: inner.target.to_string(),
            });
        }
        Ok(LinearChartMap {
            source: inner.source,
            target: self.target,
            matrix: &self.matrix * &inner.matrix,
        })
    }

    pub fn apply_values<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.ncols(),
                found: x.len(),
            });
        }
        Ok(self
            .matrix
            .row_iter()
            .map(|row| {
                row.iter().zip(x).fold(T::zero(), |acc, (m, v)| match *m {
                    0 => acc,
                    1 => acc + v.clone(),
                    -1 => acc + -v.clone(),
                    c => acc + v.clone() * T::from_num(&Num::int(c)).expect("integers are exact"),
                })
            })
            .collect())
    }

    pub fn apply(&self, point: &StatePoint) -> Result<StatePoint> {
        point.expect_chart(self.source)?;
        StatePoint::new(self.target, self.apply_values(&point.values)?)
    }
}

/// Canonical `Ω = [[0, I], [-I, 0]]` on cotangent charts, and the complete
/// lift `Ω^c`, pairing `dq∧dṗ + dq̇∧dp`, on `TanCotJet`.
pub fn symplectic_matrix(chart: Chart) -> Result<DMatrix<i64>> {
    let dim = chart.dim();
    let mut m = DMatrix::<i64>::zeros(dim, dim);
    let mut pair = |a: usize, b: usize| {
        m[(a, b)] = 1;
        m[(b, a)] = -1;
    };
    match chart.kind {
        ChartKind::CotJet(_) | ChartKind::CotTanJet(_) | ChartKind::CotCotJet(_) => {
            let half = dim / 2;
            for r in 0..half {
                pair(r, half + r);
            }
        }
        ChartKind::TanCotJet(k) => {
            let size = (k * chart.n) as usize;
            for r in 0..size {
                pair(r, 3 * size + r);
                pair(2 * size + r, size + r);
            }
        }
        _ => {
            return Err(Error::ChartMismatch {
                expected: "a cotangent chart or TanCotJet".into(),
                found: chart.to_string(),
            })
        }
    }
    Ok(m)
}

pub fn symplectic_pullback_check(
    map: &LinearChartMap,
    omega_src: &DMatrix<i64>,
    omega_tgt: &DMatrix<i64>,
) -> Result<PullbackSign> {
    let m = &map.matrix;
    if omega_tgt.nrows() != m.nrows() || omega_src.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: omega_tgt.nrows(),
        });
    }
    let pulled = m.transpose() * omega_tgt * m;
    Ok(if &pulled == omega_src {
        PullbackSign::Symplectic
    } else if pulled == -omega_src {
        PullbackSign::AntiSymplectic
    } else {
        PullbackSign::Neither
    })
}

/// Pullback check of `map` against the standard forms of its charts.
pub fn standard_pullback_check(map: &LinearChartMap) -> Result<PullbackSign> {
    symplectic_pullback_check(
        map,
        &symplectic_matrix(map.source)?,
        &symplectic_matrix(map.target)?,
    )
}

/// `∂L/∂q^i_(j)` in `JetQ(k)` order.
fn jet_gradient(lsys: &LagrangianSystem) -> Vec<Expr> {
    lsys.jet_vars(lsys.k())
        .into_iter()
        .map(|v| differentiate(lsys.lagrangian(), v))
        .collect()
}

fn expect_len(found: usize, expected: usize) -> Result<()> {
    if found != expected {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Embeds `Σ_L` parameters `(q_(0..k), p̃^(0..k-2))` into `CotTanJet(k)` as
/// `(q_(j); q_(j+1); ∂L/∂q_(0), ∂L/∂q_(j) - p̃^(j-1); p̃^(j), ∂L/∂q_(k))`.
pub fn embed_sigma_values<T: Scalar>(lsys: &LagrangianSystem, params: &[T]) -> Result<Vec<T>> {
    let (n, k) = (lsys.n() as usize, lsys.k() as usize);
    expect_len(params.len(), 2 * k * n)?;
    let jet = &params[..(k + 1) * n];
    let pt = &params[(k + 1) * n..];
    let dl: Vec<T> = jet_gradient(lsys)
        .iter()
        .map(|g| eval_on_jet(g, jet, n as u32))
        .collect::<Result<_, _>>()?;

    let mut out = Vec::with_capacity(4 * k * n);
    out.extend_from_slice(&jet[..k * n]);
    out.extend_from_slice(&jet[n..]);
    for j in 0..k {
        for i in 0..n {
            let mut value = dl[j * n + i].clone();
            if j > 0 {
                value = value + -pt[(j - 1) * n + i].clone();
            }
            out.push(value);
        }
    }
    out.extend_from_slice(pt);
    out.extend_from_slice(&dl[k * n..]);
    Ok(out)
}

pub fn embed_sigma(lsys: &LagrangianSystem, params: &[f64]) -> Result<StatePoint> {
    let values = embed_sigma_values(lsys, params)?;
    StatePoint::new(Chart::cot_tan_jet(lsys.k(), lsys.n()), values)
}

/// Holonomy residuals `v_(j) - q_(j+1)` (`j ≤ k-2`) followed by the
/// deviations of the `p` and top `p̃` slots from the embedding, with `q_(k)`
/// read from `v_(k-1)`. Zero iff the point lies on `Σ_L`.
pub fn sigma_residual_values<T: Scalar>(lsys: &LagrangianSystem, x: &[T]) -> Result<Vec<T>> {
    let (n, k) = (lsys.n() as usize, lsys.k() as usize);
    expect_len(x.len(), 4 * k * n)?;
    let block = |b: usize, j: usize, i: usize| x[b * k * n + j * n + i].clone();

    let mut jet = x[..k * n].to_vec();
    jet.extend_from_slice(&x[k * n + (k - 1) * n..2 * k * n]);
    let dl: Vec<T> = jet_gradient(lsys)
        .iter()
        .map(|g| eval_on_jet(g, &jet, n as u32))
        .collect::<Result<_, _>>()?;

    let mut out = Vec::with_capacity(2 * k * n);
    for j in 0..k.saturating_sub(1) {
        for i in 0..n {
            out.push(block(1, j, i) + -block(0, j + 1, i));
        }
    }
    for j in 0..k {
        for i in 0..n {
            let mut expected = dl[j * n + i].clone();
            if j > 0 {
                expected = expected + -block(3, j - 1, i);
            }
            out.push(block(2, j, i) + -expected);
        }
    }
    for i in 0..n {
        out.push(block(3, k - 1, i) + -dl[k * n + i].clone());
    }
    Ok(out)
}

pub fn sigma_residual(lsys: &LagrangianSystem, point: &StatePoint) -> Result<Vec<f64>> {
    point.expect_chart(Chart::cot_tan_jet(lsys.k(), lsys.n()))?;
    sigma_residual_values(lsys, &point.values)
}

/// Residual of membership in `N_L = α⁻¹(Σ_L)`.
pub fn nl_residual_values<T: Scalar>(lsys: &LagrangianSystem, x: &[T]) -> Result<Vec<T>> {
    let alpha = alpha_map(lsys.k(), lsys.n());
    sigma_residual_values(lsys, &alpha.apply_values(x)?)
}

pub fn nl_residual(lsys: &LagrangianSystem, point: &StatePoint) -> Result<Vec<f64>> {
    point.expect_chart(Chart::tan_cot_jet(lsys.k(), lsys.n()))?;
    nl_residual_values(lsys, &point.values)
}

/// `𝔽L(q_(0..k), p̃) = (q_(0..k-1), p̃^(0..k-2), ∂L/∂q_(k))` in `CotJet(k)`.
pub fn fl_on_sigma(lsys: &LagrangianSystem, params: &[f64]) -> Result<StatePoint> {
    let (n, k) = (lsys.n() as usize, lsys.k() as usize);
    expect_len(params.len(), 2 * k * n)?;
    let jet = &params[..(k + 1) * n];
    let mut values = jet[..k * n].to_vec();
    values.extend_from_slice(&params[(k + 1) * n..]);
    for v in lsys.top_vars() {
        values.push(eval_on_jet(
            &differentiate(lsys.lagrangian(), v),
            jet,
            n as u32,
        )?);
    }
    StatePoint::new(Chart::cot_jet(k as u32, n as u32), values)
}

/// `φ_L = 𝔽L⁻¹ ∘ leg_L`: `(q_(0..k), p̂^(0..k-2)(x))`.
pub fn phi_l(lsys: &LagrangianSystem, x: &StatePoint) -> Result<Vec<f64>> {
    let (n, k) = (lsys.n(), lsys.k());
    x.expect_chart(Chart::jet(2 * k - 1, n))?;
    let base = StatePoint::new(
        Chart::jet(k, n),
        x.values[..((k + 1) * n) as usize].to_vec(),
    )?;
    let regularity = lsys.is_regular_at(&base)?;
    if !regularity.regular {
        return Err(Error::Irregular(format!(
            "Hessian determinant {:e} at the given point",
            regularity.det
        )));
    }
    let momenta = lsys.jacobi_ostrogradsky_momenta();
    let mut params = base.values;
    for r in 0..k - 1 {
        for i in 1..=n {
            params.push(eval_on_jet(momenta.get(i, r), &x.values, n)?);
        }
    }
    Ok(params)
}

/// `Σ_L` residual of `α(d/dt(leg_L ∘ γ^(2k-1)))` at one point, given the
/// `JetQ(2k)` lift of `γ` there.
pub fn characterization_residual(lsys: &LagrangianSystem, lift: &[f64]) -> Result<Vec<f64>> {
    let (n, k) = (lsys.n(), lsys.k());
    expect_len(lift.len(), ((2 * k + 1) * n) as usize)?;
    let momenta = lsys.jacobi_ostrogradsky_momenta().in_chart_order();
    let size = (k * n) as usize;
    let mut point = Vec::with_capacity(4 * size);
    point.extend_from_slice(&lift[..size]);
    for p in &momenta {
        point.push(eval_on_jet(p, lift, n)?);
    }
    point.extend_from_slice(&lift[n as usize..size + n as usize]);
    for p in &momenta {
        point.push(eval_on_jet(&total_derivative(p), lift, n)?);
    }
    sigma_residual_values(lsys, &alpha_map(k, n).apply_values(&point)?)
}

/// Names of the entries returned by [`sigma_residual_values`].
pub fn sigma_residual_slots(k: u32, n: u32) -> Vec<String> {
    let mut out = Vec::with_capacity((2 * k * n) as usize);
    for j in 0..k.saturating_sub(1) {
        for i in 1..=n {
            out.push(format!("v{i}_{j} - q{i}_{}", j + 1));
        }
    }
    for j in 0..k {
        for i in 1..=n {
            out.push(format!("p{i}_{j}"));
        }
    }
    for i in 1..=n {
        out.push(format!("pt{i}_{}", k - 1));
    }
    out
}

/// Largest absolute [`characterization_residual`] over the sample times.
pub fn solution_characterization_check(
    lsys: &LagrangianSystem,
    curve: &Curve,
    t_samples: &[f64],
) -> Result<f64> {
    let (n, k) = (lsys.n(), lsys.k());
    if curve.dof() != n {
        return Err(Error::DimensionMismatch {
            expected: n as usize,
            found: curve.dof() as usize,
        });
    }
    let mut worst = 0.0f64;
    for &t in t_samples {
        let residual = characterization_residual(lsys, &curve.lift(2 * k, t).values)?;
        worst = residual.iter().fold(worst, |a, x| a.max(x.abs()));
    }
    Ok(worst)
}
