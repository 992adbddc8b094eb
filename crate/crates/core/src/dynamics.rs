//! Fixed-step RK4 integration of both formulations, residuals along
//! trajectories, and conservation and cross-consistency diagnostics.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hamiltonian::{
    canonical_hamiltonian, eval_on_cot, CanonicalHamiltonian, HamiltonianSystem, NumericHamiltonian,
};
use crate::jet::{Chart, StatePoint};
use crate::lagrangian::{eval_on_jet, LagrangianSystem};
use crate::linalg;
use crate::symbolic::{affine_parts, Expr, VarRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdeKind {
    Hamiltonian,
    LagrangianExplicit,
}

type Rhs = dyn Fn(f64, &[f64]) -> Result<Vec<f64>> + Send + Sync;

/// Autonomous first-order system `ẋ = f(x)` on a chart.
#[derive(Clone)]
pub struct OdeSystem {
    pub chart: Chart,
    pub kind: OdeKind,
    rhs: Arc<Rhs>,
}

impl fmt::Debug for OdeSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OdeSystem")
            .field("chart", &self.chart)
            .field("kind", &self.kind)
            .finish_non_exhaustive()
    }
}

impl OdeSystem {
    pub fn new<F>(chart: Chart, kind: OdeKind, rhs: F) -> Self
    where
        F: Fn(f64, &[f64]) -> Result<Vec<f64>> + Send + Sync + 'static,
    {
        OdeSystem {
            chart,
            kind,
            rhs: Arc::new(rhs),
        }
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// Right-hand side at state `x`; `t` is only used in error reports.
    pub fn eval(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        (self.rhs)(t, x)
    }
}

pub fn hamilton_ode(hsys: &HamiltonianSystem) -> OdeSystem {
    let field = hsys.hamilton_vector_field();
    let (n, k) = (hsys.n(), hsys.k());
    OdeSystem::new(hsys.chart(), OdeKind::Hamiltonian, move |_, x| {
        field.iter().map(|e| Ok(eval_on_cot(e, x, n, k)?)).collect()
    })
}

/// Hamilton's equations for a canonical Hamiltonian without closed form.
pub fn numeric_hamilton_ode(h: &NumericHamiltonian) -> OdeSystem {
    let chart = Chart::cot_jet(h.lagrangian.k(), h.lagrangian.n());
    let h = h.clone();
    OdeSystem::new(chart, OdeKind::Hamiltonian, move |_, x| h.vector_field(x))
}

pub fn canonical_ode(can: &CanonicalHamiltonian) -> OdeSystem {
    match can {
        CanonicalHamiltonian::Symbolic(h) => hamilton_ode(h),
        CanonicalHamiltonian::Numeric(h) => numeric_hamilton_ode(h),
    }
}

/// Explicit form of the Euler–Lagrange equations on `JetQ(2k-1)`:
/// `q̇_(j) = q_(j+1)` and `C·q_(2k) = -r`, where the EL residual splits as
/// `C·q_(2k) + r` with `C = (-1)^k W`.
pub fn lagrangian_ode(lsys: &LagrangianSystem) -> Result<OdeSystem> {
    if lsys.multipliers() > 0 {
        return Err(Error::InvalidSystem(
            "multiplier-extended systems have no explicit ODE".into(),
        ));
    }
    let (n, k) = (lsys.n(), lsys.k());
    let top: Vec<VarRef> = (1..=n).map(|i| VarRef::q(i, 2 * k)).collect();
    let mut coeffs: Vec<Vec<Expr>> = Vec::with_capacity(n as usize);
    let mut rest: Vec<Expr> = Vec::with_capacity(n as usize);
    for r in lsys.euler_lagrange() {
        let (c, r0) = affine_parts(&r, &top).ok_or_else(|| {
            Error::InvalidSystem("Euler-Lagrange residual is not affine in q_(2k)".into())
        })?;
        coeffs.push(c);
        rest.push(r0);
    }
    let chart = Chart::jet(2 * k - 1, n);
    let shift = n as usize;
    Ok(OdeSystem::new(
        chart,
        OdeKind::LagrangianExplicit,
        move |t, x| {
            let mut matrix = Vec::with_capacity(coeffs.len());
            for row in &coeffs {
                let mut values = Vec::with_capacity(row.len());
                for e in row {
                    values.push(eval_on_jet(e, x, n)?);
                }
                matrix.push(values);
            }
            let mut rhs = Vec::with_capacity(rest.len());
            for e in &rest {
                rhs.push(-eval_on_jet(e, x, n)?);
            }
            let top = linalg::solve(&matrix, &rhs).ok_or_else(|| Error::SingularHessian {
                time: t,
                det: linalg::det(&matrix),
            })?;
            let mut out = x[shift..].to_vec();
            out.extend(top);
            Ok(out)
        },
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub chart: Chart,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn point(&self, idx: usize) -> StatePoint {
        StatePoint {
            chart: self.chart,
            values: self.states[idx].clone(),
        }
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().map_or(&[], Vec::as_slice)
    }
}

fn axpy(x: &[f64], a: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(x, d)| x + a * d).collect()
}

/// Classical RK4 with step `h`; the last step is shortened to end on `t1`.
pub fn integrate_rk4(ode: &OdeSystem, x0: &[f64], t0: f64, t1: f64, h: f64) -> Result<Trajectory> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidInterval(format!("step {h} must be positive")));
    }
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidInterval(format!(
            "need t0 < t1, got {t0} and {t1}"
        )));
    }
    if x0.len() != ode.dim() {
        return Err(Error::DimensionMismatch {
            expected: ode.dim(),
            found: x0.len(),
        });
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { last_good: t0 });
    }
    let steps = ((t1 - t0) / h - 1e-9).ceil().max(1.0) as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(t0);
    states.push(x0.to_vec());
    let mut x = x0.to_vec();
    for i in 0..steps {
        let t = times[i];
        let next = if i + 1 == steps {
            t1
        } else {
            t0 + (i + 1) as f64 * h
        };
        let dt = next - t;
        let k1 = ode.eval(t, &x)?;
        let k2 = ode.eval(t + dt / 2.0, &axpy(&x, dt / 2.0, &k1))?;
        let k3 = ode.eval(t + dt / 2.0, &axpy(&x, dt / 2.0, &k2))?;
        let k4 = ode.eval(next, &axpy(&x, dt, &k3))?;
        for (idx, xi) in x.iter_mut().enumerate() {
            *xi += dt / 6.0 * (k1[idx] + 2.0 * k2[idx] + 2.0 * k3[idx] + k4[idx]);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { last_good: t });
        }
        times.push(next);
        states.push(x.clone());
    }
    Ok(Trajectory {
        chart: ode.chart,
        times,
        states,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub max: f64,
    pub argmax_time: f64,
    /// Largest absolute residual entry at each sample.
    pub per_sample: Vec<f64>,
}

pub fn residual_along<F>(traj: &Trajectory, residual: F) -> Result<ResidualReport>
where
    F: Fn(&StatePoint) -> Result<Vec<f64>>,
{
    let mut report = ResidualReport {
        max: 0.0,
        argmax_time: traj.times.first().copied().unwrap_or(0.0),
        per_sample: Vec::with_capacity(traj.len()),
    };
    for (idx, t) in traj.times.iter().enumerate() {
        let r = residual(&traj.point(idx))?;
        let m = r.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if m > report.max {
            report.max = m;
            report.argmax_time = *t;
        }
        report.per_sample.push(m);
    }
    Ok(report)
}

/// `max |f(x(t)) - f(x(t0))|` for a scalar function of the state.
pub fn drift_of<F>(traj: &Trajectory, f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let Some(first) = traj.states.first() else {
        return Ok(0.0);
    };
    let e0 = f(first)?;
    let mut worst = 0.0f64;
    for x in &traj.states {
        worst = worst.max((f(x)? - e0).abs());
    }
    Ok(worst)
}

pub fn energy_drift(hsys: &HamiltonianSystem, traj: &Trajectory) -> Result<f64> {
    if traj.chart != hsys.chart() {
        return Err(Error::ChartMismatch {
            expected: hsys.chart().to_string(),
            found: traj.chart.to_string(),
        });
    }
    drift_of(traj, |x| hsys.value_at(x))
}

/// Drift of `E_L` along a trajectory of [`lagrangian_ode`].
pub fn lagrangian_energy_drift(lsys: &LagrangianSystem, traj: &Trajectory) -> Result<f64> {
    let chart = Chart::jet(2 * lsys.k() - 1, lsys.n());
    if traj.chart != chart {
        return Err(Error::ChartMismatch {
            expected: chart.to_string(),
            found: traj.chart.to_string(),
        });
    }
    let energy = lsys.lagrangian_energy();
    let n = lsys.n();
    drift_of(traj, |x| Ok(eval_on_jet(&energy, x, n)?))
}

#[derive(Debug, Clone)]
pub struct CrossCheck {
    /// `max_t |leg_L(x_lag(t)) - x_ham(t)|_∞`.
    pub max_deviation: f64,
    pub lagrangian: Trajectory,
    pub hamiltonian: Trajectory,
    pub canonical: CanonicalHamiltonian,
}

/// Integrates the Lagrangian flow from `x0` and the Hamiltonian flow from
/// `leg_L(x0)` and compares them through `leg_L`.
pub fn cross_check(
    lsys: &LagrangianSystem,
    x0: &StatePoint,
    t0: f64,
    t1: f64,
    h: f64,
) -> Result<CrossCheck> {
    let (n, k) = (lsys.n(), lsys.k());
    x0.expect_chart(Chart::jet(2 * k - 1, n))?;
    let (canonical, _) = canonical_hamiltonian(lsys)?;
    let leg = lsys.legendre_ostrogradsky();
    let lagrangian = integrate_rk4(&lagrangian_ode(lsys)?, &x0.values, t0, t1, h)?;
    let start = leg.apply(x0)?;
    let hamiltonian = integrate_rk4(&canonical_ode(&canonical), &start.values, t0, t1, h)?;
    let mut max_deviation = 0.0f64;
    for (xl, xh) in lagrangian.states.iter().zip(&hamiltonian.states) {
        let mapped = leg.apply_values(xl)?;
        for (a, b) in mapped.iter().zip(xh) {
            max_deviation = max_deviation.max((a - b).abs());
        }
    }
    Ok(CrossCheck {
        max_deviation,
        lagrangian,
        hamiltonian,
        canonical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Curve;

    fn javelin_h() -> HamiltonianSystem {
        HamiltonianSystem::parse(1, 2, "p1_0*q1_1 - 0.5*(q1_1^2 + p1_1^2)").unwrap()
    }

    #[test]
    fn hamilton_rhs_examples() {
        let ode = hamilton_ode(&javelin_h());
        assert_eq!(
            ode.eval(0.0, &[0.0, 1.0, 0.0, 0.0]).unwrap(),
            vec![1.0, 0.0, 0.0, 1.0]
        );
        let free = HamiltonianSystem::parse(1, 1, "0.5*p1_0^2").unwrap();
        assert_eq!(
            hamilton_ode(&free).eval(0.0, &[3.0, 2.0]).unwrap(),
            vec![2.0, 0.0]
        );
    }

    #[test]
    fn lagrangian_rhs_examples() {
        let jav = LagrangianSystem::parse(1, 2, "0.5*(q1_1^2 - q1_2^2)").unwrap();
        let ode = lagrangian_ode(&jav).unwrap();
        assert_eq!(
            ode.eval(0.0, &[1.0, 2.0, 3.0, 4.0]).unwrap(),
            vec![2.0, 3.0, 4.0, -3.0]
        );
        let free = LagrangianSystem::parse(1, 1, "0.5*q1_1^2").unwrap();
        assert_eq!(
            lagrangian_ode(&free)
                .unwrap()
                .eval(0.0, &[1.0, 2.0])
                .unwrap(),
            vec![2.0, 0.0]
        );
        let acc = LagrangianSystem::parse(1, 2, "0.5*q1_2^2").unwrap();
        let out = lagrangian_ode(&acc)
            .unwrap()
            .eval(0.0, &[1.0, 2.0, 3.0, 4.0])
            .unwrap();
        assert_eq!(out, vec![2.0, 3.0, 4.0, 0.0]);
        let weighted = LagrangianSystem::parse(1, 2, "0.5*q1_0*q1_2^2").unwrap();
        let err = lagrangian_ode(&weighted)
            .unwrap()
            .eval(2.5, &[0.0, 1.0, 1.0, 1.0]);
        assert!(matches!(err, Err(Error::SingularHessian { time, .. }) if time == 2.5));
    }

    #[test]
    fn rk4_basics() {
        let free = HamiltonianSystem::parse(1, 1, "0.5*p1_0^2").unwrap();
        let traj = integrate_rk4(&hamilton_ode(&free), &[0.0, 1.0], 0.0, 1.0, 0.1).unwrap();
        assert_eq!(traj.len(), 11);
        assert_eq!(*traj.times.last().unwrap(), 1.0);
        for (t, x) in traj.times.iter().zip(&traj.states) {
            assert!((x[0] - t).abs() < 1e-14);
        }
        let zero = OdeSystem::new(Chart::jet(0, 2), OdeKind::Hamiltonian, |_, x| {
            Ok(vec![0.0; x.len()])
        });
        let traj = integrate_rk4(&zero, &[1.0, -2.0], 0.0, 1.0, 0.3).unwrap();
        assert_eq!(traj.times, vec![0.0, 0.3, 0.6, 0.8999999999999999, 1.0]);
        assert!(traj.states.iter().all(|x| x == &vec![1.0, -2.0]));
    }

    #[test]
    fn rk4_rejects_bad_input() {
        let zero = OdeSystem::new(Chart::jet(0, 1), OdeKind::Hamiltonian, |_, x| {
            Ok(vec![0.0; x.len()])
        });
        assert!(integrate_rk4(&zero, &[1.0], 0.0, 1.0, 0.0).is_err());
        assert!(integrate_rk4(&zero, &[1.0], 1.0, 0.0, 0.1).is_err());
        assert!(integrate_rk4(&zero, &[1.0, 2.0], 0.0, 1.0, 0.1).is_err());
        let blowup = OdeSystem::new(Chart::jet(0, 1), OdeKind::Hamiltonian, |_, x| {
            Ok(vec![x[0] * x[0]])
        });
        let err = integrate_rk4(&blowup, &[1.0], 0.0, 5.0, 0.25).unwrap_err();
        assert!(
            matches!(err, Error::NonFinite { last_good } if last_good > 0.0 && last_good < 5.0)
        );
    }

    #[test]
    fn javelin_matches_closed_form() {
        // q_(2) = -p1 = 0 and q_(3) = p0 - q1 = 0 at t = 0: the curve q(t) = t.
        let traj = integrate_rk4(
            &hamilton_ode(&javelin_h()),
            &[0.0, 1.0, 1.0, 0.0],
            0.0,
            1.0,
            1e-3,
        )
        .unwrap();
        let last = traj.last_state();
        assert!((last[0] - 1.0).abs() < 1e-8);
        assert!(energy_drift(&javelin_h(), &traj).unwrap() < 1e-12);
    }

    #[test]
    fn cross_check_examples() {
        let jav = LagrangianSystem::parse(1, 2, "0.5*(q1_1^2 - q1_2^2)").unwrap();
        let g = Curve::javelin(&[[0.2, -0.4, 0.9, 0.3]]);
        let cc = cross_check(&jav, &g.lift(3, 0.0), 0.0, 10.0, 1e-3).unwrap();
        assert!(cc.max_deviation < 1e-6);
        let ham = cc.canonical.symbolic().unwrap();
        assert!(energy_drift(ham, &cc.hamiltonian).unwrap() < 1e-6);
        assert!(lagrangian_energy_drift(&jav, &cc.lagrangian).unwrap() < 1e-6);

        let free = LagrangianSystem::parse(1, 1, "0.5*q1_1^2").unwrap();
        let x0 = StatePoint::new(Chart::jet(1, 1), vec![0.5, -1.5]).unwrap();
        assert!(
            cross_check(&free, &x0, 0.0, 10.0, 1e-3)
                .unwrap()
                .max_deviation
                < 1e-12
        );

        let acc = LagrangianSystem::parse(1, 2, "0.5*q1_2^2").unwrap();
        let x0 = StatePoint::new(Chart::jet(3, 1), vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let cc = cross_check(&acc, &x0, 0.0, 2.0, 1e-3).unwrap();
        assert!(cc.max_deviation < 1e-6);
        let last = cc.lagrangian.last_state();
        assert!((last[0] - 8.0 / 6.0).abs() < 1e-10);
    }

    #[test]
    fn residual_reports() {
        let jav = LagrangianSystem::parse(1, 2, "0.5*(q1_1^2 - q1_2^2)").unwrap();
        let g = Curve::javelin(&[[0.2, -0.4, 0.9, 0.3]]);
        let traj = integrate_rk4(
            &lagrangian_ode(&jav).unwrap(),
            &g.lift(3, 0.0).values,
            0.0,
            2.0,
            1e-2,
        )
        .unwrap();
        let el = jav.euler_lagrange();
        // EL needs q_(4); take it from the ODE itself, so only round-off remains.
        let ode = lagrangian_ode(&jav).unwrap();
        let report = residual_along(&traj, |x| {
            let rate = ode.eval(0.0, &x.values)?;
            let mut jet = x.values.clone();
            jet.push(rate[3]);
            Ok(vec![eval_on_jet(&el[0], &jet, 1)?])
        })
        .unwrap();
        assert!(report.max < 1e-12);
        assert_eq!(report.per_sample.len(), traj.len());
    }
}
