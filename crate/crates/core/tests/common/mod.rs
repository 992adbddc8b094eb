#![allow(dead_code)]

use hodyn::symbolic::{Expr, VarRef};
use hodyn::{HamiltonianSystem, LagrangianSystem};
use proptest::prelude::*;

/// Regular Lagrangians whose top fiber derivative is affine, with names.
pub fn lagrangian_suite() -> Vec<(&'static str, LagrangianSystem)> {
    [
        ("javelin", 1, 2, "0.5*(q1_1^2 - q1_2^2)"),
        ("free particle", 1, 1, "0.5*q1_1^2"),
        ("acceleration", 1, 2, "0.5*q1_2^2"),
        (
            "third order",
            1,
            3,
            "0.5*q1_3^2 - 3*q1_2^2 + 5.5*q1_1^2 - 3*q1_0^2",
        ),
        (
            "coupled",
            2,
            2,
            "0.5*(q1_2^2 + q2_2^2 + q1_2*q2_2) - 1.5*(q1_1^2 + q2_1^2 + q1_1*q2_1) \
             + q1_0^2 + q2_0^2 + q1_0*q2_0",
        ),
        (
            "javelin 3d",
            3,
            2,
            "0.5*(q1_1^2 + q2_1^2 + q3_1^2 - q1_2^2 - q2_2^2 - q3_2^2)",
        ),
    ]
    .into_iter()
    .map(|(name, n, k, text)| (name, LagrangianSystem::parse(n, k, text).unwrap()))
    .collect()
}

/// Suite members plus systems with state-dependent Hessians.
pub fn extended_suite() -> Vec<(&'static str, LagrangianSystem)> {
    let mut out = lagrangian_suite();
    out.push((
        "variable mass",
        LagrangianSystem::parse(1, 2, "0.5*(1 + q1_0^2)*q1_2^2 - 0.5*q1_1^2").unwrap(),
    ));
    out.push((
        "pendulum like",
        LagrangianSystem::parse(1, 2, "0.5*q1_2^2 + 0.5*q1_1^2 + cos(q1_0)").unwrap(),
    ));
    out
}

pub fn hamiltonian_suite() -> Vec<(&'static str, HamiltonianSystem)> {
    [
        ("acceleration", 1, 2, "p1_0*q1_1 + 0.5*p1_1^2"),
        ("javelin", 1, 2, "p1_0*q1_1 - 0.5*(q1_1^2 + p1_1^2)"),
        ("free particle", 1, 1, "0.5*p1_0^2"),
        (
            "third order",
            1,
            3,
            "p1_0*q1_1 + p1_1*q1_2 + 0.5*p1_2^2 + 3*q1_2^2 - 5.5*q1_1^2 + 3*q1_0^2",
        ),
    ]
    .into_iter()
    .map(|(name, n, k, text)| (name, HamiltonianSystem::parse(n, k, text).unwrap()))
    .collect()
}

pub const GEN_VARS: [&str; 4] = ["q1_0", "q1_1", "q2_0", "p1_0"];

pub fn gen_var(idx: usize) -> VarRef {
    match idx {
        0 => VarRef::q(1, 0),
        1 => VarRef::q(1, 1),
        2 => VarRef::q(2, 0),
        _ => VarRef::p(1, 0),
    }
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        4 => (0usize..4).prop_map(|i| Expr::var(gen_var(i))),
        2 => (-3i64..=3).prop_map(Expr::int),
        1 => ((-5i64..=5), (1i64..=4)).prop_map(|(a, b)| Expr::ratio(a, b)),
        1 => prop::sample::select(vec![0.25, -1.5, 2.75, 0.1]).prop_map(Expr::float),
    ]
}

/// Random expressions that evaluate finitely on `[-1, 1]^4`.
pub fn arb_expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::sum),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::product),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            inner.clone().prop_map(Expr::negate),
            (inner.clone(), 0i64..=3).prop_map(|(a, e)| Expr::pow(a, e)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a / (Expr::one() + Expr::pow(b, 2))),
            inner.clone().prop_map(Expr::sin),
            inner.clone().prop_map(Expr::cos),
            inner.clone().prop_map(|a| Expr::exp(Expr::sin(a))),
            inner
                .clone()
                .prop_map(|a| Expr::ln(Expr::int(2) + Expr::cos(a))),
            inner.prop_map(|a| Expr::sqrt(Expr::one() + Expr::pow(a, 2))),
        ]
    })
}

pub fn point_strategy() -> impl Strategy<Value = [f64; 4]> {
    [-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0]
}

pub fn assignment(point: &[f64; 4]) -> std::collections::HashMap<VarRef, f64> {
    (0..4).map(|i| (gen_var(i), point[i])).collect()
}

pub mod flows {
    use hodyn::dynamics::{
        canonical_ode, drift_of, integrate_rk4, lagrangian_energy_drift, lagrangian_ode,
    };
    use hodyn::hamiltonian::canonical_hamiltonian;
    use hodyn::jet::Curve;
    use hodyn::LagrangianSystem;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub const T1: f64 = 10.0;

    pub fn javelin(n: u32) -> LagrangianSystem {
        let terms: Vec<String> = (1..=n).map(|i| format!("q{i}_1^2 - q{i}_2^2")).collect();
        LagrangianSystem::parse(n, 2, &format!("0.5*({})", terms.join(" + "))).unwrap()
    }

    /// Coefficients of `c1 + c2 t + c3 sin t + c4 cos t` per dof, uniform in `[-1, 1]`.
    pub fn random_javelin_curve(n: u32, seed: u64) -> Curve {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs: Vec<[f64; 4]> = (0..n)
            .map(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))
            .collect();
        Curve::javelin(&coeffs)
    }

    /// Largest deviation from the closed form over `[0, T1]` for the
    /// Lagrangian and the Hamiltonian flow, in their own charts.
    pub fn javelin_errors(n: u32, seed: u64, h: f64) -> (f64, f64) {
        let lsys = javelin(n);
        let curve = random_javelin_curve(n, seed);
        let leg = lsys.legendre_ostrogradsky();
        let x0 = curve.lift(3, 0.0).values;
        let lag = integrate_rk4(&lagrangian_ode(&lsys).unwrap(), &x0, 0.0, T1, h).unwrap();
        let (can, _) = canonical_hamiltonian(&lsys).unwrap();
        let ham = integrate_rk4(
            &canonical_ode(&can),
            &leg.apply_values(&x0).unwrap(),
            0.0,
            T1,
            h,
        )
        .unwrap();
        let mut errors = (0.0f64, 0.0f64);
        for (idx, t) in lag.times.iter().enumerate() {
            let exact = curve.lift(3, *t).values;
            let exact_cot = leg.apply_values(&exact).unwrap();
            for (a, b) in lag.states[idx].iter().zip(&exact) {
                errors.0 = errors.0.max((a - b).abs());
            }
            for (a, b) in ham.states[idx].iter().zip(&exact_cot) {
                errors.1 = errors.1.max((a - b).abs());
            }
        }
        errors
    }

    /// Energy drift of `H` along the Hamiltonian flow and of `E_L` along the
    /// Lagrangian flow, from seeded initial data in `[-1, 1]`.
    pub fn energy_drifts(lsys: &LagrangianSystem, h: f64, seed: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ode = lagrangian_ode(lsys).unwrap();
        let x0: Vec<f64> = (0..ode.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lag = integrate_rk4(&ode, &x0, 0.0, T1, h).unwrap();
        let (can, _) = canonical_hamiltonian(lsys).unwrap();
        let start = lsys.legendre_ostrogradsky().apply_values(&x0).unwrap();
        let ham = integrate_rk4(&canonical_ode(&can), &start, 0.0, T1, h).unwrap();
        let h_drift = drift_of(&ham, |x| can.value_at(x)).unwrap();
        (h_drift, lagrangian_energy_drift(lsys, &lag).unwrap())
    }
}
