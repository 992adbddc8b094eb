mod common;

use std::collections::HashMap;

use common::{arb_expr, assignment, gen_var, point_strategy};
use hodyn::jet::{holonomy_residual, prolong_polynomial_curve, tulczyjew_derivative, Basis};
use hodyn::symbolic::{differentiate, evaluate, format, parse, simplify, Expr, VarRef};
use hodyn::{Chart, StatePoint};
use proptest::prelude::*;

const FD_STEP: f64 = 1e-6;

fn eval(e: &Expr, at: &HashMap<VarRef, f64>) -> f64 {
    evaluate(e, at).unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

/// Expressions in `q1_0, q1_1, q2_0, q2_1` only, so `d_T` applies.
fn jet_expr() -> impl Strategy<Value = Expr> {
    arb_expr().prop_map(|e| {
        let map: HashMap<VarRef, Expr> = [(VarRef::p(1, 0), Expr::var(VarRef::q(2, 1)))].into();
        hodyn::symbolic::substitute(&e, &map)
    })
}

fn jet_assignment(values: &[f64], n: u32, levels: u32) -> HashMap<VarRef, f64> {
    let mut out = HashMap::new();
    for j in 0..levels {
        for i in 1..=n {
            out.insert(VarRef::q(i, j), values[(j * n + i - 1) as usize]);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn derivative_matches_central_difference(e in arb_expr(), x in point_strategy(), which in 0usize..4) {
        let v = gen_var(which);
        let d = eval(&differentiate(&e, v), &assignment(&x));
        let mut hi = assignment(&x);
        let mut lo = assignment(&x);
        *hi.get_mut(&v).unwrap() += FD_STEP;
        *lo.get_mut(&v).unwrap() -= FD_STEP;
        let fd = (eval(&e, &hi) - eval(&e, &lo)) / (2.0 * FD_STEP);
        let scale = 1.0 + d.abs() + eval(&e, &assignment(&x)).abs();
        prop_assert!((d - fd).abs() < 1e-6 * scale, "d = {d}, fd = {fd} for {e}");
    }

    #[test]
    fn simplify_is_idempotent(e in arb_expr()) {
        let once = simplify(&e);
        prop_assert_eq!(simplify(&once), once);
    }

    #[test]
    fn format_parse_round_trip(e in arb_expr(), x in point_strategy()) {
        let canonical = simplify(&e);
        let reparsed = parse(&format(&canonical)).unwrap();
        prop_assert_eq!(simplify(&reparsed), canonical.clone());
        let raw = parse(&format(&e)).unwrap();
        prop_assert!(close(eval(&raw, &assignment(&x)), eval(&e, &assignment(&x)), 1e-12));
    }

    #[test]
    fn derivative_is_linear(
        a in arb_expr(), b in arb_expr(), ca in -3i64..=3, cb in -3i64..=3,
        x in point_strategy(), which in 0usize..4,
    ) {
        let v = gen_var(which);
        let combo = Expr::int(ca) * a.clone() + Expr::int(cb) * b.clone();
        let lhs = eval(&differentiate(&combo, v), &assignment(&x));
        let rhs = ca as f64 * eval(&differentiate(&a, v), &assignment(&x))
            + cb as f64 * eval(&differentiate(&b, v), &assignment(&x));
        prop_assert!(close(lhs, rhs, 1e-9), "{lhs} vs {rhs}");
    }

    #[test]
    fn total_derivative_leibniz_and_linearity(
        f in jet_expr(), g in jet_expr(), c in -3i64..=3,
        values in prop::collection::vec(-1.0f64..1.0, 6),
    ) {
        let at = jet_assignment(&values, 2, 3);
        let dt = |e: &Expr| eval(&tulczyjew_derivative(e, 1).unwrap(), &at);
        let product = dt(&(f.clone() * g.clone()));
        let leibniz = dt(&f) * eval(&g, &at) + eval(&f, &at) * dt(&g);
        prop_assert!(close(product, leibniz, 1e-9), "{product} vs {leibniz}");
        let sum = dt(&(f.clone() + Expr::int(c) * g.clone()));
        prop_assert!(close(sum, dt(&f) + c as f64 * dt(&g), 1e-9));
        let chain = dt(&Expr::sin(f.clone()));
        prop_assert!(close(chain, eval(&f, &at).cos() * dt(&f), 1e-9));
    }

    #[test]
    fn total_derivative_along_prolonged_curves(
        f in jet_expr(),
        coeffs in prop::collection::vec(-1.0f64..1.0, 8),
        t in -1.0f64..1.0,
    ) {
        let basis = [Basis::Power(0), Basis::Power(1), Basis::Sin, Basis::Cos];
        let components = (0..2)
            .map(|i| (0..4).map(|b| (coeffs[4 * i + b], basis[b])).collect())
            .collect();
        let curve = prolong_polynomial_curve(components, 2).unwrap();
        let value = |t: f64| eval(&f, &jet_assignment(&curve.at(t).values, 2, 2));
        let fd = (value(t + FD_STEP) - value(t - FD_STEP)) / (2.0 * FD_STEP);
        let exact = eval(&tulczyjew_derivative(&f, 1).unwrap(), &jet_assignment(&curve.at(t).values, 2, 3));
        let scale = 1.0 + exact.abs() + value(t).abs();
        prop_assert!((fd - exact).abs() < 1e-6 * scale, "{fd} vs {exact}");
    }

    #[test]
    fn prolonged_curves_are_holonomic(
        coeffs in prop::collection::vec(-2.0f64..2.0, 12),
        t in -3.0f64..3.0,
    ) {
        let (k, n) = (3u32, 3u32);
        let basis = [Basis::Power(3), Basis::Power(2), Basis::Sin, Basis::Cos];
        let components = (0..3)
            .map(|i| (0..4).map(|b| (coeffs[4 * i + b], basis[b])).collect())
            .collect();
        let curve = prolong_polynomial_curve(components, k).unwrap();
        let size = (k * n) as usize;
        let here = curve.at(t).values;
        let ahead = curve.at(t + FD_STEP).values;
        let behind = curve.at(t - FD_STEP).values;
        let mut tangent = here[..size].to_vec();
        tangent.extend((0..size).map(|i| (ahead[i] - behind[i]) / (2.0 * FD_STEP)));
        let point = StatePoint::new(Chart::tan_jet(k, n), tangent).unwrap();
        for r in holonomy_residual(k, n, &point).unwrap() {
            prop_assert!(r.abs() < 1e-6 * (1.0 + here.iter().fold(0.0f64, |a, x| a.max(x.abs()))));
        }
    }
}
