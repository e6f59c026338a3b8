//! Property and grid tests for the condition checker.

use proptest::prelude::*;

use steinweiss::conditions::{
    balance_residual, check_conditions, rewritten_balance_residual, solve_balance_lambda,
    ConditionId, SwParams,
};
use steinweiss::geometry::Geometry;
use steinweiss::scalar::{conjugate, Scalar};

fn rational(num: i128, den: i128) -> Scalar {
    Scalar::ratio(num, den)
}

/// Exponents > 1 as small rationals.
fn exponent_strategy() -> impl Strategy<Value = Scalar> {
    (1i128..=60, 1i128..=60).prop_map(|(a, b)| {
        // 1 + a/b > 1
        Scalar::ratio(b + a, b)
    })
}

fn weight_strategy() -> impl Strategy<Value = Scalar> {
    (-40i128..=40, 1i128..=20).prop_map(|(a, b)| Scalar::ratio(a, b))
}

proptest! {
    #[test]
    fn conjugate_is_involutive(e in exponent_strategy()) {
        let c = conjugate(e).unwrap();
        prop_assert!(c > Scalar::from_int(1));
        prop_assert_eq!(conjugate(c).unwrap(), e);
    }

    #[test]
    fn rewritten_balance_is_scaled_residual(
        n in 2u32..=8,
        k_off in 0u32..=6,
        half in any::<bool>(),
        p in exponent_strategy(),
        r in exponent_strategy(),
        alpha in weight_strategy(),
        beta in weight_strategy(),
        lambda in weight_strategy(),
    ) {
        let k = 1 + k_off % (n - 1);
        let geom = if half && k == 1 {
            Geometry::half_space(n).unwrap()
        } else {
            Geometry::codim(n, k).unwrap()
        };
        let params = SwParams::new(geom, p, r, alpha, beta, lambda).unwrap();
        let lhs = rewritten_balance_residual(&params).unwrap();
        let scale = Scalar::from_int(n as i128) / Scalar::from_int((n - k) as i128);
        let rhs = scale * balance_residual(&params);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn solver_round_trips(
        n in 1u32..=8,
        p in exponent_strategy(),
        r in exponent_strategy(),
        alpha in weight_strategy(),
        beta in weight_strategy(),
    ) {
        let geom = Geometry::full_space(n).unwrap();
        let lambda = solve_balance_lambda(&geom, p, r, alpha, beta);
        let params = SwParams::new(geom, p, r, alpha, beta, lambda).unwrap();
        prop_assert!(balance_residual(&params).is_zero());
        prop_assert!(check_conditions(&params).entry(ConditionId::Balance).holds);
    }

    #[test]
    fn check_is_pure(
        p in exponent_strategy(),
        r in exponent_strategy(),
        alpha in weight_strategy(),
        lambda in weight_strategy(),
    ) {
        let geom = Geometry::half_space(3).unwrap();
        let params = SwParams::new(geom, p, r, alpha, Scalar::zero(), lambda).unwrap();
        let a = check_conditions(&params);
        let b = check_conditions(&params);
        prop_assert_eq!(a, b);
    }
}

/// A small rational grid of exponents > 1.
fn exponent_grid() -> Vec<Scalar> {
    let mut out = Vec::new();
    for den in 1..=4i128 {
        for num in (den + 1)..=(6 * den) {
            out.push(rational(num, den));
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup();
    out
}

#[test]
fn zero_weight_reduction_on_full_space() {
    // alpha = beta = 0: Balance plus 0 < lambda < n makes every remaining
    // condition automatic
    for n in [1u32, 2, 3, 5] {
        let geom = Geometry::full_space(n).unwrap();
        for &p in &exponent_grid() {
            for &r in &exponent_grid() {
                let lambda = solve_balance_lambda(&geom, p, r, Scalar::zero(), Scalar::zero());
                if !(lambda > Scalar::zero() && lambda < Scalar::from_int(n as i128)) {
                    continue;
                }
                let params =
                    SwParams::new(geom, p, r, Scalar::zero(), Scalar::zero(), lambda).unwrap();
                let report = check_conditions(&params);
                assert!(
                    report.all_hold(),
                    "automatic conditions failed at n={n}, p={p}, r={r}, lambda={lambda}"
                );
            }
        }
    }
}

#[test]
fn full_space_implication_lambda_at_most_n() {
    // SumNonneg + Hoelder + Balance force lambda <= n, with lambda = n only
    // when both hold with equality
    let weights: Vec<Scalar> = (-6..=6).map(|a| rational(a, 2)).collect();
    let mut checked = 0u64;
    for n in [1u32, 2, 3] {
        let geom = Geometry::full_space(n).unwrap();
        let nn = Scalar::from_int(n as i128);
        for &p in &exponent_grid() {
            for &r in &exponent_grid() {
                for &alpha in &weights {
                    for &beta in &weights {
                        let lambda = solve_balance_lambda(&geom, p, r, alpha, beta);
                        let params = SwParams::new(geom, p, r, alpha, beta, lambda).unwrap();
                        let report = check_conditions(&params);
                        let sum_ok = report.entry(ConditionId::SumNonneg).holds;
                        let hoelder_ok = report.entry(ConditionId::Hoelder).holds;
                        if !(sum_ok && hoelder_ok) {
                            continue;
                        }
                        checked += 1;
                        assert!(
                            lambda <= nn,
                            "implication failed: lambda = {lambda} > n = {n} at p={p} r={r} a={alpha} b={beta}"
                        );
                        if lambda == nn {
                            assert!((alpha + beta).is_zero());
                            assert_eq!(p.recip() + r.recip(), Scalar::from_int(1));
                        }
                    }
                }
            }
        }
    }
    assert!(checked > 1000, "grid too sparse: {checked}");
}

#[test]
fn non_implication_on_half_space_and_codim() {
    // Points where SumNonneg, Hoelder, and Balance all hold but LambdaRange
    // fails: only possible at lambda = n - k/r with both equalities binding.
    let half = SwParams::new(
        Geometry::half_space(2).unwrap(),
        Scalar::from_int(2),
        Scalar::from_int(2),
        Scalar::zero(),
        Scalar::zero(),
        rational(3, 2),
    )
    .unwrap();
    let report = check_conditions(&half);
    assert!(report.entry(ConditionId::SumNonneg).holds);
    assert!(report.entry(ConditionId::Hoelder).holds);
    assert!(report.entry(ConditionId::Balance).holds);
    assert!(
        !report.entry(ConditionId::LambdaRange).holds,
        "lambda = 3/2 = n - 1/r must fail the strict range"
    );

    let codim = SwParams::new(
        Geometry::codim(3, 2).unwrap(),
        Scalar::from_int(2),
        Scalar::from_int(2),
        Scalar::zero(),
        Scalar::zero(),
        Scalar::from_int(2),
    )
    .unwrap();
    let report = check_conditions(&codim);
    assert!(report.entry(ConditionId::SumNonneg).holds);
    assert!(report.entry(ConditionId::Hoelder).holds);
    assert!(report.entry(ConditionId::Balance).holds);
    assert!(!report.entry(ConditionId::LambdaRange).holds);
}

#[test]
fn half_space_conditions_coincide_with_codim_one() {
    let weights: Vec<Scalar> = (-4..=4).map(|a| rational(a, 2)).collect();
    for n in [2u32, 3, 4] {
        let half = Geometry::half_space(n).unwrap();
        let codim = Geometry::codim(n, 1).unwrap();
        for &p in &exponent_grid()[..8] {
            for &r in &exponent_grid()[..8] {
                for &alpha in &weights {
                    for &lambda in &weights {
                        let ph = SwParams::new(half, p, r, alpha, Scalar::zero(), lambda).unwrap();
                        let pc = SwParams::new(codim, p, r, alpha, Scalar::zero(), lambda).unwrap();
                        let rh = check_conditions(&ph);
                        let rc = check_conditions(&pc);
                        for (eh, ec) in rh.entries.iter().zip(rc.entries.iter()) {
                            assert_eq!(eh.holds, ec.holds, "mismatch at {ph:?}");
                            assert_eq!(eh.residual, ec.residual);
                        }
                        assert_eq!(rh.necessity_open_band, rc.necessity_open_band);
                    }
                }
            }
        }
    }
}

#[test]
fn open_band_is_flagged_without_failing_the_range() {
    let params = SwParams::new(
        Geometry::half_space(2).unwrap(),
        Scalar::from_int(2),
        Scalar::from_int(2),
        Scalar::zero(),
        Scalar::zero(),
        rational(5, 4), // in [1, 3/2)
    )
    .unwrap();
    let report = check_conditions(&params);
    assert!(report.necessity_open_band);
    assert!(report.entry(ConditionId::LambdaRange).holds);
}

#[test]
fn report_serializes_with_stable_fields() {
    let params = SwParams::new(
        Geometry::full_space(3).unwrap(),
        rational(6, 5),
        rational(6, 5),
        Scalar::zero(),
        Scalar::zero(),
        Scalar::from_int(1),
    )
    .unwrap();
    let report = check_conditions(&params);
    let json = serde_json::to_value(&report).unwrap();
    assert_eq!(json["mode"], "exact");
    let entries = json["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 6);
    for entry in entries {
        for field in ["id", "holds", "lhs", "rhs", "strictness", "residual"] {
            assert!(entry.get(field).is_some(), "missing field {field}");
        }
    }
    // exact scalars serialize as fraction strings
    assert_eq!(json["params"]["p"], "6/5");
}
