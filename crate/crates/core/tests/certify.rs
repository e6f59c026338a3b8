//! Certificate behavior: regime gating, rate agreement, sandwich bounds,
//! and the bijection between conditions and constructions.

use steinweiss::certify::{
    certify_hoelder, certify_lambda_range, certify_lambda_threshold, certify_sum_negative,
    certify_weight_range, cylinder_partial_sum, hoelder_exponent_residual, schedules,
    threshold_exponent, verify_scaling_law, CertifyOptions, ConstructionId, Verdict, WeightSide,
};
use steinweiss::conditions::{
    check_conditions, solve_balance_lambda, ConditionId, SwParams,
};
use steinweiss::error::Error;
use steinweiss::functions::indicator_annulus;
use steinweiss::geometry::{Geometry, GeometryKind};
use steinweiss::scalar::Scalar;

fn opts(budget: u64, seed: u64) -> CertifyOptions {
    CertifyOptions {
        budget,
        seed,
        ..CertifyOptions::default()
    }
}

fn params(
    geom: Geometry,
    p: (i128, i128),
    r: (i128, i128),
    alpha: (i128, i128),
    beta: (i128, i128),
    lambda: (i128, i128),
) -> SwParams {
    SwParams::new(
        geom,
        Scalar::ratio(p.0, p.1),
        Scalar::ratio(r.0, r.1),
        Scalar::ratio(alpha.0, alpha.1),
        Scalar::ratio(beta.0, beta.1),
        Scalar::ratio(lambda.0, lambda.1),
    )
    .unwrap()
}

#[test]
fn lambda_range_log_divergence_at_n() {
    // n = 1, lambda = 1: logarithmic growth; the fitted log coefficient must
    // match the analytic one within 10%
    let p = params(
        Geometry::full_space(1).unwrap(),
        (2, 1),
        (2, 1),
        (0, 1),
        (0, 1),
        (1, 1),
    );
    let cert = certify_lambda_range(&p, &schedules::deltas(), &opts(150_000, 3)).unwrap();
    assert_eq!(cert.verdict, Verdict::CertifiedDivergent);
    assert!((cert.fitted_rate / cert.predicted_rate - 1.0).abs() < 0.1);
    assert!(cert.numeric.unwrap().sandwich_ok);
}

#[test]
fn lambda_range_power_divergence() {
    // n = 2, lambda = 3: T ~ delta^(n - lambda) = delta^-1
    let p = params(
        Geometry::full_space(2).unwrap(),
        (2, 1),
        (2, 1),
        (0, 1),
        (0, 1),
        (3, 1),
    );
    let cert = certify_lambda_range(&p, &schedules::deltas(), &opts(150_000, 4)).unwrap();
    assert_eq!(cert.verdict, Verdict::CertifiedDivergent);
    assert!((cert.fitted_rate - (-1.0)).abs() < 0.1);
}

#[test]
fn lambda_range_regime_errors() {
    let below = params(
        Geometry::full_space(1).unwrap(),
        (2, 1),
        (2, 1),
        (0, 1),
        (0, 1),
        (1, 2),
    );
    assert!(matches!(
        certify_lambda_range(&below, &schedules::deltas(), &opts(1000, 0)),
        Err(Error::WrongRegime { .. })
    ));
    let nonpositive = params(
        Geometry::full_space(1).unwrap(),
        (2, 1),
        (2, 1),
        (0, 1),
        (0, 1),
        (-1, 2),
    );
    assert!(matches!(
        certify_lambda_range(&nonpositive, &schedules::deltas(), &opts(1000, 0)),
        Err(Error::LambdaNonpositive)
    ));
    // half-space input is routed to the threshold construction
    let half = params(
        Geometry::half_space(2).unwrap(),
        (2, 1),
        (2, 1),
        (0, 1),
        (0, 1),
        (3, 1),
    );
    assert!(matches!(
        certify_lambda_range(&half, &schedules::deltas(), &opts(1000, 0)),
        Err(Error::UnsupportedGeometry(_))
    ));
}

#[test]
fn weight_range_boundary_and_power() {
    // n = 1, r = 2 (q = 2), beta = 1/2 = n/q exactly: logarithmic
    let boundary = params(
        Geometry::full_space(1).unwrap(),
        (2, 1),
        (2, 1),
        (0, 1),
        (1, 2),
        (1, 4),
    );
    let cert =
        certify_weight_range(&boundary, WeightSide::Beta, &schedules::rhos(), &opts(120_000, 5))
            .unwrap();
    assert_eq!(cert.verdict, Verdict::CertifiedDivergent);

    // n = 2, q = 2, beta = 3/2: power divergence rho^(n - beta q) = rho^-1
    let power = params(
        Geometry::full_space(2).unwrap(),
        (2, 1),
        (2, 1),
        (0, 1),
        (3, 2),
        (1, 4),
    );
    let cert =
        certify_weight_range(&power, WeightSide::Beta, &schedules::rhos(), &opts(120_000, 6))
            .unwrap();
    assert_eq!(cert.verdict, Verdict::CertifiedDivergent);
    assert!((cert.fitted_rate - (-1.0)).abs() < 0.1);
    assert!(cert.numeric.unwrap().sandwich_ok);

    // below threshold: wrong regime
    let below = params(
        Geometry::full_space(2).unwrap(),
        (2, 1),
        (2, 1),
        (0, 1),
        (1, 2),
        (1, 4),
    );
    assert!(matches!(
        certify_weight_range(&below, WeightSide::Beta, &schedules::rhos(), &opts(1000, 0)),
        Err(Error::WrongRegime { .. })
    ));
}

#[test]
fn weight_range_alpha_side_half_space() {
    // half space n = 2: alpha threshold is (n-1)/q_p = 1/2
    let p = params(
        Geometry::half_space(2).unwrap(),
        (2, 1),
        (2, 1),
        (1, 1),
        (0, 1),
        (1, 2),
    );
    let cert =
        certify_weight_range(&p, WeightSide::Alpha, &schedules::rhos(), &opts(120_000, 7))
            .unwrap();
    assert_eq!(cert.verdict, Verdict::CertifiedDivergent);
    assert!(cert.numeric.unwrap().sandwich_ok);
}

#[test]
fn scaling_law_slopes() {
    let f = indicator_annulus(1, 0.0, 1.0).unwrap();
    let geom = Geometry::full_space(1).unwrap();

    // theta = -1/2: slope +1/2, divergence as s -> infinity
    let p = params(geom, (2, 1), (2, 1), (0, 1), (0, 1), (1, 2));
    let cert = verify_scaling_law(&p, &f, &f, &schedules::scales(), &opts(1000, 0)).unwrap();
    assert_eq!(cert.verdict, Verdict::CertifiedDivergent);
    assert!((cert.fitted_rate - 0.5).abs() < 0.02);

    // theta = +1/2 via lambda = 3/2 (disjoint supports keep the form finite)
    let g = indicator_annulus(1, 2.0, 3.0).unwrap();
    let p = params(geom, (2, 1), (2, 1), (0, 1), (0, 1), (3, 2));
    let cert = verify_scaling_law(&p, &f, &g, &schedules::scales(), &opts(1000, 0)).unwrap();
    assert_eq!(cert.verdict, Verdict::CertifiedDivergent);
    assert!((cert.fitted_rate - (-0.5)).abs() < 0.02);
    // predicted flips sign with theta
    assert!(cert.predicted_rate < 0.0);

    // balance satisfied: plateau
    let p = params(geom, (2, 1), (2, 1), (0, 1), (0, 1), (1, 1));
    let cert = verify_scaling_law(&p, &f, &g, &schedules::scales(), &opts(1000, 0)).unwrap();
    assert_eq!(cert.verdict, Verdict::CertifiedBoundedAtScale);
    assert!(cert.fitted_rate.abs() < 0.02);
}

#[test]
fn sum_negative_partial_sums_and_sandwich() {
    // S_1 = 2 * 2^(-1.5) = 2^(-1/2) for alpha+beta = -1, 1/p+1/r+2eps = 1.5
    let geom = Geometry::full_space(2).unwrap();
    let p = params(geom, (2, 1), (2, 1), (-1, 1), (0, 1), (1, 2));
    let s1 = cylinder_partial_sum(&p, 0.25, 1);
    assert!((s1 - 2f64.powf(-0.5)).abs() < 1e-14);

    // the ratio S_M / S_(M-1) approaches 2^-(alpha+beta) = 2
    let s40 = cylinder_partial_sum(&p, 0.25, 40);
    let s39 = cylinder_partial_sum(&p, 0.25, 39);
    assert!((s40 / s39 - 2.0).abs() < 0.1);

    let cert = certify_sum_negative(&p, 0.05, &[2, 4, 8, 16, 32], &opts(150_000, 8)).unwrap();
    assert_eq!(cert.verdict, Verdict::CertifiedDivergent);
    assert!((cert.fitted_rate - 2f64.ln()).abs() <= cert.rate_tol);
    let numeric = cert.numeric.unwrap();
    assert!(numeric.sandwich_ok);
    assert!(!numeric.values.is_empty());

    // boundary alpha + beta = 0 is the wrong regime
    let boundary = params(geom, (2, 1), (2, 1), (1, 2), (-1, 2), (1, 2));
    assert!(matches!(
        certify_sum_negative(&boundary, 0.05, &[2, 4, 8, 16], &opts(1000, 0)),
        Err(Error::WrongRegime { .. })
    ));
}

#[test]
fn sum_negative_half_space_sandwich() {
    // the half-space variant with the y_n slice factor in the chain
    let geom = Geometry::half_space(2).unwrap();
    let p = params(geom, (2, 1), (2, 1), (-6, 10), (1, 10), (1, 2));
    let cert = certify_sum_negative(&p, 0.05, &[2, 3, 4, 5, 6], &opts(150_000, 9)).unwrap();
    assert_eq!(cert.verdict, Verdict::CertifiedDivergent);
    assert!(cert.numeric.unwrap().sandwich_ok);
}

#[test]
fn hoelder_identity_exact_on_balance_points() {
    // on random balance-satisfying rational points the exponent identity
    // holds exactly in rational arithmetic
    let geoms = [
        Geometry::full_space(3).unwrap(),
        Geometry::half_space(3).unwrap(),
        Geometry::codim(4, 2).unwrap(),
    ];
    for geom in geoms {
        for i in 1..=50i128 {
            let p = Scalar::ratio(2 * i + 3, i + 1); // > 2
            let r = Scalar::ratio(3 * i + 5, i + 2);
            let alpha = Scalar::ratio(i % 7 - 3, 4);
            let beta = Scalar::ratio(i % 5 - 2, 3);
            let lambda = solve_balance_lambda(&geom, p, r, alpha, beta);
            let sw = SwParams::new(geom, p, r, alpha, beta, lambda).unwrap();
            let residual = hoelder_exponent_residual(&sw);
            assert!(
                residual.is_zero(),
                "identity failed at {geom:?}, i={i}: residual {residual}"
            );
        }
    }
}

#[test]
fn hoelder_certificate_matches_closed_form() {
    // full space n = 2, p = r = 4, balance lambda = 3: truncated outer
    // integral fits |S^1| (lnln R - lnln 4) and the verdict is divergent
    let geom = Geometry::full_space(2).unwrap();
    let lam = solve_balance_lambda(
        &geom,
        Scalar::from_int(4),
        Scalar::from_int(4),
        Scalar::zero(),
        Scalar::zero(),
    );
    let p = SwParams::new(
        geom,
        Scalar::from_int(4),
        Scalar::from_int(4),
        Scalar::zero(),
        Scalar::zero(),
        lam,
    )
    .unwrap();
    let cert = certify_hoelder(&p, &schedules::radii(), &opts(1000, 0)).unwrap();
    assert_eq!(cert.verdict, Verdict::CertifiedDivergent);
    let sphere = 2.0 * std::f64::consts::PI;
    for (r, v) in cert.schedule.iter().zip(&cert.values) {
        let closed = sphere * (r.ln().ln() - 4f64.ln().ln());
        assert!(
            ((v - closed) / closed).abs() < 1e-6,
            "R={r}: {v} vs {closed}"
        );
    }

    // 1/p + 1/r = 1 exactly: wrong regime
    let eq = params(geom, (2, 1), (2, 1), (0, 1), (0, 1), (1, 1));
    assert!(matches!(
        certify_hoelder(&eq, &schedules::radii(), &opts(1000, 0)),
        Err(Error::WrongRegime { .. })
    ));

    // balance violated: the identity has no footing
    let unbalanced = params(geom, (4, 1), (4, 1), (0, 1), (0, 1), (1, 1));
    assert!(certify_hoelder(&unbalanced, &schedules::radii(), &opts(1000, 0)).is_err());
}

#[test]
fn threshold_exponents_exact() {
    // n=2, k=1, r=2, lambda = 3/2 = n - 1/r: e* = 1 exactly
    let p = params(
        Geometry::half_space(2).unwrap(),
        (2, 1),
        (2, 1),
        (0, 1),
        (0, 1),
        (3, 2),
    );
    assert_eq!(threshold_exponent(&p), Scalar::from_int(1));

    // n=3, k=1, r=2, lambda = 3: e* = 2
    let p2 = params(
        Geometry::codim(3, 1).unwrap(),
        (2, 1),
        (2, 1),
        (0, 1),
        (0, 1),
        (3, 1),
    );
    assert_eq!(threshold_exponent(&p2), Scalar::from_int(2));
}

#[test]
fn threshold_certificates() {
    // log divergence at the boundary
    let p = params(
        Geometry::half_space(2).unwrap(),
        (2, 1),
        (2, 1),
        (0, 1),
        (0, 1),
        (3, 2),
    );
    let cert = certify_lambda_threshold(&p, &schedules::rhos(), &opts(150_000, 10)).unwrap();
    assert_eq!(cert.verdict, Verdict::CertifiedDivergent);
    assert!(cert.numeric.unwrap().sandwich_ok);

    // power divergence rho^-1 at lambda = 3, n = 3, k = 1, r = 2
    let p2 = params(
        Geometry::codim(3, 1).unwrap(),
        (2, 1),
        (2, 1),
        (0, 1),
        (0, 1),
        (3, 1),
    );
    let cert = certify_lambda_threshold(&p2, &schedules::rhos(), &opts(150_000, 11)).unwrap();
    assert_eq!(cert.verdict, Verdict::CertifiedDivergent);
    assert!((cert.fitted_rate - 1.0).abs() < 0.1);

    // just below the threshold: wrong regime
    let below = params(
        Geometry::half_space(2).unwrap(),
        (2, 1),
        (2, 1),
        (0, 1),
        (0, 1),
        (149, 100),
    );
    assert!(matches!(
        certify_lambda_threshold(&below, &schedules::rhos(), &opts(1000, 0)),
        Err(Error::WrongRegime { .. })
    ));
}

#[test]
fn completeness_bijection() {
    // every condition maps to exactly one construction per geometry kind,
    // and the construction's target is that condition
    for kind in [
        GeometryKind::FullSpace,
        GeometryKind::HalfSpace,
        GeometryKind::CodimK,
    ] {
        let mut seen = Vec::new();
        for id in ConditionId::ALL {
            let c = ConstructionId::for_condition(id, kind);
            assert_eq!(c.target_condition(), id);
            assert!(!seen.contains(&c), "{c:?} reused");
            seen.push(c);
        }
        assert_eq!(seen.len(), 6);
    }
    // the lambda constructions differ between full space and the rest
    assert_ne!(
        ConstructionId::for_condition(ConditionId::LambdaRange, GeometryKind::FullSpace),
        ConstructionId::for_condition(ConditionId::LambdaRange, GeometryKind::HalfSpace),
    );
}

#[test]
fn soundness_on_wrong_regime_grid() {
    // each wrong-regime point certifies divergent; an all-hold point only
    // yields the bounded-at-scale heuristic
    let o = opts(100_000, 21);

    // all-conditions-hold point
    let geom = Geometry::full_space(1).unwrap();
    let valid = params(geom, (2, 1), (2, 1), (0, 1), (0, 1), (1, 1));
    assert!(check_conditions(&valid).all_hold());
    let f = indicator_annulus(1, 0.0, 1.0).unwrap();
    let g = indicator_annulus(1, 2.0, 3.0).unwrap();
    let cert = verify_scaling_law(&valid, &f, &g, &schedules::scales(), &o).unwrap();
    assert_eq!(cert.verdict, Verdict::CertifiedBoundedAtScale);
    // the stabilization check: the last two values differ by < 5%
    let v = &cert.values;
    assert!((v[v.len() - 1] - v[v.len() - 2]).abs() / v[v.len() - 2] < 0.05);

    // wrong-regime grid, one point per construction
    let lam = params(geom, (2, 1), (2, 1), (0, 1), (0, 1), (3, 2));
    assert_eq!(
        certify_lambda_range(&lam, &schedules::deltas(), &o)
            .unwrap()
            .verdict,
        Verdict::CertifiedDivergent
    );
    let beta = params(geom, (2, 1), (2, 1), (0, 1), (3, 4), (1, 4));
    assert_eq!(
        certify_weight_range(&beta, WeightSide::Beta, &schedules::rhos(), &o)
            .unwrap()
            .verdict,
        Verdict::CertifiedDivergent
    );
    let alpha = params(geom, (2, 1), (2, 1), (3, 4), (0, 1), (1, 4));
    assert_eq!(
        certify_weight_range(&alpha, WeightSide::Alpha, &schedules::rhos(), &o)
            .unwrap()
            .verdict,
        Verdict::CertifiedDivergent
    );
    let sum = params(geom, (2, 1), (2, 1), (-1, 1), (1, 2), (1, 2));
    assert_eq!(
        certify_sum_negative(&sum, 0.05, &[2, 4, 8, 16, 32], &o)
            .unwrap()
            .verdict,
        Verdict::CertifiedDivergent
    );
    let geom2 = Geometry::full_space(2).unwrap();
    let hoelder = {
        let lam = solve_balance_lambda(
            &geom2,
            Scalar::from_int(3),
            Scalar::from_int(3),
            Scalar::zero(),
            Scalar::zero(),
        );
        SwParams::new(
            geom2,
            Scalar::from_int(3),
            Scalar::from_int(3),
            Scalar::zero(),
            Scalar::zero(),
            lam,
        )
        .unwrap()
    };
    assert_eq!(
        certify_hoelder(&hoelder, &schedules::radii(), &o)
            .unwrap()
            .verdict,
        Verdict::CertifiedDivergent
    );
    let thr = params(
        Geometry::codim(3, 1).unwrap(),
        (2, 1),
        (2, 1),
        (0, 1),
        (0, 1),
        (3, 1),
    );
    assert_eq!(
        certify_lambda_threshold(&thr, &schedules::rhos(), &o)
            .unwrap()
            .verdict,
        Verdict::CertifiedDivergent
    );
}

#[test]
fn certificate_serializes() {
    let p = params(
        Geometry::full_space(1).unwrap(),
        (2, 1),
        (2, 1),
        (0, 1),
        (0, 1),
        (3, 2),
    );
    let cert = certify_lambda_range(
        &p,
        &schedules::deltas(),
        &CertifyOptions {
            run_numeric: false,
            ..opts(1000, 0)
        },
    )
    .unwrap();
    let json = serde_json::to_value(&cert).unwrap();
    for field in [
        "construction",
        "schedule",
        "values",
        "fitted_rate",
        "predicted_rate",
        "verdict",
        "chain_constant",
        "seed",
    ] {
        assert!(json.get(field).is_some(), "missing {field}");
    }
    assert_eq!(json["schedule"].as_array().unwrap().len(), cert.values.len());
    assert!(cert.values.len() >= 4);
}
