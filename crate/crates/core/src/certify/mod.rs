//! Executable divergence certificates.
//!
//! Each necessity construction becomes an operation that (a) computes the
//! analytic divergent lower bound along a truncation schedule, (b) fits the
//! growth rate and compares it with the predicted exponent, and (c) where a
//! Monte Carlo companion is feasible, checks the quantitative sandwich
//! `numeric >= chain_constant * analytic` with every inequality constant of
//! the bounding chain computed, not assumed.
//!
//! Verdicts never claim the inequality is valid; `CertifiedDivergent` is the
//! necessity direction and `CertifiedBoundedAtScale` is a stability
//! heuristic only.

pub mod fit;

use serde::Serialize;

use crate::conditions::{self, check_conditions, ConditionId, SwParams};
use crate::error::Error;
use crate::functions::{
    cylinder_family, dilate, indicator_annulus, indicator_ball, restrict_upper_half,
    CylinderSide, SamplePiece, TrialFunction,
};
use crate::geometry::GeometryKind;
use crate::quadrature::{
    evaluate_bilinear, evaluate_dual_f, evaluate_dual_g, quad1d, KernelSpec, QuadOptions, Window,
};
use crate::scalar::Scalar;
use crate::special::{ball_volume, sphere_area};

pub use fit::{fit_rate, select_model, FitModel, RateFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConstructionId {
    /// Full space, lambda >= n: concentric annuli around the diagonal.
    LambdaGeN,
    /// beta >= n/q_r: dual f-form blowing up at the origin of the y-side.
    BetaTooBig,
    /// alpha >= (n-k)/q_p: dual g-form blowing up at the origin of the
    /// x-side.
    AlphaTooBig,
    /// Balance violated: the dilation family scales the form to 0 or
    /// infinity.
    BalanceScaling,
    /// alpha + beta < 0: disjoint cylinder stacks along an axis.
    SumNegativeCylinders,
    /// 1/p + 1/r < 1: log-tail family and the exponent identity.
    HoelderLogTail,
    /// Half-space / codim-k, lambda >= n - k/r: layered dual integral over a
    /// thin fiber shell.
    LambdaGeNMinusKOverR,
}

impl ConstructionId {
    /// The condition whose negation is this construction's regime.
    pub fn target_condition(&self) -> ConditionId {
        match self {
            ConstructionId::LambdaGeN | ConstructionId::LambdaGeNMinusKOverR => {
                ConditionId::LambdaRange
            }
            ConstructionId::BetaTooBig => ConditionId::BetaRange,
            ConstructionId::AlphaTooBig => ConditionId::AlphaRange,
            ConstructionId::BalanceScaling => ConditionId::Balance,
            ConstructionId::SumNegativeCylinders => ConditionId::SumNonneg,
            ConstructionId::HoelderLogTail => ConditionId::Hoelder,
        }
    }

    /// The construction certifying a violated condition on a geometry.
    pub fn for_condition(id: ConditionId, kind: GeometryKind) -> ConstructionId {
        match id {
            ConditionId::LambdaRange => match kind {
                GeometryKind::FullSpace => ConstructionId::LambdaGeN,
                _ => ConstructionId::LambdaGeNMinusKOverR,
            },
            ConditionId::AlphaRange => ConstructionId::AlphaTooBig,
            ConditionId::BetaRange => ConstructionId::BetaTooBig,
            ConditionId::SumNonneg => ConstructionId::SumNegativeCylinders,
            ConditionId::Hoelder => ConstructionId::HoelderLogTail,
            ConditionId::Balance => ConstructionId::BalanceScaling,
        }
    }

    pub fn cli_name(&self) -> &'static str {
        match self {
            ConstructionId::LambdaGeN => "lambda-ge-n",
            ConstructionId::BetaTooBig => "beta-too-big",
            ConstructionId::AlphaTooBig => "alpha-too-big",
            ConstructionId::BalanceScaling => "balance-scaling",
            ConstructionId::SumNegativeCylinders => "sum-negative-cylinders",
            ConstructionId::HoelderLogTail => "hoelder-log-tail",
            ConstructionId::LambdaGeNMinusKOverR => "lambda-ge-n-minus-k-over-r",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    CertifiedDivergent,
    CertifiedBoundedAtScale,
    Inconclusive,
}

/// Monte Carlo companion values backing the analytic bound.
#[derive(Debug, Clone, Serialize)]
pub struct NumericCompanion {
    /// The schedule points that were backed numerically (a prefix when the
    /// full schedule is too expensive).
    pub schedule: Vec<f64>,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    /// numeric + 3 sigma >= chain_constant * analytic at every point.
    pub sandwich_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DivergenceCertificate {
    pub construction: ConstructionId,
    /// Truncation parameters ordered so that values increase toward the
    /// divergent limit.
    pub schedule: Vec<f64>,
    /// Analytic truncated integrals or partial sums along the schedule.
    pub values: Vec<f64>,
    pub model: FitModel,
    pub fitted_rate: f64,
    pub predicted_rate: f64,
    pub fit_residual: f64,
    pub rate_tol: f64,
    /// Product of the computed bounding-chain constants relating the
    /// numeric companion to the analytic values.
    pub chain_constant: Option<f64>,
    pub numeric: Option<NumericCompanion>,
    pub verdict: Verdict,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct CertifyOptions {
    pub budget: u64,
    pub seed: u64,
    /// Run the Monte Carlo companion (slower).
    pub run_numeric: bool,
    /// Back at most this many schedule points numerically.
    pub numeric_cap: usize,
    pub rate_tol_rel: f64,
    pub rate_tol_abs: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            budget: 200_000,
            seed: 0,
            run_numeric: true,
            numeric_cap: 10,
            rate_tol_rel: 0.10,
            rate_tol_abs: 0.02,
        }
    }
}

impl CertifyOptions {
    fn rate_tol(&self, predicted: f64) -> f64 {
        (self.rate_tol_rel * predicted.abs()).max(self.rate_tol_abs)
    }

    fn quad(&self, seed_shift: u64) -> QuadOptions {
        QuadOptions {
            budget: self.budget,
            seed: self.seed.wrapping_add(seed_shift),
            ..QuadOptions::default()
        }
    }
}

/// Default truncation schedules (geometric, so the transformed axes are
/// evenly spaced).
pub mod schedules {
    pub fn deltas() -> Vec<f64> {
        (3..=12).map(|k| 2f64.powi(-k)).collect()
    }

    pub fn rhos() -> Vec<f64> {
        deltas()
    }

    pub fn m_indices() -> Vec<u32> {
        vec![2, 4, 8, 16, 32]
    }

    pub fn scales() -> Vec<f64> {
        vec![1.0 / 16.0, 0.25, 1.0, 4.0, 16.0]
    }

    pub fn radii() -> Vec<f64> {
        vec![16.0, 256.0, 65536.0, 4294967296.0]
    }
}

fn strictly_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] > w[0])
}

fn wrong_regime(construction: ConstructionId, detail: impl Into<String>) -> Error {
    Error::WrongRegime {
        construction: construction.cli_name().into(),
        detail: detail.into(),
    }
}

/// int_lo^1 u^a du (the truncated radial integrals all reduce to this).
fn power_integral_to_one(lo: f64, a: f64) -> f64 {
    if (a + 1.0).abs() < 1e-14 {
        (1.0 / lo).ln()
    } else {
        (1.0 - lo.powf(a + 1.0)) / (a + 1.0)
    }
}

fn descending(schedule: &[f64]) -> Vec<f64> {
    let mut s = schedule.to_vec();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s.dedup();
    s
}

/// Weight factor min over t in [lo, hi] of t^(-w); valid for either sign
/// of w (0 < lo <= hi).
fn min_power_weight(w: f64, lo: f64, hi: f64) -> f64 {
    lo.powf(-w).min(hi.powf(-w))
}

// ---------------------------------------------------------------------------
// lambda >= n on the full space
// ---------------------------------------------------------------------------

/// Certifies divergence for lambda >= n on the full space: the inner ball
/// integral int_{B_1(y)} |x-y|^-lambda dx is independent of y, so the
/// truncated configuration over y in B_4 \ B_2 reduces exactly to
/// T(delta) = |B_4 \ B_2| |S^(n-1)| int_delta^1 rho^(n-1-lambda) drho.
/// The numeric companion is the full weighted bilinear form on
/// f = g = chi_{B_6 \ B_1} with the |x-y| < delta neighborhood excised.
pub fn certify_lambda_range(
    params: &SwParams,
    delta_schedule: &[f64],
    opts: &CertifyOptions,
) -> Result<DivergenceCertificate, Error> {
    let construction = ConstructionId::LambdaGeN;
    let geom = params.geom;
    if geom.kind != GeometryKind::FullSpace {
        return Err(Error::UnsupportedGeometry(
            "lambda-ge-n is the full-space construction; use lambda-ge-n-minus-k-over-r".into(),
        ));
    }
    if params.lambda <= Scalar::zero() {
        return Err(Error::LambdaNonpositive);
    }
    let n = geom.n;
    let nf = n as f64;
    if params.lambda < Scalar::from_int(n as i128) {
        return Err(wrong_regime(
            construction,
            format!("lambda = {} < n = {n}: LambdaRange holds above", params.lambda),
        ));
    }
    let lambda = params.lambda.to_f64();
    let alpha = params.alpha.to_f64();
    let beta = params.beta.to_f64();

    let schedule = descending(delta_schedule);
    if schedule.len() < 4 {
        return Err(Error::Domain("need at least 4 schedule points".into()));
    }
    if schedule.iter().any(|d| !(*d > 0.0 && *d < 1.0)) {
        return Err(Error::Domain("deltas must lie in (0, 1)".into()));
    }

    let ring = ball_volume(n)? * (4f64.powi(n as i32) - 2f64.powi(n as i32));
    let sphere = sphere_area(n)?;
    let values: Vec<f64> = schedule
        .iter()
        .map(|&d| ring * sphere * power_integral_to_one(d, nf - 1.0 - lambda))
        .collect();

    let at_boundary = params.lambda == Scalar::from_int(n as i128);
    let (model, predicted) = if at_boundary {
        // T = A ln(1/delta): slope against ln(delta) is -A
        (FitModel::Log, -(ring * sphere))
    } else {
        (FitModel::Power, nf - lambda)
    };
    let fitted = fit_rate(&schedule, &values, model)?;
    // corroborate the boundary log detection by residual comparison
    let (selected, _) = select_model(&schedule, &values, &[FitModel::Power, FitModel::Log])?;
    let model_consistent = !at_boundary || selected == FitModel::Log;

    // chain constants: on the configuration |x| in [1,5], |y| in [2,4]
    let chain = min_power_weight(alpha, 1.0, 5.0) * min_power_weight(beta, 2.0, 4.0);

    let numeric = if opts.run_numeric {
        let f = indicator_annulus(n, 1.0, 6.0)?;
        let cap = opts.numeric_cap.min(schedule.len());
        let mut nvals = Vec::new();
        let mut nerrs = Vec::new();
        for (i, &d) in schedule.iter().take(cap).enumerate() {
            let spec = KernelSpec::new(geom, alpha, beta, lambda).with_exclusion(d);
            let quad = QuadOptions {
                force_monte_carlo: true,
                ..opts.quad(i as u64)
            };
            let res = evaluate_bilinear(&f, &f, &spec, &quad)?;
            nvals.push(res.value);
            nerrs.push(res.error);
        }
        let sandwich_ok = nvals
            .iter()
            .zip(&nerrs)
            .zip(values.iter().take(cap))
            .all(|((v, e), a)| v + 3.0 * e >= chain * a);
        Some(NumericCompanion {
            schedule: schedule[..cap].to_vec(),
            values: nvals,
            errors: nerrs,
            sandwich_ok,
        })
    } else {
        None
    };

    let tol = opts.rate_tol(predicted);
    let rate_ok = (fitted.rate - predicted).abs() <= tol;
    let sandwich_ok = numeric.as_ref().map_or(true, |c| c.sandwich_ok);
    let verdict = if strictly_increasing(&values) && rate_ok && sandwich_ok && model_consistent {
        Verdict::CertifiedDivergent
    } else {
        Verdict::Inconclusive
    };

    Ok(DivergenceCertificate {
        construction,
        schedule,
        values,
        model,
        fitted_rate: fitted.rate,
        predicted_rate: predicted,
        fit_residual: fitted.residual,
        rate_tol: tol,
        chain_constant: Some(chain),
        numeric,
        verdict,
        seed: opts.seed,
    })
}

// ---------------------------------------------------------------------------
// alpha / beta out of range
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightSide {
    Alpha,
    Beta,
}

/// Certifies divergence when a weight exponent reaches its threshold:
/// beta >= n/q_r (f = ring indicator on the x-side, dual f-form blows up at
/// the y-origin) or alpha >= (n-k)/q_p (g = ring indicator on the y-side,
/// dual g-form blows up at the x-origin). The truncated dual integral over
/// {rho <= |.| <= 1} is bounded below by
/// c_inner^q * (sphere measure) * int_rho^1 u^(d-1-wq) du
/// with c_inner the computed uniform lower bound of the inner ring integral.
pub fn certify_weight_range(
    params: &SwParams,
    side: WeightSide,
    rho_schedule: &[f64],
    opts: &CertifyOptions,
) -> Result<DivergenceCertificate, Error> {
    let construction = match side {
        WeightSide::Alpha => ConstructionId::AlphaTooBig,
        WeightSide::Beta => ConstructionId::BetaTooBig,
    };
    let geom = params.geom;
    let report = check_conditions(params);
    let target = construction.target_condition();
    if report.entry(target).holds {
        return Err(wrong_regime(
            construction,
            format!("{target:?} holds at these parameters"),
        ));
    }
    let lambda = params.lambda.to_f64();
    let alpha = params.alpha.to_f64();
    let beta = params.beta.to_f64();
    if !(lambda > 0.0) {
        return Err(Error::Domain(
            "weight-range construction assumes lambda > 0".into(),
        ));
    }

    // d: dimension of the blow-up side; w: its weight; q: the dual exponent
    let (d, w, q) = match side {
        WeightSide::Beta => (geom.dim_y(), beta, params.q_r().to_f64()),
        WeightSide::Alpha => (geom.dim_x(), alpha, params.q_p().to_f64()),
    };
    let half_window = side == WeightSide::Beta && geom.y_restricted_to_half();

    let schedule = descending(rho_schedule);
    if schedule.len() < 4 {
        return Err(Error::Domain("need at least 4 schedule points".into()));
    }
    if schedule.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
        return Err(Error::Domain("rho values must lie in (0, 1)".into()));
    }

    let mut sphere_factor = sphere_area(d)?;
    if half_window {
        sphere_factor /= 2.0;
    }
    let radial_exp = d as f64 - 1.0 - w * q;
    let values: Vec<f64> = schedule
        .iter()
        .map(|&rho| sphere_factor * power_integral_to_one(rho, radial_exp))
        .collect();

    let at_boundary = (radial_exp + 1.0).abs() < 1e-13;
    let (model, predicted) = if at_boundary {
        (FitModel::Log, -sphere_factor)
    } else {
        (FitModel::Power, d as f64 - w * q)
    };
    let fitted = fit_rate(&schedule, &values, model)?;
    let (selected, _) = select_model(&schedule, &values, &[FitModel::Power, FitModel::Log])?;
    let model_consistent = !at_boundary || selected == FitModel::Log;

    // inner ring integral lower bound, every constant computed:
    // ring 2 <= |.| <= 3 against a point of norm <= 1
    let (ring_vol, weight_min, dist_lo, dist_hi) = match side {
        WeightSide::Beta => {
            // inner over x in ring subset R^(n-k): |x - y'| >= 2 - 1 = 1;
            // cross metric adds at most |y''|^2 <= 1 to (3 + 1)^2
            let dx = geom.dim_x();
            let vol = ball_volume(dx)? * (3f64.powi(dx as i32) - 2f64.powi(dx as i32));
            let hi = if geom.k > 0 { 17f64.sqrt() } else { 4.0 };
            (vol, min_power_weight(alpha, 2.0, 3.0), 1.0, hi)
        }
        WeightSide::Alpha => {
            // inner over y in ring subset y-domain: |y| in [2,3], |x| <= 1;
            // cross metric: dist >= (|y| - |x|)/sqrt(2), dist <= sqrt((1+3)^2 + 3^2)
            let n = geom.dim_y();
            let mut vol = ball_volume(n)? * (3f64.powi(n as i32) - 2f64.powi(n as i32));
            if geom.y_restricted_to_half() {
                vol /= 2.0;
            }
            let (lo, hi) = if geom.k > 0 {
                (1.0 / 2f64.sqrt(), 5.0)
            } else {
                (1.0, 4.0)
            };
            (vol, min_power_weight(beta, 2.0, 3.0), lo, hi)
        }
    };
    let kernel_min = dist_lo.powf(-lambda).min(dist_hi.powf(-lambda));
    let c_inner = ring_vol * weight_min * kernel_min;
    let chain = c_inner.powf(q);

    let numeric = if opts.run_numeric {
        let cap = opts.numeric_cap.min(schedule.len());
        let mut nvals = Vec::new();
        let mut nerrs = Vec::new();
        // evaluate the dual integral on geometric shell increments and
        // cumulate, so each window has bounded integrand variation
        let mut cum = 0.0;
        let mut cum_var = 0.0;
        let mut prev_hi = 1.0;
        for (i, &rho) in schedule.iter().take(cap).enumerate() {
            let window = Window::shell(d, rho, prev_hi, half_window);
            let quad = opts.quad(0x100 + i as u64);
            let res = match side {
                WeightSide::Beta => {
                    let f = indicator_annulus(geom.dim_x(), 2.0, 3.0)?;
                    let spec = KernelSpec::new(geom, alpha, beta, lambda);
                    evaluate_dual_f(&f, &spec, q, &window, &quad)?
                }
                WeightSide::Alpha => {
                    let g = {
                        let ring = indicator_annulus(geom.dim_y(), 2.0, 3.0)?;
                        if geom.y_restricted_to_half() {
                            restrict_upper_half(&ring)?
                        } else {
                            ring
                        }
                    };
                    let spec = KernelSpec::new(geom, alpha, beta, lambda);
                    evaluate_dual_g(&g, &spec, q, &window, &quad)?
                }
            };
            cum += res.value;
            cum_var += res.error * res.error;
            prev_hi = rho;
            nvals.push(cum);
            nerrs.push(cum_var.sqrt());
        }
        let sandwich_ok = nvals
            .iter()
            .zip(&nerrs)
            .zip(values.iter().take(cap))
            .all(|((v, e), a)| v + 3.0 * e >= chain * a);
        Some(NumericCompanion {
            schedule: schedule[..cap].to_vec(),
            values: nvals,
            errors: nerrs,
            sandwich_ok,
        })
    } else {
        None
    };

    let tol = opts.rate_tol(predicted);
    let rate_ok = (fitted.rate - predicted).abs() <= tol;
    let sandwich_ok = numeric.as_ref().map_or(true, |c| c.sandwich_ok);
    let verdict = if strictly_increasing(&values) && rate_ok && sandwich_ok && model_consistent {
        Verdict::CertifiedDivergent
    } else {
        Verdict::Inconclusive
    };

    Ok(DivergenceCertificate {
        construction,
        schedule,
        values,
        model,
        fitted_rate: fitted.rate,
        predicted_rate: predicted,
        fit_residual: fitted.residual,
        rate_tol: tol,
        chain_constant: Some(chain),
        numeric,
        verdict,
        seed: opts.seed,
    })
}

// ---------------------------------------------------------------------------
// balance scaling
// ---------------------------------------------------------------------------

/// Dilation study: evaluates I(f_s, g_s) over the scale schedule. The change
/// of variables gives I(f_s, g_s) = s^(-theta n) I(f, g) with theta the
/// balance residual, so the fitted log-log slope must equal -theta n. With
/// theta = 0 the values must plateau (CertifiedBoundedAtScale).
pub fn verify_scaling_law(
    params: &SwParams,
    f: &TrialFunction,
    g: &TrialFunction,
    scales: &[f64],
    opts: &CertifyOptions,
) -> Result<DivergenceCertificate, Error> {
    let construction = ConstructionId::BalanceScaling;
    let geom = params.geom;
    if scales.len() < 4 {
        return Err(Error::Domain("need at least 4 scales".into()));
    }
    if scales.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::Domain("scales must be positive".into()));
    }
    let theta = conditions::balance_residual(params).to_f64();
    let predicted = -theta * geom.n as f64;

    // orient the schedule toward the divergent limit (s -> infinity when the
    // slope is positive, s -> 0 when negative)
    let mut schedule = scales.to_vec();
    schedule.sort_by(|a, b| a.partial_cmp(b).unwrap());
    schedule.dedup();
    if predicted < 0.0 {
        schedule.reverse();
    }

    let p = params.p.to_f64();
    let r = params.r.to_f64();
    let spec = KernelSpec::new(
        geom,
        params.alpha.to_f64(),
        params.beta.to_f64(),
        params.lambda.to_f64(),
    );
    let mut values = Vec::new();
    let mut errors = Vec::new();
    for (i, &s) in schedule.iter().enumerate() {
        let fs = dilate(f, p, s)?;
        let gs = dilate(g, r, s)?;
        let res = evaluate_bilinear(&fs, &gs, &spec, &opts.quad(0x200 + i as u64))?;
        values.push(res.value);
        errors.push(res.error);
    }

    let fitted = fit_rate(&schedule, &values, FitModel::Power)?;
    let tol = opts.rate_tol(predicted);

    let verdict = if theta.abs() < 1e-13 {
        // balance holds: scaling changes nothing; require a plateau
        let max = values.iter().cloned().fold(f64::MIN, f64::max);
        let min = values.iter().cloned().fold(f64::MAX, f64::min);
        if (max - min) / (0.5 * (max + min)) < 0.05 {
            Verdict::CertifiedBoundedAtScale
        } else {
            Verdict::Inconclusive
        }
    } else if strictly_increasing(&values) && (fitted.rate - predicted).abs() <= tol {
        Verdict::CertifiedDivergent
    } else {
        Verdict::Inconclusive
    };

    Ok(DivergenceCertificate {
        construction,
        schedule: schedule.clone(),
        values: values.clone(),
        model: FitModel::Power,
        fitted_rate: fitted.rate,
        predicted_rate: predicted,
        fit_residual: fitted.residual,
        rate_tol: tol,
        chain_constant: None,
        numeric: Some(NumericCompanion {
            schedule,
            values,
            errors,
            sandwich_ok: true,
        }),
        verdict,
        seed: opts.seed,
    })
}

// ---------------------------------------------------------------------------
// alpha + beta < 0: cylinder stacks
// ---------------------------------------------------------------------------

/// The per-geometry constants of the cylinder lower-bound chain:
/// I_M >= C * S_M with S_M the analytic partial sum. Every factor is the
/// computed bound of one chain step:
/// - kernel: |x-y|^2 <= 9 on each diagonal block, so |x-y|^-lambda >= 3^-lambda;
/// - axis weights: |x| in [t, 2t] on a slab, so |x|^-alpha >= min(1, 2^-alpha) t^-alpha,
///   and the slab integral of t^-alpha over [2^m, 2^m+1] is >= min(1, 2^-alpha) 2^(-m alpha):
///   min(1, 2^-w)^2 per side;
/// - cross-sections and the g-side slice factor.
pub fn cylinder_chain_constant(params: &SwParams) -> Result<f64, Error> {
    let geom = params.geom;
    let lambda = params.lambda.to_f64();
    let alpha = params.alpha.to_f64();
    let beta = params.beta.to_f64();
    let kernel = 3f64.powf(-lambda);
    let side = |w: f64| min_power_weight(w, 1.0, 2.0).powi(2);
    let dx = geom.dim_x();
    let cross_f = if dx == 1 { 1.0 } else { ball_volume(dx - 1)? };
    let g_factor = match geom.kind {
        GeometryKind::FullSpace => {
            if geom.n == 1 {
                1.0
            } else {
                ball_volume(geom.n - 1)?
            }
        }
        GeometryKind::HalfSpace => {
            let cross = if geom.n == 2 {
                1.0
            } else {
                ball_volume(geom.n - 2)?
            };
            // slice factor: int_1^2 y_n dy_n = 3/2
            cross * 1.5
        }
        GeometryKind::CodimK => {
            let k = geom.k;
            let cross = if geom.n - k == 1 {
                1.0
            } else {
                ball_volume(geom.n - k - 1)?
            };
            // slice factor: int over 1 < |y''| < 2 of |y''| dy''
            let kk = k as f64;
            cross * sphere_area(k)? * (2f64.powf(kk + 1.0) - 1.0) / (kk + 1.0)
        }
    };
    Ok(kernel * side(alpha) * side(beta) * cross_f * g_factor)
}

/// Analytic partial sum S_M = sum_{m=1}^{M} 2^(-m(alpha+beta)) (m+1)^(-(1/p+1/r+2eps)).
pub fn cylinder_partial_sum(params: &SwParams, eps: f64, m: u32) -> f64 {
    let sum_ab = (params.alpha + params.beta).to_f64();
    let sigma = params.p.recip().to_f64() + params.r.recip().to_f64() + 2.0 * eps;
    (1..=m)
        .map(|j| 2f64.powf(-(j as f64) * sum_ab) * ((j + 1) as f64).powf(-sigma))
        .sum()
}

/// Certifies divergence for alpha + beta < 0 via the disjoint cylinder
/// stacks: analytic partial sums S_M against numerically quadratured
/// truncations of I(f, g) over the first M cylinders.
pub fn certify_sum_negative(
    params: &SwParams,
    eps: f64,
    m_schedule: &[u32],
    opts: &CertifyOptions,
) -> Result<DivergenceCertificate, Error> {
    let construction = ConstructionId::SumNegativeCylinders;
    let geom = params.geom;
    let report = check_conditions(params);
    if report.entry(ConditionId::SumNonneg).holds {
        return Err(wrong_regime(
            construction,
            format!(
                "alpha + beta = {} >= 0: SumNonneg holds (at the boundary the sum no longer grows geometrically)",
                params.alpha + params.beta
            ),
        ));
    }
    if !(eps > 0.0) {
        return Err(Error::Domain("eps must be > 0".into()));
    }
    let lambda = params.lambda.to_f64();
    if !(lambda > 0.0) {
        return Err(Error::Domain(
            "cylinder construction assumes lambda > 0".into(),
        ));
    }

    let mut ms = m_schedule.to_vec();
    ms.sort_unstable();
    ms.dedup();
    if ms.len() < 4 {
        return Err(Error::Domain("need at least 4 truncation indices".into()));
    }
    let sum_ab = (params.alpha + params.beta).to_f64();
    let max_m = *ms.last().unwrap();
    if max_m as f64 * sum_ab.abs() > 900.0 * 2f64.ln() {
        return Err(Error::Domain(
            "partial sums overflow f64 at this truncation depth".into(),
        ));
    }
    let schedule: Vec<f64> = ms.iter().map(|&m| m as f64).collect();
    let values: Vec<f64> = ms
        .iter()
        .map(|&m| cylinder_partial_sum(params, eps, m))
        .collect();

    let predicted = -sum_ab * 2f64.ln();
    // The polynomial factor (m+1)^-sigma drags the per-step growth below its
    // asymptote at small M, so the rate is fitted on a geometric tail
    // extension of the schedule (the partial sums are exact and cheap).
    let tail_top = ((900.0 * 2f64.ln() / sum_ab.abs()) as u32).saturating_sub(1);
    let m_fit_base = max_m.max(32).min(tail_top / 8);
    let fit_ms: Vec<u32> = (0..4).map(|i| m_fit_base << i).collect();
    let fit_schedule: Vec<f64> = fit_ms.iter().map(|&m| m as f64).collect();
    let fit_values: Vec<f64> = fit_ms
        .iter()
        .map(|&m| cylinder_partial_sum(params, eps, m))
        .collect();
    let fitted = fit_rate(&fit_schedule, &fit_values, FitModel::Geometric)?;
    let chain = cylinder_chain_constant(params)?;

    let numeric = if opts.run_numeric {
        let p = params.p.to_f64();
        let r = params.r.to_f64();
        let alpha = params.alpha.to_f64();
        let beta = params.beta.to_f64();
        let mut nsched = Vec::new();
        let mut nvals = Vec::new();
        let mut nerrs = Vec::new();
        for (i, &m) in ms.iter().enumerate() {
            if nsched.len() >= opts.numeric_cap || m > 8 {
                break;
            }
            let f = cylinder_family(&geom, CylinderSide::F, p, eps, m)?;
            let g = cylinder_family(&geom, CylinderSide::G, r, eps, m)?;
            let spec = KernelSpec::new(geom, alpha, beta, lambda);
            let quad = QuadOptions {
                force_monte_carlo: true,
                ..opts.quad(0x300 + i as u64)
            };
            let res = evaluate_bilinear(&f, &g, &spec, &quad)?;
            nsched.push(m as f64);
            nvals.push(res.value);
            nerrs.push(res.error);
        }
        let sandwich_ok = nsched
            .iter()
            .enumerate()
            .all(|(i, &mf)| {
                let a = cylinder_partial_sum(params, eps, mf as u32);
                nvals[i] + 3.0 * nerrs[i] >= chain * a
            });
        Some(NumericCompanion {
            schedule: nsched,
            values: nvals,
            errors: nerrs,
            sandwich_ok,
        })
    } else {
        None
    };

    let tol = opts.rate_tol(predicted);
    let rate_ok = (fitted.rate - predicted).abs() <= tol;
    let sandwich_ok = numeric.as_ref().map_or(true, |c| c.sandwich_ok);
    let verdict = if strictly_increasing(&values) && rate_ok && sandwich_ok {
        Verdict::CertifiedDivergent
    } else {
        Verdict::Inconclusive
    };

    Ok(DivergenceCertificate {
        construction,
        schedule,
        values,
        model: FitModel::Geometric,
        fitted_rate: fitted.rate,
        predicted_rate: predicted,
        fit_residual: fitted.residual,
        rate_tol: tol,
        chain_constant: Some(chain),
        numeric,
        verdict,
        seed: opts.seed,
    })
}

// ---------------------------------------------------------------------------
// 1/p + 1/r < 1: the log-tail family
// ---------------------------------------------------------------------------

/// Exact residual of the outer-exponent identity used by the log-tail
/// construction. Zero whenever Balance holds:
/// - FullSpace: (lambda+alpha+beta + n/p) q_r = n + n q_r,
/// - HalfSpace/CodimK: (lambda+alpha+beta + n/r) q_p = (n-k) + n q_p.
pub fn hoelder_exponent_residual(params: &SwParams) -> Scalar {
    let n = Scalar::from_int(params.geom.n as i128);
    let k = Scalar::from_int(params.geom.k as i128);
    let sum = params.lambda + params.alpha + params.beta;
    match params.geom.kind {
        GeometryKind::FullSpace => {
            let q = params.q_r();
            (sum + n / params.p) * q - (n + n * q)
        }
        _ => {
            let q = params.q_p();
            (sum + n / params.r) * q - ((n - k) + n * q)
        }
    }
}

/// Certifies divergence for 1/p + 1/r < 1 (with Balance holding): verifies
/// the exponent identity exactly, then computes the truncated outer integral
/// int_{4 <= |z| <= R} |z|^(-d) / ln|z| dz = |S^(d-1)| (lnln R - lnln 4) and
/// fits its log-log growth.
pub fn certify_hoelder(
    params: &SwParams,
    r_schedule: &[f64],
    opts: &CertifyOptions,
) -> Result<DivergenceCertificate, Error> {
    let construction = ConstructionId::HoelderLogTail;
    let report = check_conditions(params);
    if report.entry(ConditionId::Hoelder).holds {
        return Err(wrong_regime(
            construction,
            format!(
                "1/p + 1/r = {} >= 1: Hoelder holds",
                params.p.recip() + params.r.recip()
            ),
        ));
    }
    if !report.entry(ConditionId::Balance).holds {
        return Err(Error::Domain(
            "the log-tail construction uses the exponent identity, which needs Balance to hold"
                .into(),
        ));
    }
    let identity = hoelder_exponent_residual(params);
    let identity_ok = if params.is_exact() {
        identity.is_zero()
    } else {
        identity.to_f64().abs() <= 1e-9
    };

    // outer dimension: y-side (dual f) on the full space, x-side (dual g)
    // on the half-space / codim-k geometries
    let d_out = match params.geom.kind {
        GeometryKind::FullSpace => params.geom.dim_y(),
        _ => params.geom.dim_x(),
    };
    let sphere = sphere_area(d_out)?;

    let mut schedule = r_schedule.to_vec();
    schedule.sort_by(|a, b| a.partial_cmp(b).unwrap());
    schedule.dedup();
    if schedule.len() < 4 {
        return Err(Error::Domain("need at least 4 radii".into()));
    }
    if schedule.iter().any(|r| *r <= 4.0) {
        return Err(Error::Domain("truncation radii must exceed 4".into()));
    }

    // deterministic 1-D quadrature of the truncated outer integral
    let values: Vec<f64> = schedule
        .iter()
        .map(|&r| {
            let (v, _) = quad1d::integrate(|rho| 1.0 / (rho * rho.ln()), 4.0, r, 1e-13, 1e-12);
            sphere * v
        })
        .collect();

    let fitted = fit_rate(&schedule, &values, FitModel::LogLog)?;
    let predicted = sphere;
    let tol = opts.rate_tol(predicted);
    let rate_ok = (fitted.rate - predicted).abs() <= tol;
    let verdict = if identity_ok && rate_ok && strictly_increasing(&values) {
        Verdict::CertifiedDivergent
    } else {
        Verdict::Inconclusive
    };

    Ok(DivergenceCertificate {
        construction,
        schedule,
        values,
        model: FitModel::LogLog,
        fitted_rate: fitted.rate,
        predicted_rate: predicted,
        fit_residual: fitted.residual,
        rate_tol: tol,
        chain_constant: None,
        numeric: None,
        verdict,
        seed: opts.seed,
    })
}

// ---------------------------------------------------------------------------
// lambda >= n - k/r on the half-space / codim-k geometries
// ---------------------------------------------------------------------------

/// The layered-bound exponent e* = (lambda - k/q_r - (n-k)) q_r + 1, exact
/// when the parameters are. The inner truncated integral is
/// int_rho^1 t^(-e*) dt: logarithmic at e* = 1 (lambda = n - k/r exactly),
/// power rho^(1-e*) for e* > 1.
pub fn threshold_exponent(params: &SwParams) -> Scalar {
    let q = params.q_r();
    let k = Scalar::from_int(params.geom.k as i128);
    let nk = Scalar::from_int(params.geom.dim_x() as i128);
    (params.lambda - k / q - nk) * q + Scalar::from_int(1)
}

/// Certifies divergence for lambda >= n - k/r on the half-space / codim-k
/// geometries: the dual f-form with f = chi_{B_6} restricted to the window
/// {(y', y_(n-k)) in B_4 \ B_2, rho <= |y''| <= 1} is bounded below by
/// chain * int_rho^1 t^(-e*) dt, with the chain constants computed from
/// |x - y| <= sqrt(2) |y''| on the inner ball, |x| in [1, 5], |y| in [2, sqrt(17)].
pub fn certify_lambda_threshold(
    params: &SwParams,
    rho_schedule: &[f64],
    opts: &CertifyOptions,
) -> Result<DivergenceCertificate, Error> {
    let construction = ConstructionId::LambdaGeNMinusKOverR;
    let geom = params.geom;
    if geom.kind == GeometryKind::FullSpace {
        return Err(Error::UnsupportedGeometry(
            "lambda-ge-n-minus-k-over-r needs a half-space or codim-k geometry; use lambda-ge-n"
                .into(),
        ));
    }
    if params.lambda <= Scalar::zero() {
        return Err(Error::LambdaNonpositive);
    }
    let threshold = conditions::lambda_upper(&geom, params.r);
    if params.lambda < threshold {
        return Err(wrong_regime(
            construction,
            format!(
                "lambda = {} < n - k/r = {threshold}: LambdaRange holds above",
                params.lambda
            ),
        ));
    }

    let e_star = threshold_exponent(params);
    let e_star_f = e_star.to_f64();
    let q = params.q_r().to_f64();
    let lambda = params.lambda.to_f64();
    let alpha = params.alpha.to_f64();
    let beta = params.beta.to_f64();
    let k = geom.k;
    let dx = geom.dim_x();

    let schedule = descending(rho_schedule);
    if schedule.len() < 4 {
        return Err(Error::Domain("need at least 4 schedule points".into()));
    }
    if schedule.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
        return Err(Error::Domain("rho values must lie in (0, 1)".into()));
    }

    let values: Vec<f64> = schedule
        .iter()
        .map(|&rho| power_integral_to_one(rho, -e_star_f))
        .collect();

    let at_boundary = e_star == Scalar::from_int(1);
    // rates against ln(1/rho): blow-up exponent e* - 1, or the log
    // coefficient 1 at the boundary
    let inv_schedule: Vec<f64> = schedule.iter().map(|r| 1.0 / r).collect();
    let (model, predicted) = if at_boundary {
        (FitModel::Log, 1.0)
    } else {
        (FitModel::Power, e_star_f - 1.0)
    };
    let fitted = fit_rate(&inv_schedule, &values, model)?;
    let (selected, _) = select_model(&inv_schedule, &values, &[FitModel::Power, FitModel::Log])?;
    let model_consistent = !at_boundary || selected == FitModel::Log;

    // chain constants:
    // T_f(y) >= (sqrt(2) t)^-lambda min(1, 5^-alpha) omega_(n-k) t^(n-k)
    //   for x in B_t(y_base): |x - y|^2 <= t^2 + t^2, |x| in [1, 5] subset B_6;
    // |y| in [2, sqrt(17)] on the window
    let c1 = 2f64.powf(-lambda / 2.0) * min_power_weight(alpha, 1.0, 5.0) * ball_volume(dx)?;
    let c2 = min_power_weight(beta, 2.0, 17f64.sqrt());
    let ring_vol = ball_volume(dx)? * (4f64.powi(dx as i32) - 2f64.powi(dx as i32));
    let fiber_angular = if geom.kind == GeometryKind::HalfSpace {
        1.0
    } else {
        sphere_area(k)?
    };
    let chain = (c1 * c2).powf(q) * ring_vol * fiber_angular;

    let numeric = if opts.run_numeric {
        let f = indicator_ball(dx, 6.0)?;
        let spec = KernelSpec::new(geom, alpha, beta, lambda);
        let cap = opts.numeric_cap.min(schedule.len());
        let mut nvals = Vec::new();
        let mut nerrs = Vec::new();
        let mut cum = 0.0;
        let mut cum_var = 0.0;
        let mut prev_hi = 1.0;
        for (i, &rho) in schedule.iter().take(cap).enumerate() {
            let window = Window::from_pieces(vec![SamplePiece::ShellProduct {
                base_dim: dx,
                base_lo: 2.0,
                base_hi: 4.0,
                fiber_dim: k,
                fiber_lo: rho,
                fiber_hi: prev_hi,
                fiber_half: geom.kind == GeometryKind::HalfSpace,
            }]);
            let res = evaluate_dual_f(&f, &spec, q, &window, &opts.quad(0x400 + i as u64))?;
            cum += res.value;
            cum_var += res.error * res.error;
            prev_hi = rho;
            nvals.push(cum);
            nerrs.push(cum_var.sqrt());
        }
        let sandwich_ok = nvals
            .iter()
            .zip(&nerrs)
            .zip(values.iter().take(cap))
            .all(|((v, e), a)| v + 3.0 * e >= chain * a);
        Some(NumericCompanion {
            schedule: schedule[..cap].to_vec(),
            values: nvals,
            errors: nerrs,
            sandwich_ok,
        })
    } else {
        None
    };

    let tol = opts.rate_tol(predicted);
    let rate_ok = (fitted.rate - predicted).abs() <= tol;
    let sandwich_ok = numeric.as_ref().map_or(true, |c| c.sandwich_ok);
    let verdict = if strictly_increasing(&values) && rate_ok && sandwich_ok && model_consistent {
        Verdict::CertifiedDivergent
    } else {
        Verdict::Inconclusive
    };

    Ok(DivergenceCertificate {
        construction,
        schedule,
        values,
        model,
        fitted_rate: fitted.rate,
        predicted_rate: predicted,
        fit_residual: fitted.residual,
        rate_tol: tol,
        chain_constant: Some(chain),
        numeric,
        verdict,
        seed: opts.seed,
    })
}
