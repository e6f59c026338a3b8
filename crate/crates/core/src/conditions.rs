//! Exact checking of the parameter conditions for the weighted bilinear
//! inequality on all three geometries.
//!
//! The six conditions, with the strictness each theorem states:
//!
//! | id          | condition                                         | strictness |
//! |-------------|---------------------------------------------------|------------|
//! | LambdaRange | 0 < lambda < n - k/r                              | strict     |
//! | AlphaRange  | alpha < (n-k)(p-1)/p                              | strict     |
//! | BetaRange   | beta < n(r-1)/r                                   | strict     |
//! | SumNonneg   | alpha + beta >= 0                                 | non-strict |
//! | Hoelder     | 1/p + 1/r >= 1                                    | non-strict |
//! | Balance     | ((n-k)/n)(1/p) + 1/r + (lambda+alpha+beta+k)/n = 2| equality   |
//!
//! FullSpace is the k = 0 instance of every row. Checks run in exact rational
//! arithmetic whenever all parameters are rational; in float mode Balance
//! uses `BALANCE_TOL` and the strict inequalities are evaluated as-is with no
//! epsilon slack.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geometry::{Geometry, GeometryKind};
use crate::scalar::{conjugate, Scalar};

/// Absolute tolerance on the balance residual in float mode.
pub const BALANCE_TOL: f64 = 1e-12;

/// The parameter tuple of the inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwParams {
    pub geom: Geometry,
    pub p: Scalar,
    pub r: Scalar,
    pub alpha: Scalar,
    pub beta: Scalar,
    pub lambda: Scalar,
}

impl SwParams {
    pub fn new(
        geom: Geometry,
        p: Scalar,
        r: Scalar,
        alpha: Scalar,
        beta: Scalar,
        lambda: Scalar,
    ) -> Result<Self, Error> {
        let one = Scalar::from_int(1);
        if !(p > one) {
            return Err(Error::Domain(format!("p must be > 1, got {p}")));
        }
        if !(r > one) {
            return Err(Error::Domain(format!("r must be > 1, got {r}")));
        }
        Ok(SwParams {
            geom,
            p,
            r,
            alpha,
            beta,
            lambda,
        })
    }

    /// Conjugate exponent of r: q = r/(r-1).
    pub fn q_r(&self) -> Scalar {
        conjugate(self.r).expect("r > 1 by construction")
    }

    /// Conjugate exponent of p: q = p/(p-1).
    pub fn q_p(&self) -> Scalar {
        conjugate(self.p).expect("p > 1 by construction")
    }

    /// True when every parameter is an exact rational.
    pub fn is_exact(&self) -> bool {
        self.p.is_exact()
            && self.r.is_exact()
            && self.alpha.is_exact()
            && self.beta.is_exact()
            && self.lambda.is_exact()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConditionId {
    LambdaRange,
    AlphaRange,
    BetaRange,
    SumNonneg,
    Hoelder,
    Balance,
}

impl ConditionId {
    pub const ALL: [ConditionId; 6] = [
        ConditionId::LambdaRange,
        ConditionId::AlphaRange,
        ConditionId::BetaRange,
        ConditionId::SumNonneg,
        ConditionId::Hoelder,
        ConditionId::Balance,
    ];

    pub fn csv_name(&self) -> &'static str {
        match self {
            ConditionId::LambdaRange => "lambda_range",
            ConditionId::AlphaRange => "alpha_range",
            ConditionId::BetaRange => "beta_range",
            ConditionId::SumNonneg => "sum_nonneg",
            ConditionId::Hoelder => "hoelder",
            ConditionId::Balance => "balance",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strictness {
    /// holds iff residual > 0
    Strict,
    /// holds iff residual >= 0
    NonStrict,
    /// holds iff residual = 0 (|residual| <= BALANCE_TOL in float mode)
    Equality,
}

/// One condition verdict. `residual` is a signed slack: positive means the
/// condition holds with room, zero means it binds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionEntry {
    pub id: ConditionId,
    pub holds: bool,
    pub lhs: Scalar,
    pub rhs: Scalar,
    pub strictness: Strictness,
    pub residual: Scalar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub params: SwParams,
    /// "exact" when all parameters are rational, else "float".
    pub mode: String,
    pub entries: [ConditionEntry; 6],
    /// Lambda lies in [n-k, n-k/r): the range where the parameter check
    /// passes but necessity of the inequality itself is open. Always false
    /// on FullSpace.
    pub necessity_open_band: bool,
}

impl ConditionReport {
    pub fn entry(&self, id: ConditionId) -> &ConditionEntry {
        self.entries
            .iter()
            .find(|e| e.id == id)
            .expect("report carries all six conditions")
    }

    pub fn all_hold(&self) -> bool {
        self.entries.iter().all(|e| e.holds)
    }
}

fn min_scalar(a: Scalar, b: Scalar) -> Scalar {
    if a <= b {
        a
    } else {
        b
    }
}

fn holds_for(residual: Scalar, strictness: Strictness, exact: bool) -> bool {
    let zero = Scalar::zero();
    match strictness {
        Strictness::Strict => residual > zero,
        Strictness::NonStrict => residual >= zero,
        Strictness::Equality => {
            if exact {
                residual.is_zero()
            } else {
                residual.abs().to_f64() <= BALANCE_TOL
            }
        }
    }
}

/// Upper endpoint of the lambda range: n - k/r.
pub fn lambda_upper(geom: &Geometry, r: Scalar) -> Scalar {
    let n = Scalar::from_int(geom.n as i128);
    let k = Scalar::from_int(geom.k as i128);
    n - k / r
}

/// Left-hand side of the balance condition:
/// ((n-k)/n)(1/p) + 1/r + (lambda + alpha + beta + k)/n.
pub fn balance_lhs(params: &SwParams) -> Scalar {
    let n = Scalar::from_int(params.geom.n as i128);
    let k = Scalar::from_int(params.geom.k as i128);
    let nk = Scalar::from_int(params.geom.dim_x() as i128);
    nk / n * params.p.recip()
        + params.r.recip()
        + (params.lambda + params.alpha + params.beta + k) / n
}

/// Balance residual: balance_lhs - 2.
pub fn balance_residual(params: &SwParams) -> Scalar {
    balance_lhs(params) - Scalar::from_int(2)
}

/// Check all six conditions.
pub fn check_conditions(params: &SwParams) -> ConditionReport {
    let exact = params.is_exact();
    let zero = Scalar::zero();
    let one = Scalar::from_int(1);
    let n = Scalar::from_int(params.geom.n as i128);
    let dim_x = Scalar::from_int(params.geom.dim_x() as i128);

    // 0 < lambda < n - k/r; residual is the slack to the nearer endpoint.
    let lam_hi = lambda_upper(&params.geom, params.r);
    let lambda_entry = {
        let residual = min_scalar(params.lambda - zero, lam_hi - params.lambda);
        ConditionEntry {
            id: ConditionId::LambdaRange,
            holds: holds_for(residual, Strictness::Strict, exact),
            lhs: params.lambda,
            rhs: lam_hi,
            strictness: Strictness::Strict,
            residual,
        }
    };

    // alpha < (n-k)(p-1)/p  <=>  alpha < (n-k)/q_p
    let alpha_rhs = dim_x * (params.p - one) / params.p;
    let alpha_entry = {
        let residual = alpha_rhs - params.alpha;
        ConditionEntry {
            id: ConditionId::AlphaRange,
            holds: holds_for(residual, Strictness::Strict, exact),
            lhs: params.alpha,
            rhs: alpha_rhs,
            strictness: Strictness::Strict,
            residual,
        }
    };

    // beta < n(r-1)/r
    let beta_rhs = n * (params.r - one) / params.r;
    let beta_entry = {
        let residual = beta_rhs - params.beta;
        ConditionEntry {
            id: ConditionId::BetaRange,
            holds: holds_for(residual, Strictness::Strict, exact),
            lhs: params.beta,
            rhs: beta_rhs,
            strictness: Strictness::Strict,
            residual,
        }
    };

    // alpha + beta >= 0
    let sum = params.alpha + params.beta;
    let sum_entry = ConditionEntry {
        id: ConditionId::SumNonneg,
        holds: holds_for(sum, Strictness::NonStrict, exact),
        lhs: sum,
        rhs: zero,
        strictness: Strictness::NonStrict,
        residual: sum,
    };

    // 1/p + 1/r >= 1
    let hoelder_lhs = params.p.recip() + params.r.recip();
    let hoelder_entry = {
        let residual = hoelder_lhs - one;
        ConditionEntry {
            id: ConditionId::Hoelder,
            holds: holds_for(residual, Strictness::NonStrict, exact),
            lhs: hoelder_lhs,
            rhs: one,
            strictness: Strictness::NonStrict,
            residual,
        }
    };

    // balance equality
    let bal_lhs = balance_lhs(params);
    let bal_entry = {
        let residual = bal_lhs - Scalar::from_int(2);
        ConditionEntry {
            id: ConditionId::Balance,
            holds: holds_for(residual, Strictness::Equality, exact),
            lhs: bal_lhs,
            rhs: Scalar::from_int(2),
            strictness: Strictness::Equality,
            residual,
        }
    };

    ConditionReport {
        params: *params,
        mode: if exact { "exact".into() } else { "float".into() },
        entries: [
            lambda_entry,
            alpha_entry,
            beta_entry,
            sum_entry,
            hoelder_entry,
            bal_entry,
        ],
        necessity_open_band: in_open_band(params),
    }
}

/// Lambda in [n-k, n-k/r): the parameter check passes but no necessity
/// construction applies there. Empty on FullSpace.
pub fn in_open_band(params: &SwParams) -> bool {
    if params.geom.kind == GeometryKind::FullSpace {
        return false;
    }
    let lo = Scalar::from_int(params.geom.dim_x() as i128);
    let hi = lambda_upper(&params.geom, params.r);
    params.lambda >= lo && params.lambda < hi
}

/// The unique lambda making Balance hold:
/// lambda = n(2 - 1/r - ((n-k)/n)(1/p)) - alpha - beta - k.
pub fn solve_balance_lambda(
    geom: &Geometry,
    p: Scalar,
    r: Scalar,
    alpha: Scalar,
    beta: Scalar,
) -> Scalar {
    let n = Scalar::from_int(geom.n as i128);
    let k = Scalar::from_int(geom.k as i128);
    let nk = Scalar::from_int(geom.dim_x() as i128);
    n * (Scalar::from_int(2) - r.recip() - nk / n * p.recip()) - alpha - beta - k
}

/// Residual of the balance condition rewritten over the x-side dimension:
/// 1/p + 1/r + (lambda + alpha + beta - k/q_r)/(n-k) - 2.
///
/// Equals (n/(n-k)) times the standard balance residual; the identity is
/// exact in rational arithmetic and tested as such. Only meaningful when
/// k >= 1, so FullSpace input is rejected.
pub fn rewritten_balance_residual(params: &SwParams) -> Result<Scalar, Error> {
    if params.geom.kind == GeometryKind::FullSpace {
        return Err(Error::UnsupportedGeometry(
            "rewritten balance residual requires a half-space or codim-k geometry".into(),
        ));
    }
    let k = Scalar::from_int(params.geom.k as i128);
    let nk = Scalar::from_int(params.geom.dim_x() as i128);
    let q = params.q_r();
    Ok(params.p.recip() + params.r.recip()
        + (params.lambda + params.alpha + params.beta - k / q) / nk
        - Scalar::from_int(2))
}

/// Consequences of Balance + Hoelder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpliedBounds {
    /// Upper bound on alpha + beta: n - k/r - lambda.
    pub sum_upper: Scalar,
    /// Upper threshold on lambda alone: n - k/r.
    pub lambda_threshold: Scalar,
}

pub fn implied_bounds(params: &SwParams) -> ImpliedBounds {
    let threshold = lambda_upper(&params.geom, params.r);
    ImpliedBounds {
        sum_upper: threshold - params.lambda,
        lambda_threshold: threshold,
    }
}
