//! Numerical exploration of doubly weighted Hardy-Littlewood-Sobolev
//! (Stein-Weiss) bilinear forms on three geometries: R^n x R^n, the upper
//! half space pairing R^(n-1) x R^n_+, and the codimension-k pairing
//! R^(n-k) x R^n.
//!
//! The crate provides:
//!
//! - [`conditions`]: exact rational checking of the complete parameter
//!   condition sets, balance solving, and the rewritten balance identity.
//! - [`functions`]: the trial function families used by the necessity
//!   constructions (annuli, cylinder stacks, log tails) with analytic norms.
//! - [`quadrature`]: evaluation of the weighted bilinear form, its dual
//!   operator forms, and Lebesgue norms, by radial-deterministic quadrature
//!   or seeded Monte Carlo with importance sampling near the kernel
//!   singularity.
//! - [`certify`]: executable divergence certificates: truncation schedules,
//!   analytic lower bounds with computed chain constants, and fitted vs
//!   predicted blow-up rates.

pub mod certify;
pub mod conditions;
pub mod error;
pub mod functions;
pub mod geometry;
pub mod quadrature;
pub mod scalar;
pub mod special;

pub use conditions::{
    balance_residual, check_conditions, implied_bounds, in_open_band,
    rewritten_balance_residual, solve_balance_lambda, ConditionId, ConditionReport, SwParams,
};
pub use error::Error;
pub use geometry::{Geometry, GeometryKind};
pub use scalar::{conjugate, Rational, Scalar};
