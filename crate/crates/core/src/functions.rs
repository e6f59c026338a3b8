//! Trial functions: the families every necessity construction is built from,
//! with evaluators, support descriptors, exact-cover samplers, and analytic
//! norms.
//!
//! Families:
//! - annulus / ball indicators (radial),
//! - axis-aligned box indicators,
//! - cylinder stacks: width-1 slabs at heights 2^m along one axis with a
//!   unit-ball cross-section, value `(log2 t)^(-1/e - eps)` on slab m, with
//!   the g-side half-space variant carrying the extra factor `y_n` on the
//!   slice 1 < y_n < 2 and the codim-k variant carrying `|y''|` on
//!   1 < |y''| < 2,
//! - log tails: `|x|^(-dim/e) (log |x|)^(-1/q)` on `|x| >= 2` (natural log;
//!   the cylinder family uses log base 2 — the two are deliberately not
//!   unified),
//! - restriction of a symmetric function to the upper half space, and
//! - dilations `x -> scale^(-dim/e) f(x / scale)`, which preserve the L^e
//!   norm exactly.

use serde::Serialize;

use crate::error::Error;
use crate::geometry::{Geometry, GeometryKind};
use crate::quadrature::quad1d;
use crate::special::{ball_volume, sphere_area};

const LOG2: f64 = std::f64::consts::LN_2;

/// Which side of the bilinear form a cylinder family feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CylinderSide {
    /// Lives on the x-side domain; exponent is p.
    F,
    /// Lives on the y-side domain (all of R^n, R^n_+, or the codim-k split);
    /// exponent is r.
    G,
}

/// Shared knobs of the counterexample families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyParams {
    /// The eps in the cylinder exponents (log2 t)^(-1/e - eps).
    pub eps: f64,
    /// Cylinder truncation index M: slabs m = 1..=m_max.
    pub m_max: u32,
    /// Dilation scale (a distinct knob from eps).
    pub scale: f64,
}

impl FamilyParams {
    pub fn new(eps: f64, m_max: u32, scale: f64) -> Result<Self, Error> {
        if !(eps > 0.0) {
            return Err(Error::Domain("eps must be > 0".into()));
        }
        if m_max < 1 {
            return Err(Error::Domain("m_max must be >= 1".into()));
        }
        if !(scale > 0.0) {
            return Err(Error::Domain("scale must be > 0".into()));
        }
        Ok(FamilyParams { eps, m_max, scale })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Family {
    /// Indicator of {inner <= |x| <= outer}.
    Annulus { inner: f64, outer: f64 },
    /// Indicator of the axis-aligned box.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Slab stack along the last axis (f-side and full-space g-side shape).
    Cylinder {
        exponent: f64,
        eps: f64,
        m_max: u32,
    },
    /// Half-space g-side: slabs along axis dim-2, slice 1 < y_n < 2,
    /// extra factor y_n.
    CylinderHalfSlice {
        exponent: f64,
        eps: f64,
        m_max: u32,
    },
    /// Codim-k g-side: slabs along axis dim-k-1, shell slice 1 < |y''| < 2
    /// over the last k axes, extra factor |y''|.
    CylinderCodimSlice {
        k: u32,
        exponent: f64,
        eps: f64,
        m_max: u32,
    },
    /// |x|^(-dim/decay) (ln |x|)^(-1/log_exp) on 2 <= |x| (<= r_max).
    LogTail {
        decay: f64,
        log_exp: f64,
        r_max: Option<f64>,
    },
    /// Inner function restricted to {last coordinate > 0}; inner must be
    /// symmetric in the last coordinate (radial families are).
    UpperHalf(Box<TrialFunction>),
    /// value_factor * inner(x / length_scale).
    Scaled {
        inner: Box<TrialFunction>,
        value_factor: f64,
        length_scale: f64,
    },
}

/// An evaluable nonnegative trial function on R^dim.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialFunction {
    dim: u32,
    label: String,
    family: Family,
}

/// Indicator of the annulus B_outer \ B_inner (a ball when inner = 0).
pub fn indicator_annulus(dim: u32, inner: f64, outer: f64) -> Result<TrialFunction, Error> {
    if dim < 1 {
        return Err(Error::Domain("dim must be >= 1".into()));
    }
    if !(inner >= 0.0 && inner < outer) {
        return Err(Error::Domain(format!(
            "annulus requires 0 <= inner < outer, got [{inner}, {outer}]"
        )));
    }
    let label = if inner == 0.0 {
        format!("ball:{dim}:{outer}")
    } else {
        format!("annulus:{dim}:{inner}:{outer}")
    };
    Ok(TrialFunction {
        dim,
        label,
        family: Family::Annulus { inner, outer },
    })
}

pub fn indicator_ball(dim: u32, radius: f64) -> Result<TrialFunction, Error> {
    indicator_annulus(dim, 0.0, radius)
}

/// Indicator of the box prod [lo_i, hi_i].
pub fn indicator_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<TrialFunction, Error> {
    if lo.is_empty() || lo.len() != hi.len() {
        return Err(Error::Domain(
            "box bounds must be nonempty, equal length".into(),
        ));
    }
    for (l, h) in lo.iter().zip(&hi) {
        if !(l < h) {
            return Err(Error::Domain(format!("box requires lo < hi, got [{l}, {h}]")));
        }
    }
    let dim = lo.len() as u32;
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    let label = format!("box:{dim}:{}:{}", fmt(&lo), fmt(&hi));
    Ok(TrialFunction {
        dim,
        label,
        family: Family::Box { lo, hi },
    })
}

/// The cylinder-stack family for a geometry and side.
///
/// The f-side version lives on R^dim_x with value `(log2 x_last)^(-1/p-eps)`
/// on each slab {2^m <= x_last <= 2^m + 1, |x'| <= 1}, m = 1..=m_max. The
/// g-side version on R^n keeps the same slab/stack shape for FullSpace and
/// carries the extra slice factor for HalfSpace (y_n on 1 < y_n < 2) and
/// CodimK (|y''| on 1 < |y''| < 2).
pub fn cylinder_family(
    geom: &Geometry,
    side: CylinderSide,
    exponent: f64,
    eps: f64,
    m_max: u32,
) -> Result<TrialFunction, Error> {
    if !(eps > 0.0) {
        return Err(Error::Domain(
            "cylinder family requires eps > 0 (the infinite-stack norm diverges at eps = 0)"
                .into(),
        ));
    }
    if !(exponent > 1.0) {
        return Err(Error::Domain("cylinder exponent must be > 1".into()));
    }
    if m_max < 1 {
        return Err(Error::Domain("m_max must be >= 1".into()));
    }
    if m_max > 900 {
        return Err(Error::Domain(
            "m_max beyond 900 overflows slab heights".into(),
        ));
    }
    let (dim, family, tag) = match (side, geom.kind) {
        (CylinderSide::F, _) => {
            let d = geom.dim_x();
            (
                d,
                Family::Cylinder {
                    exponent,
                    eps,
                    m_max,
                },
                format!(
                    "cylinder:{}:n={}:k={}:p={exponent}",
                    geom.label(),
                    geom.n,
                    geom.k
                ),
            )
        }
        (CylinderSide::G, GeometryKind::FullSpace) => (
            geom.n,
            Family::Cylinder {
                exponent,
                eps,
                m_max,
            },
            format!("cylinder:full:n={}:r={exponent}", geom.n),
        ),
        (CylinderSide::G, GeometryKind::HalfSpace) => (
            geom.n,
            Family::CylinderHalfSlice {
                exponent,
                eps,
                m_max,
            },
            format!("cylinder:half:n={}:r={exponent}", geom.n),
        ),
        (CylinderSide::G, GeometryKind::CodimK) => (
            geom.n,
            Family::CylinderCodimSlice {
                k: geom.k,
                exponent,
                eps,
                m_max,
            },
            format!("cylinder:codim:n={}:k={}:r={exponent}", geom.n, geom.k),
        ),
    };
    Ok(TrialFunction {
        dim,
        label: format!("{tag}:eps={eps}:M={m_max}"),
        family,
    })
}

/// The log-tail family `|x|^(-dim/e) (ln |x|)^(-1/q)` on {|x| >= 2},
/// optionally truncated at |x| = r_max.
pub fn log_tail(
    dim: u32,
    decay_exponent: f64,
    log_exponent: f64,
    r_max: Option<f64>,
) -> Result<TrialFunction, Error> {
    if dim < 1 {
        return Err(Error::Domain("dim must be >= 1".into()));
    }
    if !(log_exponent > 1.0) {
        return Err(Error::Domain("log exponent q must be > 1".into()));
    }
    if !(decay_exponent > log_exponent) {
        return Err(Error::NormDivergence(format!(
            "log tail needs e > q for a finite L^e norm, got e = {decay_exponent}, q = {log_exponent}"
        )));
    }
    if let Some(r) = r_max {
        if !(r > 2.0) {
            return Err(Error::Domain("r_max must exceed the inner radius 2".into()));
        }
    }
    let label = match r_max {
        Some(r) => format!("logtail:{dim}:e={decay_exponent}:q={log_exponent}:R={r}"),
        None => format!("logtail:{dim}:e={decay_exponent}:q={log_exponent}"),
    };
    Ok(TrialFunction {
        dim,
        label,
        family: Family::LogTail {
            decay: decay_exponent,
            log_exp: log_exponent,
            r_max,
        },
    })
}

/// Dilation `x -> scale^(-dim/e) f(x / scale)`; preserves the L^e norm.
pub fn dilate(f: &TrialFunction, exponent_e: f64, scale: f64) -> Result<TrialFunction, Error> {
    if !(scale > 0.0) {
        return Err(Error::Domain("dilation scale must be > 0".into()));
    }
    if scale == 1.0 {
        return Ok(f.clone());
    }
    let value_factor = scale.powf(-(f.dim as f64) / exponent_e);
    Ok(TrialFunction {
        dim: f.dim,
        label: format!("dilate({},e={exponent_e},s={scale})", f.label),
        family: Family::Scaled {
            inner: Box::new(f.clone()),
            value_factor,
            length_scale: scale,
        },
    })
}

/// Multiply a function by a positive constant (keeps the support).
pub fn scale_values(f: &TrialFunction, c: f64) -> Result<TrialFunction, Error> {
    if !(c > 0.0) {
        return Err(Error::Domain("value factor must be > 0".into()));
    }
    Ok(TrialFunction {
        dim: f.dim,
        label: format!("scale({},c={c})", f.label),
        family: Family::Scaled {
            inner: Box::new(f.clone()),
            value_factor: c,
            length_scale: 1.0,
        },
    })
}

/// Restrict a function symmetric in its last coordinate to {x_last > 0}.
pub fn restrict_upper_half(f: &TrialFunction) -> Result<TrialFunction, Error> {
    if !f.is_radial() {
        return Err(Error::Domain(
            "upper-half restriction is implemented for radial (symmetric) functions".into(),
        ));
    }
    Ok(TrialFunction {
        dim: f.dim,
        label: format!("{}:half", f.label),
        family: Family::UpperHalf(Box::new(f.clone())),
    })
}

/// Slab value profile shared by the cylinder families:
/// returns (log2 t)^(-1/e - eps) when t lies in a slab 1 <= m <= m_max.
fn slab_value(t: f64, exponent: f64, eps: f64, m_max: u32) -> Option<f64> {
    if t < 2.0 {
        return None;
    }
    let log2t = t.ln() / LOG2;
    let m = log2t.floor() as u32;
    if m < 1 || m > m_max {
        return None;
    }
    let base = 2f64.powi(m as i32);
    if t > base + 1.0 {
        return None;
    }
    let sigma = 1.0 / exponent + eps;
    Some(log2t.powf(-sigma))
}

impl TrialFunction {
    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Pointwise evaluation; returns 0 outside the support.
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim as usize);
        match &self.family {
            Family::Annulus { inner, outer } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let r = r2.sqrt();
                if r >= *inner && r <= *outer {
                    1.0
                } else {
                    0.0
                }
            }
            Family::Box { lo, hi } => {
                for ((v, l), h) in x.iter().zip(lo).zip(hi) {
                    if v < l || v > h {
                        return 0.0;
                    }
                }
                1.0
            }
            Family::Cylinder {
                exponent,
                eps,
                m_max,
            } => {
                let d = self.dim as usize;
                let cross: f64 = x[..d - 1].iter().map(|v| v * v).sum();
                if cross > 1.0 {
                    return 0.0;
                }
                slab_value(x[d - 1], *exponent, *eps, *m_max).unwrap_or(0.0)
            }
            Family::CylinderHalfSlice {
                exponent,
                eps,
                m_max,
            } => {
                let d = self.dim as usize;
                let y_n = x[d - 1];
                if y_n <= 1.0 || y_n >= 2.0 {
                    return 0.0;
                }
                let cross: f64 = x[..d - 2].iter().map(|v| v * v).sum();
                if cross > 1.0 {
                    return 0.0;
                }
                slab_value(x[d - 2], *exponent, *eps, *m_max).map_or(0.0, |v| v * y_n)
            }
            Family::CylinderCodimSlice {
                k,
                exponent,
                eps,
                m_max,
            } => {
                let d = self.dim as usize;
                let k = *k as usize;
                let fiber2: f64 = x[d - k..].iter().map(|v| v * v).sum();
                let rho = fiber2.sqrt();
                if rho <= 1.0 || rho >= 2.0 {
                    return 0.0;
                }
                let cross: f64 = x[..d - k - 1].iter().map(|v| v * v).sum();
                if cross > 1.0 {
                    return 0.0;
                }
                slab_value(x[d - k - 1], *exponent, *eps, *m_max).map_or(0.0, |v| v * rho)
            }
            Family::LogTail {
                decay,
                log_exp,
                r_max,
            } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let r = r2.sqrt();
                if r < 2.0 || r_max.map_or(false, |m| r > m) {
                    return 0.0;
                }
                r.powf(-(self.dim as f64) / decay) * r.ln().powf(-1.0 / log_exp)
            }
            Family::UpperHalf(inner) => {
                if x[self.dim as usize - 1] > 0.0 {
                    inner.eval(x)
                } else {
                    0.0
                }
            }
            Family::Scaled {
                inner,
                value_factor,
                length_scale,
            } => {
                let scaled: Vec<f64> = x.iter().map(|v| v / length_scale).collect();
                value_factor * inner.eval(&scaled)
            }
        }
    }

    /// Radial value profile, when the function is radial.
    pub fn radial_value(&self, s: f64) -> f64 {
        debug_assert!(self.is_radial());
        match &self.family {
            Family::Annulus { inner, outer } => {
                if s >= *inner && s <= *outer {
                    1.0
                } else {
                    0.0
                }
            }
            Family::LogTail {
                decay,
                log_exp,
                r_max,
            } => {
                if s < 2.0 || r_max.map_or(false, |m| s > m) {
                    0.0
                } else {
                    s.powf(-(self.dim as f64) / decay) * s.ln().powf(-1.0 / log_exp)
                }
            }
            Family::Scaled {
                inner,
                value_factor,
                length_scale,
            } => value_factor * inner.radial_value(s / length_scale),
            _ => 0.0,
        }
    }

    pub fn is_radial(&self) -> bool {
        match &self.family {
            Family::Annulus { .. } | Family::LogTail { .. } => true,
            Family::Scaled { inner, .. } => inner.is_radial(),
            _ => false,
        }
    }

    /// Exact tail decay descriptor for untruncated log tails:
    /// value = s^(-dim/decay) (ln s)^(-1/log_exp). Returns (decay, log_exp).
    pub fn log_tail_form(&self) -> Option<(f64, f64)> {
        match &self.family {
            Family::LogTail {
                decay,
                log_exp,
                r_max: None,
            } => Some((*decay, *log_exp)),
            _ => None,
        }
    }

    /// Radial support pieces [lo, hi] (hi = +inf for untruncated tails).
    pub fn radial_pieces(&self) -> Option<Vec<(f64, f64)>> {
        match &self.family {
            Family::Annulus { inner, outer } => Some(vec![(*inner, *outer)]),
            Family::LogTail { r_max, .. } => Some(vec![(2.0, r_max.unwrap_or(f64::INFINITY))]),
            Family::Scaled {
                inner,
                length_scale,
                ..
            } => inner.radial_pieces().map(|ps| {
                ps.into_iter()
                    .map(|(a, b)| (a * length_scale, b * length_scale))
                    .collect()
            }),
            _ => None,
        }
    }

    /// Everything inside the support lies within this radius of the origin.
    /// Infinite for untruncated tails.
    pub fn bounding_radius(&self) -> f64 {
        match &self.family {
            Family::Annulus { outer, .. } => *outer,
            Family::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(l, h)| l.abs().max(h.abs()).powi(2))
                .sum::<f64>()
                .sqrt(),
            Family::Cylinder { m_max, .. } => {
                let top = 2f64.powi(*m_max as i32) + 1.0;
                (top * top + 1.0).sqrt()
            }
            Family::CylinderHalfSlice { m_max, .. }
            | Family::CylinderCodimSlice { m_max, .. } => {
                let top = 2f64.powi(*m_max as i32) + 1.0;
                (top * top + 1.0 + 4.0).sqrt()
            }
            Family::LogTail { r_max, .. } => r_max.unwrap_or(f64::INFINITY),
            Family::UpperHalf(inner) => inner.bounding_radius(),
            Family::Scaled {
                inner,
                length_scale,
                ..
            } => inner.bounding_radius() * length_scale,
        }
    }

    /// Exact-cover sampling pieces for Monte Carlo, with volumes.
    /// Errors for unbounded supports (use the deterministic radial path or
    /// an explicit truncation instead — truncation is never silent).
    pub fn sample_pieces(&self) -> Result<Vec<SamplePiece>, Error> {
        match &self.family {
            Family::Annulus { inner, outer } => Ok(vec![SamplePiece::Shell {
                dim: self.dim,
                lo: *inner,
                hi: *outer,
                half: false,
            }]),
            Family::Box { lo, hi } => Ok(vec![SamplePiece::Box {
                lo: lo.clone(),
                hi: hi.clone(),
            }]),
            Family::Cylinder { m_max, .. } => Ok((1..=*m_max)
                .map(|m| SamplePiece::Slab {
                    cross_dim: self.dim - 1,
                    cross_radius: 1.0,
                    t_lo: 2f64.powi(m as i32),
                    t_hi: 2f64.powi(m as i32) + 1.0,
                    fiber: Fiber::None,
                })
                .collect()),
            Family::CylinderHalfSlice { m_max, .. } => Ok((1..=*m_max)
                .map(|m| SamplePiece::Slab {
                    cross_dim: self.dim - 2,
                    cross_radius: 1.0,
                    t_lo: 2f64.powi(m as i32),
                    t_hi: 2f64.powi(m as i32) + 1.0,
                    fiber: Fiber::Interval { lo: 1.0, hi: 2.0 },
                })
                .collect()),
            Family::CylinderCodimSlice { k, m_max, .. } => Ok((1..=*m_max)
                .map(|m| SamplePiece::Slab {
                    cross_dim: self.dim - k - 1,
                    cross_radius: 1.0,
                    t_lo: 2f64.powi(m as i32),
                    t_hi: 2f64.powi(m as i32) + 1.0,
                    fiber: Fiber::Shell {
                        dim: *k,
                        lo: 1.0,
                        hi: 2.0,
                    },
                })
                .collect()),
            Family::LogTail { r_max, .. } => match r_max {
                Some(r) => Ok(vec![SamplePiece::Shell {
                    dim: self.dim,
                    lo: 2.0,
                    hi: *r,
                    half: false,
                }]),
                None => Err(Error::Domain(format!(
                    "{}: unbounded support has no Monte Carlo cover; truncate explicitly or use the radial path",
                    self.label
                ))),
            },
            Family::UpperHalf(inner) => {
                let pieces = inner.sample_pieces()?;
                pieces
                    .into_iter()
                    .map(|p| match p {
                        SamplePiece::Shell { dim, lo, hi, .. } => Ok(SamplePiece::Shell {
                            dim,
                            lo,
                            hi,
                            half: true,
                        }),
                        _ => Err(Error::Domain(
                            "upper-half restriction only covers radial pieces".into(),
                        )),
                    })
                    .collect()
            }
            Family::Scaled {
                inner,
                length_scale,
                ..
            } => {
                let pieces = inner.sample_pieces()?;
                Ok(pieces
                    .into_iter()
                    .map(|p| p.scaled(*length_scale))
                    .collect())
            }
        }
    }

    /// Analytic L^e norm when one is known in closed form or as a
    /// deterministic 1-D reduction. None when no analytic route exists
    /// (then `lp_norm_numeric` is the only option).
    pub fn analytic_norm(&self, e: f64) -> Option<f64> {
        if !(e >= 1.0) {
            return None;
        }
        match &self.family {
            Family::Annulus { inner, outer } => {
                let vol = ball_volume(self.dim).ok()?
                    * (outer.powi(self.dim as i32) - inner.powi(self.dim as i32));
                Some(vol.powf(1.0 / e))
            }
            Family::Box { lo, hi } => {
                let vol: f64 = lo.iter().zip(hi).map(|(l, h)| h - l).product();
                Some(vol.powf(1.0 / e))
            }
            Family::Cylinder {
                exponent,
                eps,
                m_max,
            } => {
                let cross = if self.dim == 1 {
                    1.0
                } else {
                    ball_volume(self.dim - 1).ok()?
                };
                let sum = slab_log_integral_sum(e * (1.0 / exponent + eps), *m_max);
                Some((cross * sum).powf(1.0 / e))
            }
            Family::CylinderHalfSlice {
                exponent,
                eps,
                m_max,
            } => {
                let cross = if self.dim == 2 {
                    1.0
                } else {
                    ball_volume(self.dim - 2).ok()?
                };
                // slice factor: integral of y_n^e over (1, 2)
                let slice = (2f64.powf(e + 1.0) - 1.0) / (e + 1.0);
                let sum = slab_log_integral_sum(e * (1.0 / exponent + eps), *m_max);
                Some((cross * slice * sum).powf(1.0 / e))
            }
            Family::CylinderCodimSlice {
                k,
                exponent,
                eps,
                m_max,
            } => {
                let cross_dim = self.dim - k - 1;
                let cross = if cross_dim == 0 {
                    1.0
                } else {
                    ball_volume(cross_dim).ok()?
                };
                // slice factor: integral of |y''|^e over 1 < |y''| < 2 in R^k
                let kk = *k as f64;
                let slice = sphere_area(*k).ok()? * (2f64.powf(e + kk) - 1.0) / (e + kk);
                let sum = slab_log_integral_sum(e * (1.0 / exponent + eps), *m_max);
                Some((cross * slice * sum).powf(1.0 / e))
            }
            Family::LogTail {
                decay,
                log_exp,
                r_max,
            } => {
                // closed form only at the design exponent e = decay
                if (e - decay).abs() > 1e-12 {
                    return None;
                }
                let a = decay / log_exp; // > 1
                let lo = LOG2.powf(1.0 - a);
                let hi = r_max.map_or(0.0, |r| r.ln().powf(1.0 - a));
                let integral = sphere_area(self.dim).ok()? * (lo - hi) / (a - 1.0);
                Some(integral.powf(1.0 / e))
            }
            Family::UpperHalf(inner) => Some(inner.analytic_norm(e)? * 0.5f64.powf(1.0 / e)),
            Family::Scaled {
                inner,
                value_factor,
                length_scale,
            } => Some(
                value_factor * length_scale.powf(self.dim as f64 / e) * inner.analytic_norm(e)?,
            ),
        }
    }
}

/// Sum over slabs m = 1..=m_max of the 1-D integral of (log2 t)^(-sigma)
/// over [2^m, 2^m + 1], each slab by deterministic quadrature.
pub fn slab_log_integral_sum(sigma: f64, m_max: u32) -> f64 {
    (1..=m_max)
        .map(|m| {
            let a = 2f64.powi(m as i32);
            let (v, _) =
                quad1d::integrate(|t| (t.ln() / LOG2).powf(-sigma), a, a + 1.0, 1e-14, 1e-13);
            v
        })
        .sum()
}

/// Partial sum of the dominating series sum_m m^(-(1+e*eps)) together with
/// the integral-test tail bound M^(-e*eps)/(e*eps) for the remainder.
pub fn cylinder_norm_series(exponent_times_eps: f64, m_terms: u32) -> (f64, f64) {
    let s: f64 = (1..=m_terms)
        .map(|m| (m as f64).powf(-(1.0 + exponent_times_eps)))
        .sum();
    let tail = (m_terms as f64).powf(-exponent_times_eps) / exponent_times_eps;
    (s, tail)
}

/// Fiber of a slab piece: the slice coordinate(s) of the g-side cylinders.
#[derive(Debug, Clone, PartialEq)]
pub enum Fiber {
    None,
    /// scalar coordinate in (lo, hi) — the half-space slice
    Interval { lo: f64, hi: f64 },
    /// shell lo < |y''| < hi in R^dim — the codim-k slice
    Shell { dim: u32, lo: f64, hi: f64 },
}

/// One uniformly-sampleable piece of a support cover.
#[derive(Debug, Clone, PartialEq)]
pub enum SamplePiece {
    /// lo <= |x| <= hi in R^dim (restricted to x_last > 0 when half).
    Shell { dim: u32, lo: f64, hi: f64, half: bool },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// {|cross| <= cross_radius} x [t_lo, t_hi] x fiber, coordinates in
    /// that order.
    Slab {
        cross_dim: u32,
        cross_radius: f64,
        t_lo: f64,
        t_hi: f64,
        fiber: Fiber,
    },
    /// Product of a shell over the first base_dim coordinates and a shell
    /// over the last fiber_dim coordinates (fiber_half restricts the last
    /// coordinate to be positive). The shape of the split-coordinate
    /// windows in the threshold construction.
    ShellProduct {
        base_dim: u32,
        base_lo: f64,
        base_hi: f64,
        fiber_dim: u32,
        fiber_lo: f64,
        fiber_hi: f64,
        fiber_half: bool,
    },
}

impl SamplePiece {
    pub fn volume(&self) -> f64 {
        match self {
            SamplePiece::Shell { dim, lo, hi, half } => {
                let v = ball_volume(*dim).expect("dim >= 1")
                    * (hi.powi(*dim as i32) - lo.powi(*dim as i32));
                if *half {
                    v / 2.0
                } else {
                    v
                }
            }
            SamplePiece::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| h - l).product(),
            SamplePiece::Slab {
                cross_dim,
                cross_radius,
                t_lo,
                t_hi,
                fiber,
            } => {
                let cross = if *cross_dim == 0 {
                    1.0
                } else {
                    ball_volume(*cross_dim).expect("dim >= 1")
                        * cross_radius.powi(*cross_dim as i32)
                };
                let fiber_vol = match fiber {
                    Fiber::None => 1.0,
                    Fiber::Interval { lo, hi } => hi - lo,
                    Fiber::Shell { dim, lo, hi } => {
                        ball_volume(*dim).expect("dim >= 1")
                            * (hi.powi(*dim as i32) - lo.powi(*dim as i32))
                    }
                };
                cross * (t_hi - t_lo) * fiber_vol
            }
            SamplePiece::ShellProduct {
                base_dim,
                base_lo,
                base_hi,
                fiber_dim,
                fiber_lo,
                fiber_hi,
                fiber_half,
            } => {
                let base = ball_volume(*base_dim).expect("dim >= 1")
                    * (base_hi.powi(*base_dim as i32) - base_lo.powi(*base_dim as i32));
                let mut fiber = ball_volume(*fiber_dim).expect("dim >= 1")
                    * (fiber_hi.powi(*fiber_dim as i32) - fiber_lo.powi(*fiber_dim as i32));
                if *fiber_half {
                    fiber /= 2.0;
                }
                base * fiber
            }
        }
    }

    fn scaled(self, s: f64) -> SamplePiece {
        match self {
            SamplePiece::Shell { dim, lo, hi, half } => SamplePiece::Shell {
                dim,
                lo: lo * s,
                hi: hi * s,
                half,
            },
            SamplePiece::Box { lo, hi } => SamplePiece::Box {
                lo: lo.into_iter().map(|v| v * s).collect(),
                hi: hi.into_iter().map(|v| v * s).collect(),
            },
            SamplePiece::Slab {
                cross_dim,
                cross_radius,
                t_lo,
                t_hi,
                fiber,
            } => SamplePiece::Slab {
                cross_dim,
                cross_radius: cross_radius * s,
                t_lo: t_lo * s,
                t_hi: t_hi * s,
                fiber: match fiber {
                    Fiber::None => Fiber::None,
                    Fiber::Interval { lo, hi } => Fiber::Interval {
                        lo: lo * s,
                        hi: hi * s,
                    },
                    Fiber::Shell { dim, lo, hi } => Fiber::Shell {
                        dim,
                        lo: lo * s,
                        hi: hi * s,
                    },
                },
            },
            SamplePiece::ShellProduct {
                base_dim,
                base_lo,
                base_hi,
                fiber_dim,
                fiber_lo,
                fiber_hi,
                fiber_half,
            } => SamplePiece::ShellProduct {
                base_dim,
                base_lo: base_lo * s,
                base_hi: base_hi * s,
                fiber_dim,
                fiber_lo: fiber_lo * s,
                fiber_hi: fiber_hi * s,
                fiber_half,
            },
        }
    }
}
