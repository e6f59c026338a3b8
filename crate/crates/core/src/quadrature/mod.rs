//! Evaluation of the weighted bilinear form
//! `I(f,g) = int int f(x) g(y) |x|^-alpha |x-y|^-lambda |y|^-beta dx dy`,
//! its dual operator forms, numeric Lebesgue norms, and the normalized
//! quotient `I / (||f||_p ||g||_r)`.
//!
//! Two paths: a radial-deterministic reduction (full space, both functions
//! radial with bounded supports) and seeded Monte Carlo with importance
//! sampling near the kernel singularity. Results are bit-reproducible for a
//! fixed (seed, budget) independent of thread count.

pub mod mc;
pub mod quad1d;
pub mod radial;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::functions::{SamplePiece, TrialFunction};
use crate::geometry::{Geometry, GeometryKind};

pub use mc::{CoverSampler, McOptions};
pub use radial::{angular_average, angular_average_excised};

/// Kernel parameters plus the excision radius delta: the |x-y| < delta
/// neighborhood contributes zero. delta > 0 is how truncated (otherwise
/// divergent) values are produced for the certifier; this module never
/// claims divergence itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub geom: Geometry,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    #[serde(default)]
    pub exclusion_radius: f64,
}

impl KernelSpec {
    pub fn new(geom: Geometry, alpha: f64, beta: f64, lambda: f64) -> Self {
        KernelSpec {
            geom,
            alpha,
            beta,
            lambda,
            exclusion_radius: 0.0,
        }
    }

    pub fn with_exclusion(mut self, delta: f64) -> Self {
        self.exclusion_radius = delta;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    RadialDeterministic,
    MonteCarlo,
    Hybrid,
}

/// A numeric integral value with its error estimate and reproducibility
/// metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    /// Absolute error estimate: deterministic bound or MC standard error.
    pub error: f64,
    pub method: Method,
    pub samples: u64,
    pub seed: u64,
}

/// Budget, seed, and sampling knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadOptions {
    pub budget: u64,
    pub seed: u64,
    /// Mixture weight of the near-diagonal x-proposal.
    pub diagonal_mix: f64,
    /// Mixture weight of the origin power-law y-stratum.
    pub origin_mix: f64,
    pub n_strata: u64,
    /// Skip the radial-deterministic path even when it applies.
    pub force_monte_carlo: bool,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            budget: 100_000,
            seed: 0,
            diagonal_mix: 0.5,
            origin_mix: 0.5,
            n_strata: 64,
            force_monte_carlo: false,
        }
    }
}

impl QuadOptions {
    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn mc(&self) -> McOptions {
        McOptions {
            seed: self.seed,
            diagonal_mix: self.diagonal_mix,
            origin_mix: self.origin_mix,
            n_strata: self.n_strata,
        }
    }
}

fn check_dims(f: &TrialFunction, g: &TrialFunction, geom: &Geometry) -> Result<(), Error> {
    if f.dim() != geom.dim_x() {
        return Err(Error::Domain(format!(
            "f has dim {} but the x-side domain is R^{}",
            f.dim(),
            geom.dim_x()
        )));
    }
    if g.dim() != geom.dim_y() {
        return Err(Error::Domain(format!(
            "g has dim {} but the y-side domain is R^{}",
            g.dim(),
            geom.dim_y()
        )));
    }
    Ok(())
}

fn radial_path_applies(f: &TrialFunction, g: &TrialFunction, geom: &Geometry) -> bool {
    geom.kind == GeometryKind::FullSpace
        && f.is_radial()
        && g.is_radial()
        && f.bounding_radius().is_finite()
        && g.bounding_radius().is_finite()
}

/// The weighted bilinear form I(f, g).
pub fn evaluate_bilinear(
    f: &TrialFunction,
    g: &TrialFunction,
    spec: &KernelSpec,
    opts: &QuadOptions,
) -> Result<QuadratureResult, Error> {
    check_dims(f, g, &spec.geom)?;
    if opts.budget == 0 {
        return Err(Error::ZeroBudget);
    }
    if !opts.force_monte_carlo && radial_path_applies(f, g, &spec.geom) {
        let (value, error) = radial::radial_bilinear(
            f,
            g,
            spec.geom.n,
            spec.alpha,
            spec.beta,
            spec.lambda,
            spec.exclusion_radius,
        )?;
        return Ok(QuadratureResult {
            value,
            error,
            method: Method::RadialDeterministic,
            samples: 0,
            seed: opts.seed,
        });
    }
    let (value, error, samples) = mc::bilinear_mc(
        f,
        g,
        &spec.geom,
        spec.alpha,
        spec.beta,
        spec.lambda,
        spec.exclusion_radius,
        opts.budget,
        &opts.mc(),
    )?;
    Ok(QuadratureResult {
        value,
        error,
        method: Method::MonteCarlo,
        samples,
        seed: opts.seed,
    })
}

/// A bounded y-side (or x-side, for the g-dual) window for the dual forms.
#[derive(Debug, Clone)]
pub struct Window {
    pieces: Vec<SamplePiece>,
}

impl Window {
    /// Shell lo <= |y| <= hi, restricted to y_n > 0 when half.
    pub fn shell(dim: u32, lo: f64, hi: f64, half: bool) -> Self {
        Window {
            pieces: vec![SamplePiece::Shell { dim, lo, hi, half }],
        }
    }

    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        Window {
            pieces: vec![SamplePiece::Box { lo, hi }],
        }
    }

    /// The support cover of a trial function, reused as a window.
    pub fn of_function(f: &TrialFunction) -> Result<Self, Error> {
        Ok(Window {
            pieces: f.sample_pieces()?,
        })
    }

    pub fn from_pieces(pieces: Vec<SamplePiece>) -> Self {
        Window { pieces }
    }

    fn sampler(&self) -> Result<CoverSampler, Error> {
        CoverSampler::new(self.pieces.clone())
    }

    pub fn volume(&self) -> f64 {
        self.pieces.iter().map(|p| p.volume()).sum()
    }
}

/// Dual f-form: int_window ( int f(x) / (|x|^a |x-y|^l |y|^b) dx )^q dy,
/// with q = r/(r-1) in the duality argument. The window is explicit: the
/// y-domain is unbounded and no truncation is ever silent.
pub fn evaluate_dual_f(
    f: &TrialFunction,
    spec: &KernelSpec,
    q: f64,
    window: &Window,
    opts: &QuadOptions,
) -> Result<QuadratureResult, Error> {
    if f.dim() != spec.geom.dim_x() {
        return Err(Error::Domain(format!(
            "f has dim {} but the x-side domain is R^{}",
            f.dim(),
            spec.geom.dim_x()
        )));
    }
    let (value, error, samples) = mc::dual_mc(
        f,
        &window.sampler()?,
        &spec.geom,
        spec.alpha,
        spec.beta,
        spec.lambda,
        spec.exclusion_radius,
        q,
        opts.budget,
        &opts.mc(),
    )?;
    Ok(QuadratureResult {
        value,
        error,
        method: Method::MonteCarlo,
        samples,
        seed: opts.seed,
    })
}

/// Dual g-form: int_window ( int g(y) / (|x|^a |x-y|^l |y|^b) dy )^q dx,
/// with q = p/(p-1); the mirror of `evaluate_dual_f` with x and y roles
/// swapped. The window lives on the x-side domain.
pub fn evaluate_dual_g(
    g: &TrialFunction,
    spec: &KernelSpec,
    q: f64,
    window: &Window,
    opts: &QuadOptions,
) -> Result<QuadratureResult, Error> {
    if g.dim() != spec.geom.dim_y() {
        return Err(Error::Domain(format!(
            "g has dim {} but the y-side domain is R^{}",
            g.dim(),
            spec.geom.dim_y()
        )));
    }
    let (value, error, samples) = mc::dual_mc_swapped(
        g,
        &window.sampler()?,
        &spec.geom,
        spec.alpha,
        spec.beta,
        spec.lambda,
        spec.exclusion_radius,
        q,
        opts.budget,
        &opts.mc(),
    )?;
    Ok(QuadratureResult {
        value,
        error,
        method: Method::MonteCarlo,
        samples,
        seed: opts.seed,
    })
}

/// Numeric L^e norm of a trial function: radial-deterministic when radial
/// (including untruncated log tails), Monte Carlo otherwise.
pub fn lp_norm_numeric(
    f: &TrialFunction,
    e: f64,
    opts: &QuadOptions,
) -> Result<QuadratureResult, Error> {
    if !(e >= 1.0) {
        return Err(Error::Domain("norm exponent must be >= 1".into()));
    }
    if f.is_radial() && !opts.force_monte_carlo {
        let (integral, err) = radial::radial_norm_pow(f, e)?;
        let value = integral.powf(1.0 / e);
        let error = if integral > 0.0 {
            value / e * (err / integral)
        } else {
            err
        };
        return Ok(QuadratureResult {
            value,
            error,
            method: Method::RadialDeterministic,
            samples: 0,
            seed: opts.seed,
        });
    }
    let (integral, err, samples) = mc::norm_pow_mc(f, e, opts.budget, &opts.mc())?;
    if !(integral > 0.0) {
        return Err(Error::DegenerateInput(format!(
            "numeric L^{e} norm of {} is zero",
            f.label()
        )));
    }
    let value = integral.powf(1.0 / e);
    // first-order propagation through the 1/e power
    let error = value / e * (err / integral);
    Ok(QuadratureResult {
        value,
        error,
        method: Method::MonteCarlo,
        samples,
        seed: opts.seed,
    })
}

/// Normalized quotient I(f,g) / (||f||_p ||g||_r), with first-order error
/// propagation. Analytic norms are used when the family carries them;
/// otherwise numeric norms with derived seeds.
pub fn quotient(
    f: &TrialFunction,
    g: &TrialFunction,
    spec: &KernelSpec,
    p: f64,
    r: f64,
    opts: &QuadOptions,
) -> Result<QuadratureResult, Error> {
    let bilinear = evaluate_bilinear(f, g, spec, opts)?;

    let norm_of = |h: &TrialFunction, e: f64, seed_shift: u64| -> Result<(f64, f64), Error> {
        if let Some(v) = h.analytic_norm(e) {
            return Ok((v, 0.0));
        }
        let sub_opts = QuadOptions {
            seed: opts.seed.wrapping_add(seed_shift),
            ..*opts
        };
        let res = lp_norm_numeric(h, e, &sub_opts)?;
        Ok((res.value, res.error))
    };
    let (nf, nf_err) = norm_of(f, p, 0x66)?;
    let (ng, ng_err) = norm_of(g, r, 0x67)?;
    if !(nf > 0.0 && ng > 0.0) {
        return Err(Error::DegenerateInput(
            "quotient is undefined for zero norms".into(),
        ));
    }
    let value = bilinear.value / (nf * ng);
    let rel = |e: f64, v: f64| if v != 0.0 { e / v } else { 0.0 };
    let rel_total = (rel(bilinear.error, bilinear.value).powi(2)
        + rel(nf_err, nf).powi(2)
        + rel(ng_err, ng).powi(2))
    .sqrt();
    Ok(QuadratureResult {
        value,
        error: value.abs() * rel_total,
        method: bilinear.method,
        samples: bilinear.samples,
        seed: opts.seed,
    })
}
