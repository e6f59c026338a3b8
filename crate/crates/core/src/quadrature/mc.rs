//! Seeded Monte Carlo evaluation of the bilinear form, its dual operator
//! forms, and numeric norms.
//!
//! Sampling design:
//! - y is drawn from an exact cover of g's support (uniform over disjoint
//!   pieces), mixed with a power-law radius stratum matched to the |y|^-beta
//!   weight when beta > 0 and the cover touches the origin;
//! - x given y is a 50/50 mixture (weights overridable) of uniform over f's
//!   cover and a radial draw centered at y's x-side projection with density
//!   proportional to |x - y_proj|^-lambda, which cancels the kernel
//!   singularity near the diagonal;
//! - work is split into strata, each owning a counter-derived RNG stream
//!   from the master seed, and partial sums combine in stratum order, so
//!   results are bit-identical for a given (seed, budget) regardless of
//!   thread count.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Error;
use crate::functions::{Fiber, SamplePiece, TrialFunction};
use crate::geometry::Geometry;
use crate::special::sphere_area;

/// splitmix64: derives per-stratum seeds from the master seed.
fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_mul(0x9E3779B97F4A7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

pub fn stratum_rng(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, index))
}

/// Uniform direction on S^(dim-1).
fn sample_direction<R: Rng>(rng: &mut R, dim: usize, out: &mut Vec<f64>) {
    out.clear();
    loop {
        let mut norm2 = 0.0;
        out.clear();
        for _ in 0..dim {
            // Box-Muller pair would be fine too; polar form keeps it simple
            let u: f64 = rng.gen::<f64>();
            let v: f64 = rng.gen::<f64>();
            let g = (-2.0 * u.max(1e-300).ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos();
            out.push(g);
            norm2 += g * g;
        }
        if norm2 > 1e-24 {
            let inv = norm2.sqrt().recip();
            for c in out.iter_mut() {
                *c *= inv;
            }
            return;
        }
    }
}

/// Radius with density proportional to u^(a-1) on [lo, hi] (a != 0), or
/// log-uniform when a = 0.
fn sample_power_radius<R: Rng>(rng: &mut R, a: f64, lo: f64, hi: f64) -> f64 {
    let u: f64 = rng.gen();
    if a.abs() < 1e-12 {
        lo * (hi / lo).powf(u)
    } else {
        (lo.powf(a) + u * (hi.powf(a) - lo.powf(a))).powf(1.0 / a)
    }
}

/// Normalizer int_lo^hi u^(a-1) du.
fn power_radius_mass(a: f64, lo: f64, hi: f64) -> f64 {
    if a.abs() < 1e-12 {
        (hi / lo).ln()
    } else {
        (hi.powf(a) - lo.powf(a)) / a
    }
}

fn sample_in_piece<R: Rng>(rng: &mut R, piece: &SamplePiece, out: &mut Vec<f64>) {
    let mut dir = Vec::new();
    match piece {
        SamplePiece::Shell { dim, lo, hi, half } => {
            let d = *dim as usize;
            sample_direction(rng, d, &mut dir);
            let radius = sample_power_radius(rng, d as f64, *lo, *hi);
            out.clear();
            out.extend(dir.iter().map(|c| c * radius));
            if *half {
                let last = out.last_mut().unwrap();
                *last = last.abs();
            }
        }
        SamplePiece::Box { lo, hi } => {
            out.clear();
            for (l, h) in lo.iter().zip(hi) {
                out.push(l + rng.gen::<f64>() * (h - l));
            }
        }
        SamplePiece::Slab {
            cross_dim,
            cross_radius,
            t_lo,
            t_hi,
            fiber,
        } => {
            out.clear();
            let cd = *cross_dim as usize;
            if cd > 0 {
                sample_direction(rng, cd, &mut dir);
                let radius = cross_radius * rng.gen::<f64>().powf(1.0 / cd as f64);
                out.extend(dir.iter().map(|c| c * radius));
            }
            out.push(t_lo + rng.gen::<f64>() * (t_hi - t_lo));
            match fiber {
                Fiber::None => {}
                Fiber::Interval { lo, hi } => {
                    out.push(lo + rng.gen::<f64>() * (hi - lo));
                }
                Fiber::Shell { dim, lo, hi } => {
                    let fd = *dim as usize;
                    sample_direction(rng, fd, &mut dir);
                    let radius = sample_power_radius(rng, fd as f64, *lo, *hi);
                    out.extend(dir.iter().map(|c| c * radius));
                }
            }
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
            out.clear();
            let bd = *base_dim as usize;
            sample_direction(rng, bd, &mut dir);
            let radius = sample_power_radius(rng, bd as f64, *base_lo, *base_hi);
            out.extend(dir.iter().map(|c| c * radius));
            let fd = *fiber_dim as usize;
            sample_direction(rng, fd, &mut dir);
            let radius = sample_power_radius(rng, fd as f64, *fiber_lo, *fiber_hi);
            out.extend(dir.iter().map(|c| c * radius));
            if *fiber_half {
                let last = out.last_mut().unwrap();
                *last = last.abs();
            }
        }
    }
}

fn piece_contains(piece: &SamplePiece, x: &[f64]) -> bool {
    match piece {
        SamplePiece::Shell { dim, lo, hi, half } => {
            let d = *dim as usize;
            if x.len() != d {
                return false;
            }
            if *half && x[d - 1] <= 0.0 {
                return false;
            }
            let r: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            r >= *lo && r <= *hi
        }
        SamplePiece::Box { lo, hi } => x
            .iter()
            .zip(lo.iter().zip(hi))
            .all(|(v, (l, h))| v >= l && v <= h),
        SamplePiece::Slab {
            cross_dim,
            cross_radius,
            t_lo,
            t_hi,
            fiber,
        } => {
            let cd = *cross_dim as usize;
            let cross: f64 = x[..cd].iter().map(|v| v * v).sum();
            if cross > cross_radius * cross_radius {
                return false;
            }
            let t = x[cd];
            if t < *t_lo || t > *t_hi {
                return false;
            }
            match fiber {
                Fiber::None => true,
                Fiber::Interval { lo, hi } => {
                    let s = x[cd + 1];
                    s >= *lo && s <= *hi
                }
                Fiber::Shell { lo, hi, .. } => {
                    let r: f64 = x[cd + 1..].iter().map(|v| v * v).sum::<f64>().sqrt();
                    r >= *lo && r <= *hi
                }
            }
        }
        SamplePiece::ShellProduct {
            base_dim,
            base_lo,
            base_hi,
            fiber_lo,
            fiber_hi,
            fiber_half,
            ..
        } => {
            let bd = *base_dim as usize;
            let rb: f64 = x[..bd].iter().map(|v| v * v).sum::<f64>().sqrt();
            if rb < *base_lo || rb > *base_hi {
                return false;
            }
            if *fiber_half && *x.last().unwrap() <= 0.0 {
                return false;
            }
            let rf: f64 = x[bd..].iter().map(|v| v * v).sum::<f64>().sqrt();
            rf >= *fiber_lo && rf <= *fiber_hi
        }
    }
}

/// Uniform sampler over a disjoint union of cover pieces.
#[derive(Debug, Clone)]
pub struct CoverSampler {
    pieces: Vec<SamplePiece>,
    cum: Vec<f64>,
    total_volume: f64,
}

impl CoverSampler {
    pub fn new(pieces: Vec<SamplePiece>) -> Result<Self, Error> {
        if pieces.is_empty() {
            return Err(Error::DegenerateInput("empty sampling cover".into()));
        }
        let vols: Vec<f64> = pieces.iter().map(|p| p.volume()).collect();
        let total_volume: f64 = vols.iter().sum();
        if !(total_volume > 0.0) {
            return Err(Error::DegenerateInput("zero-volume sampling cover".into()));
        }
        let mut cum = Vec::with_capacity(vols.len());
        let mut acc = 0.0;
        for v in &vols {
            acc += v / total_volume;
            cum.push(acc);
        }
        *cum.last_mut().unwrap() = 1.0;
        Ok(CoverSampler {
            pieces,
            cum,
            total_volume,
        })
    }

    pub fn for_function(f: &TrialFunction) -> Result<Self, Error> {
        Self::new(f.sample_pieces()?)
    }

    pub fn total_volume(&self) -> f64 {
        self.total_volume
    }

    pub fn sample<R: Rng>(&self, rng: &mut R, out: &mut Vec<f64>) {
        let u: f64 = rng.gen();
        let idx = self
            .cum
            .iter()
            .position(|&c| u <= c)
            .unwrap_or(self.pieces.len() - 1);
        sample_in_piece(rng, &self.pieces[idx], out);
    }

    /// Uniform density at x: 1/total_volume inside the cover, 0 outside.
    pub fn pdf(&self, x: &[f64]) -> f64 {
        if self.pieces.iter().any(|p| piece_contains(p, x)) {
            1.0 / self.total_volume
        } else {
            0.0
        }
    }

    /// Maximal |x| over the cover.
    pub fn bounding_radius(&self) -> f64 {
        self.pieces
            .iter()
            .map(|p| match p {
                SamplePiece::Shell { hi, .. } => *hi,
                SamplePiece::Box { lo, hi } => lo
                    .iter()
                    .zip(hi)
                    .map(|(l, h)| l.abs().max(h.abs()).powi(2))
                    .sum::<f64>()
                    .sqrt(),
                SamplePiece::Slab {
                    cross_radius,
                    t_hi,
                    fiber,
                    ..
                } => {
                    let fiber_max = match fiber {
                        Fiber::None => 0.0,
                        Fiber::Interval { hi, .. } => hi.abs(),
                        Fiber::Shell { hi, .. } => *hi,
                    };
                    (cross_radius * cross_radius + t_hi * t_hi + fiber_max * fiber_max).sqrt()
                }
                SamplePiece::ShellProduct {
                    base_hi, fiber_hi, ..
                } => (base_hi * base_hi + fiber_hi * fiber_hi).sqrt(),
            })
            .fold(0.0, f64::max)
    }

    /// The single radial range [lo, hi] when the cover is one full shell
    /// around the origin (the only shape the origin stratum applies to).
    fn single_shell(&self) -> Option<(u32, f64, f64, bool)> {
        if self.pieces.len() != 1 {
            return None;
        }
        match &self.pieces[0] {
            SamplePiece::Shell { dim, lo, hi, half } => Some((*dim, *lo, *hi, *half)),
            _ => None,
        }
    }
}

/// Per-sample accumulator combined in stratum order.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    sum: f64,
    sum_sq: f64,
    n: u64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.sum += v;
        self.sum_sq += v * v;
        self.n += 1;
    }

    fn merge(mut self, other: Moments) -> Moments {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.n += other.n;
        self
    }

    /// (mean, standard error of the mean)
    fn mean_and_err(&self) -> (f64, f64) {
        let n = self.n as f64;
        let mean = self.sum / n;
        if self.n < 2 {
            return (mean, f64::INFINITY);
        }
        let var = ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        // floor keeps the reported error positive even for zero-variance
        // estimators (exact indicator cases)
        let err = (var / n).sqrt().max(mean.abs() * f64::EPSILON);
        (mean, err)
    }
}

/// How work is split into deterministic strata.
fn stratum_sizes(budget: u64, n_strata: u64) -> Vec<u64> {
    let s = n_strata.min(budget).max(1);
    let base = budget / s;
    let rem = budget % s;
    (0..s).map(|i| base + u64::from(i < rem)).collect()
}

fn run_strata<F>(budget: u64, n_strata: u64, seed: u64, work: F) -> Moments
where
    F: Fn(&mut ChaCha8Rng, u64) -> Moments + Sync,
{
    let sizes = stratum_sizes(budget, n_strata);
    let partials: Vec<Moments> = sizes
        .par_iter()
        .enumerate()
        .map(|(i, &count)| {
            let mut rng = stratum_rng(seed, i as u64);
            work(&mut rng, count)
        })
        .collect();
    partials.into_iter().fold(Moments::default(), Moments::merge)
}

/// Options shared by the Monte Carlo evaluators.
#[derive(Debug, Clone, Copy)]
pub struct McOptions {
    pub seed: u64,
    /// Mixture weight of the near-diagonal x-proposal (0 disables it).
    pub diagonal_mix: f64,
    /// Mixture weight of the origin power-law y-stratum when it applies.
    pub origin_mix: f64,
    pub n_strata: u64,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            seed: 0,
            diagonal_mix: 0.5,
            origin_mix: 0.5,
            n_strata: 64,
        }
    }
}

/// The weighted kernel |x|^-alpha |x-y|^-lambda |y|^-beta with the
/// |x-y| < excision neighborhood excised.
pub struct KernelEval<'a> {
    pub geom: &'a Geometry,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub excision: f64,
}

impl KernelEval<'_> {
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let dist = self.geom.cross_distance(x, y);
        if dist < self.excision {
            return 0.0;
        }
        let rx: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let ry: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let v = rx.powf(-self.alpha) * dist.powf(-self.lambda) * ry.powf(-self.beta);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    }
}

/// y-side sampler: uniform cover mixed with an origin power-law stratum.
pub struct YSampler {
    cover: CoverSampler,
    /// (dim, lo, hi, half, Z) of the power stratum when active.
    origin: Option<(u32, f64, f64, bool, f64)>,
    origin_mix: f64,
    beta: f64,
}

impl YSampler {
    pub fn new(g: &TrialFunction, beta: f64, origin_mix: f64) -> Result<Self, Error> {
        let cover = CoverSampler::for_function(g)?;
        // the power stratum targets |y|^-beta blowing up at an origin the
        // support actually touches
        let origin = if beta > 0.0 && origin_mix > 0.0 {
            cover.single_shell().and_then(|(dim, lo, hi, half)| {
                let d = dim as f64;
                if beta < d && lo < 0.1 * hi {
                    let lo_eff = lo.max(hi * 1e-12);
                    let z = power_radius_mass(d - beta, lo_eff, hi);
                    Some((dim, lo_eff, hi, half, z))
                } else {
                    None
                }
            })
        } else {
            None
        };
        Ok(YSampler {
            cover,
            origin,
            origin_mix,
            beta,
        })
    }

    pub fn volume(&self) -> f64 {
        self.cover.total_volume()
    }

    pub fn sample<R: Rng>(&self, rng: &mut R, out: &mut Vec<f64>) {
        if let Some((dim, lo, hi, half, _)) = self.origin {
            if rng.gen::<f64>() < self.origin_mix {
                let d = dim as usize;
                let mut dir = Vec::new();
                sample_direction(rng, d, &mut dir);
                let radius = sample_power_radius(rng, d as f64 - self.beta, lo, hi);
                out.clear();
                out.extend(dir.iter().map(|c| c * radius));
                if half {
                    let last = out.last_mut().unwrap();
                    *last = last.abs();
                }
                return;
            }
        }
        self.cover.sample(rng, out);
    }

    pub fn pdf(&self, y: &[f64]) -> f64 {
        let uniform = self.cover.pdf(y);
        match self.origin {
            None => uniform,
            Some((dim, lo, hi, half, z)) => {
                let r: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                let mut power = if r >= lo && r <= hi {
                    let sphere = sphere_area(dim).expect("dim >= 1");
                    r.powf(-self.beta) / (sphere * z)
                } else {
                    0.0
                };
                if half {
                    power *= 2.0;
                    if *y.last().unwrap() <= 0.0 {
                        power = 0.0;
                    }
                }
                self.origin_mix * power + (1.0 - self.origin_mix) * uniform
            }
        }
    }
}

/// x-given-y sampler: uniform cover mixed with a radial power proposal
/// around y's x-side projection.
pub struct XSampler<'a> {
    cover: CoverSampler,
    geom: &'a Geometry,
    lambda: f64,
    excision: f64,
    diagonal_mix: f64,
}

impl<'a> XSampler<'a> {
    pub fn new(
        f: &TrialFunction,
        geom: &'a Geometry,
        lambda: f64,
        excision: f64,
        diagonal_mix: f64,
    ) -> Result<Self, Error> {
        Ok(XSampler {
            cover: CoverSampler::for_function(f)?,
            geom,
            lambda,
            excision,
            diagonal_mix,
        })
    }

    /// Radial proposal parameters at this y: (lo, hi, mass) of the density
    /// u^(dx-1-lambda)/Z on u = |x - y_proj|, or None when unusable.
    fn diagonal_params(&self, y: &[f64]) -> Option<(f64, f64, f64)> {
        if self.diagonal_mix <= 0.0 || self.lambda <= 0.0 {
            return None;
        }
        let dx = self.geom.dim_x() as usize;
        let proj_norm: f64 = y[..dx].iter().map(|v| v * v).sum::<f64>().sqrt();
        let hi = self.cover.bounding_radius() + proj_norm;
        // the fiber offset already keeps the cross-distance positive;
        // the excision additionally floors the useful radii
        let fiber2: f64 = y[dx..].iter().map(|v| v * v).sum();
        let lo = if self.excision > 0.0 && self.excision * self.excision > fiber2 {
            (self.excision * self.excision - fiber2).sqrt()
        } else {
            0.0
        };
        let a = dx as f64 - self.lambda;
        if lo <= 0.0 && a <= 0.0 {
            return None; // non-normalizable at the center
        }
        let lo = lo.max(if a <= 0.0 { hi * 1e-14 } else { 0.0 });
        if lo >= hi {
            return None;
        }
        let mass = power_radius_mass(a, lo, hi);
        if mass.is_finite() && mass > 0.0 {
            Some((lo, hi, mass))
        } else {
            None
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R, y: &[f64], out: &mut Vec<f64>) {
        if let Some((lo, hi, _)) = self.diagonal_params(y) {
            if rng.gen::<f64>() < self.diagonal_mix {
                let dx = self.geom.dim_x() as usize;
                let mut dir = Vec::new();
                sample_direction(rng, dx, &mut dir);
                let u = sample_power_radius(rng, dx as f64 - self.lambda, lo, hi);
                out.clear();
                out.extend(y[..dx].iter().zip(&dir).map(|(c, d)| c + d * u));
                return;
            }
        }
        self.cover.sample(rng, out);
    }

    pub fn pdf(&self, y: &[f64], x: &[f64]) -> f64 {
        let uniform = self.cover.pdf(x);
        match self.diagonal_params(y) {
            None => uniform,
            Some((lo, hi, mass)) => {
                let dx = self.geom.dim_x() as usize;
                let u: f64 = x
                    .iter()
                    .zip(&y[..dx])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                let diag = if u >= lo && u <= hi && u > 0.0 {
                    let sphere = sphere_area(self.geom.dim_x()).expect("dim >= 1");
                    u.powf(-self.lambda) / (sphere * mass)
                } else {
                    0.0
                };
                self.diagonal_mix * diag + (1.0 - self.diagonal_mix) * uniform
            }
        }
    }
}

/// Monte Carlo estimate of the bilinear form. Returns (value, std error,
/// samples).
pub fn bilinear_mc(
    f: &TrialFunction,
    g: &TrialFunction,
    geom: &Geometry,
    alpha: f64,
    beta: f64,
    lambda: f64,
    excision: f64,
    budget: u64,
    opts: &McOptions,
) -> Result<(f64, f64, u64), Error> {
    if budget == 0 {
        return Err(Error::ZeroBudget);
    }
    let kernel = KernelEval {
        geom,
        alpha,
        beta,
        lambda,
        excision,
    };
    let y_sampler = YSampler::new(g, beta, opts.origin_mix)?;
    let x_sampler = XSampler::new(f, geom, lambda, excision, opts.diagonal_mix)?;

    let moments = run_strata(budget, opts.n_strata, opts.seed, |rng, count| {
        let mut m = Moments::default();
        let mut y = Vec::new();
        let mut x = Vec::new();
        for _ in 0..count {
            y_sampler.sample(rng, &mut y);
            let py = y_sampler.pdf(&y);
            x_sampler.sample(rng, &y, &mut x);
            let px = x_sampler.pdf(&y, &x);
            let gy = g.eval(&y);
            let fx = f.eval(&x);
            let mut v = 0.0;
            if gy > 0.0 && fx > 0.0 && py > 0.0 && px > 0.0 {
                v = fx * gy * kernel.eval(&x, &y) / (py * px);
                if !v.is_finite() {
                    v = 0.0;
                }
            }
            m.push(v);
        }
        m
    });

    let (mean, err) = moments.mean_and_err();
    Ok((mean, err, moments.n))
}

/// Jackknife-corrected estimate of T^q from n_inner importance weights,
/// where T is the mean of the weights. (T_hat)^q is biased upward for q > 1;
/// the correction is N T^q - (N-1) mean_i T_(i)^q over leave-one-out means.
fn jackknife_power<R: Rng>(
    rng: &mut R,
    q: f64,
    n_inner: u64,
    mut draw: impl FnMut(&mut R) -> f64,
) -> f64 {
    let mut weights = Vec::with_capacity(n_inner as usize);
    let mut sum = 0.0;
    for _ in 0..n_inner {
        let w = draw(rng);
        weights.push(w);
        sum += w;
    }
    let n = n_inner as f64;
    let t_hat = sum / n;
    if n_inner < 2 {
        return t_hat.powf(q);
    }
    let mut loo_mean = 0.0;
    for &w in &weights {
        let t_i = (sum - w) / (n - 1.0);
        loo_mean += t_i.powf(q);
    }
    loo_mean /= n;
    let corrected = n * t_hat.powf(q) - (n - 1.0) * loo_mean;
    // the correction can overshoot below zero for tiny inner samples
    corrected.max(0.0)
}

/// Nested Monte Carlo estimate of the dual form
/// int_window ( |y|^-beta int f(x) |x|^-alpha |x-y|^-lambda dx )^q dy.
///
/// The outer window must contain the support of interest; no part of the
/// y-domain outside it is counted. Budget splits as n_inner = ceil(sqrt(B)).
#[allow(clippy::too_many_arguments)]
pub fn dual_mc(
    f: &TrialFunction,
    window: &CoverSampler,
    geom: &Geometry,
    alpha: f64,
    beta: f64,
    lambda: f64,
    excision: f64,
    q: f64,
    budget: u64,
    opts: &McOptions,
) -> Result<(f64, f64, u64), Error> {
    if budget == 0 {
        return Err(Error::ZeroBudget);
    }
    if !(q > 1.0) {
        return Err(Error::Domain("dual exponent q must be > 1".into()));
    }
    let kernel = KernelEval {
        geom,
        alpha,
        beta,
        lambda,
        excision,
    };
    let x_sampler = XSampler::new(f, geom, lambda, excision, opts.diagonal_mix)?;
    let n_inner = (budget as f64).sqrt().ceil() as u64;
    let n_outer = (budget / n_inner).max(2);
    let volume = window.total_volume();

    let moments = run_strata(n_outer, opts.n_strata, opts.seed, |rng, count| {
        let mut m = Moments::default();
        let mut y = Vec::new();
        let mut x = Vec::new();
        for _ in 0..count {
            window.sample(rng, &mut y);
            let t_q = jackknife_power(rng, q, n_inner, |rng| {
                x_sampler.sample(rng, &y, &mut x);
                let px = x_sampler.pdf(&y, &x);
                let fx = f.eval(&x);
                if fx > 0.0 && px > 0.0 {
                    let w = fx * kernel.eval(&x, &y) / px;
                    if w.is_finite() {
                        w
                    } else {
                        0.0
                    }
                } else {
                    0.0
                }
            });
            m.push(t_q * volume);
        }
        m
    });
    let (mean, err) = moments.mean_and_err();
    Ok((mean, err, moments.n * n_inner))
}

/// y-given-x proposal for the g-side dual: uniform over g's cover mixed with
/// a radial draw in R^n around the lifted center (x, 0), whose distance to x
/// is exactly the cross-distance, so the density u^-lambda cancels the
/// kernel singularity.
pub struct YGivenXSampler<'a> {
    cover: CoverSampler,
    geom: &'a Geometry,
    lambda: f64,
    excision: f64,
    diagonal_mix: f64,
    half: bool,
}

impl<'a> YGivenXSampler<'a> {
    pub fn new(
        g: &TrialFunction,
        geom: &'a Geometry,
        lambda: f64,
        excision: f64,
        diagonal_mix: f64,
    ) -> Result<Self, Error> {
        Ok(YGivenXSampler {
            cover: CoverSampler::for_function(g)?,
            geom,
            lambda,
            excision,
            diagonal_mix,
            half: geom.y_restricted_to_half(),
        })
    }

    fn diagonal_params(&self, x: &[f64]) -> Option<(f64, f64, f64)> {
        if self.diagonal_mix <= 0.0 || self.lambda <= 0.0 {
            return None;
        }
        let n = self.geom.dim_y() as f64;
        let x_norm: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let hi = self.cover.bounding_radius() + x_norm;
        let a = n - self.lambda;
        let mut lo = self.excision;
        if lo <= 0.0 && a <= 0.0 {
            lo = hi * 1e-14;
        }
        if lo >= hi {
            return None;
        }
        let mass = power_radius_mass(a, lo.max(0.0), hi);
        if mass.is_finite() && mass > 0.0 {
            Some((lo.max(0.0), hi, mass))
        } else {
            None
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R, x: &[f64], out: &mut Vec<f64>) {
        if let Some((lo, hi, _)) = self.diagonal_params(x) {
            if rng.gen::<f64>() < self.diagonal_mix {
                let n = self.geom.dim_y() as usize;
                let dx = self.geom.dim_x() as usize;
                let mut dir = Vec::new();
                sample_direction(rng, n, &mut dir);
                let u = sample_power_radius(rng, n as f64 - self.lambda, lo, hi);
                out.clear();
                for i in 0..n {
                    let center = if i < dx { x[i] } else { 0.0 };
                    out.push(center + dir[i] * u);
                }
                if self.half {
                    let last = out.last_mut().unwrap();
                    *last = last.abs();
                }
                return;
            }
        }
        self.cover.sample(rng, out);
    }

    pub fn pdf(&self, x: &[f64], y: &[f64]) -> f64 {
        let uniform = self.cover.pdf(y);
        match self.diagonal_params(x) {
            None => uniform,
            Some((lo, hi, mass)) => {
                // distance from y to the lifted center (x, 0) = cross-distance
                let u = self.geom.cross_distance(x, y);
                let mut diag = if u >= lo && u <= hi && u > 0.0 {
                    let sphere = sphere_area(self.geom.dim_y()).expect("dim >= 1");
                    u.powf(-self.lambda) / (sphere * mass)
                } else {
                    0.0
                };
                if self.half {
                    // the reflected draw doubles the density on {y_n > 0}
                    diag *= 2.0;
                    if *y.last().unwrap() <= 0.0 {
                        diag = 0.0;
                    }
                }
                self.diagonal_mix * diag + (1.0 - self.diagonal_mix) * uniform
            }
        }
    }
}

/// Nested Monte Carlo estimate of the swapped dual form
/// int_window ( int g(y) / (|x|^a |x-y|^l |y|^b) dy )^q dx
/// with the window on the x-side domain.
#[allow(clippy::too_many_arguments)]
pub fn dual_mc_swapped(
    g: &TrialFunction,
    window: &CoverSampler,
    geom: &Geometry,
    alpha: f64,
    beta: f64,
    lambda: f64,
    excision: f64,
    q: f64,
    budget: u64,
    opts: &McOptions,
) -> Result<(f64, f64, u64), Error> {
    if budget == 0 {
        return Err(Error::ZeroBudget);
    }
    if !(q > 1.0) {
        return Err(Error::Domain("dual exponent q must be > 1".into()));
    }
    let kernel = KernelEval {
        geom,
        alpha,
        beta,
        lambda,
        excision,
    };
    let y_sampler = YGivenXSampler::new(g, geom, lambda, excision, opts.diagonal_mix)?;
    let n_inner = (budget as f64).sqrt().ceil() as u64;
    let n_outer = (budget / n_inner).max(2);
    let volume = window.total_volume();

    let moments = run_strata(n_outer, opts.n_strata, opts.seed, |rng, count| {
        let mut m = Moments::default();
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..count {
            window.sample(rng, &mut x);
            let t_q = jackknife_power(rng, q, n_inner, |rng| {
                y_sampler.sample(rng, &x, &mut y);
                let py = y_sampler.pdf(&x, &y);
                let gy = g.eval(&y);
                if gy > 0.0 && py > 0.0 {
                    let w = gy * kernel.eval(&x, &y) / py;
                    if w.is_finite() {
                        w
                    } else {
                        0.0
                    }
                } else {
                    0.0
                }
            });
            m.push(t_q * volume);
        }
        m
    });
    let (mean, err) = moments.mean_and_err();
    Ok((mean, err, moments.n * n_inner))
}

/// Monte Carlo estimate of int f^e. Returns (integral, std error, samples).
pub fn norm_pow_mc(
    f: &TrialFunction,
    e: f64,
    budget: u64,
    opts: &McOptions,
) -> Result<(f64, f64, u64), Error> {
    if budget == 0 {
        return Err(Error::ZeroBudget);
    }
    let cover = CoverSampler::for_function(f)?;
    let volume = cover.total_volume();
    let moments = run_strata(budget, opts.n_strata, opts.seed, |rng, count| {
        let mut m = Moments::default();
        let mut x = Vec::new();
        for _ in 0..count {
            cover.sample(rng, &mut x);
            m.push(f.eval(&x).powf(e) * volume);
        }
        m
    });
    let (mean, err) = moments.mean_and_err();
    Ok((mean, err, moments.n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::indicator_annulus;

    #[test]
    fn seeds_are_stable() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
    }

    #[test]
    fn cover_sampler_stays_inside() {
        let f = indicator_annulus(2, 1.0, 2.0).unwrap();
        let cover = CoverSampler::for_function(&f).unwrap();
        let mut rng = stratum_rng(1, 0);
        let mut x = Vec::new();
        for _ in 0..2000 {
            cover.sample(&mut rng, &mut x);
            let r: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(r >= 1.0 && r <= 2.0, "sample left the annulus: {x:?}");
            assert!(cover.pdf(&x) > 0.0);
        }
        assert_eq!(cover.pdf(&[0.0, 0.0]), 0.0);
    }

    #[test]
    fn strata_split_exactly() {
        assert_eq!(stratum_sizes(10, 4), vec![3, 3, 2, 2]);
        assert_eq!(stratum_sizes(3, 64).len(), 3);
        let total: u64 = stratum_sizes(1_000_003, 64).iter().sum();
        assert_eq!(total, 1_000_003);
    }

    #[test]
    fn norm_mc_matches_volume() {
        let f = indicator_annulus(3, 0.0, 1.0).unwrap();
        let opts = McOptions::default();
        let (integral, err, n) = norm_pow_mc(&f, 2.0, 10_000, &opts).unwrap();
        assert_eq!(n, 10_000);
        // indicator: integral of f^2 = volume exactly, zero variance
        let vol = 4.0 * std::f64::consts::PI / 3.0;
        assert!((integral - vol).abs() < 1e-12);
        assert!(err > 0.0, "error must stay positive");
    }
}
