//! z-scores, mixture density fitting, empirical null and local fdr.
//!
//! The mixture density is fitted by Poisson regression of histogram counts
//! on a Legendre polynomial basis (so `log f` is a polynomial over the
//! binned range). The empirical null is a normal matched to the curvature
//! of `log f` around its mode.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use thiserror::Error;

pub const DEFAULT_THRESHOLD: f64 = 0.01;
pub const DEFAULT_BINS: usize = 90;
pub const DEFAULT_DEGREE: usize = 7;
pub const DEFAULT_PAD_FRACTION: f64 = 0.1;
/// Fewer values than this and the density fit is refused.
pub const MIN_FIT_VALUES: usize = 50;

/// Share of probability mass covered by the central window.
const CENTRAL_MASS: f64 = 1.0 / 3.0;
const MIN_CENTRAL_BINS: usize = 5;
const MAX_NEWTON_STEPS: usize = 500;
/// Simpson sub-intervals per histogram bin for normalisation.
const QUADRATURE_PER_BIN: usize = 40;

#[derive(Debug, Error)]
pub enum FdrError {
    #[error("need at least 2 values to compute z-scores, got {0}")]
    TooFewValues(usize),
    #[error("zero variance: all scores are equal")]
    ZeroVariance,
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("insufficient data for density fit: {got} values, need at least {need}")]
    InsufficientData { got: usize, need: usize },
    #[error("invalid fit options: {0}")]
    InvalidOptions(String),
    #[error("density fit diverged: {0}")]
    FitDivergence(String),
    #[error("central fit is not concave (c = {c}) over window [{lo}, {hi}]")]
    NonConcave { c: f64, lo: f64, hi: f64 },
    #[error("threshold must be in (0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZScores {
    pub values: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
}

/// Standardises with the sample (n − 1) standard deviation.
pub fn z_scores(eps: &[f64]) -> Result<ZScores, FdrError> {
    if eps.len() < 2 {
        return Err(FdrError::TooFewValues(eps.len()));
    }
    if let Some(i) = eps.iter().position(|v| !v.is_finite()) {
        return Err(FdrError::NonFinite(i));
    }
    let n = eps.len() as f64;
    let mean = eps.iter().sum::<f64>() / n;
    let var = eps.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();
    if !(sd > 0.0) || sd <= f64::EPSILON * mean.abs() {
        return Err(FdrError::ZeroVariance);
    }
    Ok(ZScores {
        values: eps.iter().map(|v| (v - mean) / sd).collect(),
        mean,
        sd,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub bins: usize,
    pub degree: usize,
    /// Histogram range is padded by this fraction of the data range per side.
    pub pad_fraction: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            bins: DEFAULT_BINS,
            degree: DEFAULT_DEGREE,
            pad_fraction: DEFAULT_PAD_FRACTION,
        }
    }
}

impl FitOptions {
    fn validate(&self) -> Result<(), FdrError> {
        if self.bins < 10 {
            return Err(FdrError::InvalidOptions(format!(
                "bins must be >= 10, got {}",
                self.bins
            )));
        }
        if self.degree < 2 || self.degree >= self.bins {
            return Err(FdrError::InvalidOptions(format!(
                "degree must be in [2, bins), got {}",
                self.degree
            )));
        }
        if !(self.pad_fraction >= 0.0 && self.pad_fraction.is_finite()) {
            return Err(FdrError::InvalidOptions(format!(
                "pad fraction must be non-negative, got {}",
                self.pad_fraction
            )));
        }
        Ok(())
    }
}

/// Smoothed marginal density of the z-values.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureDensity {
    pub lo: f64,
    pub hi: f64,
    pub edges: Vec<f64>,
    pub centers: Vec<f64>,
    pub counts: Vec<u64>,
    /// Legendre coefficients of the unnormalised log density on `[lo, hi]`.
    pub coefficients: Vec<f64>,
    log_norm: f64,
}

fn legendre(u: f64, degree: usize, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if degree >= 1 {
        out.push(u);
    }
    for k in 1..degree {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * u * out[k] - kf * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
}

impl MixtureDensity {
    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    fn eta(&self, z: f64) -> f64 {
        let u = (2.0 * z - self.lo - self.hi) / (self.hi - self.lo);
        let mut basis = Vec::with_capacity(self.coefficients.len());
        legendre(u, self.coefficients.len() - 1, &mut basis);
        basis
            .iter()
            .zip(&self.coefficients)
            .map(|(b, c)| b * c)
            .sum()
    }

    /// `ln f(z)`; `-inf` outside the binned range.
    pub fn log_density(&self, z: f64) -> f64 {
        if z < self.lo || z > self.hi || z.is_nan() {
            f64::NEG_INFINITY
        } else {
            self.eta(z) - self.log_norm
        }
    }

    pub fn density(&self, z: f64) -> f64 {
        self.log_density(z).exp()
    }

    /// Simpson integral of `f` over the binned range.
    pub fn integral(&self) -> f64 {
        simpson(
            |z| self.density(z),
            self.lo,
            self.hi,
            self.counts.len() * QUADRATURE_PER_BIN,
        )
    }
}

fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (hi - lo) / n as f64;
    let mut sum = f(lo) + f(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(lo + i as f64 * h);
    }
    sum * h / 3.0
}

/// Poisson log-likelihood of the counts, up to a constant.
fn poisson_loglik(y: &DVector<f64>, eta: &DVector<f64>) -> f64 {
    y.iter().zip(eta.iter()).map(|(y, e)| y * e - e.exp()).sum()
}

pub fn fit_mixture(z: &[f64], opts: &FitOptions) -> Result<MixtureDensity, FdrError> {
    opts.validate()?;
    if z.len() < MIN_FIT_VALUES {
        return Err(FdrError::InsufficientData {
            got: z.len(),
            need: MIN_FIT_VALUES,
        });
    }
    if let Some(i) = z.iter().position(|v| !v.is_finite()) {
        return Err(FdrError::NonFinite(i));
    }
    let min = z.iter().copied().fold(f64::INFINITY, f64::min);
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    if !(range > 0.0) {
        return Err(FdrError::ZeroVariance);
    }
    let pad = opts.pad_fraction * range;
    let (lo, hi) = (min - pad, max + pad);
    let bins = opts.bins;
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| lo + i as f64 * width).collect();
    let centers: Vec<f64> = (0..bins).map(|i| lo + (i as f64 + 0.5) * width).collect();
    let mut counts = vec![0u64; bins];
    for &v in z {
        let i = (((v - lo) / width).floor() as usize).min(bins - 1);
        counts[i] += 1;
    }

    let p = opts.degree + 1;
    let mut x = DMatrix::<f64>::zeros(bins, p);
    let mut basis = Vec::with_capacity(p);
    for (k, &c) in centers.iter().enumerate() {
        legendre((2.0 * c - lo - hi) / (hi - lo), opts.degree, &mut basis);
        for (j, b) in basis.iter().enumerate() {
            x[(k, j)] = *b;
        }
    }
    let y = DVector::from_iterator(bins, counts.iter().map(|&c| c as f64));
    let mut beta = DVector::<f64>::zeros(p);
    beta[0] = (z.len() as f64 / bins as f64).ln();
    let mut eta = &x * &beta;
    let mut ll = poisson_loglik(&y, &eta);
    let mut converged = false;
    for _ in 0..MAX_NEWTON_STEPS {
        let mu = eta.map(f64::exp);
        let grad = x.transpose() * (&y - &mu);
        let mut hess = x.transpose() * DMatrix::from_diagonal(&mu) * &x;
        let ridge = 1e-12 * hess.trace().max(1.0);
        for i in 0..p {
            hess[(i, i)] += ridge;
        }
        let step = hess
            .cholesky()
            .map(|ch| ch.solve(&grad))
            .ok_or_else(|| FdrError::FitDivergence("singular information matrix".into()))?;
        let mut t = 1.0;
        let (next_beta, next_eta, next_ll) = loop {
            let b = &beta + &step * t;
            let e = &x * &b;
            let l = poisson_loglik(&y, &e);
            if l.is_finite() && l >= ll - 1e-12 * ll.abs() {
                break (b, e, l);
            }
            t *= 0.5;
            if t < 1e-12 {
                return Err(FdrError::FitDivergence("line search failed".into()));
            }
        };
        let moved = step.amax() * t;
        let gain = next_ll - ll;
        beta = next_beta;
        eta = next_eta;
        ll = next_ll;
        if moved < 1e-10 || gain.abs() <= 1e-13 * ll.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    if !converged || beta.iter().any(|b| !b.is_finite()) {
        return Err(FdrError::FitDivergence(format!(
            "no convergence after {MAX_NEWTON_STEPS} Newton steps"
        )));
    }

    let mut density = MixtureDensity {
        lo,
        hi,
        edges,
        centers,
        counts,
        coefficients: beta.iter().copied().collect(),
        log_norm: 0.0,
    };
    let n = bins * QUADRATURE_PER_BIN;
    let h = (hi - lo) / n as f64;
    let peak = (0..=n)
        .map(|i| density.eta(lo + i as f64 * h))
        .fold(f64::NEG_INFINITY, f64::max);
    let scaled = simpson(|z| (density.eta(z) - peak).exp(), lo, hi, n);
    density.log_norm = peak + scaled.ln();
    if !density.log_norm.is_finite() {
        return Err(FdrError::FitDivergence(
            "density cannot be normalised".into(),
        ));
    }
    Ok(density)
}

/// Normal null `N(delta0, sigma0)`, optionally weighted by `p0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullModel {
    pub delta0: f64,
    pub sigma0: f64,
    pub p0: Option<f64>,
    /// z-range of the central window the quadratic was fitted on.
    pub window: (f64, f64),
}

impl NullModel {
    /// Unweighted `f0(z)`.
    pub fn density(&self, z: f64) -> f64 {
        let u = (z - self.delta0) / self.sigma0;
        (-0.5 * u * u).exp() / (self.sigma0 * (2.0 * PI).sqrt())
    }
}

/// Central matching on the fitted density.
pub fn fit_null(density: &MixtureDensity, estimate_p0: bool) -> Result<NullModel, FdrError> {
    let width = density.bin_width();
    let f: Vec<f64> = density
        .centers
        .iter()
        .map(|&c| density.density(c))
        .collect();
    let mode = (0..f.len())
        .max_by(|&a, &b| f[a].total_cmp(&f[b]).then(b.cmp(&a)))
        .expect("density has bins");
    let (mut i, mut j) = (mode, mode);
    let mut mass = f[mode] * width;
    while mass < CENTRAL_MASS || j - i + 1 < MIN_CENTRAL_BINS {
        let left = (i > 0).then(|| f[i - 1]);
        let right = (j + 1 < f.len()).then(|| f[j + 1]);
        match (left, right) {
            (Some(l), Some(r)) if l >= r => {
                i -= 1;
                mass += l * width;
            }
            (_, Some(r)) => {
                j += 1;
                mass += r * width;
            }
            (Some(l), None) => {
                i -= 1;
                mass += l * width;
            }
            (None, None) => break,
        }
    }
    let zm = density.centers[mode];
    let mut ata = Matrix3::<f64>::zeros();
    let mut aty = Vector3::<f64>::zeros();
    for k in i..=j {
        let d = density.centers[k] - zm;
        let row = Vector3::new(1.0, d, d * d);
        ata += row * row.transpose();
        aty += row * density.log_density(density.centers[k]);
    }
    let window = (density.edges[i], density.edges[j + 1]);
    let coef = ata.lu().solve(&aty).ok_or(FdrError::NonConcave {
        c: f64::NAN,
        lo: window.0,
        hi: window.1,
    })?;
    let (a, b, c) = (coef[0], coef[1], coef[2]);
    if !(c < 0.0) {
        return Err(FdrError::NonConcave {
            c,
            lo: window.0,
            hi: window.1,
        });
    }
    let sigma0 = (-1.0 / (2.0 * c)).sqrt();
    let delta0 = zm - b / (2.0 * c);
    let p0 = estimate_p0.then(|| {
        let peak = a - b * b / (4.0 * c);
        (peak.exp() * (2.0 * PI).sqrt() * sigma0).min(1.0)
    });
    Ok(NullModel {
        delta0,
        sigma0,
        p0,
        window,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFdr {
    pub fdr: f64,
    /// `f(z)` underflowed to zero and the fdr was set to 0.
    pub underflow: bool,
}

/// `min(1, f0 / f)`.
pub fn fdr_from_densities(f0: f64, f: f64) -> LocalFdr {
    if f <= 0.0 || !f.is_normal() {
        LocalFdr {
            fdr: 0.0,
            underflow: true,
        }
    } else {
        LocalFdr {
            fdr: (f0 / f).clamp(0.0, 1.0),
            underflow: false,
        }
    }
}

pub fn local_fdr(density: &MixtureDensity, null: &NullModel, z: f64) -> LocalFdr {
    let f0 = null.density(z) * null.p0.unwrap_or(1.0);
    fdr_from_densities(f0, density.density(z))
}

/// Indices with `fdr < threshold`.
pub fn classify(fdrs: &[f64], threshold: f64) -> Vec<usize> {
    fdrs.iter()
        .enumerate()
        .filter(|(_, &v)| v < threshold)
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdrOptions {
    pub fit: FitOptions,
    pub threshold: f64,
    pub estimate_p0: bool,
}

impl Default for FdrOptions {
    fn default() -> Self {
        FdrOptions {
            fit: FitOptions::default(),
            threshold: DEFAULT_THRESHOLD,
            estimate_p0: false,
        }
    }
}

/// Outcome of z-scoring, fitting and classifying one batch of scores.
#[derive(Debug, Clone, PartialEq)]
pub struct FdrResult {
    pub z: ZScores,
    pub density: MixtureDensity,
    pub null: NullModel,
    pub fdr: Vec<LocalFdr>,
    pub threshold: f64,
    pub significant: Vec<bool>,
}

impl FdrResult {
    pub fn significant_count(&self) -> usize {
        self.significant.iter().filter(|s| **s).count()
    }
}

/// Fit and classify values that are already z-scores.
pub fn analyze_z(z: ZScores, opts: &FdrOptions) -> Result<FdrResult, FdrError> {
    if !(opts.threshold > 0.0 && opts.threshold <= 1.0) {
        return Err(FdrError::InvalidThreshold(opts.threshold));
    }
    let density = fit_mixture(&z.values, &opts.fit)?;
    let null = fit_null(&density, opts.estimate_p0)?;
    let fdr: Vec<LocalFdr> = z
        .values
        .iter()
        .map(|&v| local_fdr(&density, &null, v))
        .collect();
    let values: Vec<f64> = fdr.iter().map(|l| l.fdr).collect();
    let mut significant = vec![false; values.len()];
    for i in classify(&values, opts.threshold) {
        significant[i] = true;
    }
    Ok(FdrResult {
        z,
        density,
        null,
        fdr,
        threshold: opts.threshold,
        significant,
    })
}

/// z-score raw scores, then fit and classify.
pub fn analyze(scores: &[f64], opts: &FdrOptions) -> Result<FdrResult, FdrError> {
    analyze_z(z_scores(scores)?, opts)
}

/// Per-bin rows `center, count, f, f0` (densities; `f0` weighted by `p0`).
pub fn write_plot<W: Write>(
    mut out: W,
    density: &MixtureDensity,
    null: &NullModel,
) -> Result<(), FdrError> {
    writeln!(out, "center\tcount\tf\tf0")?;
    for (c, n) in density.centers.iter().zip(&density.counts) {
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            c,
            n,
            density.density(*c),
            null.density(*c) * null.p0.unwrap_or(1.0)
        )?;
    }
    Ok(())
}
