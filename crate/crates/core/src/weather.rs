//! Seasonal Ornstein–Uhlenbeck model for daily wind capacity factors.
//!
//! Capacity factors are linked to a nonnegative latent process `X` through
//!
//! ```text
//! C_i(t) = 1 − exp(−s_i(t) · X_i(t)),   s_i(t) = a_i + b_i sin(2πt/365) + c_i cos(2πt/365)
//! ```
//!
//! and `X` is a d-dimensional OU process driven by a compound Poisson process
//! with independent exponential jumps, `dX = −ΛX dt + Σ dL`. On a daily grid
//! the process is advanced as
//!
//! ```text
//! X_i(t+1) = e^(−λ_i) X_i(t) + (Σ ΔL(t))_i
//! ```
//!
//! where `ΔL_i(t)` sums a Poisson(ν_i) number of exponential jumps.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};

use crate::calendar::{day_of_year, DAYS_PER_YEAR};
use crate::linalg::least_squares;
use crate::matrix::Matrix;
use crate::stats;
use crate::{Error, Result};

/// Largest capacity factor produced by [`latent_to_cf`]; keeps the inverse
/// transform finite.
pub const MAX_CAPACITY_FACTOR: f64 = 1.0 - 1e-12;

/// Number of autocorrelation lags reported by [`diagnostics`].
pub const DIAGNOSTIC_LAGS: usize = 30;

/// Single-harmonic annual cycle `a + b·sin(2πt/365) + c·cos(2πt/365)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeasonalityParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl SeasonalityParams {
    pub const fn new(a: f64, b: f64, c: f64) -> Self {
        SeasonalityParams { a, b, c }
    }

    #[inline]
    pub fn value(&self, day: u16) -> f64 {
        let w = 2.0 * PI * day as f64 / DAYS_PER_YEAR as f64;
        self.a + self.b * libm::sin(w) + self.c * libm::cos(w)
    }

    /// Smallest value over days `1..=365` and the day where it occurs.
    pub fn minimum(&self) -> (u16, f64) {
        (1..=DAYS_PER_YEAR as u16).map(|d| (d, self.value(d))).fold(
            (0, f64::INFINITY),
            |best, cur| if cur.1 < best.1 { cur } else { best },
        )
    }

    pub fn ensure_positive(&self) -> Result<()> {
        let (day, value) = self.minimum();
        if value > 0.0 && value.is_finite() {
            Ok(())
        } else {
            Err(Error::NonPositiveSeasonality { day, value })
        }
    }
}

/// Least-squares fit of the single-harmonic basis, without sign constraints.
pub(crate) fn fit_harmonic(
    z: &[f64],
    day_of_year: &[u16],
    min_len: usize,
) -> Result<SeasonalityParams> {
    if z.len() != day_of_year.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} observations but {} day-of-year labels",
            z.len(),
            day_of_year.len()
        )));
    }
    if z.len() < min_len {
        return Err(Error::InsufficientData {
            needed: min_len,
            got: z.len(),
        });
    }
    if let Some(step) = z.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { step, column: 0 });
    }
    let mut design = Vec::with_capacity(3 * z.len());
    for &d in day_of_year {
        let w = 2.0 * PI * d as f64 / DAYS_PER_YEAR as f64;
        design.extend_from_slice(&[1.0, libm::sin(w), libm::cos(w)]);
    }
    let fit = least_squares(&design, 3, z)
        .map_err(|_| Error::invalid("day_of_year", "day labels do not span the annual cycle"))?;
    let c = &fit.coefficients;
    Ok(SeasonalityParams::new(c[0], c[1], c[2]))
}

/// Fit the seasonality of one region's transformed series `z = −ln(1 − C)`.
///
/// Needs at least two years of data; fails if the fitted cycle touches zero.
pub fn fit_seasonality(z: &[f64], day_of_year: &[u16]) -> Result<SeasonalityParams> {
    let s = fit_harmonic(z, day_of_year, 2 * DAYS_PER_YEAR)?;
    s.ensure_positive()?;
    Ok(s)
}

/// Mean-reversion and jump-driver parameters of the latent process.
#[derive(Debug, Clone, PartialEq)]
pub struct OuParams {
    lambda: Vec<f64>,
    sigma: Vec<f64>,
    jump_intensity: Vec<f64>,
    jump_mean: Vec<f64>,
}

impl OuParams {
    /// `sigma` is row-major `d × d`. A zero jump intensity switches a driver off.
    pub fn new(
        lambda: Vec<f64>,
        sigma: Vec<f64>,
        jump_intensity: Vec<f64>,
        jump_mean: Vec<f64>,
    ) -> Result<Self> {
        let d = lambda.len();
        if d == 0 {
            return Err(Error::invalid("lambda", "at least one region is required"));
        }
        if sigma.len() != d * d || jump_intensity.len() != d || jump_mean.len() != d {
            return Err(Error::ShapeMismatch(format!(
                "lambda has {d} entries; sigma needs {} and jump vectors {d}",
                d * d
            )));
        }
        if let Some(l) = lambda.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::invalid(
                "lambda",
                format!("{l} is not a positive finite rate"),
            ));
        }
        if let Some(s) = sigma.iter().find(|&&s| !(s >= 0.0 && s.is_finite())) {
            return Err(Error::invalid(
                "sigma",
                format!("{s} is negative or non-finite"),
            ));
        }
        if let Some(v) = jump_intensity
            .iter()
            .find(|&&v| !(v >= 0.0 && v.is_finite()))
        {
            return Err(Error::invalid(
                "jump_intensity",
                format!("{v} is negative or non-finite"),
            ));
        }
        if let Some(m) = jump_mean.iter().find(|&&m| !(m > 0.0 && m.is_finite())) {
            return Err(Error::invalid("jump_mean", format!("{m} is not positive")));
        }
        Ok(OuParams {
            lambda,
            sigma,
            jump_intensity,
            jump_mean,
        })
    }

    pub fn dims(&self) -> usize {
        self.lambda.len()
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// Row-major `d × d` loading matrix.
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    #[inline]
    pub fn sigma_at(&self, i: usize, j: usize) -> f64 {
        self.sigma[i * self.dims() + j]
    }

    pub fn jump_intensity(&self) -> &[f64] {
        &self.jump_intensity
    }

    pub fn jump_mean(&self) -> &[f64] {
        &self.jump_mean
    }

    /// One-step decay factors `e^(−λ_i)`.
    pub fn decay(&self) -> Vec<f64> {
        self.lambda.iter().map(|&l| libm::exp(-l)).collect()
    }

    /// Expected one-step increment `Σ (ν ∘ jump_mean)`.
    pub fn mean_increment(&self) -> Vec<f64> {
        let d = self.dims();
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|k| self.sigma_at(i, k) * self.jump_intensity[k] * self.jump_mean[k])
                    .sum()
            })
            .collect()
    }

    /// Stationary mean of the daily recursion, `(Σ ν∘μ)_i / (1 − e^(−λ_i))`.
    pub fn stationary_mean(&self) -> Vec<f64> {
        self.mean_increment()
            .iter()
            .zip(self.decay())
            .map(|(m, phi)| m / (1.0 - phi))
            .collect()
    }
}

/// Full capacity-factor model: seasonality per region plus latent dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct WindModelParams {
    seasonality: Vec<SeasonalityParams>,
    ou: OuParams,
}

impl WindModelParams {
    pub fn new(seasonality: Vec<SeasonalityParams>, ou: OuParams) -> Result<Self> {
        if seasonality.len() != ou.dims() {
            return Err(Error::ShapeMismatch(format!(
                "{} seasonality triples for a {}-dimensional process",
                seasonality.len(),
                ou.dims()
            )));
        }
        for s in &seasonality {
            s.ensure_positive()?;
        }
        Ok(WindModelParams { seasonality, ou })
    }

    pub fn seasonality(&self) -> &[SeasonalityParams] {
        &self.seasonality
    }

    pub fn ou(&self) -> &OuParams {
        &self.ou
    }

    pub fn dims(&self) -> usize {
        self.ou.dims()
    }

    /// Simulate `n_days` of capacity factors starting on `start_day`.
    ///
    /// The latent state starts at its stationary mean and `burn_in` steps are
    /// discarded first.
    pub fn simulate<R: Rng + ?Sized>(
        &self,
        n_days: usize,
        start_day: u16,
        burn_in: usize,
        rng: &mut R,
    ) -> CapacityFactorSeries {
        let x0 = self.ou.stationary_mean();
        let path = simulate_ou_inner(&self.ou, burn_in + n_days, &x0, rng);
        let path = path.slice_rows(burn_in, burn_in + n_days);
        latent_to_cf_inner(&path, &self.seasonality, start_day)
    }
}

/// Daily capacity factors for `d` regions.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityFactorSeries {
    regions: Vec<String>,
    values: Matrix,
    day_of_year: Vec<u16>,
}

impl CapacityFactorSeries {
    pub fn new(regions: Vec<String>, values: Matrix, day_of_year: Vec<u16>) -> Result<Self> {
        if regions.len() != values.cols() || day_of_year.len() != values.rows() {
            return Err(Error::ShapeMismatch(format!(
                "{} regions and {} day labels for a {}x{} table",
                regions.len(),
                day_of_year.len(),
                values.rows(),
                values.cols()
            )));
        }
        if let Some(&d) = day_of_year
            .iter()
            .find(|&&d| !(1..=DAYS_PER_YEAR as u16).contains(&d))
        {
            return Err(Error::invalid(
                "day_of_year",
                format!("{d} is outside 1..=365"),
            ));
        }
        for t in 0..values.rows() {
            for (i, &v) in values.row(t).iter().enumerate() {
                if !(0.0..1.0).contains(&v) {
                    return Err(Error::DomainError {
                        step: t,
                        region: i,
                        value: v,
                    });
                }
            }
        }
        Ok(CapacityFactorSeries {
            regions,
            values,
            day_of_year,
        })
    }

    pub fn regions(&self) -> &[String] {
        &self.regions
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn day_of_year(&self) -> &[u16] {
        &self.day_of_year
    }

    pub fn len(&self) -> usize {
        self.values.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.rows() == 0
    }

    pub fn with_regions(mut self, regions: Vec<String>) -> Result<Self> {
        if regions.len() != self.regions.len() {
            return Err(Error::ShapeMismatch(
                "region name count does not match".into(),
            ));
        }
        self.regions = regions;
        Ok(self)
    }

    pub fn into_values(self) -> Matrix {
        self.values
    }
}

fn default_region_names(d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("region{i}")).collect()
}

/// Invert the capacity-factor link: `X_i(t) = −ln(1 − C_i(t)) / s_i(day)`.
pub fn transform_to_latent(
    cf: &CapacityFactorSeries,
    seasonality: &[SeasonalityParams],
) -> Result<Matrix> {
    let values = cf.values();
    if seasonality.len() != values.cols() {
        return Err(Error::ShapeMismatch(format!(
            "{} seasonality triples for {} regions",
            seasonality.len(),
            values.cols()
        )));
    }
    for s in seasonality {
        s.ensure_positive()?;
    }
    let mut x = Matrix::zeros(values.rows(), values.cols());
    for t in 0..values.rows() {
        let day = cf.day_of_year[t];
        for (i, s) in seasonality.iter().enumerate() {
            let c = values.get(t, i);
            if !(0.0..1.0).contains(&c) {
                return Err(Error::DomainError {
                    step: t,
                    region: i,
                    value: c,
                });
            }
            x.set(t, i, -libm::log1p(-c) / s.value(day));
        }
    }
    Ok(x)
}

/// Map a latent path to capacity factors, `C = 1 − exp(−s·X)`.
///
/// Step `t` (0-based) is on day-of-year `start_day + t`, wrapping after 365.
pub fn latent_to_cf(
    x: &Matrix,
    seasonality: &[SeasonalityParams],
    start_day: u16,
) -> Result<CapacityFactorSeries> {
    if seasonality.len() != x.cols() {
        return Err(Error::ShapeMismatch(format!(
            "{} seasonality triples for {} regions",
            seasonality.len(),
            x.cols()
        )));
    }
    if !(1..=DAYS_PER_YEAR as u16).contains(&start_day) {
        return Err(Error::invalid(
            "start_day",
            format!("{start_day} is outside 1..=365"),
        ));
    }
    for s in seasonality {
        s.ensure_positive()?;
    }
    if let Some(k) = x.as_slice().iter().position(|v| !(*v >= 0.0)) {
        return Err(Error::invalid(
            "x",
            format!("latent value at step {} is negative", k / x.cols()),
        ));
    }
    Ok(latent_to_cf_inner(x, seasonality, start_day))
}

fn latent_to_cf_inner(
    x: &Matrix,
    seasonality: &[SeasonalityParams],
    start_day: u16,
) -> CapacityFactorSeries {
    let mut c = Matrix::zeros(x.rows(), x.cols());
    let mut days = Vec::with_capacity(x.rows());
    for t in 0..x.rows() {
        let day = day_of_year(start_day, t);
        days.push(day);
        for (i, s) in seasonality.iter().enumerate() {
            let v = -libm::expm1(-s.value(day) * x.get(t, i));
            c.set(t, i, v.min(MAX_CAPACITY_FACTOR));
        }
    }
    CapacityFactorSeries {
        regions: default_region_names(x.cols()),
        values: c,
        day_of_year: days,
    }
}

/// Per-region compound Poisson sampler with exponential jump sizes.
#[derive(Debug, Clone)]
pub struct JumpSampler {
    counts: Vec<Option<Poisson<f64>>>,
    jump_mean: Vec<f64>,
}

impl JumpSampler {
    pub fn new(params: &OuParams) -> Self {
        let counts = params
            .jump_intensity()
            .iter()
            .map(|&nu| {
                if nu > 0.0 {
                    Poisson::new(nu).ok()
                } else {
                    None
                }
            })
            .collect();
        JumpSampler {
            counts,
            jump_mean: params.jump_mean().to_vec(),
        }
    }

    /// Draw one step's driver increments `ΔL` into `out`. Regions are drawn in
    /// order; within a region the count comes first, then the jump sizes.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = 0.0;
            if let Some(p) = &self.counts[k] {
                let n = p.sample(rng) as u64;
                let mut acc = 0.0;
                for _ in 0..n {
                    let e: f64 = Exp1.sample(rng);
                    acc += e;
                }
                *slot = acc * self.jump_mean[k];
            }
        }
    }
}

/// Simulate `n_steps` steps of the latent process from `x0`.
///
/// Row `t` of the result is `X(t+1)`; the initial state is not included.
pub fn simulate_ou<R: Rng + ?Sized>(
    params: &OuParams,
    n_steps: usize,
    x0: &[f64],
    rng: &mut R,
) -> Result<Matrix> {
    if n_steps == 0 {
        return Err(Error::invalid("n_steps", "must be at least 1"));
    }
    if x0.len() != params.dims() {
        return Err(Error::ShapeMismatch(format!(
            "initial state has {} entries for a {}-dimensional process",
            x0.len(),
            params.dims()
        )));
    }
    if let Some(v) = x0.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(Error::invalid(
            "x0",
            format!("{v} is not a nonnegative finite state"),
        ));
    }
    Ok(simulate_ou_inner(params, n_steps, x0, rng))
}

fn simulate_ou_inner<R: Rng + ?Sized>(
    params: &OuParams,
    n_steps: usize,
    x0: &[f64],
    rng: &mut R,
) -> Matrix {
    let d = params.dims();
    let decay = params.decay();
    let sampler = JumpSampler::new(params);
    let mut out = Matrix::zeros(n_steps, d);
    let mut state = x0.to_vec();
    let mut jumps = vec![0.0; d];
    for t in 0..n_steps {
        sampler.sample_into(rng, &mut jumps);
        for i in 0..d {
            let mut inc = 0.0;
            for (k, j) in jumps.iter().enumerate() {
                inc += params.sigma_at(i, k) * j;
            }
            state[i] = decay[i] * state[i] + inc;
        }
        out.row_mut(t).copy_from_slice(&state);
    }
    out
}

/// Residual moments used by the jump-driver moment matching.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualMoments {
    pub mean: Vec<f64>,
    /// Row-major `d × d` population covariance.
    pub covariance: Vec<f64>,
    pub skewness: Vec<f64>,
}

/// Estimation result with the quantities needed to judge it.
#[derive(Debug, Clone, PartialEq)]
pub struct OuFit {
    pub params: OuParams,
    /// AR(1) slopes `e^(−λ_i)`.
    pub slopes: Vec<f64>,
    pub residuals: ResidualMoments,
    /// Model-implied minus sample residual skewness, per region.
    pub skewness_error: Vec<f64>,
}

/// Estimate latent dynamics from a nonnegative series sampled once per day.
///
/// 1. Per region, the OLS slope (with intercept) of `X_i(t+1)` on `X_i(t)`
///    gives `φ_i` and `λ_i = −ln φ_i`.
/// 2. Residuals `ε = X(t+1) − diag(φ) X(t)` are matched to `Σ ΔL` with
///    unit-mean exponential jumps and lower-triangular `Σ`. Means and
///    covariances pin down `Σ` and `ν` row by row; skewness is reported as a
///    goodness-of-fit check.
///
/// If the exact system has no nonnegative solution, a least-squares fit over
/// means, covariances and skewnesses is returned inside
/// [`Error::MomentMatchFailure`].
pub fn fit_ou(x: &Matrix) -> Result<OuFit> {
    let n = x.rows();
    let d = x.cols();
    if n < 2 * DAYS_PER_YEAR {
        return Err(Error::InsufficientData {
            needed: 2 * DAYS_PER_YEAR,
            got: n,
        });
    }
    x.check_finite()?;
    if let Some(k) = x.as_slice().iter().position(|v| *v < 0.0) {
        return Err(Error::invalid(
            "x",
            format!("latent value at step {} is negative", k / d),
        ));
    }

    let mut slopes = Vec::with_capacity(d);
    for i in 0..d {
        let col = x.column(i);
        let (prev, next) = (&col[..n - 1], &col[1..]);
        let var = stats::variance(prev);
        let slope = if var > 0.0 {
            stats::covariance(prev, next) / var
        } else {
            f64::NAN
        };
        if !(slope > 0.0 && slope < 1.0) {
            return Err(Error::NonStationary { region: i, slope });
        }
        slopes.push(slope);
    }

    let mut eps: Vec<Vec<f64>> = vec![Vec::with_capacity(n - 1); d];
    for t in 0..n - 1 {
        for i in 0..d {
            eps[i].push(x.get(t + 1, i) - slopes[i] * x.get(t, i));
        }
    }
    let mean: Vec<f64> = eps.iter().map(|e| stats::mean(e)).collect();
    let mut covariance = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let c = if i == j {
                stats::variance(&eps[i])
            } else {
                stats::covariance(&eps[i], &eps[j])
            };
            covariance[i * d + j] = c;
            covariance[j * d + i] = c;
        }
    }
    let skewness: Vec<f64> = eps.iter().map(|e| stats::skewness(e)).collect();
    let residuals = ResidualMoments {
        mean,
        covariance,
        skewness,
    };
    let lambda: Vec<f64> = slopes.iter().map(|&p| -libm::log(p)).collect();

    match solve_exact_moments(&residuals) {
        Some((sigma, nu)) => {
            let params = OuParams::new(lambda, sigma, nu, vec![1.0; d])?;
            let implied = implied_skewness(&params);
            let skewness_error = implied
                .iter()
                .zip(&residuals.skewness)
                .map(|(m, s)| m - s)
                .collect();
            Ok(OuFit {
                params,
                slopes,
                residuals,
                skewness_error,
            })
        }
        None => {
            let (sigma, nu, residual) = least_squares_moments(&residuals);
            let fallback = OuParams::new(lambda, sigma, nu, vec![1.0; d])?;
            Err(Error::MomentMatchFailure {
                fallback: Box::new(fallback),
                residual,
            })
        }
    }
}

/// Skewness of `(Σ ΔL)_i` implied by unit-mean exponential jumps
/// (cumulants of a compound Poisson sum: `κ_n = ν · n!`).
pub fn implied_skewness(params: &OuParams) -> Vec<f64> {
    let d = params.dims();
    (0..d)
        .map(|i| {
            let (mut k2, mut k3) = (0.0, 0.0);
            for k in 0..d {
                let s = params.sigma_at(i, k) * params.jump_mean()[k];
                let nu = params.jump_intensity()[k];
                k2 += 2.0 * nu * s * s;
                k3 += 6.0 * nu * s * s * s;
            }
            if k2 > 0.0 {
                k3 / libm::pow(k2, 1.5)
            } else {
                0.0
            }
        })
        .collect()
}

/// Row-by-row solution of
/// `mean_i = Σ_k σ_ik ν_k`, `cov_ij = Σ_k σ_ik σ_jk 2ν_k` for lower-triangular
/// `Σ ≥ 0` and `ν > 0`. `None` when no such solution exists.
fn solve_exact_moments(m: &ResidualMoments) -> Option<(Vec<f64>, Vec<f64>)> {
    let d = m.mean.len();
    let mut sigma = vec![0.0; d * d];
    let mut nu = vec![0.0; d];
    for i in 0..d {
        for j in 0..i {
            let mut s = m.covariance[i * d + j];
            for k in 0..j {
                s -= sigma[i * d + k] * sigma[j * d + k] * 2.0 * nu[k];
            }
            let v = s / (2.0 * sigma[j * d + j] * nu[j]);
            if !(v >= 0.0 && v.is_finite()) {
                return None;
            }
            sigma[i * d + j] = v;
        }
        let mut mean = m.mean[i];
        let mut var = m.covariance[i * d + i];
        for k in 0..i {
            mean -= sigma[i * d + k] * nu[k];
            var -= sigma[i * d + k] * sigma[i * d + k] * 2.0 * nu[k];
        }
        if !(mean > 0.0 && var > 0.0) {
            return None;
        }
        sigma[i * d + i] = var / (2.0 * mean);
        nu[i] = 2.0 * mean * mean / var;
        if !(sigma[i * d + i].is_finite() && nu[i].is_finite()) {
            return None;
        }
    }
    Some((sigma, nu))
}

/// Nonnegative least-squares match of means, covariances and skewnesses.
/// Returns `(sigma, nu, residual_norm)`.
fn least_squares_moments(m: &ResidualMoments) -> (Vec<f64>, Vec<f64>, f64) {
    let d = m.mean.len();
    let sd: Vec<f64> = (0..d)
        .map(|i| {
            let s = libm::sqrt(m.covariance[i * d + i].max(0.0));
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    // parameters: lower-triangular sigma entries then nu, all as squares
    let tri: Vec<(usize, usize)> = (0..d).flat_map(|i| (0..=i).map(move |j| (i, j))).collect();
    let unpack = |theta: &[f64]| {
        let mut sigma = vec![0.0; d * d];
        for (k, &(i, j)) in tri.iter().enumerate() {
            sigma[i * d + j] = theta[k] * theta[k];
        }
        let nu: Vec<f64> = theta[tri.len()..].iter().map(|t| t * t).collect();
        (sigma, nu)
    };
    let objective = |theta: &[f64]| {
        let (sigma, nu) = unpack(theta);
        let mut r = 0.0;
        for i in 0..d {
            let mean: f64 = (0..d).map(|k| sigma[i * d + k] * nu[k]).sum();
            r += sq((mean - m.mean[i]) / sd[i]);
            for j in 0..=i {
                let cov: f64 = (0..d)
                    .map(|k| sigma[i * d + k] * sigma[j * d + k] * 2.0 * nu[k])
                    .sum();
                r += sq((cov - m.covariance[i * d + j]) / (sd[i] * sd[j]));
            }
            let k3: f64 = (0..d)
                .map(|k| 6.0 * nu[k] * libm::pow(sigma[i * d + k], 3.0))
                .sum();
            let skew_target = m.skewness[i] * libm::pow(m.covariance[i * d + i].max(0.0), 1.5);
            r += sq((k3 - skew_target) / (sd[i] * sd[i] * sd[i]));
        }
        r
    };
    let mut start = vec![0.0; tri.len() + d];
    for (k, &(i, j)) in tri.iter().enumerate() {
        if i == j {
            start[k] = libm::sqrt(sd[i] / 2.0);
        }
    }
    for v in start[tri.len()..].iter_mut() {
        *v = 1.0;
    }
    let (theta, value) = nelder_mead(&objective, &start, 4000);
    let (sigma, mut nu) = unpack(&theta);
    for v in nu.iter_mut() {
        // keep the fallback a valid parameter set
        *v = v.max(1e-12);
    }
    (sigma, nu, libm::sqrt(value))
}

#[inline]
fn sq(v: f64) -> f64 {
    v * v
}

/// Plain Nelder–Mead simplex search. Returns the best point and its value.
fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, start: &[f64], max_iter: usize) -> (Vec<f64>, f64) {
    let n = start.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(start.to_vec());
    for k in 0..n {
        let mut p = start.to_vec();
        p[k] += if p[k] != 0.0 { 0.1 * p[k] } else { 0.05 };
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();
    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        if values[n] - values[0] <= 1e-14 * (1.0 + libm::fabs(values[0])) {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|p| p[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            (0..n)
                .map(|j| centroid[j] + t * (simplex[n][j] - centroid[j]))
                .collect()
        };
        let reflected = along(-1.0);
        let fr = f(&reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
        } else {
            let contracted = if fr < values[n] {
                along(-0.5)
            } else {
                along(0.5)
            };
            let fc = f(&contracted);
            if fc < values[n].min(fr) {
                simplex[n] = contracted;
                values[n] = fc;
            } else {
                let best = simplex[0].clone();
                for p in simplex.iter_mut().skip(1) {
                    for j in 0..n {
                        p[j] = best[j] + 0.5 * (p[j] - best[j]);
                    }
                }
                for k in 1..=n {
                    values[k] = f(&simplex[k]);
                }
            }
        }
    }
    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    (simplex[best].clone(), values[best])
}

/// Result of fitting the full capacity-factor model to data.
#[derive(Debug, Clone, PartialEq)]
pub struct WindFit {
    pub params: WindModelParams,
    pub ou: OuFit,
}

/// Transform, fit seasonality per region, invert to the latent series and
/// estimate its dynamics.
pub fn fit_wind_model(cf: &CapacityFactorSeries) -> Result<WindFit> {
    let d = cf.values().cols();
    let mut seasonality = Vec::with_capacity(d);
    for i in 0..d {
        let z: Vec<f64> = cf
            .values()
            .column(i)
            .iter()
            .map(|&c| -libm::log1p(-c))
            .collect();
        seasonality.push(fit_seasonality(&z, cf.day_of_year())?);
    }
    let x = transform_to_latent(cf, &seasonality)?;
    let ou = fit_ou(&x)?;
    let params = WindModelParams::new(seasonality, ou.params.clone())?;
    Ok(WindFit { params, ou })
}

/// Summary statistics of one series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub skewness: Vec<f64>,
    /// Per region, latent autocorrelation at lags `1..=30`.
    pub latent_acf: Vec<Vec<f64>>,
    /// Pairwise capacity-factor correlations for `i < j`, row by row.
    pub cross_correlation: Vec<f64>,
}

impl SeriesStats {
    fn compute(cf: &CapacityFactorSeries, seasonality: &[SeasonalityParams]) -> Result<Self> {
        let d = cf.values().cols();
        let columns: Vec<Vec<f64>> = (0..d).map(|i| cf.values().column(i)).collect();
        let latent = transform_to_latent(cf, seasonality)?;
        let mut cross = Vec::new();
        for i in 0..d {
            for j in i + 1..d {
                cross.push(stats::correlation(&columns[i], &columns[j]));
            }
        }
        Ok(SeriesStats {
            mean: columns.iter().map(|c| stats::mean(c)).collect(),
            std: columns.iter().map(|c| stats::std_dev(c)).collect(),
            skewness: columns.iter().map(|c| stats::skewness(c)).collect(),
            latent_acf: (0..d)
                .map(|i| stats::autocorrelations(&latent.column(i), DIAGNOSTIC_LAGS))
                .collect(),
            cross_correlation: cross,
        })
    }

    fn minus(&self, other: &SeriesStats) -> SeriesStats {
        let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>();
        SeriesStats {
            mean: diff(&self.mean, &other.mean),
            std: diff(&self.std, &other.std),
            skewness: diff(&self.skewness, &other.skewness),
            latent_acf: self
                .latent_acf
                .iter()
                .zip(&other.latent_acf)
                .map(|(a, b)| diff(a, b))
                .collect(),
            cross_correlation: diff(&self.cross_correlation, &other.cross_correlation),
        }
    }
}

/// Side-by-side statistics of a simulated and a reference series.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub simulated: SeriesStats,
    pub reference: SeriesStats,
    /// `simulated − reference`, field by field.
    pub delta: SeriesStats,
}

/// Compare a simulated series with a reference series. Latent
/// autocorrelations use `seasonality` to invert both series.
pub fn diagnostics(
    simulated: &CapacityFactorSeries,
    reference: &CapacityFactorSeries,
    seasonality: &[SeasonalityParams],
) -> Result<DiagnosticsReport> {
    if simulated.is_empty() || reference.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    if simulated.values().cols() != reference.values().cols() {
        return Err(Error::ShapeMismatch(
            "simulated and reference series differ in region count".into(),
        ));
    }
    let sim = SeriesStats::compute(simulated, seasonality)?;
    let reference = SeriesStats::compute(reference, seasonality)?;
    let delta = sim.minus(&reference);
    Ok(DiagnosticsReport {
        simulated: sim,
        reference,
        delta,
    })
}
