//! Temperature-driven daily electricity demand.
//!
//! Temperatures follow `T(t) = S(t) + Y(t)` with a single-harmonic seasonal
//! mean `S` and a zero-mean AR(3) anomaly `Y`. Load is a weekday base level
//! plus heating and cooling degree-day responses:
//!
//! ```text
//! D_i(t) = β_weekday,i(t) + β_heating,i · max(15.5 − T_i(t), 0) + β_cooling,i · max(T_i(t) − 15.5, 0)
//! ```
//!
//! Holidays use the Sunday coefficient.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::calendar::{day_of_year, Calendar, Weekday, DAYS_PER_YEAR};
use crate::linalg::{least_squares, LstsqError};
use crate::matrix::Matrix;
use crate::stats;
use crate::weather::{fit_harmonic, SeasonalityParams};
use crate::{Error, Result};

pub const AR_ORDER: usize = 3;
pub const DEGREE_DAY_THRESHOLD_DEGC: f64 = 15.5;
/// Steps simulated and discarded before the first reported temperature.
pub const TEMPERATURE_BURN_IN: usize = 365;
const MIN_TEMPERATURE_YEARS: usize = 10;

/// `true` when all roots of `1 − φ1 z − … − φp z^p` lie outside the unit
/// circle, checked by stepping the coefficients down to partial
/// autocorrelations.
pub fn is_stationary(ar: &[f64]) -> bool {
    let mut a = ar.to_vec();
    while let Some(&kappa) = a.last() {
        if !(libm::fabs(kappa) < 1.0) {
            return false;
        }
        let m = a.len();
        let denom = 1.0 - kappa * kappa;
        let prev: Vec<f64> = (0..m - 1)
            .map(|k| (a[k] + kappa * a[m - 2 - k]) / denom)
            .collect();
        a = prev;
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionTemperatureModel {
    /// Seasonal mean in °C.
    pub seasonal: SeasonalityParams,
    pub ar: [f64; AR_ORDER],
    /// Innovation standard deviation in °C.
    pub innovation_std: f64,
}

impl RegionTemperatureModel {
    pub fn new(
        seasonal: SeasonalityParams,
        ar: [f64; AR_ORDER],
        innovation_std: f64,
    ) -> Result<Self> {
        if !is_stationary(&ar) {
            return Err(Error::invalid(
                "ar_coeffs",
                format!("{ar:?} is not a stationary AR(3)"),
            ));
        }
        if !(innovation_std >= 0.0 && innovation_std.is_finite()) {
            return Err(Error::invalid(
                "innovation_std",
                format!("{innovation_std} is not a valid standard deviation"),
            ));
        }
        Ok(RegionTemperatureModel {
            seasonal,
            ar,
            innovation_std,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureModelParams {
    regions: Vec<RegionTemperatureModel>,
}

impl TemperatureModelParams {
    pub fn new(regions: Vec<RegionTemperatureModel>) -> Result<Self> {
        if regions.is_empty() {
            return Err(Error::invalid(
                "temperature",
                "at least one region is required",
            ));
        }
        for r in &regions {
            RegionTemperatureModel::new(r.seasonal, r.ar, r.innovation_std)?;
        }
        Ok(TemperatureModelParams { regions })
    }

    pub fn regions(&self) -> &[RegionTemperatureModel] {
        &self.regions
    }

    pub fn dims(&self) -> usize {
        self.regions.len()
    }
}

/// Temperature fit with per-region notes.
#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureFit {
    pub params: TemperatureModelParams,
    /// Regions whose anomalies were numerically zero; their AR part is zero.
    pub zero_variance: Vec<bool>,
}

/// Fit seasonal mean and AR(3) anomaly model per region (columns of `temps`).
///
/// Needs at least ten years of consecutive daily data.
pub fn fit_temperature_model(temps: &Matrix, day_of_year: &[u16]) -> Result<TemperatureFit> {
    let needed = MIN_TEMPERATURE_YEARS * DAYS_PER_YEAR;
    if temps.rows() < needed {
        return Err(Error::InsufficientData {
            needed,
            got: temps.rows(),
        });
    }
    temps.check_finite()?;
    let mut regions = Vec::with_capacity(temps.cols());
    let mut zero_variance = Vec::with_capacity(temps.cols());
    for i in 0..temps.cols() {
        let series = temps.column(i);
        let seasonal = fit_harmonic(&series, day_of_year, needed)?;
        let y: Vec<f64> = series
            .iter()
            .zip(day_of_year)
            .map(|(t, &d)| t - seasonal.value(d))
            .collect();
        let spread = stats::std_dev(&y);
        if spread <= 1e-9 * libm::fmax(1.0, libm::fabs(seasonal.a)) {
            regions.push(RegionTemperatureModel {
                seasonal,
                ar: [0.0; AR_ORDER],
                innovation_std: spread,
            });
            zero_variance.push(true);
            continue;
        }
        let n = y.len();
        let mut design = Vec::with_capacity((n - AR_ORDER) * AR_ORDER);
        for t in AR_ORDER..n {
            design.extend((1..=AR_ORDER).map(|k| y[t - k]));
        }
        let fit = least_squares(&design, AR_ORDER, &y[AR_ORDER..]).map_err(|_| {
            Error::NonStationaryFit {
                region: i,
                reason: "lagged anomalies are collinear",
            }
        })?;
        let ar = [
            fit.coefficients[0],
            fit.coefficients[1],
            fit.coefficients[2],
        ];
        if !is_stationary(&ar) {
            return Err(Error::NonStationaryFit {
                region: i,
                reason: "fitted AR(3) has a root inside the unit circle",
            });
        }
        let innovation_std = libm::sqrt(fit.residual_sum_squares / (n - AR_ORDER) as f64);
        regions.push(RegionTemperatureModel {
            seasonal,
            ar,
            innovation_std,
        });
        zero_variance.push(false);
    }
    Ok(TemperatureFit {
        params: TemperatureModelParams { regions },
        zero_variance,
    })
}

/// Simulate `n_years` consecutive 365-day years of daily temperatures
/// (rows, starting on day 1) for every region (columns).
///
/// Anomalies start at zero and run through [`TEMPERATURE_BURN_IN`] discarded
/// steps first. Each step draws one standard normal per region, in region
/// order.
pub fn simulate_temperature<R: Rng + ?Sized>(
    params: &TemperatureModelParams,
    n_years: usize,
    rng: &mut R,
) -> Matrix {
    simulate_temperature_with_burn_in(params, n_years, TEMPERATURE_BURN_IN, rng)
}

pub fn simulate_temperature_with_burn_in<R: Rng + ?Sized>(
    params: &TemperatureModelParams,
    n_years: usize,
    burn_in: usize,
    rng: &mut R,
) -> Matrix {
    let d = params.dims();
    let n = n_years * DAYS_PER_YEAR;
    let mut out = Matrix::zeros(n, d);
    // lag buffers, most recent first
    let mut lags = vec![[0.0f64; AR_ORDER]; d];
    for step in 0..burn_in + n {
        for (i, region) in params.regions.iter().enumerate() {
            let e: f64 = StandardNormal.sample(rng);
            let h = &mut lags[i];
            let y = region.ar[0] * h[0]
                + region.ar[1] * h[1]
                + region.ar[2] * h[2]
                + region.innovation_std * e;
            *h = [y, h[0], h[1]];
            if step >= burn_in {
                let t = step - burn_in;
                out.set(t, i, region.seasonal.value(day_of_year(1, t)) + y);
            }
        }
    }
    out
}

/// Fit outcome of one degree-day term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeDayStatus {
    /// Estimated; `significant` when |t| ≥ 1.96.
    Fitted { significant: bool },
    /// The term was zero throughout the data; its coefficient is reported as 0.
    NeverActive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionLoadRegression {
    /// MW by weekday, Monday first.
    pub beta_weekday: [f64; 7],
    /// MW per heating degree day.
    pub beta_heating: f64,
    /// MW per cooling degree day.
    pub beta_cooling: f64,
    pub threshold: f64,
}

impl RegionLoadRegression {
    pub fn new(
        beta_weekday: [f64; 7],
        beta_heating: f64,
        beta_cooling: f64,
        threshold: f64,
    ) -> Result<Self> {
        if let Some(b) = beta_weekday.iter().find(|&&b| !(b > 0.0 && b.is_finite())) {
            return Err(Error::invalid(
                "beta_weekday",
                format!("{b} is not a positive base load"),
            ));
        }
        if !(beta_heating >= 0.0 && beta_heating.is_finite()) {
            return Err(Error::invalid(
                "beta_heating",
                format!("{beta_heating} must be nonnegative"),
            ));
        }
        if !beta_cooling.is_finite() || !threshold.is_finite() {
            return Err(Error::invalid(
                "beta_cooling",
                "coefficients must be finite",
            ));
        }
        Ok(RegionLoadRegression {
            beta_weekday,
            beta_heating,
            beta_cooling,
            threshold,
        })
    }

    /// Unfloored regression value in MW.
    #[inline]
    pub fn predict(&self, temperature: f64, class: Weekday) -> f64 {
        let hdd = libm::fmax(self.threshold - temperature, 0.0);
        let cdd = libm::fmax(temperature - self.threshold, 0.0);
        self.beta_weekday[class.index()] + self.beta_heating * hdd + self.beta_cooling * cdd
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadRegressionParams {
    regions: Vec<RegionLoadRegression>,
}

impl LoadRegressionParams {
    pub fn new(regions: Vec<RegionLoadRegression>) -> Result<Self> {
        if regions.is_empty() {
            return Err(Error::invalid(
                "load_regression",
                "at least one region is required",
            ));
        }
        for r in &regions {
            RegionLoadRegression::new(r.beta_weekday, r.beta_heating, r.beta_cooling, r.threshold)?;
        }
        Ok(LoadRegressionParams { regions })
    }

    pub fn regions(&self) -> &[RegionLoadRegression] {
        &self.regions
    }

    pub fn dims(&self) -> usize {
        self.regions.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadRegressionFit {
    pub params: LoadRegressionParams,
    pub heating: Vec<DegreeDayStatus>,
    pub cooling: Vec<DegreeDayStatus>,
    /// Residual standard deviation per region, MW.
    pub residual_std: Vec<f64>,
}

/// OLS of load on weekday indicators plus heating and cooling degree days
/// (threshold 15.5 °C), region by region. Holidays regress as Sundays.
pub fn fit_load_regression(
    load: &Matrix,
    temps: &Matrix,
    calendar: &Calendar,
) -> Result<LoadRegressionFit> {
    if load.rows() != temps.rows() || load.cols() != temps.cols() || calendar.len() != load.rows() {
        return Err(Error::ShapeMismatch(format!(
            "load {}x{}, temperature {}x{}, calendar {}",
            load.rows(),
            load.cols(),
            temps.rows(),
            temps.cols(),
            calendar.len()
        )));
    }
    if load.rows() < DAYS_PER_YEAR {
        return Err(Error::InsufficientData {
            needed: DAYS_PER_YEAR,
            got: load.rows(),
        });
    }
    load.check_finite()?;
    temps.check_finite()?;

    let classes: Vec<Weekday> = calendar.days().iter().map(|d| d.load_class()).collect();
    for day in Weekday::ALL {
        if !classes.contains(&day) {
            return Err(Error::RankDeficient {
                region: 0,
                reason: format!("no observations for {}", day.name()),
            });
        }
    }

    let threshold = DEGREE_DAY_THRESHOLD_DEGC;
    let n = load.rows();
    let mut out = Vec::with_capacity(load.cols());
    let mut heating_status = Vec::with_capacity(load.cols());
    let mut cooling_status = Vec::with_capacity(load.cols());
    let mut residual_std = Vec::with_capacity(load.cols());
    for i in 0..load.cols() {
        let hdd: Vec<f64> = (0..n)
            .map(|t| libm::fmax(threshold - temps.get(t, i), 0.0))
            .collect();
        let cdd: Vec<f64> = (0..n)
            .map(|t| libm::fmax(temps.get(t, i) - threshold, 0.0))
            .collect();
        let use_hdd = hdd.iter().any(|&v| v > 0.0);
        let use_cdd = cdd.iter().any(|&v| v > 0.0);
        let cols = 7 + use_hdd as usize + use_cdd as usize;
        let mut design = Vec::with_capacity(n * cols);
        for t in 0..n {
            let mut row = [0.0; 9];
            row[classes[t].index()] = 1.0;
            let mut k = 7;
            if use_hdd {
                row[k] = hdd[t];
                k += 1;
            }
            if use_cdd {
                row[k] = cdd[t];
            }
            design.extend_from_slice(&row[..cols]);
        }
        let y = load.column(i);
        let fit = least_squares(&design, cols, &y).map_err(|e| Error::RankDeficient {
            region: i,
            reason: match e {
                LstsqError::Underdetermined => "fewer observations than coefficients".to_string(),
                LstsqError::RankDeficient(k) if k < 7 => format!(
                    "weekday column {} is degenerate",
                    Weekday::from_index(k).name()
                ),
                LstsqError::RankDeficient(_) => {
                    "degree-day columns are collinear with the weekday levels".to_string()
                }
            },
        })?;
        let dof = (n - cols).max(1) as f64;
        let s2 = fit.residual_sum_squares / dof;
        let significant = |k: usize| {
            let se = libm::sqrt(s2 * fit.unscaled_variances[k]);
            let b = fit.coefficients[k];
            if se > 0.0 {
                libm::fabs(b / se) >= 1.96
            } else {
                b != 0.0
            }
        };
        let mut beta_weekday = [0.0; 7];
        beta_weekday.copy_from_slice(&fit.coefficients[..7]);
        let mut k = 7;
        let (beta_heating, heating) = if use_hdd {
            let r = (
                fit.coefficients[k],
                DegreeDayStatus::Fitted {
                    significant: significant(k),
                },
            );
            k += 1;
            r
        } else {
            (0.0, DegreeDayStatus::NeverActive)
        };
        let (beta_cooling, cooling) = if use_cdd {
            (
                fit.coefficients[k],
                DegreeDayStatus::Fitted {
                    significant: significant(k),
                },
            )
        } else {
            (0.0, DegreeDayStatus::NeverActive)
        };
        out.push(RegionLoadRegression::new(
            beta_weekday,
            beta_heating,
            beta_cooling,
            threshold,
        )?);
        heating_status.push(heating);
        cooling_status.push(cooling);
        residual_std.push(libm::sqrt(fit.residual_sum_squares / n as f64));
    }
    Ok(LoadRegressionFit {
        params: LoadRegressionParams { regions: out },
        heating: heating_status,
        cooling: cooling_status,
        residual_std,
    })
}

/// Daily average load per region, already scaled to the covered share.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadSeries {
    pub values: Matrix,
    pub calendar: Calendar,
    pub coverage_share: f64,
    /// Number of (step, region) entries where the regression went negative
    /// and was floored at zero.
    pub floored: usize,
}

/// Apply the load regression to temperatures and scale by `coverage_share`.
pub fn synthesize_load(
    regression: &LoadRegressionParams,
    temps: &Matrix,
    calendar: &Calendar,
    coverage_share: f64,
) -> Result<LoadSeries> {
    if !(coverage_share > 0.0 && coverage_share <= 1.0) {
        return Err(Error::invalid(
            "coverage_share",
            format!("{coverage_share} is outside (0, 1]"),
        ));
    }
    if temps.cols() != regression.dims() || temps.rows() != calendar.len() {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} temperatures, {} regression regions, {}-day calendar",
            temps.rows(),
            temps.cols(),
            regression.dims(),
            calendar.len()
        )));
    }
    let mut values = Matrix::zeros(temps.rows(), temps.cols());
    let mut floored = 0;
    for t in 0..temps.rows() {
        let class = calendar.get(t).load_class();
        for (i, r) in regression.regions.iter().enumerate() {
            let raw = coverage_share * r.predict(temps.get(t, i), class);
            if raw < 0.0 {
                floored += 1;
            }
            values.set(t, i, libm::fmax(raw, 0.0));
        }
    }
    Ok(LoadSeries {
        values,
        calendar: calendar.clone(),
        coverage_share,
        floored,
    })
}

/// Temperature model, load regression and calendar settings that together
/// produce synthetic demand years.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandModel {
    pub temperature: TemperatureModelParams,
    pub load: LoadRegressionParams,
    pub coverage_share: f64,
    pub start_weekday: Weekday,
    /// Day-of-year numbers treated as holidays.
    pub holidays: Vec<u16>,
}

impl DemandModel {
    pub fn new(
        temperature: TemperatureModelParams,
        load: LoadRegressionParams,
        coverage_share: f64,
    ) -> Result<Self> {
        if temperature.dims() != load.dims() {
            return Err(Error::ShapeMismatch(format!(
                "temperature model has {} regions, load regression {}",
                temperature.dims(),
                load.dims()
            )));
        }
        if !(coverage_share > 0.0 && coverage_share <= 1.0) {
            return Err(Error::invalid(
                "coverage_share",
                format!("{coverage_share} is outside (0, 1]"),
            ));
        }
        Ok(DemandModel {
            temperature,
            load,
            coverage_share,
            start_weekday: Weekday::Monday,
            holidays: Vec::new(),
        })
    }

    pub fn calendar(&self, n_years: usize) -> Calendar {
        Calendar::years(n_years, self.start_weekday, &self.holidays)
    }

    /// Simulate `n_years` of temperatures and convert them to load.
    pub fn simulate<R: Rng + ?Sized>(&self, n_years: usize, rng: &mut R) -> LoadSeries {
        let temps = simulate_temperature(&self.temperature, n_years, rng);
        synthesize_load(
            &self.load,
            &temps,
            &self.calendar(n_years),
            self.coverage_share,
        )
        .expect("validated demand model produces consistent shapes")
    }
}
