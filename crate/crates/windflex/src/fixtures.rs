//! Deterministic synthetic input data. These files stand in for reanalysis
//! capacity factors, station temperatures and metered load; they are drawn
//! from the ground-truth models below and are labelled synthetic in every
//! file name.
//!
//! | series      | dates                  | regions    |
//! |-------------|------------------------|------------|
//! | cf          | 1980-01-01..2020-12-31 | NO-N, NO-S |
//! | temperature | 1991-01-01..2020-12-31 | NO-N, NO-S |
//! | load        | 2014-01-01..2018-12-31 | NO-N, NO-S |
//!
//! Load is the noiseless regression on the temperature fixture plus
//! Gaussian noise of 100 MW (north) and 200 MW (south).

use std::f64::consts::PI;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rand_distr::{Distribution, Normal};
use windflex_core::calendar::DAYS_PER_YEAR;
use windflex_core::demand::{
    simulate_temperature, synthesize_load, LoadRegressionParams, RegionLoadRegression,
    RegionTemperatureModel, TemperatureModelParams, DEGREE_DAY_THRESHOLD_DEGC,
};
use windflex_core::rng::{Purpose, RealizationSeed};
use windflex_core::sweep::WIND_BURN_IN;
use windflex_core::weather::{OuParams, SeasonalityParams, WindModelParams};

use crate::error::{IoError, Result};
use crate::ingest::{date_range, write_timeseries, SeriesKind, TimeSeries};

pub const DEFAULT_FIXTURE_SEED: u64 = 20_240_101;
pub const CF_FILE: &str = "synthetic_cf.csv";
pub const TEMPERATURE_FILE: &str = "synthetic_temperature.csv";
pub const LOAD_FILE: &str = "synthetic_load.csv";

pub fn regions() -> Vec<String> {
    vec!["NO-N".to_string(), "NO-S".to_string()]
}

fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid date")
}

/// Ground-truth capacity-factor model. Northern output drops more from
/// winter to summer than southern output. The latent process has
/// stationary mean one, the normalisation the fit uses, so seasonality
/// and `Σ` are recoverable one by one.
pub fn wind_truth() -> WindModelParams {
    let ou = OuParams::new(
        vec![0.45, 0.50],
        vec![0.3268, 0.0, 0.1601, 0.8359],
        vec![1.1087, 0.2584],
        vec![1.0, 1.0],
    )
    .expect("valid ground truth");
    WindModelParams::new(
        vec![
            SeasonalityParams::new(0.3405, 0.0391, 0.1482),
            SeasonalityParams::new(0.2187, 0.0151, 0.0573),
        ],
        ou,
    )
    .expect("valid ground truth")
}

/// Annual cycle with its minimum around January 20.
fn cold_winter(mean: f64, amplitude: f64) -> SeasonalityParams {
    let w = 2.0 * PI * 20.0 / DAYS_PER_YEAR as f64;
    SeasonalityParams::new(mean, -amplitude * w.sin(), -amplitude * w.cos())
}

pub fn temperature_truth() -> TemperatureModelParams {
    TemperatureModelParams::new(vec![
        RegionTemperatureModel::new(cold_winter(2.5, 8.5), [0.85, -0.12, 0.07], 2.3)
            .expect("valid ground truth"),
        RegionTemperatureModel::new(cold_winter(5.0, 9.0), [0.80, -0.10, 0.05], 2.0)
            .expect("valid ground truth"),
    ])
    .expect("valid ground truth")
}

/// Full regional load in MW; weekends and holidays run lower.
pub fn load_truth() -> LoadRegressionParams {
    let t = DEGREE_DAY_THRESHOLD_DEGC;
    LoadRegressionParams::new(vec![
        RegionLoadRegression::new(
            [3300.0, 3300.0, 3300.0, 3300.0, 3300.0, 3150.0, 3050.0],
            134.0,
            0.0,
            t,
        )
        .expect("valid ground truth"),
        RegionLoadRegression::new(
            [6600.0, 6600.0, 6600.0, 6600.0, 6600.0, 6300.0, 6100.0],
            334.0,
            60.0,
            t,
        )
        .expect("valid ground truth"),
    ])
    .expect("valid ground truth")
}

pub const LOAD_NOISE_MW: [f64; 2] = [100.0, 200.0];

#[derive(Debug, Clone, PartialEq)]
pub struct Fixtures {
    pub capacity_factors: TimeSeries,
    pub temperature: TimeSeries,
    pub load: TimeSeries,
}

/// Draw all three fixture series from `seed`.
pub fn fixture_series(seed: u64) -> Fixtures {
    let stream = |k: u64| RealizationSeed::new(seed, k).stream(Purpose::Fixture);

    let cf_years = 41;
    let cf = wind_truth().simulate(cf_years * DAYS_PER_YEAR, 1, WIND_BURN_IN, &mut stream(0));
    let capacity_factors = TimeSeries::new(
        SeriesKind::CapacityFactor,
        regions(),
        date_range(ymd(1980, 1, 1), cf.len()),
        cf.into_values(),
    )
    .expect("consistent shapes");

    let temps = simulate_temperature(&temperature_truth(), 30, &mut stream(1));
    let temperature = TimeSeries::new(
        SeriesKind::Temperature,
        regions(),
        date_range(ymd(1991, 1, 1), temps.rows()),
        temps,
    )
    .expect("consistent shapes");

    let window = temperature.between(ymd(2014, 1, 1), ymd(2018, 12, 31));
    let clean = synthesize_load(&load_truth(), &window.values, &window.calendar(&[]), 1.0)
        .expect("consistent shapes");
    let mut values = clean.values;
    let mut rng = stream(2);
    let noise = LOAD_NOISE_MW.map(|sd| Normal::new(0.0, sd).expect("positive sd"));
    for t in 0..values.rows() {
        for (i, n) in noise.iter().enumerate() {
            values.set(t, i, (values.get(t, i) + n.sample(&mut rng)).max(0.0));
        }
    }
    let load = TimeSeries::new(SeriesKind::Load, regions(), window.dates, values)
        .expect("consistent shapes");

    Fixtures {
        capacity_factors,
        temperature,
        load,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixturePaths {
    pub capacity_factors: PathBuf,
    pub temperature: PathBuf,
    pub load: PathBuf,
}

/// Write the fixture CSVs into `dir`, creating it if needed.
pub fn generate_fixtures(seed: u64, dir: &Path) -> Result<FixturePaths> {
    std::fs::create_dir_all(dir).map_err(|e| IoError::io(dir, e))?;
    let f = fixture_series(seed);
    let paths = FixturePaths {
        capacity_factors: dir.join(CF_FILE),
        temperature: dir.join(TEMPERATURE_FILE),
        load: dir.join(LOAD_FILE),
    };
    for (path, series) in [
        (&paths.capacity_factors, &f.capacity_factors),
        (&paths.temperature, &f.temperature),
        (&paths.load, &f.load),
    ] {
        let file = File::create(path).map_err(|e| IoError::io(path, e))?;
        write_timeseries(BufWriter::new(file), series)
            .map_err(|e| IoError::io(path, std::io::Error::other(e.to_string())))?;
    }
    Ok(paths)
}
