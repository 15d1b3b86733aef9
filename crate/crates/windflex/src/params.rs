//! JSON parameter files for the wind and demand models.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use windflex_core::demand::{
    LoadRegressionParams, RegionLoadRegression, RegionTemperatureModel, TemperatureModelParams,
    AR_ORDER, DEGREE_DAY_THRESHOLD_DEGC,
};
use windflex_core::weather::{OuParams, SeasonalityParams, WindModelParams};

use crate::error::{display, IoError, Result};

/// Wind parameters fitted to the bundled synthetic fixtures.
pub const DEFAULT_WIND_JSON: &str = include_str!("../data/wind_params.json");
/// Demand parameters fitted to the bundled synthetic fixtures.
pub const DEFAULT_DEMAND_JSON: &str = include_str!("../data/demand_params.json");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicJson {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl From<SeasonalityParams> for HarmonicJson {
    fn from(s: SeasonalityParams) -> Self {
        HarmonicJson {
            a: s.a,
            b: s.b,
            c: s.c,
        }
    }
}

impl From<HarmonicJson> for SeasonalityParams {
    fn from(h: HarmonicJson) -> Self {
        SeasonalityParams::new(h.a, h.b, h.c)
    }
}

/// Capacity-factor model. `sigma` is row-major `d × d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindParamsFile {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub regions: Vec<String>,
    pub seasonality: Vec<HarmonicJson>,
    pub lambda: Vec<f64>,
    pub sigma: Vec<f64>,
    pub jump_intensity: Vec<f64>,
    pub jump_mean: Vec<f64>,
}

impl WindParamsFile {
    pub fn from_model(model: &WindModelParams, regions: &[String]) -> Self {
        let ou = model.ou();
        WindParamsFile {
            regions: regions.to_vec(),
            seasonality: model.seasonality().iter().map(|&s| s.into()).collect(),
            lambda: ou.lambda().to_vec(),
            sigma: ou.sigma().to_vec(),
            jump_intensity: ou.jump_intensity().to_vec(),
            jump_mean: ou.jump_mean().to_vec(),
        }
    }

    pub fn to_model(&self, source: &str) -> Result<WindModelParams> {
        let ou = OuParams::new(
            self.lambda.clone(),
            self.sigma.clone(),
            self.jump_intensity.clone(),
            self.jump_mean.clone(),
        )
        .map_err(|e| IoError::model(source, e))?;
        WindModelParams::new(self.seasonality.iter().map(|&h| h.into()).collect(), ou)
            .map_err(|e| IoError::model(source, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemperatureRegionJson {
    /// Seasonal mean, degC.
    pub seasonal: HarmonicJson,
    pub ar_coeffs: [f64; AR_ORDER],
    pub innovation_std_degc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadRegionJson {
    /// Base load Monday..Sunday, MW.
    pub beta_weekday_mw: [f64; 7],
    pub beta_heating_mw_per_degc: f64,
    pub beta_cooling_mw_per_degc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadRegressionJson {
    #[serde(default = "default_threshold")]
    pub threshold_degc: f64,
    pub regions: Vec<LoadRegionJson>,
}

fn default_threshold() -> f64 {
    DEGREE_DAY_THRESHOLD_DEGC
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandParamsFile {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub regions: Vec<String>,
    pub temperature: Vec<TemperatureRegionJson>,
    pub load_regression: LoadRegressionJson,
}

impl DemandParamsFile {
    pub fn from_models(
        temperature: &TemperatureModelParams,
        load: &LoadRegressionParams,
        regions: &[String],
    ) -> Self {
        let threshold = load
            .regions()
            .first()
            .map_or(DEGREE_DAY_THRESHOLD_DEGC, |r| r.threshold);
        DemandParamsFile {
            regions: regions.to_vec(),
            temperature: temperature
                .regions()
                .iter()
                .map(|r| TemperatureRegionJson {
                    seasonal: r.seasonal.into(),
                    ar_coeffs: r.ar,
                    innovation_std_degc: r.innovation_std,
                })
                .collect(),
            load_regression: LoadRegressionJson {
                threshold_degc: threshold,
                regions: load
                    .regions()
                    .iter()
                    .map(|r| LoadRegionJson {
                        beta_weekday_mw: r.beta_weekday,
                        beta_heating_mw_per_degc: r.beta_heating,
                        beta_cooling_mw_per_degc: r.beta_cooling,
                    })
                    .collect(),
            },
        }
    }

    pub fn temperature_model(&self, source: &str) -> Result<TemperatureModelParams> {
        let regions = self
            .temperature
            .iter()
            .map(|r| {
                RegionTemperatureModel::new(r.seasonal.into(), r.ar_coeffs, r.innovation_std_degc)
            })
            .collect::<windflex_core::Result<Vec<_>>>()
            .map_err(|e| IoError::model(format!("{source}: temperature"), e))?;
        TemperatureModelParams::new(regions)
            .map_err(|e| IoError::model(format!("{source}: temperature"), e))
    }

    pub fn load_model(&self, source: &str) -> Result<LoadRegressionParams> {
        let t = self.load_regression.threshold_degc;
        let regions = self
            .load_regression
            .regions
            .iter()
            .map(|r| {
                RegionLoadRegression::new(
                    r.beta_weekday_mw,
                    r.beta_heating_mw_per_degc,
                    r.beta_cooling_mw_per_degc,
                    t,
                )
            })
            .collect::<windflex_core::Result<Vec<_>>>()
            .map_err(|e| IoError::model(format!("{source}: load_regression"), e))?;
        LoadRegressionParams::new(regions)
            .map_err(|e| IoError::model(format!("{source}: load_regression"), e))
    }
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, source: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| IoError::Parse {
        path: source.to_string(),
        row: e.line() as u64,
        column: e.column().to_string(),
        message: e.to_string(),
    })
}

pub fn parse_wind(text: &str, source: &str) -> Result<WindParamsFile> {
    let file: WindParamsFile = parse_json(text, source)?;
    file.to_model(source)?;
    Ok(file)
}

pub fn parse_demand(text: &str, source: &str) -> Result<DemandParamsFile> {
    let file: DemandParamsFile = parse_json(text, source)?;
    file.temperature_model(source)?;
    file.load_model(source)?;
    Ok(file)
}

pub fn load_wind(path: &Path) -> Result<WindParamsFile> {
    let text = fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    parse_wind(&text, &display(path))
}

pub fn load_demand(path: &Path) -> Result<DemandParamsFile> {
    let text = fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    parse_demand(&text, &display(path))
}

pub fn default_wind() -> WindParamsFile {
    parse_wind(DEFAULT_WIND_JSON, "shipped wind parameters")
        .expect("shipped wind parameters are valid")
}

pub fn default_demand() -> DemandParamsFile {
    parse_demand(DEFAULT_DEMAND_JSON, "shipped demand parameters")
        .expect("shipped demand parameters are valid")
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("parameter structs serialise");
    s.push('\n');
    s
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json(value)).map_err(|e| IoError::io(path, e))
}
