//! Model fitting on ingested series.

use windflex_core::demand::{
    fit_load_regression, fit_temperature_model, LoadRegressionFit, TemperatureFit,
};
use windflex_core::weather::{fit_seasonality, fit_wind_model, OuFit, WindModelParams};
use windflex_core::Error;

use crate::error::{IoError, Result};
use crate::ingest::{SeriesKind, TimeSeries};

fn expect_kind(series: &TimeSeries, kind: SeriesKind) -> Result<()> {
    if series.kind != kind {
        return Err(IoError::invalid(
            series.kind.label(),
            format!("expected a {} series", kind.label()),
        ));
    }
    Ok(())
}

/// Capacity-factor fit. `ou` is absent when the exact moment system had no
/// nonnegative solution and the least-squares fallback was used; its
/// residual is then in `fallback_residual`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindFitOutcome {
    pub params: WindModelParams,
    pub ou: Option<OuFit>,
    pub fallback_residual: Option<f64>,
}

pub fn fit_wind(series: &TimeSeries) -> Result<WindFitOutcome> {
    expect_kind(series, SeriesKind::CapacityFactor)?;
    let cf = series.to_capacity_factors()?;
    let err = |e| IoError::model("wind fit", e);
    match fit_wind_model(&cf) {
        Ok(fit) => Ok(WindFitOutcome {
            params: fit.params,
            ou: Some(fit.ou),
            fallback_residual: None,
        }),
        Err(Error::MomentMatchFailure { fallback, residual }) => {
            let seasonality = (0..cf.values().cols())
                .map(|i| {
                    let z: Vec<f64> = cf
                        .values()
                        .column(i)
                        .iter()
                        .map(|&c| -(-c).ln_1p())
                        .collect();
                    fit_seasonality(&z, cf.day_of_year())
                })
                .collect::<windflex_core::Result<Vec<_>>>()
                .map_err(err)?;
            let params = WindModelParams::new(seasonality, *fallback).map_err(err)?;
            Ok(WindFitOutcome {
                params,
                ou: None,
                fallback_residual: Some(residual),
            })
        }
        Err(e) => Err(err(e)),
    }
}

pub fn fit_temperature(series: &TimeSeries) -> Result<TemperatureFit> {
    expect_kind(series, SeriesKind::Temperature)?;
    fit_temperature_model(&series.values, &series.day_of_year())
        .map_err(|e| IoError::model("temperature fit", e))
}

/// Regress load on the temperatures of the same dates. Holidays are
/// day-of-year numbers treated as Sundays.
pub fn fit_load(
    load: &TimeSeries,
    temperature: &TimeSeries,
    holidays: &[u16],
) -> Result<LoadRegressionFit> {
    expect_kind(load, SeriesKind::Load)?;
    expect_kind(temperature, SeriesKind::Temperature)?;
    let (first, last) = (load.dates[0], *load.dates.last().expect("nonempty series"));
    let temps = temperature.between(first, last);
    if temps.dates != load.dates {
        return Err(IoError::invalid(
            "temperature",
            format!("does not cover the load period {first}..{last}"),
        ));
    }
    if temps.values.cols() != load.values.cols() {
        return Err(IoError::invalid(
            "temperature",
            "region count differs from the load series",
        ));
    }
    fit_load_regression(&load.values, &temps.values, &load.calendar(holidays))
        .map_err(|e| IoError::model("load fit", e))
}
