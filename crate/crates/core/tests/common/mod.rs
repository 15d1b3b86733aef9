#![allow(dead_code)]

use core::f64::consts::PI;

use windflex_core::demand::{
    DemandModel, LoadRegressionParams, RegionLoadRegression, RegionTemperatureModel,
    TemperatureModelParams,
};
use windflex_core::sweep::SystemModel;
use windflex_core::weather::{OuParams, SeasonalityParams, WindModelParams};

pub fn wind_model() -> WindModelParams {
    let ou = OuParams::new(
        vec![0.45, 0.50],
        vec![0.3268, 0.0, 0.1601, 0.8359],
        vec![1.1087, 0.2584],
        vec![1.0, 1.0],
    )
    .unwrap();
    WindModelParams::new(
        vec![
            SeasonalityParams::new(0.3405, 0.0391, 0.1482),
            SeasonalityParams::new(0.2187, 0.0151, 0.0573),
        ],
        ou,
    )
    .unwrap()
}

fn seasonal(mean: f64, amplitude: f64) -> SeasonalityParams {
    let w = 2.0 * PI * 20.0 / 365.0;
    SeasonalityParams::new(mean, -amplitude * w.sin(), -amplitude * w.cos())
}

pub fn demand_model() -> DemandModel {
    let temperature = TemperatureModelParams::new(vec![
        RegionTemperatureModel::new(seasonal(2.5, 8.5), [0.85, -0.12, 0.07], 2.3).unwrap(),
        RegionTemperatureModel::new(seasonal(5.0, 9.0), [0.80, -0.10, 0.05], 2.0).unwrap(),
    ])
    .unwrap();
    let load = LoadRegressionParams::new(vec![
        RegionLoadRegression::new(
            [3300.0, 3300.0, 3300.0, 3300.0, 3300.0, 3150.0, 3050.0],
            134.0,
            0.0,
            15.5,
        )
        .unwrap(),
        RegionLoadRegression::new(
            [6600.0, 6600.0, 6600.0, 6600.0, 6600.0, 6300.0, 6100.0],
            334.0,
            60.0,
            15.5,
        )
        .unwrap(),
    ])
    .unwrap();
    DemandModel::new(temperature, load, 0.128).unwrap()
}

pub fn system() -> SystemModel {
    SystemModel::new(wind_model(), demand_model()).unwrap()
}
