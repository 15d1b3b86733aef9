//! Flat project configuration. Every physical quantity carries its unit in
//! the key name.
//!
//! ```toml
//! wind_params = "wind_params.json"      # optional, shipped defaults otherwise
//! demand_params = "demand_params.json"
//! master_seed = 42
//! coverage_share = 0.128
//! reference_nn_mw = 3257.0
//! reference_ns_mw = 1811.0
//! transmission_mw = 900.0
//! storage_nn_mwh = 15000.0
//! storage_ns_mwh = 30000.0
//! charge_nn_mw = 900.0
//! charge_ns_mw = 900.0
//! discharge_nn_mw = 900.0
//! discharge_ns_mw = 900.0
//! eta_charge = 0.75
//! eta_discharge = 0.90
//! step_hours = 1.0
//! grid_nn_min_mw = 3250.0
//! grid_nn_max_mw = 6000.0
//! grid_nn_points = 110
//! grid_ns_min_mw = 1800.0
//! grid_ns_max_mw = 10000.0
//! grid_ns_points = 163
//! n_realizations = 100
//! scenarios = ["no-flex", "trans", "stor", "full-flex"]
//! start_weekday = "monday"
//! holidays_doy = []
//! checkpoint_every_cells = 1000
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use windflex_core::calendar::Weekday;
use windflex_core::demand::DemandModel;
use windflex_core::dispatch::{CapacityPlan, FlexSpec, Scenario};
use windflex_core::sweep::{GridAxis, SweepConfig, SystemModel, REFERENCE_PLAN};
use windflex_core::weather::WindModelParams;

use crate::error::{display, IoError, Result};
use crate::params::{self, DemandParamsFile, WindParamsFile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectConfig {
    pub wind_params: Option<PathBuf>,
    pub demand_params: Option<PathBuf>,
    pub master_seed: u64,
    pub coverage_share: f64,
    pub reference_nn_mw: f64,
    pub reference_ns_mw: f64,
    pub transmission_mw: f64,
    pub storage_nn_mwh: f64,
    pub storage_ns_mwh: f64,
    pub charge_nn_mw: f64,
    pub charge_ns_mw: f64,
    pub discharge_nn_mw: f64,
    pub discharge_ns_mw: f64,
    pub eta_charge: f64,
    pub eta_discharge: f64,
    pub step_hours: f64,
    pub grid_nn_min_mw: f64,
    pub grid_nn_max_mw: f64,
    pub grid_nn_points: usize,
    pub grid_ns_min_mw: f64,
    pub grid_ns_max_mw: f64,
    pub grid_ns_points: usize,
    pub n_realizations: usize,
    pub scenarios: Vec<String>,
    pub start_weekday: String,
    pub holidays_doy: Vec<u16>,
    pub checkpoint_every_cells: usize,
    /// Directory relative paths resolve against; set when loading a file.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl Default for ProjectConfig {
    fn default() -> Self {
        let flex = FlexSpec::default();
        let sweep = SweepConfig::default();
        ProjectConfig {
            wind_params: None,
            demand_params: None,
            master_seed: sweep.master_seed,
            coverage_share: sweep.coverage_share,
            reference_nn_mw: REFERENCE_PLAN.wind_mw[0],
            reference_ns_mw: REFERENCE_PLAN.wind_mw[1],
            transmission_mw: flex.transmission_mw,
            storage_nn_mwh: flex.storage_mwh[0],
            storage_ns_mwh: flex.storage_mwh[1],
            charge_nn_mw: flex.charge_mw[0],
            charge_ns_mw: flex.charge_mw[1],
            discharge_nn_mw: flex.discharge_mw[0],
            discharge_ns_mw: flex.discharge_mw[1],
            eta_charge: flex.eta_charge,
            eta_discharge: flex.eta_discharge,
            step_hours: flex.step_hours,
            grid_nn_min_mw: sweep.grid_nn.min_mw,
            grid_nn_max_mw: sweep.grid_nn.max_mw,
            grid_nn_points: sweep.grid_nn.len(),
            grid_ns_min_mw: sweep.grid_ns.min_mw,
            grid_ns_max_mw: sweep.grid_ns.max_mw,
            grid_ns_points: sweep.grid_ns.len(),
            n_realizations: sweep.n_realizations,
            scenarios: Scenario::ALL
                .iter()
                .map(|s| s.label().to_string())
                .collect(),
            start_weekday: Weekday::Monday.name().to_string(),
            holidays_doy: Vec::new(),
            checkpoint_every_cells: 1000,
            base_dir: None,
        }
    }
}

impl ProjectConfig {
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let cfg: ProjectConfig = toml::from_str(text).map_err(|e| {
            let (row, column) = e.span().map(|s| line_col(text, s.start)).unwrap_or((0, 0));
            IoError::Parse {
                path: source.to_string(),
                row,
                column: column.to_string(),
                message: e.message().to_string(),
            }
        })?;
        cfg.validate(source)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
        let mut cfg = ProjectConfig::parse(&text, &display(path))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        for p in [&cfg.wind_params, &cfg.demand_params].into_iter().flatten() {
            let resolved = cfg.resolve(p);
            if !resolved.is_file() {
                return Err(IoError::invalid(
                    display(path),
                    format!("referenced file {} does not exist", resolved.display()),
                ));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn validate(&self, source: &str) -> Result<()> {
        let bad = |m: String| Err(IoError::invalid(source, m));
        self.flex()
            .validate()
            .map_err(|e| IoError::model(source, e))?;
        self.reference_plan()
            .map_err(|e| IoError::model(source, e))?;
        self.scenario_list(source)?;
        self.weekday(source)?;
        if let Some(d) = self.holidays_doy.iter().find(|d| !(1..=365).contains(*d)) {
            return bad(format!("holidays_doy entry {d} is outside 1..=365"));
        }
        if self.checkpoint_every_cells == 0 {
            return bad("checkpoint_every_cells must be positive".into());
        }
        self.sweep_config(source)?
            .validate()
            .map_err(|e| IoError::model(source, e))
    }

    pub fn flex(&self) -> FlexSpec {
        FlexSpec {
            transmission_mw: self.transmission_mw,
            storage_mwh: [self.storage_nn_mwh, self.storage_ns_mwh],
            charge_mw: [self.charge_nn_mw, self.charge_ns_mw],
            discharge_mw: [self.discharge_nn_mw, self.discharge_ns_mw],
            eta_charge: self.eta_charge,
            eta_discharge: self.eta_discharge,
            step_hours: self.step_hours,
        }
    }

    pub fn reference_plan(&self) -> windflex_core::Result<CapacityPlan> {
        CapacityPlan::new(self.reference_nn_mw, self.reference_ns_mw)
    }

    pub fn scenario_list(&self, source: &str) -> Result<Vec<Scenario>> {
        let mut out: Vec<Scenario> = Vec::new();
        for s in &self.scenarios {
            let sc: Scenario = s
                .parse()
                .map_err(|e| IoError::model(format!("{source}: scenarios"), e))?;
            if out.contains(&sc) {
                return Err(IoError::invalid(
                    source,
                    format!("scenario `{s}` listed twice"),
                ));
            }
            out.push(sc);
        }
        if out.is_empty() {
            return Err(IoError::invalid(source, "scenarios must not be empty"));
        }
        Ok(out)
    }

    pub fn weekday(&self, source: &str) -> Result<Weekday> {
        Weekday::parse(&self.start_weekday).ok_or_else(|| {
            IoError::invalid(
                source,
                format!("start_weekday `{}` is not a weekday", self.start_weekday),
            )
        })
    }

    pub fn sweep_config(&self, source: &str) -> Result<SweepConfig> {
        let axis = |min: f64, max: f64, n: usize| {
            if n == 1 {
                let a = GridAxis::single(min);
                a.validate().map(|_| a)
            } else {
                GridAxis::with_points(min, max, n)
            }
            .map_err(|e| IoError::model(source, e))
        };
        Ok(SweepConfig {
            grid_nn: axis(
                self.grid_nn_min_mw,
                self.grid_nn_max_mw,
                self.grid_nn_points,
            )?,
            grid_ns: axis(
                self.grid_ns_min_mw,
                self.grid_ns_max_mw,
                self.grid_ns_points,
            )?,
            n_realizations: self.n_realizations,
            scenarios: self.scenario_list(source)?,
            base_flex: self.flex(),
            coverage_share: self.coverage_share,
            master_seed: self.master_seed,
            reference_plan: self
                .reference_plan()
                .map_err(|e| IoError::model(source, e))?,
        })
    }

    pub fn wind_file(&self) -> Result<WindParamsFile> {
        match &self.wind_params {
            Some(p) => params::load_wind(&self.resolve(p)),
            None => Ok(params::default_wind()),
        }
    }

    pub fn demand_file(&self) -> Result<DemandParamsFile> {
        match &self.demand_params {
            Some(p) => params::load_demand(&self.resolve(p)),
            None => Ok(params::default_demand()),
        }
    }

    pub fn wind_model(&self) -> Result<WindModelParams> {
        self.wind_file()?.to_model("wind parameters")
    }

    pub fn demand_model(&self) -> Result<DemandModel> {
        let file = self.demand_file()?;
        let mut model = DemandModel::new(
            file.temperature_model("demand parameters")?,
            file.load_model("demand parameters")?,
            self.coverage_share,
        )
        .map_err(|e| IoError::model("demand parameters", e))?;
        model.start_weekday = self.weekday("config")?;
        model.holidays = self.holidays_doy.clone();
        Ok(model)
    }

    pub fn system_model(&self) -> Result<SystemModel> {
        SystemModel::new(self.wind_model()?, self.demand_model()?)
            .map_err(|e| IoError::model("parameters", e))
    }
}

/// 1-based line and column of byte offset `pos`.
fn line_col(text: &str, pos: usize) -> (u64, u64) {
    let before = &text[..pos.min(text.len())];
    let line = before.matches('\n').count() as u64 + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) as u64 + 1;
    (line, col)
}
