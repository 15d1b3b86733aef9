//! Monte Carlo loss surfaces over a grid of capacity plans.
//!
//! Realization `r` draws its weather and demand year from streams keyed only
//! by `(master_seed, r)`, and every grid cell and scenario reuses the same
//! draws. Each cell reduces its realizations in index order, so the result
//! does not depend on how cells are scheduled across workers.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::calendar::DAYS_PER_YEAR;
use crate::demand::DemandModel;
use crate::dispatch::{
    aggregate_penalty, dispatch, CapacityPlan, Dispatcher, FlexSpec, Penalty, Scenario, NODES,
};
use crate::matrix::Matrix;
use crate::rng::{Purpose, RealizationSeed};
use crate::stats::{self, CompensatedSum};
use crate::weather::WindModelParams;
use crate::{Error, Result};

/// Latent-state steps simulated and discarded before each weather year.
pub const WIND_BURN_IN: usize = DAYS_PER_YEAR;

/// Installed capacities the reference improvements are measured against, MW.
pub const REFERENCE_PLAN: CapacityPlan = CapacityPlan {
    wind_mw: [3257.0, 1811.0],
};

/// Evenly spaced capacity values `min, min + step, …` not exceeding `max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridAxis {
    pub min_mw: f64,
    pub max_mw: f64,
    pub step_mw: f64,
}

impl GridAxis {
    pub fn new(min_mw: f64, max_mw: f64, step_mw: f64) -> Result<Self> {
        let axis = GridAxis {
            min_mw,
            max_mw,
            step_mw,
        };
        axis.validate()?;
        Ok(axis)
    }

    /// Axis with `count` points spanning `[min, max]`.
    pub fn with_points(min_mw: f64, max_mw: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::invalid(
                "grid",
                "an axis spanning a range needs at least two points",
            ));
        }
        GridAxis::new(min_mw, max_mw, (max_mw - min_mw) / (count - 1) as f64)
    }

    /// A single capacity value.
    pub fn single(mw: f64) -> Self {
        GridAxis {
            min_mw: mw,
            max_mw: mw,
            step_mw: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.min_mw.is_finite() && self.max_mw.is_finite() && self.step_mw.is_finite();
        if !finite || self.min_mw < 0.0 || self.min_mw > self.max_mw || self.step_mw <= 0.0 {
            return Err(Error::invalid(
                "grid",
                format!(
                    "need 0 <= min <= max and step > 0, got {}..{} step {}",
                    self.min_mw, self.max_mw, self.step_mw
                ),
            ));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        libm::floor((self.max_mw - self.min_mw) / self.step_mw + 1e-9) as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len())
            .map(|k| self.min_mw + k as f64 * self.step_mw)
            .collect()
    }

    /// Every `k`-th point, starting at the minimum.
    pub fn every(&self, k: usize) -> GridAxis {
        let k = k.max(1);
        let step = self.step_mw * k as f64;
        let last = self.min_mw + ((self.len() - 1) / k) as f64 * step;
        GridAxis {
            min_mw: self.min_mw,
            max_mw: last,
            step_mw: step,
        }
    }
}

/// Wind and demand models that together generate one system year.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    pub wind: WindModelParams,
    pub demand: DemandModel,
}

impl SystemModel {
    pub fn new(wind: WindModelParams, demand: DemandModel) -> Result<Self> {
        if wind.dims() != NODES || demand.temperature.dims() != NODES {
            return Err(Error::ShapeMismatch(format!(
                "wind model has {} regions, demand model {}; both must be {NODES}",
                wind.dims(),
                demand.temperature.dims()
            )));
        }
        Ok(SystemModel { wind, demand })
    }
}

/// One weather and demand year: capacity factors and load, both `365 × 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub capacity_factors: Matrix,
    pub demand_mw: Matrix,
}

impl Realization {
    pub fn draw(model: &SystemModel, seed: RealizationSeed) -> Realization {
        let cf = model.wind.simulate(
            DAYS_PER_YEAR,
            1,
            WIND_BURN_IN,
            &mut seed.stream(Purpose::Wind),
        );
        let load = model
            .demand
            .simulate(1, &mut seed.stream(Purpose::Temperature));
        Realization {
            capacity_factors: cf.into_values(),
            demand_mw: load.values,
        }
    }

    /// `P(t) = x ∘ C(t)`.
    pub fn production(&self, plan: &CapacityPlan) -> Matrix {
        let mut p = self.capacity_factors.clone();
        for t in 0..p.rows() {
            let row = p.row_mut(t);
            for i in 0..NODES {
                row[i] *= plan.wind_mw[i];
            }
        }
        p
    }

    /// Demand with per-node multipliers applied.
    pub fn scaled_demand(&self, scale: [f64; NODES]) -> Matrix {
        let mut d = self.demand_mw.clone();
        for t in 0..d.rows() {
            let row = d.row_mut(t);
            for i in 0..NODES {
                row[i] *= scale[i];
            }
        }
        d
    }

    /// Annual penalty without materialising the trace.
    pub fn penalty(
        &self,
        plan: &CapacityPlan,
        scenario: Scenario,
        flex: &FlexSpec,
        scale: [f64; NODES],
    ) -> Result<Penalty> {
        let mut dispatcher = Dispatcher::new(scenario, *flex)?;
        let mut sums = [CompensatedSum::new(); NODES];
        for t in 0..self.capacity_factors.rows() {
            let c = self.capacity_factors.row(t);
            let d = self.demand_mw.row(t);
            let step = dispatcher.step(
                [c[0] * plan.wind_mw[0], c[1] * plan.wind_mw[1]],
                [d[0] * scale[0], d[1] * scale[1]],
            );
            for i in 0..NODES {
                sums[i].add(step[i].loss);
            }
        }
        Ok(Penalty::from_sums(&sums))
    }
}

/// Per-node averages of a dispatched year, MW except storage (MWh).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TraceSummary {
    pub mean_production: [f64; NODES],
    pub mean_demand: [f64; NODES],
    pub mean_import: [f64; NODES],
    pub mean_export: [f64; NODES],
    pub mean_charge: [f64; NODES],
    pub mean_discharge: [f64; NODES],
    pub final_storage: [f64; NODES],
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealizationOutcome {
    pub penalty: Penalty,
    pub summary: TraceSummary,
}

/// Simulate, dispatch and score a single year.
pub fn run_realization(
    plan: &CapacityPlan,
    scenario: Scenario,
    flex: &FlexSpec,
    model: &SystemModel,
    seed: RealizationSeed,
) -> Result<RealizationOutcome> {
    let year = Realization::draw(model, seed);
    let trace = dispatch(scenario, &year.production(plan), &year.demand_mw, flex)?;
    let penalty = aggregate_penalty(&trace)?;
    let n = trace.len() as f64;
    let mut s = TraceSummary::default();
    for step in &trace.steps {
        for i in 0..NODES {
            let node = &step[i];
            s.mean_production[i] += node.production / n;
            s.mean_demand[i] += node.demand / n;
            s.mean_import[i] += node.import / n;
            s.mean_export[i] += node.export / n;
            s.mean_charge[i] += node.charge / n;
            s.mean_discharge[i] += node.discharge / n;
        }
    }
    if let Some(last) = trace.steps.last() {
        s.final_storage = [last[0].storage_level, last[1].storage_level];
    }
    Ok(RealizationOutcome {
        penalty,
        summary: s,
    })
}

/// Runs independent indexed jobs; implementations may parallelise but must
/// return results in index order.
pub trait Executor {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs jobs one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub grid_nn: GridAxis,
    pub grid_ns: GridAxis,
    pub n_realizations: usize,
    pub scenarios: Vec<Scenario>,
    pub base_flex: FlexSpec,
    pub coverage_share: f64,
    pub master_seed: u64,
    pub reference_plan: CapacityPlan,
}

impl Default for SweepConfig {
    /// 110 × 163 grid over 3.25–6 GW and 1.8–10 GW, 100 realizations, all
    /// scenarios.
    fn default() -> Self {
        SweepConfig {
            grid_nn: GridAxis {
                min_mw: 3250.0,
                max_mw: 6000.0,
                step_mw: (6000.0 - 3250.0) / 109.0,
            },
            grid_ns: GridAxis {
                min_mw: 1800.0,
                max_mw: 10_000.0,
                step_mw: (10_000.0 - 1800.0) / 162.0,
            },
            n_realizations: 100,
            scenarios: Scenario::ALL.to_vec(),
            base_flex: FlexSpec::default(),
            coverage_share: 0.128,
            master_seed: 42,
            reference_plan: REFERENCE_PLAN,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid_nn.validate()?;
        self.grid_ns.validate()?;
        self.base_flex.validate()?;
        if self.n_realizations == 0 {
            return Err(Error::invalid("n_realizations", "must be at least 1"));
        }
        if self.scenarios.is_empty() {
            return Err(Error::invalid(
                "scenarios",
                "at least one scenario is required",
            ));
        }
        if !(self.coverage_share > 0.0 && self.coverage_share <= 1.0) {
            return Err(Error::invalid(
                "coverage_share",
                format!("{} is outside (0, 1]", self.coverage_share),
            ));
        }
        Ok(())
    }

    /// Every `k`-th grid point on both axes.
    pub fn coarsened(&self, k: usize) -> SweepConfig {
        SweepConfig {
            grid_nn: self.grid_nn.every(k),
            grid_ns: self.grid_ns.every(k),
            ..self.clone()
        }
    }

    pub fn cell_count(&self) -> usize {
        self.grid_nn.len() * self.grid_ns.len()
    }
}

/// Ensemble statistics of one grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CellStats {
    /// Mean annual total penalty, MW².
    pub expected: f64,
    pub per_node: [f64; NODES],
    /// Standard error of `expected`.
    pub stderr: f64,
}

impl CellStats {
    fn from_penalties(penalties: &[Penalty]) -> CellStats {
        let n = penalties.len() as f64;
        let mut total = CompensatedSum::new();
        let mut nodes = [CompensatedSum::new(); NODES];
        for p in penalties {
            total.add(p.total);
            for i in 0..NODES {
                nodes[i].add(p.per_node[i]);
            }
        }
        let expected = total.value() / n;
        let stderr = if penalties.len() > 1 {
            let mut ss = CompensatedSum::new();
            for p in penalties {
                let e = p.total - expected;
                ss.add(e * e);
            }
            libm::sqrt(ss.value() / (n - 1.0) / n)
        } else {
            0.0
        };
        CellStats {
            expected,
            per_node: [nodes[0].value() / n, nodes[1].value() / n],
            stderr,
        }
    }
}

/// Expected penalties of one scenario over the grid; `cells` is indexed
/// `i_nn * ns_mw.len() + i_ns`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSurface {
    pub scenario: Scenario,
    pub nn_mw: Vec<f64>,
    pub ns_mw: Vec<f64>,
    pub cells: Vec<CellStats>,
}

impl ScenarioSurface {
    pub fn plan(&self, cell: usize) -> CapacityPlan {
        let ns = self.ns_mw.len();
        CapacityPlan {
            wind_mw: [self.nn_mw[cell / ns], self.ns_mw[cell % ns]],
        }
    }

    pub fn at(&self, i_nn: usize, i_ns: usize) -> &CellStats {
        &self.cells[i_nn * self.ns_mw.len() + i_ns]
    }

    fn same_grid(&self, other: &ScenarioSurface) -> bool {
        self.nn_mw == other.nn_mw
            && self.ns_mw == other.ns_mw
            && self.cells.len() == other.cells.len()
    }

    /// Grid cell closest to `plan` (first one on exact ties).
    pub fn nearest_cell(&self, plan: &CapacityPlan) -> Option<usize> {
        let nearest = |axis: &[f64], v: f64| {
            let mut best = 0;
            for (k, x) in axis.iter().enumerate() {
                if libm::fabs(x - v) < libm::fabs(axis[best] - v) {
                    best = k;
                }
            }
            best
        };
        if self.nn_mw.is_empty() || self.ns_mw.is_empty() {
            return None;
        }
        Some(
            nearest(&self.nn_mw, plan.wind_mw[0]) * self.ns_mw.len()
                + nearest(&self.ns_mw, plan.wind_mw[1]),
        )
    }
}

/// Loss surfaces of all swept scenarios on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LossSurface {
    pub surfaces: Vec<ScenarioSurface>,
}

impl LossSurface {
    pub fn get(&self, scenario: Scenario) -> Option<&ScenarioSurface> {
        self.surfaces.iter().find(|s| s.scenario == scenario)
    }
}

/// Drawn realizations plus everything needed to evaluate grid cells.
#[derive(Debug, Clone)]
pub struct PreparedSweep {
    pub config: SweepConfig,
    pub realizations: Vec<Realization>,
    nn: Vec<f64>,
    ns: Vec<f64>,
    demand_scale: [f64; NODES],
}

impl PreparedSweep {
    pub fn new<E: Executor>(
        config: &SweepConfig,
        model: &SystemModel,
        executor: &E,
    ) -> Result<Self> {
        config.validate()?;
        let mut model = model.clone();
        model.demand.coverage_share = config.coverage_share;
        let master = config.master_seed;
        let realizations = executor.map_indexed(config.n_realizations, |r| {
            Realization::draw(&model, RealizationSeed::new(master, r as u64))
        });
        Ok(Self::from_realizations(config.clone(), realizations))
    }

    pub fn from_realizations(config: SweepConfig, realizations: Vec<Realization>) -> Self {
        let nn = config.grid_nn.points();
        let ns = config.grid_ns.points();
        PreparedSweep {
            config,
            realizations,
            nn,
            ns,
            demand_scale: [1.0; NODES],
        }
    }

    /// Same draws with demand multiplied per node.
    pub fn with_demand_scale(mut self, scale: [f64; NODES]) -> Self {
        self.demand_scale = scale;
        self
    }

    pub fn with_flex(mut self, flex: FlexSpec) -> Self {
        self.config.base_flex = flex;
        self
    }

    pub fn cell_count(&self) -> usize {
        self.nn.len() * self.ns.len()
    }

    pub fn plan(&self, cell: usize) -> CapacityPlan {
        CapacityPlan {
            wind_mw: [self.nn[cell / self.ns.len()], self.ns[cell % self.ns.len()]],
        }
    }

    /// Statistics of one scenario at one plan over all realizations.
    pub fn evaluate_plan(&self, plan: &CapacityPlan, scenario: Scenario) -> Result<CellStats> {
        let penalties = self
            .realizations
            .iter()
            .map(|r| r.penalty(plan, scenario, &self.config.base_flex, self.demand_scale))
            .collect::<Result<Vec<_>>>()?;
        Ok(CellStats::from_penalties(&penalties))
    }

    /// Statistics of every configured scenario at grid cell `cell`.
    pub fn evaluate_cell(&self, cell: usize) -> Result<Vec<CellStats>> {
        let plan = self.plan(cell);
        self.config
            .scenarios
            .iter()
            .map(|&sc| self.evaluate_plan(&plan, sc))
            .collect()
    }

    /// Build the surface from per-cell results in cell order.
    pub fn assemble(&self, cells: Vec<Vec<CellStats>>) -> Result<LossSurface> {
        if cells.len() != self.cell_count() {
            return Err(Error::ShapeMismatch(format!(
                "{} cell results for a {}-cell grid",
                cells.len(),
                self.cell_count()
            )));
        }
        let mut surfaces: Vec<ScenarioSurface> = self
            .config
            .scenarios
            .iter()
            .map(|&scenario| ScenarioSurface {
                scenario,
                nn_mw: self.nn.clone(),
                ns_mw: self.ns.clone(),
                cells: Vec::with_capacity(cells.len()),
            })
            .collect();
        for cell in cells {
            for (surface, stats) in surfaces.iter_mut().zip(cell) {
                surface.cells.push(stats);
            }
        }
        Ok(LossSurface { surfaces })
    }

    pub fn run<E: Executor>(&self, executor: &E) -> Result<LossSurface> {
        let cells = executor.map_indexed(self.cell_count(), |c| self.evaluate_cell(c));
        self.assemble(cells.into_iter().collect::<Result<Vec<_>>>()?)
    }
}

/// Expected-penalty surfaces of every configured scenario.
pub fn sweep<E: Executor>(
    config: &SweepConfig,
    model: &SystemModel,
    executor: &E,
) -> Result<LossSurface> {
    PreparedSweep::new(config, model, executor)?.run(executor)
}

/// Best plan of one scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum {
    pub scenario: Scenario,
    pub plan: CapacityPlan,
    pub stats: CellStats,
    /// Expected penalty of this scenario at the grid cell nearest the
    /// reference plan.
    pub reference_expected: f64,
    /// `1 − 𝓛(optimum) / 𝓛_no-flex(reference)`: gain over today's system
    /// without flexibility. Falls back to this scenario's own reference
    /// penalty when no-flex is not part of the surface.
    pub improvement: f64,
    /// `1 − 𝓛(optimum) / 𝓛(reference)` within the same scenario.
    pub improvement_own: f64,
}

fn relative_gain(value: f64, base: f64) -> f64 {
    if base > 0.0 {
        1.0 - value / base
    } else {
        0.0
    }
}

/// Minimum-penalty plan per scenario. Ties go to the smaller total capacity,
/// then to the smaller northern capacity.
pub fn argmin_surface(surface: &LossSurface, reference: &CapacityPlan) -> Result<Vec<Optimum>> {
    if surface.surfaces.is_empty() {
        return Err(Error::EmptySurface);
    }
    let baseline = match surface.get(Scenario::NoFlex) {
        Some(s) => Some(s.cells[s.nearest_cell(reference).ok_or(Error::EmptySurface)?].expected),
        None => None,
    };
    surface
        .surfaces
        .iter()
        .map(|s| {
            if s.cells.is_empty() {
                return Err(Error::EmptySurface);
            }
            let mut best = 0;
            for c in 1..s.cells.len() {
                let (a, b) = (&s.cells[c], &s.cells[best]);
                let (pa, pb) = (s.plan(c), s.plan(best));
                let better = a.expected < b.expected
                    || (a.expected == b.expected
                        && (pa.total_mw() < pb.total_mw()
                            || (pa.total_mw() == pb.total_mw() && pa.wind_mw[0] < pb.wind_mw[0])));
                if better {
                    best = c;
                }
            }
            let reference_cell = s.nearest_cell(reference).ok_or(Error::EmptySurface)?;
            let reference_expected = s.cells[reference_cell].expected;
            let stats = s.cells[best];
            let improvement_own = relative_gain(stats.expected, reference_expected);
            let improvement = relative_gain(stats.expected, baseline.unwrap_or(reference_expected));
            Ok(Optimum {
                scenario: s.scenario,
                plan: s.plan(best),
                stats,
                reference_expected,
                improvement,
                improvement_own,
            })
        })
        .collect()
}

/// Best and second-best scenario of one grid cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominanceCell {
    pub plan: CapacityPlan,
    pub best: Scenario,
    pub second_best: Option<Scenario>,
}

/// Rank scenarios per cell by expected penalty; exact ties keep the fixed
/// scenario order.
pub fn dominance_map(surfaces: &[ScenarioSurface]) -> Result<Vec<DominanceCell>> {
    let first = surfaces.first().ok_or(Error::EmptySurface)?;
    if surfaces.iter().any(|s| !s.same_grid(first)) {
        return Err(Error::GridMismatch);
    }
    let mut order: Vec<usize> = (0..surfaces.len()).collect();
    order.sort_by_key(|&k| surfaces[k].scenario);
    Ok((0..first.cells.len())
        .map(|c| {
            let mut ranked = order.clone();
            ranked.sort_by(|&a, &b| {
                surfaces[a].cells[c]
                    .expected
                    .total_cmp(&surfaces[b].cells[c].expected)
                    .then(surfaces[a].scenario.cmp(&surfaces[b].scenario))
            });
            DominanceCell {
                plan: first.plan(c),
                best: surfaces[ranked[0]].scenario,
                second_best: ranked.get(1).map(|&k| surfaces[k].scenario),
            }
        })
        .collect())
}

/// What a sensitivity run scales.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensitivityFactor {
    DemandJoint,
    DemandNode(usize),
    Transmission,
    Storage,
    /// Both charging and discharging power.
    Charging,
}

impl SensitivityFactor {
    pub fn label(&self) -> String {
        match self {
            SensitivityFactor::DemandJoint => "demand_joint".into(),
            SensitivityFactor::DemandNode(0) => "demand_nn".into(),
            SensitivityFactor::DemandNode(1) => "demand_ns".into(),
            SensitivityFactor::DemandNode(i) => format!("demand_node{i}"),
            SensitivityFactor::Transmission => "transmission".into(),
            SensitivityFactor::Storage => "storage".into(),
            SensitivityFactor::Charging => "charging".into(),
        }
    }

    fn is_demand(&self) -> bool {
        matches!(
            self,
            SensitivityFactor::DemandJoint | SensitivityFactor::DemandNode(_)
        )
    }

    fn affects(&self, scenario: Scenario) -> bool {
        match self {
            SensitivityFactor::DemandJoint | SensitivityFactor::DemandNode(_) => true,
            SensitivityFactor::Transmission => scenario.uses_line(),
            SensitivityFactor::Storage | SensitivityFactor::Charging => scenario.uses_storage(),
        }
    }

    fn demand_scale(&self, m: f64) -> [f64; NODES] {
        match *self {
            SensitivityFactor::DemandJoint => [m; NODES],
            SensitivityFactor::DemandNode(i) => {
                let mut s = [1.0; NODES];
                s[i] = m;
                s
            }
            _ => [1.0; NODES],
        }
    }

    fn scale_flex(&self, flex: &FlexSpec, m: f64) -> FlexSpec {
        let mut f = *flex;
        match self {
            SensitivityFactor::Transmission => f.transmission_mw *= m,
            SensitivityFactor::Storage => f.storage_mwh.iter_mut().for_each(|v| *v *= m),
            SensitivityFactor::Charging => {
                f.charge_mw.iter_mut().for_each(|v| *v *= m);
                f.discharge_mw.iter_mut().for_each(|v| *v *= m);
            }
            _ => {}
        }
        f
    }
}

impl fmt::Display for SensitivityFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for SensitivityFactor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "demand_joint" | "demand" => SensitivityFactor::DemandJoint,
            "demand_nn" | "demand_node1" => SensitivityFactor::DemandNode(0),
            "demand_ns" | "demand_node2" => SensitivityFactor::DemandNode(1),
            "transmission" => SensitivityFactor::Transmission,
            "storage" => SensitivityFactor::Storage,
            "charging" => SensitivityFactor::Charging,
            _ => {
                return Err(Error::invalid(
                    "factor",
                    format!("unknown sensitivity factor `{s}`"),
                ))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivitySpec {
    pub factor: SensitivityFactor,
    pub multipliers: Vec<f64>,
}

impl SensitivitySpec {
    pub fn new(factor: SensitivityFactor, multipliers: Vec<f64>) -> Result<Self> {
        if let SensitivityFactor::DemandNode(i) = factor {
            if i >= NODES {
                return Err(Error::invalid("factor", format!("node {i} does not exist")));
            }
        }
        if let Some(m) = multipliers.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
            return Err(Error::invalid(
                "multipliers",
                format!("{m} must be positive"),
            ));
        }
        Ok(SensitivitySpec {
            factor,
            multipliers,
        })
    }
}

/// One line of the sensitivity table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityRow {
    pub factor: SensitivityFactor,
    pub multiplier: f64,
    pub scenario: Scenario,
    /// Optimal plan under the variation; demand variations keep the
    /// baseline optimum.
    pub plan: CapacityPlan,
    pub stats: CellStats,
    /// Expected penalty minus the baseline optimum's expected penalty.
    pub delta_vs_base: f64,
    pub delta_per_node: [f64; NODES],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityReport {
    pub baseline: Vec<Optimum>,
    pub rows: Vec<SensitivityRow>,
}

/// Vary one factor at a time. Flexibility factors re-run the sweep on the
/// same draws and report the new optimum; demand factors evaluate the
/// baseline optima with scaled demand.
pub fn sensitivity<E: Executor>(
    config: &SweepConfig,
    model: &SystemModel,
    specs: &[SensitivitySpec],
    executor: &E,
) -> Result<SensitivityReport> {
    let prepared = PreparedSweep::new(config, model, executor)?;
    let base_surface = prepared.run(executor)?;
    sensitivity_prepared(&prepared, &base_surface, specs, executor)
}

/// [`sensitivity`] on already drawn realizations and a baseline surface.
pub fn sensitivity_prepared<E: Executor>(
    prepared: &PreparedSweep,
    base_surface: &LossSurface,
    specs: &[SensitivitySpec],
    executor: &E,
) -> Result<SensitivityReport> {
    let config = &prepared.config;
    let baseline = argmin_surface(base_surface, &config.reference_plan)?;
    let mut rows = Vec::new();
    for spec in specs {
        for &m in &spec.multipliers {
            let varied_optima: Vec<(CapacityPlan, CellStats)> = if spec.factor.is_demand() {
                let scaled = prepared
                    .clone()
                    .with_demand_scale(spec.factor.demand_scale(m));
                baseline
                    .iter()
                    .map(|o| Ok((o.plan, scaled.evaluate_plan(&o.plan, o.scenario)?)))
                    .collect::<Result<_>>()?
            } else {
                let flex = spec.factor.scale_flex(&config.base_flex, m);
                let affected: Vec<Scenario> = config
                    .scenarios
                    .iter()
                    .copied()
                    .filter(|&sc| spec.factor.affects(sc))
                    .collect();
                let varied = if flex == config.base_flex || affected.is_empty() {
                    None
                } else {
                    let mut p = prepared.clone().with_flex(flex);
                    p.config.scenarios = affected;
                    Some(argmin_surface(&p.run(executor)?, &config.reference_plan)?)
                };
                baseline
                    .iter()
                    .map(|o| {
                        let hit = varied
                            .as_ref()
                            .and_then(|v| v.iter().find(|x| x.scenario == o.scenario));
                        match hit {
                            Some(x) => (x.plan, x.stats),
                            None => (o.plan, o.stats),
                        }
                    })
                    .collect()
            };
            for (o, (plan, stats)) in baseline.iter().zip(varied_optima) {
                rows.push(SensitivityRow {
                    factor: spec.factor,
                    multiplier: m,
                    scenario: o.scenario,
                    plan,
                    stats,
                    delta_vs_base: stats.expected - o.stats.expected,
                    delta_per_node: [
                        stats.per_node[0] - o.stats.per_node[0],
                        stats.per_node[1] - o.stats.per_node[1],
                    ],
                });
            }
        }
    }
    Ok(SensitivityReport { baseline, rows })
}

/// Daily loss distribution across realizations at one plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub day: usize,
    pub mean: f64,
    pub q10: f64,
    pub q50: f64,
    pub q90: f64,
}

/// Per-day total loss `L(t)` summarised over realizations.
pub fn penalty_profile(
    realizations: &[Realization],
    plan: &CapacityPlan,
    scenario: Scenario,
    flex: &FlexSpec,
) -> Result<Vec<ProfilePoint>> {
    if realizations.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut by_day: Vec<Vec<f64>> = (0..DAYS_PER_YEAR)
        .map(|_| Vec::with_capacity(realizations.len()))
        .collect();
    for r in realizations {
        let trace = dispatch(scenario, &r.production(plan), &r.demand_mw, flex)?;
        if trace.len() != DAYS_PER_YEAR {
            return Err(Error::WrongHorizon { got: trace.len() });
        }
        for (t, slot) in by_day.iter_mut().enumerate() {
            slot.push(trace.step_loss(t));
        }
    }
    Ok(by_day
        .into_iter()
        .enumerate()
        .map(|(t, mut v)| {
            v.sort_by(f64::total_cmp);
            ProfilePoint {
                day: t + 1,
                mean: stats::mean(&v),
                q10: stats::quantile_sorted(&v, 0.1),
                q50: stats::quantile_sorted(&v, 0.5),
                q90: stats::quantile_sorted(&v, 0.9),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn surface(scenario: Scenario, nn: &[f64], ns: &[f64], values: &[f64]) -> ScenarioSurface {
        ScenarioSurface {
            scenario,
            nn_mw: nn.to_vec(),
            ns_mw: ns.to_vec(),
            cells: values
                .iter()
                .map(|&v| CellStats {
                    expected: v,
                    per_node: [v / 2.0; 2],
                    stderr: 0.0,
                })
                .collect(),
        }
    }

    #[test]
    fn default_grid_is_110_by_163() {
        let c = SweepConfig::default();
        assert_eq!((c.grid_nn.len(), c.grid_ns.len()), (110, 163));
        let nn = c.grid_nn.points();
        assert!((nn[109] - 6000.0).abs() < 1e-9);
        let coarse = c.coarsened(5);
        assert_eq!((coarse.grid_nn.len(), coarse.grid_ns.len()), (22, 33));
        let fine = c.grid_ns.points();
        for (j, v) in coarse.grid_ns.points().iter().enumerate() {
            assert!((v - fine[5 * j]).abs() < 1e-9);
        }
    }

    #[test]
    fn single_point_axis() {
        let a = GridAxis::single(3000.0);
        assert_eq!(a.points(), vec![3000.0]);
        assert!(GridAxis::new(5.0, 1.0, 1.0).is_err());
        assert!(GridAxis::new(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn constant_surface_picks_smallest_corner() {
        let s = surface(Scenario::NoFlex, &[1.0, 2.0], &[10.0, 20.0], &[5.0; 4]);
        let opt = argmin_surface(
            &LossSurface { surfaces: vec![s] },
            &CapacityPlan {
                wind_mw: [2.0, 20.0],
            },
        )
        .unwrap();
        assert_eq!(opt[0].plan.wind_mw, [1.0, 10.0]);
        assert_eq!(opt[0].improvement, 0.0);
    }

    #[test]
    fn unique_minimum_is_found() {
        let s = surface(
            Scenario::Stor,
            &[1.0, 2.0],
            &[10.0, 20.0],
            &[4.0, 3.0, 1.0, 2.0],
        );
        let opt = argmin_surface(
            &LossSurface { surfaces: vec![s] },
            &CapacityPlan {
                wind_mw: [1.0, 10.0],
            },
        )
        .unwrap();
        assert_eq!(opt[0].plan.wind_mw, [2.0, 10.0]);
        assert!((opt[0].improvement - 0.75).abs() < 1e-15);
        assert_eq!(opt[0].improvement, opt[0].improvement_own);
    }

    #[test]
    fn improvement_is_measured_against_no_flex_reference() {
        let base = surface(
            Scenario::NoFlex,
            &[1.0, 2.0],
            &[10.0, 20.0],
            &[8.0, 6.0, 5.0, 7.0],
        );
        let stor = surface(
            Scenario::Stor,
            &[1.0, 2.0],
            &[10.0, 20.0],
            &[4.0, 3.0, 2.0, 2.5],
        );
        let opt = argmin_surface(
            &LossSurface {
                surfaces: vec![base, stor],
            },
            &CapacityPlan {
                wind_mw: [1.0, 10.0],
            },
        )
        .unwrap();
        assert!((opt[0].improvement - 0.375).abs() < 1e-15);
        assert!((opt[1].improvement - 0.75).abs() < 1e-15);
        assert!((opt[1].improvement_own - 0.5).abs() < 1e-15);
    }

    #[test]
    fn reference_snaps_to_nearest_cell() {
        let c = SweepConfig::default();
        let s = ScenarioSurface {
            scenario: Scenario::NoFlex,
            nn_mw: c.grid_nn.points(),
            ns_mw: c.grid_ns.points(),
            cells: vec![CellStats::default(); c.cell_count()],
        };
        assert_eq!(
            s.plan(s.nearest_cell(&REFERENCE_PLAN).unwrap()).wind_mw,
            [3250.0, 1800.0]
        );
    }

    #[test]
    fn empty_surface_is_an_error() {
        assert_eq!(
            argmin_surface(&LossSurface { surfaces: vec![] }, &REFERENCE_PLAN),
            Err(Error::EmptySurface)
        );
    }

    #[test]
    fn dominance_ties_follow_precedence() {
        let all: Vec<_> = Scenario::ALL
            .iter()
            .rev()
            .map(|&sc| surface(sc, &[1.0], &[1.0], &[7.0]))
            .collect();
        let map = dominance_map(&all).unwrap();
        assert_eq!(map[0].best, Scenario::NoFlex);
        assert_eq!(map[0].second_best, Some(Scenario::Trans));
    }

    #[test]
    fn dominance_picks_smallest() {
        let s = vec![
            surface(Scenario::NoFlex, &[1.0], &[1.0, 2.0], &[9.0, 9.0]),
            surface(Scenario::Trans, &[1.0], &[1.0, 2.0], &[8.0, 5.0]),
            surface(Scenario::FullFlex, &[1.0], &[1.0, 2.0], &[1.0, 6.0]),
        ];
        let map = dominance_map(&s).unwrap();
        assert_eq!(
            (map[0].best, map[0].second_best),
            (Scenario::FullFlex, Some(Scenario::Trans))
        );
        assert_eq!(
            (map[1].best, map[1].second_best),
            (Scenario::Trans, Some(Scenario::FullFlex))
        );
    }

    #[test]
    fn dominance_rejects_mismatched_grids() {
        let s = vec![
            surface(Scenario::NoFlex, &[1.0], &[1.0], &[1.0]),
            surface(Scenario::Trans, &[2.0], &[1.0], &[1.0]),
        ];
        assert_eq!(dominance_map(&s), Err(Error::GridMismatch));
    }

    #[test]
    fn stderr_of_known_sample() {
        let p: Vec<Penalty> = [1.0, 2.0, 3.0, 4.0]
            .iter()
            .map(|&v| Penalty {
                per_node: [v, 0.0],
                total: v,
            })
            .collect();
        let s = CellStats::from_penalties(&p);
        assert_eq!(s.expected, 2.5);
        // sample sd = sqrt(5/3), stderr = sd / 2
        assert!((s.stderr - libm::sqrt(5.0 / 3.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn sensitivity_spec_validation() {
        assert!(SensitivitySpec::new(SensitivityFactor::Storage, vec![0.5, 0.0]).is_err());
        assert!(SensitivitySpec::new(SensitivityFactor::DemandNode(2), vec![1.1]).is_err());
        for f in [
            "demand_joint",
            "demand_nn",
            "demand_ns",
            "transmission",
            "storage",
            "charging",
        ] {
            assert_eq!(f.parse::<SensitivityFactor>().unwrap().label(), f);
        }
    }
}
