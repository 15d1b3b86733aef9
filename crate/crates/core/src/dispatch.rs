//! Reactive dispatch of the four flexibility scenarios on a two-node system.
//!
//! Each step starts from the nodal residual `r = P − D` (MW) and applies the
//! scenario's rules in a fixed order:
//!
//! 1. **Transmission**: a surplus node exports to a deficit node,
//!    `f = min(surplus, deficit, line)`.
//! 2. **Local storage**: a surplus node charges, a deficit node discharges,
//!    `Ch = min(r⁺, (B_M − B)/(η_c·h), B_C)`,
//!    `Dis = min(r⁻, η_d·B/h, B_D)`.
//! 3. **Cross-charging**: leftover surplus charges the other node's storage
//!    through the remaining line capacity (north first).
//! 4. **Remote discharge**: a node still short draws on the other node's
//!    storage through the remaining line capacity (north first).
//!
//! `no-flex` applies nothing, `trans` only stage 1, `stor` only stage 2 and
//! `full-flex` all four. Storage evolves as
//! `B(t) = B(t−1) + η_c·Ch·h − Dis·h/η_d` (MWh) and starts empty. The
//! per-node loss is the squared remaining residual.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::calendar::DAYS_PER_YEAR;
use crate::matrix::Matrix;
use crate::stats::CompensatedSum;
use crate::{Error, Result};

pub const NODES: usize = 2;
pub const NORTH: usize = 0;
pub const SOUTH: usize = 1;

/// Installed wind capacity per node, MW.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityPlan {
    pub wind_mw: [f64; NODES],
}

impl CapacityPlan {
    pub fn new(north_mw: f64, south_mw: f64) -> Result<Self> {
        let plan = CapacityPlan {
            wind_mw: [north_mw, south_mw],
        };
        if plan.wind_mw.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::invalid(
                "wind_mw",
                format!("{:?} must be nonnegative", plan.wind_mw),
            ));
        }
        Ok(plan)
    }

    pub fn total_mw(&self) -> f64 {
        self.wind_mw[0] + self.wind_mw[1]
    }
}

/// Transmission line and storage units available to the dispatch rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlexSpec {
    pub transmission_mw: f64,
    /// Storage energy capacity per node, MWh.
    pub storage_mwh: [f64; NODES],
    pub charge_mw: [f64; NODES],
    pub discharge_mw: [f64; NODES],
    pub eta_charge: f64,
    pub eta_discharge: f64,
    /// Converts one step of MW flow into MWh of storage energy.
    pub step_hours: f64,
}

impl Default for FlexSpec {
    /// 900 MW line, 15/30 GWh storage, 900 MW (dis)charging, 75 %/90 %
    /// efficiencies. Daily-average flows enter storage one-for-one
    /// (`step_hours = 1`), so 15 GWh covers about 14 days of northern
    /// peak-season demand.
    fn default() -> Self {
        FlexSpec {
            transmission_mw: 900.0,
            storage_mwh: [15_000.0, 30_000.0],
            charge_mw: [900.0; NODES],
            discharge_mw: [900.0; NODES],
            eta_charge: 0.75,
            eta_discharge: 0.90,
            step_hours: 1.0,
        }
    }
}

impl FlexSpec {
    pub fn validate(&self) -> Result<()> {
        let nonneg = |name: &'static str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(
                    name,
                    format!("{v} must be a nonnegative finite value"),
                ))
            }
        };
        nonneg("transmission_mw", self.transmission_mw)?;
        for i in 0..NODES {
            nonneg("storage_mwh", self.storage_mwh[i])?;
            nonneg("charge_mw", self.charge_mw[i])?;
            nonneg("discharge_mw", self.discharge_mw[i])?;
        }
        for (name, eta) in [
            ("eta_charge", self.eta_charge),
            ("eta_discharge", self.eta_discharge),
        ] {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::invalid(name, format!("{eta} is outside (0, 1]")));
            }
        }
        if !(self.step_hours > 0.0 && self.step_hours.is_finite()) {
            return Err(Error::invalid(
                "step_hours",
                format!("{} must be positive", self.step_hours),
            ));
        }
        Ok(())
    }

    pub fn without_line(mut self) -> Self {
        self.transmission_mw = 0.0;
        self
    }

    pub fn without_storage(mut self) -> Self {
        self.storage_mwh = [0.0; NODES];
        self.charge_mw = [0.0; NODES];
        self.discharge_mw = [0.0; NODES];
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    NoFlex,
    Trans,
    Stor,
    FullFlex,
}

impl Scenario {
    /// Also the precedence used to order exact ties.
    pub const ALL: [Scenario; 4] = [
        Scenario::NoFlex,
        Scenario::Trans,
        Scenario::Stor,
        Scenario::FullFlex,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Scenario::NoFlex => "no-flex",
            Scenario::Trans => "trans",
            Scenario::Stor => "stor",
            Scenario::FullFlex => "full-flex",
        }
    }

    pub fn uses_line(self) -> bool {
        matches!(self, Scenario::Trans | Scenario::FullFlex)
    }

    pub fn uses_storage(self) -> bool {
        matches!(self, Scenario::Stor | Scenario::FullFlex)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| {
                sc.label().eq_ignore_ascii_case(s)
                    || sc.label().replace('-', "_").eq_ignore_ascii_case(s)
            })
            .ok_or_else(|| Error::invalid("scenario", format!("unknown scenario `{s}`")))
    }
}

/// One node at one step. Flows are MW, `storage_level` is MWh at step end,
/// `loss` is the squared residual in MW².
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NodeStep {
    pub production: f64,
    pub demand: f64,
    pub import: f64,
    pub export: f64,
    pub charge: f64,
    pub discharge: f64,
    pub storage_level: f64,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispatchTrace {
    pub scenario: Scenario,
    pub steps: Vec<[NodeStep; NODES]>,
}

impl DispatchTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `L(t)`: sum of the nodal losses at step `t`.
    pub fn step_loss(&self, t: usize) -> f64 {
        self.steps[t].iter().map(|n| n.loss).sum()
    }
}

/// Scratch state of one step.
#[derive(Debug, Clone, Copy, Default)]
struct Flows {
    residual: [f64; NODES],
    import: [f64; NODES],
    export: [f64; NODES],
    charge: [f64; NODES],
    discharge: [f64; NODES],
    line_used: f64,
}

/// Sequential dispatcher for one realization; owns the storage state.
#[derive(Debug, Clone)]
pub struct Dispatcher {
    scenario: Scenario,
    flex: FlexSpec,
    level: [f64; NODES],
}

impl Dispatcher {
    pub fn new(scenario: Scenario, flex: FlexSpec) -> Result<Self> {
        flex.validate()?;
        Ok(Dispatcher {
            scenario,
            flex,
            level: [0.0; NODES],
        })
    }

    pub fn storage_level(&self) -> [f64; NODES] {
        self.level
    }

    #[inline]
    fn charge_room(&self, i: usize) -> f64 {
        let f = &self.flex;
        libm::fmax(
            (f.storage_mwh[i] - self.level[i]) / (f.eta_charge * f.step_hours),
            0.0,
        )
    }

    #[inline]
    fn discharge_room(&self, i: usize) -> f64 {
        let f = &self.flex;
        f.eta_discharge * self.level[i] / f.step_hours
    }

    fn transmit(&self, s: &mut Flows) {
        let cap = self.flex.transmission_mw;
        for (from, to) in [(NORTH, SOUTH), (SOUTH, NORTH)] {
            if s.residual[from] > 0.0 && s.residual[to] < 0.0 {
                let f = min3(s.residual[from], -s.residual[to], cap);
                s.export[from] += f;
                s.import[to] += f;
                s.residual[from] -= f;
                s.residual[to] += f;
                s.line_used += f;
            }
        }
    }

    fn store_locally(&self, s: &mut Flows) {
        for i in 0..NODES {
            let r = s.residual[i];
            if r > 0.0 {
                let ch = min3(r, self.charge_room(i), self.flex.charge_mw[i]);
                s.charge[i] += ch;
                s.residual[i] -= ch;
            } else if r < 0.0 {
                let dis = min3(-r, self.discharge_room(i), self.flex.discharge_mw[i]);
                s.discharge[i] += dis;
                s.residual[i] += dis;
            }
        }
    }

    fn charge_remote(&self, s: &mut Flows) {
        for (from, to) in [(NORTH, SOUTH), (SOUTH, NORTH)] {
            if s.residual[from] > 0.0 && s.discharge[to] == 0.0 && s.export[to] == 0.0 {
                let cap = libm::fmin(self.flex.charge_mw[to], self.charge_room(to));
                let line = self.flex.transmission_mw;
                let g = min3(s.residual[from], line - s.line_used, cap - s.charge[to]);
                let g = fit_within(
                    g,
                    &[
                        (s.charge[to], cap),
                        (s.line_used, line),
                        (s.import[to], line),
                    ],
                );
                if g > 0.0 {
                    s.export[from] += g;
                    s.import[to] += g;
                    s.charge[to] += g;
                    s.residual[from] -= g;
                    s.line_used += g;
                }
            }
        }
    }

    fn discharge_remote(&self, s: &mut Flows) {
        for (to, from) in [(NORTH, SOUTH), (SOUTH, NORTH)] {
            if s.residual[to] < 0.0 && s.charge[from] == 0.0 && s.import[from] == 0.0 {
                let cap = libm::fmin(self.flex.discharge_mw[from], self.discharge_room(from));
                let line = self.flex.transmission_mw;
                let k = min3(-s.residual[to], line - s.line_used, cap - s.discharge[from]);
                let k = fit_within(
                    k,
                    &[
                        (s.discharge[from], cap),
                        (s.line_used, line),
                        (s.import[to], line),
                    ],
                );
                if k > 0.0 {
                    s.discharge[from] += k;
                    s.export[from] += k;
                    s.import[to] += k;
                    s.residual[to] += k;
                    s.line_used += k;
                }
            }
        }
    }

    /// Dispatch one step and advance the storage state.
    pub fn step(&mut self, production: [f64; NODES], demand: [f64; NODES]) -> [NodeStep; NODES] {
        let mut s = Flows {
            residual: [production[0] - demand[0], production[1] - demand[1]],
            ..Flows::default()
        };
        match self.scenario {
            Scenario::NoFlex => {}
            Scenario::Trans => self.transmit(&mut s),
            Scenario::Stor => self.store_locally(&mut s),
            Scenario::FullFlex => {
                self.transmit(&mut s);
                self.store_locally(&mut s);
                self.charge_remote(&mut s);
                self.discharge_remote(&mut s);
            }
        }
        let f = &self.flex;
        let mut out = [NodeStep::default(); NODES];
        for i in 0..NODES {
            if s.charge[i] != 0.0 || s.discharge[i] != 0.0 {
                let next = self.level[i] + f.eta_charge * s.charge[i] * f.step_hours
                    - s.discharge[i] * f.step_hours / f.eta_discharge;
                self.level[i] = next.clamp(0.0, f.storage_mwh[i]);
            }
            out[i] = NodeStep {
                production: production[i],
                demand: demand[i],
                import: s.import[i],
                export: s.export[i],
                charge: s.charge[i],
                discharge: s.discharge[i],
                storage_level: self.level[i],
                loss: s.residual[i] * s.residual[i],
            };
        }
        out
    }
}

/// Largest `y ≤ x` for which every running total `used + y` still rounds
/// to at most its cap. Headroom `cap − used` can round up by one ulp, so
/// the plain sum may land just past the limit.
fn fit_within(x: f64, limits: &[(f64, f64)]) -> f64 {
    let fits = |y: f64| limits.iter().all(|&(used, cap)| used + y <= cap);
    if !(x > 0.0) || fits(x) {
        return x;
    }
    // positive floats order like their bit patterns; fits(0) holds
    let (mut lo, mut hi) = (0u64, x.to_bits());
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fits(f64::from_bits(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    f64::from_bits(lo)
}

#[inline]
fn min3(a: f64, b: f64, c: f64) -> f64 {
    libm::fmin(libm::fmin(a, b), c)
}

fn check_inputs(production: &Matrix, demand: &Matrix) -> Result<()> {
    if production.cols() != NODES || demand.cols() != NODES || production.rows() != demand.rows() {
        return Err(Error::ShapeMismatch(format!(
            "production is {}x{}, demand is {}x{}; both must be Tx{NODES}",
            production.rows(),
            production.cols(),
            demand.rows(),
            demand.cols()
        )));
    }
    for (name, m) in [("production", production), ("demand", demand)] {
        if let Some(k) = m
            .as_slice()
            .iter()
            .position(|v| !(*v >= 0.0 && v.is_finite()))
        {
            return Err(Error::invalid(
                if name == "production" {
                    "production"
                } else {
                    "demand"
                },
                format!(
                    "value at step {}, node {} is negative or non-finite",
                    k / NODES,
                    k % NODES
                ),
            ));
        }
    }
    Ok(())
}

/// Dispatch a whole horizon under `scenario`.
pub fn dispatch(
    scenario: Scenario,
    production: &Matrix,
    demand: &Matrix,
    flex: &FlexSpec,
) -> Result<DispatchTrace> {
    check_inputs(production, demand)?;
    let mut dispatcher = Dispatcher::new(scenario, *flex)?;
    let steps = (0..production.rows())
        .map(|t| {
            let p = production.row(t);
            let d = demand.row(t);
            dispatcher.step([p[0], p[1]], [d[0], d[1]])
        })
        .collect();
    Ok(DispatchTrace { scenario, steps })
}

/// Quadratic mismatch without any flexibility.
pub fn dispatch_no_flex(production: &Matrix, demand: &Matrix) -> Result<DispatchTrace> {
    dispatch(Scenario::NoFlex, production, demand, &FlexSpec::default())
}

pub fn dispatch_trans(
    production: &Matrix,
    demand: &Matrix,
    flex: &FlexSpec,
) -> Result<DispatchTrace> {
    dispatch(Scenario::Trans, production, demand, flex)
}

pub fn dispatch_stor(
    production: &Matrix,
    demand: &Matrix,
    flex: &FlexSpec,
) -> Result<DispatchTrace> {
    dispatch(Scenario::Stor, production, demand, flex)
}

pub fn dispatch_full_flex(
    production: &Matrix,
    demand: &Matrix,
    flex: &FlexSpec,
) -> Result<DispatchTrace> {
    dispatch(Scenario::FullFlex, production, demand, flex)
}

/// Annual penalty of one realization.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Penalty {
    pub per_node: [f64; NODES],
    pub total: f64,
}

impl Penalty {
    pub(crate) fn from_sums(sums: &[CompensatedSum; NODES]) -> Self {
        let per_node = [sums[0].value(), sums[1].value()];
        Penalty {
            per_node,
            total: per_node[0] + per_node[1],
        }
    }
}

/// Sum the per-node losses of a 365-step trace.
pub fn aggregate_penalty(trace: &DispatchTrace) -> Result<Penalty> {
    if trace.len() != DAYS_PER_YEAR {
        return Err(Error::WrongHorizon { got: trace.len() });
    }
    let mut sums = [CompensatedSum::new(); NODES];
    for step in &trace.steps {
        for i in 0..NODES {
            sums[i].add(step[i].loss);
        }
    }
    Ok(Penalty::from_sums(&sums))
}
