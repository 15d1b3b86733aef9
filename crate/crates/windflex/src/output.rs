//! CSV result files. Floats are written in shortest round-trip form, so
//! reading a file back reproduces every value bit for bit.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use windflex_core::dispatch::{DispatchTrace, Scenario, NODES};
use windflex_core::sweep::{
    CellStats, DominanceCell, LossSurface, Optimum, ProfilePoint, ScenarioSurface,
    SensitivityReport,
};

use crate::error::{display, IoError, Result};

pub const SURFACE_HEADER: [&str; 7] = [
    "wind_nn_mw",
    "wind_ns_mw",
    "scenario",
    "expected_penalty",
    "penalty_nn",
    "penalty_ns",
    "stderr",
];
pub const DOMINANCE_HEADER: [&str; 4] = ["wind_nn_mw", "wind_ns_mw", "best", "second_best"];
pub const SENSITIVITY_HEADER: [&str; 7] = [
    "factor",
    "multiplier",
    "scenario",
    "opt_nn_mw",
    "opt_ns_mw",
    "expected_penalty",
    "delta_vs_base",
];
pub const TRACE_HEADER: [&str; 11] = [
    "t",
    "node",
    "production",
    "demand",
    "import",
    "export",
    "charge",
    "discharge",
    "storage_level",
    "loss",
    "scenario",
];
pub const OPTIMA_HEADER: [&str; 10] = [
    "scenario",
    "opt_nn_mw",
    "opt_ns_mw",
    "expected_penalty",
    "penalty_nn",
    "penalty_ns",
    "stderr",
    "reference_penalty",
    "improvement",
    "improvement_own",
];
pub const PLOTDATA_HEADER: [&str; 6] = [
    "scenario",
    "wind_nn_mw",
    "wind_ns_mw",
    "day",
    "statistic",
    "value",
];

pub const NODE_LABELS: [&str; NODES] = ["nn", "ns"];

fn csv_err(source: &str) -> impl Fn(csv::Error) -> IoError + '_ {
    move |e| IoError::Io {
        path: source.to_string(),
        source: std::io::Error::other(e.to_string()),
    }
}

/// Create `path` and hand a buffered CSV writer to `f`.
pub fn write_file<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut csv::Writer<BufWriter<File>>) -> csv::Result<()>,
{
    let file = File::create(path).map_err(|e| IoError::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let name = display(path);
    f(&mut w).map_err(csv_err(&name))?;
    w.flush().map_err(|e| IoError::io(path, e))
}

/// One row per grid cell and scenario, cells in grid order (north outer).
pub fn write_surface<W: Write>(w: &mut csv::Writer<W>, surface: &LossSurface) -> csv::Result<()> {
    w.write_record(SURFACE_HEADER)?;
    let Some(first) = surface.surfaces.first() else {
        return Ok(());
    };
    for cell in 0..first.cells.len() {
        for s in &surface.surfaces {
            let p = s.plan(cell);
            let c = &s.cells[cell];
            w.write_record([
                p.wind_mw[0].to_string(),
                p.wind_mw[1].to_string(),
                s.scenario.label().to_string(),
                c.expected.to_string(),
                c.per_node[0].to_string(),
                c.per_node[1].to_string(),
                c.stderr.to_string(),
            ])?;
        }
    }
    Ok(())
}

pub fn write_dominance<W: Write>(
    w: &mut csv::Writer<W>,
    cells: &[DominanceCell],
) -> csv::Result<()> {
    w.write_record(DOMINANCE_HEADER)?;
    for c in cells {
        w.write_record([
            c.plan.wind_mw[0].to_string(),
            c.plan.wind_mw[1].to_string(),
            c.best.label().to_string(),
            c.second_best
                .map_or(String::new(), |s| s.label().to_string()),
        ])?;
    }
    Ok(())
}

pub fn write_sensitivity<W: Write>(
    w: &mut csv::Writer<W>,
    report: &SensitivityReport,
) -> csv::Result<()> {
    w.write_record(SENSITIVITY_HEADER)?;
    for o in &report.baseline {
        w.write_record([
            "baseline".to_string(),
            "1".to_string(),
            o.scenario.label().to_string(),
            o.plan.wind_mw[0].to_string(),
            o.plan.wind_mw[1].to_string(),
            o.stats.expected.to_string(),
            "0".to_string(),
        ])?;
    }
    for r in &report.rows {
        w.write_record([
            r.factor.label(),
            r.multiplier.to_string(),
            r.scenario.label().to_string(),
            r.plan.wind_mw[0].to_string(),
            r.plan.wind_mw[1].to_string(),
            r.stats.expected.to_string(),
            r.delta_vs_base.to_string(),
        ])?;
    }
    Ok(())
}

/// Long format: one row per step and node.
pub fn write_trace<W: Write>(w: &mut csv::Writer<W>, trace: &DispatchTrace) -> csv::Result<()> {
    w.write_record(TRACE_HEADER)?;
    for (t, step) in trace.steps.iter().enumerate() {
        for (i, n) in step.iter().enumerate() {
            w.write_record([
                t.to_string(),
                NODE_LABELS[i].to_string(),
                n.production.to_string(),
                n.demand.to_string(),
                n.import.to_string(),
                n.export.to_string(),
                n.charge.to_string(),
                n.discharge.to_string(),
                n.storage_level.to_string(),
                n.loss.to_string(),
                trace.scenario.label().to_string(),
            ])?;
        }
    }
    Ok(())
}

pub fn write_optima<W: Write>(w: &mut csv::Writer<W>, optima: &[Optimum]) -> csv::Result<()> {
    w.write_record(OPTIMA_HEADER)?;
    for o in optima {
        w.write_record([
            o.scenario.label().to_string(),
            o.plan.wind_mw[0].to_string(),
            o.plan.wind_mw[1].to_string(),
            o.stats.expected.to_string(),
            o.stats.per_node[0].to_string(),
            o.stats.per_node[1].to_string(),
            o.stats.stderr.to_string(),
            o.reference_expected.to_string(),
            o.improvement.to_string(),
            o.improvement_own.to_string(),
        ])?;
    }
    Ok(())
}

/// Daily loss profile of one scenario at one plan, tidy long format with
/// statistics `mean`, `q10`, `q50`, `q90`.
pub fn write_plotdata<W: Write>(
    w: &mut csv::Writer<W>,
    profiles: &[(Scenario, [f64; NODES], Vec<ProfilePoint>)],
) -> csv::Result<()> {
    w.write_record(PLOTDATA_HEADER)?;
    for (scenario, plan, points) in profiles {
        for p in points {
            for (stat, v) in [
                ("mean", p.mean),
                ("q10", p.q10),
                ("q50", p.q50),
                ("q90", p.q90),
            ] {
                w.write_record([
                    scenario.label().to_string(),
                    plan[0].to_string(),
                    plan[1].to_string(),
                    p.day.to_string(),
                    stat.to_string(),
                    v.to_string(),
                ])?;
            }
        }
    }
    Ok(())
}

/// Read a surface file written by [`write_surface`].
pub fn read_surface<R: Read>(reader: R, source: &str) -> Result<LossSurface> {
    let mut rdr = csv::Reader::from_reader(reader);
    let parse_err = |row: u64, column: &str, message: String| IoError::Parse {
        path: source.to_string(),
        row,
        column: column.to_string(),
        message,
    };
    let header = rdr
        .headers()
        .map_err(|e| parse_err(1, "header", e.to_string()))?
        .clone();
    if header.iter().ne(SURFACE_HEADER) {
        return Err(parse_err(
            1,
            "header",
            format!("expected `{}`", SURFACE_HEADER.join(",")),
        ));
    }
    let mut scenarios: Vec<Scenario> = Vec::new();
    let mut nn: Vec<f64> = Vec::new();
    let mut ns: Vec<f64> = Vec::new();
    let mut rows: Vec<(f64, f64, Scenario, CellStats)> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            parse_err(
                e.position().map_or(0, |p| p.line()),
                "record",
                e.to_string(),
            )
        })?;
        let row = record.position().map_or(0, |p| p.line());
        let num = |k: usize| -> Result<f64> {
            record[k].parse::<f64>().map_err(|_| {
                parse_err(
                    row,
                    SURFACE_HEADER[k],
                    format!("`{}` is not a number", &record[k]),
                )
            })
        };
        let scenario: Scenario = record[2].parse().map_err(|_| {
            parse_err(
                row,
                "scenario",
                format!("unknown scenario `{}`", &record[2]),
            )
        })?;
        let (a, b) = (num(0)?, num(1)?);
        if !scenarios.contains(&scenario) {
            scenarios.push(scenario);
        }
        if !nn.contains(&a) {
            nn.push(a);
        }
        if !ns.contains(&b) {
            ns.push(b);
        }
        let stats = CellStats {
            expected: num(3)?,
            per_node: [num(4)?, num(5)?],
            stderr: num(6)?,
        };
        rows.push((a, b, scenario, stats));
    }
    if rows.is_empty() {
        return Err(IoError::invalid(source, "surface file has no rows"));
    }
    let expected_rows = nn.len() * ns.len() * scenarios.len();
    if rows.len() != expected_rows {
        return Err(IoError::invalid(
            source,
            format!(
                "{} rows do not form a full {}x{} grid for {} scenarios",
                rows.len(),
                nn.len(),
                ns.len(),
                scenarios.len()
            ),
        ));
    }
    let mut surfaces: Vec<ScenarioSurface> = scenarios
        .iter()
        .map(|&scenario| ScenarioSurface {
            scenario,
            nn_mw: nn.clone(),
            ns_mw: ns.clone(),
            cells: vec![CellStats::default(); nn.len() * ns.len()],
        })
        .collect();
    let mut seen = vec![false; expected_rows];
    for (k, (a, b, sc, stats)) in rows.into_iter().enumerate() {
        let i = nn.iter().position(|v| *v == a).expect("collected above");
        let j = ns.iter().position(|v| *v == b).expect("collected above");
        let s = scenarios
            .iter()
            .position(|v| *v == sc)
            .expect("collected above");
        let cell = i * ns.len() + j;
        let slot = s * nn.len() * ns.len() + cell;
        if seen[slot] {
            return Err(parse_err(
                k as u64 + 2,
                "wind_nn_mw",
                format!("duplicate cell ({a}, {b}, {sc})"),
            ));
        }
        seen[slot] = true;
        surfaces[s].cells[cell] = stats;
    }
    Ok(LossSurface { surfaces })
}

pub fn load_surface(path: &Path) -> Result<LossSurface> {
    let file = File::open(path).map_err(|e| IoError::io(path, e))?;
    read_surface(file, &display(path))
}
