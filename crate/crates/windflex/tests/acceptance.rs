//! Acceptance suite: one verdict line per criterion, nonzero exit status if
//! any criterion fails. Runs without the libtest harness so that every line
//! is printed even when an earlier criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use windflex::config::ProjectConfig;
use windflex::fit::{fit_load, fit_temperature, fit_wind};
use windflex::fixtures::{self, fixture_series, DEFAULT_FIXTURE_SEED};
use windflex::output::write_surface;
use windflex::parallel::RayonExecutor;
use windflex_core::dispatch::{dispatch, CapacityPlan, FlexSpec, NodeStep, Scenario, NODES};
use windflex_core::rng::{Purpose, RealizationSeed};
use windflex_core::stats;
use windflex_core::sweep::{
    argmin_surface, dominance_map, sensitivity_prepared, LossSurface, PreparedSweep,
    SensitivityFactor, SensitivitySpec, SweepConfig, SystemModel, WIND_BURN_IN,
};
use windflex_core::Matrix;

#[path = "../../core/tests/support/oracle.rs"]
mod support;

use support::oracle;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict {
            pass,
            detail: detail.into(),
        }
    }
}

/// Collects sub-check failures of one criterion.
#[derive(Default)]
struct Checks {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }

    fn verdict(self) -> Verdict {
        if self.failures.is_empty() {
            Verdict::new(true, self.notes.join("; "))
        } else {
            Verdict::new(false, format!("failed: {}", self.failures.join("; ")))
        }
    }
}

// ---------------------------------------------------------------- instances

struct Instance {
    p: Vec<[f64; 2]>,
    d: Vec<[f64; 2]>,
    f: FlexSpec,
}

impl Instance {
    fn matrices(&self) -> (Matrix, Matrix) {
        (Matrix::from_rows(&self.p), Matrix::from_rows(&self.d))
    }

    fn steps(&self, scenario: Scenario, f: &FlexSpec) -> Vec<[NodeStep; NODES]> {
        let (p, d) = self.matrices();
        dispatch(scenario, &p, &d, f).expect("valid instance").steps
    }
}

/// Zero with probability 0.1, otherwise uniform on `[0, hi)`.
fn cap(rng: &mut ChaCha8Rng, hi: f64) -> f64 {
    if rng.random_bool(0.1) {
        0.0
    } else {
        rng.random_range(0.0..hi)
    }
}

fn random_instance(rng: &mut ChaCha8Rng, max_len: usize) -> Instance {
    let n = rng.random_range(1..=max_len);
    let series = |rng: &mut ChaCha8Rng| -> Vec<[f64; 2]> {
        (0..n)
            .map(|_| [rng.random_range(0.0..3000.0), rng.random_range(0.0..3000.0)])
            .collect()
    };
    let p = series(rng);
    let d = series(rng);
    let f = FlexSpec {
        transmission_mw: cap(rng, 1500.0),
        storage_mwh: [cap(rng, 40_000.0), cap(rng, 40_000.0)],
        charge_mw: [cap(rng, 1500.0), cap(rng, 1500.0)],
        discharge_mw: [cap(rng, 1500.0), cap(rng, 1500.0)],
        eta_charge: rng.random_range(0.3..=1.0),
        eta_discharge: rng.random_range(0.3..=1.0),
        step_hours: match rng.random_range(0..3) {
            0 => 1.0,
            1 => 24.0,
            _ => rng.random_range(0.25..48.0),
        },
    };
    Instance { p, d, f }
}

fn instances(seed: u64, count: usize, max_len: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_instance(&mut rng, max_len))
        .collect()
}

// ---------------------------------------------------------------- criteria

fn moment_reproduction() -> Verdict {
    let wind = windflex::params::default_wind()
        .to_model("default")
        .expect("shipped defaults parse");
    let started = Instant::now();
    let mut rng = RealizationSeed::new(42, 0).stream(Purpose::Wind);
    let cf = wind.simulate(100 * 365, 1, WIND_BURN_IN, &mut rng);
    let elapsed = started.elapsed();
    let (n, s) = (cf.values().column(0), cf.values().column(1));
    let mut c = Checks::default();
    for (name, x, mean, std, skew) in [
        ("NO-N", &n, 0.269, 0.149, 0.767),
        ("NO-S", &s, 0.180, 0.131, 1.362),
    ] {
        let (m, sd, sk) = (stats::mean(x), stats::std_dev(x), stats::skewness(x));
        c.check(
            (m - mean).abs() <= 0.02,
            format!("{name} mean {m:.4} (target {mean} +/- 0.02)"),
        );
        c.check(
            (sd - std).abs() <= 0.02,
            format!("{name} std {sd:.4} (target {std} +/- 0.02)"),
        );
        c.check(
            (sk - skew).abs() <= 0.25,
            format!("{name} skew {sk:.4} (target {skew} +/- 0.25)"),
        );
    }
    let r = stats::correlation(&n, &s);
    c.check(
        (r - 0.470).abs() <= 0.06,
        format!("correlation {r:.4} (target 0.470 +/- 0.06)"),
    );
    c.check(
        elapsed < Duration::from_secs(10),
        format!("{:.2} s single-threaded (< 10 s)", elapsed.as_secs_f64()),
    );
    c.verdict()
}

fn pointwise_dominance(cases: &[Instance]) -> Verdict {
    let mut violations = 0usize;
    for inst in cases {
        let base = inst.steps(Scenario::NoFlex, &inst.f);
        for sc in [Scenario::Trans, Scenario::Stor] {
            let steps = inst.steps(sc, &inst.f);
            for (a, b) in steps.iter().zip(&base) {
                for i in 0..NODES {
                    if a[i].loss > b[i].loss {
                        violations += 1;
                    }
                }
            }
        }
    }
    Verdict::new(
        violations == 0,
        format!(
            "{} instances, {violations} per-node per-step violations",
            cases.len()
        ),
    )
}

fn degenerate_reductions(cases: &[Instance]) -> Verdict {
    let mut bad = Vec::new();
    for (k, inst) in cases.iter().enumerate() {
        let (no_line, no_storage) = (inst.f.without_line(), inst.f.without_storage());
        if inst.steps(Scenario::FullFlex, &no_line) != inst.steps(Scenario::Stor, &no_line) {
            bad.push(format!("#{k} full-flex/stor"));
        }
        if inst.steps(Scenario::FullFlex, &no_storage) != inst.steps(Scenario::Trans, &no_storage) {
            bad.push(format!("#{k} full-flex/trans"));
        }
        if inst.steps(Scenario::Trans, &no_line) != inst.steps(Scenario::NoFlex, &inst.f) {
            bad.push(format!("#{k} trans/no-flex"));
        }
    }
    Verdict::new(
        bad.is_empty(),
        format!(
            "{} instances x 3 reductions, mismatches: {bad:?}",
            cases.len()
        ),
    )
}

fn oracle_equivalence(cases: &[Instance]) -> Verdict {
    let mismatches = cases
        .iter()
        .filter(|inst| {
            inst.steps(Scenario::FullFlex, &inst.f)
                != oracle(Scenario::FullFlex, &inst.p, &inst.d, &inst.f)
        })
        .count();
    Verdict::new(
        mismatches == 0,
        format!(
            "{} full-flex instances, horizon <= 10, {mismatches} mismatches",
            cases.len()
        ),
    )
}

fn storage_feasibility(groups: &[&[Instance]]) -> Verdict {
    let mut worst_balance = 0.0f64;
    let mut violations = Vec::new();
    let mut count = 0;
    for inst in groups.iter().flat_map(|g| g.iter()) {
        count += 1;
        let f = &inst.f;
        for sc in [Scenario::Stor, Scenario::FullFlex] {
            let mut prev = [0.0f64; NODES];
            for (t, step) in inst.steps(sc, f).iter().enumerate() {
                for (i, n) in step.iter().enumerate() {
                    if !(n.storage_level >= 0.0 && n.storage_level <= f.storage_mwh[i]) {
                        violations.push(format!("{sc} t={t} level {}", n.storage_level));
                    }
                    if n.charge > f.charge_mw[i]
                        || n.discharge > f.discharge_mw[i]
                        || n.import > f.transmission_mw
                    {
                        violations.push(format!(
                            "{sc} t={t} flow cap ch {}/{} dis {}/{} imp {}/{}",
                            n.charge,
                            f.charge_mw[i],
                            n.discharge,
                            f.discharge_mw[i],
                            n.import,
                            f.transmission_mw
                        ));
                    }
                    let expected = prev[i] + f.eta_charge * n.charge * f.step_hours
                        - n.discharge * f.step_hours / f.eta_discharge;
                    let err = (n.storage_level - expected).abs();
                    worst_balance = worst_balance.max(err);
                    if err > 1e-9 {
                        violations.push(format!("{sc} t={t} balance off by {err:e}"));
                    }
                    prev[i] = n.storage_level;
                }
            }
        }
    }
    violations.truncate(5);
    Verdict::new(
        violations.is_empty(),
        format!("{count} instances, worst balance error {worst_balance:.2e} MWh, violations {violations:?}"),
    )
}

struct SweepRun {
    prepared: PreparedSweep,
    surface: LossSurface,
    elapsed: Duration,
}

fn coarse_config() -> SweepConfig {
    SweepConfig {
        n_realizations: 50,
        ..SweepConfig::default().coarsened(5)
    }
}

fn run_sweep(config: &SweepConfig, model: &SystemModel, threads: usize) -> SweepRun {
    let exec = RayonExecutor::new(threads).expect("thread pool");
    let started = Instant::now();
    let prepared = PreparedSweep::new(config, model, &exec).expect("valid sweep");
    let surface = prepared.run(&exec).expect("sweep runs");
    SweepRun {
        prepared,
        surface,
        elapsed: started.elapsed(),
    }
}

fn surface_csv(surface: &LossSurface) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    write_surface(&mut w, surface).expect("in-memory write");
    w.into_inner().expect("flush")
}

fn table_one(run: &SweepRun) -> Verdict {
    let optima = argmin_surface(&run.surface, &run.prepared.config.reference_plan).expect("optima");
    let lower = run.prepared.config.grid_nn.min_mw;
    let mut c = Checks::default();
    for o in &optima {
        c.check(
            o.plan.wind_mw[0] == lower,
            format!(
                "(a) {} optimum NN {:.0} MW (grid lower bound {lower:.0}), NS {:.0} MW, improvement {:.1}%",
                o.scenario,
                o.plan.wind_mw[0],
                o.plan.wind_mw[1],
                100.0 * o.improvement
            ),
        );
    }
    let gains: Vec<f64> = Scenario::ALL
        .iter()
        .map(|&sc| {
            optima
                .iter()
                .find(|o| o.scenario == sc)
                .expect("all scenarios swept")
                .improvement
        })
        .collect();
    let ordered = gains.windows(2).all(|w| w[0] < w[1]);
    c.check(
        ordered,
        format!(
            "(b) improvements no-flex < trans < stor < full-flex: {}",
            gains
                .iter()
                .map(|g| format!("{:.1}%", 100.0 * g))
                .collect::<Vec<_>>()
                .join(" < ")
        ),
    );
    c.verdict()
}

fn dominance(run: &SweepRun) -> Verdict {
    let cells = dominance_map(&run.surface.surfaces).expect("dominance");
    let wins = cells
        .iter()
        .filter(|c| c.best == Scenario::FullFlex)
        .count();
    let share = wins as f64 / cells.len() as f64;
    Verdict::new(
        share > 0.8,
        format!(
            "full-flex best on {wins}/{} cells ({:.1}%, needs > 80%)",
            cells.len(),
            100.0 * share
        ),
    )
}

fn determinism(config: &SweepConfig, model: &SystemModel, one_worker: &SweepRun) -> Verdict {
    let reference = surface_csv(&one_worker.surface);
    let mut c = Checks::default();
    for threads in [4, 8] {
        let other = surface_csv(&run_sweep(config, model, threads).surface);
        c.check(
            other == reference,
            format!(
                "{threads} workers identical to 1 worker ({} bytes)",
                reference.len()
            ),
        );
    }
    c.verdict()
}

fn performance(model: &SystemModel, coarse: &SweepRun) -> Verdict {
    let mut c = Checks::default();
    c.check(
        coarse.elapsed <= Duration::from_secs(300),
        format!(
            "coarse sweep {:.1} s (<= 300 s)",
            coarse.elapsed.as_secs_f64()
        ),
    );
    let full = run_sweep(&SweepConfig::default(), model, 0);
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let cfg = &full.prepared.config;
    c.check(
        full.elapsed <= Duration::from_secs(2 * 3600),
        format!(
            "full sweep {}x{} cells x {} scenarios x {} years in {:.1} s on {cores} core(s) (<= 7200 s)",
            cfg.grid_nn.len(),
            cfg.grid_ns.len(),
            cfg.scenarios.len(),
            cfg.n_realizations,
            full.elapsed.as_secs_f64()
        ),
    );
    c.verdict()
}

fn fitting_round_trips() -> Verdict {
    let f = fixture_series(DEFAULT_FIXTURE_SEED);
    let mut c = Checks::default();

    let wind = fit_wind(&f.capacity_factors).expect("wind fit");
    let truth = fixtures::wind_truth();
    let (got, want) = (wind.params.ou(), truth.ou());
    for i in 0..NODES {
        let (a, b) = (wind.params.seasonality()[i], truth.seasonality()[i]);
        let err = (a.a - b.a)
            .abs()
            .max((a.b - b.b).abs())
            .max((a.c - b.c).abs());
        c.check(
            err <= 0.02,
            format!("wind seasonality[{i}] max error {err:.4} (<= 0.02)"),
        );
        let e = (got.lambda()[i] - want.lambda()[i]).abs();
        c.check(
            e <= 0.05,
            format!(
                "lambda[{i}] {:.4} vs {} (<= 0.05)",
                got.lambda()[i],
                want.lambda()[i]
            ),
        );
        let e = (got.jump_intensity()[i] - want.jump_intensity()[i]).abs();
        c.check(
            e <= 0.2,
            format!(
                "nu[{i}] {:.4} vs {} (<= 0.2)",
                got.jump_intensity()[i],
                want.jump_intensity()[i]
            ),
        );
    }
    for (k, (a, b)) in got.sigma().iter().zip(want.sigma()).enumerate() {
        c.check(
            (a - b).abs() <= 0.02,
            format!("sigma[{k}] {a:.4} vs {b} (<= 0.02)"),
        );
    }

    let temp = fit_temperature(&f.temperature).expect("temperature fit");
    for (i, (g, w)) in temp
        .params
        .regions()
        .iter()
        .zip(fixtures::temperature_truth().regions())
        .enumerate()
    {
        let err = (0..3)
            .map(|k| (g.ar[k] - w.ar[k]).abs())
            .fold(0.0, f64::max);
        c.check(err <= 0.05, format!("AR[{i}] max error {err:.4} (<= 0.05)"));
    }

    let load = fit_load(&f.load, &f.temperature, &[]).expect("load fit");
    let rel = |g: f64, w: f64| (g - w).abs() <= 0.02 * w.abs();
    for (i, (g, w)) in load
        .params
        .regions()
        .iter()
        .zip(fixtures::load_truth().regions())
        .enumerate()
    {
        let ok = (0..7).all(|k| rel(g.beta_weekday[k], w.beta_weekday[k]));
        c.check(ok, format!("beta_weekday[{i}] within 2%"));
        c.check(
            rel(g.beta_heating, w.beta_heating),
            format!(
                "beta_heating[{i}] {:.2} vs {} (2%)",
                g.beta_heating, w.beta_heating
            ),
        );
        c.check(
            rel(g.beta_cooling, w.beta_cooling),
            format!(
                "beta_cooling[{i}] {:.2} vs {} (2%)",
                g.beta_cooling, w.beta_cooling
            ),
        );
    }
    c.verdict()
}

fn sensitivity_signs(run: &SweepRun, threads: usize) -> Verdict {
    let exec = RayonExecutor::new(threads).expect("thread pool");
    let spec = |factor, m: Vec<f64>| SensitivitySpec::new(factor, m).expect("valid spec");
    let specs = [
        spec(SensitivityFactor::Transmission, vec![0.5, 1.0]),
        spec(SensitivityFactor::DemandJoint, vec![1.1, 1.0]),
        spec(SensitivityFactor::Storage, vec![1.0]),
        spec(SensitivityFactor::Charging, vec![1.0]),
        spec(SensitivityFactor::DemandNode(0), vec![1.0]),
        spec(SensitivityFactor::DemandNode(1), vec![1.0]),
    ];
    let report =
        sensitivity_prepared(&run.prepared, &run.surface, &specs, &exec).expect("sensitivity");
    let mut c = Checks::default();

    for sc in [Scenario::Trans, Scenario::FullFlex] {
        let base = report
            .baseline
            .iter()
            .find(|o| o.scenario == sc)
            .expect("baseline optimum")
            .plan;
        let half = report
            .rows
            .iter()
            .find(|r| {
                r.factor == SensitivityFactor::Transmission
                    && r.multiplier == 0.5
                    && r.scenario == sc
            })
            .expect("halved transmission row")
            .plan;
        c.check(
            half.wind_mw[1] > base.wind_mw[1],
            format!(
                "{sc} NS optimum {:.0} -> {:.0} MW with halved line",
                base.wind_mw[1], half.wind_mw[1]
            ),
        );
    }

    for row in report
        .rows
        .iter()
        .filter(|r| r.factor == SensitivityFactor::DemandJoint && r.multiplier == 1.1)
    {
        let surplus = north_surplus(&run.prepared, &row.plan);
        c.check(
            surplus > 0.0,
            format!(
                "{} plan over-capacity in NO-N by {surplus:.0} MW",
                row.scenario
            ),
        );
        c.check(
            row.delta_per_node[0] < 0.0,
            format!(
                "{} NO-N penalty change {:.3e} with +10% demand",
                row.scenario, row.delta_per_node[0]
            ),
        );
    }

    let unit: Vec<_> = report.rows.iter().filter(|r| r.multiplier == 1.0).collect();
    let nonzero = unit
        .iter()
        .filter(|r| r.delta_vs_base != 0.0 || r.delta_per_node != [0.0; NODES])
        .count();
    c.check(
        nonzero == 0,
        format!(
            "{} rows at multiplier 1.0, {nonzero} with nonzero delta",
            unit.len()
        ),
    );
    c.verdict()
}

/// Mean northern production minus mean northern demand, demand raised by
/// 10 %, over all draws.
fn north_surplus(prepared: &PreparedSweep, plan: &CapacityPlan) -> f64 {
    let (mut p, mut d) = (0.0, 0.0);
    for r in &prepared.realizations {
        p += stats::mean(&r.production(plan).column(0));
        d += stats::mean(&r.scaled_demand([1.1; NODES]).column(0));
    }
    (p - d) / prepared.realizations.len() as f64
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Verdict)> = Vec::new();
    let mut record = |name, v: Verdict| {
        println!(
            "{} {name}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        results.push((name, v));
    };

    record("moment reproduction", moment_reproduction());

    let dominance_cases = instances(1, 1000, 60);
    let reduction_cases = instances(2, 200, 60);
    let oracle_cases = instances(3, 10_000, 10);
    record("pointwise dominance", pointwise_dominance(&dominance_cases));
    record(
        "degenerate-cap reductions",
        degenerate_reductions(&reduction_cases),
    );
    record("oracle equivalence", oracle_equivalence(&oracle_cases));
    record(
        "storage feasibility and balance",
        storage_feasibility(&[&dominance_cases, &reduction_cases, &oracle_cases]),
    );

    let model = ProjectConfig::default()
        .system_model()
        .expect("shipped defaults");
    let config = coarse_config();
    let coarse = run_sweep(&config, &model, 1);
    record("directional table of optima", table_one(&coarse));
    record("dominance map", dominance(&coarse));
    record(
        "determinism under parallelism",
        determinism(&config, &model, &coarse),
    );
    record("performance", performance(&model, &coarse));
    record("fitting round trips", fitting_round_trips());
    record("sensitivity signs", sensitivity_signs(&coarse, 0));

    let failed = results.iter().filter(|(_, v)| !v.pass).count();
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
