//! The `windflex` command line.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use windflex_core::calendar::DAYS_PER_YEAR;
use windflex_core::demand::{simulate_temperature, synthesize_load};
use windflex_core::dispatch::{aggregate_penalty, dispatch, CapacityPlan, Scenario};
use windflex_core::rng::{Purpose, RealizationSeed};
use windflex_core::sweep::{
    argmin_surface, dominance_map, penalty_profile, sensitivity_prepared, GridAxis, LossSurface,
    PreparedSweep, Realization, SensitivityFactor, SensitivitySpec, SweepConfig, SystemModel,
    WIND_BURN_IN,
};

use crate::checkpoint::{self, Checkpoint, Progress};
use crate::config::ProjectConfig;
use crate::error::{IoError, Result};
use crate::fit;
use crate::fixtures::{self, DEFAULT_FIXTURE_SEED};
use crate::ingest::{date_range, ingest_timeseries, write_timeseries, SeriesKind, TimeSeries};
use crate::output::{self, write_file};
use crate::parallel::RayonExecutor;
use crate::params::{self, DemandParamsFile, WindParamsFile};

#[derive(Debug, Parser)]
#[command(
    name = "windflex",
    version,
    about = "Wind capacity planning under stochastic weather with reactive flexibility"
)]
pub struct Cli {
    /// Project configuration (flat TOML, unit-suffixed keys).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides `master_seed` from the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Sweep worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Also write daily penalty profiles (mean and 10/50/90 % quantiles)
    /// as long-format CSV.
    #[arg(long, global = true)]
    pub emit_plotdata: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate model parameters from data.
    #[command(subcommand)]
    Fit(FitTarget),
    /// Simulate consecutive years of capacity factors, temperature and load.
    Simulate {
        #[arg(long, default_value_t = 100)]
        years: usize,
        /// Calendar year of the first simulated day (January 1).
        #[arg(long, default_value_t = 2001)]
        start_year: i32,
    },
    /// Dispatch one simulated year at one capacity plan and export the trace.
    Dispatch {
        #[arg(long, default_value = "full-flex")]
        scenario: Scenario,
        /// Northern wind capacity; defaults to the reference plan.
        #[arg(long)]
        nn_mw: Option<f64>,
        /// Southern wind capacity; defaults to the reference plan.
        #[arg(long)]
        ns_mw: Option<f64>,
        /// Realization index under the master seed.
        #[arg(long, default_value_t = 0)]
        realization: u64,
    },
    /// Expected-penalty surfaces over the capacity grid.
    Sweep(SweepArgs),
    /// One-factor-at-a-time sensitivity of optima and penalties.
    Sensitivity {
        #[command(flatten)]
        sweep: SweepArgs,
        /// `factor[:m1,m2,...]`, repeatable. Factors: demand_joint,
        /// demand_nn, demand_ns, transmission, storage, charging.
        #[arg(long = "factor")]
        factors: Vec<String>,
    },
    /// Optima and dominance map of a surface file.
    Report {
        #[arg(long)]
        surface: PathBuf,
    },
    /// Write the deterministic synthetic fixture CSVs.
    Fixtures,
}

#[derive(Debug, Subcommand)]
pub enum FitTarget {
    /// Capacity-factor model; writes wind_params.json.
    Wind {
        #[arg(long)]
        data: PathBuf,
    },
    /// Temperature section of the demand parameters; writes demand_params.json.
    Temperature {
        #[arg(long)]
        data: PathBuf,
        /// Demand parameter file whose load section is kept.
        #[arg(long)]
        base: Option<PathBuf>,
    },
    /// Load regression section of the demand parameters; writes demand_params.json.
    Load {
        #[arg(long)]
        data: PathBuf,
        /// Temperature series covering the load period.
        #[arg(long)]
        temperature: PathBuf,
        /// Demand parameter file whose temperature section is kept.
        #[arg(long)]
        base: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Keep every k-th grid point per axis.
    #[arg(long, default_value_t = 1)]
    pub coarse: usize,
    /// Simulated years per grid cell; overrides `n_realizations`.
    #[arg(long)]
    pub realizations: Option<usize>,
    /// Northern axis as `MIN:MAX:POINTS` or a single capacity.
    #[arg(long)]
    pub grid_nn: Option<String>,
    /// Southern axis as `MIN:MAX:POINTS` or a single capacity.
    #[arg(long)]
    pub grid_ns: Option<String>,
    /// Comma-separated scenario list.
    #[arg(long, value_delimiter = ',')]
    pub scenarios: Vec<Scenario>,
    /// Continue from a checkpoint in the output directory.
    #[arg(long)]
    pub resume: bool,
    /// Cells evaluated between checkpoint saves; overrides `checkpoint_every_cells`.
    #[arg(long)]
    pub checkpoint_every: Option<usize>,
}

pub fn parse_axis(spec: &str) -> Result<GridAxis> {
    let bad = |m: String| IoError::invalid("grid", m);
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| bad(format!("`{s}` is not a number in `{spec}`")))
    };
    let axis = match parts.as_slice() {
        [v] => GridAxis::single(num(v)?),
        [a, b, n] => {
            let n: usize = n
                .trim()
                .parse()
                .map_err(|_| bad(format!("`{n}` is not a point count in `{spec}`")))?;
            if n == 1 {
                GridAxis::single(num(a)?)
            } else {
                GridAxis::with_points(num(a)?, num(b)?, n).map_err(|e| IoError::model("grid", e))?
            }
        }
        _ => {
            return Err(bad(format!(
                "`{spec}` is not `MIN:MAX:POINTS` or a single value"
            )))
        }
    };
    axis.validate().map_err(|e| IoError::model("grid", e))?;
    Ok(axis)
}

/// Default variations: demand by ±10 %, flexibility by ±10 %
/// and ±50 %.
pub fn default_sensitivity_specs() -> Vec<SensitivitySpec> {
    let demand = vec![0.9, 1.1];
    let flex = vec![0.5, 0.9, 1.1, 1.5];
    [
        (SensitivityFactor::DemandJoint, &demand),
        (SensitivityFactor::DemandNode(0), &demand),
        (SensitivityFactor::DemandNode(1), &demand),
        (SensitivityFactor::Transmission, &flex),
        (SensitivityFactor::Storage, &flex),
        (SensitivityFactor::Charging, &flex),
    ]
    .into_iter()
    .map(|(f, m)| SensitivitySpec::new(f, m.clone()).expect("valid defaults"))
    .collect()
}

pub fn parse_factor(spec: &str) -> Result<SensitivitySpec> {
    let (name, mults) = spec.split_once(':').unwrap_or((spec, ""));
    let factor: SensitivityFactor = name
        .trim()
        .parse()
        .map_err(|e| IoError::model("--factor", e))?;
    let multipliers = if mults.is_empty() {
        default_sensitivity_specs()
            .into_iter()
            .find(|s| s.factor == factor)
            .map(|s| s.multipliers)
            .unwrap_or_else(|| vec![0.9, 1.1])
    } else {
        mults
            .split(',')
            .map(|m| {
                m.trim()
                    .parse::<f64>()
                    .map_err(|_| IoError::invalid("--factor", format!("`{m}` is not a multiplier")))
            })
            .collect::<Result<Vec<_>>>()?
    };
    SensitivitySpec::new(factor, multipliers).map_err(|e| IoError::model("--factor", e))
}

struct Context {
    config: ProjectConfig,
    out: PathBuf,
    threads: usize,
    emit_plotdata: bool,
}

impl Context {
    fn new(cli: &Cli) -> Result<Self> {
        let mut config = match &cli.config {
            Some(p) => ProjectConfig::load(p)?,
            None => ProjectConfig::default(),
        };
        if let Some(seed) = cli.seed {
            config.master_seed = seed;
        }
        fs::create_dir_all(&cli.out).map_err(|e| IoError::io(&cli.out, e))?;
        Ok(Context {
            config,
            out: cli.out.clone(),
            threads: cli.threads,
            emit_plotdata: cli.emit_plotdata,
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn sweep_config(&self, args: &SweepArgs) -> Result<SweepConfig> {
        let mut cfg = self.config.sweep_config("config")?;
        if let Some(s) = &args.grid_nn {
            cfg.grid_nn = parse_axis(s)?;
        }
        if let Some(s) = &args.grid_ns {
            cfg.grid_ns = parse_axis(s)?;
        }
        if args.coarse == 0 {
            return Err(IoError::invalid("--coarse", "must be at least 1"));
        }
        if args.coarse > 1 {
            cfg = cfg.coarsened(args.coarse);
        }
        if let Some(n) = args.realizations {
            cfg.n_realizations = n;
        }
        if !args.scenarios.is_empty() {
            cfg.scenarios = args.scenarios.clone();
        }
        cfg.validate()
            .map_err(|e| IoError::model("sweep configuration", e))?;
        Ok(cfg)
    }
}

/// Run a parsed command line.
pub fn run(cli: &Cli) -> Result<()> {
    let ctx = Context::new(cli)?;
    match &cli.command {
        Command::Fit(target) => run_fit(&ctx, target),
        Command::Simulate { years, start_year } => run_simulate(&ctx, *years, *start_year),
        Command::Dispatch {
            scenario,
            nn_mw,
            ns_mw,
            realization,
        } => run_dispatch(&ctx, *scenario, *nn_mw, *ns_mw, *realization),
        Command::Sweep(args) => run_sweep(&ctx, args),
        Command::Sensitivity { sweep, factors } => run_sensitivity(&ctx, sweep, factors),
        Command::Report { surface } => run_report(&ctx, surface),
        Command::Fixtures => {
            let seed = cli.seed.unwrap_or(DEFAULT_FIXTURE_SEED);
            let paths = fixtures::generate_fixtures(seed, &ctx.out)?;
            println!(
                "wrote {}, {}, {} (seed {seed})",
                paths.capacity_factors.display(),
                paths.temperature.display(),
                paths.load.display()
            );
            Ok(())
        }
    }
}

fn base_demand(ctx: &Context, base: &Option<PathBuf>) -> Result<DemandParamsFile> {
    match base {
        Some(p) => params::load_demand(p),
        None => ctx.config.demand_file(),
    }
}

fn run_fit(ctx: &Context, target: &FitTarget) -> Result<()> {
    match target {
        FitTarget::Wind { data } => {
            let series = ingest_timeseries(data, SeriesKind::CapacityFactor)?;
            let fit = fit::fit_wind(&series)?;
            if let Some(r) = fit.fallback_residual {
                eprintln!(
                    "warning: exact moment match failed, using least-squares fit (residual {r:e})"
                );
            }
            if let Some(ou) = &fit.ou {
                println!(
                    "latent AR(1) slopes {:?}, model minus sample skewness {:?}",
                    ou.slopes, ou.skewness_error
                );
            }
            let path = ctx.path("wind_params.json");
            params::save_json(
                &path,
                &WindParamsFile::from_model(&fit.params, &series.regions),
            )?;
            println!("wrote {}", path.display());
        }
        FitTarget::Temperature { data, base } => {
            let series = ingest_timeseries(data, SeriesKind::Temperature)?;
            let fit = fit::fit_temperature(&series)?;
            let mut file = base_demand(ctx, base)?;
            file.temperature = DemandParamsFile::from_models(
                &fit.params,
                &file.load_model("base")?,
                &series.regions,
            )
            .temperature;
            file.regions = series.regions.clone();
            let path = ctx.path("demand_params.json");
            params::save_json(&path, &file)?;
            println!("wrote {}", path.display());
        }
        FitTarget::Load {
            data,
            temperature,
            base,
        } => {
            let load = ingest_timeseries(data, SeriesKind::Load)?;
            let temps = ingest_timeseries(temperature, SeriesKind::Temperature)?;
            let fit = fit::fit_load(&load, &temps, &ctx.config.holidays_doy)?;
            println!(
                "residual std {:?} MW, heating {:?}, cooling {:?}",
                fit.residual_std, fit.heating, fit.cooling
            );
            let mut file = base_demand(ctx, base)?;
            file.load_regression = DemandParamsFile::from_models(
                &file.temperature_model("base")?,
                &fit.params,
                &load.regions,
            )
            .load_regression;
            file.regions = load.regions.clone();
            let path = ctx.path("demand_params.json");
            params::save_json(&path, &file)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn region_names(wind: &WindParamsFile) -> Vec<String> {
    if wind.regions.len() == wind.lambda.len() {
        wind.regions.clone()
    } else {
        fixtures::regions()
    }
}

fn write_series(path: &Path, series: &TimeSeries) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| IoError::io(path, e))?;
    write_timeseries(std::io::BufWriter::new(file), series)
        .map_err(|e| IoError::io(path, std::io::Error::other(e.to_string())))
}

fn run_simulate(ctx: &Context, years: usize, start_year: i32) -> Result<()> {
    if years == 0 {
        return Err(IoError::invalid("--years", "must be at least 1"));
    }
    let start = NaiveDate::from_ymd_opt(start_year, 1, 1)
        .ok_or_else(|| IoError::invalid("--start-year", format!("{start_year} is out of range")))?;
    let model = ctx.config.system_model()?;
    let regions = region_names(&ctx.config.wind_file()?);
    let seed = RealizationSeed::new(ctx.config.master_seed, 0);
    let n = years * DAYS_PER_YEAR;
    let dates = date_range(start, n);
    let make = |kind, values| TimeSeries::new(kind, regions.clone(), dates.clone(), values);

    let cf = model
        .wind
        .simulate(n, 1, WIND_BURN_IN, &mut seed.stream(Purpose::Wind));
    let temps = simulate_temperature(
        &model.demand.temperature,
        years,
        &mut seed.stream(Purpose::Temperature),
    );
    let temp_series = make(SeriesKind::Temperature, temps)?;
    let load = synthesize_load(
        &model.demand.load,
        &temp_series.values,
        &temp_series.calendar(&model.demand.holidays),
        model.demand.coverage_share,
    )
    .map_err(|e| IoError::model("simulate", e))?;

    let outputs = [
        (
            "simulated_cf.csv",
            make(SeriesKind::CapacityFactor, cf.into_values())?,
        ),
        ("simulated_temperature.csv", temp_series),
        ("simulated_load.csv", make(SeriesKind::Load, load.values)?),
    ];
    for (name, series) in &outputs {
        write_series(&ctx.path(name), series)?;
        println!("wrote {}", ctx.path(name).display());
    }
    if load.floored > 0 {
        eprintln!(
            "note: {} load values were negative and floored at 0",
            load.floored
        );
    }
    Ok(())
}

fn run_dispatch(
    ctx: &Context,
    scenario: Scenario,
    nn: Option<f64>,
    ns: Option<f64>,
    k: u64,
) -> Result<()> {
    let model = ctx.config.system_model()?;
    let reference = ctx
        .config
        .reference_plan()
        .map_err(|e| IoError::model("config", e))?;
    let plan = CapacityPlan::new(
        nn.unwrap_or(reference.wind_mw[0]),
        ns.unwrap_or(reference.wind_mw[1]),
    )
    .map_err(|e| IoError::model("--nn-mw/--ns-mw", e))?;
    let realization = Realization::draw(&model, RealizationSeed::new(ctx.config.master_seed, k));
    let flex = ctx.config.flex();
    let trace = dispatch(
        scenario,
        &realization.production(&plan),
        &realization.demand_mw,
        &flex,
    )
    .map_err(|e| IoError::model("dispatch", e))?;
    let penalty = aggregate_penalty(&trace).map_err(|e| IoError::model("dispatch", e))?;
    let path = ctx.path("trace.csv");
    write_file(&path, |w| output::write_trace(w, &trace))?;
    println!(
        "{scenario} at ({}, {}) MW: penalty {:e} (nn {:e}, ns {:e}); wrote {}",
        plan.wind_mw[0],
        plan.wind_mw[1],
        penalty.total,
        penalty.per_node[0],
        penalty.per_node[1],
        path.display()
    );
    Ok(())
}

fn run_key(cfg: &SweepConfig, model: &SystemModel) -> String {
    format!("{cfg:?}|{model:?}")
}

/// Draw realizations and evaluate the grid, honouring checkpoints.
fn prepared_surface(
    ctx: &Context,
    args: &SweepArgs,
) -> Result<(PreparedSweep, LossSurface, RayonExecutor)> {
    let cfg = ctx.sweep_config(args)?;
    let model = ctx.config.system_model()?;
    let exec = RayonExecutor::new(ctx.threads)?;
    let prepared =
        PreparedSweep::new(&cfg, &model, &exec).map_err(|e| IoError::model("sweep", e))?;
    let cp = Checkpoint {
        path: checkpoint::default_path(&ctx.out),
        every: args
            .checkpoint_every
            .unwrap_or(ctx.config.checkpoint_every_cells),
        key: run_key(&cfg, &model),
    };
    if !args.resume && cp.path.exists() {
        fs::remove_file(&cp.path).map_err(|e| IoError::io(&cp.path, e))?;
    }
    let surface = match cp.run(&prepared, &exec, None)? {
        Progress::Complete(s) => s,
        Progress::Partial { done, total } => {
            return Err(IoError::invalid(
                "sweep",
                format!("stopped after {done} of {total} cells"),
            ))
        }
    };
    Ok((prepared, surface, exec))
}

fn print_optima(optima: &[windflex_core::sweep::Optimum]) {
    for o in optima {
        println!(
            "{:>9}: optimum ({}, {}) MW, penalty {:.4e}, improvement {:.1}% (own reference {:.1}%)",
            o.scenario.label(),
            o.plan.wind_mw[0],
            o.plan.wind_mw[1],
            o.stats.expected,
            100.0 * o.improvement,
            100.0 * o.improvement_own
        );
    }
}

fn run_sweep(ctx: &Context, args: &SweepArgs) -> Result<()> {
    let (prepared, surface, _) = prepared_surface(ctx, args)?;
    let cfg = &prepared.config;
    let path = ctx.path("surface.csv");
    write_file(&path, |w| output::write_surface(w, &surface))?;
    let optima =
        argmin_surface(&surface, &cfg.reference_plan).map_err(|e| IoError::model("sweep", e))?;
    let opt_path = ctx.path("optima.csv");
    write_file(&opt_path, |w| output::write_optima(w, &optima))?;
    print_optima(&optima);
    println!("wrote {} and {}", path.display(), opt_path.display());
    if ctx.emit_plotdata {
        let mut profiles = Vec::new();
        for o in &optima {
            for plan in [cfg.reference_plan, o.plan] {
                let p = penalty_profile(&prepared.realizations, &plan, o.scenario, &cfg.base_flex)
                    .map_err(|e| IoError::model("plotdata", e))?;
                profiles.push((o.scenario, plan.wind_mw, p));
            }
        }
        let pd = ctx.path("plotdata.csv");
        write_file(&pd, |w| output::write_plotdata(w, &profiles))?;
        println!("wrote {}", pd.display());
    }
    Ok(())
}

fn run_sensitivity(ctx: &Context, args: &SweepArgs, factors: &[String]) -> Result<()> {
    let specs = if factors.is_empty() {
        default_sensitivity_specs()
    } else {
        factors
            .iter()
            .map(|f| parse_factor(f))
            .collect::<Result<Vec<_>>>()?
    };
    let (prepared, surface, exec) = prepared_surface(ctx, args)?;
    let report = sensitivity_prepared(&prepared, &surface, &specs, &exec)
        .map_err(|e| IoError::model("sensitivity", e))?;
    let path = ctx.path("sensitivity.csv");
    write_file(&path, |w| output::write_sensitivity(w, &report))?;
    print_optima(&report.baseline);
    println!(
        "{} sensitivity rows; wrote {}",
        report.rows.len(),
        path.display()
    );
    Ok(())
}

fn run_report(ctx: &Context, surface_path: &Path) -> Result<()> {
    let surface = output::load_surface(surface_path)?;
    let reference = ctx
        .config
        .reference_plan()
        .map_err(|e| IoError::model("config", e))?;
    let optima = argmin_surface(&surface, &reference).map_err(|e| IoError::model("report", e))?;
    let cells = dominance_map(&surface.surfaces).map_err(|e| IoError::model("report", e))?;
    let dom = ctx.path("dominance.csv");
    write_file(&dom, |w| output::write_dominance(w, &cells))?;
    let opt = ctx.path("optima.csv");
    write_file(&opt, |w| output::write_optima(w, &optima))?;
    print_optima(&optima);
    for sc in Scenario::ALL {
        let n = cells.iter().filter(|c| c.best == sc).count();
        if n > 0 {
            println!("{:>9} best on {n} of {} cells", sc.label(), cells.len());
        }
    }
    println!("wrote {} and {}", dom.display(), opt.display());
    Ok(())
}
