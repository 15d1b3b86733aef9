use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn windflex(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_windflex"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn data_rows(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(str::to_string)
        .collect()
}

#[test]
fn single_cell_sweep_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = windflex(
        dir.path(),
        &[
            "sweep",
            "--grid-nn",
            "3250",
            "--grid-ns",
            "1800",
            "--realizations",
            "1",
            "--scenarios",
            "no-flex",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = data_rows(&dir.path().join("surface.csv"));
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("3250,1800,no-flex,"));
    let header = fs::read_to_string(dir.path().join("surface.csv")).unwrap();
    assert!(header.starts_with(
        "wind_nn_mw,wind_ns_mw,scenario,expected_penalty,penalty_nn,penalty_ns,stderr\n"
    ));
}

#[test]
fn report_writes_one_dominance_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = windflex(
        dir.path(),
        &[
            "sweep",
            "--grid-nn",
            "3250:6000:3",
            "--grid-ns",
            "1800:10000:4",
            "--realizations",
            "2",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(data_rows(&dir.path().join("surface.csv")).len(), 3 * 4 * 4);
    let surface = dir.path().join("surface.csv");
    let rep = tempfile::tempdir().unwrap();
    let out = windflex(
        rep.path(),
        &["report", "--surface", surface.to_str().unwrap()],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let dom = fs::read_to_string(rep.path().join("dominance.csv")).unwrap();
    assert!(dom.starts_with("wind_nn_mw,wind_ns_mw,best,second_best\n"));
    assert_eq!(dom.lines().count() - 1, 12);
    // the optima computed from the file equal those of the sweep itself
    assert_eq!(
        fs::read(dir.path().join("optima.csv")).unwrap(),
        fs::read(rep.path().join("optima.csv")).unwrap()
    );
}

#[test]
fn simulate_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = windflex(d.path(), &["--seed", "42", "simulate", "--years", "100"]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    for f in [
        "simulated_cf.csv",
        "simulated_temperature.csv",
        "simulated_load.csv",
    ] {
        let x = fs::read(a.path().join(f)).unwrap();
        assert_eq!(x, fs::read(b.path().join(f)).unwrap(), "{f}");
        assert_eq!(x.iter().filter(|&&c| c == b'\n').count(), 1 + 100 * 365);
    }
    let c = tempfile::tempdir().unwrap();
    windflex(c.path(), &["--seed", "43", "simulate", "--years", "2"]);
    let d = tempfile::tempdir().unwrap();
    windflex(d.path(), &["--seed", "42", "simulate", "--years", "2"]);
    assert_ne!(
        fs::read(c.path().join("simulated_cf.csv")).unwrap(),
        fs::read(d.path().join("simulated_cf.csv")).unwrap()
    );
}

#[test]
fn dispatch_exports_a_full_year_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = windflex(
        dir.path(),
        &[
            "dispatch",
            "--scenario",
            "stor",
            "--nn-mw",
            "4000",
            "--ns-mw",
            "3000",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with(
        "t,node,production,demand,import,export,charge,discharge,storage_level,loss,scenario\n"
    ));
    assert_eq!(trace.lines().count(), 1 + 365 * 2);
    assert!(trace.lines().skip(1).all(|l| l.ends_with(",stor")));
}

#[test]
fn fit_pipeline_reproduces_shipped_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(windflex(p, &["fixtures"]).status.success());
    let cf = p.join("synthetic_cf.csv");
    let temp = p.join("synthetic_temperature.csv");
    let load = p.join("synthetic_load.csv");
    assert!(
        windflex(p, &["fit", "wind", "--data", cf.to_str().unwrap()])
            .status
            .success()
    );
    assert!(
        windflex(p, &["fit", "temperature", "--data", temp.to_str().unwrap()])
            .status
            .success()
    );
    let demand = p.join("demand_params.json");
    let out = windflex(
        p,
        &[
            "fit",
            "load",
            "--data",
            load.to_str().unwrap(),
            "--temperature",
            temp.to_str().unwrap(),
            "--base",
            demand.to_str().unwrap(),
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        fs::read_to_string(p.join("wind_params.json")).unwrap(),
        windflex::params::DEFAULT_WIND_JSON
    );
    assert_eq!(
        fs::read_to_string(demand).unwrap(),
        windflex::params::DEFAULT_DEMAND_JSON
    );
}

#[test]
fn config_file_drives_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("project.toml");
    fs::write(
        &cfg,
        "master_seed = 7\ngrid_nn_min_mw = 3250.0\ngrid_nn_max_mw = 3250.0\ngrid_nn_points = 1\n\
         grid_ns_min_mw = 2000.0\ngrid_ns_max_mw = 2000.0\ngrid_ns_points = 1\nn_realizations = 3\n\
         scenarios = [\"trans\"]\n",
    )
    .unwrap();
    let out = windflex(dir.path(), &["--config", cfg.to_str().unwrap(), "sweep"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = data_rows(&dir.path().join("surface.csv"));
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("3250,2000,trans,"));
}

#[test]
fn exit_codes_separate_validation_and_runtime_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad_cfg = dir.path().join("bad.toml");
    fs::write(&bad_cfg, "transmission_mw = -5.0\n").unwrap();
    let out = windflex(
        dir.path(),
        &["--config", bad_cfg.to_str().unwrap(), "sweep"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.toml"));

    let bad_csv = dir.path().join("cf.csv");
    fs::write(&bad_csv, "date,a,b\n2001-01-01,0.2,1.2\n").unwrap();
    let out = windflex(
        dir.path(),
        &["fit", "wind", "--data", bad_csv.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2, column b"));

    // unknown subcommand is a usage error
    let out = windflex(dir.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));

    // unreadable input is a runtime failure
    let out = windflex(
        dir.path(),
        &[
            "fit",
            "wind",
            "--data",
            dir.path().join("missing.csv").to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(2));

    let out = windflex(dir.path(), &["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn plotdata_is_long_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = windflex(
        dir.path(),
        &[
            "--emit-plotdata",
            "sweep",
            "--grid-nn",
            "3250",
            "--grid-ns",
            "1800:2200:2",
            "--realizations",
            "5",
            "--scenarios",
            "stor",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let pd = fs::read_to_string(dir.path().join("plotdata.csv")).unwrap();
    assert!(pd.starts_with("scenario,wind_nn_mw,wind_ns_mw,day,statistic,value\n"));
    // reference plan and optimum, 365 days, four statistics
    assert_eq!(pd.lines().count() - 1, 2 * 365 * 4);
}

#[test]
fn sensitivity_unit_multiplier_has_zero_deltas() {
    let dir = tempfile::tempdir().unwrap();
    let out = windflex(
        dir.path(),
        &[
            "sensitivity",
            "--grid-nn",
            "3250:4000:2",
            "--grid-ns",
            "1800:3000:2",
            "--realizations",
            "3",
            "--factor",
            "transmission:1",
            "--factor",
            "demand_joint:1",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = data_rows(&dir.path().join("sensitivity.csv"));
    assert_eq!(rows.len(), 4 + 2 * 4);
    assert!(rows.iter().all(|r| r.ends_with(",0")), "{rows:?}");
}
