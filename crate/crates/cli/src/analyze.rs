use std::path::PathBuf;

use clap::{Args, ValueEnum};
use dpxa_core::report::{document, fit_table, rho_table, surface_table};
use dpxa_core::table::Table;
use dpxa_core::{
    dcca, dfa, fluctuation_dpxa, rho_curve, DetrendConfig, ForceMatrix, QGrid, ScaleGrid,
    ScalingFit,
};
use serde::Serialize;
use serde_json::json;

use crate::output::{with_ext, write_file};
use crate::{usage_error, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Dfa,
    Dcca,
    Dpxa,
    Mfdfa,
    Mfdcca,
    Mfdpxa,
    RhoDcca,
    RhoDpxa,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Dfa => "dfa",
            Method::Dcca => "dcca",
            Method::Dpxa => "dpxa",
            Method::Mfdfa => "mfdfa",
            Method::Mfdcca => "mfdcca",
            Method::Mfdpxa => "mfdpxa",
            Method::RhoDcca => "rho-dcca",
            Method::RhoDpxa => "rho-dpxa",
        }
    }

    fn multifractal(self) -> bool {
        matches!(self, Method::Mfdfa | Method::Mfdcca | Method::Mfdpxa)
    }

    fn uses_forces(self) -> bool {
        matches!(self, Method::Dpxa | Method::Mfdpxa | Method::RhoDpxa)
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    method: Method,

    /// Headered CSV input, one series per column.
    #[arg(long, short)]
    input: PathBuf,

    /// Column for single-series methods (defaults to the first column).
    #[arg(long)]
    col: Option<String>,
    #[arg(long, default_value = "x")]
    x: String,
    #[arg(long, default_value = "y")]
    y: String,
    /// External force columns for DPXA methods (repeatable).
    #[arg(long, default_values_t = vec!["z".to_string()])]
    z: Vec<String>,

    /// Explicit comma-separated window sizes; overrides the log-spaced grid.
    #[arg(long, value_delimiter = ',')]
    scales: Option<Vec<usize>>,
    #[arg(long, default_value_t = dpxa_core::types::DEFAULT_MIN_SCALE)]
    min_scale: usize,
    /// Largest window (defaults to a quarter of the series length).
    #[arg(long)]
    max_scale: Option<usize>,
    #[arg(long, default_value_t = dpxa_core::types::DEFAULT_SCALE_COUNT)]
    scale_count: usize,

    /// Order grid for the multifractal methods.
    #[arg(long, default_value_t = -4.0, allow_hyphen_values = true)]
    q_min: f64,
    #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
    q_max: f64,
    #[arg(long, default_value_t = 17)]
    q_count: usize,

    /// Polynomial detrending order.
    #[arg(long, default_value_t = 1)]
    order: usize,
    /// Detrend with a centered moving average instead of a polynomial.
    #[arg(long)]
    moving_average: bool,
    /// Regress on the forces without an intercept column.
    #[arg(long)]
    no_intercept: bool,

    /// Smallest window of the log-log fit.
    #[arg(long)]
    fit_min: Option<usize>,
    /// Largest window of the log-log fit.
    #[arg(long)]
    fit_max: Option<usize>,

    /// Output prefix: writes PREFIX.csv and PREFIX.json.
    #[arg(long, short, default_value = "analysis")]
    out: PathBuf,
}

#[derive(Debug, Serialize)]
struct RunConfig<'a> {
    method: Method,
    input: String,
    columns: Vec<&'a str>,
    forces: Vec<&'a str>,
    series_length: usize,
    scales: &'a ScaleGrid,
    orders: Option<&'a QGrid>,
    detrend: DetrendConfig,
    fit_range: Option<(usize, usize)>,
}

fn detrend_config(args: &AnalyzeArgs) -> DetrendConfig {
    let mut cfg = if args.moving_average {
        DetrendConfig::moving_average()
    } else {
        DetrendConfig::polynomial(args.order)
    };
    if args.no_intercept {
        cfg = cfg.without_intercept();
    }
    cfg
}

fn scale_grid(args: &AnalyzeArgs, len: usize) -> CliResult<ScaleGrid> {
    let grid = match &args.scales {
        Some(list) => ScaleGrid::new(list.clone())?,
        None => {
            let max = args.max_scale.unwrap_or(len / 4);
            ScaleGrid::log_spaced(args.min_scale, max, args.scale_count)?
        }
    };
    grid.check_against(len)?;
    Ok(grid)
}

fn fit_range(args: &AnalyzeArgs) -> CliResult<Option<(usize, usize)>> {
    match (args.fit_min, args.fit_max) {
        (None, None) => Ok(None),
        (lo, hi) => {
            let lo = lo.unwrap_or(0);
            let hi = hi.unwrap_or(usize::MAX);
            if lo > hi {
                return Err(usage_error("--fit-min", "exceeds --fit-max"));
            }
            Ok(Some((lo, hi)))
        }
    }
}

pub fn run(args: AnalyzeArgs) -> CliResult<()> {
    let table = Table::read_path(&args.input)?;
    let method = args.method;
    let cfg = detrend_config(&args);
    let range = fit_range(&args)?;

    let first = table.names().first().cloned().unwrap_or_default();
    let columns: Vec<&str> = match method {
        Method::Dfa | Method::Mfdfa => vec![args.col.as_deref().unwrap_or(&first)],
        _ => vec![args.x.as_str(), args.y.as_str()],
    };
    let forces_named: Vec<&str> = if method.uses_forces() {
        if args.z.is_empty() {
            return Err(usage_error(
                "--z",
                "DPXA methods need at least one force column",
            ));
        }
        args.z.iter().map(String::as_str).collect()
    } else {
        Vec::new()
    };
    let series = columns
        .iter()
        .map(|c| table.series(c))
        .collect::<dpxa_core::Result<Vec<_>>>()?;
    let forces = ForceMatrix::new(
        forces_named
            .iter()
            .map(|c| table.series(c))
            .collect::<dpxa_core::Result<Vec<_>>>()?,
    )?;
    let len = series[0].len();
    let grid = scale_grid(&args, len)?;
    let orders = if method.multifractal() {
        QGrid::linspace(args.q_min, args.q_max, args.q_count)?
    } else {
        QGrid::second_order()
    };
    let config = RunConfig {
        method,
        input: args.input.display().to_string(),
        columns: columns.clone(),
        forces: forces_named.clone(),
        series_length: len,
        scales: &grid,
        orders: (!matches!(method, Method::RhoDcca | Method::RhoDpxa)).then_some(&orders),
        detrend: cfg,
        fit_range: range,
    };
    let kind = format!("analyze-{}", method.name());

    if matches!(method, Method::RhoDcca | Method::RhoDpxa) {
        let curve = rho_curve(&series[0], &series[1], &forces, &grid, &cfg)?;
        write_file(
            &with_ext(&args.out, "csv"),
            &rho_table(&curve).to_csv_string()?,
        )?;
        let mean = curve.rho.iter().sum::<f64>() / curve.rho.len() as f64;
        let result = json!({ "kind": curve.kind, "scales": curve.scales, "rho": curve.rho, "mean_rho": mean });
        write_file(
            &with_ext(&args.out, "json"),
            &document(&kind, &config, &result)?,
        )?;
        println!(
            "{}: mean ρ over {} scales = {mean:.4}",
            method.name(),
            curve.rho.len()
        );
        return Ok(());
    }

    let surface = match method {
        Method::Dfa | Method::Mfdfa => dfa(&series[0], &grid, &orders, &cfg)?,
        Method::Dcca | Method::Mfdcca => dcca(&series[0], &series[1], &grid, &orders, &cfg)?,
        _ => fluctuation_dpxa(&series[0], &series[1], &forces, &grid, &orders, &cfg)?,
    };
    let fit = ScalingFit::analyze(&surface, range)?;
    for w in &fit.warnings {
        log::warn!("{w}");
    }
    write_file(
        &with_ext(&args.out, "csv"),
        &surface_table(&surface).to_csv_string()?,
    )?;
    write_file(
        &with_ext(&args.out, "fit.csv"),
        &fit_table(&fit).to_csv_string()?,
    )?;
    let result = json!({ "fit": fit, "surface": surface });
    write_file(
        &with_ext(&args.out, "json"),
        &document(&kind, &config, &result)?,
    )?;
    match fit.h_at(2.0) {
        Some(h) => println!("{}: h(2) = {h:.4}", method.name()),
        None => println!(
            "{}: h(q) over q ∈ [{}, {}] written to {}",
            method.name(),
            args.q_min,
            args.q_max,
            with_ext(&args.out, "json").display()
        ),
    }
    Ok(())
}
