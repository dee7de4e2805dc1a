use std::path::PathBuf;

use clap::{Args, Subcommand};
use dpxa_core::experiments::model_series;
use dpxa_core::report::document;
use dpxa_core::table::Table;
use dpxa_core::{
    gen_bfbm_increments, gen_binomial, gen_fgn, BfbmSpec, BinomialSpec, ContaminationSpec, Error,
    FgnSpec, TimeSeries,
};
use serde_json::json;

use crate::output::write_file;
use crate::{usage_error, CliError, CliResult};

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(subcommand)]
    kind: GenKind,

    /// CSV output path; the JSON sidecar goes next to it with a .json extension.
    #[arg(long, short, global = true, default_value = "series.csv")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum GenKind {
    /// Fractional Gaussian noise (column `z`).
    Fgn {
        #[arg(long)]
        hurst: f64,
        #[arg(long, default_value_t = 65536)]
        length: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Increments of bivariate fractional Brownian motion (columns `r_x`, `r_y`).
    Bfbm {
        #[arg(long)]
        hx: f64,
        #[arg(long)]
        hy: f64,
        /// Zero-lag correlation of the two components.
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 65536)]
        length: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Deterministic binomial measure with 2^depth cells (column `mu`).
    Binomial {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 16)]
        depth: u32,
    },
    /// Two series sharing a common driver: x = b0 + b1 z + r_x and
    /// y = b0 + b1 z + r_y (columns `x`, `y`, `z`, `r_x`, `r_y`).
    Model {
        #[arg(long)]
        hrx: f64,
        #[arg(long)]
        hry: f64,
        #[arg(long)]
        hz: f64,
        #[arg(long, default_value_t = 0.5)]
        rho: f64,
        #[arg(long, default_value_t = 16384)]
        length: usize,
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        beta0: f64,
        #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
        beta1: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Maps a generator parameter to the flag that sets it.
fn flag_for(param: &str) -> &'static str {
    match param {
        "hurst" => "--hurst",
        "hurst_x" => "--hx",
        "hurst_y" => "--hy",
        "corr" => "--rho",
        "multiplier" => "--p",
        "length" => "--length",
        "contamination" => "--beta0/--beta1",
        _ => "<parameter>",
    }
}

fn as_usage(e: Error) -> CliError {
    match e {
        Error::InvalidParameter { name, reason } => usage_error(flag_for(name), reason),
        other => CliError::Core(other),
    }
}

pub fn run(args: GenArgs) -> CliResult<()> {
    let (kind, config, series): (&str, serde_json::Value, Vec<TimeSeries>) = match args.kind {
        GenKind::Fgn {
            hurst,
            length,
            seed,
        } => {
            let spec = FgnSpec {
                hurst,
                length,
                seed,
            };
            spec.validate().map_err(as_usage)?;
            let z = gen_fgn(&spec)?;
            ("gen-fgn", json!(spec), vec![z.with_label("z")])
        }
        GenKind::Bfbm {
            hx,
            hy,
            rho,
            length,
            seed,
        } => {
            let spec = BfbmSpec {
                hurst_x: hx,
                hurst_y: hy,
                corr: rho,
                length,
                seed,
            };
            spec.validate().map_err(as_usage)?;
            let (rx, ry) = gen_bfbm_increments(&spec)?;
            ("gen-bfbm", json!(spec), vec![rx, ry])
        }
        GenKind::Binomial { p, depth } => {
            let spec = BinomialSpec {
                multiplier: p,
                depth,
            };
            spec.validate().map_err(as_usage)?;
            let mu = gen_binomial(&spec)?;
            ("gen-binomial", json!(spec), vec![mu.with_label("mu")])
        }
        GenKind::Model {
            hrx,
            hry,
            hz,
            rho,
            length,
            beta0,
            beta1,
            seed,
        } => {
            let beta = ContaminationSpec {
                intercept: beta0,
                slope: beta1,
            };
            beta.validate().map_err(as_usage)?;
            for (flag, h) in [("--hrx", hrx), ("--hry", hry), ("--hz", hz)] {
                if !(h > 0.0 && h < 1.0) {
                    return Err(usage_error(flag, format!("{h} is outside (0, 1)")));
                }
            }
            BfbmSpec {
                hurst_x: hrx,
                hurst_y: hry,
                corr: rho,
                length,
                seed,
            }
            .validate()
            .map_err(as_usage)?;
            let series = model_series([hrx, hry, hz], rho, length, beta, seed)?;
            let config = json!({
                "hurst_rx": hrx,
                "hurst_ry": hry,
                "hurst_z": hz,
                "corr": rho,
                "length": length,
                "beta": beta,
                "seed": seed,
            });
            ("gen-model", config, series.to_vec())
        }
    };

    let mut table = Table::new();
    for (i, s) in series.into_iter().enumerate() {
        let name = s.label.clone().unwrap_or_else(|| format!("s{}", i + 1));
        table.push(name, s.values)?;
    }
    write_file(&args.out, &table.to_csv_string()?)?;
    let summary = json!({
        "rows": table.rows(),
        "columns": table.names(),
        "csv": args.out.display().to_string(),
    });
    write_file(
        &args.out.with_extension("json"),
        &document(kind, &config, &summary)?,
    )?;
    Ok(())
}
