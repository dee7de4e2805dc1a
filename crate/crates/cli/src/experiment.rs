use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use dpxa_core::experiments::{
    mf_checks, rho_checks, run_mf_recovery, run_rho_comparison, run_sweep, sweep_checks, Check,
    MfSpec, RhoSpec, SweepSpec,
};
use dpxa_core::report::{document, mf_csv, rho_comparison_csv, summary, sweep_csv};
use dpxa_core::Error;
use serde::de::DeserializeOwned;

use crate::output::write_file;
use crate::{usage_error, CliError, CliResult};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Experiment {
    /// Exponent sweep over Hurst triples with the recovery regression.
    Sweep,
    /// DCCA vs DPXA correlation coefficients.
    Rho,
    /// Multifractal recovery on binomial measures.
    Mf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    name: Experiment,

    /// Built-in parameter set: `desk` or `full` (sweep), `masked-desk` (rho),
    /// `binomial-desk` (mf). Used when no --spec is given.
    #[arg(long)]
    preset: Option<String>,

    /// JSON spec file; its fields replace a preset entirely.
    #[arg(long, conflicts_with = "preset")]
    spec: Option<PathBuf>,

    /// Overrides the base seed of the spec.
    #[arg(long)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, short, default_value = "results")]
    out: PathBuf,

    /// Exit with status 1 if any check fails.
    #[arg(long)]
    strict: bool,
}

fn load_spec<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::from(e).context(format!("reading {}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Core(Error::from(e).context(format!("parsing {}", path.display()))))
}

type Preset<T> = (&'static str, fn() -> T);

fn resolve<T: DeserializeOwned>(args: &ExperimentArgs, presets: &[Preset<T>]) -> CliResult<T> {
    if let Some(path) = &args.spec {
        return load_spec(path);
    }
    let name = args.preset.as_deref().unwrap_or(presets[0].0);
    presets
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, f)| f())
        .ok_or_else(|| {
            let known: Vec<&str> = presets.iter().map(|p| p.0).collect();
            usage_error(
                "--preset",
                format!(
                    "unknown preset `{name}` (expected one of: {})",
                    known.join(", ")
                ),
            )
        })
}

fn finish(
    args: &ExperimentArgs,
    stem: &str,
    json: String,
    csv: String,
    checks: Vec<Check>,
) -> CliResult<()> {
    write_file(&args.out.join(format!("{stem}.json")), &json)?;
    write_file(&args.out.join(format!("{stem}.csv")), &csv)?;
    let text = summary(stem, &checks);
    write_file(&args.out.join(format!("{stem}-summary.txt")), &text)?;
    print!("{text}");
    let failed = checks.iter().filter(|c| !c.pass).count();
    if args.strict && failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(())
}

pub fn run(args: ExperimentArgs) -> CliResult<()> {
    match args.name {
        Experiment::Sweep => {
            let mut spec: SweepSpec = resolve(
                &args,
                &[("desk", SweepSpec::desk), ("full", SweepSpec::full)],
            )?;
            if let Some(seed) = args.seed {
                spec.seed_base = seed;
            }
            let result = run_sweep(&spec)?;
            let g = &result.regression;
            println!(
                "h_xy:z = {:.4} + {:.4} h_rx + {:.4} h_ry + {:.4} h_z (R² = {:.4})",
                g.intercept, g.coef_rx, g.coef_ry, g.coef_z, g.r_squared
            );
            finish(
                &args,
                "sweep",
                document("experiment-sweep", &spec, &result)?,
                sweep_csv(&result)?,
                sweep_checks(&result),
            )
        }
        Experiment::Rho => {
            let mut spec: RhoSpec = resolve(
                &args,
                &[
                    ("masked-desk", RhoSpec::masked_desk),
                    ("paper-fig2a-desk", RhoSpec::masked_desk),
                ],
            )?;
            if let Some(seed) = args.seed {
                spec.seed_base = seed;
            }
            let result = run_rho_comparison(&spec)?;
            finish(
                &args,
                "rho",
                document("experiment-rho", &spec, &result)?,
                rho_comparison_csv(&result)?,
                rho_checks(&result),
            )
        }
        Experiment::Mf => {
            let mut spec: MfSpec = resolve(
                &args,
                &[
                    ("binomial-desk", MfSpec::binomial_desk),
                    ("paper-fig3-desk", MfSpec::binomial_desk),
                ],
            )?;
            if let Some(seed) = args.seed {
                spec.seed_base = seed;
            }
            let result = run_mf_recovery(&spec)?;
            let tau = result.dpxa.tau.as_deref().unwrap_or_default();
            println!("{:>6} {:>10} {:>10} {:>10}", "q", "τ_xy:z", "𝒯", "τ_xy");
            for (i, q) in result.theory.orders.iter().enumerate() {
                let xy = result.dcca_xy.tau.as_ref().map_or(f64::NAN, |t| t[i]);
                println!(
                    "{q:>6.2} {:>10.4} {:>10.4} {xy:>10.4}",
                    tau[i], result.theory.tau[i]
                );
            }
            println!("SNR (std r_x / std noise) = {:.3e}", result.snr);
            finish(
                &args,
                "mf",
                document("experiment-mf", &spec, &result)?,
                mf_csv(&result)?,
                mf_checks(&result),
            )
        }
    }
}
