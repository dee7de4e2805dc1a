//! Monte-Carlo validation studies.
//!
//! Three experiments drive the estimators with synthetic data whose
//! scaling is known in closed form:
//!
//! * [`run_sweep`]: exponent sweep over `(H_rx, H_ry, H_z)` triples with the
//!   additive model `x = b0 + b1 z + r_x`, `y = b0 + b1 z + r_y`, followed by
//!   the multiple regression of `h_xy:z` on `(h_rx, h_ry, h_z)` and the
//!   relative error of DPXA against the DCCA of the hidden components.
//! * [`run_rho_comparison`]: seed-averaged DCCA and DPXA coefficients.
//! * [`run_mf_recovery`]: MF-DCCA vs MF-DPXA on binomial measures masked by
//!   strong Gaussian noise.
//!
//! Every realization draws its seeds from `(seed_base, triple, realization)`
//! and results are merged in index order, so output does not depend on
//! thread scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detrend::{window_ols, DetrendConfig, ForceMatrix};
use crate::error::{Error, Result};
use crate::fluctuation::{dcca, dfa, fluctuation_dpxa, rho_curve};
use crate::generators::{
    binomial_tau, contaminate, gen_bfbm_increments, gen_binomial, gen_fgn, BfbmSpec, BinomialSpec,
    ContaminationSpec, FgnSpec,
};
use crate::scaling::{fit_exponent, legendre, mass_exponents, ScalingFit};
use crate::types::{QGrid, ScaleGrid, TimeSeries};

/// Deterministic sub-seed for `(stream, word)` under `base`.
pub fn derive_seed(base: u64, stream: u64, word: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(stream);
    rng.set_word_pos(u128::from(word) * 2);
    rng.next_u64()
}

fn hurst_ok(h: f64) -> bool {
    h > 0.0 && h < 1.0
}

// ---------------------------------------------------------------------------
// exponent sweep

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// `(H_rx, H_ry, H_z)` triples with `H_rx <= H_ry`.
    pub hurst_grid: Vec<[f64; 3]>,
    pub realizations: usize,
    pub length: usize,
    /// Zero-lag correlation of the BFBM components.
    pub corr: f64,
    pub beta_x: ContaminationSpec,
    pub beta_y: ContaminationSpec,
    pub seed_base: u64,
    #[serde(default)]
    pub detrend: DetrendConfig,
}

/// All triples `(a, b, c)` from `values` with `a <= b`.
pub fn symmetric_grid(values: &[f64]) -> Vec<[f64; 3]> {
    let mut grid = Vec::new();
    for (i, &a) in values.iter().enumerate() {
        for &b in &values[i..] {
            for &c in values {
                grid.push([a, b, c]);
            }
        }
    }
    grid
}

impl SweepSpec {
    /// Desk-scale sweep: H ∈ {0.2, 0.4, 0.6, 0.8}, 20 realizations, N = 2^14.
    pub fn desk() -> Self {
        SweepSpec {
            hurst_grid: symmetric_grid(&[0.2, 0.4, 0.6, 0.8]),
            realizations: 20,
            length: 1 << 14,
            corr: 0.5,
            beta_x: ContaminationSpec::default(),
            beta_y: ContaminationSpec::default(),
            seed_base: 2016,
            detrend: DetrendConfig::default(),
        }
    }

    /// The full grid: H from 0.1 to 0.95 in steps of 0.05 (3078 triples),
    /// 100 realizations of length 65536. Hours of CPU time.
    ///
    /// The correlation is lowered so every pair on the grid admits a valid
    /// bivariate structure.
    pub fn full() -> Self {
        let values: Vec<f64> = (2..=19).map(|i| i as f64 * 0.05).collect();
        SweepSpec {
            hurst_grid: symmetric_grid(&values),
            realizations: 100,
            length: 1 << 16,
            corr: 0.2,
            ..Self::desk()
        }
    }

    /// Collects every violation instead of stopping at the first one.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.hurst_grid.is_empty() {
            errs.push("hurst_grid is empty".to_string());
        }
        for (i, t) in self.hurst_grid.iter().enumerate() {
            if !t.iter().all(|&h| hurst_ok(h)) {
                errs.push(format!(
                    "triple {i} {t:?}: Hurst indices must lie in (0, 1)"
                ));
            }
            if t[0] > t[1] {
                errs.push(format!("triple {i} {t:?}: requires H_rx <= H_ry"));
            }
        }
        if self.realizations < 1 {
            errs.push("realizations must be at least 1".into());
        }
        if self.length / 4 < crate::types::DEFAULT_MIN_SCALE {
            errs.push(format!("length {} is too short", self.length));
        }
        if !(-1.0..=1.0).contains(&self.corr) {
            errs.push(format!("corr {} is outside [-1, 1]", self.corr));
        }
        for (name, b) in [("beta_x", &self.beta_x), ("beta_y", &self.beta_y)] {
            if !b.intercept.is_finite() || !b.slope.is_finite() {
                errs.push(format!("{name} must be finite"));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidSpec(errs))
        }
    }
}

/// Realization-averaged exponents for one input triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleResult {
    pub hurst: [f64; 3],
    pub h_rx: f64,
    pub h_ry: f64,
    pub h_z: f64,
    pub h_x: f64,
    pub h_y: f64,
    /// DCCA of the contaminated pair.
    pub h_xy: f64,
    /// DCCA of the hidden components.
    pub h_rxry: f64,
    /// DPXA of the contaminated pair given the driver.
    pub h_xy_given_z: f64,
    pub realizations: usize,
}

/// `h_xy:z ≈ c0 + c1 h_rx + c2 h_ry + c3 h_z` across triples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryRegression {
    pub intercept: f64,
    pub coef_rx: f64,
    pub coef_ry: f64,
    pub coef_z: f64,
    pub r_squared: f64,
}

/// Relative error of the driver-averaged DPXA exponent for one `(H_rx, H_ry)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairError {
    pub hurst_rx: f64,
    pub hurst_ry: f64,
    pub h_rx: f64,
    pub h_ry: f64,
    pub h_rxry: f64,
    pub mean_h_xy_given_z: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub triples: Vec<TripleResult>,
    pub regression: RecoveryRegression,
    pub relative_errors: Vec<PairError>,
}

struct RealizationExponents([f64; 8]);

fn h2(surface: crate::fluctuation::FluctuationSurface) -> Result<f64> {
    Ok(fit_exponent(&surface, None)?.h[0])
}

fn sweep_realization(
    spec: &SweepSpec,
    triple: usize,
    realization: usize,
) -> Result<RealizationExponents> {
    let [hrx, hry, hz] = spec.hurst_grid[triple];
    let stream = ((triple as u64) << 32) | realization as u64;
    let n = spec.length;
    let z = gen_fgn(&FgnSpec {
        hurst: hz,
        length: n,
        seed: derive_seed(spec.seed_base, stream, 0),
    })?;
    let (rx, ry) = gen_bfbm_increments(&BfbmSpec {
        hurst_x: hrx,
        hurst_y: hry,
        corr: spec.corr,
        length: n,
        seed: derive_seed(spec.seed_base, stream, 1),
    })?;
    let x = contaminate(&rx, &z, &spec.beta_x)?;
    let y = contaminate(&ry, &z, &spec.beta_y)?;
    let grid = ScaleGrid::default_for(n)?;
    let q2 = QGrid::second_order();
    let cfg = &spec.detrend;
    let forces = ForceMatrix::single(z.clone());
    Ok(RealizationExponents([
        h2(dfa(&rx, &grid, &q2, cfg)?)?,
        h2(dfa(&ry, &grid, &q2, cfg)?)?,
        h2(dfa(&z, &grid, &q2, cfg)?)?,
        h2(dfa(&x, &grid, &q2, cfg)?)?,
        h2(dfa(&y, &grid, &q2, cfg)?)?,
        h2(dcca(&x, &y, &grid, &q2, cfg)?)?,
        h2(dcca(&rx, &ry, &grid, &q2, cfg)?)?,
        h2(fluctuation_dpxa(&x, &y, &forces, &grid, &q2, cfg)?)?,
    ]))
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let tasks: Vec<(usize, usize)> = (0..spec.hurst_grid.len())
        .flat_map(|t| (0..spec.realizations).map(move |r| (t, r)))
        .collect();
    let per_task = tasks
        .par_iter()
        .map(|&(t, r)| {
            sweep_realization(spec, t, r).map_err(|e| {
                let [a, b, c] = spec.hurst_grid[t];
                e.context(format!(
                    "triple (H_rx={a}, H_ry={b}, H_z={c}), realization {r}"
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let triples: Vec<TripleResult> = per_task
        .chunks(spec.realizations)
        .zip(&spec.hurst_grid)
        .map(|(chunk, &hurst)| {
            let mut acc = [0.0; 8];
            for r in chunk {
                for (a, v) in acc.iter_mut().zip(r.0) {
                    *a += v;
                }
            }
            let n = chunk.len() as f64;
            let m = acc.map(|v| v / n);
            TripleResult {
                hurst,
                h_rx: m[0],
                h_ry: m[1],
                h_z: m[2],
                h_x: m[3],
                h_y: m[4],
                h_xy: m[5],
                h_rxry: m[6],
                h_xy_given_z: m[7],
                realizations: chunk.len(),
            }
        })
        .collect();

    let regression = recovery_regression(&triples)?;
    let relative_errors = pair_errors(&triples);
    Ok(SweepResult {
        spec: spec.clone(),
        triples,
        regression,
        relative_errors,
    })
}

fn recovery_regression(triples: &[TripleResult]) -> Result<RecoveryRegression> {
    let target: Vec<f64> = triples.iter().map(|t| t.h_xy_given_z).collect();
    let rx: Vec<f64> = triples.iter().map(|t| t.h_rx).collect();
    let ry: Vec<f64> = triples.iter().map(|t| t.h_ry).collect();
    let hz: Vec<f64> = triples.iter().map(|t| t.h_z).collect();
    let fit = window_ols(&target, &[&rx, &ry, &hz], true)
        .map_err(|e| e.context("recovery regression needs more than 4 triples"))?;
    let mean = target.iter().sum::<f64>() / target.len() as f64;
    let sst: f64 = target.iter().map(|v| (v - mean).powi(2)).sum();
    let sse: f64 = fit.residuals.iter().map(|r| r * r).sum();
    Ok(RecoveryRegression {
        intercept: fit.beta[0],
        coef_rx: fit.beta[1],
        coef_ry: fit.beta[2],
        coef_z: fit.beta[3],
        r_squared: if sst > 0.0 { 1.0 - sse / sst } else { 1.0 },
    })
}

/// Groups triples by `(H_rx, H_ry)`, averages over the driver exponent and
/// compares with the DCCA exponent of the hidden components.
fn pair_errors(triples: &[TripleResult]) -> Vec<PairError> {
    let mut keys: Vec<(f64, f64)> = Vec::new();
    for t in triples {
        let k = (t.hurst[0], t.hurst[1]);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(a, b)| {
            let group: Vec<&TripleResult> = triples
                .iter()
                .filter(|t| t.hurst[0] == a && t.hurst[1] == b)
                .collect();
            let n = group.len() as f64;
            let avg = |f: fn(&TripleResult) -> f64| group.iter().map(|t| f(t)).sum::<f64>() / n;
            let h_rxry = avg(|t| t.h_rxry);
            let mean_dpxa = avg(|t| t.h_xy_given_z);
            PairError {
                hurst_rx: a,
                hurst_ry: b,
                h_rx: avg(|t| t.h_rx),
                h_ry: avg(|t| t.h_ry),
                h_rxry,
                mean_h_xy_given_z: mean_dpxa,
                relative_error: (mean_dpxa - h_rxry) / h_rxry,
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// correlation coefficients

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoSpec {
    pub corr: f64,
    pub hurst_rx: f64,
    pub hurst_ry: f64,
    pub hurst_z: f64,
    pub length: usize,
    pub seeds: usize,
    pub beta_x: ContaminationSpec,
    pub beta_y: ContaminationSpec,
    pub seed_base: u64,
    #[serde(default)]
    pub detrend: DetrendConfig,
}

impl RhoSpec {
    /// Strongly persistent driver masking two antipersistent components
    /// with correlation 0.7, N = 2^16, 10 seeds.
    pub fn masked_desk() -> Self {
        RhoSpec {
            corr: 0.7,
            hurst_rx: 0.1,
            hurst_ry: 0.1,
            hurst_z: 0.95,
            length: 1 << 16,
            seeds: 10,
            beta_x: ContaminationSpec::default(),
            beta_y: ContaminationSpec::default(),
            seed_base: 2016,
            detrend: DetrendConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        for (name, h) in [
            ("hurst_rx", self.hurst_rx),
            ("hurst_ry", self.hurst_ry),
            ("hurst_z", self.hurst_z),
        ] {
            if !hurst_ok(h) {
                errs.push(format!("{name} = {h} is outside (0, 1)"));
            }
        }
        if !(-1.0..=1.0).contains(&self.corr) {
            errs.push(format!("corr {} is outside [-1, 1]", self.corr));
        }
        if self.seeds < 1 {
            errs.push("seeds must be at least 1".into());
        }
        if self.length / 4 < crate::types::DEFAULT_MIN_SCALE {
            errs.push(format!("length {} is too short", self.length));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidSpec(errs))
        }
    }
}

/// Seed-averaged coefficient curves on the default scale grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoComparison {
    pub spec: RhoSpec,
    pub scales: Vec<usize>,
    /// DCCA coefficient of the contaminated pair.
    pub rho_dcca_xy: Vec<f64>,
    /// DCCA coefficient of the hidden components.
    pub rho_dcca_rr: Vec<f64>,
    /// DPXA coefficient of the contaminated pair given the driver.
    pub rho_dpxa: Vec<f64>,
}

pub fn run_rho_comparison(spec: &RhoSpec) -> Result<RhoComparison> {
    spec.validate()?;
    let grid = ScaleGrid::default_for(spec.length)?;
    let curves = (0..spec.seeds)
        .into_par_iter()
        .map(|seed| -> Result<[Vec<f64>; 3]> {
            let stream = seed as u64;
            let z = gen_fgn(&FgnSpec {
                hurst: spec.hurst_z,
                length: spec.length,
                seed: derive_seed(spec.seed_base, stream, 0),
            })?;
            let (rx, ry) = gen_bfbm_increments(&BfbmSpec {
                hurst_x: spec.hurst_rx,
                hurst_y: spec.hurst_ry,
                corr: spec.corr,
                length: spec.length,
                seed: derive_seed(spec.seed_base, stream, 1),
            })?;
            let x = contaminate(&rx, &z, &spec.beta_x)?;
            let y = contaminate(&ry, &z, &spec.beta_y)?;
            let cfg = &spec.detrend;
            let none = ForceMatrix::empty();
            Ok([
                rho_curve(&x, &y, &none, &grid, cfg)?.rho,
                rho_curve(&rx, &ry, &none, &grid, cfg)?.rho,
                rho_curve(&x, &y, &ForceMatrix::single(z), &grid, cfg)?.rho,
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let mean_curve = |k: usize| -> Vec<f64> {
        (0..grid.len())
            .map(|si| curves.iter().map(|c| c[k][si]).sum::<f64>() / curves.len() as f64)
            .collect()
    };
    Ok(RhoComparison {
        spec: spec.clone(),
        scales: grid.scales().to_vec(),
        rho_dcca_xy: mean_curve(0),
        rho_dcca_rr: mean_curve(1),
        rho_dpxa: mean_curve(2),
    })
}

// ---------------------------------------------------------------------------
// multifractal recovery

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfSpec {
    pub p_x: f64,
    pub p_y: f64,
    pub depth: u32,
    /// Contamination by the common Gaussian noise.
    pub noise_beta: ContaminationSpec,
    pub seeds: usize,
    pub q_min: f64,
    pub q_max: f64,
    pub q_count: usize,
    /// Window sizes; the cascade is dyadic, so powers of two keep every
    /// window aligned with a cascade cell.
    pub scales: Vec<usize>,
    /// Inclusive scale bounds of the log-log fit.
    pub fit_range: (usize, usize),
    pub seed_base: u64,
    #[serde(default)]
    pub detrend: DetrendConfig,
}

impl MfSpec {
    /// p_x = 0.3, p_y = 0.4, 2^16 points, noise `2 + 3 z`.
    pub fn binomial_desk() -> Self {
        let depth = 16;
        MfSpec {
            p_x: 0.3,
            p_y: 0.4,
            depth,
            noise_beta: ContaminationSpec::default(),
            seeds: 5,
            q_min: -4.0,
            q_max: 4.0,
            q_count: 17,
            scales: (4..=depth - 2).map(|k| 1usize << k).collect(),
            fit_range: (1 << 9, 1 << (depth - 2)),
            seed_base: 2016,
            detrend: DetrendConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        for (name, p) in [("p_x", self.p_x), ("p_y", self.p_y)] {
            if !(p > 0.0 && p < 1.0) {
                errs.push(format!("{name} = {p} is outside (0, 1)"));
            }
        }
        if self.depth < 4 || self.depth > 26 {
            errs.push(format!("depth {} is outside [4, 26]", self.depth));
        }
        if self.seeds < 1 {
            errs.push("seeds must be at least 1".into());
        }
        if self.q_count < 3
            || self.q_max.is_nan()
            || self.q_min.is_nan()
            || self.q_max <= self.q_min
        {
            errs.push("q grid needs q_min < q_max and at least 3 orders".into());
        }
        if let Err(e) = ScaleGrid::new(self.scales.clone()) {
            errs.push(e.to_string());
        } else if self.depth < 26 {
            let len = 1usize << self.depth;
            if let Some(s) = self.scales.iter().find(|&&s| s > len / 4) {
                errs.push(format!(
                    "scale {s} exceeds a quarter of the series length {len}"
                ));
            }
        }
        if self.fit_range.0 > self.fit_range.1 {
            errs.push("fit_range lower bound exceeds upper bound".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidSpec(errs))
        }
    }

    pub fn orders(&self) -> Result<QGrid> {
        QGrid::linspace(self.q_min, self.q_max, self.q_count)
    }
}

/// Closed-form curves for the hidden pair: `𝒯(q) = (τ_x(q) + τ_y(q)) / 2`
/// and its Legendre transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryCurve {
    pub orders: Vec<f64>,
    pub tau: Vec<f64>,
    pub alpha: Vec<f64>,
    pub f_alpha: Vec<f64>,
}

/// `dτ/dq` of the binomial measure.
pub fn binomial_alpha(p: f64, q: f64) -> f64 {
    let (a, b) = (p.powf(q), (1.0 - p).powf(q));
    -(a * p.ln() + b * (1.0 - p).ln()) / ((a + b) * std::f64::consts::LN_2)
}

pub fn joint_binomial_theory(p_x: f64, p_y: f64, orders: &[f64]) -> TheoryCurve {
    let tau: Vec<f64> = orders
        .iter()
        .map(|&q| 0.5 * (binomial_tau(p_x, q) + binomial_tau(p_y, q)))
        .collect();
    let alpha: Vec<f64> = orders
        .iter()
        .map(|&q| 0.5 * (binomial_alpha(p_x, q) + binomial_alpha(p_y, q)))
        .collect();
    let f_alpha = orders
        .iter()
        .zip(&alpha)
        .zip(&tau)
        .map(|((q, a), t)| q * a - t)
        .collect();
    TheoryCurve {
        orders: orders.to_vec(),
        tau,
        alpha,
        f_alpha,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfRecovery {
    pub spec: MfSpec,
    /// MF-DCCA of the contaminated pair (seed-averaged).
    pub dcca_xy: ScalingFit,
    /// MF-DPXA of the contaminated pair given the noise (seed-averaged).
    pub dpxa: ScalingFit,
    /// MF-DCCA of the clean measures.
    pub dcca_rr: ScalingFit,
    pub theory: TheoryCurve,
    /// Ratio of the measure's standard deviation to that of the noise term.
    pub snr: f64,
}

fn std_dev(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
}

/// Averages `h(q)` and its diagnostics over fits on the same grid and
/// recomputes the derived quantities.
pub fn average_fits(fits: &[ScalingFit]) -> Result<ScalingFit> {
    let first = fits
        .first()
        .ok_or_else(|| Error::Config("nothing to average".into()))?;
    let n = fits.len() as f64;
    let mean_of = |get: fn(&ScalingFit) -> &Vec<f64>| -> Vec<f64> {
        (0..first.orders.len())
            .map(|i| fits.iter().map(|f| get(f)[i]).sum::<f64>() / n)
            .collect()
    };
    let mut warnings: Vec<String> = Vec::new();
    for f in fits {
        for w in &f.warnings {
            if !warnings.contains(w) {
                warnings.push(w.clone());
            }
        }
    }
    let avg = ScalingFit {
        kind: first.kind,
        orders: first.orders.clone(),
        h: mean_of(|f| &f.h),
        h_stderr: mean_of(|f| &f.h_stderr),
        intercept: mean_of(|f| &f.intercept),
        r_squared: mean_of(|f| &f.r_squared),
        points_used: first.points_used.clone(),
        fit_range: first.fit_range,
        tau: None,
        alpha: None,
        f_alpha: None,
        warnings,
    };
    let avg = mass_exponents(avg);
    if avg.orders.len() >= 3 {
        legendre(avg)
    } else {
        Ok(avg)
    }
}

pub fn run_mf_recovery(spec: &MfSpec) -> Result<MfRecovery> {
    spec.validate()?;
    let rx = gen_binomial(&BinomialSpec {
        multiplier: spec.p_x,
        depth: spec.depth,
    })?;
    let ry = gen_binomial(&BinomialSpec {
        multiplier: spec.p_y,
        depth: spec.depth,
    })?;
    let n = rx.len();
    let grid = ScaleGrid::new(spec.scales.clone())?;
    let orders = spec.orders()?;
    let cfg = &spec.detrend;
    let range = Some(spec.fit_range);

    let per_seed = (0..spec.seeds)
        .into_par_iter()
        .map(|seed| -> Result<(ScalingFit, ScalingFit, f64)> {
            let z = gen_fgn(&FgnSpec {
                hurst: 0.5,
                length: n,
                seed: derive_seed(spec.seed_base, seed as u64, 0),
            })?;
            let x = contaminate(&rx, &z, &spec.noise_beta)?;
            let y = contaminate(&ry, &z, &spec.noise_beta)?;
            let xy = fit_exponent(&dcca(&x, &y, &grid, &orders, cfg)?, range)?;
            let part = fit_exponent(
                &fluctuation_dpxa(&x, &y, &ForceMatrix::single(z.clone()), &grid, &orders, cfg)?,
                range,
            )?;
            let noise: Vec<f64> = z.values.iter().map(|v| spec.noise_beta.slope * v).collect();
            let noise_sd = std_dev(&noise);
            let snr = if noise_sd > 0.0 {
                std_dev(&rx.values) / noise_sd
            } else {
                f64::INFINITY
            };
            Ok((xy, part, snr))
        })
        .collect::<Result<Vec<_>>>()?;

    let xy: Vec<ScalingFit> = per_seed.iter().map(|r| r.0.clone()).collect();
    let part: Vec<ScalingFit> = per_seed.iter().map(|r| r.1.clone()).collect();
    let snr = per_seed.iter().map(|r| r.2).sum::<f64>() / per_seed.len() as f64;
    let clean = fit_exponent(&dcca(&rx, &ry, &grid, &orders, cfg)?, range)?;
    Ok(MfRecovery {
        spec: spec.clone(),
        dcca_xy: average_fits(&xy)?,
        dpxa: average_fits(&part)?,
        dcca_rr: average_fits(&[clean])?,
        theory: joint_binomial_theory(spec.p_x, spec.p_y, orders.orders()),
        snr,
    })
}

/// Convenience wrapper: labelled model series `(x, y, z, r_x, r_y)` for one
/// seed, as used by the sweep.
pub fn model_series(
    hurst: [f64; 3],
    corr: f64,
    length: usize,
    beta: ContaminationSpec,
    seed: u64,
) -> Result<[TimeSeries; 5]> {
    let z = gen_fgn(&FgnSpec {
        hurst: hurst[2],
        length,
        seed: derive_seed(seed, 0, 0),
    })?;
    let (rx, ry) = gen_bfbm_increments(&BfbmSpec {
        hurst_x: hurst[0],
        hurst_y: hurst[1],
        corr,
        length,
        seed: derive_seed(seed, 0, 1),
    })?;
    let x = contaminate(&rx, &z, &beta)?.with_label("x");
    let y = contaminate(&ry, &z, &beta)?.with_label("y");
    Ok([x, y, z.with_label("z"), rx, ry])
}

// ---------------------------------------------------------------------------
// pass/fail checks against the expected values

/// One tolerance check for the experiment summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn within(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            value,
            target,
            tolerance,
            pass: (value - target).abs() <= tolerance,
        }
    }

    fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            target: bound,
            tolerance: 0.0,
            pass: value <= bound,
        }
    }

    fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            target: bound,
            tolerance: 0.0,
            pass: value >= bound,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{}: {} (value {:.4}, target {:.4}{})",
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.value,
            self.target,
            if self.tolerance > 0.0 {
                format!(" ± {}", self.tolerance)
            } else {
                String::new()
            }
        )
    }
}

pub fn sweep_checks(r: &SweepResult) -> Vec<Check> {
    let g = &r.regression;
    let mut checks = vec![
        Check::within("regression intercept", g.intercept, 0.0, 0.10),
        Check::within("regression coef h_rx", g.coef_rx, 0.5, 0.10),
        Check::within("regression coef h_ry", g.coef_ry, 0.5, 0.10),
        Check::within("regression coef h_z", g.coef_z, 0.0, 0.10),
    ];
    let worst = r
        .relative_errors
        .iter()
        .filter(|e| e.hurst_rx.min(e.hurst_ry) >= 0.2 - 1e-9)
        .map(|e| e.relative_error.abs())
        .fold(0.0, f64::max);
    checks.push(Check::at_most(
        "max |Δh_xy:z| for min(H) >= 0.2",
        worst,
        0.10,
    ));
    let worst_mean = r
        .triples
        .iter()
        .map(|t| (t.h_rxry - 0.5 * (t.h_rx + t.h_ry)).abs())
        .fold(0.0, f64::max);
    checks.push(Check::at_most(
        "max |h_rxry − (h_rx+h_ry)/2|",
        worst_mean,
        0.03,
    ));
    checks
}

pub fn rho_checks(r: &RhoComparison) -> Vec<Check> {
    let upper = r.spec.length / 10;
    let inside: Vec<f64> = r
        .scales
        .iter()
        .zip(&r.rho_dpxa)
        .filter(|(&s, _)| s >= 10 && s <= upper)
        .map(|(_, &v)| v)
        .collect();
    let mean = inside.iter().sum::<f64>() / inside.len().max(1) as f64;
    vec![
        Check::within("ρ_DPXA mean over s ∈ [10, N/10]", mean, r.spec.corr, 0.08),
        Check::at_least("ρ_DCCA(x,y) at smallest scale", r.rho_dcca_xy[0], 0.9),
    ]
}

pub fn mf_checks(r: &MfRecovery) -> Vec<Check> {
    let tau = r.dpxa.tau.as_ref().expect("averaged fits carry tau");
    let worst = tau
        .iter()
        .zip(&r.theory.tau)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let spec = r.dcca_xy.spectrum();
    let width = r.dcca_xy.spectrum_width().unwrap_or(f64::NAN);
    let center = spec.iter().map(|p| p.0).sum::<f64>() / spec.len().max(1) as f64;
    vec![
        Check::at_most("max |τ_xy:z − 𝒯|", worst, 0.15),
        Check::at_most("MF-DCCA(x,y) spectrum width", width, 0.2),
        Check::within("MF-DCCA(x,y) spectrum center", center, 0.5, 0.1),
    ]
}
