//! Log-log regression of fluctuation functions and the multifractal
//! quantities derived from the fitted exponents.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fluctuation::{AnalysisKind, FluctuationSurface};

/// Minimum number of scales a slope is fitted on.
pub const MIN_FIT_POINTS: usize = 4;

/// Fractal dimension of the support of a time series.
const SUPPORT_DIMENSION: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub kind: AnalysisKind,
    pub orders: Vec<f64>,
    /// Generalized exponent `h(q)`: slope of `ln F(q, s)` on `ln s`.
    pub h: Vec<f64>,
    pub h_stderr: Vec<f64>,
    pub intercept: Vec<f64>,
    pub r_squared: Vec<f64>,
    pub points_used: Vec<usize>,
    /// `(s_min, s_max)` of the scales inside the fit range.
    pub fit_range: (usize, usize),
    /// `τ(q) = q h(q) − 1`, once computed.
    pub tau: Option<Vec<f64>>,
    /// Singularity strength at interior orders (`None` at the grid ends).
    pub alpha: Option<Vec<Option<f64>>>,
    pub f_alpha: Option<Vec<Option<f64>>>,
    pub warnings: Vec<String>,
}

struct LineFit {
    slope: f64,
    intercept: f64,
    stderr: f64,
    r_squared: f64,
}

fn ols_line(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let stderr = if xs.len() > 2 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    LineFit {
        slope,
        intercept,
        stderr,
        r_squared,
    }
}

/// Fits `h(q)` for every order of the surface over the scales in
/// `fit_range` (inclusive bounds; the whole grid when `None`).
///
/// Non-positive or non-finite `F(q, s)` values are dropped with a warning.
pub fn fit_exponent(
    surface: &FluctuationSurface,
    fit_range: Option<(usize, usize)>,
) -> Result<ScalingFit> {
    let (lo, hi) = fit_range.unwrap_or((0, usize::MAX));
    let selected: Vec<usize> = surface
        .scales
        .scales()
        .iter()
        .enumerate()
        .filter(|(_, &s)| s >= lo && s <= hi)
        .map(|(i, _)| i)
        .collect();
    if selected.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientScales {
            found: selected.len(),
            required: MIN_FIT_POINTS,
        });
    }
    let scales = surface.scales.scales();
    let used_range = (scales[selected[0]], scales[*selected.last().unwrap()]);

    let mut fit = ScalingFit {
        kind: surface.kind,
        orders: surface.orders.orders().to_vec(),
        h: Vec::new(),
        h_stderr: Vec::new(),
        intercept: Vec::new(),
        r_squared: Vec::new(),
        points_used: Vec::new(),
        fit_range: used_range,
        tau: None,
        alpha: None,
        f_alpha: None,
        warnings: Vec::new(),
    };
    for (qi, &q) in surface.orders.orders().iter().enumerate() {
        let mut xs = Vec::with_capacity(selected.len());
        let mut ys = Vec::with_capacity(selected.len());
        for &si in &selected {
            let f = surface.values[qi][si];
            if f > 0.0 && f.is_finite() {
                xs.push((scales[si] as f64).ln());
                ys.push(f.ln());
            }
        }
        let dropped = selected.len() - xs.len();
        if dropped > 0 {
            let msg =
                format!("q={q}: {dropped} scale(s) with non-positive F excluded from the fit");
            log::warn!("{msg}");
            fit.warnings.push(msg);
        }
        if xs.len() < MIN_FIT_POINTS {
            return Err(Error::InsufficientScales {
                found: xs.len(),
                required: MIN_FIT_POINTS,
            });
        }
        let line = ols_line(&xs, &ys);
        fit.h.push(line.slope);
        fit.h_stderr.push(line.stderr);
        fit.intercept.push(line.intercept);
        fit.r_squared.push(line.r_squared);
        fit.points_used.push(xs.len());
    }
    Ok(fit)
}

/// Fills `τ(q) = q h(q) − 1`.
pub fn mass_exponents(mut fit: ScalingFit) -> ScalingFit {
    fit.tau = Some(
        fit.orders
            .iter()
            .zip(&fit.h)
            .map(|(q, h)| q * h - SUPPORT_DIMENSION)
            .collect(),
    );
    fit
}

/// Legendre transform by central differences of `τ` on the q-grid:
/// `α = dτ/dq`, `f = q α − τ`, at interior orders only.
///
/// An `α` that increases with `q` (non-concave `τ`) is reported as a
/// warning, not an error.
pub fn legendre(fit: ScalingFit) -> Result<ScalingFit> {
    let mut fit = if fit.tau.is_none() {
        mass_exponents(fit)
    } else {
        fit
    };
    let n = fit.orders.len();
    if n < 3 {
        return Err(Error::Config(format!(
            "the Legendre transform needs at least 3 orders, got {n}"
        )));
    }
    let tau = fit.tau.as_ref().expect("tau filled above");
    let q = &fit.orders;
    let mut alpha = vec![None; n];
    let mut f_alpha = vec![None; n];
    for i in 1..n - 1 {
        let a = (tau[i + 1] - tau[i - 1]) / (q[i + 1] - q[i - 1]);
        alpha[i] = Some(a);
        f_alpha[i] = Some(q[i] * a - tau[i]);
    }
    let interior: Vec<f64> = alpha.iter().flatten().copied().collect();
    let inversions = interior.windows(2).filter(|w| w[1] > w[0] + 1e-12).count();
    if inversions > 0 {
        let msg = format!("singularity strength increases with q at {inversions} point(s)");
        log::warn!("{msg}");
        fit.warnings.push(msg);
    }
    fit.alpha = Some(alpha);
    fit.f_alpha = Some(f_alpha);
    Ok(fit)
}

impl ScalingFit {
    /// Fit, mass exponents and Legendre spectrum in one go. Grids with fewer
    /// than three orders skip the spectrum.
    pub fn analyze(
        surface: &FluctuationSurface,
        fit_range: Option<(usize, usize)>,
    ) -> Result<Self> {
        let fit = mass_exponents(fit_exponent(surface, fit_range)?);
        if fit.orders.len() >= 3 {
            legendre(fit)
        } else {
            Ok(fit)
        }
    }

    pub fn h_at(&self, q: f64) -> Option<f64> {
        self.index_of(q).map(|i| self.h[i])
    }

    pub fn tau_at(&self, q: f64) -> Option<f64> {
        let i = self.index_of(q)?;
        self.tau.as_ref().map(|t| t[i])
    }

    fn index_of(&self, q: f64) -> Option<usize> {
        self.orders.iter().position(|&o| (o - q).abs() < 1e-9)
    }

    /// Computed `(α, f(α))` pairs.
    pub fn spectrum(&self) -> Vec<(f64, f64)> {
        match (&self.alpha, &self.f_alpha) {
            (Some(a), Some(f)) => a
                .iter()
                .zip(f)
                .filter_map(|(a, f)| Some(((*a)?, (*f)?)))
                .collect(),
            _ => Vec::new(),
        }
    }

    /// `max α − min α` over the computed spectrum.
    pub fn spectrum_width(&self) -> Option<f64> {
        let s = self.spectrum();
        if s.is_empty() {
            return None;
        }
        let max = s.iter().map(|p| p.0).fold(f64::MIN, f64::max);
        let min = s.iter().map(|p| p.0).fold(f64::MAX, f64::min);
        Some(max - min)
    }
}
