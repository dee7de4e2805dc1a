//! Per-window removal of external forces and local trends.
//!
//! Each window is regressed on the force block (plus an optional intercept
//! column) by least squares, the residuals are integrated into a profile,
//! and a local trend (polynomial or centered moving average) is fitted to
//! the profile. Least squares is solved by Gram-Schmidt orthogonalization
//! with reorthogonalization; rank-deficient designs fall back to the
//! minimum-norm solution from an SVD.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::TimeSeries;

/// A column whose norm shrinks below this fraction during orthogonalization
/// is treated as linearly dependent on the previous ones.
const RANK_TOLERANCE: f64 = 1e-10;

/// The `p` external force series, all of equal length.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ForceMatrix {
    columns: Vec<TimeSeries>,
}

impl ForceMatrix {
    pub fn new(columns: Vec<TimeSeries>) -> Result<Self> {
        if let Some(first) = columns.first() {
            for (j, c) in columns.iter().enumerate().skip(1) {
                if c.len() != first.len() {
                    return Err(Error::LengthMismatch {
                        what: format!("force column {}", j + 1),
                        expected: first.len(),
                        found: c.len(),
                    });
                }
            }
        }
        Ok(ForceMatrix { columns })
    }

    pub fn empty() -> Self {
        ForceMatrix::default()
    }

    pub fn single(z: TimeSeries) -> Self {
        ForceMatrix { columns: vec![z] }
    }

    pub fn columns(&self) -> &[TimeSeries] {
        &self.columns
    }

    pub fn count(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Common length of the columns, if any.
    pub fn series_len(&self) -> Option<usize> {
        self.columns.first().map(TimeSeries::len)
    }

    pub(crate) fn block(&self, range: std::ops::Range<usize>) -> Vec<&[f64]> {
        self.columns
            .iter()
            .map(|c| &c.values[range.clone()])
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetrendMethod {
    /// Least-squares polynomial of fixed order (PX-DFA).
    Polynomial,
    /// Centered moving average with window equal to the box size (PX-DMA).
    MovingAverage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetrendConfig {
    pub method: DetrendMethod,
    pub poly_order: usize,
    pub with_intercept: bool,
}

impl Default for DetrendConfig {
    fn default() -> Self {
        DetrendConfig {
            method: DetrendMethod::Polynomial,
            poly_order: 1,
            with_intercept: true,
        }
    }
}

impl DetrendConfig {
    pub fn polynomial(order: usize) -> Self {
        DetrendConfig {
            poly_order: order,
            ..Default::default()
        }
    }

    pub fn moving_average() -> Self {
        DetrendConfig {
            method: DetrendMethod::MovingAverage,
            ..Default::default()
        }
    }

    pub fn without_intercept(mut self) -> Self {
        self.with_intercept = false;
        self
    }

    /// Checks the configuration can be applied to windows of size `scale`.
    pub fn check_scale(&self, scale: usize) -> Result<()> {
        if self.method == DetrendMethod::Polynomial && self.poly_order + 2 > scale {
            return Err(Error::Config(format!(
                "polynomial order {} needs windows of at least {} points, got {scale}",
                self.poly_order,
                self.poly_order + 2
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    /// Intercept first (when enabled), then one coefficient per force.
    pub beta: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rank_deficient: bool,
}

/// Residuals of both series of one window against the same design.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowResiduals {
    pub rx: Vec<f64>,
    pub ry: Vec<f64>,
    pub beta_x: Vec<f64>,
    pub beta_y: Vec<f64>,
    pub rank_deficient: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Orthonormal basis of a window design matrix.
struct Design {
    rows: usize,
    columns: Vec<Vec<f64>>,
    basis: Vec<Vec<f64>>,
    /// Upper-triangular Gram-Schmidt coefficients, column-major; only
    /// meaningful when the design has full rank.
    r: Vec<Vec<f64>>,
    full_rank: bool,
}

impl Design {
    fn new(rows: usize, forces: &[&[f64]], with_intercept: bool) -> Result<Self> {
        let params = forces.len() + usize::from(with_intercept);
        if rows <= params {
            return Err(Error::WindowTooSmall {
                window: rows,
                params,
            });
        }
        let mut columns = Vec::with_capacity(params);
        if with_intercept {
            columns.push(vec![1.0; rows]);
        }
        for f in forces {
            debug_assert_eq!(f.len(), rows);
            columns.push(f.to_vec());
        }
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(params);
        let mut r = Vec::with_capacity(params);
        let mut full_rank = true;
        for col in &columns {
            let mut v = col.clone();
            let mut coeffs = vec![0.0; params];
            for _ in 0..2 {
                for (i, q) in basis.iter().enumerate() {
                    let c = dot(q, &v);
                    axpy(-c, q, &mut v);
                    coeffs[i] += c;
                }
            }
            let norm = dot(&v, &v).sqrt();
            let original = dot(col, col).sqrt();
            if norm <= RANK_TOLERANCE * original || original == 0.0 {
                full_rank = false;
                continue;
            }
            coeffs[basis.len()] = norm;
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
            r.push(coeffs);
        }
        Ok(Design {
            rows,
            columns,
            basis,
            r,
            full_rank,
        })
    }

    fn residuals(&self, v: &[f64]) -> Vec<f64> {
        let mut res = v.to_vec();
        for _ in 0..2 {
            for q in &self.basis {
                let c = dot(q, &res);
                axpy(-c, q, &mut res);
            }
        }
        res
    }

    fn coefficients(&self, v: &[f64]) -> Vec<f64> {
        let k = self.columns.len();
        if k == 0 {
            return Vec::new();
        }
        if self.full_rank {
            // Q^T v, then back substitution with R
            let qtv: Vec<f64> = self.basis.iter().map(|q| dot(q, v)).collect();
            let mut beta = vec![0.0; k];
            for i in (0..k).rev() {
                let mut acc = qtv[i];
                for (rj, bj) in self.r[i + 1..k].iter().zip(&beta[i + 1..k]) {
                    acc -= rj[i] * bj;
                }
                beta[i] = acc / self.r[i][i];
            }
            beta
        } else {
            let a = DMatrix::from_fn(self.rows, k, |i, j| self.columns[j][i]);
            let b = DVector::from_column_slice(v);
            let svd = a.svd(true, true);
            let eps = svd.singular_values.max() * RANK_TOLERANCE;
            match svd.solve(&b, eps) {
                Ok(sol) => sol.iter().copied().collect(),
                Err(_) => vec![0.0; k],
            }
        }
    }
}

/// Least-squares fit of one window on its force block.
///
/// A rank-deficient design is not an error: the minimum-norm coefficients
/// are returned and `rank_deficient` is set.
pub fn window_ols(xv: &[f64], forces: &[&[f64]], with_intercept: bool) -> Result<OlsFit> {
    for f in forces {
        if f.len() != xv.len() {
            return Err(Error::LengthMismatch {
                what: "force block".into(),
                expected: xv.len(),
                found: f.len(),
            });
        }
    }
    let design = Design::new(xv.len(), forces, with_intercept)?;
    if !design.full_rank {
        log::warn!("rank-deficient window design; using minimum-norm solution");
    }
    Ok(OlsFit {
        beta: design.coefficients(xv),
        residuals: design.residuals(xv),
        rank_deficient: !design.full_rank,
    })
}

/// Regresses both series of a window on the shared design.
pub fn window_residuals(
    xv: &[f64],
    yv: &[f64],
    forces: &[&[f64]],
    with_intercept: bool,
) -> Result<WindowResiduals> {
    if xv.len() != yv.len() {
        return Err(Error::LengthMismatch {
            what: "window pair".into(),
            expected: xv.len(),
            found: yv.len(),
        });
    }
    let design = Design::new(xv.len(), forces, with_intercept)?;
    Ok(WindowResiduals {
        rx: design.residuals(xv),
        ry: design.residuals(yv),
        beta_x: design.coefficients(xv),
        beta_y: design.coefficients(yv),
        rank_deficient: !design.full_rank,
    })
}

/// Residuals only, without computing coefficients. Used by the fluctuation
/// pipeline where the coefficients are never reported.
pub(crate) fn residuals_only(
    series: &[&[f64]],
    forces: &[&[f64]],
    with_intercept: bool,
) -> Result<(Vec<Vec<f64>>, bool)> {
    let rows = series[0].len();
    if forces.is_empty() && !with_intercept {
        return Ok((series.iter().map(|s| s.to_vec()).collect(), false));
    }
    let design = Design::new(rows, forces, with_intercept)?;
    Ok((
        series.iter().map(|s| design.residuals(s)).collect(),
        !design.full_rank,
    ))
}

/// Running sum `R(k) = Σ_{j≤k} r(j)`.
pub fn profile(residuals: &[f64]) -> Vec<f64> {
    residuals
        .iter()
        .scan(0.0, |acc, &r| {
            *acc += r;
            Some(*acc)
        })
        .collect()
}

/// Local trend fitted to a window profile.
pub fn local_trend(profile: &[f64], cfg: &DetrendConfig) -> Result<Vec<f64>> {
    let detrender = Detrender::new(cfg, profile.len())?;
    Ok(detrender.trend(profile))
}

/// Trend estimator prepared for one window size.
pub(crate) enum Detrender {
    Polynomial { basis: Vec<Vec<f64>> },
    MovingAverage { scale: usize },
}

impl Detrender {
    pub(crate) fn new(cfg: &DetrendConfig, scale: usize) -> Result<Self> {
        cfg.check_scale(scale)?;
        Ok(match cfg.method {
            DetrendMethod::Polynomial => Detrender::Polynomial {
                basis: polynomial_basis(scale, cfg.poly_order),
            },
            DetrendMethod::MovingAverage => Detrender::MovingAverage { scale },
        })
    }

    pub(crate) fn trend(&self, profile: &[f64]) -> Vec<f64> {
        match self {
            Detrender::Polynomial { basis } => {
                let mut trend = vec![0.0; profile.len()];
                for b in basis {
                    axpy(dot(b, profile), b, &mut trend);
                }
                trend
            }
            Detrender::MovingAverage { scale } => centered_moving_average(profile, *scale),
        }
    }

    /// Subtracts the trend from `profile` in place.
    pub(crate) fn detrend(&self, profile: &mut [f64]) {
        match self {
            Detrender::Polynomial { basis } => {
                for _ in 0..2 {
                    for b in basis {
                        let c = dot(b, profile);
                        axpy(-c, b, profile);
                    }
                }
            }
            Detrender::MovingAverage { .. } => {
                let trend = self.trend(profile);
                profile.iter_mut().zip(trend).for_each(|(p, t)| *p -= t);
            }
        }
    }
}

/// Orthonormal basis of polynomials of degree `<= order` sampled on `k = 1..=s`.
fn polynomial_basis(s: usize, order: usize) -> Vec<Vec<f64>> {
    let center = (s as f64 + 1.0) / 2.0;
    let half = (s as f64 / 2.0).max(1.0);
    let t: Vec<f64> = (1..=s).map(|k| (k as f64 - center) / half).collect();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(order + 1);
    for degree in 0..=order {
        let mut v: Vec<f64> = t.iter().map(|x| x.powi(degree as i32)).collect();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &v);
                axpy(-c, b, &mut v);
            }
        }
        let norm = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }
    basis
}

/// Centered moving average of `window` points; near the ends the window
/// shrinks to the available samples.
fn centered_moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let n = values.len();
    let back = (window - 1) / 2;
    let fwd = window - 1 - back;
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for v in values {
        prefix.push(prefix.last().unwrap() + v);
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(back);
            let hi = (i + fwd).min(n - 1);
            (prefix[hi + 1] - prefix[lo]) / (hi + 1 - lo) as f64
        })
        .collect()
}
