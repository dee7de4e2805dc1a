//! Synthetic signals with analytically known scaling.
//!
//! Fractional Gaussian noise and bivariate FBM increments are produced by
//! (multivariate) circulant embedding of the exact autocovariance, so the
//! output has the exact target Gaussian law. The binomial p-model is the
//! deterministic dyadic cascade.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::TimeSeries;

/// Negative embedding eigenvalues up to this fraction of the largest one are
/// treated as round-off and clamped to zero.
pub const EIGEN_CLAMP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FgnSpec {
    pub hurst: f64,
    pub length: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BfbmSpec {
    pub hurst_x: f64,
    pub hurst_y: f64,
    pub corr: f64,
    pub length: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinomialSpec {
    pub multiplier: f64,
    pub depth: u32,
}

/// Intercept and slope of the additive contamination `x = b0 + b1 z + r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContaminationSpec {
    pub intercept: f64,
    pub slope: f64,
}

impl Default for ContaminationSpec {
    fn default() -> Self {
        ContaminationSpec {
            intercept: 2.0,
            slope: 3.0,
        }
    }
}

fn check_hurst(name: &'static str, h: f64) -> Result<()> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidParameter {
            name,
            reason: format!("{h} is outside (0, 1)"),
        });
    }
    Ok(())
}

fn check_length(length: usize) -> Result<()> {
    if length == 0 {
        return Err(Error::InvalidParameter {
            name: "length",
            reason: "must be positive".into(),
        });
    }
    Ok(())
}

impl FgnSpec {
    pub fn validate(&self) -> Result<()> {
        check_hurst("hurst", self.hurst)?;
        check_length(self.length)
    }
}

impl BfbmSpec {
    pub fn validate(&self) -> Result<()> {
        check_hurst("hurst_x", self.hurst_x)?;
        check_hurst("hurst_y", self.hurst_y)?;
        if !(-1.0..=1.0).contains(&self.corr) {
            return Err(Error::InvalidParameter {
                name: "corr",
                reason: format!("{} is outside [-1, 1]", self.corr),
            });
        }
        check_length(self.length)
    }
}

impl BinomialSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.multiplier > 0.0 && self.multiplier < 1.0) {
            return Err(Error::InvalidParameter {
                name: "multiplier",
                reason: format!("{} is outside (0, 1)", self.multiplier),
            });
        }
        Ok(())
    }
}

impl ContaminationSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.intercept.is_finite() || !self.slope.is_finite() {
            return Err(Error::InvalidParameter {
                name: "contamination",
                reason: "intercept and slope must be finite".into(),
            });
        }
        Ok(())
    }
}

/// Autocovariance of unit-variance FGN, generalised to a cross-exponent:
/// `½(|k+1|^e − 2|k|^e + |k−1|^e)` with `e = 2H` (or `Hx + Hy`).
pub fn fgn_autocovariance(exponent: f64, k: usize) -> f64 {
    let k = k as f64;
    0.5 * ((k + 1.0).powf(exponent) - 2.0 * k.powf(exponent) + (k - 1.0).abs().powf(exponent))
}

/// First row of the size-2N circulant that embeds a symmetric covariance.
fn circulant_row(n: usize, cov: impl Fn(usize) -> f64) -> Vec<Complex<f64>> {
    let m = 2 * n;
    let mut row = vec![Complex::new(0.0, 0.0); m];
    for (k, c) in row.iter_mut().take(n + 1).enumerate() {
        *c = Complex::new(cov(k), 0.0);
    }
    for k in 1..n {
        row[m - k] = row[k];
    }
    row
}

fn spectrum(planner: &mut FftPlanner<f64>, mut row: Vec<Complex<f64>>) -> Vec<f64> {
    let fft = planner.plan_fft_forward(row.len());
    fft.process(&mut row);
    row.into_iter().map(|c| c.re).collect()
}

fn complex_normal(rng: &mut ChaCha8Rng) -> Complex<f64> {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex::new(re, im)
}

/// Exact fractional Gaussian noise with unit variance.
pub fn gen_fgn(spec: &FgnSpec) -> Result<TimeSeries> {
    spec.validate()?;
    let n = spec.length;
    let m = 2 * n;
    let exponent = 2.0 * spec.hurst;
    let mut planner = FftPlanner::new();
    let mut eig = spectrum(
        &mut planner,
        circulant_row(n, |k| fgn_autocovariance(exponent, k)),
    );
    let max = eig.iter().cloned().fold(0.0, f64::max);
    for (k, lambda) in eig.iter_mut().enumerate() {
        if *lambda < 0.0 {
            if -*lambda > EIGEN_CLAMP_TOLERANCE * max {
                return Err(Error::Generation(format!(
                    "circulant eigenvalue {lambda:e} at frequency {k} is negative (H={})",
                    spec.hurst
                )));
            }
            *lambda = 0.0;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut w: Vec<Complex<f64>> = eig
        .iter()
        .map(|&lambda| complex_normal(&mut rng) * (lambda / m as f64).sqrt())
        .collect();
    planner.plan_fft_forward(m).process(&mut w);
    let values = w[..n].iter().map(|c| c.re).collect();
    Ok(TimeSeries {
        values,
        label: Some("fgn".into()),
    })
}

/// Lower-triangular factor of the symmetric 2×2 block `[[a, b], [b, d]]`,
/// after clamping round-off negativity.
fn factor_2x2(a: f64, b: f64, d: f64) -> [f64; 3] {
    let a = a.max(0.0);
    let d = d.max(0.0);
    if a <= f64::MIN_POSITIVE {
        return [0.0, 0.0, d.sqrt()];
    }
    let l11 = a.sqrt();
    let l21 = b / l11;
    let schur = d - l21 * l21;
    // perfectly coherent blocks leave only round-off in the Schur complement
    let l22 = if schur <= 64.0 * f64::EPSILON * (a + d) {
        0.0
    } else {
        schur.sqrt()
    };
    [l11, l21, l22]
}

/// Increments of a time-reversible bivariate fractional Brownian motion.
///
/// Each component is unit-variance FGN with its own Hurst index, the
/// zero-lag correlation equals `corr`, and the cross-covariance scales with
/// the cross exponent `(Hx + Hy) / 2`.
pub fn gen_bfbm_increments(spec: &BfbmSpec) -> Result<(TimeSeries, TimeSeries)> {
    spec.validate()?;
    let n = spec.length;
    let m = 2 * n;
    let (ex, ey, exy) = (
        2.0 * spec.hurst_x,
        2.0 * spec.hurst_y,
        spec.hurst_x + spec.hurst_y,
    );
    let mut planner = FftPlanner::new();
    let gxx = spectrum(
        &mut planner,
        circulant_row(n, |k| fgn_autocovariance(ex, k)),
    );
    let gyy = spectrum(
        &mut planner,
        circulant_row(n, |k| fgn_autocovariance(ey, k)),
    );
    let gxy = spectrum(
        &mut planner,
        circulant_row(n, |k| spec.corr * fgn_autocovariance(exy, k)),
    );

    let mut max_eig = 0.0f64;
    let mut min_eig = f64::INFINITY;
    for k in 0..m {
        let half_trace = 0.5 * (gxx[k] + gyy[k]);
        let disc = (0.25 * (gxx[k] - gyy[k]).powi(2) + gxy[k] * gxy[k]).sqrt();
        max_eig = max_eig.max(half_trace + disc);
        min_eig = min_eig.min(half_trace - disc);
    }
    if min_eig < -EIGEN_CLAMP_TOLERANCE * max_eig {
        return Err(Error::Incoherent {
            hurst_x: spec.hurst_x,
            hurst_y: spec.hurst_y,
            corr: spec.corr,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let scale = 1.0 / (m as f64).sqrt();
    let mut wx = Vec::with_capacity(m);
    let mut wy = Vec::with_capacity(m);
    for k in 0..m {
        let [l11, l21, l22] = factor_2x2(gxx[k], gxy[k], gyy[k]);
        let u = complex_normal(&mut rng);
        let v = complex_normal(&mut rng);
        wx.push(u * (l11 * scale));
        wy.push((u * l21 + v * l22) * scale);
    }
    let fft = planner.plan_fft_forward(m);
    fft.process(&mut wx);
    fft.process(&mut wy);
    let rx = wx[..n].iter().map(|c| c.re).collect();
    let ry = wy[..n].iter().map(|c| c.re).collect();
    Ok((
        TimeSeries {
            values: rx,
            label: Some("r_x".into()),
        },
        TimeSeries {
            values: ry,
            label: Some("r_y".into()),
        },
    ))
}

/// Deterministic binomial measure on `2^depth` dyadic cells.
///
/// At every refinement each cell passes a fraction `p` of its mass to its
/// left child and `1 − p` to its right child; total mass is 1.
pub fn gen_binomial(spec: &BinomialSpec) -> Result<TimeSeries> {
    spec.validate()?;
    let len = 1usize
        .checked_shl(spec.depth)
        .filter(|&len| spec.depth < usize::BITS - 1 && len <= isize::MAX as usize / 8)
        .ok_or(Error::SizeOverflow { depth: spec.depth })?;
    let (p, q) = (spec.multiplier, 1.0 - spec.multiplier);
    let mut values = Vec::with_capacity(len);
    values.push(1.0);
    for _ in 0..spec.depth {
        values = values.iter().flat_map(|&m| [m * p, m * q]).collect();
    }
    Ok(TimeSeries {
        values,
        label: Some("binomial".into()),
    })
}

/// `x(t) = intercept + slope·z(t) + r(t)`.
pub fn contaminate(r: &TimeSeries, z: &TimeSeries, spec: &ContaminationSpec) -> Result<TimeSeries> {
    spec.validate()?;
    if r.len() != z.len() {
        return Err(Error::LengthMismatch {
            what: "contamination driver".into(),
            expected: r.len(),
            found: z.len(),
        });
    }
    let values = r
        .values
        .iter()
        .zip(&z.values)
        .map(|(r, z)| spec.intercept + spec.slope * z + r)
        .collect();
    Ok(TimeSeries {
        values,
        label: None,
    })
}

/// Closed-form mass exponent of the binomial measure, `−log2(p^q + (1−p)^q)`.
pub fn binomial_tau(p: f64, q: f64) -> f64 {
    -(p.powf(q) + (1.0 - p).powf(q)).log2()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean(v: &[f64]) -> f64 {
        v.iter().sum::<f64>() / v.len() as f64
    }

    fn lag_cov(v: &[f64], lag: usize) -> f64 {
        let m = mean(v);
        let n = v.len() - lag;
        (0..n).map(|i| (v[i] - m) * (v[i + lag] - m)).sum::<f64>() / n as f64
    }

    fn cross_corr(a: &[f64], b: &[f64]) -> f64 {
        let (ma, mb) = (mean(a), mean(b));
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn autocovariance_closed_form() {
        assert!((fgn_autocovariance(1.0, 0) - 1.0).abs() < 1e-15);
        assert!(fgn_autocovariance(1.0, 3).abs() < 1e-15);
        // γ(1) = 2^{2H-1} - 1
        let h: f64 = 0.3;
        assert!((fgn_autocovariance(2.0 * h, 1) - (2f64.powf(2.0 * h - 1.0) - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn white_noise_lag_one_is_small() {
        let n = 16384;
        let ts = gen_fgn(&FgnSpec {
            hurst: 0.5,
            length: n,
            seed: 7,
        })
        .unwrap();
        let v = ts.as_slice();
        let r1 = lag_cov(v, 1) / lag_cov(v, 0);
        assert!(r1.abs() < 3.0 / (n as f64).sqrt(), "lag-1 corr {r1}");
    }

    #[test]
    fn antipersistent_lag_one_covariance() {
        // target γ(1) = 2^{-0.4} - 1 = -0.2421; averaged over seeds
        let target = 2f64.powf(2.0 * 0.3 - 1.0) - 1.0;
        let mut acc = 0.0;
        let seeds = 10;
        for seed in 0..seeds {
            let ts = gen_fgn(&FgnSpec {
                hurst: 0.3,
                length: 4096,
                seed,
            })
            .unwrap();
            acc += lag_cov(ts.as_slice(), 1);
        }
        let got = acc / seeds as f64;
        assert!(((got - target) / target).abs() < 0.05, "{got} vs {target}");
    }

    #[test]
    fn fgn_moments_at_large_n() {
        let n = 65536;
        let ts = gen_fgn(&FgnSpec {
            hurst: 0.7,
            length: n,
            seed: 3,
        })
        .unwrap();
        let v = ts.as_slice();
        let tol = 5.0 / (n as f64).sqrt();
        assert!((lag_cov(v, 0) - 1.0).abs() < tol);
        let white = gen_fgn(&FgnSpec {
            hurst: 0.5,
            length: n,
            seed: 3,
        })
        .unwrap();
        assert!(mean(white.as_slice()).abs() < tol);
    }

    #[test]
    fn fgn_is_deterministic() {
        let spec = FgnSpec {
            hurst: 0.8,
            length: 1000,
            seed: 42,
        };
        let a = gen_fgn(&spec).unwrap();
        let b = gen_fgn(&spec).unwrap();
        assert_eq!(a.values, b.values);
        let c = gen_fgn(&FgnSpec { seed: 43, ..spec }).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn fgn_rejects_bad_hurst() {
        for h in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(gen_fgn(&FgnSpec {
                hurst: h,
                length: 10,
                seed: 0
            })
            .is_err());
        }
    }

    #[test]
    fn independent_white_components() {
        let n = 16384;
        let (x, y) = gen_bfbm_increments(&BfbmSpec {
            hurst_x: 0.5,
            hurst_y: 0.5,
            corr: 0.0,
            length: n,
            seed: 11,
        })
        .unwrap();
        let c = cross_corr(x.as_slice(), y.as_slice());
        assert!(c.abs() < 3.0 / (n as f64).sqrt(), "{c}");
    }

    #[test]
    fn bfbm_zero_lag_correlation() {
        let n = 65536;
        let mut acc = 0.0;
        for seed in 0..20 {
            let (x, y) = gen_bfbm_increments(&BfbmSpec {
                hurst_x: 0.1,
                hurst_y: 0.1,
                corr: 0.7,
                length: n,
                seed,
            })
            .unwrap();
            acc += cross_corr(x.as_slice(), y.as_slice());
        }
        let c = acc / 20.0;
        assert!((c - 0.7).abs() < 0.03, "{c}");
    }

    #[test]
    fn bfbm_perfect_coherence() {
        let spec = BfbmSpec {
            hurst_x: 0.6,
            hurst_y: 0.6,
            corr: 1.0,
            length: 2048,
            seed: 5,
        };
        let (x, y) = gen_bfbm_increments(&spec).unwrap();
        for (a, b) in x.values.iter().zip(&y.values) {
            assert!((a - b).abs() < 1e-9);
        }
        let (x, y) = gen_bfbm_increments(&BfbmSpec { corr: -1.0, ..spec }).unwrap();
        for (a, b) in x.values.iter().zip(&y.values) {
            assert!((a + b).abs() < 1e-9);
        }
    }

    #[test]
    fn bfbm_rejects_incoherent_triple() {
        // far-apart exponents cannot carry perfect correlation
        let err = gen_bfbm_increments(&BfbmSpec {
            hurst_x: 0.1,
            hurst_y: 0.9,
            corr: 1.0,
            length: 1024,
            seed: 0,
        })
        .unwrap_err();
        assert!(matches!(err, Error::Incoherent { .. }), "{err}");
    }

    #[test]
    fn binomial_examples() {
        let uniform = gen_binomial(&BinomialSpec {
            multiplier: 0.5,
            depth: 10,
        })
        .unwrap();
        assert_eq!(uniform.len(), 1024);
        assert!(uniform.values.iter().all(|&v| v == 2f64.powi(-10)));

        let m = gen_binomial(&BinomialSpec {
            multiplier: 0.3,
            depth: 4,
        })
        .unwrap();
        let max = m.values.iter().cloned().fold(f64::MIN, f64::max);
        let min = m.values.iter().cloned().fold(f64::MAX, f64::min);
        assert!((max - 0.2401).abs() < 1e-15);
        assert!((min - 0.0081).abs() < 1e-15);
        assert!((m.values[0] - 0.0081).abs() < 1e-15);
    }

    fn compensated_sum(v: &[f64]) -> f64 {
        let (mut sum, mut c) = (0.0f64, 0.0f64);
        for &x in v {
            let t = sum + x;
            if sum.abs() >= x.abs() {
                c += (sum - t) + x;
            } else {
                c += (x - t) + sum;
            }
            sum = t;
        }
        sum + c
    }

    #[test]
    fn binomial_mass_is_one() {
        for depth in 0..=20 {
            for p in [0.1, 0.3, 0.4, 0.77] {
                let m = gen_binomial(&BinomialSpec {
                    multiplier: p,
                    depth,
                })
                .unwrap();
                assert_eq!(m.len(), 1 << depth);
                assert!((compensated_sum(&m.values) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn binomial_overflow_is_rejected() {
        let err = gen_binomial(&BinomialSpec {
            multiplier: 0.3,
            depth: 70,
        })
        .unwrap_err();
        assert!(matches!(err, Error::SizeOverflow { depth: 70 }));
    }

    #[test]
    fn contaminate_examples() {
        let spec = ContaminationSpec {
            intercept: 2.0,
            slope: 3.0,
        };
        let r = TimeSeries::new(vec![1.0, 2.0]).unwrap();
        let z = TimeSeries::new(vec![0.0, 0.0]).unwrap();
        assert_eq!(contaminate(&r, &z, &spec).unwrap().values, vec![3.0, 4.0]);
        let r = TimeSeries::new(vec![0.0, 0.0]).unwrap();
        let z = TimeSeries::new(vec![1.0, 2.0]).unwrap();
        assert_eq!(contaminate(&r, &z, &spec).unwrap().values, vec![5.0, 8.0]);
        let z = TimeSeries::new(vec![1.0]).unwrap();
        assert!(matches!(
            contaminate(&r, &z, &spec),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
