//! Fluctuation functions of the DFA / DCCA / DPXA family and the
//! scale-dependent correlation coefficients built from them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detrend::{profile, residuals_only, DetrendConfig, Detrender, ForceMatrix};
use crate::error::{Error, Result};
use crate::types::{partition_windows, QGrid, ScaleGrid, TimeSeries, Q_ZERO_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnalysisKind {
    Dfa,
    Dcca,
    Dpxa,
}

impl AnalysisKind {
    pub fn name(self) -> &'static str {
        match self {
            AnalysisKind::Dfa => "dfa",
            AnalysisKind::Dcca => "dcca",
            AnalysisKind::Dpxa => "dpxa",
        }
    }
}

/// `F(q, s)` over a q-grid × scale-grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluctuationSurface {
    pub kind: AnalysisKind,
    pub scales: ScaleGrid,
    pub orders: QGrid,
    /// `values[qi][si]`.
    pub values: Vec<Vec<f64>>,
    /// Signed mean detrended covariance per scale (q = 2, no absolute value).
    pub cov2: Vec<f64>,
    pub window_counts: Vec<usize>,
    /// Windows with exactly zero covariance, left out of the q = 0 average.
    pub zero_windows: Vec<usize>,
    pub rank_deficient_windows: Vec<usize>,
}

impl FluctuationSurface {
    /// Row of `F(q, ·)` for an order on the grid.
    pub fn row(&self, q: f64) -> Option<&[f64]> {
        self.orders.position(q).map(|i| self.values[i].as_slice())
    }
}

/// Scale-dependent DCCA / DPXA correlation coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoCurve {
    pub kind: AnalysisKind,
    pub scales: ScaleGrid,
    pub rho: Vec<f64>,
}

/// Mean product of two detrended window profiles (signed).
pub fn window_cov(rx: &[f64], ry: &[f64]) -> f64 {
    assert_eq!(rx.len(), ry.len(), "window_cov needs equal-length windows");
    rx.iter().zip(ry).map(|(a, b)| a * b).sum::<f64>() / rx.len() as f64
}

#[derive(Debug, Clone, Copy)]
struct WindowStats {
    xy: f64,
    xx: f64,
    yy: f64,
}

struct ScaleStats {
    windows: Vec<WindowStats>,
    rank_deficient: usize,
}

fn check_inputs(
    x: &TimeSeries,
    y: &TimeSeries,
    forces: &ForceMatrix,
    grid: &ScaleGrid,
) -> Result<usize> {
    let len = x.len();
    if y.len() != len {
        return Err(Error::LengthMismatch {
            what: "second series".into(),
            expected: len,
            found: y.len(),
        });
    }
    if let Some(flen) = forces.series_len() {
        if flen != len {
            return Err(Error::LengthMismatch {
                what: "force series".into(),
                expected: len,
                found: flen,
            });
        }
    }
    grid.check_against(len)?;
    Ok(len)
}

/// Per-window pipeline: regression on the forces, residual profile, local
/// detrending, and the three second moments of the detrended profiles.
fn partial_scale_stats(
    x: &[f64],
    y: &[f64],
    forces: &ForceMatrix,
    scale: usize,
    cfg: &DetrendConfig,
) -> Result<ScaleStats> {
    let detrender = Detrender::new(cfg, scale)?;
    let partition = partition_windows(x.len(), scale)?;
    let mut windows = Vec::with_capacity(partition.box_count);
    let mut rank_deficient = 0;
    for range in partition.boxes() {
        let block = forces.block(range.clone());
        let (res, deficient) =
            residuals_only(&[&x[range.clone()], &y[range]], &block, cfg.with_intercept)?;
        rank_deficient += usize::from(deficient);
        let mut px = profile(&res[0]);
        let mut py = profile(&res[1]);
        detrender.detrend(&mut px);
        detrender.detrend(&mut py);
        windows.push(WindowStats {
            xy: window_cov(&px, &py),
            xx: window_cov(&px, &px),
            yy: window_cov(&py, &py),
        });
    }
    Ok(ScaleStats {
        windows,
        rank_deficient,
    })
}

/// Classic pipeline on global profiles: `Y(i) = Σ (x − mean x)`, with each
/// window of the profile detrended in place.
fn global_scale_stats(
    px: &[f64],
    py: &[f64],
    scale: usize,
    cfg: &DetrendConfig,
) -> Result<ScaleStats> {
    let detrender = Detrender::new(cfg, scale)?;
    let partition = partition_windows(px.len(), scale)?;
    let windows = partition
        .boxes()
        .map(|range| {
            // re-anchor at the value preceding the window; a constant offset
            // is annihilated by every detrender and this keeps magnitudes local
            let (bx, by) = match range.start {
                0 => (0.0, 0.0),
                i => (px[i - 1], py[i - 1]),
            };
            let mut wx: Vec<f64> = px[range.clone()].iter().map(|v| v - bx).collect();
            let mut wy: Vec<f64> = py[range].iter().map(|v| v - by).collect();
            detrender.detrend(&mut wx);
            detrender.detrend(&mut wy);
            WindowStats {
                xy: window_cov(&wx, &wy),
                xx: window_cov(&wx, &wx),
                yy: window_cov(&wy, &wy),
            }
        })
        .collect();
    Ok(ScaleStats {
        windows,
        rank_deficient: 0,
    })
}

fn centered_profile(x: &[f64]) -> Vec<f64> {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let centered: Vec<f64> = x.iter().map(|v| v - mean).collect();
    profile(&centered)
}

/// Moment of order `q` of `|F_v²|^{1/2}` over windows: the power mean for
/// q ≠ 0 and the geometric mean (zero windows skipped) for q = 0.
/// Returns the value and the number of skipped windows.
fn aggregate(window_sq: &[f64], q: f64) -> (f64, usize) {
    if q.abs() < Q_ZERO_TOLERANCE {
        let logs: Vec<f64> = window_sq
            .iter()
            .filter(|v| **v != 0.0)
            .map(|v| 0.5 * v.abs().ln())
            .collect();
        let skipped = window_sq.len() - logs.len();
        if logs.is_empty() {
            return (0.0, skipped);
        }
        let mean = logs.iter().sum::<f64>() / logs.len() as f64;
        return (mean.exp(), skipped);
    }
    if q == 2.0 {
        let mean = window_sq.iter().map(|v| v.abs()).sum::<f64>() / window_sq.len() as f64;
        return (mean.sqrt(), 0);
    }
    // log-domain power mean; avoids overflow of |F²|^{q/2} for large |q|
    let logs: Vec<f64> = window_sq.iter().map(|v| 0.5 * q * v.abs().ln()).collect();
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::INFINITY {
        return (0.0, 0);
    }
    if max == f64::NEG_INFINITY {
        return (0.0, 0);
    }
    let mean = logs.iter().map(|l| (l - max).exp()).sum::<f64>() / logs.len() as f64;
    (((max + mean.ln()) / q).exp(), 0)
}

fn build_surface(
    kind: AnalysisKind,
    grid: &ScaleGrid,
    orders: &QGrid,
    stats: Vec<ScaleStats>,
) -> Result<FluctuationSurface> {
    let mut values = vec![Vec::with_capacity(grid.len()); orders.len()];
    let mut cov2 = Vec::with_capacity(grid.len());
    let mut window_counts = Vec::with_capacity(grid.len());
    let mut zero_windows = Vec::with_capacity(grid.len());
    let mut rank_deficient_windows = Vec::with_capacity(grid.len());
    for (&s, st) in grid.scales().iter().zip(stats) {
        let sq: Vec<f64> = st.windows.iter().map(|w| w.xy).collect();
        if sq.iter().all(|v| *v == 0.0) {
            return Err(Error::Degenerate(format!(
                "every window at scale {s} has zero detrended covariance"
            )));
        }
        let mut zeros = 0;
        for (qi, &q) in orders.orders().iter().enumerate() {
            let (f, skipped) = aggregate(&sq, q);
            zeros = zeros.max(skipped);
            values[qi].push(f);
        }
        cov2.push(sq.iter().sum::<f64>() / sq.len() as f64);
        window_counts.push(sq.len());
        zero_windows.push(zeros);
        rank_deficient_windows.push(st.rank_deficient);
    }
    Ok(FluctuationSurface {
        kind,
        scales: grid.clone(),
        orders: orders.clone(),
        values,
        cov2,
        window_counts,
        zero_windows,
        rank_deficient_windows,
    })
}

/// Detrended partial cross-correlation fluctuation surface of `x` and `y`
/// given the external forces.
///
/// With no forces this is DCCA computed on per-window profiles; the
/// surface kind is reported accordingly. For polynomial detrending of order
/// at least one it coincides with [`dcca`] up to round-off; the moving
/// average does not annihilate the linear term left by mean removal.
pub fn fluctuation_dpxa(
    x: &TimeSeries,
    y: &TimeSeries,
    forces: &ForceMatrix,
    grid: &ScaleGrid,
    orders: &QGrid,
    cfg: &DetrendConfig,
) -> Result<FluctuationSurface> {
    check_inputs(x, y, forces, grid)?;
    let stats = grid
        .scales()
        .par_iter()
        .map(|&s| partial_scale_stats(&x.values, &y.values, forces, s, cfg))
        .collect::<Result<Vec<_>>>()?;
    let kind = if forces.is_empty() {
        AnalysisKind::Dcca
    } else {
        AnalysisKind::Dpxa
    };
    build_surface(kind, grid, orders, stats)
}

/// Detrended fluctuation analysis (MF-DFA for a multi-order grid).
pub fn dfa(
    x: &TimeSeries,
    grid: &ScaleGrid,
    orders: &QGrid,
    cfg: &DetrendConfig,
) -> Result<FluctuationSurface> {
    grid.check_against(x.len())?;
    let px = centered_profile(&x.values);
    let stats = grid
        .scales()
        .par_iter()
        .map(|&s| global_scale_stats(&px, &px, s, cfg))
        .collect::<Result<Vec<_>>>()?;
    build_surface(AnalysisKind::Dfa, grid, orders, stats)
}

/// Detrended cross-correlation analysis (MF-DCCA for a multi-order grid).
pub fn dcca(
    x: &TimeSeries,
    y: &TimeSeries,
    grid: &ScaleGrid,
    orders: &QGrid,
    cfg: &DetrendConfig,
) -> Result<FluctuationSurface> {
    check_inputs(x, y, &ForceMatrix::empty(), grid)?;
    let px = centered_profile(&x.values);
    let py = centered_profile(&y.values);
    let stats = grid
        .scales()
        .par_iter()
        .map(|&s| global_scale_stats(&px, &py, s, cfg))
        .collect::<Result<Vec<_>>>()?;
    build_surface(AnalysisKind::Dcca, grid, orders, stats)
}

/// `ρ(s) = cov(s) / (F_x(s) F_y(s))` where all three moments come from the
/// same per-window regression on the forces. With no forces this is the
/// DCCA coefficient.
pub fn rho_curve(
    x: &TimeSeries,
    y: &TimeSeries,
    forces: &ForceMatrix,
    grid: &ScaleGrid,
    cfg: &DetrendConfig,
) -> Result<RhoCurve> {
    check_inputs(x, y, forces, grid)?;
    let stats = grid
        .scales()
        .par_iter()
        .map(|&s| partial_scale_stats(&x.values, &y.values, forces, s, cfg))
        .collect::<Result<Vec<_>>>()?;
    let mut rho = Vec::with_capacity(grid.len());
    for (&s, st) in grid.scales().iter().zip(&stats) {
        let n = st.windows.len() as f64;
        let (mut xy, mut xx, mut yy) = (0.0, 0.0, 0.0);
        for w in &st.windows {
            xy += w.xy;
            xx += w.xx;
            yy += w.yy;
        }
        let denom = (xx / n).sqrt() * (yy / n).sqrt();
        if denom.is_nan() || denom <= 0.0 {
            return Err(Error::Degenerate(format!(
                "zero detrended variance at scale {s}"
            )));
        }
        rho.push((xy / n / denom).clamp(-1.0, 1.0));
    }
    let kind = if forces.is_empty() {
        AnalysisKind::Dcca
    } else {
        AnalysisKind::Dpxa
    };
    Ok(RhoCurve {
        kind,
        scales: grid.clone(),
        rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detrend::DetrendMethod;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise(n: usize, seed: u64) -> TimeSeries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        TimeSeries::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn window_cov_examples() {
        assert_eq!(window_cov(&[1.0, -1.0], &[1.0, -1.0]), 1.0);
        assert_eq!(window_cov(&[1.0, -1.0], &[-1.0, 1.0]), -1.0);
        assert!((window_cov(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]) - 28.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn reductions_are_exact() {
        let x = noise(2000, 1);
        let y = noise(2000, 2);
        let grid = ScaleGrid::default_for(2000).unwrap();
        // orders q <= 0 of a cross pair are dominated by windows whose signed
        // covariance nearly cancels, which amplifies round-off; q = 0 gets a
        // looser bound below
        let q = QGrid::linspace(1.0, 4.0, 4).unwrap();
        let q0 = QGrid::new(vec![0.0]).unwrap();
        let q_all = QGrid::linspace(-4.0, 4.0, 9).unwrap();
        for cfg in [
            DetrendConfig::polynomial(1).without_intercept(),
            DetrendConfig::polynomial(1),
            DetrendConfig::polynomial(3),
        ] {
            let a = fluctuation_dpxa(&x, &y, &ForceMatrix::empty(), &grid, &q, &cfg).unwrap();
            let b = dcca(&x, &y, &grid, &q, &cfg).unwrap();
            for (ra, rb) in a.values.iter().zip(&b.values) {
                for (va, vb) in ra.iter().zip(rb) {
                    assert!(rel(*va, *vb) < 1e-12, "{cfg:?}: {va} vs {vb}");
                }
            }
            let a0 = fluctuation_dpxa(&x, &y, &ForceMatrix::empty(), &grid, &q0, &cfg).unwrap();
            let b0 = dcca(&x, &y, &grid, &q0, &cfg).unwrap();
            for (va, vb) in a0.values[0].iter().zip(&b0.values[0]) {
                assert!(rel(*va, *vb) < 1e-9, "{cfg:?} q=0: {va} vs {vb}");
            }
            let self_cross = dcca(&x, &x, &grid, &q_all, &cfg).unwrap();
            let direct = dfa(&x, &grid, &q_all, &cfg).unwrap();
            assert_eq!(self_cross.values, direct.values);
        }
    }

    #[test]
    fn white_noise_dfa_exponent_near_half() {
        let x = noise(16384, 9);
        let grid = ScaleGrid::default_for(x.len()).unwrap();
        let s = dfa(&x, &grid, &QGrid::second_order(), &DetrendConfig::default()).unwrap();
        let (ls, lf): (Vec<f64>, Vec<f64>) = grid
            .scales()
            .iter()
            .zip(&s.values[0])
            .map(|(&s, f)| ((s as f64).ln(), f.ln()))
            .unzip();
        let n = ls.len() as f64;
        let (mx, my) = (ls.iter().sum::<f64>() / n, lf.iter().sum::<f64>() / n);
        let slope = ls
            .iter()
            .zip(&lf)
            .map(|(a, b)| (a - mx) * (b - my))
            .sum::<f64>()
            / ls.iter().map(|a| (a - mx).powi(2)).sum::<f64>();
        assert!((slope - 0.5).abs() < 0.05, "{slope}");
    }

    #[test]
    fn rho_self_and_flip() {
        let x = noise(1000, 4);
        let grid = ScaleGrid::default_for(1000).unwrap();
        let cfg = DetrendConfig::default();
        let r = rho_curve(&x, &x, &ForceMatrix::empty(), &grid, &cfg).unwrap();
        assert!(r.rho.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let neg = x.affine(-1.0, 0.0);
        let r = rho_curve(&x, &neg, &ForceMatrix::empty(), &grid, &cfg).unwrap();
        assert!(r.rho.iter().all(|v| (v + 1.0).abs() < 1e-12));
        assert_eq!(r.kind, AnalysisKind::Dcca);
    }

    #[test]
    fn rho_affine_invariance() {
        let x = noise(1200, 5);
        let y = noise(1200, 6);
        let z = noise(1200, 7);
        let grid = ScaleGrid::default_for(1200).unwrap();
        let cfg = DetrendConfig::default();
        let base = rho_curve(&x, &y, &ForceMatrix::empty(), &grid, &cfg).unwrap();
        let shifted =
            rho_curve(&x.affine(3.5, -7.0), &y, &ForceMatrix::empty(), &grid, &cfg).unwrap();
        for (a, b) in base.rho.iter().zip(&shifted.rho) {
            assert!((a - b).abs() < 1e-10);
        }
        let forces = ForceMatrix::single(z.clone());
        let base = rho_curve(&x, &y, &forces, &grid, &cfg).unwrap();
        let moved = TimeSeries::new(
            x.values
                .iter()
                .zip(&z.values)
                .map(|(a, b)| a + 4.0 - 2.5 * b)
                .collect(),
        )
        .unwrap();
        let after = rho_curve(&moved, &y, &forces, &grid, &cfg).unwrap();
        for (a, b) in base.rho.iter().zip(&after.rho) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn q2_matches_direct_aggregation() {
        let x = noise(800, 11);
        let y = noise(800, 12);
        let z = noise(800, 13);
        let forces = ForceMatrix::single(z.clone());
        let grid = ScaleGrid::new(vec![10, 25, 50, 100, 200]).unwrap();
        let cfg = DetrendConfig::default();
        let surf = fluctuation_dpxa(&x, &y, &forces, &grid, &QGrid::second_order(), &cfg).unwrap();
        // compose the public per-window operations by hand
        for (si, &s) in grid.scales().iter().enumerate() {
            let mut acc = 0.0;
            let mut signed = 0.0;
            let m = 800 / s;
            for v in 0..m {
                let r = v * s..(v + 1) * s;
                let w = crate::detrend::window_residuals(
                    &x.values[r.clone()],
                    &y.values[r.clone()],
                    &[&z.values[r]],
                    true,
                )
                .unwrap();
                let px = profile(&w.rx);
                let py = profile(&w.ry);
                let tx = crate::detrend::local_trend(&px, &cfg).unwrap();
                let ty = crate::detrend::local_trend(&py, &cfg).unwrap();
                let dx: Vec<f64> = px.iter().zip(&tx).map(|(a, b)| a - b).collect();
                let dy: Vec<f64> = py.iter().zip(&ty).map(|(a, b)| a - b).collect();
                let c = window_cov(&dx, &dy);
                acc += c.abs();
                signed += c;
            }
            let expected = (acc / m as f64).sqrt();
            assert!(rel(surf.values[0][si], expected) < 1e-10);
            assert!((surf.cov2[si] - signed / m as f64).abs() < 1e-10 * expected * expected);
        }
    }

    #[test]
    fn fully_explained_series_is_degenerate() {
        let z = noise(400, 3);
        let x = z.affine(2.0, 1.0);
        let y = noise(400, 4);
        let grid = ScaleGrid::new(vec![10, 20, 40, 100]).unwrap();
        let err = fluctuation_dpxa(
            &x,
            &y,
            &ForceMatrix::single(z),
            &grid,
            &QGrid::second_order(),
            &DetrendConfig::default(),
        );
        // x residuals vanish up to round-off; y residuals do not
        match err {
            Err(Error::Degenerate(_)) => {}
            Ok(s) => assert!(s.values[0].iter().all(|v| *v < 1e-6)),
            Err(e) => panic!("{e}"),
        }
        let zero = TimeSeries::new(vec![0.0; 400]).unwrap();
        assert!(matches!(
            dfa(
                &zero,
                &grid,
                &QGrid::second_order(),
                &DetrendConfig::default()
            ),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn scales_beyond_quarter_length_rejected() {
        let x = noise(100, 1);
        let grid = ScaleGrid::new(vec![10, 26]).unwrap();
        assert!(matches!(
            dfa(&x, &grid, &QGrid::second_order(), &DetrendConfig::default()),
            Err(Error::InvalidScale {
                scale: 26,
                len: 100
            })
        ));
    }

    #[test]
    fn length_mismatch_rejected() {
        let grid = ScaleGrid::new(vec![10]).unwrap();
        let e = fluctuation_dpxa(
            &noise(100, 1),
            &noise(99, 2),
            &ForceMatrix::empty(),
            &grid,
            &QGrid::second_order(),
            &DetrendConfig::default(),
        );
        assert!(matches!(e, Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn moving_average_variant_runs() {
        let x = noise(1000, 21);
        let grid = ScaleGrid::default_for(1000).unwrap();
        let cfg = DetrendConfig {
            method: DetrendMethod::MovingAverage,
            poly_order: 0,
            with_intercept: true,
        };
        let s = fluctuation_dpxa(
            &x,
            &x,
            &ForceMatrix::single(noise(1000, 22)),
            &grid,
            &QGrid::second_order(),
            &cfg,
        )
        .unwrap();
        assert!(s.values[0].iter().all(|v| *v > 0.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn f_is_nondecreasing_in_q(seed in any::<u64>()) {
            let x = noise(600, seed);
            let y = noise(600, seed ^ 0xdead);
            let grid = ScaleGrid::new(vec![10, 30, 75, 150]).unwrap();
            let q = QGrid::linspace(-4.0, 4.0, 9).unwrap();
            let s = dcca(&x, &y, &grid, &q, &DetrendConfig::default()).unwrap();
            for si in 0..grid.len() {
                for qi in 1..q.len() {
                    prop_assert!(s.values[qi][si] >= s.values[qi - 1][si] * (1.0 - 1e-12));
                }
            }
        }
    }
}
