//! End-to-end checks across generators, analysis, scaling and reporting.

use dpxa_core::experiments::{model_series, run_rho_comparison, RhoSpec};
use dpxa_core::report::{document, fit_table, surface_table};
use dpxa_core::table::Table;
use dpxa_core::{
    contaminate, dcca, dfa, fluctuation_dpxa, gen_bfbm_increments, gen_fgn, rho_curve, BfbmSpec,
    ContaminationSpec, DetrendConfig, FgnSpec, ForceMatrix, QGrid, ScaleGrid, ScalingFit,
};

fn h2(s: dpxa_core::FluctuationSurface) -> f64 {
    ScalingFit::analyze(&s, None).unwrap().h[0]
}

#[test]
fn common_driver_masks_dcca_but_not_dpxa() {
    let [x, y, z, rx, ry] = model_series(
        [0.2, 0.4, 0.9],
        0.5,
        1 << 14,
        ContaminationSpec::default(),
        11,
    )
    .unwrap();
    let grid = ScaleGrid::default_for(x.len()).unwrap();
    let q = QGrid::second_order();
    let cfg = DetrendConfig::default();
    let naive = h2(dcca(&x, &y, &grid, &q, &cfg).unwrap());
    let partial = h2(fluctuation_dpxa(&x, &y, &ForceMatrix::single(z), &grid, &q, &cfg).unwrap());
    let hidden = h2(dcca(&rx, &ry, &grid, &q, &cfg).unwrap());
    assert!(
        (naive - 0.9).abs() < 0.05,
        "DCCA follows the driver: {naive}"
    );
    assert!((partial - hidden).abs() < 0.03, "{partial} vs {hidden}");
}

#[test]
fn two_forces_are_removed_together() {
    let n = 1 << 13;
    let z1 = gen_fgn(&FgnSpec {
        hurst: 0.9,
        length: n,
        seed: 1,
    })
    .unwrap();
    let z2 = gen_fgn(&FgnSpec {
        hurst: 0.8,
        length: n,
        seed: 2,
    })
    .unwrap();
    let (rx, ry) = gen_bfbm_increments(&BfbmSpec {
        hurst_x: 0.3,
        hurst_y: 0.3,
        corr: 0.6,
        length: n,
        seed: 3,
    })
    .unwrap();
    let beta = ContaminationSpec {
        intercept: 1.0,
        slope: 2.0,
    };
    let x = contaminate(&contaminate(&rx, &z1, &beta).unwrap(), &z2, &beta).unwrap();
    let y = contaminate(&contaminate(&ry, &z1, &beta).unwrap(), &z2, &beta).unwrap();
    let grid = ScaleGrid::default_for(n).unwrap();
    let cfg = DetrendConfig::default();
    let both = ForceMatrix::new(vec![z1.clone(), z2]).unwrap();
    let one = ForceMatrix::single(z1);
    let full = rho_curve(&x, &y, &both, &grid, &cfg).unwrap();
    let partial = rho_curve(&x, &y, &one, &grid, &cfg).unwrap();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!((mean(&full.rho) - 0.6).abs() < 0.08, "{:?}", full.rho);
    assert!(mean(&partial.rho) > 0.9, "{:?}", partial.rho);
}

#[test]
fn generated_tables_round_trip_into_analysis() {
    let z = gen_fgn(&FgnSpec {
        hurst: 0.6,
        length: 4096,
        seed: 9,
    })
    .unwrap();
    let mut t = Table::new();
    t.push("z", z.values.clone()).unwrap();
    let back = Table::read(t.to_csv_string().unwrap().as_bytes()).unwrap();
    let series = back.series("z").unwrap();
    for (a, b) in series.values.iter().zip(&z.values) {
        assert!((a - b).abs() <= 1e-11 * b.abs().max(1.0));
    }
    let grid = ScaleGrid::default_for(4096).unwrap();
    let q = QGrid::linspace(-2.0, 2.0, 5).unwrap();
    let surface = dfa(&series, &grid, &q, &DetrendConfig::default()).unwrap();
    let fit = ScalingFit::analyze(&surface, None).unwrap();
    assert_eq!(surface_table(&surface).rows(), 5 * grid.len());
    assert_eq!(fit_table(&fit).rows(), 5);
    let doc = document("test", &grid, &fit).unwrap();
    assert_eq!(doc, document("test", &grid, &fit).unwrap());
    let parsed: serde_json::Value = serde_json::from_str(&doc).unwrap();
    assert_eq!(
        parsed["config"]["scales"].as_array().unwrap().len(),
        grid.len()
    );
}

#[test]
fn rho_without_coupling_stays_near_zero() {
    let spec = RhoSpec {
        corr: 0.0,
        hurst_rx: 0.3,
        hurst_ry: 0.3,
        hurst_z: 0.8,
        length: 1 << 14,
        seeds: 4,
        ..RhoSpec::masked_desk()
    };
    let r = run_rho_comparison(&spec).unwrap();
    let upper = spec.length / 10;
    for (i, &s) in r.scales.iter().enumerate().filter(|(_, &s)| s <= upper) {
        assert!(r.rho_dpxa[i].abs() < 0.1, "ρ_DPXA({s}) = {}", r.rho_dpxa[i]);
        assert!(
            r.rho_dcca_rr[i].abs() < 0.1,
            "ρ_DCCA(rr)({s}) = {}",
            r.rho_dcca_rr[i]
        );
        assert!(
            r.rho_dcca_xy[i] > 0.9,
            "ρ_DCCA(xy)({s}) = {}",
            r.rho_dcca_xy[i]
        );
    }
}

#[test]
fn perfectly_coupled_components_give_unit_rho() {
    let spec = RhoSpec {
        corr: 1.0,
        hurst_rx: 0.4,
        hurst_ry: 0.4,
        hurst_z: 0.7,
        length: 1 << 13,
        seeds: 2,
        ..RhoSpec::masked_desk()
    };
    let r = run_rho_comparison(&spec).unwrap();
    for v in &r.rho_dpxa {
        assert!((v - 1.0).abs() < 1e-6, "{v}");
    }
}
