//! Deterministic serialization of results.
//!
//! Numbers are written with 12 significant digits and JSON keys are sorted,
//! so reruns with the same inputs produce identical bytes.

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::Result;
use crate::experiments::{Check, MfRecovery, RhoComparison, SweepResult};
use crate::fluctuation::{FluctuationSurface, RhoCurve};
use crate::scaling::ScalingFit;
use crate::table::Table;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds to [`SIGNIFICANT_DIGITS`]; non-finite values pass through.
pub fn round_sig(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v)
        .parse()
        .expect("formatted float parses")
}

/// Shortest text for the rounded value.
pub fn fmt_num(v: f64) -> String {
    let r = round_sig(v);
    if r == 0.0 || !r.is_finite() {
        return format!("{r}");
    }
    let a = r.abs();
    if (1e-4..1e15).contains(&a) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if !(n.is_i64() || n.is_u64()) {
                    if let Some(m) = serde_json::Number::from_f64(round_sig(f)) {
                        *n = m;
                    }
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with rounded numbers and sorted keys.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

/// `{ "kind", "config", "result", "provenance" }` document. `config` is the
/// complete effective configuration, enough to regenerate the result.
pub fn document<C: Serialize, R: Serialize>(kind: &str, config: &C, result: &R) -> Result<String> {
    let mut provenance = Map::new();
    provenance.insert("crate".into(), env!("CARGO_PKG_NAME").into());
    provenance.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    provenance.insert("significant_digits".into(), SIGNIFICANT_DIGITS.into());
    let mut doc = Map::new();
    doc.insert("kind".into(), kind.into());
    doc.insert("config".into(), serde_json::to_value(config)?);
    doc.insert("result".into(), serde_json::to_value(result)?);
    doc.insert("provenance".into(), Value::Object(provenance));
    to_json(&Value::Object(doc))
}

/// Long format: one row per `(q, scale)`.
pub fn surface_table(surface: &FluctuationSurface) -> Table {
    let scales = surface.scales.scales();
    let mut q = Vec::new();
    let mut s = Vec::new();
    let mut f = Vec::new();
    let mut cov = Vec::new();
    let mut windows = Vec::new();
    for (qi, &order) in surface.orders.orders().iter().enumerate() {
        for (si, &scale) in scales.iter().enumerate() {
            q.push(order);
            s.push(scale as f64);
            f.push(surface.values[qi][si]);
            cov.push(surface.cov2[si]);
            windows.push(surface.window_counts[si] as f64);
        }
    }
    let mut t = Table::new();
    for (name, col) in [
        ("q", q),
        ("scale", s),
        ("fluctuation", f),
        ("cov2", cov),
        ("windows", windows),
    ] {
        t.push(name, col).expect("columns share one length");
    }
    t
}

pub fn rho_table(curve: &RhoCurve) -> Table {
    let mut t = Table::new();
    t.push(
        "scale",
        curve.scales.scales().iter().map(|&s| s as f64).collect(),
    )
    .expect("fresh table");
    t.push("rho", curve.rho.clone())
        .expect("one value per scale");
    t
}

/// One row per order: `q, h, stderr, r², τ, α, f(α)`. Missing α / f are NaN.
pub fn fit_table(fit: &ScalingFit) -> Table {
    let n = fit.orders.len();
    let opt = |v: &Option<Vec<Option<f64>>>| -> Vec<f64> {
        match v {
            Some(v) => v.iter().map(|x| x.unwrap_or(f64::NAN)).collect(),
            None => vec![f64::NAN; n],
        }
    };
    let mut t = Table::new();
    let cols = [
        ("q", fit.orders.clone()),
        ("h", fit.h.clone()),
        ("h_stderr", fit.h_stderr.clone()),
        ("r_squared", fit.r_squared.clone()),
        ("tau", fit.tau.clone().unwrap_or_else(|| vec![f64::NAN; n])),
        ("alpha", opt(&fit.alpha)),
        ("f_alpha", opt(&fit.f_alpha)),
    ];
    for (name, col) in cols {
        t.push(name, col).expect("one value per order");
    }
    t
}

/// Rows of `(label, statistic, value)` flattened into a CSV string.
fn long_csv(rows: &[(String, &str, f64)], label_header: &str) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([label_header, "statistic", "value"])?;
    for (label, stat, v) in rows {
        w.write_record([label.as_str(), stat, &fmt_num(*v)])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf-8"))
}

/// One row per `(triple, statistic)`.
pub fn sweep_csv(r: &SweepResult) -> Result<String> {
    let mut rows = Vec::new();
    for t in &r.triples {
        let label = format!(
            "{}/{}/{}",
            fmt_num(t.hurst[0]),
            fmt_num(t.hurst[1]),
            fmt_num(t.hurst[2])
        );
        for (stat, v) in [
            ("h_rx", t.h_rx),
            ("h_ry", t.h_ry),
            ("h_z", t.h_z),
            ("h_x", t.h_x),
            ("h_y", t.h_y),
            ("h_xy", t.h_xy),
            ("h_rxry", t.h_rxry),
            ("h_xy_given_z", t.h_xy_given_z),
        ] {
            rows.push((label.clone(), stat, v));
        }
    }
    long_csv(&rows, "triple")
}

/// One row per `(scale, curve)`.
pub fn rho_comparison_csv(r: &RhoComparison) -> Result<String> {
    let mut rows = Vec::new();
    for (i, &s) in r.scales.iter().enumerate() {
        for (curve, v) in [
            ("rho_dcca_xy", r.rho_dcca_xy[i]),
            ("rho_dcca_rr", r.rho_dcca_rr[i]),
            ("rho_dpxa", r.rho_dpxa[i]),
        ] {
            rows.push((s.to_string(), curve, v));
        }
    }
    long_csv(&rows, "scale")
}

/// One row per `(q, curve, statistic)` covering h, τ, α and f.
pub fn mf_csv(r: &MfRecovery) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["q", "curve", "h", "tau", "alpha", "f_alpha"])?;
    let nan = f64::NAN;
    for (name, fit) in [
        ("dcca_xy", &r.dcca_xy),
        ("dpxa", &r.dpxa),
        ("dcca_rr", &r.dcca_rr),
    ] {
        for (i, &q) in fit.orders.iter().enumerate() {
            let pick = |v: &Option<Vec<Option<f64>>>| v.as_ref().and_then(|v| v[i]).unwrap_or(nan);
            w.write_record([
                fmt_num(q),
                name.to_string(),
                fmt_num(fit.h[i]),
                fmt_num(fit.tau.as_ref().map_or(nan, |t| t[i])),
                fmt_num(pick(&fit.alpha)),
                fmt_num(pick(&fit.f_alpha)),
            ])?;
        }
    }
    let t = &r.theory;
    for (i, &q) in t.orders.iter().enumerate() {
        w.write_record([
            fmt_num(q),
            "theory".to_string(),
            fmt_num((t.tau[i] + 1.0) / q),
            fmt_num(t.tau[i]),
            fmt_num(t.alpha[i]),
            fmt_num(t.f_alpha[i]),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf-8"))
}

/// Human-readable PASS/FAIL lines.
pub fn summary(title: &str, checks: &[Check]) -> String {
    let mut out = format!("{title}\n");
    for c in checks {
        out.push_str("  ");
        out.push_str(&c.line());
        out.push('\n');
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    out.push_str(&format!(
        "{} of {} checks passed\n",
        checks.len() - failed,
        checks.len()
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_sig(0.1234567890123456), 0.123456789012);
        assert_eq!(round_sig(-98765.43210987654), -98765.4321099);
        assert_eq!(round_sig(0.0), 0.0);
        assert!(round_sig(f64::NAN).is_nan());
    }

    #[test]
    fn number_formatting() {
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(3.0), "3");
        assert_eq!(fmt_num(1.5e-5), "1.5e-5");
        assert_eq!(fmt_num(f64::NAN), "NaN");
        let back: f64 = fmt_num(1.0 / 3.0).parse().unwrap();
        assert!((back - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn json_is_rounded_and_sorted() {
        #[derive(Serialize)]
        struct S {
            zeta: f64,
            alpha: u64,
        }
        let s = to_json(&S {
            zeta: 2.0 / 3.0,
            alpha: 7,
        })
        .unwrap();
        assert!(s.find("alpha").unwrap() < s.find("zeta").unwrap());
        assert!(s.contains("0.666666666667"), "{s}");
        assert!(s.contains("\"alpha\": 7"));
    }
}
