//! Shared value types: series, scale and moment-order grids, and the
//! non-overlapping window partition every fluctuation method is built on.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest scale used by the default grid.
pub const DEFAULT_MIN_SCALE: usize = 10;
/// Number of log-spaced scales requested by the default grid (before rounding dedup).
pub const DEFAULT_SCALE_COUNT: usize = 20;
/// Orders closer than this to zero use the logarithmic-average branch.
pub const Q_ZERO_TOLERANCE: f64 = 1e-9;

/// A finite real-valued sequence with an optional label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub values: Vec<f64>,
    pub label: Option<String>,
}

impl TimeSeries {
    /// Builds a validated series.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        validate_series(TimeSeries {
            values,
            label: None,
        })
    }

    pub fn labeled(values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        let mut ts = Self::new(values)?;
        ts.label = Some(label.into());
        Ok(ts)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Multiplies every element by `factor` and adds `offset`.
    pub fn affine(&self, factor: f64, offset: f64) -> TimeSeries {
        TimeSeries {
            values: self.values.iter().map(|v| factor * v + offset).collect(),
            label: self.label.clone(),
        }
    }
}

/// Checks the series invariants: non-empty and every element finite.
///
/// The error for a non-finite element reports its 1-based index.
pub fn validate_series(ts: TimeSeries) -> Result<TimeSeries> {
    if ts.values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(i) = ts.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index: i + 1 });
    }
    Ok(ts)
}

/// Strictly increasing set of window sizes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleGrid {
    scales: Vec<usize>,
}

impl ScaleGrid {
    pub fn new(scales: Vec<usize>) -> Result<Self> {
        if scales.is_empty() {
            return Err(Error::Config("scale grid is empty".into()));
        }
        if scales[0] < 1 {
            return Err(Error::Config("scales must be positive".into()));
        }
        if scales.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "scale grid must be strictly increasing".into(),
            ));
        }
        Ok(ScaleGrid { scales })
    }

    /// Roughly `count` logarithmically spaced integer scales in `[min, max]`,
    /// deduplicated after rounding.
    pub fn log_spaced(min: usize, max: usize, count: usize) -> Result<Self> {
        if min < 1 || max < min {
            return Err(Error::Config(format!(
                "invalid scale bounds [{min}, {max}]"
            )));
        }
        if count < 1 {
            return Err(Error::Config("scale count must be positive".into()));
        }
        let mut scales = Vec::with_capacity(count);
        if count == 1 || min == max {
            scales.push(min);
        } else {
            let (lo, hi) = ((min as f64).ln(), (max as f64).ln());
            for i in 0..count {
                let t = i as f64 / (count - 1) as f64;
                let s = (lo + t * (hi - lo)).exp().round() as usize;
                let s = s.clamp(min, max);
                if scales.last() != Some(&s) {
                    scales.push(s);
                }
            }
        }
        ScaleGrid::new(scales)
    }

    /// Default grid for a series of length `len`: ~20 log-spaced scales in `[10, len/4]`.
    pub fn default_for(len: usize) -> Result<Self> {
        let max = len / 4;
        if max < DEFAULT_MIN_SCALE {
            return Err(Error::Config(format!(
                "series of length {len} is too short for the default scale range [{DEFAULT_MIN_SCALE}, len/4]"
            )));
        }
        Self::log_spaced(DEFAULT_MIN_SCALE, max, DEFAULT_SCALE_COUNT)
    }

    /// Verifies every scale fits a series of length `len` (`s <= len/4`).
    pub fn check_against(&self, len: usize) -> Result<()> {
        let max = len / 4;
        match self.scales.iter().find(|&&s| s > max || s < 1) {
            Some(&s) => Err(Error::InvalidScale { scale: s, len }),
            None => Ok(()),
        }
    }

    /// Keeps only the scales inside `[min, max]`.
    pub fn restricted(&self, min: usize, max: usize) -> Result<Self> {
        ScaleGrid::new(
            self.scales
                .iter()
                .copied()
                .filter(|&s| s >= min && s <= max)
                .collect(),
        )
    }

    pub fn scales(&self) -> &[usize] {
        &self.scales
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }
}

/// Strictly increasing set of moment orders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QGrid {
    orders: Vec<f64>,
}

impl QGrid {
    pub fn new(orders: Vec<f64>) -> Result<Self> {
        if orders.is_empty() {
            return Err(Error::Config("q grid is empty".into()));
        }
        if orders.iter().any(|q| !q.is_finite()) {
            return Err(Error::Config("q grid contains a non-finite order".into()));
        }
        if orders.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("q grid must be strictly increasing".into()));
        }
        Ok(QGrid { orders })
    }

    /// `count` evenly spaced orders from `min` to `max` inclusive.
    pub fn linspace(min: f64, max: f64, count: usize) -> Result<Self> {
        if count == 1 {
            return QGrid::new(vec![min]);
        }
        if count == 0 || max.is_nan() || min.is_nan() || max <= min {
            return Err(Error::Config(format!(
                "invalid q range [{min}, {max}] with {count} points"
            )));
        }
        let step = (max - min) / (count - 1) as f64;
        let orders = (0..count)
            .map(|i| {
                let q = min + i as f64 * step;
                if q.abs() < Q_ZERO_TOLERANCE {
                    0.0
                } else {
                    q
                }
            })
            .collect();
        QGrid::new(orders)
    }

    /// The single order q = 2 used by the monofractal methods.
    pub fn second_order() -> Self {
        QGrid { orders: vec![2.0] }
    }

    pub fn orders(&self) -> &[f64] {
        &self.orders
    }

    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    pub fn position(&self, q: f64) -> Option<usize> {
        self.orders
            .iter()
            .position(|&o| (o - q).abs() < Q_ZERO_TOLERANCE)
    }
}

/// `floor(len / scale)` disjoint boxes of exactly `scale` points, starting at
/// the first sample. The trailing `len mod scale` samples are not covered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowPartition {
    pub len: usize,
    pub scale: usize,
    pub box_count: usize,
}

impl WindowPartition {
    /// Zero-based half-open index range of box `v` (zero-based).
    pub fn box_range(&self, v: usize) -> Range<usize> {
        debug_assert!(v < self.box_count);
        v * self.scale..(v + 1) * self.scale
    }

    pub fn boxes(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        (0..self.box_count).map(move |v| self.box_range(v))
    }

    /// Number of samples covered by the boxes.
    pub fn covered(&self) -> usize {
        self.box_count * self.scale
    }
}

pub fn partition_windows(len: usize, scale: usize) -> Result<WindowPartition> {
    if scale < 1 || scale > len {
        return Err(Error::InvalidScale { scale, len });
    }
    Ok(WindowPartition {
        len,
        scale,
        box_count: len / scale,
    })
}
