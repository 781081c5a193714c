//! Return panels, rescaled price paths and buy-and-hold rankings.

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market_data::PricePanel;
use crate::stats::percentile_sorted;
use crate::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum ReturnsError {
    #[error("panel has no usable observations")]
    EmptyPanel,
    #[error("timestamp {0} is not on the panel grid")]
    TimestampOffGrid(i64),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReturnKind {
    #[default]
    Log,
    Simple,
}

impl std::str::FromStr for ReturnKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "log" => Ok(ReturnKind::Log),
            "simple" => Ok(ReturnKind::Simple),
            other => Err(format!("unknown return kind `{other}` (log|simple)")),
        }
    }
}

/// Per-bar returns. Column `t` is the return from bar `t` to bar `t + 1`
/// and is labelled with the later bar's timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel<T> {
    pub symbols: Vec<String>,
    pub timestamps: Vec<i64>,
    pub values: Array2<T>,
    pub mask: Array2<bool>,
    pub kind: ReturnKind,
}

impl<T: Scalar> ReturnPanel<T> {
    pub fn n_assets(&self) -> usize {
        self.symbols.len()
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    /// Builds a fully observed return panel directly, e.g. from simulated returns.
    pub fn from_rows(symbols: Vec<String>, timestamps: Vec<i64>, rows: &[Vec<T>], kind: ReturnKind) -> Self {
        let (n, t) = (rows.len(), timestamps.len());
        assert_eq!(symbols.len(), n, "one row per symbol");
        assert!(rows.iter().all(|r| r.len() == t), "rows must match timestamps");
        Self {
            symbols,
            timestamps,
            values: Array2::from_shape_fn((n, t), |(i, j)| rows[i][j]),
            mask: Array2::from_shape_fn((n, t), |(i, j)| rows[i][j].is_finite()),
            kind,
        }
    }
}

pub fn to_returns<T: Scalar>(panel: &PricePanel<T>, kind: ReturnKind) -> Result<ReturnPanel<T>, ReturnsError> {
    let (n, t) = (panel.n_assets(), panel.n_times());
    if t < 2 || n == 0 {
        return Err(ReturnsError::EmptyPanel);
    }
    let p = panel.prices();
    let m = panel.mask();
    let values = Array2::from_shape_fn((n, t - 1), |(i, j)| {
        let ratio = p[(i, j + 1)] / p[(i, j)];
        match kind {
            ReturnKind::Log => ratio.ln(),
            ReturnKind::Simple => ratio - T::one(),
        }
    });
    let mask = Array2::from_shape_fn((n, t - 1), |(i, j)| m[(i, j)] && m[(i, j + 1)] && values[(i, j)].is_finite());
    Ok(ReturnPanel {
        symbols: panel.symbols().to_vec(),
        timestamps: panel.timestamps()[1..].to_vec(),
        values,
        mask,
        kind,
    })
}

/// Divides each row by its first observed close. Rows without any
/// observation are left untouched.
pub fn rescale<T: Scalar>(panel: &PricePanel<T>) -> Result<PricePanel<T>, ReturnsError> {
    let mut out = panel.prices().clone();
    let mut any = false;
    for (i, mut row) in out.rows_mut().into_iter().enumerate() {
        let Some(first) = panel.mask().row(i).iter().position(|&o| o) else {
            continue;
        };
        any = true;
        let base = row[first];
        row.mapv_inplace(|v| v / base);
        row[first] = T::one();
    }
    if !any {
        return Err(ReturnsError::EmptyPanel);
    }
    Ok(panel.with_prices(out))
}

/// Buy-and-hold returns sorted ascending with linear-interpolation percentiles.
#[derive(Debug, Clone, PartialEq)]
pub struct BhrReport<T> {
    pub entries: Vec<(String, T)>,
    pub median: T,
    pub p25: T,
    pub p75: T,
    /// Symbols without an observed close at either endpoint.
    pub dropped: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BhrSummary {
    pub median: f64,
    pub p25: f64,
    pub p75: f64,
    pub dropped: Vec<String>,
}

impl<T: Scalar> BhrReport<T> {
    pub fn summary(&self) -> BhrSummary {
        BhrSummary {
            median: self.median.as_f64(),
            p25: self.p25.as_f64(),
            p75: self.p75.as_f64(),
            dropped: self.dropped.clone(),
        }
    }

    pub fn get(&self, symbol: &str) -> Option<T> {
        self.entries.iter().find(|(s, _)| s == symbol).map(|(_, v)| *v)
    }
}

pub fn buy_and_hold<T: Scalar>(
    panel: &PricePanel<T>,
    ts_start: i64,
    ts_end: i64,
) -> Result<BhrReport<T>, ReturnsError> {
    let a = panel.time_index(ts_start).ok_or(ReturnsError::TimestampOffGrid(ts_start))?;
    let b = panel.time_index(ts_end).ok_or(ReturnsError::TimestampOffGrid(ts_end))?;
    let (p, m) = (panel.prices(), panel.mask());
    let mut entries = Vec::new();
    let mut dropped = Vec::new();
    for (i, sym) in panel.symbols().iter().enumerate() {
        if m[(i, a)] && m[(i, b)] {
            entries.push((sym.clone(), (p[(i, b)] - p[(i, a)]) / p[(i, a)]));
        } else {
            dropped.push(sym.clone());
        }
    }
    if entries.is_empty() {
        return Err(ReturnsError::EmptyPanel);
    }
    entries.sort_by(|x, y| x.1.partial_cmp(&y.1).expect("finite BHR").then_with(|| x.0.cmp(&y.0)));
    let sorted: Vec<T> = entries.iter().map(|e| e.1).collect();
    Ok(BhrReport {
        median: percentile_sorted(&sorted, 0.5).unwrap(),
        p25: percentile_sorted(&sorted, 0.25).unwrap(),
        p75: percentile_sorted(&sorted, 0.75).unwrap(),
        entries,
        dropped,
    })
}
