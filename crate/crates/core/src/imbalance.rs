//! Taker-flow imbalance: per-bucket sell notional minus buy notional.
//!
//! Notionals are exact decimals (`price × amount`), so bucket sums do not
//! depend on the order trades are added in.

use std::collections::BTreeMap;
use std::str::FromStr;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market_data::{Side, TradeRecord, HOUR_MS, MINUTE_MS};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ImbalanceError {
    #[error("trades mix {0} and {1}")]
    MixedSymbols(String, String),
    #[error("no trades")]
    EmptyInput,
    #[error("series with different bucket sizes cannot be merged")]
    BucketMismatch,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bucket {
    #[default]
    Minute,
    Hour,
}

impl Bucket {
    pub fn millis(self) -> i64 {
        match self {
            Bucket::Minute => MINUTE_MS,
            Bucket::Hour => HOUR_MS,
        }
    }

    /// Start of the bucket containing `ts`; a trade on a boundary opens the later bucket.
    pub fn start_of(self, ts: i64) -> i64 {
        ts.div_euclid(self.millis()) * self.millis()
    }
}

impl FromStr for Bucket {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "minute" | "1m" => Ok(Bucket::Minute),
            "hour" | "1h" => Ok(Bucket::Hour),
            other => Err(format!("unknown bucket `{other}` (minute|hour)")),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ImbalanceOptions {
    /// Emit zero buckets between the first and last traded bucket.
    pub dense: bool,
    /// Return an empty series instead of `EmptyInput`.
    pub allow_empty: bool,
}

/// Signed per-bucket notional; positive values are net selling pressure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImbalanceSeries {
    pub bucket: Bucket,
    pub timestamps: Vec<i64>,
    pub buy_total: Vec<Decimal>,
    pub sell_total: Vec<Decimal>,
    pub values: Vec<Decimal>,
}

impl ImbalanceSeries {
    fn from_totals(bucket: Bucket, totals: BTreeMap<i64, (Decimal, Decimal)>, dense: bool) -> Self {
        let mut totals = totals;
        if dense {
            if let (Some(&first), Some(&last)) = (totals.keys().next(), totals.keys().next_back()) {
                let mut ts = first;
                while ts < last {
                    totals.entry(ts).or_default();
                    ts += bucket.millis();
                }
            }
        }
        let mut s = ImbalanceSeries {
            bucket,
            timestamps: Vec::with_capacity(totals.len()),
            buy_total: Vec::with_capacity(totals.len()),
            sell_total: Vec::with_capacity(totals.len()),
            values: Vec::with_capacity(totals.len()),
        };
        for (ts, (buy, sell)) in totals {
            s.timestamps.push(ts);
            s.buy_total.push(buy.normalize());
            s.sell_total.push(sell.normalize());
            s.values.push((sell - buy).normalize());
        }
        s
    }

    fn totals(&self) -> BTreeMap<i64, (Decimal, Decimal)> {
        self.timestamps.iter().enumerate().map(|(k, &ts)| (ts, (self.buy_total[k], self.sell_total[k]))).collect()
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn total(&self) -> Decimal {
        self.values.iter().copied().sum()
    }

    /// Combines series computed on disjoint (or overlapping) shards of a tape.
    /// Buckets present in neither input are not created.
    pub fn merge(&self, other: &ImbalanceSeries) -> Result<ImbalanceSeries, ImbalanceError> {
        if self.bucket != other.bucket {
            return Err(ImbalanceError::BucketMismatch);
        }
        let mut totals = self.totals();
        for (ts, (buy, sell)) in other.totals() {
            let slot = totals.entry(ts).or_default();
            slot.0 += buy;
            slot.1 += sell;
        }
        Ok(Self::from_totals(self.bucket, totals, false))
    }
}

pub fn compute_imbalance(
    trades: &[TradeRecord],
    bucket: Bucket,
    opts: ImbalanceOptions,
) -> Result<ImbalanceSeries, ImbalanceError> {
    let Some(first) = trades.first() else {
        return if opts.allow_empty {
            Ok(ImbalanceSeries::from_totals(bucket, BTreeMap::new(), false))
        } else {
            Err(ImbalanceError::EmptyInput)
        };
    };
    let mut totals: BTreeMap<i64, (Decimal, Decimal)> = BTreeMap::new();
    for t in trades {
        if t.symbol != first.symbol || t.quote != first.quote {
            return Err(ImbalanceError::MixedSymbols(
                format!("{}/{}", first.symbol, first.quote),
                format!("{}/{}", t.symbol, t.quote),
            ));
        }
        let slot = totals.entry(bucket.start_of(t.ts)).or_default();
        match t.side {
            Side::Buy => slot.0 += t.notional(),
            Side::Sell => slot.1 += t.notional(),
        }
    }
    Ok(ImbalanceSeries::from_totals(bucket, totals, opts.dense))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Peak {
    pub ts: i64,
    pub value: Decimal,
}

/// The `k` buckets of largest absolute imbalance, ties to the earlier bucket.
pub fn peak_report(series: &ImbalanceSeries, k: usize) -> Vec<Peak> {
    ranked(series, |_| true, k)
}

/// The `k` buckets of largest net selling pressure (positive values only).
pub fn selling_peaks(series: &ImbalanceSeries, k: usize) -> Vec<Peak> {
    ranked(series, |v| v > Decimal::ZERO, k)
}

fn ranked(series: &ImbalanceSeries, keep: impl Fn(Decimal) -> bool, k: usize) -> Vec<Peak> {
    let mut peaks: Vec<Peak> = series
        .timestamps
        .iter()
        .zip(&series.values)
        .filter(|(_, &v)| keep(v))
        .map(|(&ts, &value)| Peak { ts, value })
        .collect();
    peaks.sort_by(|a, b| b.value.abs().cmp(&a.value.abs()).then(a.ts.cmp(&b.ts)));
    peaks.truncate(k);
    peaks
}
