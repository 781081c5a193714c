//! Canonical market data model: candles, taker-attributed trades and the
//! aligned close-price panel, plus ingestion and CSV persistence.

mod binance;
mod fetch;
mod panel;
mod store;

use std::fmt;
use std::str::FromStr;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use binance::{parse_agg_trades, parse_klines, BinanceSource};
pub use fetch::{
    fetch_candles, fetch_trades, ArchiveSource, Fetcher, MarketSource, RetryPolicy, SourceError, RATE_LIMIT_ENV,
};
pub use panel::{load_panel, PanelRequest, PricePanel};
pub use store::{persist_candles, read_candles, read_trades, write_trades};

pub const MINUTE_MS: i64 = 60_000;
pub const HOUR_MS: i64 = 3_600_000;
pub const DAY_MS: i64 = 86_400_000;

#[derive(Debug, Error)]
pub enum MarketDataError {
    #[error("invalid range: start {start} must be before end {end}")]
    InvalidRange { start: i64, end: i64 },
    #[error("network error: {0}")]
    Network(String),
    #[error("symbol rejected by source: {0}")]
    SymbolUnknown(String),
    #[error("schema error{}: {msg}", row.map(|r| format!(" at row {r}")).unwrap_or_default())]
    Schema { row: Option<usize>, msg: String },
    #[error("validation error at row {row}: {msg}")]
    Validation { row: usize, msg: String },
    #[error("no symbol has data in the requested range")]
    EmptyPanel,
    #[error("invalid panel: {0}")]
    InvalidPanel(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Bar size of a candle series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interval {
    Minute,
    Hour,
    Day,
}

impl Interval {
    pub fn millis(self) -> i64 {
        match self {
            Interval::Minute => MINUTE_MS,
            Interval::Hour => HOUR_MS,
            Interval::Day => DAY_MS,
        }
    }

    /// Exchange kline code (`1m`, `1h`, `1d`).
    pub fn code(self) -> &'static str {
        match self {
            Interval::Minute => "1m",
            Interval::Hour => "1h",
            Interval::Day => "1d",
        }
    }
}

impl FromStr for Interval {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "1m" | "minute" => Ok(Interval::Minute),
            "1h" | "hour" => Ok(Interval::Hour),
            "1d" | "day" => Ok(Interval::Day),
            other => Err(format!("unsupported interval `{other}`")),
        }
    }
}

/// One OHLCV bar. `ts` is the bar open in UTC milliseconds.
#[derive(Debug, Clone, PartialEq)]
pub struct Candle {
    pub symbol: String,
    pub quote: String,
    pub ts: i64,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: f64,
}

impl Candle {
    /// Checks the bar invariants; `interval` additionally checks grid alignment.
    pub fn validate(&self, interval: Option<Interval>) -> Result<(), String> {
        check_identifier("symbol", &self.symbol)?;
        check_identifier("quote", &self.quote)?;
        let prices = [self.open, self.high, self.low, self.close];
        if prices.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return Err("prices must be finite and strictly positive".into());
        }
        if !self.volume.is_finite() || self.volume < 0.0 {
            return Err("volume must be finite and non-negative".into());
        }
        if self.low > self.high {
            return Err(format!("low {} > high {}", self.low, self.high));
        }
        if self.open < self.low || self.open > self.high {
            return Err(format!("open {} outside [low, high]", self.open));
        }
        if self.close < self.low || self.close > self.high {
            return Err(format!("close {} outside [low, high]", self.close));
        }
        if let Some(iv) = interval {
            if self.ts.rem_euclid(iv.millis()) != 0 {
                return Err(format!("ts {} is not aligned to {}", self.ts, iv.code()));
            }
        }
        Ok(())
    }
}

/// Taker side of a trade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Side {
    Buy,
    Sell,
}

impl Side {
    /// Side from an exchange's "buyer is maker" flag: a maker buyer means the taker sold.
    pub fn from_buyer_is_maker(buyer_is_maker: bool) -> Self {
        if buyer_is_maker {
            Side::Sell
        } else {
            Side::Buy
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Buy => "BUY",
            Side::Sell => "SELL",
        })
    }
}

impl FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "BUY" => Ok(Side::Buy),
            "SELL" => Ok(Side::Sell),
            other => Err(format!("side must be BUY or SELL, got `{other}`")),
        }
    }
}

/// A single public trade. Price and amount are exact decimals so notional
/// sums do not depend on summation order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TradeRecord {
    pub symbol: String,
    pub quote: String,
    pub ts: i64,
    pub price: Decimal,
    pub amount: Decimal,
    pub side: Side,
}

impl TradeRecord {
    pub fn validate(&self) -> Result<(), String> {
        check_identifier("symbol", &self.symbol)?;
        check_identifier("quote", &self.quote)?;
        if self.price <= Decimal::ZERO {
            return Err(format!("price {} must be > 0", self.price));
        }
        if self.amount <= Decimal::ZERO {
            return Err(format!("amount {} must be > 0", self.amount));
        }
        Ok(())
    }

    pub fn notional(&self) -> Decimal {
        self.price * self.amount
    }
}

fn check_identifier(field: &str, value: &str) -> Result<(), String> {
    if value.is_empty() {
        return Err(format!("{field} is empty"));
    }
    if value.contains([',', '"', '\n', '\r']) {
        return Err(format!("{field} `{value}` contains a CSV metacharacter"));
    }
    Ok(())
}
