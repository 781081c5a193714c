//! Paginated, retrying ingestion from a candle/trade source.

use std::collections::BTreeMap;
use std::path::Path;
use std::thread;
use std::time::Duration;

use thiserror::Error;

use super::{read_candles, read_trades, Candle, Interval, MarketDataError, TradeRecord};

/// Failure reported by a single page request.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SourceError {
    /// Worth retrying: timeouts, rate limiting, 5xx.
    #[error("transient: {0}")]
    Transient(String),
    #[error("unknown symbol {0}")]
    SymbolUnknown(String),
    #[error("malformed payload: {0}")]
    Schema(String),
}

/// A page-oriented market data endpoint.
pub trait MarketSource: Sync {
    /// Candles for `symbol` with `start <= ts < end`, ascending, at most
    /// roughly `limit` rows.
    fn candle_page(
        &self,
        symbol: &str,
        quote: &str,
        interval: Interval,
        start: i64,
        end: i64,
        limit: usize,
    ) -> Result<Vec<Candle>, SourceError>;

    /// Trades with `start <= ts < end`. `cursor` is `None` on the first call
    /// and the returned cursor is `None` once the range is exhausted.
    fn trade_page(
        &self,
        symbol: &str,
        quote: &str,
        start: i64,
        end: i64,
        cursor: Option<String>,
        limit: usize,
    ) -> Result<(Vec<TradeRecord>, Option<String>), SourceError>;
}

/// Bounded exponential backoff for transient page failures.
#[derive(Debug, Clone, Copy)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { max_retries: 5, base_delay: Duration::from_millis(250), max_delay: Duration::from_secs(8) }
    }
}

impl RetryPolicy {
    pub fn none() -> Self {
        Self { max_retries: 0, base_delay: Duration::ZERO, max_delay: Duration::ZERO }
    }

    fn delay(&self, attempt: u32) -> Duration {
        let factor = 1u32.checked_shl(attempt).unwrap_or(u32::MAX);
        self.base_delay.saturating_mul(factor).min(self.max_delay)
    }
}

/// Drives a [`MarketSource`]: pagination, retries, rate limiting, dedup.
#[derive(Debug, Clone)]
pub struct Fetcher {
    pub retry: RetryPolicy,
    /// Pause between consecutive requests for the same symbol.
    pub rate_limit: Duration,
    pub page_limit: usize,
}

impl Default for Fetcher {
    fn default() -> Self {
        Self { retry: RetryPolicy::default(), rate_limit: Duration::from_millis(100), page_limit: 1000 }
    }
}

/// Env var overriding the pause between requests, in milliseconds.
pub const RATE_LIMIT_ENV: &str = "CRYPTONET_RATE_LIMIT_MS";

impl Fetcher {
    fn call<R>(&self, mut request: impl FnMut() -> Result<R, SourceError>) -> Result<R, MarketDataError> {
        let mut attempt = 0;
        loop {
            match request() {
                Ok(r) => return Ok(r),
                Err(SourceError::Transient(msg)) => {
                    if attempt >= self.retry.max_retries {
                        return Err(MarketDataError::Network(format!(
                            "{msg} (gave up after {} attempts)",
                            attempt + 1
                        )));
                    }
                    log::warn!("transient source failure, retrying: {msg}");
                    thread::sleep(self.retry.delay(attempt));
                    attempt += 1;
                }
                Err(SourceError::SymbolUnknown(s)) => return Err(MarketDataError::SymbolUnknown(s)),
                Err(SourceError::Schema(msg)) => return Err(MarketDataError::Schema { row: None, msg }),
            }
        }
    }

    /// Candles in `[start, end)`, sorted by ts and deduplicated with the last
    /// delivered row winning.
    pub fn candles(
        &self,
        source: &dyn MarketSource,
        symbol: &str,
        quote: &str,
        interval: Interval,
        start: i64,
        end: i64,
    ) -> Result<Vec<Candle>, MarketDataError> {
        if start >= end {
            return Err(MarketDataError::InvalidRange { start, end });
        }
        let step = interval.millis();
        let mut cursor = start.div_euclid(step) * step;
        if cursor < start {
            cursor += step;
        }
        let mut by_ts: BTreeMap<i64, Candle> = BTreeMap::new();
        let mut first = true;
        while cursor < end {
            if !first && !self.rate_limit.is_zero() {
                thread::sleep(self.rate_limit);
            }
            first = false;
            let page = self.call(|| source.candle_page(symbol, quote, interval, cursor, end, self.page_limit))?;
            let delivered = page.len();
            let mut last = None;
            for c in page {
                if c.ts < cursor || c.ts >= end || c.symbol != symbol {
                    continue;
                }
                c.validate(Some(interval))
                    .map_err(|msg| MarketDataError::Schema { row: None, msg: format!("{symbol} @ {}: {msg}", c.ts) })?;
                last = Some(last.map_or(c.ts, |l: i64| l.max(c.ts)));
                by_ts.insert(c.ts, c);
            }
            match last {
                Some(ts) if delivered >= self.page_limit => cursor = ts + step,
                _ => break,
            }
        }
        Ok(by_ts.into_values().collect())
    }

    /// Trades in `[start, end)`, stably sorted by ts.
    pub fn trades(
        &self,
        source: &dyn MarketSource,
        symbol: &str,
        quote: &str,
        start: i64,
        end: i64,
    ) -> Result<Vec<TradeRecord>, MarketDataError> {
        if start >= end {
            return Err(MarketDataError::InvalidRange { start, end });
        }
        let mut out = Vec::new();
        let mut cursor: Option<String> = None;
        let mut first = true;
        loop {
            if !first && !self.rate_limit.is_zero() {
                thread::sleep(self.rate_limit);
            }
            first = false;
            let (page, next) =
                self.call(|| source.trade_page(symbol, quote, start, end, cursor.clone(), self.page_limit))?;
            for t in page {
                if t.ts < start || t.ts >= end {
                    continue;
                }
                t.validate()
                    .map_err(|msg| MarketDataError::Schema { row: None, msg: format!("{symbol} @ {}: {msg}", t.ts) })?;
                out.push(t);
            }
            match next {
                Some(c) if Some(&c) != cursor.as_ref() => cursor = Some(c),
                _ => break,
            }
        }
        out.sort_by_key(|t| t.ts);
        Ok(out)
    }

    /// Fetches several symbols concurrently, one in-flight request per symbol.
    pub fn candles_many(
        &self,
        source: &dyn MarketSource,
        symbols: &[String],
        quote: &str,
        interval: Interval,
        start: i64,
        end: i64,
    ) -> Vec<(String, Result<Vec<Candle>, MarketDataError>)> {
        thread::scope(|scope| {
            let handles: Vec<_> = symbols
                .iter()
                .map(|s| scope.spawn(move || (s.clone(), self.candles(source, s, quote, interval, start, end))))
                .collect();
            handles.into_iter().map(|h| h.join().expect("fetch worker panicked")).collect()
        })
    }
}

/// `Fetcher::default().candles(..)`.
pub fn fetch_candles(
    source: &dyn MarketSource,
    symbol: &str,
    quote: &str,
    interval: Interval,
    start: i64,
    end: i64,
) -> Result<Vec<Candle>, MarketDataError> {
    Fetcher::default().candles(source, symbol, quote, interval, start, end)
}

/// `Fetcher::default().trades(..)`.
pub fn fetch_trades(
    source: &dyn MarketSource,
    symbol: &str,
    quote: &str,
    start: i64,
    end: i64,
) -> Result<Vec<TradeRecord>, MarketDataError> {
    Fetcher::default().trades(source, symbol, quote, start, end)
}

/// Local CSV archive served through the same paging contract as a remote
/// endpoint. Rows are kept in file order, duplicates included.
#[derive(Debug, Clone, Default)]
pub struct ArchiveSource {
    candles: Vec<Candle>,
    trades: Vec<TradeRecord>,
}

impl ArchiveSource {
    pub fn new(candles: Vec<Candle>, trades: Vec<TradeRecord>) -> Self {
        Self { candles, trades }
    }

    pub fn open(candles: Option<&Path>, trades: Option<&Path>) -> Result<Self, MarketDataError> {
        Ok(Self {
            candles: candles.map(read_candles).transpose()?.unwrap_or_default(),
            trades: trades.map(read_trades).transpose()?.unwrap_or_default(),
        })
    }
}

impl MarketSource for ArchiveSource {
    fn candle_page(
        &self,
        symbol: &str,
        quote: &str,
        _interval: Interval,
        start: i64,
        end: i64,
        limit: usize,
    ) -> Result<Vec<Candle>, SourceError> {
        if !self.candles.iter().any(|c| c.symbol == symbol && c.quote == quote) {
            return Err(SourceError::SymbolUnknown(format!("{symbol}/{quote}")));
        }
        let mut rows: Vec<&Candle> = self
            .candles
            .iter()
            .filter(|c| c.symbol == symbol && c.quote == quote && c.ts >= start && c.ts < end)
            .collect();
        rows.sort_by_key(|c| c.ts);
        // never split a run of duplicate timestamps across pages
        let mut page = Vec::new();
        for c in rows {
            if page.len() >= limit && page.last().map(|p: &Candle| p.ts) != Some(c.ts) {
                break;
            }
            page.push(c.clone());
        }
        Ok(page)
    }

    fn trade_page(
        &self,
        symbol: &str,
        quote: &str,
        start: i64,
        end: i64,
        cursor: Option<String>,
        limit: usize,
    ) -> Result<(Vec<TradeRecord>, Option<String>), SourceError> {
        if !self.trades.iter().any(|t| t.symbol == symbol && t.quote == quote) {
            return Err(SourceError::SymbolUnknown(format!("{symbol}/{quote}")));
        }
        let offset: usize = match cursor {
            Some(c) => c.parse().map_err(|_| SourceError::Schema(format!("bad cursor `{c}`")))?,
            None => 0,
        };
        let matching: Vec<&TradeRecord> = self
            .trades
            .iter()
            .filter(|t| t.symbol == symbol && t.quote == quote && t.ts >= start && t.ts < end)
            .collect();
        let page: Vec<TradeRecord> = matching.iter().skip(offset).take(limit).map(|t| (*t).clone()).collect();
        let next = offset + page.len();
        let cursor = (next < matching.len()).then(|| next.to_string());
        Ok((page, cursor))
    }
}
