//! Binance public REST adapter (`/api/v3/klines`, `/api/v3/aggTrades`).

use std::time::Duration;

use rust_decimal::Decimal;
use serde_json::Value;

use super::fetch::{MarketSource, SourceError};
use super::{Candle, Interval, Side, TradeRecord, HOUR_MS};

pub const DEFAULT_BASE_URL: &str = "https://api.binance.com";

/// aggTrades only accepts a start/end window shorter than one hour.
const TRADE_WINDOW_MS: i64 = HOUR_MS;

pub struct BinanceSource {
    base_url: String,
    agent: ureq::Agent,
}

impl BinanceSource {
    pub fn new(base_url: impl Into<String>) -> Self {
        let config = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(30)))
            .build();
        Self { base_url: base_url.into(), agent: ureq::Agent::new_with_config(config) }
    }

    fn get(&self, path: &str, query: &[(&str, String)]) -> Result<String, SourceError> {
        let url = format!("{}{}", self.base_url.trim_end_matches('/'), path);
        let mut req = self.agent.get(&url);
        for (k, v) in query {
            req = req.query(*k, v);
        }
        let mut resp = req.call().map_err(|e| SourceError::Transient(e.to_string()))?;
        let status = resp.status().as_u16();
        let body = resp.body_mut().read_to_string().map_err(|e| SourceError::Transient(e.to_string()))?;
        match status {
            200 => Ok(body),
            // -1121 is "Invalid symbol."
            400 if body.contains("-1121") => Err(SourceError::SymbolUnknown(
                query.iter().find(|(k, _)| *k == "symbol").map(|(_, v)| v.clone()).unwrap_or_default(),
            )),
            418 | 429 | 500..=599 => Err(SourceError::Transient(format!("HTTP {status}: {body}"))),
            _ => Err(SourceError::Schema(format!("HTTP {status}: {body}"))),
        }
    }
}

impl Default for BinanceSource {
    fn default() -> Self {
        Self::new(DEFAULT_BASE_URL)
    }
}

impl MarketSource for BinanceSource {
    fn candle_page(
        &self,
        symbol: &str,
        quote: &str,
        interval: Interval,
        start: i64,
        end: i64,
        limit: usize,
    ) -> Result<Vec<Candle>, SourceError> {
        let body = self.get(
            "/api/v3/klines",
            &[
                ("symbol", format!("{symbol}{quote}")),
                ("interval", interval.code().to_string()),
                ("startTime", start.to_string()),
                ("endTime", (end - 1).to_string()),
                ("limit", limit.min(1000).to_string()),
            ],
        )?;
        parse_klines(symbol, quote, &body)
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
        let pair = format!("{symbol}{quote}");
        let limit = limit.min(1000);
        let (query, window_end) = match cursor.as_deref() {
            Some(c) if c.starts_with("id:") => {
                (vec![("symbol", pair), ("fromId", c[3..].to_string()), ("limit", limit.to_string())], None)
            }
            other => {
                let from = match other {
                    Some(c) => c
                        .strip_prefix("t:")
                        .and_then(|t| t.parse::<i64>().ok())
                        .ok_or_else(|| SourceError::Schema(format!("bad cursor `{c}`")))?,
                    None => start,
                };
                let to = (from + TRADE_WINDOW_MS - 1).min(end - 1);
                (
                    vec![
                        ("symbol", pair),
                        ("startTime", from.to_string()),
                        ("endTime", to.to_string()),
                        ("limit", limit.to_string()),
                    ],
                    Some(to),
                )
            }
        };
        let rows = parse_agg_trades(symbol, quote, &self.get("/api/v3/aggTrades", &query)?)?;
        let reached_end = rows.last().is_some_and(|(_, t)| t.ts >= end);
        let next = match (rows.last(), window_end) {
            _ if reached_end => None,
            (Some((id, _)), _) => Some(format!("id:{}", id + 1)),
            (None, Some(to)) if to + 1 < end => Some(format!("t:{}", to + 1)),
            (None, _) => None,
        };
        Ok((rows.into_iter().map(|(_, t)| t).filter(|t| t.ts < end).collect(), next))
    }
}

/// Parses a klines payload: an array of `[openTime, "o", "h", "l", "c", "v", ...]`.
pub fn parse_klines(symbol: &str, quote: &str, body: &str) -> Result<Vec<Candle>, SourceError> {
    let rows: Vec<Vec<Value>> = serde_json::from_str(body).map_err(|e| SourceError::Schema(format!("klines: {e}")))?;
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            if row.len() < 6 {
                return Err(SourceError::Schema(format!("kline {i}: expected ≥ 6 fields")));
            }
            let ts = row[0]
                .as_i64()
                .ok_or_else(|| SourceError::Schema(format!("kline {i}: open time is not an integer")))?;
            let num = |k: usize| -> Result<f64, SourceError> {
                match &row[k] {
                    Value::String(s) => s.parse().ok(),
                    Value::Number(n) => n.as_f64(),
                    _ => None,
                }
                .ok_or_else(|| SourceError::Schema(format!("kline {i}: field {k} is not numeric")))
            };
            Ok(Candle {
                symbol: symbol.to_string(),
                quote: quote.to_string(),
                ts,
                open: num(1)?,
                high: num(2)?,
                low: num(3)?,
                close: num(4)?,
                volume: num(5)?,
            })
        })
        .collect()
}

/// Parses an aggTrades payload into `(aggregate id, trade)` pairs. Side is
/// derived from the buyer-is-maker flag `m`.
pub fn parse_agg_trades(symbol: &str, quote: &str, body: &str) -> Result<Vec<(u64, TradeRecord)>, SourceError> {
    let rows: Vec<Value> = serde_json::from_str(body).map_err(|e| SourceError::Schema(format!("aggTrades: {e}")))?;
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            let bad = |f: &str| SourceError::Schema(format!("aggTrade {i}: missing or invalid `{f}`"));
            let id = row.get("a").and_then(Value::as_u64).ok_or_else(|| bad("a"))?;
            let dec = |f: &str| -> Result<Decimal, SourceError> {
                row.get(f).and_then(Value::as_str).and_then(|s| s.parse().ok()).ok_or_else(|| bad(f))
            };
            let trade = TradeRecord {
                symbol: symbol.to_string(),
                quote: quote.to_string(),
                ts: row.get("T").and_then(Value::as_i64).ok_or_else(|| bad("T"))?,
                price: dec("p")?,
                amount: dec("q")?,
                side: Side::from_buyer_is_maker(row.get("m").and_then(Value::as_bool).ok_or_else(|| bad("m"))?),
            };
            Ok((id, trade))
        })
        .collect()
}
