#![allow(dead_code)]

use cryptonet::market_data::{Candle, Side, TradeRecord, HOUR_MS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rust_decimal::Decimal;

/// 2022-11-01 00:00 UTC.
pub const T0: i64 = 1_667_260_800_000;

/// Hourly candles for `symbols` driven by a shared market factor plus
/// idiosyncratic noise, so correlations are positive but not degenerate.
pub fn synthetic_candles(symbols: &[&str], hours: usize, seed: u64) -> Vec<Candle> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut prices: Vec<f64> = symbols.iter().map(|_| rng.gen_range(1.0..100.0)).collect();
    let mut out = Vec::new();
    for h in 0..hours {
        let market: f64 = rng.gen_range(-0.01..0.01);
        for (i, sym) in symbols.iter().enumerate() {
            let open = prices[i];
            let r = market * (0.5 + i as f64 * 0.2) + rng.gen_range(-0.01..0.01);
            let close = open * r.exp();
            prices[i] = close;
            out.push(Candle {
                symbol: sym.to_string(),
                quote: "USDT".into(),
                ts: T0 + h as i64 * HOUR_MS,
                open,
                high: open.max(close) * 1.001,
                low: open.min(close) * 0.999,
                close,
                volume: rng.gen_range(10.0..1000.0),
            });
        }
    }
    out
}

pub fn synthetic_trades(symbol: &str, n: usize, span_ms: i64, seed: u64) -> Vec<TradeRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<TradeRecord> = (0..n)
        .map(|_| TradeRecord {
            symbol: symbol.into(),
            quote: "BUSD".into(),
            ts: T0 + rng.gen_range(0..span_ms),
            price: Decimal::new(rng.gen_range(100..3000), 2),
            amount: Decimal::new(rng.gen_range(1..100_000), 3),
            side: if rng.gen_bool(0.5) { Side::Sell } else { Side::Buy },
        })
        .collect();
    out.sort_by_key(|t| t.ts);
    out
}
