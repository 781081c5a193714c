//! CSV persistence for candles and trades.
//!
//! Row numbers in read errors are file line numbers (the header is line 1).
//! Row numbers in `persist_candles` validation errors index the input batch.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use rust_decimal::Decimal;

use super::{Candle, MarketDataError, TradeRecord};

pub const CANDLE_HEADER: [&str; 8] = ["symbol", "quote", "ts", "open", "high", "low", "close", "volume"];
pub const TRADE_HEADER: [&str; 6] = ["symbol", "quote", "ts", "price", "amount", "side"];

type CandleKey = (String, String, i64);

/// Merges `candles` into the CSV store at `path` and returns the number of
/// rows the store holds afterwards.
///
/// Rows are keyed by `(symbol, quote, ts)`; an incoming row replaces a stored
/// one with the same key, and a later row in the batch replaces an earlier
/// one. The file is rewritten sorted by key, so persisting the same batch
/// twice leaves it byte-identical. Nothing is written if any row is invalid.
pub fn persist_candles(candles: &[Candle], path: impl AsRef<Path>) -> Result<usize, MarketDataError> {
    let path = path.as_ref();
    for (row, c) in candles.iter().enumerate() {
        c.validate(None).map_err(|msg| MarketDataError::Validation { row, msg })?;
    }
    let mut merged: BTreeMap<CandleKey, Candle> = BTreeMap::new();
    if path.exists() {
        for c in read_candles(path)? {
            merged.insert((c.symbol.clone(), c.quote.clone(), c.ts), c);
        }
    }
    for c in candles {
        merged.insert((c.symbol.clone(), c.quote.clone(), c.ts), c.clone());
    }

    let tmp = path.with_extension("csv.tmp");
    {
        let mut w = csv_writer(&tmp)?;
        w.write_record(CANDLE_HEADER).map_err(csv_io)?;
        for c in merged.values() {
            w.write_record([
                c.symbol.clone(),
                c.quote.clone(),
                c.ts.to_string(),
                c.open.to_string(),
                c.high.to_string(),
                c.low.to_string(),
                c.close.to_string(),
                c.volume.to_string(),
            ])
            .map_err(csv_io)?;
        }
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(merged.len())
}

/// Reads every candle in a store file, in file order, validating each row.
pub fn read_candles(path: impl AsRef<Path>) -> Result<Vec<Candle>, MarketDataError> {
    let mut rdr = csv_reader(path.as_ref())?;
    check_header(&mut rdr, &CANDLE_HEADER)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| schema(line, e.to_string()))?;
        if rec.len() != CANDLE_HEADER.len() {
            return Err(schema(line, format!("expected 8 fields, found {}", rec.len())));
        }
        let num = |k: usize| -> Result<f64, MarketDataError> {
            rec[k].trim().parse::<f64>().map_err(|e| schema(line, format!("{}: {e}", CANDLE_HEADER[k])))
        };
        let c = Candle {
            symbol: rec[0].to_string(),
            quote: rec[1].to_string(),
            ts: rec[2].trim().parse().map_err(|e| schema(line, format!("ts: {e}")))?,
            open: num(3)?,
            high: num(4)?,
            low: num(5)?,
            close: num(6)?,
            volume: num(7)?,
        };
        c.validate(None).map_err(|msg| MarketDataError::Validation { row: line, msg })?;
        out.push(c);
    }
    Ok(out)
}

/// Writes trades to `path` in the given order, replacing any existing file.
pub fn write_trades(trades: &[TradeRecord], path: impl AsRef<Path>) -> Result<usize, MarketDataError> {
    for (row, t) in trades.iter().enumerate() {
        t.validate().map_err(|msg| MarketDataError::Validation { row, msg })?;
    }
    let mut w = csv_writer(path.as_ref())?;
    w.write_record(TRADE_HEADER).map_err(csv_io)?;
    for t in trades {
        w.write_record([
            t.symbol.clone(),
            t.quote.clone(),
            t.ts.to_string(),
            t.price.to_string(),
            t.amount.to_string(),
            t.side.to_string(),
        ])
        .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(trades.len())
}

pub fn read_trades(path: impl AsRef<Path>) -> Result<Vec<TradeRecord>, MarketDataError> {
    let mut rdr = csv_reader(path.as_ref())?;
    check_header(&mut rdr, &TRADE_HEADER)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| schema(line, e.to_string()))?;
        if rec.len() != TRADE_HEADER.len() {
            return Err(schema(line, format!("expected 6 fields, found {}", rec.len())));
        }
        let dec = |k: usize| -> Result<Decimal, MarketDataError> {
            rec[k].trim().parse::<Decimal>().map_err(|e| schema(line, format!("{}: {e}", TRADE_HEADER[k])))
        };
        let t = TradeRecord {
            symbol: rec[0].to_string(),
            quote: rec[1].to_string(),
            ts: rec[2].trim().parse().map_err(|e| schema(line, format!("ts: {e}")))?,
            price: dec(3)?,
            amount: dec(4)?,
            side: rec[5].trim().parse().map_err(|e: String| schema(line, e))?,
        };
        t.validate().map_err(|msg| MarketDataError::Validation { row: line, msg })?;
        out.push(t);
    }
    Ok(out)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, MarketDataError> {
    let file = File::create(path)?;
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(BufWriter::new(file)))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<File>, MarketDataError> {
    let file = File::open(path)?;
    Ok(csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(file))
}

fn check_header(rdr: &mut csv::Reader<File>, expected: &[&str]) -> Result<(), MarketDataError> {
    let header = rdr.headers().map_err(|e| schema(1, e.to_string()))?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(schema(1, format!("header must be `{}`", expected.join(","))));
    }
    Ok(())
}

fn schema(line: usize, msg: String) -> MarketDataError {
    MarketDataError::Schema { row: Some(line), msg }
}

fn csv_io(e: csv::Error) -> MarketDataError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => MarketDataError::Io(io),
        other => MarketDataError::Schema { row: None, msg: format!("{other:?}") },
    }
}
