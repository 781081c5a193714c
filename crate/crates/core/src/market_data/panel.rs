use std::collections::{BTreeMap, HashSet};

use ndarray::Array2;

use super::{Candle, Interval, MarketDataError};
use crate::Scalar;

/// Close prices of N assets on a uniform grid of T bar timestamps.
///
/// `mask[i][t]` is true where the close was observed. Unobserved cells after
/// an asset's first observation hold the forward-filled close; cells before
/// it hold NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel<T> {
    symbols: Vec<String>,
    timestamps: Vec<i64>,
    prices: Array2<T>,
    mask: Array2<bool>,
}

impl<T: Scalar> PricePanel<T> {
    pub fn new(
        symbols: Vec<String>,
        timestamps: Vec<i64>,
        prices: Array2<T>,
        mask: Array2<bool>,
    ) -> Result<Self, MarketDataError> {
        let bad = |m: String| Err(MarketDataError::InvalidPanel(m));
        let (n, t) = (symbols.len(), timestamps.len());
        if prices.dim() != (n, t) || mask.dim() != (n, t) {
            return bad(format!("matrix shapes {:?}/{:?} do not match {n}x{t}", prices.dim(), mask.dim()));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = symbols.iter().find(|s| !seen.insert(s.as_str())) {
            return bad(format!("duplicate symbol {dup}"));
        }
        if let Some(w) = timestamps.windows(2).find(|w| w[1] <= w[0]) {
            return bad(format!("timestamps not strictly increasing at {}", w[1]));
        }
        if t >= 3 {
            let step = timestamps[1] - timestamps[0];
            if timestamps.windows(2).any(|w| w[1] - w[0] != step) {
                return bad("timestamps are not uniformly spaced".into());
            }
        }
        for ((i, j), &observed) in mask.indexed_iter() {
            let p = prices[(i, j)];
            if observed && !(p.is_finite() && p > T::zero()) {
                return bad(format!("observed price {p} for {} at {} is not positive", symbols[i], timestamps[j]));
            }
        }
        Ok(Self { symbols, timestamps, prices, mask })
    }

    /// Fully observed panel from row-major closes.
    pub fn from_rows(symbols: Vec<String>, timestamps: Vec<i64>, rows: &[Vec<T>]) -> Result<Self, MarketDataError> {
        let n = rows.len();
        let t = timestamps.len();
        if rows.iter().any(|r| r.len() != t) {
            return Err(MarketDataError::InvalidPanel("ragged rows".into()));
        }
        let prices = Array2::from_shape_fn((n, t), |(i, j)| rows[i][j]);
        Self::new(symbols, timestamps, prices, Array2::from_elem((n, t), true))
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn timestamps(&self) -> &[i64] {
        &self.timestamps
    }

    pub fn prices(&self) -> &Array2<T> {
        &self.prices
    }

    pub fn mask(&self) -> &Array2<bool> {
        &self.mask
    }

    pub fn n_assets(&self) -> usize {
        self.symbols.len()
    }

    pub fn n_times(&self) -> usize {
        self.timestamps.len()
    }

    pub fn symbol_index(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }

    pub fn time_index(&self, ts: i64) -> Option<usize> {
        self.timestamps.binary_search(&ts).ok()
    }

    /// Same grid and mask, new values. Used by transforms that keep the shape.
    pub(crate) fn with_prices(&self, prices: Array2<T>) -> Self {
        Self { symbols: self.symbols.clone(), timestamps: self.timestamps.clone(), prices, mask: self.mask.clone() }
    }
}

/// What to assemble from a candle store.
#[derive(Debug, Clone)]
pub struct PanelRequest {
    pub symbols: Vec<String>,
    /// Restrict to one quote currency; required when a symbol is stored under several.
    pub quote: Option<String>,
    pub start: i64,
    pub end: i64,
    pub interval: Interval,
}

/// Builds the aligned close panel for `req` on the full grid of `[start, end)`.
pub fn load_panel<T: Scalar>(candles: &[Candle], req: &PanelRequest) -> Result<PricePanel<T>, MarketDataError> {
    if req.start >= req.end {
        return Err(MarketDataError::InvalidRange { start: req.start, end: req.end });
    }
    if req.symbols.is_empty() {
        return Err(MarketDataError::InvalidPanel("no symbols requested".into()));
    }
    let step = req.interval.millis();
    let first = req.start.div_euclid(step) * step + if req.start.rem_euclid(step) == 0 { 0 } else { step };
    let timestamps: Vec<i64> = (0..).map(|k| first + k * step).take_while(|&ts| ts < req.end).collect();
    if timestamps.is_empty() {
        return Err(MarketDataError::InvalidRange { start: req.start, end: req.end });
    }
    let (n, t) = (req.symbols.len(), timestamps.len());
    let mut prices = Array2::from_elem((n, t), T::nan());
    let mut mask = Array2::from_elem((n, t), false);
    let mut any = false;

    for (i, sym) in req.symbols.iter().enumerate() {
        let mut quotes = HashSet::new();
        let mut closes: BTreeMap<i64, f64> = BTreeMap::new();
        for c in candles.iter().filter(|c| &c.symbol == sym) {
            if req.quote.as_ref().is_some_and(|q| q != &c.quote) {
                continue;
            }
            quotes.insert(c.quote.as_str());
            if c.ts >= first && c.ts < req.end && (c.ts - first) % step == 0 {
                closes.insert(c.ts, c.close);
            }
        }
        if quotes.len() > 1 {
            return Err(MarketDataError::InvalidPanel(format!(
                "{sym} is stored under several quotes; select one explicitly"
            )));
        }
        let mut last: Option<T> = None;
        for (j, ts) in timestamps.iter().enumerate() {
            if let Some(&close) = closes.get(ts) {
                let v = T::of(close);
                prices[(i, j)] = v;
                mask[(i, j)] = true;
                last = Some(v);
                any = true;
            } else if let Some(v) = last {
                prices[(i, j)] = v;
            }
        }
    }
    if !any {
        return Err(MarketDataError::EmptyPanel);
    }
    PricePanel::new(req.symbols.clone(), timestamps, prices, mask)
}
