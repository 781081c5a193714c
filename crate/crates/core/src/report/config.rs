use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::ReportError;
use crate::imbalance::Bucket;
use crate::market_data::Interval;
use crate::returns::ReturnKind;
use crate::tmfg::SimilarityTransform;

pub const DEFAULT_WINDOW: usize = 24;

/// Everything a pipeline run depends on. Serialised verbatim into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Candle store (CSV written by `persist_candles`).
    pub candles: PathBuf,
    /// Trade tape for the imbalance branch; skipped when absent.
    #[serde(default)]
    pub trades: Option<PathBuf>,
    /// Only trades of this symbol enter the imbalance series.
    #[serde(default)]
    pub trade_symbol: Option<String>,
    /// Event timeline CSV; when set, time-series outputs gain an `event` column.
    #[serde(default)]
    pub timeline: Option<PathBuf>,
    /// Annotate with the bundled 2022 timeline when no `timeline` file is given.
    #[serde(default)]
    pub builtin_timeline: bool,
    pub symbols: Vec<String>,
    #[serde(default)]
    pub quote: Option<String>,
    /// UTC milliseconds, `[from, to)`.
    pub from: i64,
    pub to: i64,
    #[serde(default = "default_interval")]
    pub interval: Interval,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_step")]
    pub step: usize,
    /// Decay scale; `window / 3` when unset.
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default)]
    pub transform: SimilarityTransform,
    #[serde(default)]
    pub return_kind: ReturnKind,
    #[serde(default)]
    pub bucket: Bucket,
    /// Assets singled out in the correlation series and excluded from the centrality bands.
    #[serde(default)]
    pub focus: Vec<String>,
    /// Unit edge weights for centrality.
    #[serde(default)]
    pub binary: bool,
    /// Buy-and-hold endpoints; default to the first and last panel timestamps.
    #[serde(default)]
    pub bhr_from: Option<i64>,
    #[serde(default)]
    pub bhr_to: Option<i64>,
    pub out_dir: PathBuf,
}

fn default_interval() -> Interval {
    Interval::Hour
}

fn default_window() -> usize {
    DEFAULT_WINDOW
}

fn default_step() -> usize {
    1
}

impl RunConfig {
    pub fn new(candles: PathBuf, symbols: Vec<String>, from: i64, to: i64, out_dir: PathBuf) -> Self {
        Self {
            candles,
            trades: None,
            trade_symbol: None,
            timeline: None,
            builtin_timeline: false,
            symbols,
            quote: None,
            from,
            to,
            interval: default_interval(),
            window: DEFAULT_WINDOW,
            step: 1,
            theta: None,
            transform: SimilarityTransform::default(),
            return_kind: ReturnKind::default(),
            bucket: Bucket::default(),
            focus: Vec::new(),
            binary: false,
            bhr_from: None,
            bhr_to: None,
            out_dir,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta.unwrap_or(self.window as f64 / 3.0)
    }

    pub fn validate(&self) -> Result<(), ReportError> {
        let err = |m: String| Err(ReportError::Config(m));
        for p in [Some(&self.candles), self.trades.as_ref(), self.timeline.as_ref()].into_iter().flatten() {
            if !p.is_file() {
                return err(format!("{} does not exist", p.display()));
            }
        }
        if self.window < 2 {
            return err(format!("window must be at least 2, got {}", self.window));
        }
        if self.step < 1 {
            return err("step must be at least 1".into());
        }
        if !(self.theta() > 0.0 && self.theta().is_finite()) {
            return err(format!("theta must be positive, got {}", self.theta()));
        }
        if self.symbols.is_empty() {
            return err("symbol list is empty".into());
        }
        if self.from >= self.to {
            return err(format!("from {} is not before to {}", self.from, self.to));
        }
        if let Some(f) = self.focus.iter().find(|f| !self.symbols.contains(f)) {
            return err(format!("focus symbol {f} is not in the symbol list"));
        }
        Ok(())
    }
}
