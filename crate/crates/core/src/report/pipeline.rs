use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::outputs::{write_bands, write_bhr, write_centrality, write_corr_series, write_imbalance, write_panel};
use super::{annotate, EventTimeline, ReportError, RunConfig};
use crate::centrality::{centrality_over_windows, percentile_bands, CentralityConfig, CentralityError};
use crate::ewcorr::{average_series, rolling_corr};
use crate::imbalance::{compute_imbalance, ImbalanceOptions};
use crate::market_data::{load_panel, read_candles, read_trades, PanelRequest};
use crate::returns::{buy_and_hold, rescale, to_returns, BhrSummary};

/// Files written by a full run, in manifest order.
pub const OUTPUT_FILES: [&str; 6] =
    ["rescaled.csv", "correlation_series.csv", "centrality.csv", "centrality_bands.csv", "imbalance.csv", "bhr.csv"];

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Run record. Contains no wall-clock data, so identical inputs give an
/// identical manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config: RunConfig,
    pub inputs: Vec<FileEntry>,
    pub outputs: Vec<FileEntry>,
    pub correlation_windows: usize,
    pub centrality_windows: usize,
    /// `window_end_ts` and reason for windows whose graph failed verification.
    pub failed_windows: Vec<(i64, String)>,
    pub bhr: BhrSummary,
}

fn entry(path: String, bytes: &[u8]) -> FileEntry {
    FileEntry { path, sha256: hex::encode(Sha256::digest(bytes)), bytes: bytes.len() as u64 }
}

fn hash_input(path: &Path) -> Result<FileEntry, ReportError> {
    let bytes = fs::read(path)?;
    Ok(entry(path.display().to_string(), &bytes))
}

struct CorrBranch {
    series: Vec<u8>,
    centrality: Vec<u8>,
    bands: Vec<u8>,
    correlation_windows: usize,
    centrality_windows: usize,
    failed: Vec<(i64, String)>,
}

/// Runs every analysis for `cfg` and writes the outputs plus `manifest.json`
/// into `cfg.out_dir`. Nothing is written if any stage fails.
pub fn run_pipeline(cfg: &RunConfig) -> Result<Manifest, ReportError> {
    cfg.validate()?;
    let timeline = match (&cfg.timeline, cfg.builtin_timeline) {
        (Some(p), _) => Some(EventTimeline::from_path(p)?),
        (None, true) => Some(EventTimeline::ftx_2022()),
        (None, false) => None,
    };

    let candles = read_candles(&cfg.candles).map_err(|e| ReportError::stage("market-data", e))?;
    let req = PanelRequest {
        symbols: cfg.symbols.clone(),
        quote: cfg.quote.clone(),
        start: cfg.from,
        end: cfg.to,
        interval: cfg.interval,
    };
    let panel = load_panel::<f64>(&candles, &req).map_err(|e| ReportError::stage("market-data", e))?;
    let returns = to_returns(&panel, cfg.return_kind).map_err(|e| ReportError::stage("returns", e))?;

    let corr_branch = || -> Result<CorrBranch, ReportError> {
        let mats =
            rolling_corr(&returns, cfg.window, cfg.step, cfg.theta()).map_err(|e| ReportError::stage("ewcorr", e))?;
        let focus = if cfg.focus.is_empty() { cfg.symbols.clone() } else { cfg.focus.clone() };
        let series = average_series(&mats, &focus).map_err(|e| ReportError::stage("ewcorr", e))?;
        let ccfg = CentralityConfig { binary: cfg.binary, ..Default::default() };
        let windows =
            centrality_over_windows(&returns, cfg.window, cfg.theta(), cfg.transform, &ccfg).map_err(|e| match e {
                CentralityError::Window { index, stage, message, .. } => {
                    ReportError::Stage { stage, window: Some(index), message }
                }
                e => ReportError::stage("centrality", e),
            })?;
        let vectors: Vec<_> = windows.iter().filter_map(|w| w.vector.clone()).collect();
        let bands = percentile_bands(&vectors, &cfg.focus).map_err(|e| ReportError::stage("centrality", e))?;

        let mut out = CorrBranch {
            series: Vec::new(),
            centrality: Vec::new(),
            bands: Vec::new(),
            correlation_windows: mats.len(),
            centrality_windows: windows.len(),
            failed: windows.iter().filter_map(|w| Some((w.window_end_ts, w.failure.clone()?))).collect(),
        };
        write_corr_series(&series, &mut out.series)?;
        write_centrality(&windows, &mut out.centrality)?;
        write_bands(&bands, &mut out.bands)?;
        Ok(out)
    };

    let imbalance_branch = || -> Result<Option<Vec<u8>>, ReportError> {
        let Some(path) = &cfg.trades else { return Ok(None) };
        let trades = read_trades(path).map_err(|e| ReportError::stage("market-data", e))?;
        let trades: Vec<_> = trades
            .into_iter()
            .filter(|t| t.ts >= cfg.from && t.ts < cfg.to)
            .filter(|t| cfg.trade_symbol.as_ref().is_none_or(|s| &t.symbol == s))
            .collect();
        let opts = ImbalanceOptions { dense: true, allow_empty: true };
        let series = compute_imbalance(&trades, cfg.bucket, opts).map_err(|e| ReportError::stage("imbalance", e))?;
        let mut buf = Vec::new();
        write_imbalance(&series, &mut buf)?;
        Ok(Some(buf))
    };

    let (corr, imbalance) = rayon::join(corr_branch, imbalance_branch);
    let (corr, imbalance) = (corr?, imbalance?);

    let bhr_from = cfg.bhr_from.unwrap_or(panel.timestamps()[0]);
    let bhr_to = cfg.bhr_to.unwrap_or(*panel.timestamps().last().unwrap());
    let bhr = buy_and_hold(&panel, bhr_from, bhr_to).map_err(|e| ReportError::stage("bhr", e))?;
    let mut bhr_csv = Vec::new();
    write_bhr(&bhr, &mut bhr_csv)?;

    let rescaled = rescale(&panel).map_err(|e| ReportError::stage("returns", e))?;
    let mut rescaled_csv = Vec::new();
    write_panel(&rescaled, &mut rescaled_csv)?;

    let bar = cfg.interval.millis();
    let mut files: Vec<(&str, Vec<u8>, i64)> = vec![
        (OUTPUT_FILES[0], rescaled_csv, bar),
        (OUTPUT_FILES[1], corr.series, bar),
        (OUTPUT_FILES[2], corr.centrality, bar),
        (OUTPUT_FILES[3], corr.bands, bar),
    ];
    if let Some(buf) = imbalance {
        files.push((OUTPUT_FILES[4], buf, cfg.bucket.millis()));
    }
    files.push((OUTPUT_FILES[5], bhr_csv, 0));

    if let Some(tl) = &timeline {
        for (name, bytes, width) in files.iter_mut() {
            // bhr.csv has no time axis; centrality.csv is long-format and stays as is.
            if *width == 0 || *name == OUTPUT_FILES[2] {
                continue;
            }
            let text = String::from_utf8(std::mem::take(bytes)).expect("outputs are UTF-8");
            *bytes = annotate(&text, tl, *width)?.into_bytes();
        }
    }

    let mut inputs = vec![hash_input(&cfg.candles)?];
    for p in [&cfg.trades, &cfg.timeline].into_iter().flatten() {
        inputs.push(hash_input(p)?);
    }
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        inputs,
        outputs: files.iter().map(|(name, bytes, _)| entry(name.to_string(), bytes)).collect(),
        correlation_windows: corr.correlation_windows,
        centrality_windows: corr.centrality_windows,
        failed_windows: corr.failed,
        bhr: bhr.summary(),
    };

    fs::create_dir_all(&cfg.out_dir)?;
    for (name, bytes, _) in &files {
        fs::write(cfg.out_dir.join(name), bytes)?;
    }
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    json.push('\n');
    fs::write(cfg.out_dir.join(MANIFEST_FILE), json)?;
    log::info!("wrote {} files to {}", files.len() + 1, cfg.out_dir.display());
    Ok(manifest)
}
