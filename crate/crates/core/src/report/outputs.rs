//! Plot-ready CSV writers. Timestamps are integer UTC milliseconds and gaps
//! are empty fields.

use std::io::Write;

use serde::Serialize;

use super::{csv_writer, ReportError};
use crate::centrality::{CentralityBands, CentralityWindow};
use crate::ewcorr::{CorrelationSeries, WeightedCorrelationMatrix};
use crate::imbalance::ImbalanceSeries;
use crate::market_data::PricePanel;
use crate::returns::BhrReport;
use crate::tmfg::{FilteredGraph, Insertion, VerificationReport};
use crate::Scalar;

fn opt<T: Scalar>(v: Option<T>) -> String {
    v.filter(|x| x.is_finite()).map(|x| x.to_string()).unwrap_or_default()
}

fn finish<W: Write>(w: csv::Writer<W>) -> Result<(), ReportError> {
    w.into_inner().map_err(|e| ReportError::Io(e.into_error()))?;
    Ok(())
}

fn rec<W: Write, I: IntoIterator<Item = S>, S: AsRef<[u8]>>(w: &mut csv::Writer<W>, row: I) -> Result<(), ReportError> {
    w.write_record(row).map_err(|e| ReportError::Csv(e.to_string()))
}

/// Wide `ts,<symbol...>` closes; cells before a symbol's first observation are empty.
pub fn write_panel<T: Scalar, W: Write>(panel: &PricePanel<T>, out: W) -> Result<(), ReportError> {
    let mut w = csv_writer(out);
    rec(&mut w, std::iter::once("ts".to_string()).chain(panel.symbols().iter().cloned()))?;
    for (j, ts) in panel.timestamps().iter().enumerate() {
        let cells = (0..panel.n_assets()).map(|i| opt(Some(panel.prices()[(i, j)])));
        rec(&mut w, std::iter::once(ts.to_string()).chain(cells))?;
    }
    finish(w)
}

/// Long format `window_end_ts,sym_i,sym_j,rho` with `i < j`.
pub fn write_corr_long<T: Scalar, W: Write>(mats: &[WeightedCorrelationMatrix<T>], out: W) -> Result<(), ReportError> {
    let mut w = csv_writer(out);
    rec(&mut w, ["window_end_ts", "sym_i", "sym_j", "rho"])?;
    for m in mats {
        let ts = m.window_end_ts.to_string();
        for (i, j, r) in m.pairs() {
            rec(&mut w, [ts.as_str(), &m.symbols[i], &m.symbols[j], &r.to_string()])?;
        }
    }
    finish(w)
}

/// `ts,market_mean,<focus symbol...>`.
pub fn write_corr_series<T: Scalar, W: Write>(series: &CorrelationSeries<T>, out: W) -> Result<(), ReportError> {
    let mut w = csv_writer(out);
    let head = ["ts".to_string(), "market_mean".to_string()].into_iter().chain(series.focus.iter().cloned());
    rec(&mut w, head)?;
    for (k, ts) in series.timestamps.iter().enumerate() {
        let row = [ts.to_string(), opt(series.market_mean[k])]
            .into_iter()
            .chain(series.per_asset_mean.iter().map(|s| opt(s[k])));
        rec(&mut w, row)?;
    }
    finish(w)
}

/// `window_end_ts,sym_i,sym_j,weight`.
pub fn write_tmfg_edges<T: Scalar, W: Write>(graphs: &[(i64, &FilteredGraph<T>)], out: W) -> Result<(), ReportError> {
    let mut w = csv_writer(out);
    rec(&mut w, ["window_end_ts", "sym_i", "sym_j", "weight"])?;
    for (ts, g) in graphs {
        let ts = ts.to_string();
        for &(i, j, wt) in &g.edges {
            rec(&mut w, [ts.as_str(), &g.symbols[i], &g.symbols[j], &wt.to_string()])?;
        }
    }
    finish(w)
}

#[derive(Debug, Serialize)]
pub struct TmfgSidecar {
    pub window_end_ts: i64,
    pub seed: Vec<String>,
    pub insertion_log: Vec<SidecarInsertion>,
    pub verification: VerificationReport,
}

#[derive(Debug, Serialize)]
pub struct SidecarInsertion {
    pub vertex: String,
    pub host: [String; 3],
}

impl TmfgSidecar {
    pub fn new<T: Scalar>(window_end_ts: i64, g: &FilteredGraph<T>, verification: VerificationReport) -> Self {
        let name = |v: usize| g.symbols[v].clone();
        Self {
            window_end_ts,
            seed: g.seed.iter().map(|&v| name(v)).collect(),
            insertion_log: g
                .insertion_log
                .iter()
                .map(|&Insertion { vertex, host }| SidecarInsertion { vertex: name(vertex), host: host.map(name) })
                .collect(),
            verification,
        }
    }
}

/// `window_end_ts,symbol,score`. Windows that failed verification get one
/// row per asset with an empty score.
pub fn write_centrality<T: Scalar, W: Write>(windows: &[CentralityWindow<T>], out: W) -> Result<(), ReportError> {
    let mut w = csv_writer(out);
    rec(&mut w, ["window_end_ts", "symbol", "score"])?;
    for win in windows {
        let ts = win.window_end_ts.to_string();
        match &win.vector {
            Some(v) => {
                for (s, x) in v.symbols.iter().zip(&v.scores) {
                    rec(&mut w, [ts.as_str(), s, &x.to_string()])?;
                }
            }
            None => {
                for s in &win.graph.symbols {
                    rec(&mut w, [ts.as_str(), s, ""])?;
                }
            }
        }
    }
    finish(w)
}

/// `window_end_ts,p1,p5,p25,p75,p95,p99`.
pub fn write_bands<T: Scalar, W: Write>(bands: &CentralityBands<T>, out: W) -> Result<(), ReportError> {
    let mut w = csv_writer(out);
    rec(&mut w, ["window_end_ts", "p1", "p5", "p25", "p75", "p95", "p99"])?;
    for (ts, b) in bands.timestamps.iter().zip(&bands.bands) {
        let cells: Vec<String> = match b {
            Some(b) => [b.p1, b.p5, b.p25, b.p75, b.p95, b.p99].iter().map(|x| x.to_string()).collect(),
            None => vec![String::new(); 6],
        };
        rec(&mut w, std::iter::once(ts.to_string()).chain(cells))?;
    }
    finish(w)
}

/// `bucket_start_ts,buy_total,sell_total,imbalance`.
pub fn write_imbalance<W: Write>(series: &ImbalanceSeries, out: W) -> Result<(), ReportError> {
    let mut w = csv_writer(out);
    rec(&mut w, ["bucket_start_ts", "buy_total", "sell_total", "imbalance"])?;
    for k in 0..series.len() {
        rec(
            &mut w,
            [
                series.timestamps[k].to_string(),
                series.buy_total[k].to_string(),
                series.sell_total[k].to_string(),
                series.values[k].to_string(),
            ],
        )?;
    }
    finish(w)
}

/// `symbol,bhr`, ascending.
pub fn write_bhr<T: Scalar, W: Write>(report: &BhrReport<T>, out: W) -> Result<(), ReportError> {
    let mut w = csv_writer(out);
    rec(&mut w, ["symbol", "bhr"])?;
    for (s, v) in &report.entries {
        rec(&mut w, [s.as_str(), &v.to_string()])?;
    }
    finish(w)
}
