use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use cryptonet::centrality::{centrality_over_windows, percentile_bands, CentralityConfig};
use cryptonet::ewcorr::{average_series, rolling_corr};
use cryptonet::imbalance::{compute_imbalance, peak_report, Bucket, ImbalanceOptions};
use cryptonet::market_data::{
    load_panel, persist_candles, read_candles, read_trades, write_trades, ArchiveSource, BinanceSource, Fetcher,
    Interval, MarketSource, PanelRequest, RATE_LIMIT_ENV,
};
use cryptonet::report::{
    annotate_file, outputs, parse_instant, run_pipeline, ErrorKind, EventTimeline, ReportError, RunConfig,
};
use cryptonet::returns::{buy_and_hold, rescale, to_returns, ReturnKind};
use cryptonet::tmfg::{verify, SimilarityTransform};
use cryptonet::PricePanelF64;

const DATA_DIR_ENV: &str = "CRYPTONET_DATA_DIR";

#[derive(Parser)]
#[command(name = "cryptonet", version, about = "Correlation networks and order-flow analytics for crypto markets")]
struct Cli {
    /// Log level filter (error, warn, info, debug).
    #[arg(long, global = true, default_value = "warn")]
    log: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Download candles or trades into the local CSV store.
    Fetch(FetchArgs),
    /// Aligned close-price panel as wide CSV.
    Panel(PanelCmd),
    /// Rolling weighted correlation matrices (long CSV).
    Corr(CorrCmd),
    /// TMFG edges per non-overlapping window plus a JSON sidecar.
    Tmfg(TmfgCmd),
    /// Eigenvector centrality per window and percentile bands.
    Centrality(CentralityCmd),
    /// Per-bucket taker sell-minus-buy notional.
    Imbalance(ImbalanceCmd),
    /// Buy-and-hold returns between two dates.
    Bhr(BhrCmd),
    /// Full pipeline with a reproducible manifest.
    Run(RunCmd),
    /// Add an `event` column to a timestamped CSV.
    Annotate(AnnotateCmd),
}

fn instant(s: &str) -> Result<i64, String> {
    parse_instant(s)
}

fn symbol_list(v: &[String]) -> Vec<String> {
    v.iter().map(|x| x.trim().to_uppercase()).filter(|x| !x.is_empty()).collect()
}

#[derive(Args, Clone)]
struct PanelArgs {
    /// Candle store; defaults to $CRYPTONET_DATA_DIR/candles.csv.
    #[arg(long)]
    candles: Option<PathBuf>,
    /// Comma-separated base symbols.
    #[arg(long, value_delimiter = ',')]
    symbols: Vec<String>,
    #[arg(long)]
    quote: Option<String>,
    /// Start (inclusive): epoch ms, RFC 3339, `YYYY-MM-DD` or `YYYY-MM-DD HH:MM`.
    #[arg(long, value_parser = instant)]
    from: i64,
    /// End (exclusive).
    #[arg(long, value_parser = instant)]
    to: i64,
    #[arg(long, default_value = "hour")]
    interval: Interval,
    /// Data directory for default paths.
    #[arg(long, env = DATA_DIR_ENV, default_value = "data")]
    data_dir: PathBuf,
}

impl PanelArgs {
    fn symbols(&self) -> Vec<String> {
        symbol_list(&self.symbols)
    }

    fn candles_path(&self) -> PathBuf {
        self.candles.clone().unwrap_or_else(|| self.data_dir.join("candles.csv"))
    }

    fn load(&self) -> Result<PricePanelF64, CliError> {
        let path = self.candles_path();
        let candles =
            read_candles(&path).map_err(|e| CliError::data(format!("market-data: {}: {e}", path.display())))?;
        let req = PanelRequest {
            symbols: self.symbols(),
            quote: self.quote.clone(),
            start: self.from,
            end: self.to,
            interval: self.interval,
        };
        load_panel(&candles, &req).map_err(|e| CliError::data(format!("market-data: {e}")))
    }
}

#[derive(Args, Clone)]
struct WindowArgs {
    #[arg(long, default_value_t = 24)]
    window: usize,
    #[arg(long, default_value_t = 1)]
    step: usize,
    /// Decay scale of the weights; defaults to window / 3.
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long, default_value = "log")]
    returns: ReturnKind,
}

impl WindowArgs {
    fn theta(&self) -> f64 {
        self.theta.unwrap_or(self.window as f64 / 3.0)
    }

    fn check(&self) -> Result<(), CliError> {
        if self.window < 2 || self.step < 1 {
            return Err(CliError::config("window must be ≥ 2 and step ≥ 1"));
        }
        if self.theta().is_nan() || self.theta() <= 0.0 {
            return Err(CliError::config("theta must be positive"));
        }
        Ok(())
    }
}

#[derive(Args)]
struct FetchArgs {
    #[arg(long, value_delimiter = ',')]
    symbols: Vec<String>,
    #[arg(long, default_value = "USDT")]
    quote: String,
    #[arg(long, value_parser = instant)]
    from: i64,
    #[arg(long, value_parser = instant)]
    to: i64,
    #[arg(long, default_value = "hour")]
    interval: Interval,
    /// Fetch the aggregated trade tape instead of candles.
    #[arg(long)]
    trades: bool,
    /// Output store; defaults to $CRYPTONET_DATA_DIR/{candles,trades}.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Serve pages from a local CSV archive instead of the network.
    #[arg(long)]
    archive: Option<PathBuf>,
    #[arg(long, default_value = "https://api.binance.com")]
    base_url: String,
    /// Pause between requests for one symbol.
    #[arg(long, env = RATE_LIMIT_ENV, default_value_t = 100)]
    rate_limit_ms: u64,
    #[arg(long, env = DATA_DIR_ENV, default_value = "data")]
    data_dir: PathBuf,
}

#[derive(Args)]
struct PanelCmd {
    #[command(flatten)]
    panel: PanelArgs,
    /// Rebase every series to 1 at its first observation.
    #[arg(long)]
    rescale: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CorrCmd {
    #[command(flatten)]
    panel: PanelArgs,
    #[command(flatten)]
    win: WindowArgs,
    /// Also write the average correlation series for these symbols (or all).
    #[arg(long)]
    series: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    focus: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TmfgCmd {
    #[command(flatten)]
    panel: PanelArgs,
    #[command(flatten)]
    win: WindowArgs,
    #[arg(long, default_value = "square")]
    transform: SimilarityTransform,
    /// Output directory for tmfg_edges.csv and tmfg_windows.json.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct CentralityCmd {
    #[command(flatten)]
    panel: PanelArgs,
    #[command(flatten)]
    win: WindowArgs,
    #[arg(long, default_value = "square")]
    transform: SimilarityTransform,
    /// Symbols reported separately and excluded from the bands.
    #[arg(long, value_delimiter = ',')]
    focus: Vec<String>,
    /// Unit edge weights.
    #[arg(long)]
    binary: bool,
    /// Output directory for centrality.csv and centrality_bands.csv.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct ImbalanceCmd {
    /// Trade tape; defaults to $CRYPTONET_DATA_DIR/trades.csv.
    #[arg(long)]
    trades: Option<PathBuf>,
    /// Keep only this symbol's trades.
    #[arg(long)]
    symbol: Option<String>,
    #[arg(long, value_parser = instant)]
    from: Option<i64>,
    #[arg(long, value_parser = instant)]
    to: Option<i64>,
    #[arg(long, default_value = "minute")]
    bucket: Bucket,
    /// Emit zero rows for buckets without trades.
    #[arg(long)]
    dense: bool,
    /// Print the k largest |imbalance| buckets to stderr.
    #[arg(long, default_value_t = 0)]
    top: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = DATA_DIR_ENV, default_value = "data")]
    data_dir: PathBuf,
}

#[derive(Args)]
struct BhrCmd {
    #[command(flatten)]
    panel: PanelArgs,
    /// First endpoint; defaults to the first panel timestamp.
    #[arg(long, value_parser = instant)]
    start: Option<i64>,
    /// Second endpoint; defaults to the last panel timestamp.
    #[arg(long, value_parser = instant)]
    end: Option<i64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunCmd {
    /// TOML or JSON run configuration. Flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    candles: Option<PathBuf>,
    #[arg(long)]
    trades: Option<PathBuf>,
    #[arg(long)]
    trade_symbol: Option<String>,
    #[arg(long)]
    timeline: Option<PathBuf>,
    /// Annotate with the bundled 2022 event timeline.
    #[arg(long)]
    builtin_timeline: bool,
    #[arg(long, value_delimiter = ',')]
    symbols: Vec<String>,
    #[arg(long)]
    quote: Option<String>,
    #[arg(long, value_parser = instant)]
    from: Option<i64>,
    #[arg(long, value_parser = instant)]
    to: Option<i64>,
    #[arg(long)]
    interval: Option<Interval>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    step: Option<usize>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    transform: Option<SimilarityTransform>,
    #[arg(long)]
    bucket: Option<Bucket>,
    #[arg(long, value_delimiter = ',')]
    focus: Vec<String>,
    #[arg(long)]
    binary: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = DATA_DIR_ENV, default_value = "data")]
    data_dir: PathBuf,
}

#[derive(Args)]
struct AnnotateCmd {
    /// CSV with a ts / window_end_ts / bucket_start_ts column.
    input: PathBuf,
    /// Timeline CSV (label,ts,description); the bundled 2022 timeline by default.
    #[arg(long)]
    timeline: Option<PathBuf>,
    /// Row width used for event containment.
    #[arg(long, default_value = "hour")]
    bucket: Interval,
    /// Write here instead of rewriting the input.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
struct CliError {
    kind: ErrorKind,
    message: String,
}

impl CliError {
    fn config(m: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Config, message: m.into() }
    }
    fn data(m: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Data, message: m.into() }
    }
    fn numeric(m: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Numeric, message: m.into() }
    }

    fn exit_code(&self) -> u8 {
        match self.kind {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Numeric => 4,
        }
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        Self { kind: e.kind(), message: e.to_string() }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self::data(e.to_string())
    }
}

/// stdout when `path` is `None`.
fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            Box::new(BufWriter::new(File::create(p)?))
        }
        None => Box::new(io::stdout().lock()),
    })
}

fn returns_of(panel: &PricePanelF64, kind: ReturnKind) -> Result<cryptonet::ReturnPanelF64, CliError> {
    to_returns(panel, kind).map_err(|e| CliError::data(format!("returns: {e}")))
}

fn fetch(a: FetchArgs) -> Result<(), CliError> {
    let symbols: Vec<String> = symbol_list(&a.symbols);
    if symbols.is_empty() {
        return Err(CliError::config("--symbols is required"));
    }
    let fetcher = Fetcher { rate_limit: Duration::from_millis(a.rate_limit_ms), ..Fetcher::default() };
    let source: Box<dyn MarketSource> = match &a.archive {
        Some(p) => {
            let (c, t) = if a.trades { (None, Some(p.as_path())) } else { (Some(p.as_path()), None) };
            Box::new(ArchiveSource::open(c, t).map_err(|e| CliError::data(format!("market-data: {e}")))?)
        }
        None => Box::new(BinanceSource::new(a.base_url)),
    };
    let default_name = if a.trades { "trades.csv" } else { "candles.csv" };
    let out = a.out.unwrap_or_else(|| a.data_dir.join(default_name));
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let market = |e| CliError::data(format!("market-data: {e}"));
    if a.trades {
        let mut all = Vec::new();
        for s in &symbols {
            all.extend(fetcher.trades(source.as_ref(), s, &a.quote, a.from, a.to).map_err(market)?);
        }
        let n = write_trades(&all, &out).map_err(market)?;
        eprintln!("wrote {n} trades to {}", out.display());
    } else {
        let mut all = Vec::new();
        for (s, res) in fetcher.candles_many(source.as_ref(), &symbols, &a.quote, a.interval, a.from, a.to) {
            let rows = res.map_err(|e| CliError::data(format!("market-data: {s}: {e}")))?;
            log::info!("{s}: {} candles", rows.len());
            all.extend(rows);
        }
        let n = persist_candles(&all, &out).map_err(market)?;
        eprintln!("store {} now holds {n} candles", out.display());
    }
    Ok(())
}

fn panel(a: PanelCmd) -> Result<(), CliError> {
    let mut p = a.panel.load()?;
    if a.rescale {
        p = rescale(&p).map_err(|e| CliError::data(format!("returns: {e}")))?;
    }
    outputs::write_panel(&p, sink(a.out.as_deref())?)?;
    Ok(())
}

fn corr(a: CorrCmd) -> Result<(), CliError> {
    a.win.check()?;
    let r = returns_of(&a.panel.load()?, a.win.returns)?;
    let mats = rolling_corr(&r, a.win.window, a.win.step, a.win.theta())
        .map_err(|e| CliError::numeric(format!("ewcorr: {e}")))?;
    outputs::write_corr_long(&mats, sink(a.out.as_deref())?)?;
    if let Some(path) = a.series {
        let focus: Vec<String> = symbol_list(&a.focus);
        let focus = if focus.is_empty() { r.symbols.clone() } else { focus };
        let s = average_series(&mats, &focus).map_err(|e| CliError::numeric(format!("ewcorr: {e}")))?;
        outputs::write_corr_series(&s, sink(Some(&path))?)?;
    }
    Ok(())
}

fn centrality_windows(
    panel: &PanelArgs,
    win: &WindowArgs,
    transform: SimilarityTransform,
    binary: bool,
) -> Result<Vec<cryptonet::centrality::CentralityWindow<f64>>, CliError> {
    win.check()?;
    let r = returns_of(&panel.load()?, win.returns)?;
    let cfg = CentralityConfig { binary, ..Default::default() };
    centrality_over_windows(&r, win.window, win.theta(), transform, &cfg).map_err(|e| CliError::numeric(e.to_string()))
}

fn tmfg(a: TmfgCmd) -> Result<(), CliError> {
    let windows = centrality_windows(&a.panel, &a.win, a.transform, false)?;
    fs::create_dir_all(&a.out)?;
    let graphs: Vec<_> = windows.iter().map(|w| (w.window_end_ts, &w.graph)).collect();
    outputs::write_tmfg_edges(&graphs, sink(Some(&a.out.join("tmfg_edges.csv")))?)?;
    let sidecars: Vec<_> =
        windows.iter().map(|w| outputs::TmfgSidecar::new(w.window_end_ts, &w.graph, verify(&w.graph))).collect();
    let json = serde_json::to_string_pretty(&sidecars).expect("sidecar serialises");
    fs::write(a.out.join("tmfg_windows.json"), json + "\n")?;
    let failed = sidecars.iter().filter(|s| !s.verification.passed()).count();
    if failed > 0 {
        eprintln!("warning: {failed} window(s) failed verification");
    }
    Ok(())
}

fn centrality(a: CentralityCmd) -> Result<(), CliError> {
    let windows = centrality_windows(&a.panel, &a.win, a.transform, a.binary)?;
    fs::create_dir_all(&a.out)?;
    outputs::write_centrality(&windows, sink(Some(&a.out.join("centrality.csv")))?)?;
    let focus: Vec<String> = symbol_list(&a.focus);
    let vectors: Vec<_> = windows.iter().filter_map(|w| w.vector.clone()).collect();
    let bands = percentile_bands(&vectors, &focus).map_err(|e| CliError::numeric(format!("centrality: {e}")))?;
    outputs::write_bands(&bands, sink(Some(&a.out.join("centrality_bands.csv")))?)?;
    Ok(())
}

fn imbalance(a: ImbalanceCmd) -> Result<(), CliError> {
    let path = a.trades.unwrap_or_else(|| a.data_dir.join("trades.csv"));
    let trades = read_trades(&path).map_err(|e| CliError::data(format!("market-data: {}: {e}", path.display())))?;
    let trades: Vec<_> = trades
        .into_iter()
        .filter(|t| a.symbol.as_ref().is_none_or(|s| t.symbol.eq_ignore_ascii_case(s)))
        .filter(|t| a.from.is_none_or(|f| t.ts >= f) && a.to.is_none_or(|e| t.ts < e))
        .collect();
    let opts = ImbalanceOptions { dense: a.dense, allow_empty: false };
    let series = compute_imbalance(&trades, a.bucket, opts).map_err(|e| CliError::data(format!("imbalance: {e}")))?;
    outputs::write_imbalance(&series, sink(a.out.as_deref())?)?;
    for p in peak_report(&series, a.top) {
        eprintln!("{}\t{}", p.ts, p.value);
    }
    Ok(())
}

fn bhr(a: BhrCmd) -> Result<(), CliError> {
    let p = a.panel.load()?;
    let start = a.start.unwrap_or(p.timestamps()[0]);
    let end = a.end.unwrap_or(*p.timestamps().last().unwrap());
    let report = buy_and_hold(&p, start, end).map_err(|e| CliError::data(format!("bhr: {e}")))?;
    outputs::write_bhr(&report, sink(a.out.as_deref())?)?;
    eprintln!("{}", serde_json::to_string(&report.summary()).expect("summary serialises"));
    Ok(())
}

fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

fn run(a: RunCmd) -> Result<(), CliError> {
    let mut cfg = match &a.config {
        Some(p) => load_config(p)?,
        None => {
            let (Some(from), Some(to)) = (a.from, a.to) else {
                return Err(CliError::config("--from and --to are required without --config"));
            };
            RunConfig::new(
                a.data_dir.join("candles.csv"),
                Vec::new(),
                from,
                to,
                a.out.clone().unwrap_or_else(|| PathBuf::from("out")),
            )
        }
    };
    macro_rules! over {
        ($($field:ident),*) => { $(if let Some(v) = a.$field.clone() { cfg.$field = v; })* };
    }
    over!(candles, from, to, interval, window, step, transform, bucket);
    if a.trades.is_some() {
        cfg.trades = a.trades.clone();
    }
    if a.trade_symbol.is_some() {
        cfg.trade_symbol = a.trade_symbol.clone();
    }
    if a.timeline.is_some() {
        cfg.timeline = a.timeline.clone();
    }
    if a.theta.is_some() {
        cfg.theta = a.theta;
    }
    if a.quote.is_some() {
        cfg.quote = a.quote.clone();
    }
    if let Some(out) = &a.out {
        cfg.out_dir = out.clone();
    }
    let symbols: Vec<String> = symbol_list(&a.symbols);
    if !symbols.is_empty() {
        cfg.symbols = symbols;
    }
    let focus: Vec<String> = symbol_list(&a.focus);
    if !focus.is_empty() {
        cfg.focus = focus;
    }
    cfg.binary |= a.binary;
    cfg.builtin_timeline |= a.builtin_timeline;
    let manifest = run_pipeline(&cfg)?;
    for f in &manifest.outputs {
        eprintln!("{}  {}", f.sha256, cfg.out_dir.join(&f.path).display());
    }
    Ok(())
}

fn annotate(a: AnnotateCmd) -> Result<(), CliError> {
    let tl = match &a.timeline {
        Some(p) => EventTimeline::from_path(p)?,
        None => EventTimeline::ftx_2022(),
    };
    let target = match a.out {
        Some(out) => {
            fs::copy(&a.input, &out)?;
            out
        }
        None => a.input,
    };
    annotate_file(&target, &tl, a.bucket.millis())?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().parse_filters(&cli.log).init();
    let result = match cli.command {
        Command::Fetch(a) => fetch(a),
        Command::Panel(a) => panel(a),
        Command::Corr(a) => corr(a),
        Command::Tmfg(a) => tmfg(a),
        Command::Centrality(a) => centrality(a),
        Command::Imbalance(a) => imbalance(a),
        Command::Bhr(a) => bhr(a),
        Command::Run(a) => run(a),
        Command::Annotate(a) => annotate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.exit_code())
        }
    }
}
