//! Eigenvector centrality on filtered graphs and its windowed time series.

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ewcorr::{make_weights, window_count, window_matrix, CorrError};
use crate::returns::ReturnPanel;
use crate::stats::percentile_sorted;
use crate::tmfg::{build_tmfg, graph::is_connected, to_similarity, verify, FilteredGraph, SimilarityTransform};
use crate::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum CentralityError {
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("graph is disconnected over its positive-weight edges")]
    DisconnectedGraph,
    #[error("negative edge weight between {0} and {1}")]
    NegativeWeight(usize, usize),
    #[error("power iteration did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("focus symbol {0} does not appear in any window")]
    FocusMissing(String),
    #[error("window {index} ending {ts}, {stage} stage: {message}")]
    Window { index: usize, ts: i64, stage: &'static str, message: String },
    #[error(transparent)]
    Corr(#[from] CorrError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentralityConfig {
    /// Stop once successive iterates differ by less than this in L2 norm.
    /// Raised to a few ulps for `f32`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Use unit edge weights instead of similarities.
    pub binary: bool,
}

impl Default for CentralityConfig {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_iterations: 10_000, binary: false }
    }
}

/// L2-normalised, non-negative principal eigenvector scores.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityVector<T> {
    pub symbols: Vec<String>,
    pub scores: Vec<T>,
    pub window_end_ts: i64,
    pub iterations: usize,
}

impl<T: Scalar> CentralityVector<T> {
    pub fn score(&self, symbol: &str) -> Option<T> {
        self.symbols.iter().position(|s| s == symbol).map(|i| self.scores[i])
    }

    pub fn argmax(&self) -> Option<usize> {
        (0..self.scores.len()).max_by(|&a, &b| self.scores[a].partial_cmp(&self.scores[b]).unwrap().then(b.cmp(&a)))
    }
}

/// Principal eigenvector of a symmetric non-negative matrix by power
/// iteration on `A + I`, from a uniform start.
///
/// The unit shift keeps the spectrum's top eigenvalue strictly dominant on
/// bipartite graphs (where `A` alone has `±λ`) without changing eigenvectors.
pub fn principal_eigenvector<T: Scalar>(
    adj: &Array2<T>,
    cfg: &CentralityConfig,
) -> Result<(Vec<T>, usize), CentralityError> {
    let n = adj.nrows();
    if n == 0 {
        return Err(CentralityError::EmptyGraph);
    }
    let tol = T::of(cfg.tolerance).max(T::of(16.0) * T::epsilon());
    let mut x = vec![T::one() / T::of(n as f64).sqrt(); n];
    let mut residual = T::infinity();
    for it in 1..=cfg.max_iterations {
        let mut y: Vec<T> = (0..n).map(|i| x[i] + adj.row(i).iter().zip(&x).map(|(&a, &v)| a * v).sum::<T>()).collect();
        let norm = y.iter().map(|&v| v * v).sum::<T>().sqrt();
        for v in &mut y {
            *v = *v / norm;
        }
        residual = y.iter().zip(&x).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>().sqrt();
        x = y;
        if residual < tol {
            if x.iter().copied().sum::<T>() < T::zero() {
                x.iter_mut().for_each(|v| *v = -*v);
            }
            return Ok((x, it));
        }
    }
    Err(CentralityError::NoConvergence { iterations: cfg.max_iterations, residual: residual.as_f64() })
}

pub fn eigenvector_centrality<T: Scalar>(
    graph: &FilteredGraph<T>,
    cfg: &CentralityConfig,
) -> Result<CentralityVector<T>, CentralityError> {
    let n = graph.len();
    if n == 0 {
        return Err(CentralityError::EmptyGraph);
    }
    if let Some(&(i, j, _)) = graph.edges.iter().find(|e| e.2 < T::zero()) {
        return Err(CentralityError::NegativeWeight(i, j));
    }
    let live: Vec<(usize, usize)> =
        graph.edges.iter().filter(|e| cfg.binary || e.2 > T::zero()).map(|&(i, j, _)| (i, j)).collect();
    if !is_connected(n, &live) {
        return Err(CentralityError::DisconnectedGraph);
    }
    let (scores, iterations) = principal_eigenvector(&graph.adjacency(cfg.binary), cfg)?;
    Ok(CentralityVector { symbols: graph.symbols.clone(), scores, window_end_ts: 0, iterations })
}

/// One non-overlapping window of the centrality series. `vector` is `None`
/// when the window's graph failed verification; `failure` names the checks.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityWindow<T> {
    pub window_end_ts: i64,
    pub vector: Option<CentralityVector<T>>,
    pub graph: FilteredGraph<T>,
    pub failure: Option<String>,
}

/// Correlation → similarity → TMFG → centrality on consecutive,
/// non-overlapping windows. The trailing partial window is dropped.
pub fn centrality_over_windows<T: Scalar>(
    returns: &ReturnPanel<T>,
    window: usize,
    theta: T,
    transform: SimilarityTransform,
    cfg: &CentralityConfig,
) -> Result<Vec<CentralityWindow<T>>, CentralityError> {
    let weights = make_weights(window, theta)?;
    if returns.len() < window {
        return Err(CorrError::WindowTooLong { window, available: returns.len() }.into());
    }
    let count = window_count(returns.len(), window, window);
    (0..count)
        .into_par_iter()
        .map(|k| {
            let corr = window_matrix(returns, k * window, &weights);
            let ts = corr.window_end_ts;
            let stage_err =
                |stage: &'static str, message: String| CentralityError::Window { index: k, ts, stage, message };
            let graph = build_tmfg(&to_similarity(&corr, transform)).map_err(|e| stage_err("tmfg", e.to_string()))?;
            let report = verify(&graph);
            if !report.passed() {
                let failure = Some(format!("verification failed: {}", report.failures().join(";")));
                return Ok(CentralityWindow { window_end_ts: ts, vector: None, graph, failure });
            }
            let mut v = eigenvector_centrality(&graph, cfg).map_err(|e| stage_err("centrality", e.to_string()))?;
            v.window_end_ts = ts;
            Ok(CentralityWindow { window_end_ts: ts, vector: Some(v), graph, failure: None })
        })
        .collect()
}

/// Cross-sectional percentiles of the non-focus scores in one window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bands<T> {
    pub p1: T,
    pub p5: T,
    pub p25: T,
    pub p75: T,
    pub p95: T,
    pub p99: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentralityBands<T> {
    pub timestamps: Vec<i64>,
    /// Focus symbol and its score per window (`None` when absent from a window).
    pub focus_series: Vec<(String, Vec<Option<T>>)>,
    /// `None` when a window has no non-focus assets.
    pub bands: Vec<Option<Bands<T>>>,
}

pub fn percentile_bands<T: Scalar>(
    vectors: &[CentralityVector<T>],
    focus: &[String],
) -> Result<CentralityBands<T>, CentralityError> {
    for f in focus {
        if !vectors.iter().any(|v| v.symbols.contains(f)) {
            return Err(CentralityError::FocusMissing(f.clone()));
        }
    }
    let focus_series = focus.iter().map(|f| (f.clone(), vectors.iter().map(|v| v.score(f)).collect())).collect();
    let bands = vectors
        .iter()
        .map(|v| {
            let mut rest: Vec<T> =
                v.symbols.iter().zip(&v.scores).filter(|(s, _)| !focus.contains(s)).map(|(_, &x)| x).collect();
            rest.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let q = |p: f64| percentile_sorted(&rest, p);
            Some(Bands { p1: q(0.01)?, p5: q(0.05)?, p25: q(0.25)?, p75: q(0.75)?, p95: q(0.95)?, p99: q(0.99)? })
        })
        .collect();
    Ok(CentralityBands { timestamps: vectors.iter().map(|v| v.window_end_ts).collect(), focus_series, bands })
}
