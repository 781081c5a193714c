//! Correlation networks over crypto price panels.
//!
//! The pipeline runs from candles to a close-price panel, log returns,
//! exponentially weighted rolling correlations, TMFG filtering and
//! eigenvector centrality, with taker-flow imbalance and buy-and-hold
//! rankings alongside.
//!
//! Numeric types are generic over [`Scalar`] (`f32` or `f64`); the `F64`
//! aliases below are what the CLI uses.

pub mod centrality;
pub mod ewcorr;
pub mod imbalance;
pub mod market_data;
pub mod report;
pub mod returns;
mod scalar;
pub mod stats;
pub mod tmfg;

pub use scalar::Scalar;

pub type PricePanelF64 = market_data::PricePanel<f64>;
pub type PricePanelF32 = market_data::PricePanel<f32>;
pub type ReturnPanelF64 = returns::ReturnPanel<f64>;
pub type ReturnPanelF32 = returns::ReturnPanel<f32>;
pub type BhrReportF64 = returns::BhrReport<f64>;
pub type WeightVectorF64 = ewcorr::WeightVector<f64>;
pub type CorrMatrixF64 = ewcorr::WeightedCorrelationMatrix<f64>;
pub type CorrMatrixF32 = ewcorr::WeightedCorrelationMatrix<f32>;
pub type CorrelationSeriesF64 = ewcorr::CorrelationSeries<f64>;
pub type SimilarityMatrixF64 = tmfg::SimilarityMatrix<f64>;
pub type SimilarityMatrixF32 = tmfg::SimilarityMatrix<f32>;
pub type FilteredGraphF64 = tmfg::FilteredGraph<f64>;
pub type FilteredGraphF32 = tmfg::FilteredGraph<f32>;
pub type CentralityVectorF64 = centrality::CentralityVector<f64>;
pub type CentralityBandsF64 = centrality::CentralityBands<f64>;
