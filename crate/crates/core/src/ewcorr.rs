//! Exponentially smoothed weighted Pearson correlation and its rolling driver.
//!
//! For a window of `Δt` observations the weights are
//! `w_t = w_0 · exp((t − Δt) / θ)` for `t = 1..=Δt`, with `w_0` chosen so the
//! weights sum to one. The weighted mean is `ȳ = Σ w_t y_t` and the
//! correlation is the weighted covariance over the product of the weighted
//! standard deviations.

use ndarray::Array2;
use rayon::prelude::*;
use thiserror::Error;

use crate::returns::ReturnPanel;
use crate::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum CorrError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("series length {found} does not match window {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("series has zero weighted variance")]
    ZeroVariance,
    #[error("window {window} is longer than the {available} available observations")]
    WindowTooLong { window: usize, available: usize },
    #[error("no correlation matrices to summarise")]
    EmptyInput,
}

/// Normalised exponential weights, oldest observation first.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector<T> {
    weights: Vec<T>,
    theta: T,
}

impl<T: Scalar> WeightVector<T> {
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn window(&self) -> usize {
        self.weights.len()
    }
}

pub fn make_weights<T: Scalar>(window: usize, theta: T) -> Result<WeightVector<T>, CorrError> {
    if window == 0 {
        return Err(CorrError::InvalidParameter("window must be at least 1".into()));
    }
    if !(theta > T::zero() && theta.is_finite()) {
        return Err(CorrError::InvalidParameter(format!("theta must be positive and finite, got {theta}")));
    }
    let dt = T::of(window as f64);
    let raw: Vec<T> = (1..=window).map(|t| ((T::of(t as f64) - dt) / theta).exp()).collect();
    let total: T = raw.iter().copied().sum();
    Ok(WeightVector { weights: raw.into_iter().map(|w| w / total).collect(), theta })
}

/// Weighted mean and centred deviations; `None` when the weighted variance
/// is zero up to rounding.
fn centre<T: Scalar>(y: &[T], w: &[T]) -> Option<(Vec<T>, T)> {
    let mean: T = y.iter().zip(w).map(|(&v, &wt)| wt * v).sum();
    let dev: Vec<T> = y.iter().map(|&v| v - mean).collect();
    let var: T = dev.iter().zip(w).map(|(&d, &wt)| wt * d * d).sum();
    let scale = y.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let floor = T::of(8.0) * T::epsilon() * scale;
    if var.is_nan() || var <= floor * floor {
        return None;
    }
    Some((dev, var))
}

fn clamp_unit<T: Scalar>(r: T) -> T {
    debug_assert!(r.abs() <= T::one() + T::of(1e-6), "correlation {r} far outside [-1, 1]");
    r.max(-T::one()).min(T::one())
}

/// Weighted correlation of two equally long series.
pub fn weighted_corr<T: Scalar>(x: &[T], y: &[T], w: &WeightVector<T>) -> Result<T, CorrError> {
    let n = w.window();
    for s in [x, y] {
        if s.len() != n {
            return Err(CorrError::LengthMismatch { expected: n, found: s.len() });
        }
    }
    let (dx, vx) = centre(x, w.weights()).ok_or(CorrError::ZeroVariance)?;
    let (dy, vy) = centre(y, w.weights()).ok_or(CorrError::ZeroVariance)?;
    let cov: T = w.weights().iter().zip(dx.iter().zip(&dy)).map(|(&wt, (&a, &b))| wt * a * b).sum();
    Ok(clamp_unit(cov / (vx.sqrt() * vy.sqrt())))
}

/// Correlation matrix of the assets active in one window.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedCorrelationMatrix<T> {
    pub symbols: Vec<String>,
    pub values: Array2<T>,
    /// Timestamp of the last return in the window.
    pub window_end_ts: i64,
}

impl<T: Scalar> WeightedCorrelationMatrix<T> {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }

    /// Symmetry, unit diagonal and range. Positive semi-definiteness needs an
    /// eigen-solver and is left to callers.
    pub fn check(&self) -> Result<(), String> {
        let n = self.len();
        if self.values.dim() != (n, n) {
            return Err(format!("shape {:?} for {n} symbols", self.values.dim()));
        }
        for i in 0..n {
            if self.values[(i, i)] != T::one() {
                return Err(format!("diagonal {i} is {}", self.values[(i, i)]));
            }
            for j in 0..n {
                let v = self.values[(i, j)];
                if v != self.values[(j, i)] {
                    return Err(format!("asymmetric at ({i}, {j})"));
                }
                if !(v >= -T::one() && v <= T::one()) {
                    return Err(format!("entry ({i}, {j}) = {v} outside [-1, 1]"));
                }
            }
        }
        Ok(())
    }

    /// Off-diagonal entries `(i, j, rho)` with `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        let n = self.len();
        (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j, self.values[(i, j)])))
    }
}

/// Correlation matrix over returns columns `start..start + window`.
///
/// Assets with a masked cell or zero weighted variance in the window are
/// left out of the matrix.
pub fn window_matrix<T: Scalar>(
    returns: &ReturnPanel<T>,
    start: usize,
    weights: &WeightVector<T>,
) -> WeightedCorrelationMatrix<T> {
    let window = weights.window();
    let cols = start..start + window;
    let mut symbols = Vec::new();
    let mut z: Vec<Vec<T>> = Vec::new();
    for i in 0..returns.n_assets() {
        if !cols.clone().all(|t| returns.mask[(i, t)]) {
            continue;
        }
        let y: Vec<T> = cols.clone().map(|t| returns.values[(i, t)]).collect();
        let Some((dev, var)) = centre(&y, weights.weights()) else {
            continue;
        };
        let sd = var.sqrt();
        z.push(dev.iter().zip(weights.weights()).map(|(&d, &w)| w.sqrt() * d / sd).collect());
        symbols.push(returns.symbols[i].clone());
    }
    let n = symbols.len();
    let mut values = Array2::from_elem((n, n), T::one());
    for i in 0..n {
        for j in (i + 1)..n {
            let r: T = z[i].iter().zip(&z[j]).map(|(&a, &b)| a * b).sum();
            let r = clamp_unit(r);
            values[(i, j)] = r;
            values[(j, i)] = r;
        }
    }
    WeightedCorrelationMatrix { symbols, values, window_end_ts: returns.timestamps[start + window - 1] }
}

/// Number of window positions: `floor((len − window) / step) + 1`.
pub fn window_count(len: usize, window: usize, step: usize) -> usize {
    if window == 0 || step == 0 || len < window {
        0
    } else {
        (len - window) / step + 1
    }
}

/// One weighted correlation matrix per window position, in time order.
pub fn rolling_corr<T: Scalar>(
    returns: &ReturnPanel<T>,
    window: usize,
    step: usize,
    theta: T,
) -> Result<Vec<WeightedCorrelationMatrix<T>>, CorrError> {
    if step == 0 {
        return Err(CorrError::InvalidParameter("step must be at least 1".into()));
    }
    let weights = make_weights(window, theta)?;
    if returns.len() < window {
        return Err(CorrError::WindowTooLong { window, available: returns.len() });
    }
    let count = window_count(returns.len(), window, step);
    Ok((0..count).into_par_iter().map(|k| window_matrix(returns, k * step, &weights)).collect())
}

/// Average correlation series for a set of focus assets plus the market-wide mean.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSeries<T> {
    pub timestamps: Vec<i64>,
    pub focus: Vec<String>,
    /// `per_asset_mean[k][w]`: mean correlation of `focus[k]` with the other
    /// assets in window `w`; `None` when the asset is absent from that window.
    pub per_asset_mean: Vec<Vec<Option<T>>>,
    /// Mean over all off-diagonal pairs; `None` for windows with fewer than two assets.
    pub market_mean: Vec<Option<T>>,
}

pub fn average_series<T: Scalar>(
    mats: &[WeightedCorrelationMatrix<T>],
    focus: &[String],
) -> Result<CorrelationSeries<T>, CorrError> {
    if mats.is_empty() {
        return Err(CorrError::EmptyInput);
    }
    let per_asset_mean = focus
        .iter()
        .map(|sym| {
            mats.iter()
                .map(|m| {
                    let i = m.index_of(sym)?;
                    let n = m.len();
                    (n >= 2).then(|| {
                        let sum: T = (0..n).filter(|&j| j != i).map(|j| m.values[(i, j)]).sum();
                        sum / T::of((n - 1) as f64)
                    })
                })
                .collect()
        })
        .collect();
    let market_mean = mats
        .iter()
        .map(|m| {
            let n = m.len();
            (n >= 2).then(|| {
                let sum: T = m.pairs().map(|(_, _, r)| r).sum();
                sum / T::of((n * (n - 1) / 2) as f64)
            })
        })
        .collect();
    Ok(CorrelationSeries {
        timestamps: mats.iter().map(|m| m.window_end_ts).collect(),
        focus: focus.to_vec(),
        per_asset_mean,
        market_mean,
    })
}
