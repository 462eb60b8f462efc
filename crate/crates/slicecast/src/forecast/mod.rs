//! Prediction engines and their shared sequence plumbing.

pub mod holt_winters;
pub mod lstm;
pub mod naive;

use crate::features::{FeatureMatrix, ViewKind};
use crate::{Error, Result};

/// Per-test-period predictions in original units (bytes/hour), clamped
/// at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Forecast {
    pub app_id: String,
    pub view: ViewKind,
    pub values: Vec<f64>,
}

impl Forecast {
    pub fn new(app_id: impl Into<String>, view: ViewKind, values: Vec<f64>) -> Result<Forecast> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Shape("forecast values must be finite and non-negative".into()));
        }
        Ok(Forecast { app_id: app_id.into(), view, values })
    }
}

/// Sliding one-step-ahead samples: sample `i` covers feature rows
/// [i, i+L) and its label is target[i+L], so no label ever appears in
/// its own input window.
#[derive(Debug, Clone)]
pub struct WindowedDataset {
    pub window_len: usize,
    /// T x F scaled feature rows the windows index into.
    pub features: Vec<Vec<f64>>,
    /// One label per sample; length = T - L.
    pub labels: Vec<f64>,
}

impl WindowedDataset {
    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn input_dim(&self) -> usize {
        self.features.first().map_or(0, |r| r.len())
    }

    /// The L feature rows of sample `i`.
    pub fn window(&self, i: usize) -> &[Vec<f64>] {
        &self.features[i..i + self.window_len]
    }
}

/// Builds the windowed dataset from scaled features and a scaled target.
pub fn make_windows(features: &FeatureMatrix, target: &[f64], window_len: usize) -> Result<WindowedDataset> {
    let t = features.n_rows();
    if window_len < 1 {
        return Err(Error::Config("window length must be >= 1".into()));
    }
    if target.len() != t {
        return Err(Error::Shape(format!("feature rows {} vs target length {}", t, target.len())));
    }
    if t <= window_len {
        return Err(Error::Shape(format!(
            "need more than {window_len} periods to build windows, got {t}"
        )));
    }
    let labels = target[window_len..].to_vec();
    Ok(WindowedDataset { window_len, features: features.values.clone(), labels })
}
