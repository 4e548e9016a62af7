//! Recurrence quantification analysis engine.
//!
//! Everything here is a pure function of its inputs: delay embedding,
//! recurrence-matrix construction, line-structure histograms, the nine
//! window measures, and the embedding-parameter estimators (mutual
//! information for the delay, false nearest neighbours for the dimension,
//! phase-space diameter for threshold guidance).

mod embed;
mod fnn;
mod lines;
mod measures;
mod mi;
mod recurrence;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use embed::{embed, phase_space_diameter, znormalize, EmbeddedTrajectory};
pub use fnn::{estimate_dimension, false_nearest_neighbors, DimensionEstimate, FnnParams};
pub use lines::{line_histograms, LineHistogram, LineHistograms, LineKind};
pub use measures::{analyze_window, rqa_measures, Measure, RqaMeasures};
pub use mi::{estimate_delay, mutual_information, DelayEstimate, MiCurve};
pub use recurrence::{recurrence_matrix, RecurrenceMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RqaError {
    #[error("series is empty")]
    EmptySeries,
    #[error("series value at index {index} is not finite")]
    NonFinite { index: usize },
    #[error("series of length {len} is too short: at least {required} values are required")]
    TooShort { len: usize, required: usize },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
}

/// A uniformly sampled real-valued signal (LSA counts per bin).
#[derive(Debug, Clone, PartialEq)]
pub struct Series(Vec<f64>);

impl Series {
    pub fn new(values: Vec<f64>) -> Result<Self, RqaError> {
        if values.is_empty() {
            return Err(RqaError::EmptySeries);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(RqaError::NonFinite { index });
        }
        Ok(Series(values))
    }

    pub fn from_counts(counts: &[u64]) -> Result<Self, RqaError> {
        Self::new(counts.iter().map(|&c| c as f64).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }

    /// Population standard deviation.
    pub fn std_dev(&self) -> f64 {
        let mean = self.mean();
        let var = self.0.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / self.0.len() as f64;
        var.sqrt()
    }
}

impl TryFrom<Vec<f64>> for Series {
    type Error = RqaError;

    fn try_from(values: Vec<f64>) -> Result<Self, Self::Error> {
        Series::new(values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    #[default]
    Euclidean,
    Maximum,
}

impl Norm {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Norm::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Norm::Maximum => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
        }
    }
}

impl std::str::FromStr for Norm {
    type Err = RqaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" | "l2" => Ok(Norm::Euclidean),
            "maximum" | "max" | "linf" => Ok(Norm::Maximum),
            other => Err(RqaError::InvalidParam(format!("unknown norm `{other}`"))),
        }
    }
}

/// Embedding and recurrence parameters for one RQA analysis.
///
/// `epsilon` is expressed in z-normalized units. `theiler` excludes
/// diagonals with `|i - j| < theiler` from the diagonal-line statistics; the
/// line of identity is always excluded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbedParams {
    pub tau: usize,
    pub m: usize,
    pub epsilon: f64,
    pub norm: Norm,
    pub theiler: usize,
    pub l_min: usize,
    pub v_min: usize,
}

impl Default for EmbedParams {
    fn default() -> Self {
        EmbedParams {
            tau: 1,
            m: 2,
            epsilon: 0.2,
            norm: Norm::Euclidean,
            theiler: 1,
            l_min: 2,
            v_min: 2,
        }
    }
}

impl EmbedParams {
    pub fn validate(&self) -> Result<(), RqaError> {
        if self.tau == 0 {
            return Err(RqaError::InvalidParam("tau must be positive".into()));
        }
        if self.m == 0 {
            return Err(RqaError::InvalidParam("m must be positive".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(RqaError::InvalidParam("epsilon must be a positive finite number".into()));
        }
        if self.l_min < 2 || self.v_min < 2 {
            return Err(RqaError::InvalidParam("l_min and v_min must be at least 2".into()));
        }
        Ok(())
    }

    /// Smallest series length this embedding accepts.
    pub fn min_series_len(&self) -> usize {
        (self.m - 1) * self.tau + 2
    }
}
