//! Sliding-window RQA over a count series and a rolling median/MAD change
//! detector over the resulting measure series.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{bin_series, CountSeries, EventFilter, IngestError, LsaEvent};
use crate::rqa::{analyze_window, EmbedParams, Measure, RqaError, RqaMeasures};

#[derive(Debug, Error)]
pub enum DetectorError {
    #[error("invalid detector configuration: {0}")]
    Config(String),
    #[error("series has {bins} bins but one window needs {window}")]
    TooShort { bins: usize, window: usize },
    #[error(transparent)]
    Rqa(#[from] RqaError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    pub window_bins: usize,
    pub step_bins: usize,
    pub embed: EmbedParams,
    /// Number of prior windows forming the baseline.
    pub baseline_bins: usize,
    pub k_mad: f64,
    /// An alert run continues while some measure scores at least this much.
    /// Kept separate from `k_mad` so that raising `k_mad` can only remove
    /// alerts; must not exceed `k_mad`.
    pub k_release: f64,
    /// Lower bound on the MAD used as the deviation scale.
    pub mad_floor: f64,
    pub measures: Vec<Measure>,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            window_bins: 200,
            step_bins: 1,
            embed: EmbedParams::default(),
            baseline_bins: 60,
            k_mad: 6.0,
            k_release: 6.0,
            mad_floor: 1e-6,
            measures: Measure::ALL.to_vec(),
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<(), DetectorError> {
        let bad = |m: String| Err(DetectorError::Config(m));
        if self.window_bins < 10 {
            return bad(format!("window_bins {} is below 10", self.window_bins));
        }
        if self.baseline_bins < 10 {
            return bad(format!("baseline_bins {} is below 10", self.baseline_bins));
        }
        if self.step_bins == 0 {
            return bad("step_bins must be positive".into());
        }
        if !(self.k_mad > 0.0 && self.k_mad.is_finite()) {
            return bad(format!("k_mad {} must be positive", self.k_mad));
        }
        if !(self.k_release > 0.0 && self.k_release <= self.k_mad) {
            return bad(format!("k_release {} must lie in (0, k_mad]", self.k_release));
        }
        if !(self.mad_floor > 0.0 && self.mad_floor.is_finite()) {
            return bad(format!("mad_floor {} must be positive", self.mad_floor));
        }
        if self.measures.is_empty() {
            return bad("no measures enabled".into());
        }
        self.embed.validate()?;
        if self.embed.min_series_len() > self.window_bins {
            return bad(format!(
                "embedding (m={}, tau={}) needs {} bins per window",
                self.embed.m,
                self.embed.tau,
                self.embed.min_series_len()
            ));
        }
        Ok(())
    }
}

/// Measures of every window position. Row `k` covers bins
/// `[end_bin(k) + 1 - window_bins, end_bin(k)]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureSeries {
    pub window_bins: usize,
    pub step_bins: usize,
    pub start_us: i64,
    pub bin_size_s: u32,
    pub rows: Vec<RqaMeasures>,
    pub degenerate: Vec<bool>,
}

impl MeasureSeries {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn end_bin(&self, k: usize) -> usize {
        self.window_bins - 1 + k * self.step_bins
    }

    /// Start time of the last bin of window `k`, in seconds.
    pub fn time_s(&self, k: usize) -> f64 {
        self.start_us as f64 / 1e6 + self.end_bin(k) as f64 * self.bin_size_s as f64
    }

    pub fn values(&self, m: Measure) -> Vec<f64> {
        self.rows.iter().map(|r| r.get(m)).collect()
    }

    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        write!(out, "window_end_bin,t_s")?;
        for m in Measure::ALL {
            write!(out, ",{}", m.name())?;
        }
        writeln!(out)?;
        for (k, row) in self.rows.iter().enumerate() {
            write!(out, "{},{}", self.end_bin(k), self.time_s(k))?;
            for v in row.to_array() {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Run the full window analysis at every position. Windows are computed in
/// parallel; the result is ordered by position.
pub fn sliding_rqa(series: &CountSeries, config: &DetectorConfig) -> Result<MeasureSeries, DetectorError> {
    config.validate()?;
    let n = series.len();
    if n < config.window_bins {
        return Err(DetectorError::TooShort {
            bins: n,
            window: config.window_bins,
        });
    }
    let values = series.as_f64();
    let count = (n - config.window_bins) / config.step_bins + 1;
    let results: Vec<(RqaMeasures, bool)> = (0..count)
        .into_par_iter()
        .map(|k| {
            let start = k * config.step_bins;
            analyze_window(&values[start..start + config.window_bins], &config.embed)
        })
        .collect::<Result<_, _>>()?;
    let (rows, degenerate) = results.into_iter().unzip();
    Ok(MeasureSeries {
        window_bins: config.window_bins,
        step_bins: config.step_bins,
        start_us: series.start_us,
        bin_size_s: series.bin_size_s,
        rows,
        degenerate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriggeredMeasure {
    pub name: Measure,
    pub value: f64,
    pub baseline_median: f64,
    pub deviation_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alert {
    /// Last bin of the first deviant window of the run.
    pub bin_index: usize,
    pub time_s: f64,
    pub triggered_measures: Vec<TriggeredMeasure>,
    pub severity: f64,
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn sorted(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Median and median absolute deviation.
pub fn median_mad(values: &[f64]) -> (f64, f64) {
    let med = median(&sorted(values.iter().copied()));
    let mad = median(&sorted(values.iter().map(|v| (v - med).abs())));
    (med, mad)
}

/// Flag windows where an enabled measure sits at least `k_mad` scaled MADs
/// from the median of the preceding `baseline_bins` windows (the scale is
/// the MAD, floored at `mad_floor`). A flagged window opens an alert; the
/// run it belongs to lasts while some measure still scores `k_release` or
/// more, and yields that single alert.
pub fn detect(measures: &MeasureSeries, config: &DetectorConfig) -> Vec<Alert> {
    let b = config.baseline_bins;
    let mut alerts = Vec::new();
    let mut in_run = false;
    for k in b..measures.len() {
        let mut hits = Vec::new();
        let mut peak = 0.0f64;
        for &m in &config.measures {
            let value = measures.rows[k].get(m);
            let prior: Vec<f64> = measures.rows[k - b..k].iter().map(|r| r.get(m)).collect();
            let (med, mad) = median_mad(&prior);
            let score = (value - med).abs() / mad.max(config.mad_floor);
            peak = peak.max(score);
            if score >= config.k_mad {
                hits.push(TriggeredMeasure {
                    name: m,
                    value,
                    baseline_median: med,
                    deviation_score: score,
                });
            }
        }
        if in_run {
            in_run = peak >= config.k_release;
            continue;
        }
        if let Some(severity) = hits.iter().map(|h| h.deviation_score).reduce(f64::max) {
            alerts.push(Alert {
                bin_index: measures.end_bin(k),
                time_s: measures.time_s(k),
                triggered_measures: hits,
                severity,
            });
            in_run = true;
        }
    }
    alerts
}

pub fn write_alerts_jsonl(alerts: &[Alert], mut out: impl Write) -> std::io::Result<()> {
    for a in alerts {
        serde_json::to_writer(&mut out, a).map_err(std::io::Error::from)?;
        writeln!(out)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunAnalysis {
    pub series: CountSeries,
    pub dropped: usize,
    pub measures: MeasureSeries,
    pub alerts: Vec<Alert>,
}

/// Bin `events` over `[t0_us, t1_us)`, then run the sliding RQA and the
/// detector.
pub fn analyze_run(
    events: &[LsaEvent],
    filter: &EventFilter,
    bin_size_s: u32,
    t0_us: i64,
    t1_us: i64,
    config: &DetectorConfig,
) -> Result<RunAnalysis, DetectorError> {
    let binned = bin_series(events, filter, bin_size_s, t0_us, t1_us)?;
    let measures = sliding_rqa(&binned.series, config)?;
    let alerts = detect(&measures, config);
    Ok(RunAnalysis {
        series: binned.series,
        dropped: binned.dropped,
        measures,
        alerts,
    })
}
