use serde::Serialize;

use super::{RqaError, Series};

/// Mutual information between `x[t]` and `x[t + tau]` for `tau = 1..=tau_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MiCurve {
    /// `values[k]` is MI at delay `k + 1`, in nats.
    pub values: Vec<f64>,
    /// Set when the series is constant; the curve is then all zeros.
    pub degenerate: bool,
}

impl MiCurve {
    pub fn at(&self, tau: usize) -> f64 {
        self.values[tau - 1]
    }
}

/// Histogram estimate of the delayed mutual information.
///
/// Both axes use `bins` equal-width cells spanning the series' `[min, max]`;
/// the marginals are taken from the same pair sample as the joint histogram,
/// which keeps every estimate non-negative.
pub fn mutual_information(series: &Series, tau_max: usize, bins: usize) -> Result<MiCurve, RqaError> {
    if tau_max == 0 {
        return Err(RqaError::InvalidParam("tau_max must be positive".into()));
    }
    if bins < 2 {
        return Err(RqaError::InvalidParam("at least 2 bins are required".into()));
    }
    if series.len() <= tau_max + 1 {
        return Err(RqaError::TooShort {
            len: series.len(),
            required: tau_max + 2,
        });
    }
    let x = series.values();
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if hi <= lo {
        return Ok(MiCurve {
            values: vec![0.0; tau_max],
            degenerate: true,
        });
    }
    let width = (hi - lo) / bins as f64;
    let cell: Vec<usize> = x
        .iter()
        .map(|&v| (((v - lo) / width) as usize).min(bins - 1))
        .collect();

    let mut joint = vec![0usize; bins * bins];
    let mut left = vec![0usize; bins];
    let mut right = vec![0usize; bins];
    let values = (1..=tau_max)
        .map(|tau| {
            joint.fill(0);
            left.fill(0);
            right.fill(0);
            let pairs = x.len() - tau;
            for t in 0..pairs {
                let (a, b) = (cell[t], cell[t + tau]);
                joint[a * bins + b] += 1;
                left[a] += 1;
                right[b] += 1;
            }
            let total = pairs as f64;
            let mut mi = 0.0;
            for a in 0..bins {
                for b in 0..bins {
                    let c = joint[a * bins + b];
                    if c == 0 {
                        continue;
                    }
                    let pab = c as f64 / total;
                    let pa = left[a] as f64 / total;
                    let pb = right[b] as f64 / total;
                    mi += pab * (pab / (pa * pb)).ln();
                }
            }
            // rounding can leave a value a few ulps below zero
            mi.max(0.0)
        })
        .collect();
    Ok(MiCurve {
        values,
        degenerate: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DelayEstimate {
    pub tau: usize,
    /// No interior local minimum was found and the delay defaulted to 1.
    pub fallback: bool,
}

/// First local minimum of a mutual-information curve indexed from delay 1.
///
/// Delay `tau` qualifies when `MI(tau) < MI(tau - 1)` (with `MI(0) = +inf`)
/// and `MI(tau) <= MI(tau + 1)`. The last point has no right neighbour and
/// never qualifies.
pub fn estimate_delay(mi_curve: &[f64]) -> DelayEstimate {
    for k in 0..mi_curve.len().saturating_sub(1) {
        let prev = if k == 0 { f64::INFINITY } else { mi_curve[k - 1] };
        if mi_curve[k] < prev && mi_curve[k] <= mi_curve[k + 1] {
            return DelayEstimate {
                tau: k + 1,
                fallback: false,
            };
        }
    }
    DelayEstimate {
        tau: 1,
        fallback: true,
    }
}
