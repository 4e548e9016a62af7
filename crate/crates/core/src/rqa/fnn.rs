use serde::{Deserialize, Serialize};

use super::{RqaError, Series};

/// Kennel-style false-nearest-neighbour settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FnnParams {
    pub m_max: usize,
    /// Relative distance growth that marks a neighbour as false.
    pub r_tol: f64,
    /// Absolute (m+1)-dimensional distance, in series standard deviations,
    /// that marks a neighbour as false.
    pub a_tol: f64,
    pub drop_threshold: f64,
}

impl Default for FnnParams {
    fn default() -> Self {
        FnnParams {
            m_max: 10,
            r_tol: 15.0,
            a_tol: 2.0,
            drop_threshold: 0.01,
        }
    }
}

/// Fraction of false nearest neighbours for `m = 1..=m_max`.
///
/// For each dimension every point that can be extended by one more delay
/// coordinate is paired with its nearest neighbour (euclidean, ties to the
/// earliest index). The pair is false if the extra coordinate stretches the
/// distance by more than `r_tol` times, or if the extended distance exceeds
/// `a_tol` standard deviations. Pairs at zero distance (up to rounding) are
/// judged by the second test alone.
pub fn false_nearest_neighbors(
    series: &Series,
    tau: usize,
    m_max: usize,
    r_tol: f64,
    a_tol: f64,
) -> Result<Vec<f64>, RqaError> {
    if tau == 0 || m_max == 0 {
        return Err(RqaError::InvalidParam("tau and m_max must be positive".into()));
    }
    if !(r_tol > 0.0 && a_tol > 0.0) {
        return Err(RqaError::InvalidParam("r_tol and a_tol must be positive".into()));
    }
    let required = m_max * tau + 2;
    if series.len() < required {
        return Err(RqaError::TooShort {
            len: series.len(),
            required,
        });
    }
    let x = series.values();
    let sigma = series.std_dev();
    // distances below this are rounding noise, e.g. exact repeats of a
    // periodic signal
    let zero_tol = 1e-9 * sigma.max(f64::MIN_POSITIVE);

    let fractions = (1..=m_max)
        .map(|m| {
            let n = x.len() - m * tau;
            let point = |i: usize| (0..m).map(move |k| x[i + k * tau]);
            let mut false_pairs = 0usize;
            for i in 0..n {
                let mut best = f64::INFINITY;
                let mut best_j = usize::MAX;
                for j in (0..n).filter(|&j| j != i) {
                    let d2: f64 = point(i).zip(point(j)).map(|(a, b)| (a - b) * (a - b)).sum();
                    if d2 < best {
                        best = d2;
                        best_j = j;
                    }
                }
                let dist = best.sqrt();
                let extra = (x[i + m * tau] - x[best_j + m * tau]).abs();
                let extended = (best + extra * extra).sqrt();
                let stretched = dist > zero_tol && extra / dist > r_tol;
                let too_far = extended > a_tol * sigma;
                if stretched || too_far {
                    false_pairs += 1;
                }
            }
            false_pairs as f64 / n as f64
        })
        .collect();
    Ok(fractions)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DimensionEstimate {
    pub m: usize,
    /// Neither criterion fired and `m` is the largest dimension tested.
    pub saturated: bool,
}

/// Smallest `m` whose fraction drops below `drop_threshold` or is a strict
/// interior local minimum of the curve (index 0 of `fnn` is `m = 1`).
pub fn estimate_dimension(fnn: &[f64], drop_threshold: f64) -> DimensionEstimate {
    for k in 0..fnn.len() {
        let below = fnn[k] < drop_threshold;
        let local_min = k > 0 && k + 1 < fnn.len() && fnn[k] < fnn[k - 1] && fnn[k] < fnn[k + 1];
        if below || local_min {
            return DimensionEstimate {
                m: k + 1,
                saturated: false,
            };
        }
    }
    DimensionEstimate {
        m: fnn.len(),
        saturated: true,
    }
}
