//! Embedding parameter estimation for a count series: delay from the first
//! minimum of the mutual information, dimension from false nearest
//! neighbours, and a check of the recurrence threshold against the
//! phase-space diameter.

use serde::{Deserialize, Serialize};

use crate::rqa::{
    embed, estimate_delay, estimate_dimension, false_nearest_neighbors, mutual_information,
    phase_space_diameter, znormalize, FnnParams, Norm, RqaError, Series,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamSettings {
    pub tau_max: usize,
    pub mi_bins: usize,
    pub fnn: FnnParams,
    /// Threshold checked against 10% of the phase-space diameter, in
    /// z-normalized units.
    pub epsilon: f64,
    pub norm: Norm,
    /// FNN is quadratic in the series length; only this many leading
    /// samples are used for it.
    pub fnn_max_points: usize,
}

impl Default for ParamSettings {
    fn default() -> Self {
        ParamSettings {
            tau_max: 20,
            mi_bins: 16,
            fnn: FnnParams::default(),
            epsilon: 0.2,
            norm: Norm::Euclidean,
            fnn_max_points: 5000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamReport {
    pub len: usize,
    /// `mi_curve[k]` is the mutual information at delay `k + 1`.
    pub mi_curve: Vec<f64>,
    pub tau: usize,
    /// No interior minimum was found and `tau` fell back to 1.
    pub tau_fallback: bool,
    /// `fnn[k]` is the false-neighbour fraction at dimension `k + 1`.
    pub fnn: Vec<f64>,
    pub m: usize,
    pub m_saturated: bool,
    pub diameter: f64,
    pub epsilon: f64,
    pub epsilon_within_10pct: bool,
    /// The series is constant.
    pub degenerate: bool,
    pub warnings: Vec<String>,
}

pub fn estimate_params(series: &Series, settings: &ParamSettings) -> Result<ParamReport, RqaError> {
    let (z, degenerate) = znormalize(series);
    let mut warnings = Vec::new();
    if degenerate {
        warnings.push("series is constant; MI and FNN carry no information".to_string());
    }
    let tau_max = settings.tau_max.min(series.len().saturating_sub(2)).max(1);
    let mi = mutual_information(&z, tau_max, settings.mi_bins)?;
    let delay = estimate_delay(&mi.values);
    if delay.fallback && !degenerate {
        warnings.push(format!("no local MI minimum up to tau={tau_max}; using tau=1"));
    }

    let fnn_input = if z.len() > settings.fnn_max_points {
        warnings.push(format!(
            "FNN uses the first {} of {} samples",
            settings.fnn_max_points,
            z.len()
        ));
        Series::new(z.values()[..settings.fnn_max_points].to_vec())?
    } else {
        z.clone()
    };
    let f = &settings.fnn;
    let fnn = false_nearest_neighbors(&fnn_input, delay.tau, f.m_max, f.r_tol, f.a_tol)?;
    let dim = estimate_dimension(&fnn, f.drop_threshold);
    if dim.saturated {
        warnings.push(format!("FNN never settled; using m={}", dim.m));
    }

    let traj = embed(&z, delay.tau, dim.m)?;
    let diameter = phase_space_diameter(&traj, settings.norm);
    let epsilon_within_10pct = settings.epsilon <= 0.1 * diameter;
    if !epsilon_within_10pct {
        warnings.push(format!(
            "epsilon {} exceeds 10% of the phase-space diameter {diameter:.4}",
            settings.epsilon
        ));
    }
    Ok(ParamReport {
        len: series.len(),
        mi_curve: mi.values,
        tau: delay.tau,
        tau_fallback: delay.fallback,
        fnn,
        m: dim.m,
        m_saturated: dim.saturated,
        diameter,
        epsilon: settings.epsilon,
        epsilon_within_10pct,
        degenerate,
        warnings,
    })
}
