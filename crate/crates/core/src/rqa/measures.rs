use serde::{Deserialize, Serialize};

use super::{
    embed, line_histograms, recurrence_matrix, znormalize, EmbedParams, LineHistograms,
    RecurrenceMatrix, RqaError, Series,
};

/// The nine window measures.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RqaMeasures {
    pub rr: f64,
    pub det: f64,
    pub l_max: f64,
    pub l_mean: f64,
    pub l_entr: f64,
    pub tt: f64,
    pub v_entr: f64,
    pub t2: f64,
    pub w_entr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Rr,
    Det,
    LMax,
    LMean,
    LEntr,
    Tt,
    VEntr,
    T2,
    WEntr,
}

impl Measure {
    pub const ALL: [Measure; 9] = [
        Measure::Rr,
        Measure::Det,
        Measure::LMax,
        Measure::LMean,
        Measure::LEntr,
        Measure::Tt,
        Measure::VEntr,
        Measure::T2,
        Measure::WEntr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Rr => "rr",
            Measure::Det => "det",
            Measure::LMax => "l_max",
            Measure::LMean => "l_mean",
            Measure::LEntr => "l_entr",
            Measure::Tt => "tt",
            Measure::VEntr => "v_entr",
            Measure::T2 => "t2",
            Measure::WEntr => "w_entr",
        }
    }
}

impl std::fmt::Display for Measure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Measure {
    type Err = RqaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Measure::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| RqaError::InvalidParam(format!("unknown measure `{s}`")))
    }
}

impl RqaMeasures {
    pub fn get(&self, m: Measure) -> f64 {
        match m {
            Measure::Rr => self.rr,
            Measure::Det => self.det,
            Measure::LMax => self.l_max,
            Measure::LMean => self.l_mean,
            Measure::LEntr => self.l_entr,
            Measure::Tt => self.tt,
            Measure::VEntr => self.v_entr,
            Measure::T2 => self.t2,
            Measure::WEntr => self.w_entr,
        }
    }

    pub fn to_array(&self) -> [f64; 9] {
        Measure::ALL.map(|m| self.get(m))
    }

    pub fn from_histograms(
        hists: &LineHistograms,
        recurrences: usize,
        n: usize,
        l_min: usize,
        v_min: usize,
    ) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let (_, diag_points) = hists.diagonal.totals(1);
        let (_, det_points) = hists.diagonal.totals(l_min);
        RqaMeasures {
            rr: ratio(recurrences, n * n),
            det: ratio(det_points, diag_points),
            l_max: hists.diagonal.max_length().unwrap_or(0) as f64,
            l_mean: hists.diagonal.mean_length(l_min),
            l_entr: hists.diagonal.entropy(l_min),
            tt: hists.vertical.mean_length(v_min),
            v_entr: hists.vertical.entropy(v_min),
            t2: hists.white.mean_length(1),
            w_entr: hists.white.entropy(1),
        }
    }

    /// Measures assigned to a zero-variance window: those of the all-ones
    /// `n x n` matrix, with determinism pinned to 1 (every point of a constant
    /// trajectory is trivially deterministic, but the two corner cells form
    /// length-1 diagonals that would otherwise pull DET below 1).
    pub fn degenerate(n: usize, params: &EmbedParams) -> Self {
        let mut m = rqa_measures(
            &RecurrenceMatrix::all_ones(n),
            params.l_min,
            params.v_min,
            params.theiler,
        );
        m.det = 1.0;
        m
    }
}

/// Compute all nine measures of a recurrence matrix. Any measure whose
/// denominator is zero is reported as 0.
pub fn rqa_measures(rm: &RecurrenceMatrix, l_min: usize, v_min: usize, theiler: usize) -> RqaMeasures {
    let hists = line_histograms(rm, theiler);
    RqaMeasures::from_histograms(&hists, rm.recurrence_count(), rm.n(), l_min, v_min)
}

/// One full window analysis: z-normalize, embed, threshold, measure.
///
/// Returns the measures and whether the window had zero variance.
pub fn analyze_window(window: &[f64], params: &EmbedParams) -> Result<(RqaMeasures, bool), RqaError> {
    params.validate()?;
    let series = Series::new(window.to_vec())?;
    let (z, degenerate) = znormalize(&series);
    let traj = embed(&z, params.tau, params.m)?;
    if degenerate {
        return Ok((RqaMeasures::degenerate(traj.len(), params), true));
    }
    let rm = recurrence_matrix(&traj, params.epsilon, params.norm);
    Ok((rqa_measures(&rm, params.l_min, params.v_min, params.theiler), false))
}
