use super::{Norm, RqaError, Series};

/// Relative standard deviation below which a series counts as constant.
const DEGENERATE_REL_STD: f64 = 1e-12;

/// Rescale to zero mean and unit population standard deviation.
///
/// A zero-variance input maps to all zeros with the degenerate flag set.
pub fn znormalize(series: &Series) -> (Series, bool) {
    let mean = series.mean();
    let std = series.std_dev();
    if std <= DEGENERATE_REL_STD * mean.abs().max(1.0) {
        return (Series(vec![0.0; series.len()]), true);
    }
    let values = series.values().iter().map(|v| (v - mean) / std).collect();
    (Series(values), false)
}

/// Delay-coordinate reconstruction of a scalar series.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedTrajectory {
    tau: usize,
    dim: usize,
    // row-major, `dim` values per point
    coords: Vec<f64>,
}

impl EmbeddedTrajectory {
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }
}

/// Point `i` is `(x[i], x[i + tau], ..., x[i + (m - 1) tau])`.
pub fn embed(series: &Series, tau: usize, m: usize) -> Result<EmbeddedTrajectory, RqaError> {
    if tau == 0 || m == 0 {
        return Err(RqaError::InvalidParam("tau and m must be positive".into()));
    }
    let required = (m - 1) * tau + 2;
    if series.len() < required {
        return Err(RqaError::TooShort {
            len: series.len(),
            required,
        });
    }
    let n = series.len() - (m - 1) * tau;
    let x = series.values();
    let mut coords = Vec::with_capacity(n * m);
    for i in 0..n {
        coords.extend((0..m).map(|k| x[i + k * tau]));
    }
    Ok(EmbeddedTrajectory { tau, dim: m, coords })
}

/// Largest pairwise distance between trajectory points.
pub fn phase_space_diameter(traj: &EmbeddedTrajectory, norm: Norm) -> f64 {
    let n = traj.len();
    let mut diameter: f64 = 0.0;
    for i in 0..n {
        let a = traj.point(i);
        for j in i + 1..n {
            diameter = diameter.max(norm.distance(a, traj.point(j)));
        }
    }
    diameter
}
