use super::{EmbedParams, EmbeddedTrajectory, Norm, RqaError};

/// Square boolean recurrence structure `R[i][j]`.
///
/// Matrices built by [`recurrence_matrix`] are symmetric and reflexive and
/// carry the parameters they were built with. [`RecurrenceMatrix::from_bits`]
/// accepts any square grid, which is how externally computed or synthetic
/// matrices are analysed.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceMatrix {
    n: usize,
    bits: Vec<bool>,
    params: Option<EmbedParams>,
}

impl RecurrenceMatrix {
    pub fn from_bits(n: usize, bits: Vec<bool>) -> Result<Self, RqaError> {
        if bits.len() != n * n {
            return Err(RqaError::InvalidParam(format!(
                "expected {} cells for a {n}x{n} matrix, got {}",
                n * n,
                bits.len()
            )));
        }
        Ok(RecurrenceMatrix {
            n,
            bits,
            params: None,
        })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                bits.push(f(i, j));
            }
        }
        RecurrenceMatrix {
            n,
            bits,
            params: None,
        }
    }

    /// The matrix of a constant trajectory.
    pub fn all_ones(n: usize) -> Self {
        RecurrenceMatrix {
            n,
            bits: vec![true; n * n],
            params: None,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.n + j]
    }

    pub fn params(&self) -> Option<&EmbedParams> {
        self.params.as_ref()
    }

    pub fn recurrence_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (i + 1..self.n).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.n).all(|i| self.get(i, i))
    }
}

/// `R[i][j] = 1` iff `||x_i - x_j|| <= epsilon`; the boundary counts as a
/// recurrence.
pub fn recurrence_matrix(traj: &EmbeddedTrajectory, epsilon: f64, norm: Norm) -> RecurrenceMatrix {
    let n = traj.len();
    let mut bits = vec![false; n * n];
    for i in 0..n {
        bits[i * n + i] = true;
        let a = traj.point(i);
        for j in i + 1..n {
            if norm.distance(a, traj.point(j)) <= epsilon {
                bits[i * n + j] = true;
                bits[j * n + i] = true;
            }
        }
    }
    RecurrenceMatrix {
        n,
        bits,
        params: Some(EmbedParams {
            tau: traj.tau(),
            m: traj.dim(),
            epsilon,
            norm,
            ..EmbedParams::default()
        }),
    }
}
