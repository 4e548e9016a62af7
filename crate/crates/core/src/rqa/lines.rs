use std::collections::BTreeMap;

use serde::Serialize;

use super::RecurrenceMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LineKind {
    Diagonal,
    Vertical,
    WhiteVertical,
}

/// Multiplicity of each observed line length.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LineHistogram {
    pub kind: LineKind,
    pub counts: BTreeMap<usize, usize>,
}

impl LineHistogram {
    fn new(kind: LineKind) -> Self {
        LineHistogram {
            kind,
            counts: BTreeMap::new(),
        }
    }

    fn record(&mut self, length: usize) {
        if length > 0 {
            *self.counts.entry(length).or_insert(0) += 1;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn max_length(&self) -> Option<usize> {
        self.counts.keys().next_back().copied()
    }

    /// `(sum of P(l), sum of l * P(l))` over lengths `>= min_len`.
    pub fn totals(&self, min_len: usize) -> (usize, usize) {
        self.counts
            .range(min_len..)
            .fold((0, 0), |(lines, points), (&l, &c)| (lines + c, points + l * c))
    }

    /// Shannon entropy (nats) of the length distribution restricted to
    /// lengths `>= min_len`.
    pub fn entropy(&self, min_len: usize) -> f64 {
        let (total, _) = self.totals(min_len);
        if total == 0 {
            return 0.0;
        }
        let total = total as f64;
        self.counts
            .range(min_len..)
            .map(|(_, &c)| {
                let p = c as f64 / total;
                -p * p.ln()
            })
            .sum()
    }

    /// Mean length over lengths `>= min_len`, zero when no line qualifies.
    pub fn mean_length(&self, min_len: usize) -> f64 {
        let (lines, points) = self.totals(min_len);
        if lines == 0 {
            0.0
        } else {
            points as f64 / lines as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LineHistograms {
    pub diagonal: LineHistogram,
    pub vertical: LineHistogram,
    pub white: LineHistogram,
}

/// Run-length histograms of the three line structures.
///
/// Diagonal lines are maximal runs of recurrences along diagonals with
/// `|i - j| >= max(theiler, 1)`, scanned in both triangles. Vertical lines are
/// runs of recurrences within each column of the full matrix. White vertical
/// lines are runs of non-recurrences within each column; runs touching the
/// first or last row are censored and not counted.
pub fn line_histograms(rm: &RecurrenceMatrix, theiler: usize) -> LineHistograms {
    let n = rm.n();
    let mut diagonal = LineHistogram::new(LineKind::Diagonal);
    let mut vertical = LineHistogram::new(LineKind::Vertical);
    let mut white = LineHistogram::new(LineKind::WhiteVertical);

    for offset in theiler.max(1)..n {
        let (mut upper, mut lower) = (0, 0);
        for i in 0..n - offset {
            if rm.get(i, i + offset) {
                upper += 1;
            } else {
                diagonal.record(upper);
                upper = 0;
            }
            if rm.get(i + offset, i) {
                lower += 1;
            } else {
                diagonal.record(lower);
                lower = 0;
            }
        }
        diagonal.record(upper);
        diagonal.record(lower);
    }

    for j in 0..n {
        let mut black = 0;
        let mut gap = 0;
        // a white run is censored until a recurrence has been seen above it
        let mut opened = false;
        for i in 0..n {
            if rm.get(i, j) {
                if opened {
                    white.record(gap);
                }
                gap = 0;
                opened = true;
                black += 1;
            } else {
                vertical.record(black);
                black = 0;
                gap += 1;
            }
        }
        vertical.record(black);
    }

    LineHistograms {
        diagonal,
        vertical,
        white,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hist(pairs: &[(usize, usize)]) -> BTreeMap<usize, usize> {
        pairs.iter().copied().collect()
    }

    #[test]
    fn all_ones_five() {
        let h = line_histograms(&RecurrenceMatrix::all_ones(5), 1);
        assert_eq!(h.diagonal.counts, hist(&[(4, 2), (3, 2), (2, 2), (1, 2)]));
        assert_eq!(h.vertical.counts, hist(&[(5, 5)]));
        assert!(h.white.is_empty());
    }

    #[test]
    fn identity_only() {
        let n = 6;
        let h = line_histograms(&RecurrenceMatrix::from_fn(n, |i, j| i == j), 1);
        assert!(h.diagonal.is_empty());
        assert_eq!(h.vertical.counts, hist(&[(1, n)]));
        assert!(h.white.is_empty());
    }

    #[test]
    fn theiler_window_drops_near_diagonals() {
        let h = line_histograms(&RecurrenceMatrix::all_ones(5), 3);
        assert_eq!(h.diagonal.counts, hist(&[(2, 2), (1, 2)]));
    }

    #[test]
    fn interior_white_run_counted() {
        // column 0: 1 0 0 1 -> one white run of 2
        let rm = RecurrenceMatrix::from_fn(4, |i, j| j != 0 || i == 0 || i == 3);
        let h = line_histograms(&rm, 1);
        assert_eq!(h.white.counts, hist(&[(2, 1)]));
    }

    #[test]
    fn entropy_of_uniform_lengths() {
        let h = line_histograms(&RecurrenceMatrix::all_ones(10), 1);
        // lengths 2..=9, two lines each
        assert!((h.diagonal.entropy(2) - (8f64).ln()).abs() < 1e-12);
    }
}
