#![allow(clippy::needless_range_loop)]

//! Brute-force reference for the recurrence measures. Every line is found
//! by locating its first cell and walking to its end; nothing is shared with
//! the histogram code under test.

use std::collections::BTreeMap;

use rand::Rng;

pub struct Grid {
    pub n: usize,
    pub cells: Vec<Vec<bool>>,
}

impl Grid {
    fn at(&self, i: usize, j: usize) -> bool {
        self.cells[i][j]
    }
}

pub struct Reference {
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

impl Reference {
    pub fn as_array(&self) -> [f64; 9] {
        [
            self.rr, self.det, self.l_max, self.l_mean, self.l_entr, self.tt, self.v_entr, self.t2, self.w_entr,
        ]
    }
}

fn entropy(lengths: &[usize]) -> f64 {
    if lengths.is_empty() {
        return 0.0;
    }
    let mut freq: BTreeMap<usize, usize> = BTreeMap::new();
    for &l in lengths {
        *freq.entry(l).or_default() += 1;
    }
    let n = lengths.len() as f64;
    freq.values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

fn mean(lengths: &[usize]) -> f64 {
    if lengths.is_empty() {
        0.0
    } else {
        lengths.iter().sum::<usize>() as f64 / lengths.len() as f64
    }
}

pub fn measures(g: &Grid, l_min: usize, v_min: usize, theiler: usize) -> Reference {
    let n = g.n;
    let w = theiler.max(1);
    let mut ones = 0usize;
    let mut diag_cells = 0usize;
    let mut diag = Vec::new();
    let mut vert = Vec::new();
    let mut white = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if g.at(i, j) {
                ones += 1;
            }
            let off = i.abs_diff(j);
            if off >= w && g.at(i, j) {
                diag_cells += 1;
                if i == 0 || j == 0 || !g.at(i - 1, j - 1) {
                    let mut len = 0;
                    while i + len < n && j + len < n && g.at(i + len, j + len) {
                        len += 1;
                    }
                    diag.push(len);
                }
            }
            // column j, row i
            if g.at(i, j) && (i == 0 || !g.at(i - 1, j)) {
                let mut len = 0;
                while i + len < n && g.at(i + len, j) {
                    len += 1;
                }
                vert.push(len);
            }
            if !g.at(i, j) && i > 0 && g.at(i - 1, j) {
                let mut len = 0;
                while i + len < n && !g.at(i + len, j) {
                    len += 1;
                }
                if i + len < n {
                    white.push(len);
                }
            }
        }
    }
    let long_diag: Vec<usize> = diag.iter().copied().filter(|&l| l >= l_min).collect();
    let long_vert: Vec<usize> = vert.iter().copied().filter(|&l| l >= v_min).collect();
    Reference {
        rr: ones as f64 / (n * n) as f64,
        det: if diag_cells == 0 {
            0.0
        } else {
            long_diag.iter().sum::<usize>() as f64 / diag_cells as f64
        },
        l_max: diag.iter().copied().max().unwrap_or(0) as f64,
        l_mean: mean(&long_diag),
        l_entr: entropy(&long_diag),
        tt: mean(&long_vert),
        v_entr: entropy(&long_vert),
        t2: mean(&white),
        w_entr: entropy(&white),
    }
}

/// Z-normalize, embed and threshold (euclidean, inclusive) a series, then
/// measure it. A constant series is the all-ones matrix with determinism 1.
pub fn series_measures(x: &[f64], tau: usize, m: usize, eps: f64) -> Reference {
    let n_s = x.len() as f64;
    let mu = x.iter().sum::<f64>() / n_s;
    let sd = (x.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n_s).sqrt();
    let constant = x.iter().all(|&v| v == x[0]);
    let z: Vec<f64> = x.iter().map(|v| if constant { 0.0 } else { (v - mu) / sd }).collect();
    let n = x.len() - (m - 1) * tau;
    let mut cells = vec![vec![false; n]; n];
    for (i, row) in cells.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let d2: f64 = (0..m).map(|k| (z[i + k * tau] - z[j + k * tau]).powi(2)).sum();
            *cell = d2.sqrt() <= eps;
        }
    }
    let mut r = measures(&Grid { n, cells }, 2, 2, 1);
    if constant {
        r.det = 1.0;
    }
    r
}

pub fn random_grid(rng: &mut impl Rng, n: usize, density: f64) -> Grid {
    let mut cells = vec![vec![false; n]; n];
    for i in 0..n {
        cells[i][i] = true;
        for j in i + 1..n {
            let b = rng.gen_bool(density);
            cells[i][j] = b;
            cells[j][i] = b;
        }
    }
    Grid { n, cells }
}

/// Compare nine values: lengths exactly, ratios and entropies to 1e-12.
pub fn mismatch(got: [f64; 9], want: [f64; 9]) -> Option<String> {
    const NAMES: [&str; 9] = ["rr", "det", "l_max", "l_mean", "l_entr", "tt", "v_entr", "t2", "w_entr"];
    for k in 0..9 {
        let ok = if k == 2 { got[k] == want[k] } else { (got[k] - want[k]).abs() <= 1e-12 };
        if !ok {
            return Some(format!("{}: got {} want {}", NAMES[k], got[k], want[k]));
        }
    }
    None
}
