//! Matching one overhead vector set against one egocentric vector set.
//!
//! The depth surrogates of the two views live in different units, so a scale is
//! first estimated from pairs whose lateral coordinates nearly agree. The scaled
//! sets are then aligned by a monotonic dynamic-programming path through the
//! dissimilarity matrix, the path is pruned to a one-to-one matching, and the
//! matching is scored with a cost that rewards covering more subjects.

use crate::error::{Error, Result};
use crate::types::{Config, MatchResult, VectorSet, VectorVariant};

/// Row-major |top| x |hor| grid of non-negative dissimilarities.
#[derive(Clone, Debug, PartialEq)]
pub struct DissimilarityMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DissimilarityMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                values.push(f(i, j));
            }
        }
        Self { rows, cols, values }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged matrix");
        Self::from_fn(rows.len(), cols, |i, j| rows[i][j])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }
}

/// Monotonic path from the first cell to the last, with its summed dissimilarity.
#[derive(Clone, Debug, PartialEq)]
pub struct Alignment {
    pub path: Vec<(usize, usize)>,
    pub total: f64,
}

/// Scale that maps overhead depths onto egocentric inverse heights.
///
/// Every overhead entry is paired with the egocentric entry nearest in x; pairs
/// closer than `x_threshold` are inliers and the scale is the mean of their
/// `y_hor / y_top` ratios.
pub fn estimate_scale(vt: &VectorSet, vh: &VectorSet, x_threshold: f64) -> Result<f64> {
    let hor = vh.entries();
    let mut sum = 0.0;
    let mut count = 0usize;
    for t in vt.entries() {
        let nearest = hor
            .iter()
            .min_by(|a, b| (a.x - t.x).abs().total_cmp(&(b.x - t.x).abs()));
        if let Some(h) = nearest {
            if (h.x - t.x).abs() < x_threshold {
                sum += h.y / t.y;
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(Error::NoInliers);
    }
    Ok(sum / count as f64)
}

pub fn build_dissimilarity(
    vt: &VectorSet,
    vh: &VectorSet,
    mu: f64,
    lambda: f64,
) -> DissimilarityMatrix {
    Comparable::scaled(vt, vh, mu, lambda).dissimilarity()
}

/// Minimum-total monotonic path using unit steps down, right and diagonal.
///
/// Equal totals prefer the diagonal predecessor, then the one above, then the one
/// to the left.
pub fn dp_align(d: &DissimilarityMatrix) -> Result<Alignment> {
    let (rows, cols) = (d.rows(), d.cols());
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyMatrix);
    }
    let mut acc = vec![f64::INFINITY; rows * cols];
    let idx = |i: usize, j: usize| i * cols + j;
    acc[0] = d.get(0, 0);
    for i in 0..rows {
        for j in 0..cols {
            if i == 0 && j == 0 {
                continue;
            }
            let best = predecessor(&acc, cols, i, j).map_or(f64::INFINITY, |(pi, pj)| acc[idx(pi, pj)]);
            acc[idx(i, j)] = best + d.get(i, j);
        }
    }

    let mut path = Vec::with_capacity(rows + cols);
    let (mut i, mut j) = (rows - 1, cols - 1);
    path.push((i, j));
    while let Some((pi, pj)) = predecessor(&acc, cols, i, j) {
        path.push((pi, pj));
        (i, j) = (pi, pj);
    }
    path.reverse();
    Ok(Alignment {
        path,
        total: acc[idx(rows - 1, cols - 1)],
    })
}

fn predecessor(acc: &[f64], cols: usize, i: usize, j: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    let candidates = [
        (i > 0 && j > 0).then(|| (i - 1, j - 1)),
        (i > 0).then(|| (i - 1, j)),
        (j > 0).then(|| (i, j - 1)),
    ];
    for (pi, pj) in candidates.into_iter().flatten() {
        let v = acc[pi * cols + pj];
        match best {
            Some((bi, bj)) if acc[bi * cols + bj] <= v => {}
            _ => best = Some((pi, pj)),
        }
    }
    best
}

/// Reduce an alignment path to a one-to-one matching.
///
/// First every overhead index keeps only its lowest-dissimilarity partner, then
/// every egocentric index does the same among the survivors. Ties keep the cell
/// that comes first along the path.
pub fn prune_one_to_one(path: &[(usize, usize)], d: &DissimilarityMatrix) -> Vec<(usize, usize)> {
    let keep_best_by = |cells: &[(usize, usize)], key: fn(&(usize, usize)) -> usize| {
        let mut out: Vec<(usize, usize)> = Vec::with_capacity(cells.len());
        for &cell in cells {
            match out.iter_mut().find(|c| key(c) == key(&cell)) {
                Some(existing) => {
                    if d.get(cell.0, cell.1) < d.get(existing.0, existing.1) {
                        *existing = cell;
                    }
                }
                None => out.push(cell),
            }
        }
        out
    };
    let by_top = keep_best_by(path, |c| c.0);
    let mut pairs = keep_best_by(&by_top, |c| c.1);
    pairs.sort_unstable();
    pairs
}

/// Matching cost of index pairs under scale `mu`.
///
/// `(1 / gamma) * rho^(L / gamma) * (lambda * sum|dx| + sum|mu * y_top - y_hor|)`
/// with `L = max(|top|, |hor|)`. Empty pairs cost infinity.
pub fn matching_cost(
    pairs: &[(usize, usize)],
    vt: &VectorSet,
    vh: &VectorSet,
    mu: f64,
    cfg: &Config,
) -> f64 {
    Comparable::scaled(vt, vh, mu, cfg.lambda).cost(pairs, cfg.rho)
}

/// The cost formula on already-summed residuals.
pub fn cost_from_residuals(
    gamma: usize,
    longest: usize,
    weighted_x_residual: f64,
    y_residual: f64,
    rho: f64,
) -> f64 {
    if gamma == 0 {
        return f64::INFINITY;
    }
    let g = gamma as f64;
    (1.0 / g) * rho.powf(longest as f64 / g) * (weighted_x_residual + y_residual)
}

/// Weight on `|dx|` when depth is min-max scaled to [0, 1]. `lambda` is tuned for
/// depth in inverse-pixel units and would leave x with almost no say here.
pub const NAIVE_X_WEIGHT: f64 = 1.0;

/// Full matching of one hypothesis. Infeasible hypotheses (no overhead entries,
/// no egocentric entries, or no scale inliers) get infinite cost.
pub fn match_vectors(vt: &VectorSet, vh: &VectorSet, cfg: &Config) -> MatchResult {
    if vt.is_empty() || vh.is_empty() {
        return MatchResult::unmatched();
    }
    let (cmp, mu) = match cfg.variant {
        VectorVariant::Full => match estimate_scale(vt, vh, cfg.ransac_x_threshold) {
            Ok(mu) => (Comparable::scaled(vt, vh, mu, cfg.lambda), mu),
            Err(_) => return MatchResult::unmatched(),
        },
        VectorVariant::XOnly => (Comparable::x_only(vt, vh, cfg.lambda), 1.0),
        VectorVariant::YOnlyNaive => (Comparable::naive(vt, vh, 0.0), 1.0),
        VectorVariant::XyNaive => (Comparable::naive(vt, vh, NAIVE_X_WEIGHT), 1.0),
    };
    let d = cmp.dissimilarity();
    let Ok(alignment) = dp_align(&d) else {
        return MatchResult::unmatched();
    };
    let pairs = prune_one_to_one(&alignment.path, &d);
    let cost = cmp.cost(&pairs, cfg.rho);
    let (te, he) = (vt.entries(), vh.entries());
    MatchResult {
        pairs: pairs
            .iter()
            .map(|&(i, j)| (te[i].source_id, he[j].source_id))
            .collect(),
        mu,
        cost,
    }
}

/// Both views reduced to directly comparable lateral and depth values.
struct Comparable {
    x_weight: f64,
    top_x: Vec<f64>,
    hor_x: Vec<f64>,
    top_y: Vec<f64>,
    hor_y: Vec<f64>,
}

impl Comparable {
    fn scaled(vt: &VectorSet, vh: &VectorSet, mu: f64, lambda: f64) -> Self {
        Self {
            x_weight: lambda,
            top_x: vt.xs().collect(),
            hor_x: vh.xs().collect(),
            top_y: vt.ys().map(|y| mu * y).collect(),
            hor_y: vh.ys().collect(),
        }
    }

    fn x_only(vt: &VectorSet, vh: &VectorSet, lambda: f64) -> Self {
        Self {
            x_weight: lambda,
            top_x: vt.xs().collect(),
            hor_x: vh.xs().collect(),
            top_y: vec![0.0; vt.len()],
            hor_y: vec![0.0; vh.len()],
        }
    }

    fn naive(vt: &VectorSet, vh: &VectorSet, lambda: f64) -> Self {
        Self {
            x_weight: lambda,
            top_x: vt.xs().collect(),
            hor_x: vh.xs().collect(),
            top_y: min_max(vt.ys()),
            hor_y: min_max(vh.ys()),
        }
    }

    fn dx(&self, i: usize, j: usize) -> f64 {
        (self.top_x[i] - self.hor_x[j]).abs()
    }

    fn dy(&self, i: usize, j: usize) -> f64 {
        (self.top_y[i] - self.hor_y[j]).abs()
    }

    fn dissimilarity(&self) -> DissimilarityMatrix {
        DissimilarityMatrix::from_fn(self.top_x.len(), self.hor_x.len(), |i, j| {
            self.x_weight * self.dx(i, j) + self.dy(i, j)
        })
    }

    fn cost(&self, pairs: &[(usize, usize)], rho: f64) -> f64 {
        let x_res: f64 = pairs.iter().map(|&(i, j)| self.dx(i, j)).sum();
        let y_res: f64 = pairs.iter().map(|&(i, j)| self.dy(i, j)).sum();
        let longest = self.top_x.len().max(self.hor_x.len());
        cost_from_residuals(pairs.len(), longest, self.x_weight * x_res, y_res, rho)
    }
}

fn min_max(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let v: Vec<f64> = values.collect();
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    v.iter()
        .map(|&y| if span > 0.0 { (y - lo) / span } else { 0.0 })
        .collect()
}
