//! Exact empirical Wasserstein-1 distances between equal-size samples,
//! bootstrap confidence intervals, and log-log rate fits.

use rand::Rng as _;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mc;
use crate::sampler::{Sampler, StandardNormal};

/// Uniformly weighted point cloud in `R^d` (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    dim: usize,
    points: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn new(dim: usize, points: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if points.is_empty() || !points.len().is_multiple_of(dim) {
            return Err(Error::InvalidArgument(format!(
                "need a positive multiple of {dim} coordinates, got {}",
                points.len()
            )));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("points must be finite".into()));
        }
        Ok(EmpiricalMeasure { dim, points })
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidArgument("points have differing dimensions".into()));
        }
        Self::new(dim, points.concat())
    }

    /// `m` draws from `sampler`.
    pub fn sample<S: Sampler + ?Sized>(sampler: &S, m: usize, rng: &mut mc::Rng) -> Result<Self> {
        let d = sampler.dim();
        let mut points = vec![0.0; m * d];
        for p in points.chunks_mut(d) {
            sampler.sample(rng, p);
        }
        Self::new(d, points)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Copy translated by `v`.
    pub fn shifted(&self, v: &[f64]) -> Result<Self> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        let points = self
            .points
            .iter()
            .enumerate()
            .map(|(k, p)| p + v[k % self.dim])
            .collect();
        Self::new(self.dim, points)
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn check_pair(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> Result<()> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            got: b.dim,
        });
    }
    if a.len() != b.len() {
        return Err(Error::SizeMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

/// Optimal matching `row -> column` and its mean cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub columns: Vec<usize>,
    pub mean_cost: f64,
}

/// Exact `W₁` between two equal-size empirical measures.
pub fn w1_exact(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> Result<f64> {
    Ok(assignment(a, b)?.mean_cost)
}

/// Minimum-cost perfect matching under Euclidean costs. On the line the
/// sorted matching is optimal; otherwise a dense Jonker–Volgenant solver is
/// used.
pub fn assignment(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> Result<Assignment> {
    check_pair(a, b)?;
    let m = a.len();
    let columns = if a.dim == 1 {
        let order = |pts: &[f64]| {
            let mut idx: Vec<usize> = (0..pts.len()).collect();
            idx.sort_by(|&i, &j| pts[i].total_cmp(&pts[j]).then(i.cmp(&j)));
            idx
        };
        let (ra, rb) = (order(&a.points), order(&b.points));
        let mut cols = vec![0; m];
        for (i, j) in ra.into_iter().zip(rb) {
            cols[i] = j;
        }
        cols
    } else {
        let mut cost = vec![0.0; m * m];
        cost.par_chunks_mut(m).enumerate().for_each(|(i, row)| {
            let p = a.point(i);
            for (j, c) in row.iter_mut().enumerate() {
                *c = dist(p, b.point(j));
            }
        });
        lapjv(m, &cost)
    };
    // sum in row order so the value does not depend on the solver path
    let total: f64 = (0..m).map(|i| dist(a.point(i), b.point(columns[i]))).sum();
    Ok(Assignment {
        columns,
        mean_cost: total / m as f64,
    })
}

/// Dense linear assignment (Jonker & Volgenant, 1987) on a row-major
/// `n × n` cost matrix. Returns the column assigned to each row.
///
/// Column reduction and reduction transfer initialize the duals; every row
/// left free is then assigned by a shortest augmenting path. The augmenting
/// row reduction pass is omitted: with real-valued costs it can cycle on
/// vanishing price decrements and dominate the running time.
// The scan loops advance `hi` while iterating from its value at loop entry.
#[allow(clippy::mut_range_bound)]
pub fn lapjv(n: usize, cost: &[f64]) -> Vec<usize> {
    assert_eq!(cost.len(), n * n, "cost matrix must be n x n");
    if n == 0 {
        return vec![];
    }
    if n == 1 {
        return vec![0];
    }
    let c = |i: usize, j: usize| cost[i * n + j];
    const NONE: usize = usize::MAX;
    let mut x = vec![NONE; n]; // row -> column
    let mut y = vec![NONE; n]; // column -> row
    let mut v = vec![f64::INFINITY; n];

    // column reduction
    for i in 0..n {
        for j in 0..n {
            if c(i, j) < v[j] {
                v[j] = c(i, j);
                y[j] = i;
            }
        }
    }
    let mut unique = vec![true; n];
    for j in (0..n).rev() {
        let i = y[j];
        if x[i] == NONE {
            x[i] = j;
        } else {
            unique[i] = false;
            y[j] = NONE;
        }
    }
    // reduction transfer
    let mut free: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        if x[i] == NONE {
            free.push(i);
        } else if unique[i] {
            let j = x[i];
            let mut min = f64::INFINITY;
            for (j2, &vj) in v.iter().enumerate() {
                if j2 != j {
                    min = min.min(c(i, j2) - vj);
                }
            }
            v[j] -= min;
        }
    }

    // shortest augmenting paths for the remaining rows
    let mut d = vec![0.0; n];
    let mut pred = vec![0usize; n];
    let mut cols: Vec<usize> = (0..n).collect();
    for &start in &free {
        for (k, col) in cols.iter_mut().enumerate() {
            *col = k;
        }
        for j in 0..n {
            d[j] = c(start, j) - v[j];
            pred[j] = start;
        }
        let (mut lo, mut hi) = (0usize, 0usize);
        let mut n_ready = 0usize;
        let mut final_j = NONE;
        while final_j == NONE {
            if lo == hi {
                n_ready = lo;
                // collect the columns at the minimum distance
                hi = lo + 1;
                let mut mind = d[cols[lo]];
                for k in hi..n {
                    let j = cols[k];
                    if d[j] <= mind {
                        if d[j] < mind {
                            hi = lo;
                            mind = d[j];
                        }
                        cols[k] = cols[hi];
                        cols[hi] = j;
                        hi += 1;
                    }
                }
                for &j in &cols[lo..hi] {
                    if y[j] == NONE {
                        final_j = j;
                        break;
                    }
                }
            }
            if final_j == NONE {
                // scan; on success the ready/scan boundaries stay where they were
                let (mut l, mut h_) = (lo, hi);
                'scan: while l != h_ {
                    let j = cols[l];
                    l += 1;
                    let i = y[j];
                    let mind = d[j];
                    let h = c(i, j) - v[j] - mind;
                    for k in h_..n {
                        let j = cols[k];
                        let red = c(i, j) - v[j] - h;
                        if red < d[j] {
                            d[j] = red;
                            pred[j] = i;
                            if red == mind {
                                if y[j] == NONE {
                                    final_j = j;
                                    break 'scan;
                                }
                                cols[k] = cols[h_];
                                cols[h_] = j;
                                h_ += 1;
                            }
                        }
                    }
                }
                if final_j == NONE {
                    lo = l;
                    hi = h_;
                }
            }
        }
        let mind = d[cols[lo]];
        for &j in &cols[..n_ready] {
            v[j] += d[j] - mind;
        }
        // augment
        let mut j = final_j;
        loop {
            let i = pred[j];
            y[j] = i;
            let prev = x[i];
            x[i] = j;
            if i == start {
                break;
            }
            j = prev;
        }
    }
    x
}

/// Mean of replicated exact `W₁` values with a percentile bootstrap interval.
#[derive(Debug, Clone, PartialEq)]
pub struct W1Estimate {
    pub value: f64,
    pub ci: (f64, f64),
    pub m: usize,
    pub replications: usize,
    pub samples: Vec<f64>,
}

impl W1Estimate {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci.1 - self.ci.0)
    }
}

/// Bootstrap resamples for the confidence interval.
pub const BOOTSTRAP_RESAMPLES: usize = 2000;

/// Compares `m` draws of `w_sampler` with `m` independent standard normal
/// draws, `replications` times; replications run in parallel, each on its
/// own seed-derived stream.
pub fn w1_estimate<S: Sampler + ?Sized>(w_sampler: &S, m: usize, replications: usize, seed: u64) -> Result<W1Estimate> {
    if m < 10 {
        return Err(Error::InvalidArgument(format!("need m >= 10, got {m}")));
    }
    if replications < 20 {
        return Err(Error::InvalidArgument(format!(
            "need at least 20 replications, got {replications}"
        )));
    }
    let z = StandardNormal { dim: w_sampler.dim() };
    let samples = (0..replications)
        .into_par_iter()
        .map(|r| {
            let mut rw = mc::rng(mc::mix_seed(seed, 2 * r as u64));
            let mut rz = mc::rng(mc::mix_seed(seed, 2 * r as u64 + 1));
            let a = EmpiricalMeasure::sample(w_sampler, m, &mut rw)?;
            let b = EmpiricalMeasure::sample(&z, m, &mut rz)?;
            w1_exact(&a, &b)
        })
        .collect::<Result<Vec<f64>>>()?;
    let value = samples.iter().sum::<f64>() / replications as f64;
    let (lo, hi) = bootstrap_ci(&samples, 0.95, BOOTSTRAP_RESAMPLES, mc::mix_seed(seed, u64::MAX));
    Ok(W1Estimate {
        value,
        ci: (lo.min(value), hi.max(value)),
        m,
        replications,
        samples,
    })
}

/// Percentile bootstrap interval for the mean.
pub fn bootstrap_ci(samples: &[f64], level: f64, resamples: usize, seed: u64) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mut rng = mc::rng(seed);
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| samples[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let alpha = 0.5 * (1.0 - level);
    let at = |q: f64| means[((q * resamples as f64).floor() as usize).min(resamples - 1)];
    (at(alpha), at(1.0 - alpha))
}

/// Empirical `W₁` between two independent standard normal samples of size `m`.
pub fn sampling_floor(dim: usize, m: usize, replications: usize, seed: u64) -> Result<W1Estimate> {
    w1_estimate(&StandardNormal { dim }, m, replications, seed)
}

/// Least-squares slope of `ln w` against `ln n`; needs at least 4 points with
/// strictly increasing `n` and positive values.
pub fn rate_fit(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "rate fit needs at least 4 points, got {}",
            points.len()
        )));
    }
    if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::InvalidArgument("n must be strictly increasing".into()));
    }
    log_log_slope(points)
}

/// Least-squares slope of `ln w` against `ln n` for any two or more points.
pub fn log_log_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument("a slope needs two points".into()));
    }
    if let Some((n, w)) = points.iter().find(|(n, w)| !(*n > 0.0 && *w > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "log-log fit needs positive values, got ({n}, {w})"
        )));
    }
    let k = points.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().map(|(n, w)| (n.ln(), w.ln())).unzip();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("n values must not all coincide".into()));
    }
    Ok(sxy / sxx)
}
