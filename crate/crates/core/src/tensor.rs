//! Dense symmetric tensors and their injective norm.
//!
//! A [`SymTensor`] of order `r` over `R^d` stores one value per multiset of
//! indices (canonical nondecreasing order), so it has `C(d + r - 1, r)` entries.
//! Reads with any permutation of an index resolve to the same slot.

use crate::error::{Error, Result};
use crate::mc;

/// Default number of random starts for [`SymTensor::injective_norm`].
pub const DEFAULT_RESTARTS: usize = 32;
/// Default stationarity tolerance (on the sphere gradient, relative to the tensor scale).
pub const DEFAULT_TOL: f64 = 1e-11;

const MAX_ASCENT_ITERS: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor {
    order: usize,
    dim: usize,
    entries: Vec<f64>,
}

/// A vector of Euclidean length one.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    pub const TOL: f64 = 1e-12;

    pub fn new(components: Vec<f64>) -> Result<Self> {
        let n = norm(&components);
        if (n - 1.0).abs() > Self::TOL {
            return Err(Error::InvalidArgument(format!(
                "unit vector has norm {n}, expected 1"
            )));
        }
        Ok(UnitVector(components))
    }

    /// Normalizes a nonzero vector.
    pub fn normalize(mut v: Vec<f64>) -> Result<Self> {
        let n = norm(&v);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidArgument(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        v.iter_mut().for_each(|x| *x /= n);
        Ok(UnitVector(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Number of nondecreasing sequences of length `len` with values in `lo..dim`.
fn multisets(dim: usize, lo: usize, len: usize) -> usize {
    if len == 0 {
        return 1;
    }
    if lo >= dim {
        return 0;
    }
    binomial(dim - lo + len - 1, len)
}

impl SymTensor {
    pub fn zeros(order: usize, dim: usize) -> Result<Self> {
        if order == 0 || dim == 0 {
            return Err(Error::InvalidArgument(format!(
                "tensor needs order >= 1 and dim >= 1, got order {order}, dim {dim}"
            )));
        }
        Ok(SymTensor {
            order,
            dim,
            entries: vec![0.0; multisets(dim, 0, order)],
        })
    }

    /// Builds a tensor by evaluating `f` at every canonical (nondecreasing) index.
    pub fn from_fn<F: FnMut(&[usize]) -> f64>(order: usize, dim: usize, mut f: F) -> Result<Self> {
        let mut t = Self::zeros(order, dim)?;
        let mut idx = vec![0usize; order];
        for slot in 0..t.entries.len() {
            t.entries[slot] = f(&idx);
            advance(&mut idx, dim);
        }
        Ok(t)
    }

    /// Identity 2-tensor `sum_i e_i (x) e_i`.
    pub fn identity(dim: usize) -> Result<Self> {
        Self::from_fn(2, dim, |i| if i[0] == i[1] { 1.0 } else { 0.0 })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Raw canonical storage, in lexicographic order of nondecreasing indices.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [f64] {
        &mut self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn slot(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.order);
        let mut sorted = index.to_vec();
        sorted.sort_unstable();
        let mut rank = 0;
        let mut prev = 0;
        for (k, &i) in sorted.iter().enumerate() {
            let rest = self.order - k - 1;
            for v in prev..i {
                rank += multisets(self.dim, v, rest);
            }
            prev = i;
        }
        rank
    }

    /// Entry at an arbitrary (not necessarily sorted) multi-index.
    pub fn get(&self, index: &[usize]) -> f64 {
        assert_eq!(index.len(), self.order, "index length must equal tensor order");
        assert!(index.iter().all(|&i| i < self.dim), "index out of range");
        self.entries[self.slot(index)]
    }

    pub fn set(&mut self, index: &[usize], value: f64) {
        assert_eq!(index.len(), self.order, "index length must equal tensor order");
        assert!(index.iter().all(|&i| i < self.dim), "index out of range");
        let s = self.slot(index);
        self.entries[s] = value;
    }

    /// Iterates canonical indices together with their multiplicity
    /// (number of distinct permutations) and stored value.
    pub fn canonical(&self) -> impl Iterator<Item = (Vec<usize>, f64, f64)> + '_ {
        let mut idx = vec![0usize; self.order];
        self.entries.iter().map(move |&v| {
            let cur = idx.clone();
            advance(&mut idx, self.dim);
            let m = multiplicity(&cur);
            (cur, m, v)
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        SymTensor {
            order: self.order,
            dim: self.dim,
            entries: self.entries.iter().map(|x| c * x).collect(),
        }
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        if self.order != other.order {
            return Err(Error::InvalidArgument(format!(
                "tensor order mismatch: {} vs {}",
                self.order, other.order
            )));
        }
        Ok(())
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(SymTensor {
            order: self.order,
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + c * b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(1.0, other)
    }

    /// Largest absolute entry difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Trace over the first two slots (for order 2, the matrix trace).
    pub fn trace2(&self) -> f64 {
        assert_eq!(self.order, 2, "trace2 needs an order-2 tensor");
        (0..self.dim).map(|i| self.get(&[i, i])).sum()
    }

    /// Pairing with the pure power `v^{(x) r}`.
    pub fn apply_pure(&self, v: &UnitVector) -> Result<f64> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.dim(),
            });
        }
        Ok(self.pure_form(v.as_slice()))
    }

    /// Pairing with `v^{(x) r}` for an arbitrary (not necessarily unit) vector.
    pub fn pure_form(&self, v: &[f64]) -> f64 {
        self.canonical()
            .map(|(idx, m, t)| m * t * idx.iter().map(|&i| v[i]).product::<f64>())
            .sum()
    }

    /// Gradient of `v -> pure_form(v)`.
    fn pure_form_gradient(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|g| *g = 0.0);
        for (idx, m, t) in self.canonical() {
            if t == 0.0 {
                continue;
            }
            for k in 0..idx.len() {
                let others: f64 = idx
                    .iter()
                    .enumerate()
                    .filter(|&(l, _)| l != k)
                    .map(|(_, &i)| v[i])
                    .product();
                out[idx[k]] += m * t * others;
            }
        }
    }

    /// Contraction with `v^{(x)(r-1)}`: the vector `w` with `<w, u> = <T, v^{r-1} (x) u>`.
    pub fn contract_all_but_one(&self, v: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        self.pure_form_gradient(v, &mut g);
        let r = self.order as f64;
        g.iter_mut().for_each(|x| *x /= r);
        g
    }

    /// `u^{(x) r}`.
    pub fn tensor_power(u: &[f64], order: usize) -> Result<Self> {
        Self::from_fn(order, u.len(), |idx| idx.iter().map(|&i| u[i]).product())
    }

    /// Injective norm with default restarts and tolerance, seeded deterministically.
    pub fn injective_norm_default(&self) -> f64 {
        self.injective_norm(DEFAULT_RESTARTS, DEFAULT_TOL, 0x5EED)
    }

    /// Injective norm `sup_{|v| = 1} |<T, v^{(x) r}>|` of a symmetric tensor,
    /// by projected gradient ascent on the sphere from `restarts` random starts
    /// (each run for both signs of the form), with backtracking line search.
    ///
    /// The result is the value of the form at an actual unit vector, hence a
    /// lower bound of the true norm.
    pub fn injective_norm(&self, restarts: usize, tol: f64, seed: u64) -> f64 {
        let d = self.dim;
        let scale = self.entries.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        if d == 1 {
            return self.entries[0].abs();
        }
        if self.order == 1 {
            // Dual of the Euclidean norm.
            return norm(&self.entries);
        }
        let form = PureForm::new(&self.scaled(1.0 / scale));
        let mut best = 0.0f64;
        let mut rng = mc::rng(seed);
        let mut start = vec![0.0; d];
        let mut candidates: Vec<Vec<f64>> = (0..d)
            .map(|i| {
                let mut e = vec![0.0; d];
                e[i] = 1.0;
                e
            })
            .collect();
        for _ in 0..restarts.max(1) {
            loop {
                mc::fill_normal(&mut rng, &mut start);
                if norm(&start) > 1e-8 {
                    break;
                }
            }
            let n = norm(&start);
            candidates.push(start.iter().map(|x| x / n).collect());
        }
        for v0 in &candidates {
            for sign in [1.0, -1.0] {
                best = best.max(form.ascend(v0, sign, tol));
            }
        }
        best * scale
    }
}

/// `v -> <T, v^{(x) r}>` as a flat list of (index, multiplicity * value) terms.
struct PureForm {
    dim: usize,
    terms: Vec<(Vec<usize>, f64)>,
}

impl PureForm {
    fn new(t: &SymTensor) -> Self {
        PureForm {
            dim: t.dim,
            terms: t
                .canonical()
                .filter(|(_, _, v)| *v != 0.0)
                .map(|(idx, m, v)| (idx, m * v))
                .collect(),
        }
    }

    fn value(&self, v: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(idx, c)| c * idx.iter().map(|&i| v[i]).product::<f64>())
            .sum()
    }

    fn gradient(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|g| *g = 0.0);
        for (idx, c) in &self.terms {
            for k in 0..idx.len() {
                let others: f64 = idx
                    .iter()
                    .enumerate()
                    .filter(|&(l, _)| l != k)
                    .map(|(_, &i)| v[i])
                    .product();
                out[idx[k]] += c * others;
            }
        }
    }

    /// Maximizes `sign * form(v)` over the sphere starting from unit `v0`;
    /// returns `|form|` at the final point. Stops at a projected gradient
    /// below `tol` or once no step improves the value in floating point.
    fn ascend(&self, v0: &[f64], sign: f64, tol: f64) -> f64 {
        let d = self.dim;
        let mut v = v0.to_vec();
        let mut g = vec![0.0; d];
        let mut trial = vec![0.0; d];
        let mut f = sign * self.value(&v);
        let mut step: f64 = 1.0;
        for _ in 0..MAX_ASCENT_ITERS {
            self.gradient(&v, &mut g);
            g.iter_mut().for_each(|x| *x *= sign);
            let radial = dot(&g, &v);
            g.iter_mut().zip(&v).for_each(|(gi, vi)| *gi -= radial * vi);
            let gnorm = norm(&g);
            if gnorm <= tol {
                break;
            }
            let mut accepted = false;
            step = (step * 2.0).min(1e3);
            while step > 1e-18 {
                for k in 0..d {
                    trial[k] = v[k] + step * g[k];
                }
                let tn = norm(&trial);
                trial.iter_mut().for_each(|x| *x /= tn);
                let ft = sign * self.value(&trial);
                // strict: at roundoff level the Armijo margin vanishes
                if ft > f && ft >= f + 1e-4 * step * gnorm * gnorm {
                    v.copy_from_slice(&trial);
                    f = ft;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        self.value(&v).abs()
    }
}

fn advance(idx: &mut [usize], dim: usize) {
    // Next nondecreasing sequence in lexicographic order.
    let r = idx.len();
    let mut k = r;
    while k > 0 {
        k -= 1;
        if idx[k] + 1 < dim {
            let v = idx[k] + 1;
            for slot in idx.iter_mut().skip(k) {
                *slot = v;
            }
            return;
        }
    }
}

fn multiplicity(idx: &[usize]) -> f64 {
    let r = idx.len();
    let mut m = factorial(r);
    let mut run = 1;
    for k in 1..=r {
        if k < r && idx[k] == idx[k - 1] {
            run += 1;
        } else {
            m /= factorial(run);
            run = 1;
        }
    }
    m as f64
}

fn factorial(n: usize) -> usize {
    (1..=n).product::<usize>().max(1)
}
