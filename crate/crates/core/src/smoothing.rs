//! Gaussian smoothing `N_ε f(x) = E f(x + εZ)`, its derivatives through
//! Hermite weights, the constants `c_s = ∫ |φ^{(s)}|`, and empirical `M_r`
//! seminorms.

use std::f64::consts::{E, PI};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::function::{derivative, TestFunction};
use crate::mc::{self, McEstimate, Welford};
use crate::quadrature;
use crate::tensor::{norm, SymTensor};

/// Default draws for scalar smoothing.
pub const DEFAULT_MC_N: usize = 200_000;
/// Default draws for derivative tensors.
pub const DEFAULT_MC_N_DERIVATIVE: usize = 500_000;
/// Half-width of the integration window for `c_s`.
pub const CS_WINDOW: f64 = 12.0;

/// `c_0..c_3` in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingConstants {
    pub c: [f64; 4],
}

impl SmoothingConstants {
    pub fn closed_form() -> Self {
        let s2pi = (2.0 * PI).sqrt();
        SmoothingConstants {
            c: [
                1.0,
                2.0 / s2pi,
                4.0 / (2.0 * PI * E).sqrt(),
                (2.0 + 8.0 * (-1.5f64).exp()) / s2pi,
            ],
        }
    }

    pub fn get(&self, s: usize) -> Result<f64> {
        self.c
            .get(s)
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("c_s is tabulated for s in 0..=3, got {s}")))
    }
}

impl Default for SmoothingConstants {
    fn default() -> Self {
        Self::closed_form()
    }
}

/// Closed-form `c_s`, `0 <= s <= 3`.
pub fn constants_c(s: usize) -> Result<f64> {
    SmoothingConstants::closed_form().get(s)
}

/// Probabilists' Hermite polynomial `He_n(z)`.
pub fn hermite(n: usize, z: f64) -> f64 {
    let mut h0 = 1.0;
    if n == 0 {
        return h0;
    }
    let mut h1 = z;
    for k in 1..n {
        let h2 = z * h1 - k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Real roots of `He_s` for `s <= 3`; the sign changes of `φ^{(s)}`.
fn hermite_roots(s: usize) -> Vec<f64> {
    match s {
        0 => vec![],
        1 => vec![0.0],
        2 => vec![-1.0, 1.0],
        _ => vec![-(3f64.sqrt()), 0.0, 3f64.sqrt()],
    }
}

/// `c_s` by adaptive Gauss–Legendre quadrature of `|He_s(z) φ(z)|` on
/// `[-12, 12]`, split at the Hermite roots.
pub fn constants_c_quadrature(s: usize, tol: f64) -> Result<f64> {
    if s > 3 {
        return Err(Error::InvalidArgument(format!(
            "c_s quadrature supports s in 0..=3, got {s}"
        )));
    }
    let mut pts = vec![-CS_WINDOW];
    pts.extend(hermite_roots(s));
    pts.push(CS_WINDOW);
    let phi = |z: f64| (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
    quadrature::adaptive_with_breaks(|z| (hermite(s, z) * phi(z)).abs(), &pts, tol)
}

/// Canonical multi-indices of a symmetric tensor of order `s` over `R^d`,
/// stored as per-coordinate counts; used to fill Hermite tensors without
/// allocating per sample.
#[derive(Debug, Clone)]
pub struct HermiteLayout {
    order: usize,
    dim: usize,
    counts: Vec<Vec<usize>>,
}

impl HermiteLayout {
    pub fn new(order: usize, dim: usize) -> Result<Self> {
        let template = SymTensor::zeros(order, dim)?;
        let counts = template
            .canonical()
            .map(|(idx, _, _)| {
                let mut c = vec![0usize; dim];
                idx.iter().for_each(|&i| c[i] += 1);
                c
            })
            .collect();
        Ok(HermiteLayout { order, dim, counts })
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Writes the entries of the multivariate Hermite tensor `H_s(z)`, for
    /// which `∇^s φ_d(z) = (-1)^s H_s(z) φ_d(z)`.
    pub fn fill(&self, z: &[f64], table: &mut [f64], out: &mut [f64]) {
        let s1 = self.order + 1;
        for (j, &zj) in z.iter().enumerate() {
            for n in 0..s1 {
                table[j * s1 + n] = hermite(n, zj);
            }
        }
        for (o, c) in out.iter_mut().zip(&self.counts) {
            *o = c
                .iter()
                .enumerate()
                .map(|(j, &n)| table[j * s1 + n])
                .product();
        }
    }

    pub fn table_len(&self) -> usize {
        self.dim * (self.order + 1)
    }
}

/// `H_s(z)` as a tensor.
pub fn hermite_tensor(z: &[f64], s: usize) -> Result<SymTensor> {
    let layout = HermiteLayout::new(s, z.len())?;
    let mut table = vec![0.0; layout.table_len()];
    let mut t = SymTensor::zeros(s, z.len())?;
    layout.fill(z, &mut table, t.entries_mut());
    Ok(t)
}

/// Monte Carlo estimate of `N_ε f(x)` from `mc_n` standard-normal draws;
/// `ε = 0` returns `f(x)` without sampling.
pub fn smooth<F: TestFunction + ?Sized>(
    f: &F,
    eps: f64,
    x: &[f64],
    mc_n: usize,
    seed: u64,
) -> Result<McEstimate> {
    if x.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: x.len(),
        });
    }
    if !(eps >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "smoothing radius must be nonnegative, got {eps}"
        )));
    }
    if eps == 0.0 {
        return Ok(McEstimate::exact(f.eval(x)));
    }
    if mc_n == 0 {
        return Err(Error::InvalidArgument("mc_n must be positive".into()));
    }
    let d = x.len();
    let parts = mc::chunked(mc_n, seed, Welford::default, |r, count, acc| {
        let mut z = vec![0.0; d];
        let mut p = vec![0.0; d];
        for _ in 0..count {
            mc::fill_normal(r, &mut z);
            for k in 0..d {
                p[k] = x[k] + eps * z[k];
            }
            acc.push(f.eval(&p));
        }
    });
    Ok(merge(&parts).estimate())
}

fn merge(parts: &[Welford]) -> Welford {
    let mut total = Welford::default();
    parts.iter().for_each(|p| total.merge(p));
    total
}

/// A tensor-valued Monte Carlo estimate with per-entry standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorEstimate {
    pub mean: SymTensor,
    pub se: SymTensor,
}

impl TensorEstimate {
    /// Largest `|mean - target|` in units of the entry SE.
    pub fn max_z(&self, target: &SymTensor) -> Result<f64> {
        let diff = self.mean.sub(target)?;
        Ok(diff
            .entries()
            .iter()
            .zip(self.se.entries())
            .map(|(g, s)| {
                if *g == 0.0 {
                    0.0
                } else if *s == 0.0 {
                    f64::INFINITY
                } else {
                    g.abs() / s
                }
            })
            .fold(0.0, f64::max))
    }
}

/// Monte Carlo estimate of `∇^s N_ε f(x)` through
/// `ε^{-s} E[(f(x + εZ) - f(x)) H_s(Z)]`. Subtracting `f(x)` is a control
/// variate (`E H_s(Z) = 0` for `s >= 1`).
pub fn smooth_derivative<F: TestFunction + ?Sized>(
    f: &F,
    eps: f64,
    x: &[f64],
    s: usize,
    mc_n: usize,
    seed: u64,
) -> Result<TensorEstimate> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "derivative of the smoothed function needs eps > 0, got {eps}"
        )));
    }
    if !(1..=4).contains(&s) {
        return Err(Error::InvalidArgument(format!(
            "derivative order must be in 1..=4, got {s}"
        )));
    }
    if x.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: x.len(),
        });
    }
    if mc_n == 0 {
        return Err(Error::InvalidArgument("mc_n must be positive".into()));
    }
    let d = x.len();
    let layout = HermiteLayout::new(s, d)?;
    let f0 = f.eval(x);
    let len = layout.len();
    let scale = eps.powi(-(s as i32));
    let parts = mc::chunked(
        mc_n,
        seed,
        || vec![Welford::default(); len],
        |r, count, acc| {
            let mut z = vec![0.0; d];
            let mut p = vec![0.0; d];
            let mut table = vec![0.0; layout.table_len()];
            let mut h = vec![0.0; len];
            for _ in 0..count {
                mc::fill_normal(r, &mut z);
                for k in 0..d {
                    p[k] = x[k] + eps * z[k];
                }
                let w = (f.eval(&p) - f0) * scale;
                layout.fill(&z, &mut table, &mut h);
                for (a, hk) in acc.iter_mut().zip(&h) {
                    a.push(w * hk);
                }
            }
        },
    );
    let mut total = vec![Welford::default(); len];
    for p in &parts {
        for (t, a) in total.iter_mut().zip(p) {
            t.merge(a);
        }
    }
    let mut mean = SymTensor::zeros(s, d)?;
    let mut se = SymTensor::zeros(s, d)?;
    for (k, w) in total.iter().enumerate() {
        let e = w.estimate();
        mean.entries_mut()[k] = e.mean;
        se.entries_mut()[k] = e.se;
    }
    Ok(TensorEstimate { mean, se })
}

/// How a [`Smoothed`] function draws its inner Gaussian sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerSampling {
    /// Same draws at every point, so the estimate is a fixed function of `x`
    /// and differences across points have low variance.
    Common,
    /// Fresh draws at every point (seed derived from the point's bits), so
    /// evaluations at distinct points are independent estimates.
    PerPoint,
}

/// `N_ε f` realized by Monte Carlo, usable as a [`TestFunction`].
#[derive(Clone)]
pub struct Smoothed {
    pub inner: Arc<dyn TestFunction>,
    pub eps: f64,
    pub mc_n: usize,
    pub seed: u64,
    pub sampling: InnerSampling,
}

impl Smoothed {
    pub fn new(inner: Arc<dyn TestFunction>, eps: f64, mc_n: usize, seed: u64, sampling: InnerSampling) -> Self {
        Smoothed {
            inner,
            eps,
            mc_n,
            seed,
            sampling,
        }
    }

    fn seed_at(&self, x: &[f64]) -> u64 {
        match self.sampling {
            InnerSampling::Common => self.seed,
            InnerSampling::PerPoint => {
                let bytes: Vec<u8> = x.iter().flat_map(|v| v.to_bits().to_le_bytes()).collect();
                mc::derive_seed(self.seed, &[&bytes])
            }
        }
    }
}

impl TestFunction for Smoothed {
    fn name(&self) -> String {
        format!("N[{}]({})", self.eps, self.inner.name())
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        smooth(&*self.inner, self.eps, x, self.mc_n, self.seed_at(x))
            .map(|e| e.mean)
            .unwrap_or(f64::NAN)
    }

    fn closed_derivative(&self, order: usize, x: &[f64]) -> Option<SymTensor> {
        if self.eps == 0.0 {
            return derivative(&*self.inner, order, x).ok().map(|(t, _)| t);
        }
        smooth_derivative(&*self.inner, self.eps, x, order, self.mc_n, self.seed_at(x))
            .ok()
            .map(|e| e.mean)
    }
}

/// Draws `n_pairs` pairs from `N(0, 4 I_d)`.
fn sample_pairs(dim: usize, n_pairs: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut r = mc::rng(seed);
    (0..n_pairs)
        .map(|_| {
            let mut x = vec![0.0; dim];
            let mut y = vec![0.0; dim];
            mc::fill_normal(&mut r, &mut x);
            mc::fill_normal(&mut r, &mut y);
            x.iter_mut().for_each(|v| *v *= 2.0);
            y.iter_mut().for_each(|v| *v *= 2.0);
            (x, y)
        })
        .collect()
}

/// Empirical `M_r(f)`: the largest quotient
/// `|∇^{r-1} f(x) - ∇^{r-1} f(y)|_∨ / |x - y|` over `n_pairs` random pairs
/// from `N(0, 4 I_d)`. A lower bound on the true seminorm.
pub fn estimate_mr<F: TestFunction + ?Sized>(
    f: &F,
    r: usize,
    n_pairs: usize,
    seed: u64,
) -> Result<f64> {
    if !(1..=4).contains(&r) {
        return Err(Error::InvalidArgument(format!(
            "M_r is estimated for r in 1..=4, got {r}"
        )));
    }
    let pairs = sample_pairs(f.dim(), n_pairs, seed);
    let mut best = 0.0f64;
    for (x, y) in &pairs {
        let dist = norm(&x.iter().zip(y).map(|(a, b)| a - b).collect::<Vec<_>>());
        if dist == 0.0 {
            continue;
        }
        let gap = if r == 1 {
            (f.eval(x) - f.eval(y)).abs()
        } else {
            let (dx, _) = derivative(f, r - 1, x)?;
            let (dy, _) = derivative(f, r - 1, y)?;
            dx.sub(&dy)?.injective_norm_default()
        };
        best = best.max(gap / dist);
    }
    Ok(best)
}
