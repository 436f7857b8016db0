//! Size-bias and zero-bias constructions for sums of independent vectors.
//!
//! For `W = Σ X_i` the zero-bias side of the identity
//! `E[f(W) W] = Σ_i ∫₀¹ E[(X_i ⊗ X_i) ∇f(W_i + t X_i)] dt`, `W_i = W - X_i`,
//! is realized by [`MuBreveMixture`]: pick `i` with weight `E|X_i|²`, draw
//! `x` from the `|x|²`-weighted law of `X_i` and `t ~ U[0, 1]`, and evaluate
//! at `V = W_i + t x`. The comparison measures for a fixed `(i, x)` are
//! realized by [`NuMixture`].

use std::f64::consts::PI;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::function::TestFunction;
use crate::laws::{normalize_atoms, Coordinate, SummandSpec};
use crate::mc::{self, McEstimate, Rng, Welford};
use crate::quadrature;
use crate::sampler::Sampler;
use crate::tensor::{dot, norm};

/// Named summand families for standardized i.i.d. models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Rademacher,
    Uniform,
    Exponential,
    Gaussian,
    TwoPoint { p: f64 },
}

impl Family {
    pub const NAMES: [&'static str; 5] = ["rademacher", "uniform", "exponential", "gaussian", "two-point"];

    /// Parses a family name; `two-point` takes its probability from `p`
    /// (default 0.2).
    pub fn parse(name: &str, p: Option<f64>) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "rademacher" => Ok(Family::Rademacher),
            "uniform" => Ok(Family::Uniform),
            "exponential" | "centered-exponential" => Ok(Family::Exponential),
            "gaussian" | "normal" => Ok(Family::Gaussian),
            "two-point" | "two_point" | "twopoint" => Ok(Family::TwoPoint { p: p.unwrap_or(0.2) }),
            _ => Err(Error::UnknownFamily {
                name: name.to_string(),
                available: Self::NAMES.join(", "),
            }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Rademacher => "rademacher",
            Family::Uniform => "uniform",
            Family::Exponential => "exponential",
            Family::Gaussian => "gaussian",
            Family::TwoPoint { .. } => "two-point",
        }
    }

    pub fn coordinate(&self) -> Coordinate {
        match *self {
            Family::Rademacher => Coordinate::Rademacher,
            Family::Uniform => Coordinate::Uniform,
            Family::Exponential => Coordinate::CenteredExponential,
            Family::Gaussian => Coordinate::Gaussian,
            Family::TwoPoint { p } => Coordinate::TwoPoint { p },
        }
    }
}

/// `W = Σ_i X_i` for independent summands.
#[derive(Debug, Clone, PartialEq)]
pub struct SumModel {
    dim: usize,
    summands: Vec<SummandSpec>,
    standardized: bool,
}

impl SumModel {
    pub fn new(dim: usize, summands: Vec<SummandSpec>, standardized: bool) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("model dimension must be positive".into()));
        }
        if let Some(s) = summands.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: s.dim(),
            });
        }
        Ok(SumModel {
            dim,
            summands,
            standardized,
        })
    }

    /// `n` i.i.d. copies of the family scaled by `1/√n`, so `Var(W) = I_d`.
    pub fn iid_standardized(family: Family, dim: usize, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "a standardized model needs at least one summand".into(),
            ));
        }
        let spec = SummandSpec::product(family.coordinate(), dim, 1.0 / (n as f64).sqrt())?;
        Self::new(dim, vec![spec; n], true)
    }

    pub fn empty(dim: usize) -> Result<Self> {
        Self::new(dim, vec![], false)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn summands(&self) -> &[SummandSpec] {
        &self.summands
    }

    pub fn len(&self) -> usize {
        self.summands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.summands.is_empty()
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    /// Draws all summands into `parts` (length `n * d`) and their sum into `w`.
    pub fn sample_parts(&self, rng: &mut Rng, parts: &mut [f64], w: &mut [f64]) {
        let d = self.dim;
        w.iter_mut().for_each(|v| *v = 0.0);
        for (i, s) in self.summands.iter().enumerate() {
            let x = &mut parts[i * d..(i + 1) * d];
            s.sample(rng, x);
            w.iter_mut().zip(x.iter()).for_each(|(a, b)| *a += b);
        }
    }

    /// Draws `W_i = W - X_i` (all summands except `i`).
    pub fn sample_leave_one_out(&self, i: usize, rng: &mut Rng, out: &mut [f64], scratch: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (j, s) in self.summands.iter().enumerate() {
            if j == i {
                continue;
            }
            s.sample(rng, scratch);
            out.iter_mut().zip(scratch.iter()).for_each(|(a, b)| *a += b);
        }
    }

    /// `Σ_i E|X_i|²`.
    pub fn total_m2(&self, seed: u64) -> Result<f64> {
        let mut total = 0.0;
        for (i, s) in self.summands.iter().enumerate() {
            total += s.m2(mc::mix_seed(seed, i as u64))?.value;
        }
        Ok(total)
    }

    /// Monte Carlo covariance of `W` (row-major `d × d`).
    pub fn mc_covariance(&self, mc_n: usize, seed: u64) -> Vec<f64> {
        let d = self.dim;
        let len = d * d;
        let est = mc::mc_mean_vec(mc_n, seed, len, |r, out| {
            let mut w = vec![0.0; d];
            self.sample(r, &mut w);
            for a in 0..d {
                for b in 0..d {
                    out[a * d + b] = w[a] * w[b];
                }
            }
        });
        est.into_iter().map(|e| e.mean).collect()
    }

    /// Largest entry of `|Cov(W) - I|` by Monte Carlo.
    pub fn covariance_deviation(&self, mc_n: usize, seed: u64) -> f64 {
        let d = self.dim;
        self.mc_covariance(mc_n, seed)
            .iter()
            .enumerate()
            .map(|(k, c)| (c - if k / d == k % d { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max)
    }
}

impl Sampler for SumModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample(&self, rng: &mut Rng, out: &mut [f64]) {
        let mut x = vec![0.0; self.dim];
        out.iter_mut().for_each(|v| *v = 0.0);
        for s in &self.summands {
            s.sample(rng, &mut x);
            out.iter_mut().zip(&x).for_each(|(a, b)| *a += b);
        }
    }
}

/// Centering check: the mean of `n` draws has norm at most `4 √(m2 / n)`.
pub fn check_centering(spec: &SummandSpec, n: usize, seed: u64) -> Result<bool> {
    let d = spec.dim();
    let means = mc::mc_mean_vec(n, seed, d, |r, out| spec.sample(r, out));
    let m: Vec<f64> = means.iter().map(|e| e.mean).collect();
    let m2 = spec.m2(seed)?.value;
    Ok(norm(&m) <= 4.0 * (m2 / n as f64).sqrt())
}

/// One draw `(i, t, x)` from the mixture together with `V = W_i + t x`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureDraw {
    pub index: usize,
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

/// The measure `μ̆` as a samplable mixture: component `i` has weight
/// `λ_i = E|X_i|²` (its projective mass), `x` is `|x|²`-weighted, `t` uniform.
#[derive(Debug, Clone)]
pub struct MuBreveMixture<'a> {
    model: &'a SumModel,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
    total: f64,
}

impl<'a> MuBreveMixture<'a> {
    pub fn new(model: &'a SumModel, seed: u64) -> Result<Self> {
        let mut weights = Vec::with_capacity(model.len());
        for (i, s) in model.summands().iter().enumerate() {
            weights.push(s.m2(mc::mix_seed(seed, i as u64))?.value);
        }
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for w in &weights {
            acc += w;
            cumulative.push(acc);
        }
        Ok(MuBreveMixture {
            model,
            weights,
            cumulative,
            total: acc,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ λ_i`; equals `tr Var(W) = d` for a standardized model.
    pub fn total_mass(&self) -> f64 {
        self.total
    }

    fn pick(&self, rng: &mut Rng) -> usize {
        let u = rng.random::<f64>() * self.total;
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.weights.len() - 1)
    }

    pub fn sample(&self, rng: &mut Rng) -> Result<MixtureDraw> {
        if self.total <= 0.0 {
            return Err(Error::InvalidArgument("mixture has zero mass".into()));
        }
        let d = self.model.dim();
        let index = self.pick(rng);
        let t: f64 = rng.random();
        let mut x = vec![0.0; d];
        self.model.summands()[index].sample_size_weighted(rng, &mut x);
        let mut v = vec![0.0; d];
        let mut scratch = vec![0.0; d];
        self.model.sample_leave_one_out(index, rng, &mut v, &mut scratch);
        v.iter_mut().zip(&x).for_each(|(a, b)| *a += t * b);
        Ok(MixtureDraw { index, t, x, v })
    }
}

/// Per-coordinate result of the zero-bias identity check.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroBiasResidual {
    /// `max_k |E[f(W) W_k] - (μ̆-side)_k|`.
    pub residual: f64,
    /// Combined SE at the maximizing coordinate.
    pub se: f64,
    pub lhs: Vec<McEstimate>,
    pub rhs: Vec<McEstimate>,
}

impl ZeroBiasResidual {
    /// Largest per-coordinate gap in combined-SE units.
    pub fn max_z(&self) -> f64 {
        self.lhs
            .iter()
            .zip(&self.rhs)
            .map(|(l, r)| {
                let gap = (l.mean - r.mean).abs();
                let se = (l.se * l.se + r.se * r.se).sqrt();
                if gap == 0.0 {
                    0.0
                } else if se == 0.0 {
                    f64::INFINITY
                } else {
                    gap / se
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn passes(&self, n_se: f64) -> bool {
        self.max_z() <= n_se
    }
}

/// Monte Carlo check of `E[f(W) W] = ∫ ∇f(V_ξ) dμ̆(ξ)` for the sum
/// construction. The two sides use independent streams.
pub fn verify_zero_bias_identity<F: TestFunction + ?Sized>(
    model: &SumModel,
    mix: &MuBreveMixture<'_>,
    f: &F,
    mc_n: usize,
    seed: u64,
) -> Result<ZeroBiasResidual> {
    let d = model.dim();
    if f.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: f.dim(),
        });
    }
    // surface a missing gradient before sampling
    let mut probe = vec![0.0; d];
    f.gradient_into(&vec![0.0; d], &mut probe)?;

    let lhs = mc::mc_mean_vec(mc_n, mc::mix_seed(seed, 1), d, |r, out| {
        let mut w = vec![0.0; d];
        model.sample(r, &mut w);
        let fw = f.eval(&w);
        out.iter_mut().zip(&w).for_each(|(o, wk)| *o = fw * wk);
    });
    let rhs = if mix.total_mass() > 0.0 {
        let mass = mix.total_mass();
        mc::mc_mean_vec(mc_n, mc::mix_seed(seed, 2), d, |r, out| {
            let draw = mix.sample(r).expect("positive mass");
            let mut g = vec![0.0; d];
            if f.gradient_into(&draw.v, &mut g).is_err() {
                g.iter_mut().for_each(|v| *v = f64::NAN);
            }
            let q = dot(&draw.x, &draw.x);
            let proj = if q > 0.0 { dot(&g, &draw.x) / q } else { 0.0 };
            out.iter_mut()
                .zip(&draw.x)
                .for_each(|(o, xk)| *o = mass * xk * proj);
        })
    } else {
        vec![McEstimate::exact(0.0); d]
    };
    let mut residual = 0.0;
    let mut se = 0.0;
    for (l, r) in lhs.iter().zip(&rhs) {
        let gap = (l.mean - r.mean).abs();
        if gap >= residual {
            residual = gap;
            se = (l.se * l.se + r.se * r.se).sqrt();
        }
    }
    Ok(ZeroBiasResidual {
        residual,
        se,
        lhs,
        rhs,
    })
}

/// Exact check of `E[f(W) W] = E W · E f(V)` for a finitely supported
/// `W >= 0` and its size-biased law `V` (atoms reweighted by `w / E W`).
/// Returns `(lhs, rhs)`.
pub fn verify_size_bias_identity<F: TestFunction + ?Sized>(
    atoms: &[(f64, f64)],
    f: &F,
) -> Result<(f64, f64)> {
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: f.dim(),
        });
    }
    let atoms = normalize_atoms(atoms.to_vec())?;
    if let Some((v, _)) = atoms.iter().find(|(v, _)| *v < 0.0) {
        return Err(Error::NegativeSupport(*v));
    }
    let mean: f64 = atoms.iter().map(|(v, p)| v * p).sum();
    if !(mean > 0.0) {
        return Err(Error::InvalidArgument("size bias needs E W > 0".into()));
    }
    let lhs: f64 = atoms.iter().map(|(v, p)| p * v * f.eval(&[*v])).sum();
    let biased: Vec<(f64, f64)> = atoms.iter().map(|(v, p)| (*v, p * v / mean)).collect();
    let rhs = mean * biased.iter().map(|(v, q)| q * f.eval(&[*v])).sum::<f64>();
    Ok((lhs, rhs))
}

/// A centered one-dimensional law given exactly.
#[derive(Debug, Clone, PartialEq)]
pub enum Law1d {
    /// Atoms `(value, probability)`.
    Discrete(Vec<(f64, f64)>),
    Gaussian { sigma: f64 },
    /// Uniform on `[-half_width, half_width]`.
    Uniform { half_width: f64 },
}

/// The zero-bias law of a [`Law1d`]: density `w -> E[W 1(W > w)] / σ²`.
#[derive(Debug, Clone, PartialEq)]
pub enum ZeroBiasLaw {
    /// Constant density on each `[knots[k], knots[k+1]]`.
    PiecewiseUniform {
        knots: Vec<f64>,
        densities: Vec<f64>,
        variance: f64,
    },
    /// The Gaussian is its own zero-bias law.
    Gaussian { sigma: f64 },
    /// Density `3(a² - w²) / (4a³)` on `[-a, a]`.
    Parabolic { half_width: f64 },
}

/// Builds the zero-bias law; fails unless the input has mean zero.
pub fn zero_bias_1d(law: &Law1d) -> Result<ZeroBiasLaw> {
    match law {
        Law1d::Discrete(atoms) => {
            let atoms = normalize_atoms(atoms.clone())?;
            let mean: f64 = atoms.iter().map(|(v, p)| v * p).sum();
            let spread = atoms.iter().fold(0.0f64, |m, (v, _)| m.max(v.abs()));
            if mean.abs() > 1e-12 * spread.max(1.0) {
                return Err(Error::NotCentered { mean });
            }
            let variance: f64 = atoms.iter().map(|(v, p)| p * v * v).sum();
            if !(variance > 0.0) {
                return Err(Error::InvalidArgument("zero bias needs positive variance".into()));
            }
            let knots: Vec<f64> = atoms.iter().map(|(v, _)| *v).collect();
            // E[W 1(W > w)] for w between consecutive atoms
            let densities = (0..knots.len() - 1)
                .map(|k| atoms[k + 1..].iter().map(|(v, p)| v * p).sum::<f64>() / variance)
                .collect();
            Ok(ZeroBiasLaw::PiecewiseUniform {
                knots,
                densities,
                variance,
            })
        }
        Law1d::Gaussian { sigma } => {
            if !(*sigma > 0.0) {
                return Err(Error::InvalidArgument("sigma must be positive".into()));
            }
            Ok(ZeroBiasLaw::Gaussian { sigma: *sigma })
        }
        Law1d::Uniform { half_width } => {
            if !(*half_width > 0.0) {
                return Err(Error::InvalidArgument("half width must be positive".into()));
            }
            Ok(ZeroBiasLaw::Parabolic {
                half_width: *half_width,
            })
        }
    }
}

impl ZeroBiasLaw {
    pub fn variance(&self) -> f64 {
        match self {
            ZeroBiasLaw::PiecewiseUniform { variance, .. } => *variance,
            ZeroBiasLaw::Gaussian { sigma } => sigma * sigma,
            ZeroBiasLaw::Parabolic { half_width } => half_width * half_width / 3.0,
        }
    }

    pub fn density(&self, w: f64) -> f64 {
        match self {
            ZeroBiasLaw::PiecewiseUniform { knots, densities, .. } => {
                if w < knots[0] || w > knots[knots.len() - 1] {
                    return 0.0;
                }
                let k = knots.partition_point(|&x| x <= w).saturating_sub(1);
                densities[k.min(densities.len() - 1)]
            }
            ZeroBiasLaw::Gaussian { sigma } => {
                (-0.5 * (w / sigma).powi(2)).exp() / (sigma * (2.0 * PI).sqrt())
            }
            ZeroBiasLaw::Parabolic { half_width: a } => {
                if w.abs() > *a {
                    0.0
                } else {
                    3.0 * (a * a - w * w) / (4.0 * a * a * a)
                }
            }
        }
    }

    /// `E g(V)` by adaptive quadrature over the pieces of the density.
    pub fn expect<G: Fn(f64) -> f64>(&self, g: G, tol: f64) -> Result<f64> {
        match self {
            ZeroBiasLaw::PiecewiseUniform { knots, densities, .. } => {
                let mut total = 0.0;
                for (k, dens) in densities.iter().enumerate() {
                    if *dens == 0.0 {
                        continue;
                    }
                    total += dens * quadrature::adaptive(&g, knots[k], knots[k + 1], tol)?;
                }
                Ok(total)
            }
            ZeroBiasLaw::Gaussian { sigma } => {
                let s = *sigma;
                quadrature::adaptive(|w| g(w) * self.density(w), -14.0 * s, 14.0 * s, tol)
            }
            ZeroBiasLaw::Parabolic { half_width } => {
                quadrature::adaptive(|w| g(w) * self.density(w), -half_width, *half_width, tol)
            }
        }
    }
}

impl Sampler for ZeroBiasLaw {
    fn dim(&self) -> usize {
        1
    }

    fn sample(&self, rng: &mut Rng, out: &mut [f64]) {
        out[0] = match self {
            ZeroBiasLaw::PiecewiseUniform { knots, densities, .. } => {
                let mut u: f64 = rng.random();
                let mut k = densities.len() - 1;
                for (j, dens) in densities.iter().enumerate() {
                    let mass = dens * (knots[j + 1] - knots[j]);
                    if u < mass {
                        k = j;
                        break;
                    }
                    u -= mass;
                }
                knots[k] + rng.random::<f64>() * (knots[k + 1] - knots[k])
            }
            ZeroBiasLaw::Gaussian { sigma } => sigma * mc::normal(rng),
            ZeroBiasLaw::Parabolic { half_width: a } => loop {
                let w = a * (2.0 * rng.random::<f64>() - 1.0);
                if rng.random::<f64>() < 1.0 - (w / a).powi(2) {
                    break w;
                }
            },
        };
    }
}

/// The comparison measure `ν_{i,x}` for fixed `(i, x)`: draws `t ~ U[0, 1]`
/// and `X_i`, giving the point `(1 - t) x + t X_i` with vector weight `X_i - x`.
#[derive(Debug, Clone)]
pub struct NuMixture<'a> {
    summand: &'a SummandSpec,
    x: Vec<f64>,
}

/// One draw from a [`NuMixture`].
#[derive(Debug, Clone, PartialEq)]
pub struct NuDraw {
    pub t: f64,
    pub point: Vec<f64>,
    pub weight: Vec<f64>,
}

impl<'a> NuMixture<'a> {
    pub fn new(summand: &'a SummandSpec, x: Vec<f64>) -> Result<Self> {
        if x.len() != summand.dim() {
            return Err(Error::DimensionMismatch {
                expected: summand.dim(),
                got: x.len(),
            });
        }
        Ok(NuMixture { summand, x })
    }

    pub fn sample(&self, rng: &mut Rng) -> NuDraw {
        let d = self.x.len();
        let t: f64 = rng.random();
        let mut xi = vec![0.0; d];
        self.summand.sample(rng, &mut xi);
        let point = (0..d).map(|k| (1.0 - t) * self.x[k] + t * xi[k]).collect();
        let weight = (0..d).map(|k| xi[k] - self.x[k]).collect();
        NuDraw { t, point, weight }
    }

    /// `E|X_i| + |x|`, the upper bound on `β₁^{(i,x)}`.
    pub fn beta1_bound(&self, seed: u64) -> Result<f64> {
        Ok(self.summand.m1(seed)?.value + norm(&self.x))
    }
}

/// Monte Carlo total variation mass of `ν_{i,x}`: `E|X_i - x|`.
pub fn beta1_estimate(mix: &NuMixture<'_>, mc_n: usize, seed: u64) -> McEstimate {
    let parts = mc::chunked(mc_n, seed, Welford::default, |r, count, acc| {
        for _ in 0..count {
            acc.push(norm(&mix.sample(r).weight));
        }
    });
    let mut total = Welford::default();
    parts.iter().for_each(|p| total.merge(p));
    total.estimate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::{FnFunction, Profile, Quadratic, Ridge};

    #[test]
    fn family_parsing() {
        assert_eq!(Family::parse("Rademacher", None).unwrap(), Family::Rademacher);
        assert_eq!(
            Family::parse("two-point", Some(0.3)).unwrap(),
            Family::TwoPoint { p: 0.3 }
        );
        let err = Family::parse("cauchy", None).unwrap_err();
        assert!(err.to_string().contains("rademacher"));
    }

    #[test]
    fn size_bias_bernoulli() {
        let f = FnFunction::new("g", 1, |x| (3.0 * x[0]).sin() + x[0] * x[0]);
        let p = 0.3;
        let (l, r) = verify_size_bias_identity(&[(0.0, 1.0 - p), (1.0, p)], &f).unwrap();
        assert!((l - p * f.eval(&[1.0])).abs() < 1e-15);
        assert!((l - r).abs() < 1e-15);
    }

    #[test]
    fn size_bias_truncated_poisson() {
        let lambda: f64 = 2.5;
        let mut atoms = vec![];
        let mut p = (-lambda).exp();
        for k in 0..=20 {
            atoms.push((k as f64, p));
            p *= lambda / (k as f64 + 1.0);
        }
        let id = Ridge::new(vec![1.0], Profile::Linear);
        let (l, r) = verify_size_bias_identity(&atoms, &id).unwrap();
        assert!((l - r).abs() < 1e-12);
        // E W² = λ + λ²
        assert!((l - (lambda + lambda * lambda)).abs() < 1e-9);
        let one = Quadratic::constant(1, 1.0);
        let (l, _) = verify_size_bias_identity(&atoms, &one).unwrap();
        assert!((l - lambda).abs() < 1e-9);
    }

    #[test]
    fn size_bias_rejects_negative_support() {
        let id = Ridge::new(vec![1.0], Profile::Linear);
        assert!(matches!(
            verify_size_bias_identity(&[(-1.0, 0.5), (2.0, 0.5)], &id),
            Err(Error::NegativeSupport(_))
        ));
    }

    #[test]
    fn zero_bias_of_rademacher_is_uniform() {
        let z = zero_bias_1d(&Law1d::Discrete(vec![(-1.0, 0.5), (1.0, 0.5)])).unwrap();
        match &z {
            ZeroBiasLaw::PiecewiseUniform { knots, densities, .. } => {
                assert_eq!(knots, &vec![-1.0, 1.0]);
                assert!((densities[0] - 0.5).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
        // E[W · W³] = 1 = σ² E[3V²]
        let rhs = z.expect(|v| 3.0 * v * v, 1e-12).unwrap();
        assert!((rhs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_bias_uniform_density() {
        let a = 3f64.sqrt();
        let z = zero_bias_1d(&Law1d::Uniform { half_width: a }).unwrap();
        for w in [-1.5, -0.2, 0.0, 1.1] {
            assert!((z.density(w) - (3.0 - w * w) / (4.0 * a)).abs() < 1e-14);
        }
        assert!((z.expect(|_| 1.0, 1e-12).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_bias_rejects_uncentered() {
        assert!(matches!(
            zero_bias_1d(&Law1d::Discrete(vec![(0.0, 0.5), (2.0, 0.5)])),
            Err(Error::NotCentered { .. })
        ));
    }

    #[test]
    fn mixture_mass_is_trace() {
        let m = SumModel::iid_standardized(Family::Uniform, 3, 7).unwrap();
        let mix = MuBreveMixture::new(&m, 0).unwrap();
        assert!((mix.total_mass() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_rademacher_zero_bias_cube() {
        let spec = SummandSpec::product(Coordinate::Rademacher, 1, 1.0).unwrap();
        let m = SumModel::new(1, vec![spec], false).unwrap();
        let mix = MuBreveMixture::new(&m, 0).unwrap();
        let cube = Ridge::new(vec![1.0], Profile::Cube);
        let res = verify_zero_bias_identity(&m, &mix, &cube, 200_000, 3).unwrap();
        // the W side is exactly 1 (W⁴ = 1)
        assert!((res.lhs[0].mean - 1.0).abs() < 1e-12);
        assert!(res.rhs[0].within(1.0, 4.0), "{:?}", res.rhs[0]);
        assert!(res.passes(4.0));
    }

    #[test]
    fn constant_function_both_sides_vanish() {
        let m = SumModel::iid_standardized(Family::Rademacher, 2, 4).unwrap();
        let mix = MuBreveMixture::new(&m, 0).unwrap();
        let c = Quadratic::constant(2, 3.0);
        let res = verify_zero_bias_identity(&m, &mix, &c, 50_000, 5).unwrap();
        assert!(res.rhs.iter().all(|e| e.mean == 0.0));
        assert!(res.passes(4.0));
    }

    #[test]
    fn beta1_examples() {
        let rad = SummandSpec::product(Coordinate::Rademacher, 1, 1.0).unwrap();
        let at0 = NuMixture::new(&rad, vec![0.0]).unwrap();
        let e = beta1_estimate(&at0, 100_000, 1);
        assert!((e.mean - 1.0).abs() < 1e-15);
        let at1 = NuMixture::new(&rad, vec![1.0]).unwrap();
        let e = beta1_estimate(&at1, 100_000, 2);
        assert!(e.within(1.0, 3.0), "{e:?}");
        assert!(e.mean <= at1.beta1_bound(0).unwrap() + 3.0 * e.se);

        let zero = SummandSpec::zero(1).unwrap();
        let degenerate = NuMixture::new(&zero, vec![0.0]).unwrap();
        assert_eq!(beta1_estimate(&degenerate, 1000, 3).mean, 0.0);
    }
}
