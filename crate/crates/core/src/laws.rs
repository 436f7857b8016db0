//! Distributions of the independent summands and their radial moments.
//!
//! Product laws (independent, unit-variance coordinates) get deterministic
//! moments: exact enumeration for lattice laws, adaptive quadrature (nested
//! over coordinates when `d > 1`) for continuous ones. Sampler-only laws fall
//! back to Monte Carlo.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::mc::{self, Rng, Welford};
use crate::quadrature;
use crate::sampler::{DrawFn, Sampler};
use crate::tensor::norm;

type Density = fn(f64) -> f64;

/// Monte Carlo draws for moments of sampler-only laws.
pub const MC_MOMENT_N: usize = 1_000_000;
const QUAD_TOL: f64 = 1e-11;
/// Largest dimension handled by nested quadrature.
const NESTED_MAX_DIM: usize = 3;
/// Upper truncation of the centered exponential coordinate.
const EXP_UPPER: f64 = 45.0;

/// How a moment was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    Exact,
    Quadrature,
    MonteCarlo { se: f64 },
}

impl Provenance {
    pub fn label(&self) -> &'static str {
        match self {
            Provenance::Exact => "exact",
            Provenance::Quadrature => "quadrature",
            Provenance::MonteCarlo { .. } => "monte-carlo",
        }
    }

    pub fn is_deterministic(&self) -> bool {
        !matches!(self, Provenance::MonteCarlo { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moment {
    pub value: f64,
    pub provenance: Provenance,
}

impl Moment {
    pub fn exact(value: f64) -> Self {
        Moment {
            value,
            provenance: Provenance::Exact,
        }
    }
}

/// Coordinate law of a product summand; every variant has mean 0 and variance 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coordinate {
    /// `±1` with probability 1/2.
    Rademacher,
    /// Uniform on `[-√3, √3]`.
    Uniform,
    /// `E - 1` with `E ~ Exp(1)`.
    CenteredExponential,
    Gaussian,
    /// `√((1-p)/p)` with probability `p`, `-√(p/(1-p))` otherwise.
    TwoPoint { p: f64 },
}

impl Coordinate {
    fn two_point_values(p: f64) -> (f64, f64) {
        (((1.0 - p) / p).sqrt(), -(p / (1.0 - p)).sqrt())
    }

    pub fn sample(&self, rng: &mut Rng) -> f64 {
        match *self {
            Coordinate::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Coordinate::Uniform => 3f64.sqrt() * (2.0 * rng.random::<f64>() - 1.0),
            Coordinate::CenteredExponential => exp1(rng) - 1.0,
            Coordinate::Gaussian => mc::normal(rng),
            Coordinate::TwoPoint { p } => {
                let (a, b) = Self::two_point_values(p);
                if rng.random::<f64>() < p {
                    a
                } else {
                    b
                }
            }
        }
    }

    /// Draw from the `y²`-weighted version of the law (density `y² p(y)`).
    pub fn sample_square_weighted(&self, rng: &mut Rng) -> f64 {
        let sign = |rng: &mut Rng| if rng.random::<bool>() { 1.0 } else { -1.0 };
        match *self {
            Coordinate::Rademacher => sign(rng),
            Coordinate::Uniform => {
                // |y| has density ∝ y² on [0, √3]
                let u: f64 = rng.random();
                sign(rng) * 3f64.sqrt() * u.cbrt()
            }
            Coordinate::CenteredExponential => loop {
                // target ∝ (e-1)² e^{-e}; envelope ∝ (e² + 1) e^{-e}, a
                // 2/3 : 1/3 mixture of Gamma(3) and Exp(1)
                let e = if rng.random::<f64>() < 2.0 / 3.0 {
                    exp1(rng) + exp1(rng) + exp1(rng)
                } else {
                    exp1(rng)
                };
                let accept = (e - 1.0) * (e - 1.0) / (e * e + 1.0);
                if rng.random::<f64>() < accept {
                    break e - 1.0;
                }
            },
            Coordinate::Gaussian => {
                let (a, b, c) = (mc::normal(rng), mc::normal(rng), mc::normal(rng));
                sign(rng) * (a * a + b * b + c * c).sqrt()
            }
            Coordinate::TwoPoint { p } => {
                let (a, b) = Self::two_point_values(p);
                // weights p a² = 1 - p and (1 - p) b² = p
                if rng.random::<f64>() < 1.0 - p {
                    a
                } else {
                    b
                }
            }
        }
    }

    fn label(&self) -> String {
        match self {
            Coordinate::Rademacher => "rademacher".into(),
            Coordinate::Uniform => "uniform".into(),
            Coordinate::CenteredExponential => "exponential".into(),
            Coordinate::Gaussian => "gaussian".into(),
            Coordinate::TwoPoint { p } => format!("two-point({p})"),
        }
    }

    /// Density on its support and the support interval (continuous laws only).
    fn density(&self) -> Option<(Density, f64, f64)> {
        fn uniform(_: f64) -> f64 {
            0.5 / 3f64.sqrt()
        }
        fn exponential(y: f64) -> f64 {
            (-(y + 1.0)).exp()
        }
        match self {
            Coordinate::Uniform => Some((uniform, -(3f64.sqrt()), 3f64.sqrt())),
            Coordinate::CenteredExponential => Some((exponential, -1.0, EXP_UPPER)),
            _ => None,
        }
    }
}

fn exp1(rng: &mut Rng) -> f64 {
    let u: f64 = rng.random();
    -(1.0 - u).ln()
}

/// A sampler-only law.
#[derive(Clone)]
pub struct CustomLaw {
    pub name: String,
    pub dim: usize,
    sampler: DrawFn,
    /// Rejection cap on `|x|²` for size-weighted draws (99.9th percentile of a pilot run).
    size_cap: f64,
}

impl CustomLaw {
    pub fn new<F>(name: &str, dim: usize, sampler: F, pilot_seed: u64) -> Self
    where
        F: Fn(&mut Rng, &mut [f64]) + Send + Sync + 'static,
    {
        let sampler: DrawFn = Arc::new(sampler);
        let mut r = mc::rng(pilot_seed);
        let mut x = vec![0.0; dim];
        let mut sq: Vec<f64> = (0..100_000)
            .map(|_| {
                sampler(&mut r, &mut x);
                x.iter().map(|v| v * v).sum()
            })
            .collect();
        sq.sort_by(|a, b| a.total_cmp(b));
        let size_cap = sq[(sq.len() as f64 * 0.999) as usize].max(f64::MIN_POSITIVE);
        CustomLaw {
            name: name.to_string(),
            dim,
            sampler,
            size_cap,
        }
    }
}

impl fmt::Debug for CustomLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomLaw")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("size_cap", &self.size_cap)
            .finish()
    }
}

impl PartialEq for CustomLaw {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.sampler, &other.sampler)
    }
}

/// Law of one summand before scaling.
#[derive(Debug, Clone, PartialEq)]
pub enum SummandLaw {
    /// Independent coordinates with the given law.
    Product(Coordinate),
    /// One-dimensional law with finitely many atoms `(value, probability)`.
    Discrete(Vec<(f64, f64)>),
    Custom(CustomLaw),
}

/// One independent summand `X = scale * Y`, `Y ~ law`.
#[derive(Debug, Clone, PartialEq)]
pub struct SummandSpec {
    pub name: String,
    dim: usize,
    law: SummandLaw,
    scale: f64,
}

impl SummandSpec {
    pub fn product(coordinate: Coordinate, dim: usize, scale: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("summand dimension must be positive".into()));
        }
        if let Coordinate::TwoPoint { p } = coordinate {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "two-point probability must lie in (0, 1), got {p}"
                )));
            }
        }
        check_scale(scale)?;
        Ok(SummandSpec {
            name: coordinate.label(),
            dim,
            law: SummandLaw::Product(coordinate),
            scale,
        })
    }

    /// One-dimensional discrete law; atoms must have positive total
    /// probability (renormalized) and mean zero.
    pub fn discrete(name: &str, atoms: Vec<(f64, f64)>, scale: f64) -> Result<Self> {
        check_scale(scale)?;
        let atoms = normalize_atoms(atoms)?;
        let mean: f64 = atoms.iter().map(|(v, p)| v * p).sum();
        let spread = atoms.iter().fold(0.0f64, |m, (v, _)| m.max(v.abs()));
        if mean.abs() > 1e-12 * spread.max(1.0) {
            return Err(Error::NotCentered { mean });
        }
        Ok(SummandSpec {
            name: name.to_string(),
            dim: 1,
            law: SummandLaw::Discrete(atoms),
            scale,
        })
    }

    pub fn custom(law: CustomLaw, scale: f64) -> Result<Self> {
        check_scale(scale)?;
        Ok(SummandSpec {
            name: law.name.clone(),
            dim: law.dim,
            law: SummandLaw::Custom(law),
            scale,
        })
    }

    /// The zero summand.
    pub fn zero(dim: usize) -> Result<Self> {
        let mut s = Self::product(Coordinate::Rademacher, dim, 0.0)?;
        s.name = "zero".into();
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn law(&self) -> &SummandLaw {
        &self.law
    }

    pub fn sample(&self, rng: &mut Rng, out: &mut [f64]) {
        match &self.law {
            SummandLaw::Product(c) => out.iter_mut().for_each(|o| *o = c.sample(rng)),
            SummandLaw::Discrete(atoms) => out[0] = pick_atom(atoms, rng),
            SummandLaw::Custom(law) => (law.sampler)(rng, out),
        }
        if self.scale != 1.0 {
            out.iter_mut().for_each(|o| *o *= self.scale);
        }
    }

    /// Draw from the `|x|²`-weighted law (`|x|² P(dx) / E|X|²`).
    pub fn sample_size_weighted(&self, rng: &mut Rng, out: &mut [f64]) {
        match &self.law {
            SummandLaw::Product(c) => {
                // |y|² = Σ y_j²: mixture over the weighted coordinate j
                let j = rng.random_range(0..self.dim);
                for (k, o) in out.iter_mut().enumerate() {
                    *o = if k == j {
                        c.sample_square_weighted(rng)
                    } else {
                        c.sample(rng)
                    };
                }
            }
            SummandLaw::Discrete(atoms) => {
                let total: f64 = atoms.iter().map(|(v, p)| p * v * v).sum();
                let mut u = rng.random::<f64>() * total;
                let mut chosen = atoms[atoms.len() - 1].0;
                for (v, p) in atoms {
                    let w = p * v * v;
                    if u < w {
                        chosen = *v;
                        break;
                    }
                    u -= w;
                }
                out[0] = chosen;
            }
            SummandLaw::Custom(law) => loop {
                (law.sampler)(rng, out);
                let q: f64 = out.iter().map(|v| v * v).sum();
                if q > law.size_cap {
                    continue;
                }
                if rng.random::<f64>() * law.size_cap < q {
                    break;
                }
            },
        }
        if self.scale != 1.0 {
            out.iter_mut().for_each(|o| *o *= self.scale);
        }
    }

    /// `E g(|X|)`, with `kinks` the points where `g` is not smooth.
    pub fn radial_expectation<G>(&self, g: G, kinks: &[f64], seed: u64) -> Result<Moment>
    where
        G: Fn(f64) -> f64 + Sync,
    {
        let s = self.scale;
        if s == 0.0 {
            return Ok(Moment::exact(g(0.0)));
        }
        match &self.law {
            SummandLaw::Product(c) => product_radial(*c, self.dim, s, &g, kinks, seed),
            SummandLaw::Discrete(atoms) => Ok(Moment::exact(
                atoms.iter().map(|(v, p)| p * g(s * v.abs())).sum(),
            )),
            SummandLaw::Custom(_) => Ok(self.mc_radial(&g, seed)),
        }
    }

    fn mc_radial<G: Fn(f64) -> f64 + Sync>(&self, g: &G, seed: u64) -> Moment {
        let d = self.dim;
        let parts = mc::chunked(MC_MOMENT_N, seed, Welford::default, |r, count, acc| {
            let mut x = vec![0.0; d];
            for _ in 0..count {
                self.sample(r, &mut x);
                acc.push(g(norm(&x)));
            }
        });
        let mut total = Welford::default();
        parts.iter().for_each(|p| total.merge(p));
        let e = total.estimate();
        Moment {
            value: e.mean,
            provenance: Provenance::MonteCarlo { se: e.se },
        }
    }

    /// `E|X|²`.
    pub fn m2(&self, seed: u64) -> Result<Moment> {
        match &self.law {
            SummandLaw::Product(_) => Ok(Moment::exact(self.scale * self.scale * self.dim as f64)),
            _ => self.radial_expectation(|r| r * r, &[], seed),
        }
    }

    /// `E|X|`.
    pub fn m1(&self, seed: u64) -> Result<Moment> {
        self.radial_expectation(|r| r, &[], seed)
    }

    /// `E|X|³`.
    pub fn m3(&self, seed: u64) -> Result<Moment> {
        self.radial_expectation(|r| r * r * r, &[], seed)
    }

    /// `E[|X|² min{a, b|X|}]`.
    pub fn min_moment(&self, a: f64, b: f64, seed: u64) -> Result<Moment> {
        self.affine_min_moment(a, 0.0, b, seed)
    }

    /// `E[|X|² min{a, c0 + c1 |X|}]`.
    pub fn affine_min_moment(&self, a: f64, c0: f64, c1: f64, seed: u64) -> Result<Moment> {
        if !(a >= 0.0 && c0 >= 0.0 && c1 >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "truncation parameters must be nonnegative, got a={a}, c0={c0}, c1={c1}"
            )));
        }
        let kinks: Vec<f64> = if c1 > 0.0 && a > c0 {
            vec![(a - c0) / c1]
        } else {
            vec![]
        };
        self.radial_expectation(|r| r * r * a.min(c0 + c1 * r), &kinks, seed)
    }
}

fn check_scale(scale: f64) -> Result<()> {
    if !(scale >= 0.0 && scale.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "summand scale must be finite and nonnegative, got {scale}"
        )));
    }
    Ok(())
}

pub(crate) fn normalize_atoms(atoms: Vec<(f64, f64)>) -> Result<Vec<(f64, f64)>> {
    if atoms.is_empty() {
        return Err(Error::InvalidArgument("discrete law needs at least one atom".into()));
    }
    if atoms
        .iter()
        .any(|(v, p)| !v.is_finite() || !(p.is_finite() && *p >= 0.0))
    {
        return Err(Error::InvalidArgument(
            "atoms need finite values and nonnegative probabilities".into(),
        ));
    }
    let total: f64 = atoms.iter().map(|(_, p)| p).sum();
    if !(total > 0.0) {
        return Err(Error::InvalidArgument("atom probabilities sum to zero".into()));
    }
    let mut atoms: Vec<(f64, f64)> = atoms
        .into_iter()
        .filter(|(_, p)| *p > 0.0)
        .map(|(v, p)| (v, p / total))
        .collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    // merge repeated values
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for (v, p) in atoms {
        match merged.last_mut() {
            Some(last) if last.0 == v => last.1 += p,
            _ => merged.push((v, p)),
        }
    }
    Ok(merged)
}

fn pick_atom(atoms: &[(f64, f64)], rng: &mut Rng) -> f64 {
    let mut u: f64 = rng.random();
    for (v, p) in atoms {
        if u < *p {
            return *v;
        }
        u -= p;
    }
    atoms[atoms.len() - 1].0
}

fn product_radial<G: Fn(f64) -> f64 + Sync>(
    c: Coordinate,
    dim: usize,
    scale: f64,
    g: &G,
    kinks: &[f64],
    seed: u64,
) -> Result<Moment> {
    match c {
        Coordinate::Rademacher => Ok(Moment::exact(g(scale * (dim as f64).sqrt()))),
        Coordinate::TwoPoint { p } => {
            let (a, b) = Coordinate::two_point_values(p);
            let mut total = 0.0;
            for k in 0..=dim {
                let prob = binomial_pmf(dim, k, p);
                let r = (k as f64 * a * a + (dim - k) as f64 * b * b).sqrt();
                total += prob * g(scale * r);
            }
            Ok(Moment::exact(total))
        }
        Coordinate::Gaussian => {
            // |Y| ~ chi_d
            let df = dim as f64;
            let log_norm = (1.0 - 0.5 * df) * std::f64::consts::LN_2 - ln_gamma(0.5 * df);
            let density = |rho: f64| {
                if rho <= 0.0 {
                    if dim == 1 {
                        (2.0 / PI).sqrt()
                    } else {
                        0.0
                    }
                } else {
                    ((df - 1.0) * rho.ln() - 0.5 * rho * rho + log_norm).exp()
                }
            };
            let upper = df.sqrt() + 14.0;
            let mut pts = vec![0.0];
            pts.extend(
                kinks
                    .iter()
                    .map(|k| k / scale)
                    .filter(|&k| k > 0.0 && k < upper),
            );
            pts.push(upper);
            pts.sort_by(|a, b| a.total_cmp(b));
            let v = quadrature::adaptive_with_breaks(|rho| density(rho) * g(scale * rho), &pts, QUAD_TOL)?;
            Ok(Moment {
                value: v,
                provenance: Provenance::Quadrature,
            })
        }
        Coordinate::Uniform | Coordinate::CenteredExponential => {
            if dim > NESTED_MAX_DIM {
                let spec = SummandSpec::product(c, dim, scale)?;
                return Ok(spec.mc_radial(g, seed));
            }
            let (density, lo, hi) = c.density().expect("continuous coordinate");
            let radii: Vec<f64> = kinks.iter().map(|k| k / scale).filter(|k| *k > 0.0).collect();
            let v = nested_radial(density, lo, hi, dim, 0, 0.0, &|r| g(scale * r), &radii)?;
            Ok(Moment {
                value: v,
                provenance: Provenance::Quadrature,
            })
        }
    }
}

/// `∫ p(y_level) ... p(y_d) h(√(q + Σ y²)) dy` over the remaining coordinates.
#[allow(clippy::too_many_arguments)]
fn nested_radial(
    density: fn(f64) -> f64,
    lo: f64,
    hi: f64,
    dim: usize,
    level: usize,
    q: f64,
    h: &dyn Fn(f64) -> f64,
    radii: &[f64],
) -> Result<f64> {
    let last = level + 1 == dim;
    let mut pts = vec![lo, hi];
    if lo < 0.0 && hi > 0.0 {
        pts.push(0.0);
    }
    for &r in radii {
        // where the kink sphere |y| = r crosses this coordinate line
        let rem = r * r - q;
        if rem > 0.0 {
            let y = rem.sqrt();
            pts.extend([y, -y]);
        }
        if !last {
            pts.extend([r, -r]);
        }
    }
    pts.retain(|&y| y >= lo && y <= hi);
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup();
    let tol = QUAD_TOL * 0.1f64.powi(level as i32);
    if last {
        return quadrature::adaptive_with_breaks(|y| density(y) * h((q + y * y).sqrt()), &pts, tol);
    }
    let failed = std::cell::Cell::new(false);
    let v = quadrature::adaptive_with_breaks(
        |y| match nested_radial(density, lo, hi, dim, level + 1, q + y * y, h, radii) {
            Ok(inner) => density(y) * inner,
            Err(_) => {
                failed.set(true);
                0.0
            }
        },
        &pts,
        tol,
    )?;
    if failed.get() {
        return Err(Error::InvalidArgument(
            "nested radial quadrature did not converge".into(),
        ));
    }
    Ok(v)
}

fn binomial_pmf(n: usize, k: usize, p: f64) -> f64 {
    let mut c = 1.0;
    for i in 0..k {
        c *= (n - i) as f64 / (i + 1) as f64;
    }
    c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
}

/// `ln Γ(x)` for `x = k/2`, `k >= 1` (the only arguments used here).
fn ln_gamma(x: f64) -> f64 {
    let twice = (2.0 * x).round() as i64;
    debug_assert!((2.0 * x - twice as f64).abs() < 1e-12 && twice >= 1);
    if twice % 2 == 0 {
        (1..(twice / 2)).map(|k| (k as f64).ln()).sum()
    } else {
        // Γ(m + 1/2) = √π (2m)! / (4^m m!)
        let m = (twice - 1) / 2;
        let mut v = 0.5 * PI.ln();
        for k in 0..m {
            v += (k as f64 + 0.5).ln();
        }
        v
    }
}

/// A summand viewed as a sampler of `X`.
impl Sampler for SummandSpec {
    fn dim(&self) -> usize {
        self.dim
    }
    fn sample(&self, rng: &mut Rng, out: &mut [f64]) {
        SummandSpec::sample(self, rng, out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(c: Coordinate, d: usize) -> SummandSpec {
        SummandSpec::product(c, d, 1.0).unwrap()
    }

    #[test]
    fn one_dimensional_moments_match_closed_forms() {
        let u = spec(Coordinate::Uniform, 1);
        // |U| ~ U(0, √3): E|U| = √3/2, E|U|³ = 9/4 / √3 · ... = (√3)³/4
        assert!((u.m1(0).unwrap().value - 3f64.sqrt() / 2.0).abs() < 1e-12);
        assert!((u.m3(0).unwrap().value - 3f64.powf(1.5) / 4.0).abs() < 1e-12);

        let g = spec(Coordinate::Gaussian, 1);
        assert!((g.m3(0).unwrap().value - 2.0 * (2.0 / PI).sqrt()).abs() < 1e-10);
        assert!((g.m1(0).unwrap().value - (2.0 / PI).sqrt()).abs() < 1e-10);

        let e = spec(Coordinate::CenteredExponential, 1);
        // E|E - 1| = 2/e
        assert!((e.m1(0).unwrap().value - 2.0 / std::f64::consts::E).abs() < 1e-10);
    }

    #[test]
    fn gaussian_chi_moments() {
        for d in 1..=4 {
            let g = spec(Coordinate::Gaussian, d);
            let m2 = g.radial_expectation(|r| r * r, &[], 0).unwrap().value;
            assert!((m2 - d as f64).abs() < 1e-9, "d={d}: {m2}");
        }
    }

    #[test]
    fn nested_quadrature_recovers_second_moment() {
        for c in [Coordinate::Uniform, Coordinate::CenteredExponential] {
            for d in 2..=3 {
                let s = spec(c, d);
                let m2 = s.radial_expectation(|r| r * r, &[], 0).unwrap();
                assert!((m2.value - d as f64).abs() < 1e-8, "{c:?} d={d}: {m2:?}");
                assert_eq!(m2.provenance, Provenance::Quadrature);
            }
        }
    }

    #[test]
    fn nested_min_moment_matches_monte_carlo() {
        let s = spec(Coordinate::Uniform, 2);
        let q = s.min_moment(1.0, 0.8, 0).unwrap().value;
        let mut r = mc::rng(3);
        let mut x = [0.0; 2];
        let mut w = Welford::default();
        for _ in 0..400_000 {
            s.sample(&mut r, &mut x);
            let n = norm(&x);
            w.push(n * n * 1f64.min(0.8 * n));
        }
        let e = w.estimate();
        assert!(e.within(q, 4.0), "{q} vs {e:?}");
    }

    #[test]
    fn rademacher_and_two_point_are_exact() {
        let r = SummandSpec::product(Coordinate::Rademacher, 3, 0.5).unwrap();
        let m3 = r.m3(0).unwrap();
        assert_eq!(m3.provenance, Provenance::Exact);
        assert!((m3.value - (0.5 * 3f64.sqrt()).powi(3)).abs() < 1e-14);

        let t = spec(Coordinate::TwoPoint { p: 0.2 }, 1);
        let m2 = t.radial_expectation(|r| r * r, &[], 0).unwrap().value;
        assert!((m2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn size_weighted_draws_have_reweighted_mean() {
        // E_w[|X|²] = E|X|⁴ / E|X|² ; uniform d=1: E U⁴ = 9/5
        let s = spec(Coordinate::Uniform, 1);
        let mut r = mc::rng(4);
        let mut x = [0.0];
        let mut w = Welford::default();
        for _ in 0..200_000 {
            s.sample_size_weighted(&mut r, &mut x);
            w.push(x[0] * x[0]);
        }
        assert!(w.estimate().within(1.8, 4.0), "{:?}", w.estimate());

        // centered exponential: E (E-1)^4 = 9
        let s = spec(Coordinate::CenteredExponential, 1);
        let mut w = Welford::default();
        for _ in 0..400_000 {
            s.sample_size_weighted(&mut r, &mut x);
            w.push(x[0] * x[0]);
        }
        assert!(w.estimate().within(9.0, 4.0), "{:?}", w.estimate());
    }

    #[test]
    fn discrete_rejects_uncentered() {
        assert!(matches!(
            SummandSpec::discrete("bad", vec![(1.0, 0.5), (0.0, 0.5)], 1.0),
            Err(Error::NotCentered { .. })
        ));
        let ok = SummandSpec::discrete("rad", vec![(1.0, 1.0), (-1.0, 1.0)], 1.0).unwrap();
        assert!((ok.m2(0).unwrap().value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ln_gamma_half_integers() {
        assert!((ln_gamma(0.5) - 0.5 * PI.ln()).abs() < 1e-14);
        assert!((ln_gamma(3.0) - 2f64.ln()).abs() < 1e-14);
        assert!((ln_gamma(2.5) - (0.75 * PI.sqrt()).ln()).abs() < 1e-14);
    }
}
