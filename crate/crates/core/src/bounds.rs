//! Explicit right-hand sides of the normal approximation bounds for sums of
//! independent summands, with per-summand decomposition.

use std::fmt;

use crate::bias::SumModel;
use crate::error::{Error, Result};
use crate::laws::{Moment, Provenance, SummandSpec};
use crate::mc;

/// Caps and slopes of the Lindeberg-type bounds.
pub const M2_CAP: f64 = 2.5;
pub const M2_SLOPE: f64 = 0.94;
pub const M1_CAP: f64 = 4.5;
pub const M1_SLOPE_BASE: f64 = 11.1;
pub const M1_SLOPE_LOG: f64 = 0.83;

/// Which smoothness class the bound is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    /// `M₁(f) Σ E[|X_i|² min{4.5, (11.1 + 0.83 ln d)|X_i|}]`.
    M1,
    /// `M₂(f) Σ E[|X_i|² min{2.5, 0.94 |X_i|}]`.
    M2,
    /// `M₃(f)/2 Σ E|X_i|³`.
    M3,
}

impl BoundKind {
    pub fn label(&self) -> &'static str {
        match self {
            BoundKind::M1 => "M1",
            BoundKind::M2 => "M2",
            BoundKind::M3 => "M3",
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// An evaluated bound: `|E f(W) - N f| <= mr_budget × total`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub which: BoundKind,
    pub per_summand: Vec<f64>,
    pub total: f64,
    /// The seminorm `M_r(f)` the total is multiplied by; 1 for the unit
    /// class. Constant factors such as the `1/2` of the M3 bound are already
    /// in `total`.
    pub mr_budget: f64,
    pub dim: usize,
    pub provenance: Vec<Provenance>,
}

impl BoundReport {
    /// The bound for a test function with `M_r(f) = m`.
    pub fn for_seminorm(&self, m: f64) -> f64 {
        m * self.total
    }

    /// True when every per-summand term is deterministic.
    pub fn is_exact(&self) -> bool {
        self.provenance.iter().all(Provenance::is_deterministic)
    }
}

/// The slope `11.1 + 0.83 ln d` of the M1 bound.
pub fn m1_slope(dim: usize) -> f64 {
    M1_SLOPE_BASE + M1_SLOPE_LOG * (dim as f64).ln()
}

fn checked(m: Moment, index: usize, summand: &SummandSpec, what: &str) -> Result<Moment> {
    if m.value.is_finite() && m.value >= 0.0 {
        Ok(m)
    } else {
        Err(Error::MissingMoment {
            summand: summand.name.clone(),
            index,
            what: what.to_string(),
        })
    }
}

/// Evaluates `g` once per run of identical consecutive summands.
fn per_summand<G>(model: &SumModel, seed: u64, what: &str, g: G) -> Result<(Vec<f64>, Vec<Provenance>)>
where
    G: Fn(&SummandSpec, u64) -> Result<Moment>,
{
    let summands = model.summands();
    let mut values = Vec::with_capacity(summands.len());
    let mut prov = Vec::with_capacity(summands.len());
    let mut cached: Option<(usize, Moment)> = None;
    for (i, s) in summands.iter().enumerate() {
        let m = match cached {
            Some((j, m)) if summands[j] == *s => m,
            _ => {
                let m = checked(g(s, mc::mix_seed(seed, i as u64))?, i, s, what)?;
                cached = Some((i, m));
                m
            }
        };
        values.push(m.value);
        prov.push(m.provenance);
    }
    Ok((values, prov))
}

fn report(which: BoundKind, model: &SumModel, values: Vec<f64>, provenance: Vec<Provenance>) -> BoundReport {
    let total = values.iter().sum();
    BoundReport {
        which,
        per_summand: values,
        total,
        mr_budget: 1.0,
        dim: model.dim(),
        provenance,
    }
}

/// Seed used for Monte Carlo moments when none is given.
pub const MOMENT_SEED: u64 = 0x6d6f_6d65_6e74;

pub fn bound_m3(model: &SumModel) -> Result<BoundReport> {
    bound_m3_seeded(model, MOMENT_SEED)
}

pub fn bound_m3_seeded(model: &SumModel, seed: u64) -> Result<BoundReport> {
    let (v, p) = per_summand(model, seed, "E|X|^3", |s, sd| {
        let m = s.m3(sd)?;
        Ok(Moment {
            value: 0.5 * m.value,
            provenance: m.provenance,
        })
    })?;
    Ok(report(BoundKind::M3, model, v, p))
}

pub fn bound_m2(model: &SumModel) -> Result<BoundReport> {
    bound_m2_seeded(model, MOMENT_SEED)
}

pub fn bound_m2_seeded(model: &SumModel, seed: u64) -> Result<BoundReport> {
    let (v, p) = per_summand(model, seed, "E[|X|^2 min{a, b|X|}]", |s, sd| {
        s.min_moment(M2_CAP, M2_SLOPE, sd)
    })?;
    Ok(report(BoundKind::M2, model, v, p))
}

pub fn bound_m1(model: &SumModel) -> Result<BoundReport> {
    bound_m1_seeded(model, MOMENT_SEED)
}

pub fn bound_m1_seeded(model: &SumModel, seed: u64) -> Result<BoundReport> {
    let slope = m1_slope(model.dim());
    let (v, p) = per_summand(model, seed, "E[|X|^2 min{a, b|X|}]", |s, sd| {
        s.min_moment(M1_CAP, slope, sd)
    })?;
    Ok(report(BoundKind::M1, model, v, p))
}

pub fn bound(model: &SumModel, which: BoundKind) -> Result<BoundReport> {
    match which {
        BoundKind::M1 => bound_m1(model),
        BoundKind::M2 => bound_m2(model),
        BoundKind::M3 => bound_m3(model),
    }
}

/// `h_{a,b}(u)`: `b u^{3/2}` below the knot `a²/b²`, `(3/2) a u - a³/(2b²)` above.
pub fn h_ab(a: f64, b: f64, u: f64) -> f64 {
    if b == 0.0 {
        return 0.0;
    }
    let knot = a * a / (b * b);
    if u <= knot {
        b * u.powf(1.5)
    } else {
        1.5 * a * u - a * a * a / (2.0 * b * b)
    }
}

/// Distribution-level truncated moment next to its moment-only envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    /// `E[|X|² min{a, b|X|}]`.
    pub distribution: Moment,
    /// `h_{a,b}(m2)`.
    pub envelope: f64,
    /// `E[h_{a,b}(|X|²)]`.
    pub expected_h: Moment,
}

pub fn min_moment_envelope(a: f64, b: f64, m2: f64, law: &SummandSpec) -> Result<Envelope> {
    if !(a >= 0.0 && b >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "envelope parameters must be nonnegative, got a={a}, b={b}"
        )));
    }
    let distribution = law.min_moment(a, b, MOMENT_SEED)?;
    let kinks: Vec<f64> = if b > 0.0 { vec![a / b] } else { vec![] };
    let expected_h = law.radial_expectation(|r| h_ab(a, b, r * r), &kinks, MOMENT_SEED)?;
    Ok(Envelope {
        distribution,
        envelope: h_ab(a, b, m2),
        expected_h,
    })
}

#[derive(Debug, Clone, PartialEq)]
struct Group {
    spec: SummandSpec,
    count: usize,
    m1: f64,
    m2: f64,
    m3: f64,
}

/// The chain of upper bounds on the β quantities for the independent-sum
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaSet {
    groups: Vec<Group>,
    seed: u64,
    /// `(3/2) Σ E|X_i|³`.
    pub beta3: f64,
}

pub fn beta_chain(model: &SumModel, seed: u64) -> Result<BetaSet> {
    let mut groups: Vec<Group> = Vec::new();
    for (i, s) in model.summands().iter().enumerate() {
        if let Some(g) = groups.last_mut() {
            if g.spec == *s {
                g.count += 1;
                continue;
            }
        }
        let sd = mc::mix_seed(seed, i as u64);
        groups.push(Group {
            spec: s.clone(),
            count: 1,
            m1: checked(s.m1(sd)?, i, s, "E|X|")?.value,
            m2: checked(s.m2(sd)?, i, s, "E|X|^2")?.value,
            m3: checked(s.m3(sd)?, i, s, "E|X|^3")?.value,
        });
    }
    let beta3 = 1.5 * groups.iter().map(|g| g.count as f64 * g.m3).sum::<f64>();
    Ok(BetaSet { groups, seed, beta3 })
}

impl BetaSet {
    fn summand_index(&self, i: usize) -> Result<&Group> {
        let mut seen = 0;
        for g in &self.groups {
            if i < seen + g.count {
                return Ok(g);
            }
            seen += g.count;
        }
        Err(Error::InvalidArgument(format!("summand index {i} out of range ({seen} summands)")))
    }

    /// `E|X_i| + |x|`.
    pub fn beta1(&self, i: usize, x_norm: f64) -> Result<f64> {
        Ok(self.summand_index(i)?.m1 + x_norm)
    }

    /// `(3√m₂ + |x|)(√m₂ + |x|) / 2`.
    pub fn beta2(&self, i: usize, x_norm: f64) -> Result<f64> {
        let s = self.summand_index(i)?.m2.sqrt();
        Ok(0.5 * (3.0 * s + x_norm) * (s + x_norm))
    }

    /// `(5/4)√m₂ + (3/4)|x|`, an upper bound on `√β₂`.
    pub fn sqrt_beta2(&self, i: usize, x_norm: f64) -> Result<f64> {
        Ok(1.25 * self.summand_index(i)?.m2.sqrt() + 0.75 * x_norm)
    }

    fn sum_groups<G: Fn(&Group, u64) -> Result<f64>>(&self, g: G) -> Result<f64> {
        let mut total = 0.0;
        for (k, grp) in self.groups.iter().enumerate() {
            total += grp.count as f64 * g(grp, mc::mix_seed(self.seed, k as u64))?;
        }
        Ok(total)
    }

    /// `Σ E[|X_i|² min{a, b E|X_i| + (b/2)|X_i|}]`.
    pub fn beta23(&self, a: f64, b: f64) -> Result<f64> {
        self.sum_groups(|g, sd| Ok(g.spec.affine_min_moment(a, b * g.m1, 0.5 * b, sd)?.value))
    }

    /// `Σ E[|X_i|² min{a, (b + 5c/4)√m₂ + (b/2 + 3c/8)|X_i|}]`.
    pub fn beta234(&self, a: f64, b: f64, c: f64) -> Result<f64> {
        self.sum_groups(|g, sd| {
            Ok(g.spec
                .affine_min_moment(a, (b + 1.25 * c) * g.m2.sqrt(), 0.5 * b + 0.375 * c, sd)?
                .value)
        })
    }

    /// `Σ E[|X_i|² min{5a/2, (3b/2)|X_i|}]`.
    pub fn beta23_lindeberg(&self, a: f64, b: f64) -> Result<f64> {
        self.sum_groups(|g, sd| Ok(g.spec.min_moment(2.5 * a, 1.5 * b, sd)?.value))
    }

    /// `Σ E[|X_i|² min{5a/2, (3b/2 + 13c/8)|X_i|}]`.
    pub fn beta234_lindeberg(&self, a: f64, b: f64, c: f64) -> Result<f64> {
        self.sum_groups(|g, sd| Ok(g.spec.min_moment(2.5 * a, 1.5 * b + 1.625 * c, sd)?.value))
    }

    /// `Σ E|X_i|²`, the mass of the mixture.
    pub fn mass(&self) -> f64 {
        self.groups.iter().map(|g| g.count as f64 * g.m2).sum()
    }
}
