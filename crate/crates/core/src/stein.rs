//! Stein operator, Slepian interpolation `U_α f(w) = N_{sin α} f(w cos α)`,
//! and the one-dimensional integral estimates used to close the bounds.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::function::TestFunction;
use crate::mc::{self, McEstimate, Welford};
use crate::quadrature;
use crate::sampler::Sampler;
use crate::smoothing::{smooth, SmoothingConstants};
use crate::tensor::dot;

/// `S f(w) = Δf(w) - <∇f(w), w>`.
pub fn stein_apply<F: TestFunction + ?Sized>(f: &F, w: &[f64]) -> Result<f64> {
    if w.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: w.len(),
        });
    }
    let mut g = vec![0.0; w.len()];
    f.gradient_into(w, &mut g)?;
    Ok(f.laplacian(w)? - dot(&g, w))
}

/// A point on the interpolation path, `0 <= alpha <= π/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationPoint {
    alpha: f64,
}

impl InterpolationPoint {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&alpha) {
            return Err(Error::InvalidArgument(format!(
                "interpolation angle must lie in [0, π/2], got {alpha}"
            )));
        }
        Ok(InterpolationPoint { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `(cos α, sin α)` with the endpoints exact.
    pub fn cos_sin(&self) -> (f64, f64) {
        if self.alpha == 0.0 {
            (1.0, 0.0)
        } else if self.alpha == FRAC_PI_2 {
            (0.0, 1.0)
        } else {
            (self.alpha.cos(), self.alpha.sin())
        }
    }
}

/// Monte Carlo `U_α f(w)`. `α = 0` gives `f(w)` exactly; at `α = π/2` the
/// point is the origin, so the estimate is `N f` regardless of `w`.
pub fn u_alpha<F: TestFunction + ?Sized>(
    f: &F,
    alpha: f64,
    w: &[f64],
    mc_n: usize,
    seed: u64,
) -> Result<McEstimate> {
    let point = InterpolationPoint::new(alpha)?;
    let (c, s) = point.cos_sin();
    let x: Vec<f64> = w.iter().map(|v| v * c).collect();
    smooth(f, s, &x, mc_n, seed)
}

/// Outcome of the interpolation-identity check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlepianResidual {
    /// `|E U_ε f(W) - N f + ∫_ε^{π/2} E[S U_α f(W)] tan α dα|`.
    pub residual: f64,
    /// Standard error of the signed residual.
    pub se: f64,
}

impl SlepianResidual {
    pub fn z(&self) -> f64 {
        McEstimate {
            mean: self.residual,
            se: self.se,
            n: 0,
        }
        .z_score(0.0)
    }
}

/// Monte Carlo check of
/// `E U_ε f(W) - N f = -∫_ε^{π/2} E[S U_α f(W)] tan α dα`.
///
/// With `t = cos α` the weighted integrand becomes
/// `E[t Δf(tW + √(1-t²) Z) - <∇f(tW + √(1-t²) Z), W>]` on `[0, cos ε]`, which
/// is bounded; it is integrated with an `n_alpha`-node Gauss–Legendre rule.
/// Each draw of `(W, Z)` yields one sample of the full signed residual.
pub fn slepian_residual<F, S>(
    f: &F,
    sampler: &S,
    eps: f64,
    n_alpha: usize,
    mc_n: usize,
    seed: u64,
) -> Result<SlepianResidual>
where
    F: TestFunction + ?Sized,
    S: Sampler + ?Sized,
{
    if !(eps > 0.0 && eps <= FRAC_PI_2) {
        return Err(Error::InvalidArgument(format!(
            "start angle must lie in (0, π/2], got {eps}"
        )));
    }
    if n_alpha < 8 {
        return Err(Error::InvalidArgument(format!(
            "need at least 8 angle nodes, got {n_alpha}"
        )));
    }
    if sampler.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: sampler.dim(),
        });
    }
    let d = f.dim();
    let start = InterpolationPoint::new(eps)?;
    let (ce, se) = start.cos_sin();
    let rule = quadrature::mapped_rule(0.0, ce, n_alpha);
    let parts = mc::chunked(mc_n, seed, Welford::default, |r, count, acc| {
        let mut w = vec![0.0; d];
        let mut z = vec![0.0; d];
        let mut p = vec![0.0; d];
        let mut g = vec![0.0; d];
        for _ in 0..count {
            sampler.sample(r, &mut w);
            mc::fill_normal(r, &mut z);
            for k in 0..d {
                p[k] = ce * w[k] + se * z[k];
            }
            let mut y = f.eval(&p) - f.eval(&z);
            for &(t, wt) in &rule {
                let st = (1.0 - t * t).max(0.0).sqrt();
                for k in 0..d {
                    p[k] = t * w[k] + st * z[k];
                }
                // closed-form fast paths never fail; fall back to NaN otherwise
                let lap = f.laplacian(&p).unwrap_or(f64::NAN);
                if f.gradient_into(&p, &mut g).is_err() {
                    g.iter_mut().for_each(|v| *v = f64::NAN);
                }
                y += wt * (t * lap - dot(&g, &w));
            }
            acc.push(y);
        }
    });
    let mut total = Welford::default();
    parts.iter().for_each(|p| total.merge(p));
    let est = total.estimate();
    if !est.mean.is_finite() {
        return Err(Error::MissingDerivative {
            function: f.name(),
            order: 2,
        });
    }
    Ok(SlepianResidual {
        residual: est.mean.abs(),
        se: est.se,
    })
}

/// Both sides of the closed estimate
/// `∫_0^{π/2} min{2c₁, c₃β₂/sin²α} cos α dα <= 2√(2c₁c₃β₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircumCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl CircumCheck {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

/// Default absolute tolerance for the α-quadratures.
pub const ANGLE_QUAD_TOL: f64 = 1e-10;

pub fn circum_bound_check(beta2: f64) -> Result<CircumCheck> {
    circum_bound_check_with(beta2, &SmoothingConstants::closed_form(), ANGLE_QUAD_TOL)
}

pub fn circum_bound_check_with(beta2: f64, consts: &SmoothingConstants, tol: f64) -> Result<CircumCheck> {
    if !(beta2 >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "beta2 must be nonnegative, got {beta2}"
        )));
    }
    let (c1, c3) = (consts.c[1], consts.c[3]);
    let rhs = 2.0 * (2.0 * c1 * c3 * beta2).sqrt();
    if beta2 == 0.0 {
        return Ok(CircumCheck { lhs: 0.0, rhs });
    }
    let cap = 2.0 * c1;
    let integrand = |a: f64| {
        let s = a.sin();
        let tail = c3 * beta2 / (s * s);
        // tail is +inf at α = 0; the min keeps the cap
        cap.min(tail) * a.cos()
    };
    // kink where c₃β₂ / sin²α = 2c₁
    let knot = (c3 * beta2 / cap).sqrt();
    let mut pts = vec![0.0];
    if knot < 1.0 {
        pts.push(knot.asin());
    }
    pts.push(FRAC_PI_2);
    let lhs = quadrature::adaptive_with_breaks(integrand, &pts, tol)?;
    Ok(CircumCheck { lhs, rhs })
}

/// Closed-form envelope
/// `c₂ [1 + (log(c₃ δ / (2 c₂ sin(ε/2))))₊]` of
/// `∫_ε^{π/2} min{c₂ cos²α / sin α, c₃ δ cos³α / sin²α} dα`.
pub fn log_envelope_integral(delta: f64, eps: f64) -> Result<f64> {
    log_envelope_integral_with(delta, eps, &SmoothingConstants::closed_form())
}

pub fn log_envelope_integral_with(delta: f64, eps: f64, consts: &SmoothingConstants) -> Result<f64> {
    check_envelope_args(delta, eps)?;
    let (c2, c3) = (consts.c[2], consts.c[3]);
    if delta == 0.0 {
        return Ok(c2);
    }
    let log = (c3 * delta / (2.0 * c2 * (0.5 * eps).sin())).ln();
    Ok(c2 * (1.0 + log.max(0.0)))
}

fn check_envelope_args(delta: f64, eps: f64) -> Result<()> {
    if !(delta >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "delta must be nonnegative, got {delta}"
        )));
    }
    if !(eps > 0.0 && eps < std::f64::consts::PI) {
        return Err(Error::InvalidArgument(format!(
            "eps must lie in (0, π), got {eps}"
        )));
    }
    Ok(())
}

/// The integral bounded by [`log_envelope_integral`], by adaptive quadrature.
/// Zero when `ε >= π/2`.
pub fn log_envelope_quadrature(delta: f64, eps: f64, tol: f64) -> Result<f64> {
    check_envelope_args(delta, eps)?;
    if eps >= FRAC_PI_2 || delta == 0.0 {
        return Ok(0.0);
    }
    let consts = SmoothingConstants::closed_form();
    let (c2, c3) = (consts.c[2], consts.c[3]);
    let integrand = |a: f64| {
        let (s, c) = a.sin_cos();
        (c2 * c * c / s).min(c3 * delta * c * c * c / (s * s))
    };
    let knot = (c3 * delta / c2).atan();
    let mut pts = vec![eps];
    if knot > eps && knot < FRAC_PI_2 {
        pts.push(knot);
    }
    pts.push(FRAC_PI_2);
    quadrature::adaptive_with_breaks(integrand, &pts, tol)
}

/// Monte Carlo `D f = E f(W) - E f(V)`. Both laws are sampled from
/// identically seeded streams, so identical samplers give exactly zero.
pub fn d_xi<F, SW, SV>(f: &F, w_sampler: &SW, v_sampler: &SV, mc_n: usize, seed: u64) -> Result<McEstimate>
where
    F: TestFunction + ?Sized,
    SW: Sampler + ?Sized,
    SV: Sampler + ?Sized,
{
    let d = f.dim();
    if w_sampler.dim() != d || v_sampler.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: if w_sampler.dim() != d {
                w_sampler.dim()
            } else {
                v_sampler.dim()
            },
        });
    }
    let parts = mc::chunked(
        mc_n,
        seed,
        Welford::default,
        |r, count, acc| {
            let mut rv = r.clone();
            let mut w = vec![0.0; d];
            let mut v = vec![0.0; d];
            for _ in 0..count {
                w_sampler.sample(r, &mut w);
                v_sampler.sample(&mut rv, &mut v);
                acc.push(f.eval(&w) - f.eval(&v));
            }
        },
    );
    let mut total = Welford::default();
    parts.iter().for_each(|p| total.merge(p));
    Ok(total.estimate())
}
