//! Gauss–Legendre rules and an adaptive bisection integrator built on them.

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let pn = if n == 0 { 1.0 } else { p1 };
    let pnm1 = if n == 0 { 0.0 } else { p0 };
    let d = n as f64 * (x * pn - pnm1) / (x * x - 1.0);
    (pn, d)
}

/// Fixed rule on `[a, b]`.
pub fn integrate_fixed<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> f64 {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter()
        .zip(&w)
        .map(|(&xi, &wi)| wi * f(mid + half * xi))
        .sum::<f64>()
        * half
}

/// Mapped nodes and weights of the `n`-point rule on `[a, b]`.
pub fn mapped_rule(a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter()
        .zip(&w)
        .map(|(&xi, &wi)| (mid + half * xi, wi * half))
        .collect()
}

const ADAPTIVE_ORDER: usize = 10;
const MAX_DEPTH: u32 = 60;
/// Panels whose two estimates agree to this multiple of the panel's absolute
/// mass are accepted regardless of `tol`: beyond it the difference is roundoff.
const ROUNDOFF: f64 = 64.0 * f64::EPSILON;

/// Adaptive Gauss–Legendre integration to absolute tolerance `tol`.
///
/// Each panel is accepted when the 10-point rule on the panel agrees with the
/// sum of the 10-point rules on its halves, to within its share of `tol` or
/// to roundoff, whichever is larger.
pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "integration limits must be finite, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return adaptive(f, b, a, tol).map(|v| -v);
    }
    let rule = gauss_legendre(ADAPTIVE_ORDER);
    let panel = |lo: f64, hi: f64| -> (f64, f64) {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (lo + hi);
        let (mut v, mut mass) = (0.0, 0.0);
        for (&x, &w) in rule.0.iter().zip(&rule.1) {
            let y = w * f(mid + half * x);
            v += y;
            mass += y.abs();
        }
        (v * half, mass * half)
    };
    let whole = panel(a, b).0;
    let mut failed = false;
    let value = refine(&panel, a, b, whole, tol, 0, &mut failed);
    if failed || !value.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "adaptive quadrature on [{a}, {b}] did not reach tolerance {tol}"
        )));
    }
    Ok(value)
}

fn refine<P: Fn(f64, f64) -> (f64, f64)>(
    panel: &P,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    failed: &mut bool,
) -> f64 {
    let m = 0.5 * (a + b);
    let (left, lmass) = panel(a, m);
    let (right, rmass) = panel(m, b);
    let split = left + right;
    let accept = tol.max(ROUNDOFF * (lmass + rmass));
    if (split - whole).abs() <= accept || depth >= MAX_DEPTH {
        if depth >= MAX_DEPTH && (split - whole).abs() > accept {
            *failed = true;
        }
        return split;
    }
    refine(panel, a, m, left, 0.5 * tol, depth + 1, failed)
        + refine(panel, m, b, right, 0.5 * tol, depth + 1, failed)
}

/// Adaptive integration over consecutive panels `[p0, p1], [p1, p2], ...`,
/// which lets callers split at known kinks of the integrand.
pub fn adaptive_with_breaks<F: Fn(f64) -> f64>(f: F, points: &[f64], tol: f64) -> Result<f64> {
    if points.len() < 2 {
        return Ok(0.0);
    }
    let panels = (points.len() - 1) as f64;
    let mut total = 0.0;
    for w in points.windows(2) {
        total += adaptive(&f, w[0], w[1], tol / panels)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        // n-point rule is exact up to degree 2n-1.
        let v = integrate_fixed(|x| x.powi(9) + 3.0 * x.powi(4), -1.0, 2.0, 5);
        let exact = (2f64.powi(10) - 1.0) / 10.0 + 3.0 * (32.0 + 1.0) / 5.0;
        assert!((v - exact).abs() < 1e-11, "{v} vs {exact}");
    }

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 7, 16, 40] {
            let (_, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn adaptive_handles_kink() {
        let v = adaptive_with_breaks(|x: f64| x.abs(), &[-1.0, 0.0, 2.0], 1e-12).unwrap();
        assert!((v - 2.5).abs() < 1e-12);
        let v = adaptive(|x: f64| x.abs(), -1.0, 2.0, 1e-10).unwrap();
        assert!((v - 2.5).abs() < 1e-10);
    }

    #[test]
    fn adaptive_reversed_limits() {
        let v = adaptive(|x: f64| x.exp(), 1.0, 0.0, 1e-12).unwrap();
        assert!((v + (1f64.exp() - 1.0)).abs() < 1e-12);
    }
}
