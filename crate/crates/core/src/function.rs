//! Test functions `f: R^d -> R` with derivative oracles up to order 4.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::tensor::{dot, norm, SymTensor};

/// Highest derivative order any oracle provides.
pub const MAX_ORDER: usize = 4;

/// Where a derivative value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeSource {
    ClosedForm,
    FiniteDifference,
}

/// A scalar function on `R^d` together with what is known about its
/// derivatives and its `M_r` seminorms.
pub trait TestFunction: Send + Sync {
    fn name(&self) -> String;
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> f64;

    /// Closed-form `∇^order f(x)`, `1 <= order <= 4`, if the function has one.
    fn closed_derivative(&self, _order: usize, _x: &[f64]) -> Option<SymTensor> {
        None
    }

    /// Known value (or upper bound) of `M_r(f)`: the Lipschitz constant of
    /// `∇^{r-1} f` in the injective norm. `None` when unknown or infinite.
    fn declared_m(&self, _r: usize) -> Option<f64> {
        None
    }

    /// Fast path for `∇f(x)`; defaults to the order-1 oracle.
    fn gradient_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let (g, _) = derivative(self, 1, x)?;
        out.copy_from_slice(g.entries());
        Ok(())
    }

    /// Fast path for `Δf(x)`; defaults to the trace of the order-2 oracle.
    fn laplacian(&self, x: &[f64]) -> Result<f64> {
        let (h, _) = derivative(self, 2, x)?;
        Ok(h.trace2())
    }
}

/// `∇^order f(x)`, from the closed form when available and by central
/// differences otherwise (orders 1 and 2 only).
pub fn derivative<F: TestFunction + ?Sized>(
    f: &F,
    order: usize,
    x: &[f64],
) -> Result<(SymTensor, DerivativeSource)> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::InvalidArgument(format!(
            "derivative order must be in 1..={MAX_ORDER}, got {order}"
        )));
    }
    if x.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: x.len(),
        });
    }
    if let Some(t) = f.closed_derivative(order, x) {
        return Ok((t, DerivativeSource::ClosedForm));
    }
    match order {
        1 => Ok((fd_gradient(f, x)?, DerivativeSource::FiniteDifference)),
        2 => Ok((fd_hessian(f, x)?, DerivativeSource::FiniteDifference)),
        _ => Err(Error::MissingDerivative {
            function: f.name(),
            order,
        }),
    }
}

/// Central-difference step at `x`.
pub fn fd_step(x: &[f64]) -> f64 {
    1e-4 * (1.0 + norm(x))
}

fn fd_gradient<F: TestFunction + ?Sized>(f: &F, x: &[f64]) -> Result<SymTensor> {
    let h = fd_step(x);
    let d = x.len();
    let mut p = x.to_vec();
    let mut g = SymTensor::zeros(1, d)?;
    for i in 0..d {
        p[i] = x[i] + h;
        let fp = f.eval(&p);
        p[i] = x[i] - h;
        let fm = f.eval(&p);
        p[i] = x[i];
        g.entries_mut()[i] = (fp - fm) / (2.0 * h);
    }
    Ok(g)
}

fn fd_hessian<F: TestFunction + ?Sized>(f: &F, x: &[f64]) -> Result<SymTensor> {
    let h = fd_step(x);
    let d = x.len();
    let f0 = f.eval(x);
    let mut p = x.to_vec();
    SymTensor::from_fn(2, d, |idx| {
        let (i, j) = (idx[0], idx[1]);
        if i == j {
            p[i] = x[i] + h;
            let fp = f.eval(&p);
            p[i] = x[i] - h;
            let fm = f.eval(&p);
            p[i] = x[i];
            (fp - 2.0 * f0 + fm) / (h * h)
        } else {
            let mut at = |si: f64, sj: f64| {
                p[i] = x[i] + si * h;
                p[j] = x[j] + sj * h;
                let v = f.eval(&p);
                p[i] = x[i];
                p[j] = x[j];
                v
            };
            (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0)) / (4.0 * h * h)
        }
    })
}

/// One-dimensional profiles `g` for ridge functions `w -> g(<u, w>)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Linear,
    Cos,
    Sin,
    LogCosh,
    Cube,
}

impl Profile {
    /// `g^{(k)}(s)` for `0 <= k <= 4`.
    pub fn derivative(self, k: usize, s: f64) -> f64 {
        match self {
            Profile::Linear => match k {
                0 => s,
                1 => 1.0,
                _ => 0.0,
            },
            Profile::Cos => match k % 4 {
                0 => s.cos(),
                1 => -s.sin(),
                2 => -s.cos(),
                _ => s.sin(),
            },
            Profile::Sin => match k % 4 {
                0 => s.sin(),
                1 => s.cos(),
                2 => -s.sin(),
                _ => -s.cos(),
            },
            Profile::LogCosh => {
                let th = s.tanh();
                let sech2 = 1.0 - th * th;
                match k {
                    // log cosh s = |s| + log((1 + e^{-2|s|}) / 2), stable for large |s|
                    0 => s.abs() + (-2.0 * s.abs()).exp().ln_1p() - std::f64::consts::LN_2,
                    1 => th,
                    2 => sech2,
                    3 => -2.0 * sech2 * th,
                    _ => -2.0 * (sech2 * sech2 - 2.0 * sech2 * th * th),
                }
            }
            Profile::Cube => match k {
                0 => s * s * s,
                1 => 3.0 * s * s,
                2 => 6.0 * s,
                3 => 6.0,
                _ => 0.0,
            },
        }
    }

    /// `sup_s |g^{(k)}(s)|`, `None` if unbounded.
    pub fn sup_derivative(self, k: usize) -> Option<f64> {
        match self {
            Profile::Linear => match k {
                0 => None,
                1 => Some(1.0),
                _ => Some(0.0),
            },
            Profile::Cos | Profile::Sin => Some(1.0),
            Profile::LogCosh => match k {
                0 => None,
                1 | 2 => Some(1.0),
                3 => Some(4.0 / (3.0 * 3f64.sqrt())),
                _ => Some(2.0),
            },
            Profile::Cube => match k {
                0..=2 => None,
                3 => Some(6.0),
                _ => Some(0.0),
            },
        }
    }

    fn label(self) -> &'static str {
        match self {
            Profile::Linear => "linear",
            Profile::Cos => "cos",
            Profile::Sin => "sin",
            Profile::LogCosh => "logcosh",
            Profile::Cube => "cube",
        }
    }
}

/// `w -> g(<u, w>)`; `∇^r f(w) = g^{(r)}(<u, w>) u^{(x) r}` and
/// `M_r(f) = sup |g^{(r)}| |u|^r`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ridge {
    pub direction: Vec<f64>,
    pub profile: Profile,
}

impl Ridge {
    pub fn new(direction: Vec<f64>, profile: Profile) -> Self {
        Ridge { direction, profile }
    }
}

impl TestFunction for Ridge {
    fn name(&self) -> String {
        format!("{}-ridge(d={})", self.profile.label(), self.direction.len())
    }

    fn dim(&self) -> usize {
        self.direction.len()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.profile.derivative(0, dot(&self.direction, x))
    }

    fn closed_derivative(&self, order: usize, x: &[f64]) -> Option<SymTensor> {
        let c = self.profile.derivative(order, dot(&self.direction, x));
        SymTensor::tensor_power(&self.direction, order)
            .ok()
            .map(|t| t.scaled(c))
    }

    fn declared_m(&self, r: usize) -> Option<f64> {
        if r == 0 {
            return None;
        }
        self.profile
            .sup_derivative(r)
            .map(|s| s * norm(&self.direction).powi(r as i32))
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let c = self.profile.derivative(1, dot(&self.direction, x));
        for (o, u) in out.iter_mut().zip(&self.direction) {
            *o = c * u;
        }
        Ok(())
    }

    fn laplacian(&self, x: &[f64]) -> Result<f64> {
        let c = self.profile.derivative(2, dot(&self.direction, x));
        Ok(c * dot(&self.direction, &self.direction))
    }
}

/// `w -> ½ <A w, w> + <b, w> + c` for a symmetric matrix `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    matrix: SymTensor,
    linear: Vec<f64>,
    constant: f64,
    label: String,
}

impl Quadratic {
    pub fn new(matrix: SymTensor, linear: Vec<f64>, constant: f64, label: &str) -> Result<Self> {
        if matrix.order() != 2 {
            return Err(Error::InvalidArgument(
                "quadratic form needs an order-2 tensor".into(),
            ));
        }
        if linear.len() != matrix.dim() {
            return Err(Error::DimensionMismatch {
                expected: matrix.dim(),
                got: linear.len(),
            });
        }
        Ok(Quadratic {
            matrix,
            linear,
            constant,
            label: label.to_string(),
        })
    }

    /// `|w|^2`.
    pub fn squared_norm(dim: usize) -> Self {
        let a = SymTensor::identity(dim).expect("dim >= 1").scaled(2.0);
        Self::new(a, vec![0.0; dim], 0.0, "sqnorm").expect("consistent shapes")
    }

    /// `|w|^2 / 2`.
    pub fn half_squared_norm(dim: usize) -> Self {
        let a = SymTensor::identity(dim).expect("dim >= 1");
        Self::new(a, vec![0.0; dim], 0.0, "half-sqnorm").expect("consistent shapes")
    }

    /// `w_i w_j` for `i != j`.
    pub fn coordinate_product(dim: usize, i: usize, j: usize) -> Result<Self> {
        if i == j || i >= dim || j >= dim {
            return Err(Error::InvalidArgument(format!(
                "coordinate product needs distinct indices below {dim}"
            )));
        }
        let mut a = SymTensor::zeros(2, dim)?;
        a.set(&[i, j], 1.0);
        Self::new(a, vec![0.0; dim], 0.0, "coord-product")
    }

    /// Constant function.
    pub fn constant(dim: usize, c: f64) -> Self {
        let a = SymTensor::zeros(2, dim).expect("dim >= 1");
        Self::new(a, vec![0.0; dim], c, "constant").expect("consistent shapes")
    }

    fn apply_matrix(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.contract_all_but_one(x)
    }
}

impl TestFunction for Quadratic {
    fn name(&self) -> String {
        format!("{}(d={})", self.label, self.matrix.dim())
    }

    fn dim(&self) -> usize {
        self.matrix.dim()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        0.5 * self.matrix.pure_form(x) + dot(&self.linear, x) + self.constant
    }

    fn closed_derivative(&self, order: usize, x: &[f64]) -> Option<SymTensor> {
        match order {
            1 => {
                let mut g = self.apply_matrix(x);
                g.iter_mut().zip(&self.linear).for_each(|(gi, bi)| *gi += bi);
                SymTensor::from_fn(1, self.dim(), |i| g[i[0]]).ok()
            }
            2 => Some(self.matrix.clone()),
            k => SymTensor::zeros(k, self.dim()).ok(),
        }
    }

    fn declared_m(&self, r: usize) -> Option<f64> {
        match r {
            0 => None,
            1 => {
                if self.matrix.entries().iter().all(|&a| a == 0.0) {
                    Some(norm(&self.linear))
                } else {
                    None
                }
            }
            2 => Some(self.matrix.injective_norm_default()),
            _ => Some(0.0),
        }
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let g = self.apply_matrix(x);
        for ((o, gi), bi) in out.iter_mut().zip(g).zip(&self.linear) {
            *o = gi + bi;
        }
        Ok(())
    }

    fn laplacian(&self, _x: &[f64]) -> Result<f64> {
        Ok(self.matrix.trace2())
    }
}

/// A function given only by evaluation; derivatives of order 1–2 come from
/// central differences.
type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct FnFunction {
    name: String,
    dim: usize,
    f: ScalarFn,
    declared: [Option<f64>; MAX_ORDER + 1],
}

impl FnFunction {
    pub fn new<F>(name: &str, dim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        FnFunction {
            name: name.to_string(),
            dim,
            f: Arc::new(f),
            declared: [None; MAX_ORDER + 1],
        }
    }

    pub fn with_declared_m(mut self, r: usize, value: f64) -> Self {
        if r <= MAX_ORDER {
            self.declared[r] = Some(value);
        }
        self
    }
}

impl fmt::Debug for FnFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnFunction")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .finish()
    }
}

impl TestFunction for FnFunction {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn declared_m(&self, r: usize) -> Option<f64> {
        self.declared.get(r).copied().flatten()
    }
}

impl<T: TestFunction + ?Sized> TestFunction for Arc<T> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (**self).eval(x)
    }
    fn closed_derivative(&self, order: usize, x: &[f64]) -> Option<SymTensor> {
        (**self).closed_derivative(order, x)
    }
    fn declared_m(&self, r: usize) -> Option<f64> {
        (**self).declared_m(r)
    }
    fn gradient_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        (**self).gradient_into(x, out)
    }
    fn laplacian(&self, x: &[f64]) -> Result<f64> {
        (**self).laplacian(x)
    }
}

/// A fixed unit direction in `R^d` with all coordinates nonzero, used to
/// build ridge functions that are not axis-aligned.
pub fn oblique_direction(dim: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..dim).map(|i| 1.0 + 0.5 * i as f64).collect();
    let n = norm(&raw);
    raw.into_iter().map(|x| x / n).collect()
}

/// The six-function battery used by the identity checks: a quadratic, a
/// linear form, and cos, sin, log-cosh and cubic ridges.
pub fn battery(dim: usize) -> Vec<Arc<dyn TestFunction>> {
    let u = oblique_direction(dim);
    vec![
        Arc::new(Quadratic::squared_norm(dim)),
        Arc::new(Ridge::new(u.clone(), Profile::Linear)),
        Arc::new(Ridge::new(u.clone(), Profile::Cos)),
        Arc::new(Ridge::new(u.clone(), Profile::Sin)),
        Arc::new(Ridge::new(u.clone(), Profile::LogCosh)),
        Arc::new(Ridge::new(u, Profile::Cube)),
    ]
}

/// Battery members with finite declared `M_1`.
pub fn lipschitz_battery(dim: usize) -> Vec<Arc<dyn TestFunction>> {
    let u = oblique_direction(dim);
    vec![
        Arc::new(Ridge::new(u.clone(), Profile::Linear)),
        Arc::new(Ridge::new(u.clone(), Profile::Cos)),
        Arc::new(Ridge::new(u.clone(), Profile::Sin)),
        Arc::new(Ridge::new(u, Profile::LogCosh)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc;

    fn random_points(dim: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut r = mc::rng(seed);
        (0..n)
            .map(|_| {
                let mut p = vec![0.0; dim];
                mc::fill_normal(&mut r, &mut p);
                p
            })
            .collect()
    }

    #[test]
    fn closed_gradients_match_finite_differences() {
        for dim in 1..=3 {
            for f in battery(dim) {
                let fd = FnFunction::new("fd", dim, {
                    let f = f.clone();
                    move |x| f.eval(x)
                });
                for x in random_points(dim, 20, 11) {
                    let (g, src) = derivative(&*f, 1, &x).unwrap();
                    assert_eq!(src, DerivativeSource::ClosedForm);
                    let (gfd, src) = derivative(&fd, 1, &x).unwrap();
                    assert_eq!(src, DerivativeSource::FiniteDifference);
                    for (a, b) in g.entries().iter().zip(gfd.entries()) {
                        assert!(
                            (a - b).abs() <= 1e-5 * (1.0 + a.abs()),
                            "{}: {a} vs {b}",
                            f.name()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn higher_closed_derivatives_match_differences_of_lower() {
        let dim = 2;
        for f in battery(dim) {
            for x in random_points(dim, 5, 3) {
                for order in 2..=4 {
                    let (t, _) = derivative(&*f, order, &x).unwrap();
                    let h = 1e-5;
                    for j in 0..dim {
                        let mut p = x.clone();
                        p[j] += h;
                        let (up, _) = derivative(&*f, order - 1, &p).unwrap();
                        p[j] -= 2.0 * h;
                        let (dn, _) = derivative(&*f, order - 1, &p).unwrap();
                        for (idx, _, _) in up.canonical() {
                            let fd = (up.get(&idx) - dn.get(&idx)) / (2.0 * h);
                            let mut full = idx.clone();
                            full.push(j);
                            let exact = t.get(&full);
                            assert!(
                                (fd - exact).abs() < 1e-5 * (1.0 + exact.abs()),
                                "{} order {order}: {fd} vs {exact}",
                                f.name()
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn missing_high_order_oracle_is_an_error() {
        let f = FnFunction::new("opaque", 2, |x| x[0].exp() + x[1]);
        assert!(derivative(&f, 2, &[0.1, 0.2]).is_ok());
        assert!(matches!(
            derivative(&f, 3, &[0.1, 0.2]),
            Err(Error::MissingDerivative { order: 3, .. })
        ));
    }

    #[test]
    fn logcosh_sup_values() {
        // sup of 2 sech^2 tanh is at tanh^2 = 1/3
        let s = (1.0f64 / 3f64.sqrt()).atanh();
        let v = Profile::LogCosh.derivative(3, s).abs();
        assert!((v - 4.0 / (3.0 * 3f64.sqrt())).abs() < 1e-14);
        assert_eq!(Profile::LogCosh.derivative(4, 0.0).abs(), 2.0);
        assert!(Profile::LogCosh.derivative(0, 800.0).is_finite());
    }

    #[test]
    fn quadratic_declared_m2_is_spectral_radius() {
        let q = Quadratic::coordinate_product(2, 0, 1).unwrap();
        assert!((q.declared_m(2).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(q.eval(&[1.0, 1.0]), 1.0);
        assert!((Quadratic::squared_norm(3).declared_m(2).unwrap() - 2.0).abs() < 1e-12);
    }
}
