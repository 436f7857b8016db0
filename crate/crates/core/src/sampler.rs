//! Random-vector samplers.

use std::fmt;
use std::sync::Arc;

use crate::mc::{self, Rng};

/// Draws points of `R^d` from a fixed law.
pub trait Sampler: Send + Sync {
    fn dim(&self) -> usize;
    fn sample(&self, rng: &mut Rng, out: &mut [f64]);
}

impl<S: Sampler + ?Sized> Sampler for Arc<S> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn sample(&self, rng: &mut Rng, out: &mut [f64]) {
        (**self).sample(rng, out)
    }
}

impl<S: Sampler + ?Sized> Sampler for &S {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn sample(&self, rng: &mut Rng, out: &mut [f64]) {
        (**self).sample(rng, out)
    }
}

/// `N(0, I_d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardNormal {
    pub dim: usize,
}

impl Sampler for StandardNormal {
    fn dim(&self) -> usize {
        self.dim
    }
    fn sample(&self, rng: &mut Rng, out: &mut [f64]) {
        mc::fill_normal(rng, out);
    }
}

/// `X + shift`.
#[derive(Debug, Clone, PartialEq)]
pub struct Shifted<S> {
    pub inner: S,
    pub shift: Vec<f64>,
}

impl<S: Sampler> Sampler for Shifted<S> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn sample(&self, rng: &mut Rng, out: &mut [f64]) {
        self.inner.sample(rng, out);
        out.iter_mut().zip(&self.shift).for_each(|(o, s)| *o += s);
    }
}

/// Shared closure writing one draw into its output slice.
pub type DrawFn = Arc<dyn Fn(&mut Rng, &mut [f64]) + Send + Sync>;

/// A sampler given by a closure.
#[derive(Clone)]
pub struct FnSampler {
    dim: usize,
    f: DrawFn,
}

impl FnSampler {
    pub fn new<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&mut Rng, &mut [f64]) + Send + Sync + 'static,
    {
        FnSampler { dim, f: Arc::new(f) }
    }
}

impl fmt::Debug for FnSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnSampler").field("dim", &self.dim).finish()
    }
}

impl Sampler for FnSampler {
    fn dim(&self) -> usize {
        self.dim
    }
    fn sample(&self, rng: &mut Rng, out: &mut [f64]) {
        (self.f)(rng, out)
    }
}
