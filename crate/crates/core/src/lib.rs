//! Explicit error bounds for the multivariate normal approximation of sums of
//! independent random vectors, with the numerical machinery to check them:
//! Gaussian smoothing, the Stein operator along the Slepian path, bias
//! transforms, and exact empirical Wasserstein-1 distances.

// `!(x > 0.0)`-style guards are deliberate: they reject NaN along with the
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bias;
pub mod bounds;
pub mod error;
pub mod experiment;
pub mod function;
pub mod laws;
pub mod mc;
pub mod quadrature;
pub mod sampler;
pub mod smoothing;
pub mod stein;
pub mod tensor;
pub mod wasserstein;

pub use bias::{Family, MuBreveMixture, NuMixture, SumModel};
pub use bounds::{bound_m1, bound_m2, bound_m3, BoundKind, BoundReport};
pub use error::{Error, Result};
pub use function::TestFunction;
pub use laws::{Coordinate, SummandSpec};
pub use sampler::Sampler;
pub use tensor::{SymTensor, UnitVector};
pub use wasserstein::{w1_estimate, w1_exact, EmpiricalMeasure, W1Estimate};
