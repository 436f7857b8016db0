//! Seeded Monte Carlo plumbing.
//!
//! Every sampled quantity in the crate goes through [`chunked`]: the sample
//! stream is cut into chunks of [`CHUNK`] draws, chunk `k` gets its own
//! generator seeded from `(seed, k)`, and the per-chunk accumulators are merged
//! in chunk order. Results therefore do not depend on the rayon pool size.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

pub type Rng = ChaCha8Rng;

/// Draws per chunk.
pub const CHUNK: usize = 4096;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for sub-stream `stream` of `seed`.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream.wrapping_add(0xA076_1D64_78BD_642F)))
}

/// Stable seed derived from a master seed and a sequence of byte labels.
pub fn derive_seed(master: u64, parts: &[&[u8]]) -> u64 {
    // FNV-1a over the labels, with a separator so ("ab","c") != ("a","bc").
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for part in parts {
        for &b in part.iter().chain(std::iter::once(&0xFFu8)) {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01B3);
        }
    }
    mix_seed(master, h)
}

pub fn rng(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn fill_normal(rng: &mut Rng, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = StandardNormal.sample(rng);
    }
}

/// Running mean/variance (Welford), mergeable.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Welford) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.n as f64) * (other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn estimate(&self) -> McEstimate {
        McEstimate {
            mean: self.mean,
            se: (self.variance() / self.n.max(1) as f64).sqrt(),
            n: self.n as usize,
        }
    }
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl McEstimate {
    pub fn exact(value: f64) -> Self {
        McEstimate {
            mean: value,
            se: 0.0,
            n: 0,
        }
    }

    /// `|mean - target|` in units of standard error (infinite if the SE is zero and the gap is not).
    pub fn z_score(&self, target: f64) -> f64 {
        let gap = (self.mean - target).abs();
        if gap == 0.0 {
            0.0
        } else if self.se == 0.0 {
            f64::INFINITY
        } else {
            gap / self.se
        }
    }

    pub fn within(&self, target: f64, n_se: f64) -> bool {
        (self.mean - target).abs() <= n_se * self.se
    }
}

/// Runs `body` over `n` draws split into seeded chunks and returns the
/// per-chunk accumulators in chunk order.
pub fn chunked<A, I, F>(n: usize, seed: u64, init: I, body: F) -> Vec<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut Rng, usize, &mut A) + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|k| {
            let count = CHUNK.min(n - k * CHUNK);
            let mut r = rng(mix_seed(seed, k as u64));
            let mut acc = init();
            body(&mut r, count, &mut acc);
            acc
        })
        .collect()
}

/// Mean and SE of `sample` over `n` seeded draws.
pub fn mc_mean<F>(n: usize, seed: u64, sample: F) -> McEstimate
where
    F: Fn(&mut Rng) -> f64 + Sync,
{
    let parts = chunked(n, seed, Welford::default, |r, count, acc| {
        for _ in 0..count {
            acc.push(sample(r));
        }
    });
    let mut total = Welford::default();
    for p in &parts {
        total.merge(p);
    }
    total.estimate()
}

/// Per-component mean and SE of a vector-valued sample of length `len`.
pub fn mc_mean_vec<F>(n: usize, seed: u64, len: usize, sample: F) -> Vec<McEstimate>
where
    F: Fn(&mut Rng, &mut [f64]) + Sync,
{
    let parts = chunked(
        n,
        seed,
        || (vec![Welford::default(); len], vec![0.0; len]),
        |r, count, (acc, buf)| {
            for _ in 0..count {
                sample(r, buf);
                for (a, &x) in acc.iter_mut().zip(buf.iter()) {
                    a.push(x);
                }
            }
        },
    );
    let mut total = vec![Welford::default(); len];
    for (p, _) in &parts {
        for (t, a) in total.iter_mut().zip(p) {
            t.merge(a);
        }
    }
    total.iter().map(Welford::estimate).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welford_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut one = Welford::default();
        xs.iter().for_each(|&x| one.push(x));
        let mut a = Welford::default();
        let mut b = Welford::default();
        xs[..333].iter().for_each(|&x| a.push(x));
        xs[333..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert!((a.mean - one.mean).abs() < 1e-12);
        assert!((a.variance() - one.variance()).abs() < 1e-10);
    }

    #[test]
    fn chunked_results_independent_of_pool_size() {
        let run = || mc_mean(20_000, 7, normal);
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(run);
        let three = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap()
            .install(run);
        assert_eq!(one, three);
    }

    #[test]
    fn derive_seed_separates_labels() {
        assert_ne!(
            derive_seed(1, &[b"ab", b"c"]),
            derive_seed(1, &[b"a", b"bc"])
        );
        assert_eq!(derive_seed(9, &[b"x"]), derive_seed(9, &[b"x"]));
    }
}
