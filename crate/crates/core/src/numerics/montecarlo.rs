//! Seeded importance-sampling Monte Carlo.
//!
//! Samples are split into a fixed number of batches. Batch `b` draws from
//! `ChaCha8Rng` seeded with the master seed and switched to stream `b`, so
//! every batch is reproducible on its own. Batch statistics are merged in
//! batch order, which makes the result independent of the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

pub const MC_BATCHES: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub n_samples: u64,
    pub seed: u64,
}

/// A proposal distribution on `R^dim`.
pub trait Proposal: Sync {
    fn dim(&self) -> usize;
    /// Writes one draw into `point`.
    fn sample(&self, rng: &mut ChaCha8Rng, point: &mut [f64]);
    /// Normalised density at `point`.
    fn density(&self, point: &[f64]) -> f64;
}

/// Running mean and centred sum of squares.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let mean = self.mean + d * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + d * d * (self.n as f64 * other.n as f64 / n as f64);
        Self { n, mean, m2 }
    }
}

/// Importance-sampled estimate of `integral of f(x) dx` over `R^dim`.
pub fn mc_integrate<P, F>(dim: usize, proposal: &P, integrand: F, n_samples: u64, seed: u64) -> Result<MCEstimate>
where
    P: Proposal,
    F: Fn(&[f64]) -> f64 + Sync,
{
    if dim == 0 || proposal.dim() != dim {
        return domain(format!(
            "proposal dimension {} does not match integrand dimension {dim}",
            proposal.dim()
        ));
    }
    if n_samples == 0 {
        return domain("n_samples must be positive");
    }
    let batches = MC_BATCHES.min(n_samples);
    let base = n_samples / batches;
    let extra = n_samples % batches;
    let parts: Vec<Result<Moments>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let count = base + u64::from(b < extra);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let mut point = vec![0.0; dim];
            let mut acc = Moments::default();
            for _ in 0..count {
                proposal.sample(&mut rng, &mut point);
                let f = integrand(&point);
                let q = proposal.density(&point);
                let ratio = if f == 0.0 {
                    0.0
                } else if q > 0.0 && q.is_finite() {
                    f / q
                } else {
                    return Err(Error::ZeroDensity { integrand: f });
                };
                acc.push(ratio);
            }
            Ok(acc)
        })
        .collect();
    let mut total = Moments::default();
    for part in parts {
        total = total.merge(part?);
    }
    let var = if total.n > 1 {
        total.m2 / (total.n - 1) as f64
    } else {
        0.0
    };
    Ok(MCEstimate {
        mean: total.mean,
        std_err: (var / total.n as f64).sqrt(),
        n_samples,
        seed,
    })
}

/// Standard normal draw used by proposals.
pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(rand_distr::StandardNormal)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Gauss1;

    impl Proposal for Gauss1 {
        fn dim(&self) -> usize {
            1
        }
        fn sample(&self, rng: &mut ChaCha8Rng, point: &mut [f64]) {
            point[0] = standard_normal(rng);
        }
        fn density(&self, point: &[f64]) -> f64 {
            (-0.5 * point[0] * point[0]).exp() / (2.0 * std::f64::consts::PI).sqrt()
        }
    }

    #[test]
    fn self_normalised_case_is_exact() {
        let est = mc_integrate(1, &Gauss1, |x| Gauss1.density(x), 10_000, 3).unwrap();
        assert!((est.mean - 1.0).abs() < 1e-14);
        assert!(est.std_err < 1e-14);
    }

    #[test]
    fn gaussian_integral() {
        let est = mc_integrate(1, &Gauss1, |x| (-x[0] * x[0]).exp(), 200_000, 11).unwrap();
        let exact = std::f64::consts::PI.sqrt();
        assert!((est.mean - exact).abs() < 3.0 * est.std_err, "{est:?}");
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let a = mc_integrate(1, &Gauss1, |x| x[0].cos(), 50_001, 42).unwrap();
        let b = mc_integrate(1, &Gauss1, |x| x[0].cos(), 50_001, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    }

    #[test]
    fn independent_of_thread_count() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mc_integrate(1, &Gauss1, |x| x[0].abs(), 30_000, 9).unwrap())
        };
        assert_eq!(run(1).mean.to_bits(), run(4).mean.to_bits());
    }

    #[test]
    fn zero_density_is_an_error() {
        struct Bad;
        impl Proposal for Bad {
            fn dim(&self) -> usize {
                1
            }
            fn sample(&self, _: &mut ChaCha8Rng, point: &mut [f64]) {
                point[0] = 0.0;
            }
            fn density(&self, _: &[f64]) -> f64 {
                0.0
            }
        }
        let err = mc_integrate(1, &Bad, |_| 1.0, 10, 0).unwrap_err();
        assert!(matches!(err, Error::ZeroDensity { .. }));
    }
}
