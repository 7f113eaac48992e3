//! Deterministic chunked Monte Carlo averaging.
//!
//! Draws are split into fixed-size chunks, each with its own random state
//! derived from `(seed, chunk)`. Chunk sums are combined pairwise in chunk
//! order, so the result does not depend on the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::{hash3, random_state, RandomState};

const CHUNK: usize = 4096;

/// A sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl McEstimate {
    pub fn exact(value: f64) -> Self {
        McEstimate {
            value,
            std_error: 0.0,
            samples: 0,
        }
    }

    pub fn scale(self, c: f64) -> Self {
        McEstimate {
            value: self.value * c,
            std_error: self.std_error * c.abs(),
            samples: self.samples,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: usize,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn merge(a: Moments, b: Moments) -> Moments {
        Moments {
            n: a.n + b.n,
            sum: a.sum + b.sum,
            sum_sq: a.sum_sq + b.sum_sq,
        }
    }
}

/// Sums `values` pairwise; the tree shape depends only on the length.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let (l, r) = values.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

fn pairwise_merge(parts: &[Moments]) -> Moments {
    match parts.len() {
        0 => Moments::default(),
        1 => parts[0],
        n => {
            let (l, r) = parts.split_at(n / 2);
            Moments::merge(pairwise_merge(l), pairwise_merge(r))
        }
    }
}

/// Estimates `E[f]` from `n` draws. `f` receives a chunk-local random state.
pub fn mc_mean<F>(n: usize, seed: u64, f: F) -> McEstimate
where
    F: Fn(&mut RandomState) -> f64 + Sync,
{
    if n == 0 {
        return McEstimate {
            value: f64::NAN,
            std_error: f64::NAN,
            samples: 0,
        };
    }
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = random_state(hash3(seed, 0x6d63, c as u64));
            let len = CHUNK.min(n - c * CHUNK);
            let mut m = Moments::default();
            for _ in 0..len {
                let v = f(&mut rng);
                m.n += 1;
                m.sum += v;
                m.sum_sq += v * v;
            }
            m
        })
        .collect();
    let m = pairwise_merge(&parts);
    let mean = m.sum / m.n as f64;
    let var = if m.n > 1 {
        ((m.sum_sq - m.n as f64 * mean * mean) / (m.n as f64 - 1.0)).max(0.0)
    } else {
        0.0
    };
    McEstimate {
        value: mean,
        std_error: (var / m.n as f64).sqrt(),
        samples: m.n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn uniform_mean() {
        let e = mc_mean(100_000, 3, |r| r.random::<f64>());
        assert!((e.value - 0.5).abs() < 4.0 * e.std_error);
        assert!((e.std_error - (1.0f64 / 12.0 / 1e5).sqrt()).abs() < 1e-4);
    }

    #[test]
    fn thread_count_does_not_matter() {
        let f = |r: &mut RandomState| r.random::<f64>().powi(3);
        let a = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| mc_mean(50_000, 11, f));
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| mc_mean(50_000, 11, f));
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn pairwise_sum_small() {
        assert_eq!(pairwise_sum(&[1.0, 2.0, 3.0]), 6.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }
}
