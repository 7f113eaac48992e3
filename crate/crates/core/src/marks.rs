//! Lazily generated mark streams `t_0, t_1, t_2, ...` of i.i.d. uniforms.
//!
//! Position 0 (the ordering key) is a direct keyed hash. Positions
//! `1..=2^TREE_DEPTH` are leaves of a binary tree that stores, at every
//! node, the minimum of the uniforms below it. The root minimum is drawn
//! from its exact law; at each split one child inherits the minimum (a fair
//! coin picks which) and the other child's minimum is drawn conditionally
//! above it. Every node value is a keyed hash of `(seed, owner, node)`, so a
//! single mark costs `TREE_DEPTH` hashes and the positions whose marks fall
//! below a threshold can be enumerated without touching the others.

use crate::rng::{hash3, unit_open};

/// Number of tree levels; positions up to `2^TREE_DEPTH` are addressable.
pub const TREE_DEPTH: u32 = 32;

/// Largest addressable mark position.
pub const MAX_POSITION: u64 = 1 << TREE_DEPTH;

const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

/// Minimum of `len` i.i.d. uniforms on `(floor, 1)`, from one uniform `u`.
#[inline]
fn conditional_min(floor: f64, len: f64, u: f64) -> f64 {
    // 1 - (1-u)^(1/len), computed without cancellation.
    let b = -((-u).ln_1p() / len).exp_m1();
    (floor + (1.0 - floor) * b).min(BELOW_ONE)
}

/// The mark sequence attached to one point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MarkStream {
    seed: u64,
    owner: u64,
}

impl MarkStream {
    /// Stream for point `owner` under the configuration's mark seed.
    pub fn new(seed: u64, owner: u64) -> Self {
        MarkStream { seed, owner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn owner_index(&self) -> u64 {
        self.owner
    }

    #[inline]
    fn node_bits(&self, node: u64) -> u64 {
        hash3(self.seed, self.owner, node)
    }

    #[inline]
    fn root_min(&self) -> f64 {
        conditional_min(0.0, MAX_POSITION as f64, unit_open(self.node_bits(1)))
    }

    /// Expands `node` (heap index) of subtree length `len` holding minimum
    /// `min`: returns the minima of its left and right children.
    #[inline]
    fn split(&self, node: u64, len: u64, min: f64) -> (f64, f64) {
        let bits = self.node_bits(node);
        let other = conditional_min(min, (len / 2) as f64, unit_open(bits));
        if bits & 1 == 0 {
            (min, other)
        } else {
            (other, min)
        }
    }

    /// The ordering key `t_0`.
    #[inline]
    pub fn first(&self) -> f64 {
        unit_open(hash3(self.seed, self.owner, 0))
    }

    /// `t_position`, in `(0, 1)`.
    pub fn value(&self, position: u64) -> f64 {
        if position == 0 {
            return self.first();
        }
        assert!(position <= MAX_POSITION, "mark position {position} out of range");
        let leaf = position - 1;
        let mut node = 1u64;
        let mut len = MAX_POSITION;
        let mut min = self.root_min();
        let mut start = 0u64;
        while len > 1 {
            let (l, r) = self.split(node, len, min);
            len /= 2;
            if leaf < start + len {
                node *= 2;
                min = l;
            } else {
                node = node * 2 + 1;
                start += len;
                min = r;
            }
        }
        min
    }

    /// Calls `emit(position, value)` in increasing position order for every
    /// position in `lo..=hi` (both >= 1) whose mark is `<= threshold`.
    pub fn for_each_below(&self, lo: u64, hi: u64, threshold: f64, mut emit: impl FnMut(u64, f64)) {
        let lo = lo.max(1);
        let hi = hi.min(MAX_POSITION);
        if lo > hi {
            return;
        }
        // Leaf indices are position - 1.
        let (a, b) = (lo - 1, hi - 1);
        let mut stack: Vec<(u64, u64, u64, f64)> = Vec::with_capacity(2 * TREE_DEPTH as usize);
        stack.push((1, 0, MAX_POSITION, self.root_min()));
        while let Some((node, start, len, min)) = stack.pop() {
            if min > threshold || start > b || start + len - 1 < a {
                continue;
            }
            if len == 1 {
                emit(start + 1, min);
                continue;
            }
            let (l, r) = self.split(node, len, min);
            let half = len / 2;
            stack.push((node * 2 + 1, start + half, half, r));
            stack.push((node * 2, start, half, l));
        }
    }

    /// Collects `(position, value)` pairs below `threshold` in `lo..=hi`.
    pub fn positions_below(&self, lo: u64, hi: u64, threshold: f64) -> Vec<(u64, f64)> {
        let mut out = Vec::new();
        self.for_each_below(lo, hi, threshold, |p, v| out.push((p, v)));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_in_open_unit_interval() {
        let s = MarkStream::new(7, 3);
        for p in 0..2000 {
            let v = s.value(p);
            assert!(v > 0.0 && v < 1.0);
        }
        assert!(s.value(MAX_POSITION) < 1.0);
    }

    #[test]
    fn enumeration_agrees_with_point_lookup() {
        let s = MarkStream::new(11, 42);
        let theta = 0.1;
        let found = s.positions_below(5, 900, theta);
        let direct: Vec<(u64, f64)> = (5..=900)
            .map(|p| (p, s.value(p)))
            .filter(|&(_, v)| v <= theta)
            .collect();
        assert_eq!(found, direct);
        let all = s.positions_below(1, 64, 1.0);
        assert_eq!(all.len(), 64);
        for (p, v) in all {
            assert_eq!(v, s.value(p));
        }
    }

    #[test]
    fn marks_look_uniform() {
        // Mean and lag-1 correlation of a long stretch of one stream plus
        // first marks across owners.
        let s = MarkStream::new(99, 0);
        let n = 200_000u64;
        let xs: Vec<f64> = (1..=n).map(|p| s.value(p)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 4.0 * (1.0f64 / 12.0 / n as f64).sqrt());
        let below = xs.iter().filter(|&&x| x < 0.01).count() as f64 / n as f64;
        assert!((below - 0.01).abs() < 4.0 * (0.01f64 * 0.99 / n as f64).sqrt());
        let cov = xs.windows(2).map(|w| (w[0] - 0.5) * (w[1] - 0.5)).sum::<f64>() / n as f64;
        assert!(cov.abs() < 4.0 / 12.0 / (n as f64).sqrt());
        let firsts: f64 = (0..n).map(|i| MarkStream::new(99, i).first()).sum::<f64>() / n as f64;
        assert!((firsts - 0.5).abs() < 4.0 * (1.0f64 / 12.0 / n as f64).sqrt());
    }

    #[test]
    fn streams_differ_by_owner_and_seed() {
        assert_ne!(MarkStream::new(1, 0).value(3), MarkStream::new(1, 1).value(3));
        assert_ne!(MarkStream::new(1, 0).value(3), MarkStream::new(2, 0).value(3));
    }
}
