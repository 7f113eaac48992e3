//! Laws on the nonnegative integers and distances between them.
//!
//! `d_TV` is reported in the sup-over-sets normalization,
//! `sup_A |P(A) - Q(A)|`, which equals half the L1 distance of the pmfs.
//! `d_W` is the L1 distance between the CDFs. Residual tail mass beyond the
//! stored support is treated as a single overflow cell.

use rand::Rng;
use serde::Serialize;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::rng::random_state;

/// Tail mass beyond which a Poisson law is truncated.
pub const POISSON_TAIL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LawKind {
    Poisson { alpha: f64 },
    Empirical { n_samples: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountDistribution {
    pub pmf: Vec<f64>,
    pub tail_mass: f64,
    pub kind: LawKind,
}

impl CountDistribution {
    pub fn point_mass(at: usize) -> Self {
        let mut pmf = vec![0.0; at + 1];
        pmf[at] = 1.0;
        CountDistribution {
            pmf,
            tail_mass: 0.0,
            kind: LawKind::Empirical { n_samples: 1 },
        }
    }

    /// Probability of `i`.
    pub fn prob(&self, i: usize) -> f64 {
        self.pmf.get(i).copied().unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(i, p)| i as f64 * p).sum()
    }

    /// Cumulative probabilities `P(X <= i)` over the stored support.
    pub fn cdf(&self) -> Vec<f64> {
        self.pmf
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect()
    }
}

/// Poisson law with mean `alpha`; the support is extended beyond `cutoff`
/// until the remaining tail is below [`POISSON_TAIL`].
pub fn poisson_law(alpha: f64, cutoff: usize) -> Result<CountDistribution> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::domain(format!("poisson mean {alpha} must be finite and >= 0")));
    }
    if alpha == 0.0 {
        let mut d = CountDistribution::point_mass(0);
        d.kind = LawKind::Poisson { alpha };
        return Ok(d);
    }
    let ln_alpha = alpha.ln();
    let mut pmf = Vec::new();
    let mut ln_fact = 0.0;
    let mut total = 0.0;
    let mut i = 0usize;
    loop {
        if i > 0 {
            ln_fact += (i as f64).ln();
        }
        let p = (-alpha + i as f64 * ln_alpha - ln_fact).exp();
        pmf.push(p);
        total += p;
        i += 1;
        let past_mode = i as f64 > alpha;
        if i > cutoff && past_mode && 1.0 - total < POISSON_TAIL {
            break;
        }
        if past_mode && p == 0.0 && total > 0.5 {
            break;
        }
    }
    Ok(CountDistribution {
        pmf,
        tail_mass: (1.0 - total).max(0.0),
        kind: LawKind::Poisson { alpha },
    })
}

/// Relative frequencies of `samples`.
pub fn empirical_law(samples: &[u64]) -> Result<CountDistribution> {
    if samples.is_empty() {
        return Err(Error::domain("empirical law needs at least one sample"));
    }
    let max = *samples.iter().max().unwrap() as usize;
    let mut counts = vec![0usize; max + 1];
    for &s in samples {
        counts[s as usize] += 1;
    }
    Ok(from_counts(&counts, samples.len()))
}

fn from_counts(counts: &[usize], n: usize) -> CountDistribution {
    let inv = 1.0 / n as f64;
    CountDistribution {
        pmf: counts.iter().map(|&c| c as f64 * inv).collect(),
        tail_mass: 0.0,
        kind: LawKind::Empirical { n_samples: n },
    }
}

/// Total variation distance, `sup_A |P(A) - Q(A)|`.
pub fn tv_distance(p: &CountDistribution, q: &CountDistribution) -> f64 {
    let len = p.pmf.len().max(q.pmf.len());
    let body: f64 = (0..len).map(|i| (p.prob(i) - q.prob(i)).abs()).sum();
    (0.5 * (body + (p.tail_mass - q.tail_mass).abs())).min(1.0)
}

/// Wasserstein-1 distance on the integers: `sum_i |F_P(i) - F_Q(i)|`.
pub fn wasserstein_distance(p: &CountDistribution, q: &CountDistribution) -> f64 {
    let len = p.pmf.len().max(q.pmf.len());
    let (mut fp, mut fq, mut acc) = (0.0, 0.0, 0.0);
    for i in 0..len {
        fp += p.prob(i);
        fq += q.prob(i);
        acc += (fp - fq).abs();
    }
    acc
}

/// Sample mean of the descending factorial `(n)_l = n (n-1) ... (n-l+1)`
/// and its standard error.
pub fn factorial_moment(samples: &[u64], l: usize) -> Result<(f64, f64)> {
    if l == 0 {
        return Err(Error::domain("factorial moment order must be >= 1"));
    }
    if samples.is_empty() {
        return Err(Error::domain("factorial moment needs samples"));
    }
    let values: Vec<f64> = samples
        .iter()
        .map(|&n| (0..l as u64).map(|i| n as f64 - i as f64).product::<f64>().max(0.0))
        .collect();
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)
    } else {
        0.0
    };
    Ok((mean, (var / m).sqrt()))
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalityRow {
    pub z: f64,
    /// `P(Z <= z)` for the standardized samples.
    pub empirical: f64,
    /// `P(Z < z)`.
    pub empirical_below: f64,
    pub target: f64,
}

impl NormalityRow {
    /// Average of the left and right limits of the empirical CDF at `z`.
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.empirical + self.empirical_below)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalityReport {
    pub alpha_hat: f64,
    pub rows: Vec<NormalityRow>,
    /// All samples equal.
    pub degenerate: bool,
}

/// Standardizes `samples` by `(x - alpha_hat) / sqrt(alpha_hat)` and
/// compares the empirical CDF with the standard normal at `z = -1, 0, 1`.
pub fn normality_diagnostic(samples: &[u64], alpha_hat: f64) -> Result<NormalityReport> {
    if !(alpha_hat > 0.0) {
        return Err(Error::domain("alpha_hat must be positive"));
    }
    if samples.is_empty() {
        return Err(Error::domain("normality diagnostic needs samples"));
    }
    let sd = alpha_hat.sqrt();
    let z: Vec<f64> = samples.iter().map(|&x| (x as f64 - alpha_hat) / sd).collect();
    let n = z.len() as f64;
    let rows = [-1.0, 0.0, 1.0]
        .into_iter()
        .map(|t| NormalityRow {
            z: t,
            empirical: z.iter().filter(|&&v| v <= t).count() as f64 / n,
            empirical_below: z.iter().filter(|&&v| v < t).count() as f64 / n,
            target: normal_cdf(t),
        })
        .collect();
    Ok(NormalityReport {
        alpha_hat,
        rows,
        degenerate: samples.iter().all(|&x| x == samples[0]),
    })
}

/// Percentile bootstrap interval for a statistic of resampled data.
fn percentile_interval(mut stats: Vec<f64>, level: f64) -> (f64, f64) {
    stats.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let idx = ((stats.len() - 1) as f64 * p).round() as usize;
        stats[idx]
    };
    let tail = (1.0 - level) / 2.0;
    (q(tail), q(1.0 - tail))
}

fn resample_counts(samples: &[u64], max: usize, rng: &mut crate::rng::RandomState) -> Vec<usize> {
    let mut counts = vec![0usize; max + 1];
    for _ in 0..samples.len() {
        counts[samples[rng.random_range(0..samples.len())] as usize] += 1;
    }
    counts
}

/// Nonparametric bootstrap interval for the empirical `d_TV` to `target`.
pub fn bootstrap_tv_interval(
    samples: &[u64],
    target: &CountDistribution,
    resamples: usize,
    level: f64,
    seed: u64,
) -> Result<(f64, f64)> {
    if samples.is_empty() || resamples == 0 {
        return Err(Error::domain("bootstrap needs samples and at least one resample"));
    }
    let max = *samples.iter().max().unwrap() as usize;
    let mut rng = random_state(seed);
    let stats = (0..resamples)
        .map(|_| {
            let c = resample_counts(samples, max, &mut rng);
            tv_distance(&from_counts(&c, samples.len()), target)
        })
        .collect();
    Ok(percentile_interval(stats, level))
}

/// Bootstrap interval for `d_TV` between two empirical laws, resampling both.
pub fn bootstrap_two_sample_tv_interval(
    a: &[u64],
    b: &[u64],
    resamples: usize,
    level: f64,
    seed: u64,
) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() || resamples == 0 {
        return Err(Error::domain("bootstrap needs samples and at least one resample"));
    }
    let ma = *a.iter().max().unwrap() as usize;
    let mb = *b.iter().max().unwrap() as usize;
    let mut rng = random_state(seed);
    let stats = (0..resamples)
        .map(|_| {
            let ca = resample_counts(a, ma, &mut rng);
            let cb = resample_counts(b, mb, &mut rng);
            tv_distance(&from_counts(&ca, a.len()), &from_counts(&cb, b.len()))
        })
        .collect();
    Ok(percentile_interval(stats, level))
}
