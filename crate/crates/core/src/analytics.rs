//! Mecke-formula expectations, Stein-method Poisson approximation bounds and
//! calibration of kernel knobs to a target mean.
//!
//! All integrals are against `lambda = s * mu`. Closed forms are used when
//! the kernel/measure pair has an exact mean-field law; otherwise values are
//! deterministic Monte Carlo estimates driven by [`IntegrationSettings::seed`],
//! which is kept separate from simulation seeds.
//!
//! Terms of the form `exp(-s * int q dmu)` with `q` in `[0, 1]` are estimated
//! without plug-in bias through the Poisson-process identity
//! `exp(-s * int q dmu) = E prod_{z in eta} (1 - q(z))`, `eta ~ Poisson(s mu)`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::connection::{ConnectMethod, ConnectionFunction, Kernel};
use crate::error::{Error, Result};
use crate::mc::{mc_mean, McEstimate};
use crate::rng::{derive_seed, RandomState};
use crate::sampler::sample_poisson;
use crate::statespace::{unit_ball_volume, Point, ProbabilityMeasure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpectationEstimate {
    pub value: f64,
    /// Zero exactly when `method` is closed form.
    pub std_error: f64,
    pub outer_samples: usize,
    pub inner_samples: usize,
    pub method: Method,
}

impl ExpectationEstimate {
    fn exact(value: f64) -> Self {
        ExpectationEstimate {
            value,
            std_error: 0.0,
            outer_samples: 0,
            inner_samples: 0,
            method: Method::ClosedForm,
        }
    }

    fn from_mc(e: McEstimate, inner: usize) -> Self {
        ExpectationEstimate {
            value: e.value,
            std_error: e.std_error,
            outer_samples: e.samples,
            inner_samples: inner,
            method: Method::MonteCarlo,
        }
    }
}

/// Sample sizes and seed for Monte Carlo integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationSettings {
    #[serde(default = "default_outer")]
    pub outer_samples: usize,
    /// Inner draws per outer sample; `None` picks
    /// `clamp(100 (s sup phi)^2, 10^3, 2 * 10^4)`.
    #[serde(default)]
    pub inner_samples: Option<usize>,
    #[serde(default = "default_integration_seed")]
    pub seed: u64,
}

fn default_outer() -> usize {
    10_000
}

fn default_integration_seed() -> u64 {
    0x1e6_5eed
}

impl Default for IntegrationSettings {
    fn default() -> Self {
        IntegrationSettings {
            outer_samples: default_outer(),
            inner_samples: None,
            seed: default_integration_seed(),
        }
    }
}

impl IntegrationSettings {
    pub fn inner_for(&self, s: f64, sup_phi: f64) -> usize {
        self.inner_samples
            .unwrap_or_else(|| (100.0 * (s * sup_phi).powi(2)).clamp(1e3, 2e4) as usize)
            .max(1)
    }

    fn seed_for(&self, tag: &str) -> u64 {
        derive_seed(self.seed, tag)
    }
}

/// `P(Poisson(lambda) = j)`.
pub fn poisson_pmf(j: usize, lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return (j == 0) as u8 as f64;
    }
    (j as f64 * lambda.ln() - lambda - ln_gamma(j as f64 + 1.0)).exp()
}

fn ln_factorial(k: usize) -> f64 {
    ln_gamma(k as f64 + 1.0)
}

/// `s^k / k!`.
fn scaled_power(s: f64, k: usize) -> f64 {
    (k as f64 * s.ln() - ln_factorial(k)).exp()
}

fn check_intensity(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("intensity s = {s} must be positive and finite")))
    }
}

fn sample_tuple(measure: &ProbabilityMeasure, k: usize, rng: &mut RandomState) -> Vec<Point> {
    (0..k).map(|_| measure.sample_point(rng)).collect()
}

/// Fixed tuple used to surface capability errors before sampling.
fn probe_tuple(phi: &ConnectionFunction, k: usize) -> Vec<Point> {
    vec![Point::from_slice(&vec![0.0; phi.dimension()]); k]
}

/// Number of Poisson-process replicas fitting in an inner budget.
fn process_replicas(inner: usize, s: f64) -> usize {
    (inner as f64 / s.ceil()).floor().max(1.0) as usize
}

/// `E D_j = s int (s g)^j / j! exp(-s g) dmu`.
pub fn expected_degree_count(
    s: f64,
    phi: &ConnectionFunction,
    measure: &ProbabilityMeasure,
    j: usize,
    settings: &IntegrationSettings,
) -> Result<ExpectationEstimate> {
    check_intensity(s)?;
    if let Some(law) = phi.mean_field_law() {
        return Ok(ExpectationEstimate::exact(
            s * law.expect(|g| poisson_pmf(j, s * g)),
        ));
    }
    let inner = settings.inner_for(s, phi.sup_phi());
    let replicas = process_replicas(inner, s);
    // Given x, the neighbours of x form a thinned Poisson process, so the
    // Poisson-binomial pmf at j over a Poisson(s) sample is unbiased for
    // the Poisson(s g(x)) pmf at j.
    let e = mc_mean(settings.outer_samples, settings.seed_for("degree"), |rng| {
        let x = measure.sample_point(rng);
        let mut acc = 0.0;
        let mut dp = vec![0.0; j + 1];
        for _ in 0..replicas {
            dp.iter_mut().for_each(|v| *v = 0.0);
            dp[0] = 1.0;
            for _ in 0..sample_poisson(s, rng) {
                let q = phi.evaluate(&x, &measure.sample_point(rng));
                if q == 0.0 {
                    continue;
                }
                for t in (1..=j).rev() {
                    dp[t] = dp[t] * (1.0 - q) + dp[t - 1] * q;
                }
                dp[0] *= 1.0 - q;
            }
            acc += dp[j];
        }
        s * acc / replicas as f64
    });
    Ok(ExpectationEstimate::from_mc(e, replicas))
}

/// Connectedness probability of `k` points under constant `p`.
fn constant_h(p: f64, k: usize) -> Result<f64> {
    let pts = vec![Point::from_slice(&[0.0]); k];
    let phi = ConnectionFunction::new(
        Kernel::Constant { p },
        &ProbabilityMeasure::uniform_cube(1)?,
    )?;
    phi.connectedness_prob(&pts, ConnectMethod::default_for(k))
}

/// `E N_k = (s^k / k!) int h_phi(x) exp(-s int phi(z, {x}) mu(dz)) mu^k(dx)`.
pub fn expected_k_components(
    s: f64,
    phi: &ConnectionFunction,
    measure: &ProbabilityMeasure,
    k: usize,
    settings: &IntegrationSettings,
    method: ConnectMethod,
) -> Result<ExpectationEstimate> {
    check_intensity(s)?;
    if k == 0 {
        return Err(Error::domain("component order must be >= 1"));
    }
    if k == 1 {
        return expected_degree_count(s, phi, measure, 0, settings);
    }
    let c = scaled_power(s, k);
    match *phi.kernel() {
        Kernel::Constant { p } => {
            let h = constant_h(p, k)?;
            let q = 1.0 - (1.0 - p).powi(k as i32);
            return Ok(ExpectationEstimate::exact(c * h * (-s * q).exp()));
        }
        Kernel::PartitionCounterexample { .. } if phi.mean_field_law().is_some() => {
            // k points are connected iff they share a block; the block mass
            // is then also the exponent.
            let law = phi.mean_field_law().unwrap();
            let v = law.expect(|w| w.powi(k as i32 - 1) * (-s * w).exp());
            return Ok(ExpectationEstimate::exact(c * v));
        }
        _ => {}
    }
    phi.connectedness_prob(&probe_tuple(phi, k), method)?;
    let inner = settings.inner_for(s, phi.sup_phi());
    let replicas = process_replicas(inner, s);
    let e = mc_mean(settings.outer_samples, settings.seed_for("components"), |rng| {
        let xs = sample_tuple(measure, k, rng);
        let h = phi.connectedness_prob(&xs, method).unwrap_or(f64::NAN);
        if h == 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for _ in 0..replicas {
            let mut prod = 1.0;
            for _ in 0..sample_poisson(s, rng) {
                let z = [measure.sample_point(rng)];
                prod *= 1.0 - phi.group_connect_prob(&z, &xs).unwrap_or(0.0);
                if prod == 0.0 {
                    break;
                }
            }
            acc += prod;
        }
        h * acc / replicas as f64
    });
    Ok(ExpectationEstimate::from_mc(e.scale(c), replicas))
}

/// `E H_2 = (s^2 / 2) int int phi dmu dmu`, counting unordered pairs.
pub fn expected_edges(
    s: f64,
    phi: &ConnectionFunction,
    measure: &ProbabilityMeasure,
    settings: &IntegrationSettings,
) -> Result<ExpectationEstimate> {
    check_intensity(s)?;
    let c = s * s / 2.0;
    if let Some(law) = phi.mean_field_law() {
        return Ok(ExpectationEstimate::exact(c * law.expect(|g| g)));
    }
    let e = mc_mean(settings.outer_samples, settings.seed_for("edges"), |rng| {
        let x = measure.sample_point(rng);
        phi.evaluate(&x, &measure.sample_point(rng))
    });
    Ok(ExpectationEstimate::from_mc(e.scale(c), 0))
}

/// `E H_k = (s^k / k!) int h_phi dmu^k`.
pub fn expected_connected_k(
    s: f64,
    phi: &ConnectionFunction,
    measure: &ProbabilityMeasure,
    k: usize,
    settings: &IntegrationSettings,
    method: ConnectMethod,
) -> Result<ExpectationEstimate> {
    check_intensity(s)?;
    if k < 2 {
        return Err(Error::domain("connected subgraph order must be >= 2"));
    }
    if k == 2 {
        return expected_edges(s, phi, measure, settings);
    }
    let c = scaled_power(s, k);
    match *phi.kernel() {
        Kernel::Constant { p } => return Ok(ExpectationEstimate::exact(c * constant_h(p, k)?)),
        Kernel::PartitionCounterexample { .. } if phi.mean_field_law().is_some() => {
            let law = phi.mean_field_law().unwrap();
            return Ok(ExpectationEstimate::exact(c * law.expect(|w| w.powi(k as i32 - 1))));
        }
        _ => {}
    }
    phi.connectedness_prob(&probe_tuple(phi, k), method)?;
    let e = mc_mean(settings.outer_samples, settings.seed_for("connected"), |rng| {
        let xs = sample_tuple(measure, k, rng);
        phi.connectedness_prob(&xs, method).unwrap_or(f64::NAN)
    });
    Ok(ExpectationEstimate::from_mc(e.scale(c), 0))
}

/// Poisson approximation bounds `d_TV(W, Po(alpha)) <= tv_bound` and
/// `d_W(W, Po(alpha)) <= w_bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteinBound {
    pub alpha: f64,
    pub tv_bound: f64,
    pub w_bound: f64,
    pub k: usize,
    /// The bounding integral before the `alpha` prefactors.
    pub integral: f64,
    pub std_error: f64,
    pub alpha_std_error: f64,
    pub method: Method,
}

impl SteinBound {
    fn new(alpha: McEstimate, integral: McEstimate, k: usize, divisor: f64, method: Method) -> Self {
        let a = alpha.value;
        let tv_pre = (1.0 / a).min(1.0);
        let w_pre = 3.0 * (1.0 / a.sqrt()).min(1.0);
        let i = integral.value / divisor;
        SteinBound {
            alpha: a,
            tv_bound: tv_pre * i,
            w_bound: w_pre * i,
            k,
            integral: integral.value,
            std_error: tv_pre * integral.std_error / divisor,
            alpha_std_error: alpha.std_error,
            method,
        }
    }
}

/// Bound for the edge count `H_2`: `(1 ^ 1/alpha) int (s g(x))^2 s mu(dx)`.
pub fn edge_stein_bound(
    s: f64,
    phi: &ConnectionFunction,
    measure: &ProbabilityMeasure,
    settings: &IntegrationSettings,
) -> Result<SteinBound> {
    let alpha = expected_edges(s, phi, measure, settings)?;
    let alpha_mc = McEstimate {
        value: alpha.value,
        std_error: alpha.std_error,
        samples: alpha.outer_samples,
    };
    let s3 = s * s * s;
    if let Some(law) = phi.mean_field_law() {
        let integral = McEstimate::exact(s3 * law.expect(|g| g * g));
        return Ok(SteinBound::new(alpha_mc, integral, 2, 1.0, Method::ClosedForm));
    }
    let inner = settings.inner_for(s, phi.sup_phi());
    // Two independent inner replicas give an unbiased estimate of g(x)^2.
    let e = mc_mean(settings.outer_samples, settings.seed_for("edge-bound"), |rng| {
        let x = measure.sample_point(rng);
        let mut g = [0.0; 2];
        for gi in &mut g {
            for _ in 0..inner {
                *gi += phi.evaluate(&x, &measure.sample_point(rng));
            }
            *gi /= inner as f64;
        }
        g[0] * g[1]
    });
    Ok(SteinBound::new(alpha_mc, e.scale(s3), 2, 1.0, Method::MonteCarlo))
}

/// A symmetric `{0, 1}`-valued selection function on `k`-tuples.
pub trait Selection: Sync {
    fn select(&self, xs: &[Point]) -> bool;
}

impl<F: Fn(&[Point]) -> bool + Sync> Selection for F {
    fn select(&self, xs: &[Point]) -> bool {
        self(xs)
    }
}

/// Selects tuples that are connected in the graph joining pairs with
/// `phi = 1`. Only defined for kernels taking values in `{0, 1}`.
pub struct DeterministicConnected<'a> {
    phi: &'a ConnectionFunction,
}

impl<'a> DeterministicConnected<'a> {
    pub fn new(phi: &'a ConnectionFunction) -> Result<Self> {
        let ok = match *phi.kernel() {
            Kernel::HardDisk { .. } | Kernel::PartitionCounterexample { .. } => true,
            Kernel::Constant { p } => p == 0.0 || p == 1.0,
            _ => false,
        };
        if ok {
            Ok(DeterministicConnected { phi })
        } else {
            Err(Error::domain(format!(
                "{} kernel is not {{0, 1}}-valued",
                phi.kernel().family_name()
            )))
        }
    }
}

impl Selection for DeterministicConnected<'_> {
    fn select(&self, xs: &[Point]) -> bool {
        if let [x, y] = xs {
            return self.phi.evaluate(x, y) >= 1.0;
        }
        self.phi
            .connectedness_prob(xs, ConnectMethod::SubsetRecursion)
            .map(|h| h >= 1.0)
            .unwrap_or(false)
    }
}

fn check_symmetric(h: &dyn Selection, measure: &ProbabilityMeasure, k: usize, seed: u64) -> Result<()> {
    let mut rng = crate::rng::random_state(seed);
    for _ in 0..64 {
        let xs = sample_tuple(measure, k, &mut rng);
        let v = h.select(&xs);
        let mut rev = xs.clone();
        rev.reverse();
        let mut rot = xs.clone();
        rot.rotate_left(1);
        if h.select(&rev) != v || h.select(&rot) != v {
            return Err(Error::domain("selection function is not symmetric"));
        }
    }
    Ok(())
}

/// `gamma(h, lambda)` for the Poisson U-statistic of `h`, with its
/// `d_TV` bound `(1 ^ 1/alpha) gamma / k!` and `d_W` bound
/// `3 (1 ^ alpha^(-1/2)) gamma / k!`.
pub fn ustat_gamma(
    k: usize,
    h: &dyn Selection,
    s: f64,
    measure: &ProbabilityMeasure,
    settings: &IntegrationSettings,
) -> Result<SteinBound> {
    check_intensity(s)?;
    if k < 2 {
        return Err(Error::domain("U-statistic order must be >= 2"));
    }
    check_symmetric(h, measure, k, settings.seed_for("symmetry"))?;
    let inner = settings.inner_for(s, 1.0);
    let outer = settings.outer_samples;
    let kf = ln_factorial(k);

    // Inner average of h(x, y) over y ~ mu^(k - l).
    let inner_mean = |xs: &mut Vec<Point>, l: usize, rng: &mut RandomState| {
        let mut hits = 0usize;
        for _ in 0..inner {
            xs.truncate(l);
            xs.extend((l..k).map(|_| measure.sample_point(rng)));
            hits += h.select(xs) as usize;
        }
        hits as f64 / inner as f64
    };

    let alpha = mc_mean(outer, settings.seed_for("ustat-alpha"), |rng| {
        let mut xs = sample_tuple(measure, 1, rng);
        inner_mean(&mut xs, 1, rng)
    })
    .scale(scaled_power(s, k));

    let (mut gamma, mut var) = (0.0, 0.0);
    for l in 1..k {
        let coef = (kf - ln_factorial(l) - 2.0 * ln_factorial(k - l)
            + (l + 2 * (k - l)) as f64 * s.ln())
        .exp();
        let e = mc_mean(outer, settings.seed_for(&format!("ustat-{l}")), |rng| {
            let mut xs = sample_tuple(measure, l, rng);
            let a = inner_mean(&mut xs, l, rng);
            if a == 0.0 {
                return 0.0;
            }
            a * inner_mean(&mut xs, l, rng)
        });
        gamma += coef * e.value;
        var += (coef * e.std_error).powi(2);
    }
    let integral = McEstimate {
        value: gamma,
        std_error: var.sqrt(),
        samples: outer,
    };
    Ok(SteinBound::new(alpha, integral, k, kf.exp(), Method::MonteCarlo))
}

/// Statistic whose mean a calibration targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CalibrationStatistic {
    Degree(usize),
    Components(usize),
}

impl CalibrationStatistic {
    pub fn expectation(
        &self,
        s: f64,
        phi: &ConnectionFunction,
        measure: &ProbabilityMeasure,
        settings: &IntegrationSettings,
    ) -> Result<ExpectationEstimate> {
        match *self {
            CalibrationStatistic::Degree(j) => expected_degree_count(s, phi, measure, j, settings),
            CalibrationStatistic::Components(k) => expected_k_components(
                s,
                phi,
                measure,
                k,
                settings,
                ConnectMethod::default_for(k),
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub knob: String,
    pub value: f64,
    pub kernel: Kernel,
    pub achieved: f64,
    pub iterations: usize,
    pub method: Method,
}

fn knob_bracket(kernel: &Kernel, measure: &ProbabilityMeasure) -> (f64, f64) {
    let reach = measure.diameter().unwrap_or(50.0);
    match kernel {
        Kernel::Constant { .. } => (0.0, 1.0),
        Kernel::HardDisk { .. } | Kernel::SoftDisk { .. } => (1e-12, reach),
        Kernel::Profile { .. } => (1e-9, 1e3),
        Kernel::KernelCapped { .. } => (0.0, 1e6),
        Kernel::PartitionCounterexample { .. } => (0.0, 0.0),
    }
}

/// Closed-form inversion of `E D_0 = s exp(-s g) = target` when `g` is a
/// known constant in the knob.
fn invert_isolated(kernel: &Kernel, measure: &ProbabilityMeasure, s: f64, target: f64) -> Option<f64> {
    let g = (s / target).ln() / s;
    let d = measure.dimension() as i32;
    let torus = measure.is_uniform_torus();
    let v = match *kernel {
        Kernel::Constant { .. } => g,
        Kernel::HardDisk { .. } if torus => (g / unit_ball_volume(d as usize)).powf(1.0 / d as f64),
        Kernel::SoftDisk { p, .. } if torus && p > 0.0 => {
            (g / (p * unit_ball_volume(d as usize))).powf(1.0 / d as f64)
        }
        _ => return None,
    };
    let valid = match kernel {
        Kernel::Constant { .. } => (0.0..=1.0).contains(&v),
        _ => v > 0.0 && v < 0.5,
    };
    valid.then_some(v)
}

/// Adjusts the kernel's scalar knob until the statistic's mean is within
/// `tolerance` of `target`.
pub fn calibrate_parameter(
    kernel: &Kernel,
    measure: &ProbabilityMeasure,
    s: f64,
    target: f64,
    statistic: CalibrationStatistic,
    tolerance: f64,
    settings: &IntegrationSettings,
) -> Result<Calibration> {
    check_intensity(s)?;
    if !(target > 0.0) {
        return Err(Error::Calibration("target mean must be positive".into()));
    }
    let (knob, _) = kernel
        .knob()
        .ok_or_else(|| Error::Calibration(format!("{} has no scalar knob", kernel.family_name())))?;
    let eval = |v: f64| -> Result<(Kernel, ExpectationEstimate)> {
        let k = kernel.with_knob(v)?;
        let phi = ConnectionFunction::new(k.clone(), measure)?;
        Ok((k, statistic.expectation(s, &phi, measure, settings)?))
    };
    if statistic == CalibrationStatistic::Degree(0) && target < s {
        if let Some(v) = invert_isolated(kernel, measure, s, target) {
            let (k, e) = eval(v)?;
            return Ok(Calibration {
                knob: knob.into(),
                value: v,
                kernel: k,
                achieved: e.value,
                iterations: 0,
                method: Method::ClosedForm,
            });
        }
    }
    let (mut lo, mut hi) = knob_bracket(kernel, measure);
    let (_, e_lo) = eval(lo)?;
    let (_, e_hi) = eval(hi)?;
    let (f_lo, f_hi) = (e_lo.value - target, e_hi.value - target);
    if f_lo.signum() == f_hi.signum() && f_lo.abs() > tolerance && f_hi.abs() > tolerance {
        return Err(Error::Calibration(format!(
            "target {target} not bracketed: mean ranges over [{}, {}] for {knob} in [{lo}, {hi}]",
            e_lo.value.min(e_hi.value),
            e_lo.value.max(e_hi.value)
        )));
    }
    let lo_sign = f_lo.signum();
    let mut method = Method::ClosedForm;
    for it in 1..=200 {
        let mid = 0.5 * (lo + hi);
        let (k, e) = eval(mid)?;
        if e.method == Method::MonteCarlo {
            method = Method::MonteCarlo;
        }
        let f = e.value - target;
        if f.abs() <= tolerance {
            return Ok(Calibration {
                knob: knob.into(),
                value: mid,
                kernel: k,
                achieved: e.value,
                iterations: it,
                method,
            });
        }
        if f.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.abs() {
            break;
        }
    }
    Err(Error::Calibration(format!(
        "bisection on {knob} did not reach tolerance {tolerance}"
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DegreeRatio {
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
    pub epsilon: f64,
    pub a_s: f64,
    pub pass: bool,
}

/// Compares `E D_i / E D_(i-1)` with `[eps s a_s / i, s a_s / i]`, where
/// `a_s = sup g` and `eps` is the declared homogeneity (estimated if `None`).
pub fn degree_ratio_check(
    s: f64,
    phi: &ConnectionFunction,
    measure: &ProbabilityMeasure,
    i: usize,
    epsilon: Option<f64>,
    settings: &IntegrationSettings,
) -> Result<DegreeRatio> {
    if i == 0 {
        return Err(Error::domain("degree ratio index must be >= 1"));
    }
    let num = expected_degree_count(s, phi, measure, i, settings)?;
    let den = expected_degree_count(s, phi, measure, i - 1, settings)?;
    if !(den.value > 0.0) {
        return Err(Error::domain("E D_(i-1) vanishes"));
    }
    let inner = settings.inner_for(s, phi.sup_phi());
    let hom = phi.homogeneity(measure, 64, inner, settings.seed_for("homogeneity"))?;
    let epsilon = epsilon.unwrap_or(hom.epsilon_hat);
    let ratio = num.value / den.value;
    let rel = ((num.std_error / num.value).powi(2) + (den.std_error / den.value).powi(2)).sqrt();
    let slack = 3.0 * ratio * if rel.is_finite() { rel } else { 0.0 } + 1e-12 * ratio.abs();
    let upper = s * hom.sup_g / i as f64;
    let lower = epsilon * upper;
    Ok(DegreeRatio {
        ratio,
        lower,
        upper,
        epsilon,
        a_s: hom.sup_g,
        pass: ratio >= lower - slack && ratio <= upper + slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn torus2() -> ProbabilityMeasure {
        ProbabilityMeasure::uniform_torus(2).unwrap()
    }

    fn phi(kernel: Kernel, m: &ProbabilityMeasure) -> ConnectionFunction {
        ConnectionFunction::new(kernel, m).unwrap()
    }

    fn quick() -> IntegrationSettings {
        IntegrationSettings {
            outer_samples: 20_000,
            inner_samples: Some(2_000),
            seed: 5,
        }
    }

    #[test]
    fn degree_count_examples() {
        let m = torus2();
        let set = IntegrationSettings::default();
        let e = expected_degree_count(100.0, &phi(Kernel::Constant { p: 0.05 }, &m), &m, 0, &set).unwrap();
        assert!((e.value - 100.0 * (-5.0f64).exp()).abs() < 1e-12);
        assert_eq!(e.method, Method::ClosedForm);
        let e = expected_degree_count(7.0, &phi(Kernel::Constant { p: 0.0 }, &m), &m, 0, &set).unwrap();
        assert_eq!(e.value, 7.0);
        let r = ((1000f64).ln() / 1000.0 / PI).sqrt();
        let e = expected_degree_count(1000.0, &phi(Kernel::HardDisk { r }, &m), &m, 0, &set).unwrap();
        assert!((e.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn degree_count_monte_carlo_matches_closed_form() {
        // Soft profile on the torus has no exact law; compare the
        // Poisson-binomial estimator with a plug-in evaluated at high
        // inner precision on a kernel whose g is known in closed form.
        let m = ProbabilityMeasure::uniform_cube(1).unwrap();
        let hd = phi(Kernel::HardDisk { r: 0.1 }, &m);
        assert!(hd.mean_field_law().is_none());
        // Oracle: g(x) = min(x, r) + min(1 - x, r) on [0, 1], integrated by
        // the midpoint rule.
        let s = 20.0;
        let n = 200_000;
        let oracle: f64 = (0..n)
            .map(|i| {
                let x = (i as f64 + 0.5) / n as f64;
                let g = x.min(0.1) + (1.0 - x).min(0.1);
                s * poisson_pmf(2, s * g)
            })
            .sum::<f64>()
            / n as f64;
        let e = expected_degree_count(s, &hd, &m, 2, &quick()).unwrap();
        assert!((e.value - oracle).abs() < 4.0 * e.std_error, "{e:?} vs {oracle}");
    }

    #[test]
    fn components_examples() {
        let m = torus2();
        let set = quick();
        let c = phi(Kernel::Constant { p: 0.05 }, &m);
        let n1 = expected_k_components(100.0, &c, &m, 1, &set, ConnectMethod::Enumerate).unwrap();
        let d0 = expected_degree_count(100.0, &c, &m, 0, &set).unwrap();
        assert_eq!(n1.value, d0.value);
        let z = phi(Kernel::Constant { p: 0.0 }, &m);
        let n2 = expected_k_components(10.0, &z, &m, 2, &set, ConnectMethod::Enumerate).unwrap();
        assert_eq!(n2.value, 0.0);
        // Constant p, k = 2: (s^2/2) p exp(-s (1 - (1-p)^2)).
        let (s, p) = (10.0, 0.01);
        let c = phi(Kernel::Constant { p }, &m);
        let n2 = expected_k_components(s, &c, &m, 2, &set, ConnectMethod::Enumerate).unwrap();
        let direct = s * s / 2.0 * p * (-s * (2.0 * p - p * p)).exp();
        assert!((n2.value - direct).abs() < 1e-12);
    }

    #[test]
    fn components_monte_carlo_is_unbiased() {
        // Hard disk on the torus with r < 1/4: two points at distance t <= r
        // exclude the union of two disks, whose area is known in closed form.
        let m = torus2();
        let r: f64 = 0.05;
        let s = 60.0;
        let hd = phi(Kernel::HardDisk { r }, &m);
        let union = |t: f64| {
            let lens = 2.0 * r * r * (t / (2.0 * r)).acos() - 0.5 * t * (4.0 * r * r - t * t).sqrt();
            2.0 * PI * r * r - lens
        };
        let n = 100_000;
        // E N_2 = (s^2/2) int_0^r 2 pi t exp(-s A(t)) dt.
        let oracle = s * s / 2.0
            * (0..n)
                .map(|i| {
                    let t = (i as f64 + 0.5) / n as f64 * r;
                    2.0 * PI * t * (-s * union(t)).exp() * r / n as f64
                })
                .sum::<f64>();
        let set = IntegrationSettings {
            outer_samples: 200_000,
            inner_samples: Some(240),
            seed: 9,
        };
        let e = expected_k_components(s, &hd, &m, 2, &set, ConnectMethod::Enumerate).unwrap();
        assert!((e.value - oracle).abs() < 4.0 * e.std_error, "{e:?} vs {oracle}");
    }

    #[test]
    fn edges_examples() {
        let m = torus2();
        let set = IntegrationSettings::default();
        let e = expected_edges(100.0, &phi(Kernel::Constant { p: 2e-4 }, &m), &m, &set).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
        let e = expected_edges(100.0, &phi(Kernel::HardDisk { r: 0.05 }, &m), &m, &set).unwrap();
        assert!((e.value - 5000.0 * PI * 0.0025).abs() < 1e-9);
        let e = expected_edges(5.0, &phi(Kernel::Constant { p: 0.0 }, &m), &m, &set).unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn connected_k_examples() {
        let m = torus2();
        let set = quick();
        let one = phi(Kernel::Constant { p: 1.0 }, &m);
        let h3 = expected_connected_k(2.0, &one, &m, 3, &set, ConnectMethod::Enumerate).unwrap();
        assert!((h3.value - 4.0 / 3.0).abs() < 1e-12);
        let hd = phi(Kernel::HardDisk { r: 0.05 }, &m);
        let h2 = expected_connected_k(100.0, &hd, &m, 2, &set, ConnectMethod::Enumerate).unwrap();
        let e = expected_edges(100.0, &hd, &m, &set).unwrap();
        assert_eq!(h2.value, e.value);
        let p = 1e-3;
        let c = phi(Kernel::Constant { p }, &m);
        let h3 = expected_connected_k(50.0, &c, &m, 3, &set, ConnectMethod::Enumerate).unwrap();
        let oracle = 50f64.powi(3) / 6.0 * (3.0 * p * p - 2.0 * p * p * p);
        assert!((h3.value - oracle).abs() < 1e-12 * oracle, "{} {oracle}", h3.value);
    }

    #[test]
    fn edge_bound_examples() {
        let m = torus2();
        let set = IntegrationSettings::default();
        let b = edge_stein_bound(100.0, &phi(Kernel::Constant { p: 2e-4 }, &m), &m, &set).unwrap();
        assert!((b.alpha - 1.0).abs() < 1e-12);
        assert!((b.tv_bound - 0.04).abs() < 1e-12);
        assert!((b.w_bound - 0.12).abs() < 1e-12);
        let b = edge_stein_bound(100.0, &phi(Kernel::Constant { p: 0.0 }, &m), &m, &set).unwrap();
        assert_eq!(b.tv_bound, 0.0);
        let s: f64 = 100.0;
        let r = (2.0 / (s * s) / PI).sqrt();
        let b = edge_stein_bound(s, &phi(Kernel::HardDisk { r }, &m), &m, &set).unwrap();
        let a = s * s / 2.0 * PI * r * r;
        let oracle = (1.0f64 / a).min(1.0) * s.powi(3) * (2.0 / (s * s)).powi(2);
        assert!((b.tv_bound - oracle).abs() < 1e-12);
    }

    #[test]
    fn edge_bound_monte_carlo_two_replica() {
        let m = ProbabilityMeasure::uniform_cube(1).unwrap();
        let hd = phi(Kernel::HardDisk { r: 0.1 }, &m);
        let s = 10.0;
        // Oracle: int g^2 with g(x) = min(x, r) + min(1 - x, r), by midpoint rule.
        let n = 200_000;
        let g2: f64 = (0..n)
            .map(|i| {
                let x = (i as f64 + 0.5) / n as f64;
                (x.min(0.1) + (1.0 - x).min(0.1)).powi(2)
            })
            .sum::<f64>()
            / n as f64;
        let b = edge_stein_bound(s, &hd, &m, &quick()).unwrap();
        let integral_se = b.std_error / (1.0f64 / b.alpha).min(1.0);
        assert!((b.integral - s.powi(3) * g2).abs() < 4.0 * integral_se);
    }

    #[test]
    fn ustat_examples() {
        let m = torus2();
        let set = IntegrationSettings {
            outer_samples: 2_000,
            inner_samples: Some(50),
            seed: 1,
        };
        let b = ustat_gamma(2, &|_: &[Point]| true, 10.0, &m, &set).unwrap();
        assert!((b.integral - 2000.0).abs() < 1e-9);
        assert!((b.alpha - 50.0).abs() < 1e-9);
        let b = ustat_gamma(2, &|_: &[Point]| false, 10.0, &m, &set).unwrap();
        assert_eq!((b.integral, b.alpha, b.tv_bound), (0.0, 0.0, 0.0));
        let asym = |xs: &[Point]| xs[0].coords()[0] < xs[1].coords()[0];
        assert!(ustat_gamma(2, &asym, 10.0, &m, &set).is_err());
    }

    #[test]
    fn ustat_constant_kernel_all_terms() {
        // h == 1, k = 3: gamma = sum_l 3!/(l! ((3-l)!)^2) s^(6-l).
        let m = torus2();
        let set = IntegrationSettings {
            outer_samples: 100,
            inner_samples: Some(3),
            seed: 1,
        };
        let s: f64 = 4.0;
        let b = ustat_gamma(3, &|_: &[Point]| true, s, &m, &set).unwrap();
        let oracle = 6.0 / 4.0 * s.powi(5) + 6.0 / 2.0 * s.powi(4);
        assert!((b.integral - oracle).abs() < 1e-9 * oracle);
    }

    #[test]
    fn ustat_matches_edge_bound_for_indicator() {
        let m = torus2();
        let s: f64 = 100.0;
        let r = 0.01;
        let hd = phi(Kernel::HardDisk { r }, &m);
        let sel = DeterministicConnected::new(&hd).unwrap();
        let set = IntegrationSettings {
            outer_samples: 4_000,
            inner_samples: Some(4_000),
            seed: 2,
        };
        let u = ustat_gamma(2, &sel, s, &m, &set).unwrap();
        let e = edge_stein_bound(s, &hd, &m, &set).unwrap();
        let se = u.std_error.hypot(e.std_error);
        assert!((u.tv_bound - e.tv_bound).abs() < 3.0 * se, "{u:?} {e:?}");
    }

    #[test]
    fn calibration_examples() {
        let m = torus2();
        let set = IntegrationSettings::default();
        let c = calibrate_parameter(
            &Kernel::HardDisk { r: 0.1 },
            &m,
            1000.0,
            1.0,
            CalibrationStatistic::Degree(0),
            1e-9,
            &set,
        )
        .unwrap();
        let oracle = ((1000f64).ln() / 1000.0 / PI).sqrt();
        assert!((c.value - oracle).abs() < 1e-12);
        let c = calibrate_parameter(
            &Kernel::Constant { p: 0.5 },
            &m,
            100.0,
            1.0,
            CalibrationStatistic::Degree(0),
            1e-9,
            &set,
        )
        .unwrap();
        assert!((c.value - (100f64).ln() / 100.0).abs() < 1e-12);
        let err = calibrate_parameter(
            &Kernel::Constant { p: 0.5 },
            &m,
            100.0,
            150.0,
            CalibrationStatistic::Degree(0),
            1e-6,
            &set,
        );
        assert!(matches!(err, Err(Error::Calibration(_))));
    }

    #[test]
    fn calibration_by_bisection_is_idempotent() {
        // Hard disk in the unit interval has no exact law, so bisection runs
        // on fixed-seed Monte Carlo estimates.
        let m = ProbabilityMeasure::uniform_cube(1).unwrap();
        let set = IntegrationSettings {
            outer_samples: 10_000,
            inner_samples: Some(1_000),
            seed: 4,
        };
        let stat = CalibrationStatistic::Degree(0);
        let c = calibrate_parameter(&Kernel::HardDisk { r: 0.1 }, &m, 50.0, 5.0, stat, 1e-3, &set).unwrap();
        assert_eq!(c.method, Method::MonteCarlo);
        let again = stat
            .expectation(50.0, &phi(c.kernel.clone(), &m), &m, &set)
            .unwrap();
        assert!((again.value - 5.0).abs() <= 1e-3);
    }

    #[test]
    fn degree_ratio_examples() {
        let set = IntegrationSettings::default();
        let m = torus2();
        let (s, p) = (100.0, 0.03);
        let r = degree_ratio_check(s, &phi(Kernel::Constant { p }, &m), &m, 2, Some(1.0), &set).unwrap();
        assert!((r.ratio - s * p / 2.0).abs() < 1e-12);
        assert!((r.lower - r.upper).abs() < 1e-15 && r.pass);
        let r = degree_ratio_check(s, &phi(Kernel::HardDisk { r: 0.05 }, &m), &m, 1, None, &set).unwrap();
        assert!(r.pass && (r.epsilon - 1.0).abs() < 1e-15);
        let cube = ProbabilityMeasure::uniform_cube(1).unwrap();
        let part = phi(Kernel::PartitionCounterexample { s: 10.0 }, &cube);
        let r = degree_ratio_check(10.0, &part, &cube, 1, None, &set).unwrap();
        assert!((r.epsilon - 1.0 / 9.0).abs() < 1e-12);
        assert!(r.pass && r.lower < r.ratio && r.ratio < r.upper);
    }
}
