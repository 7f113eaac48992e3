//! Fixed-seed statistical checks: sampled laws against exact ones.

use std::collections::HashMap;

use irg::analytics::{
    edge_stein_bound, expected_degree_count, expected_k_components, IntegrationSettings, Method,
};
use irg::distributions::{factorial_moment, normality_diagnostic};
use irg::harness::{run_experiment, ExperimentConfig};
use irg::rng::random_state;
use irg::sampler::{build_graph_ordered, sample_poisson, MarkedConfiguration};
use irg::statespace::{Density, TabulatedDensity};
use irg::{ConnectMethod, ConnectionFunction, Kernel, Point, ProbabilityMeasure, SpaceKind};

/// Pearson statistic of 1-D samples against `density` on `edges`,
/// expected bin masses by composite Simpson.
fn chi_square(mu: &ProbabilityMeasure, edges: &[f64], n: usize, seed: u64) -> (f64, usize) {
    let dens = |x: f64| mu.density(&Point::new(&[x]).unwrap()).unwrap_or(0.0);
    let simpson = |a: f64, b: f64| {
        let m = 200;
        let h = (b - a) / m as f64;
        let mut acc = dens(a) + dens(b);
        for i in 1..m {
            acc += dens(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    };
    let bins = edges.len() - 1;
    let mut counts = vec![0usize; bins + 1];
    let mut rng = random_state(seed);
    for _ in 0..n {
        let x = mu.sample_point(&mut rng).coords()[0];
        let b = edges.partition_point(|&e| e <= x);
        counts[if b == 0 || b > bins { bins } else { b - 1 }] += 1;
    }
    let mut expected: Vec<f64> = edges.windows(2).map(|w| simpson(w[0], w[1])).collect();
    expected.push((1.0 - expected.iter().sum::<f64>()).max(0.0));
    let mut stat = 0.0;
    let mut cells = 0;
    for (c, p) in counts.iter().zip(&expected) {
        let e = p * n as f64;
        if e >= 5.0 {
            stat += (*c as f64 - e).powi(2) / e;
            cells += 1;
        }
    }
    (stat, cells - 1)
}

fn grid(a: f64, b: f64, bins: usize) -> Vec<f64> {
    (0..=bins).map(|i| a + (b - a) * i as f64 / bins as f64).collect()
}

#[test]
fn density_histograms() {
    let tab = TabulatedDensity::new(1, 4, vec![0.4, 1.6, 1.2, 0.8]).unwrap();
    let cases = [
        (ProbabilityMeasure::uniform_cube(1).unwrap(), grid(0.0, 1.0, 20)),
        (ProbabilityMeasure::uniform_torus(1).unwrap(), grid(0.0, 1.0, 20)),
        (ProbabilityMeasure::gaussian(1).unwrap(), grid(-3.5, 3.5, 28)),
        (ProbabilityMeasure::weibull(1, 2.0, 1.5).unwrap(), grid(0.0, 4.0, 24)),
        (ProbabilityMeasure::weibull(1, 0.8, 1.0).unwrap(), grid(0.01, 5.0, 20)),
        (
            ProbabilityMeasure::new(SpaceKind::UnitCube, 1, Density::Tabulated(tab)).unwrap(),
            grid(0.0, 1.0, 16),
        ),
    ];
    for (i, (mu, edges)) in cases.iter().enumerate() {
        let (stat, df) = chi_square(mu, edges, 100_000, 40 + i as u64);
        let limit = df as f64 + 6.0 * (2.0 * df as f64).sqrt();
        assert!(stat <= limit, "{:?}: chi2 {stat:.1} on {df} df", mu.density_spec().name());
    }
}

#[test]
fn three_point_edge_patterns_are_independent_bernoulli() {
    let mu = ProbabilityMeasure::uniform_torus(2).unwrap();
    let p = 0.35;
    let phi = ConnectionFunction::new(Kernel::Constant { p }, &mu).unwrap();
    let pts = vec![
        Point::new(&[0.1, 0.2]).unwrap(),
        Point::new(&[0.5, 0.5]).unwrap(),
        Point::new(&[0.8, 0.3]).unwrap(),
    ];
    let n = 100_000;
    let mut counts: HashMap<u8, usize> = HashMap::new();
    for seed in 0..n as u64 {
        let g = build_graph_ordered(&MarkedConfiguration::with_points(pts.clone(), seed), &phi);
        // Pattern over the stored point pairs, independent of vertex ranks.
        let pos: Vec<usize> = g
            .vertex_points()
            .iter()
            .map(|v| pts.iter().position(|q| q == v).unwrap())
            .collect();
        let mut pattern = 0u8;
        for (u, v) in g.edges() {
            let (a, b) = (pos[u].min(pos[v]), pos[u].max(pos[v]));
            pattern |= 1 << (a + b - 1);
        }
        *counts.entry(pattern).or_default() += 1;
    }
    for pattern in 0u8..8 {
        let k = pattern.count_ones() as i32;
        let exact = p.powi(k) * (1.0 - p).powi(3 - k);
        let freq = counts.get(&pattern).copied().unwrap_or(0) as f64 / n as f64;
        let se = (exact * (1.0 - exact) / n as f64).sqrt();
        assert!((freq - exact).abs() <= 3.0 * se, "pattern {pattern:03b}: {freq} vs {exact}");
    }
}

fn poisson_draws(mean: f64, n: usize, seed: u64) -> Vec<u64> {
    let mut rng = random_state(seed);
    (0..n).map(|_| sample_poisson(mean, &mut rng)).collect()
}

#[test]
fn poisson_64_standardizes_to_normal() {
    let samples = poisson_draws(64.0, 100_000, 64);
    let report = normality_diagnostic(&samples, 64.0).unwrap();
    let at = |z: f64| report.rows.iter().find(|r| r.z == z).unwrap();
    // A lattice law puts mass 0.05 on the atom at z = 0; the midpoint of
    // the left and right limits is the continuity-corrected CDF.
    assert!((at(0.0).midpoint() - 0.5).abs() <= 0.01, "{:?}", at(0.0));
    assert!((at(1.0).midpoint() - 0.8413).abs() <= 0.01, "{:?}", at(1.0));
    assert!((at(-1.0).midpoint() - 0.1587).abs() <= 0.01, "{:?}", at(-1.0));
}

/// `n` stratified quantiles of Poisson(alpha): an exact synthetic sample
/// whose empirical law matches the pmf up to `1/n` per atom.
fn poisson_quantiles(alpha: f64, n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    let (mut k, mut p) = (0u64, (-alpha).exp());
    let mut cdf = p;
    for i in 0..n {
        let u = (i as f64 + 0.5) / n as f64;
        while cdf < u {
            k += 1;
            p *= alpha / k as f64;
            cdf += p;
        }
        out.push(k);
    }
    out
}

#[test]
fn factorial_moments_of_poisson_samples() {
    for alpha in [0.3, 1.0, 2.5, 6.0] {
        let samples = poisson_quantiles(alpha, 50_000);
        for l in 1..=3 {
            let (m, se) = factorial_moment(&samples, l).unwrap();
            let target = alpha.powi(l as i32);
            assert!((m - target).abs() <= 3.0 * se, "alpha {alpha}, l {l}: {m} vs {target} (se {se})");
        }
    }
}

#[test]
fn poisson_sampler_matches_pmf() {
    for (i, alpha) in [0.3f64, 2.5, 29.0, 31.0, 1000.0].into_iter().enumerate() {
        let n = 400_000;
        let draws = poisson_draws(alpha, n, 500 + i as u64);
        let mut counts: HashMap<u64, usize> = HashMap::new();
        for &x in &draws {
            *counts.entry(x).or_default() += 1;
        }
        let (mut stat, mut df) = (0.0, 0usize);
        let mut log_p = -alpha;
        for k in 0..(3.0 * alpha + 30.0) as u64 {
            if k > 0 {
                log_p += alpha.ln() - (k as f64).ln();
            }
            let e = log_p.exp() * n as f64;
            if e >= 20.0 {
                let c = counts.get(&k).copied().unwrap_or(0) as f64;
                stat += (c - e).powi(2) / e;
                df += 1;
            }
        }
        let limit = df as f64 + 6.0 * (2.0 * df as f64).sqrt();
        assert!(stat <= limit, "alpha {alpha}: chi2 {stat:.1} on {df} cells");
    }
}

#[test]
fn single_components_are_isolated_vertices() {
    let settings = IntegrationSettings::default();
    let torus = ProbabilityMeasure::uniform_torus(2).unwrap();
    let phi = ConnectionFunction::new(Kernel::SoftDisk { p: 0.7, r: 0.1 }, &torus).unwrap();
    let a = expected_degree_count(40.0, &phi, &torus, 0, &settings).unwrap();
    let b = expected_k_components(40.0, &phi, &torus, 1, &settings, ConnectMethod::Enumerate).unwrap();
    assert_eq!(a.method, Method::ClosedForm);
    assert_eq!(a.std_error, 0.0);
    assert_eq!(a.value, b.value);

    let gauss = ProbabilityMeasure::gaussian(2).unwrap();
    let phi = ConnectionFunction::new(
        Kernel::Profile {
            profile: irg::connection::Profile::Rayleigh,
            scale: 0.3,
            amplitude: 1.0,
        },
        &gauss,
    )
    .unwrap();
    let a = expected_degree_count(30.0, &phi, &gauss, 0, &settings).unwrap();
    let b = expected_k_components(30.0, &phi, &gauss, 1, &settings, ConnectMethod::Enumerate).unwrap();
    assert_eq!(a.method, Method::MonteCarlo);
    assert!(a.std_error > 0.0);
    let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    assert!((a.value - b.value).abs() <= 3.0 * se + 1e-12);
}

#[test]
fn stein_bounds_share_one_integral() {
    let settings = IntegrationSettings::default();
    let torus = ProbabilityMeasure::uniform_torus(2).unwrap();
    for (kernel, s) in [
        (Kernel::Constant { p: 0.002 }, 50.0),
        (Kernel::Constant { p: 0.2 }, 50.0),
        (Kernel::HardDisk { r: 0.05 }, 60.0),
    ] {
        let phi = ConnectionFunction::new(kernel, &torus).unwrap();
        let b = edge_stein_bound(s, &phi, &torus, &settings).unwrap();
        assert!(b.tv_bound >= 0.0 && b.w_bound >= 0.0);
        let ratio = 3.0 * 1f64.min(b.alpha.powf(-0.5)) / 1f64.min(1.0 / b.alpha);
        assert!((b.w_bound - ratio * b.tv_bound).abs() <= 1e-12 * b.w_bound.max(1.0));
    }
}

/// Simulated means against the Mecke-formula expectations, one family at a
/// time, through the harness.
#[test]
fn simulation_means_match_expectations_per_family() {
    let families = [
        ("torus", "", "family = \"constant\"\np = 0.03"),
        ("torus", "", "family = \"hard-disk\"\nr = 0.08"),
        ("unit-cube", "", "family = \"soft-disk\"\np = 0.6\nr = 0.12"),
        ("torus", "", "family = \"profile\"\nprofile = \"exponential\"\nscale = 0.04"),
        ("euclidean", "gaussian", "family = \"profile\"\nprofile = \"rayleigh\"\nscale = 0.15\namplitude = 0.8"),
        ("euclidean", "gaussian", "family = \"kernel-capped\"\na = 0.9\nkappa = \"gaussian\"\ncap = 0.05"),
        ("unit-cube", "", "family = \"kernel-capped\"\na = 0.002\nkappa = \"inverse-power\"\nbeta = 1.5\ncap = 0.4"),
        ("unit-cube", "", "family = \"partition-counterexample\"\ns = 30.0"),
    ];
    let mut failures = Vec::new();
    for (i, (space, density, kernel)) in families.iter().enumerate() {
        let density = if density.is_empty() {
            String::new()
        } else {
            format!("[space.density]\nname = \"{density}\"\n")
        };
        let text = format!(
            "[space]\nkind = \"{space}\"\ndimension = 2\n{density}\n[connection]\n{kernel}\n\n\
             [process]\nkind = \"poisson\"\nintensity = 30.0\n\n\
             [run]\nreplications = 20000\nmaster_seed = {}\nstatistics = [\"D0\", \"D1\", \"N2\", \"H2\"]\n\n\
             [integration]\nouter_samples = 40000\ninner_samples = 2000\n",
            900 + i
        );
        let cfg = ExperimentConfig::parse(&text, &format!("family{i}")).unwrap();
        let (_, report) = run_experiment(&cfg).unwrap();
        for v in report.verdicts.iter().filter(|v| !v.pass) {
            failures.push(format!("{kernel:?}: {}", v.line()));
        }
    }
    assert!(failures.is_empty(), "{failures:#?}");
}
