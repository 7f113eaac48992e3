//! Empirical laws, distances to Poisson, factorial moments and normality.
//!
//! cargo run --example distributions

use irg::distributions::{
    bootstrap_tv_interval, empirical_law, factorial_moment, normality_diagnostic, poisson_law,
    tv_distance, wasserstein_distance,
};
use irg::rng::random_state;
use irg::sampler::sample_poisson;

fn main() -> irg::Result<()> {
    let mut rng = random_state(1);
    let samples: Vec<u64> = (0..20_000).map(|_| sample_poisson(1.0, &mut rng)).collect();
    let emp = empirical_law(&samples)?;
    let target = poisson_law(1.0, emp.pmf.len())?;
    let (lo, hi) = bootstrap_tv_interval(&samples, &target, 200, 0.95, 2)?;
    println!(
        "Poisson(1) draws: d_TV {:.4} (95% CI {lo:.4}..{hi:.4}), d_W {:.4}",
        tv_distance(&emp, &target),
        wasserstein_distance(&emp, &target)
    );
    for l in 1..=3 {
        let (m, se) = factorial_moment(&samples, l)?;
        println!("  E(X)_{l} = {m:.4} +- {se:.4}");
    }

    let q = (-1f64).exp();
    let bern: Vec<u64> = (0..20_000).map(|i| u64::from((i as f64 + 0.5) / 20_000.0 < q)).collect();
    let e = empirical_law(&bern)?;
    println!("Bernoulli(1/e) vs Poisson(1/e): d_TV {:.4}", tv_distance(&e, &poisson_law(q, 4)?));

    let big: Vec<u64> = (0..20_000).map(|_| sample_poisson(64.0, &mut rng)).collect();
    for row in normality_diagnostic(&big, 64.0)?.rows {
        println!(
            "  z = {:>2}: P(Z <= z) {:.4}, midpoint {:.4}, Phi {:.4}",
            row.z, row.empirical, row.midpoint(), row.target
        );
    }
    Ok(())
}
