//! Poisson and binomial marked configurations on several spaces.
//!
//! cargo run --example point_processes

use irg::sampler::{poisson_point_count, sample_binomial_configuration, sample_poisson_configuration};
use irg::ProbabilityMeasure;

fn main() -> irg::Result<()> {
    let spaces = [
        ("torus d=2", ProbabilityMeasure::uniform_torus(2)?),
        ("cube d=3", ProbabilityMeasure::uniform_cube(3)?),
        ("gaussian d=2", ProbabilityMeasure::gaussian(2)?),
        ("weibull d=1", ProbabilityMeasure::weibull(1, 1.5, 2.0)?),
    ];
    for (name, mu) in &spaces {
        let cfg = sample_poisson_configuration(mu, 50.0, 7)?;
        println!("{name}: Poisson(50) drew {} points", cfg.len());
        for (p, m) in cfg.points().iter().zip(cfg.marks()).take(3) {
            println!("  {:?} first mark {:.6}, next {:.6}", p, m.first(), m.value(1));
        }
    }

    let counts: Vec<u64> = (0..10).map(|seed| poisson_point_count(50.0, seed)).collect();
    println!("Poisson(50) counts over seeds 0..10: {counts:?}");

    // A binomial sample is a prefix of a longer one with the same seed.
    let mu = &spaces[0].1;
    let long = sample_binomial_configuration(mu, 10, 3)?;
    let short = sample_binomial_configuration(mu, 4, 3)?;
    assert_eq!(long.prefix(4).points(), short.points());
    println!("binomial(4) is the first 4 points of binomial(10)");
    Ok(())
}
