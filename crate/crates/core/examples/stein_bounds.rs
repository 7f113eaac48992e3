//! Poisson approximation bounds for the edge count.
//!
//! cargo run --release --example stein_bounds

use irg::analytics::{edge_stein_bound, ustat_gamma, DeterministicConnected, IntegrationSettings};
use irg::{ConnectionFunction, Kernel, ProbabilityMeasure};

fn main() -> irg::Result<()> {
    let mu = ProbabilityMeasure::uniform_torus(2)?;
    let settings = IntegrationSettings {
        outer_samples: 4_000,
        inner_samples: Some(2_000),
        ..IntegrationSettings::default()
    };

    let s = 100.0;
    let phi = ConnectionFunction::new(Kernel::Constant { p: 2e-4 }, &mu)?;
    let b = edge_stein_bound(s, &phi, &mu, &settings)?;
    println!("constant p=2e-4: alpha {:.3}, d_TV <= {:.4}, d_W <= {:.4}", b.alpha, b.tv_bound, b.w_bound);

    // pi r^2 = 2 / s^2 gives alpha = 1.
    let r = (2.0 / std::f64::consts::PI).sqrt() / s;
    let phi = ConnectionFunction::new(Kernel::HardDisk { r }, &mu)?;
    let edge = edge_stein_bound(s, &phi, &mu, &settings)?;
    let h = DeterministicConnected::new(&phi)?;
    let u2 = ustat_gamma(2, &h, s, &mu, &settings)?;
    println!(
        "hard-disk k=2: edge bound {:.4} +- {:.4}, U-statistic bound {:.4} +- {:.4}",
        edge.tv_bound, edge.std_error, u2.tv_bound, u2.std_error
    );

    // Connected triples of a sparse hard-disk graph.
    let phi = ConnectionFunction::new(Kernel::HardDisk { r: 0.02 }, &mu)?;
    let u3 = ustat_gamma(3, &DeterministicConnected::new(&phi)?, 60.0, &mu, &settings)?;
    println!("hard-disk r=0.02 k=3 at s=60: alpha {:.4}, d_TV <= {:.4}", u3.alpha, u3.tv_bound);

    // Any symmetric selection rule works, e.g. "all k points in the left half".
    let left = |xs: &[irg::Point]| xs.iter().all(|p| p.coords()[0] < 0.5);
    let u = ustat_gamma(2, &left, 1.0, &mu, &settings)?;
    println!("pairs in the left half at s=1: alpha {:.4}, d_TV <= {:.4}", u.alpha, u.tv_bound);
    Ok(())
}
