//! Homogeneity of the mean field and the degree-ratio sandwich.
//!
//! cargo run --release --example homogeneity

use irg::analytics::{degree_ratio_check, IntegrationSettings};
use irg::{ConnectionFunction, Kernel, ProbabilityMeasure};

fn main() -> irg::Result<()> {
    let settings = IntegrationSettings {
        outer_samples: 4_000,
        ..IntegrationSettings::default()
    };
    let cases = [
        ("hard-disk on torus", ProbabilityMeasure::uniform_torus(2)?, Kernel::HardDisk { r: 0.05 }),
        ("hard-disk on cube", ProbabilityMeasure::uniform_cube(2)?, Kernel::HardDisk { r: 0.05 }),
        ("soft-disk on gaussian", ProbabilityMeasure::gaussian(2)?, Kernel::SoftDisk { p: 0.5, r: 0.3 }),
    ];
    for (name, mu, kernel) in cases {
        let phi = ConnectionFunction::new(kernel, &mu)?;
        let h = phi.homogeneity(&mu, 64, 4000, 3)?;
        println!(
            "{name}: inf g {:.5}, sup g {:.5}, epsilon {:.3}{}",
            h.inf_g,
            h.sup_g,
            h.epsilon_hat,
            if h.certified { " (exact)" } else { "" }
        );
        let r = degree_ratio_check(200.0, &phi, &mu, 1, None, &settings)?;
        println!(
            "  E D1 / E D0 = {:.4} in [{:.4}, {:.4}]: {}",
            r.ratio,
            r.lower,
            r.upper,
            if r.pass { "yes" } else { "no" }
        );
    }
    Ok(())
}
