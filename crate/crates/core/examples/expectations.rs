//! Mecke-formula expectations against simulation means.
//!
//! cargo run --release --example expectations

use irg::analytics::{
    expected_connected_k, expected_degree_count, expected_edges, expected_k_components,
    IntegrationSettings,
};
use irg::connection::Profile;
use irg::sampler::{build_graph_ordered, sample_poisson_configuration};
use irg::stats::{component_counts, degree_counts};
use irg::{ConnectMethod, ConnectionFunction, Kernel, ProbabilityMeasure};

fn main() -> irg::Result<()> {
    let settings = IntegrationSettings {
        outer_samples: 4_000,
        ..IntegrationSettings::default()
    };
    let cases = [
        ("constant on torus", ProbabilityMeasure::uniform_torus(2)?, Kernel::Constant { p: 0.05 }, 100.0),
        (
            "rayleigh on gaussian",
            ProbabilityMeasure::gaussian(2)?,
            Kernel::Profile { profile: Profile::Rayleigh, scale: 0.2, amplitude: 1.0 },
            40.0,
        ),
    ];
    for (name, mu, kernel, s) in cases {
        let phi = ConnectionFunction::new(kernel, &mu)?;
        let d0 = expected_degree_count(s, &phi, &mu, 0, &settings)?;
        let n2 = expected_k_components(s, &phi, &mu, 2, &settings, ConnectMethod::Enumerate)?;
        let h2 = expected_edges(s, &phi, &mu, &settings)?;
        let h3 = expected_connected_k(s, &phi, &mu, 3, &settings, ConnectMethod::Enumerate)?;

        let reps = 4000;
        let mut sums = [0.0; 3];
        for seed in 0..reps {
            let g = build_graph_ordered(&sample_poisson_configuration(&mu, s, seed)?, &phi);
            sums[0] += degree_counts(&g).count(0) as f64;
            sums[1] += component_counts(&g).count(2) as f64;
            sums[2] += g.edge_count() as f64;
        }
        let sim = sums.map(|x| x / reps as f64);
        println!("{name}, s = {s} ({:?})", d0.method);
        println!("  E D0 = {:.4} +- {:.4}   simulated {:.4}", d0.value, d0.std_error, sim[0]);
        println!("  E N2 = {:.4} +- {:.4}   simulated {:.4}", n2.value, n2.std_error, sim[1]);
        println!("  E H2 = {:.4} +- {:.4}   simulated {:.4}", h2.value, h2.std_error, sim[2]);
        println!("  E H3 = {:.4} +- {:.4}", h3.value, h3.std_error);
    }
    Ok(())
}
