//! Degree counts, component sizes and connected induced subgraph counts.
//!
//! cargo run --example graph_statistics

use irg::sampler::{build_graph_ordered, sample_poisson_configuration};
use irg::stats::{component_counts, connected_induced_count, degree_counts};
use irg::{ConnectionFunction, Kernel, ProbabilityMeasure};

fn main() -> irg::Result<()> {
    let mu = ProbabilityMeasure::uniform_torus(2)?;
    let phi = ConnectionFunction::new(Kernel::HardDisk { r: 0.05 }, &mu)?;
    let g = build_graph_ordered(&sample_poisson_configuration(&mu, 150.0, 5)?, &phi);

    let d = degree_counts(&g);
    let c = component_counts(&g);
    println!("|V| = {}, |E| = {}", g.vertex_count(), g.edge_count());
    println!("D_j  j=0..6: {:?}", (0..=6).map(|j| d.count(j)).collect::<Vec<_>>());
    println!("N_k  k=1..6: {:?}", (1..=6).map(|k| c.count(k)).collect::<Vec<_>>());
    for k in 2..=5 {
        println!("H_{k} = {}", connected_induced_count(&g, k)?);
    }
    Ok(())
}
