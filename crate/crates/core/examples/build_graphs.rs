//! Graph construction from a marked configuration, and edge-list output.
//!
//! cargo run --example build_graphs

use irg::sampler::{build_graph, sample_binomial_configuration, sample_poisson_configuration};
use irg::{ConnectionFunction, Construction, Kernel, ProbabilityMeasure};

fn main() -> irg::Result<()> {
    let mu = ProbabilityMeasure::uniform_torus(2)?;
    let phi = ConnectionFunction::new(Kernel::SoftDisk { p: 0.6, r: 0.08 }, &mu)?;

    let cfg = sample_poisson_configuration(&mu, 200.0, 42)?;
    let ordered = build_graph(&cfg, &phi, Construction::Ordered);
    let sequential = build_graph(&cfg, &phi, Construction::Sequential);
    println!(
        "{} vertices: ordered {} edges, sequential {} edges",
        cfg.len(),
        ordered.edge_count(),
        sequential.edge_count()
    );

    // Sequential graphs on nested binomial samples are nested.
    let big = sample_binomial_configuration(&mu, 120, 9)?;
    let g_big = build_graph(&big, &phi, Construction::Sequential);
    let g_small = build_graph(&big.prefix(80), &phi, Construction::Sequential);
    assert_eq!(g_big.induced_prefix(80), g_small);
    println!("graph on 80 points = induced subgraph of graph on 120 points");

    let mut out = Vec::new();
    g_small.induced_prefix(15).write_edge_list(&mut out).expect("in-memory write");
    print!("edge list of the first 15 vertices:\n{}", String::from_utf8_lossy(&out));
    Ok(())
}
