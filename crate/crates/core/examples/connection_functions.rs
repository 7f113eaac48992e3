//! Kernel families, group probabilities and the connectedness probability.
//!
//! cargo run --example connection_functions

use irg::connection::{KappaName, Profile};
use irg::{ConnectMethod, ConnectionFunction, Kernel, Point, ProbabilityMeasure};

fn main() -> irg::Result<()> {
    let mu = ProbabilityMeasure::uniform_torus(2)?;
    let x = Point::new(&[0.05, 0.5])?;
    let y = Point::new(&[0.95, 0.5])?;
    println!("torus distance {:.3}", mu.distance(&x, &y));

    let kernels = [
        Kernel::Constant { p: 0.3 },
        Kernel::HardDisk { r: 0.15 },
        Kernel::SoftDisk { p: 0.5, r: 0.15 },
        Kernel::Profile { profile: Profile::Rayleigh, scale: 0.1, amplitude: 1.0 },
        Kernel::KernelCapped { a: 2.0, kappa: KappaName::Gaussian, beta: None, cap: 0.4 },
        Kernel::KernelCapped { a: 0.01, kappa: KappaName::InversePower, beta: Some(2.0), cap: 1.0 },
    ];
    let group: Vec<Point> = [[0.1, 0.1], [0.15, 0.12], [0.2, 0.1], [0.12, 0.2]]
        .iter()
        .map(|c| Point::new(c))
        .collect::<irg::Result<_>>()?;
    for k in kernels {
        let phi = ConnectionFunction::new(k.clone(), &mu)?;
        let h_enum = phi.connectedness_prob(&group, ConnectMethod::Enumerate)?;
        let h_rec = phi.connectedness_prob(&group, ConnectMethod::SubsetRecursion)?;
        let h_mc = phi.connectedness_prob(&group, ConnectMethod::MonteCarlo { samples: 20_000, seed: 1 })?;
        println!(
            "{:<26} phi(x,y)={:.4} sup={:.3} h4: enum {:.6} rec {:.6} mc {:.4}",
            k.family_name(),
            phi.evaluate(&x, &y),
            phi.sup_phi(),
            h_enum,
            h_rec,
            h_mc
        );
    }

    let phi = ConnectionFunction::new(Kernel::SoftDisk { p: 0.5, r: 0.15 }, &mu)?;
    let (a, b) = group.split_at(2);
    println!(
        "soft-disk: P(edge between groups) = {:.4}, P(no cross edge) = {:.4}",
        phi.group_connect_prob(a, b)?,
        phi.no_cross_edge_prob(&[a.to_vec(), b.to_vec()])?
    );
    Ok(())
}
