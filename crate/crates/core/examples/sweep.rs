//! d_TV of isolated vertices to Poisson(1) as the intensity grows.
//!
//! cargo run --release --example sweep

use irg::harness::{sweep, ExperimentConfig};

fn main() -> irg::Result<()> {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/sweep_rgg.toml");
    let mut cfg = ExperimentConfig::load(&path)?;
    cfg.run.replications = 4000;
    let table = sweep(&cfg, &[125.0, 250.0, 500.0, 1000.0], true)?;
    println!("{:>6} {:>9} {:>8} {:>8} {:>8}", "s", "r", "alpha", "d_TV", "d_W");
    for r in &table.rows {
        println!(
            "{:>6} {:>9.6} {:>8.4} {:>8.4} {:>8.4} {}",
            r.s,
            r.knob.unwrap_or(f64::NAN),
            r.alpha_hat,
            r.dtv,
            r.dw,
            r.status
        );
    }
    for v in &table.verdicts {
        println!("{}", v.line());
    }
    Ok(())
}
