//! Two-block kernel whose isolated-vertex count is asymptotically
//! Bernoulli(1/e) instead of Poisson.
//!
//! cargo run --release --example counterexample

use irg::harness::{run_experiment, ExperimentConfig};

fn main() -> irg::Result<()> {
    for s in [100.0, 1000.0, 10_000.0] {
        let cfg = ExperimentConfig::counterexample(s, 5000, 1)?;
        let (_, report) = run_experiment(&cfg)?;
        let st = &report.statistics[0];
        let pmf: Vec<String> = st.pmf.iter().take(4).map(|p| format!("{p:.4}")).collect();
        println!(
            "s = {s:>6}: P(D0 = 0..3) = [{}], d_TV to Poisson(alpha_hat) {:.4} [{:.4}, {:.4}]",
            pmf.join(", "),
            st.dtv_poisson,
            st.dtv_ci[0],
            st.dtv_ci[1]
        );
    }
    println!("limit: P(D0 = 1) = 1/e = {:.4}", (-1f64).exp());
    Ok(())
}
