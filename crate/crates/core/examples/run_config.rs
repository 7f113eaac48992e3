//! Runs a scenario file through the harness and prints its verdicts.
//!
//! cargo run --release --example run_config -- configs/edge_stein.toml [replications]

use std::path::PathBuf;

use irg::harness::{emit, run_experiment, ExperimentConfig, RecordFormat};

fn main() -> irg::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().map_or_else(
        || PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/mecke_isolated.toml"),
        PathBuf::from,
    );
    let mut cfg = ExperimentConfig::load(&path)?;
    if let Some(r) = args.next().and_then(|r| r.parse().ok()) {
        cfg.run.replications = r;
    }
    let (records, report) = run_experiment(&cfg)?;
    for st in &report.statistics {
        println!(
            "{}: mean {:.4} +- {:.4}, analytic {}, d_TV {:.4} [{:.4}, {:.4}], d_W {:.4}",
            st.statistic,
            st.mean,
            st.std_error,
            st.analytic.map_or("-".into(), |a| format!("{:.4}", a.value)),
            st.dtv_poisson,
            st.dtv_ci[0],
            st.dtv_ci[1],
            st.dw_poisson
        );
    }
    for v in &report.verdicts {
        println!("{}", v.line());
    }
    let out = std::env::temp_dir().join("irg-run-config");
    emit(&records, &report, RecordFormat::Csv, &out)?;
    println!("records and summary in {}", out.display());
    Ok(())
}
