//! Convergence sweeps over the intensity `s`.

use serde::Serialize;

use super::config::{ExperimentConfig, Scenario};
use super::report::{build_report, Relation, Verdict};
use super::run::PreparedExperiment;
use crate::connection::Kernel;
use crate::error::{Error, Result};
use crate::sampler::Process;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub s: f64,
    pub knob: Option<f64>,
    pub alpha_analytic: Option<f64>,
    pub alpha_hat: f64,
    pub dtv: f64,
    pub dtv_ci: [f64; 2],
    pub dw: f64,
    /// `"ok"`, or `"FAILED: <reason>"` when the row could not be produced.
    pub status: String,
}

impl SweepRow {
    pub fn failed(&self) -> bool {
        self.status != "ok"
    }

    fn failure(s: f64, reason: &Error) -> Self {
        SweepRow {
            s,
            knob: None,
            alpha_analytic: None,
            alpha_hat: f64::NAN,
            dtv: f64::NAN,
            dtv_ci: [f64::NAN; 2],
            dw: f64::NAN,
            status: format!("FAILED: {reason}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    /// Column summarized in each row (the first requested statistic).
    pub statistic: String,
    pub rows: Vec<SweepRow>,
    pub verdicts: Vec<Verdict>,
    pub all_pass: bool,
}

/// Grid and recalibration flag of a sweep scenario.
pub fn sweep_grid(config: &ExperimentConfig) -> Option<(&[f64], bool)> {
    match &config.scenario {
        Scenario::Sweep { s_grid, recalibrate } => Some((s_grid, *recalibrate)),
        _ => None,
    }
}

/// Config for one grid point: Poisson intensity `s`, the partition
/// threshold tracking `1/s`, and calibration kept only if `recalibrate`.
fn at_intensity(base: &ExperimentConfig, s: f64, recalibrate: bool) -> ExperimentConfig {
    let mut cfg = base.clone();
    cfg.process.process = Process::Poisson { intensity: s };
    cfg.scenario = Scenario::Mecke;
    if let Kernel::PartitionCounterexample { s: t } = &mut cfg.connection.kernel {
        *t = s;
    }
    if !recalibrate {
        cfg.connection.calibrate = None;
    }
    cfg
}

fn row(cfg: &ExperimentConfig) -> Result<SweepRow> {
    let prep = PreparedExperiment::new(cfg)?;
    let records = prep.simulate()?;
    let report = build_report(&prep, &records)?;
    let st = &report.statistics[0];
    Ok(SweepRow {
        s: cfg.intensity(),
        knob: prep.config.connection.kernel.knob().map(|k| k.1),
        alpha_analytic: st.analytic.map(|a| a.value),
        alpha_hat: st.alpha_hat,
        dtv: st.dtv_poisson,
        dtv_ci: st.dtv_ci,
        dw: st.dw_poisson,
        status: "ok".into(),
    })
}

/// Runs `config` at every `s` in `s_grid` (ascending). With `recalibrate`,
/// the knob is re-solved at each `s` from `[connection.calibrate]`.
///
/// Verdicts: for the partition family every row must keep its `d_TV` CI
/// lower edge at or above `dtv_min`; otherwise each row's `d_TV` must not
/// exceed the previous row's CI upper edge. A failed row fails the sweep.
pub fn sweep(config: &ExperimentConfig, s_grid: &[f64], recalibrate: bool) -> Result<SweepTable> {
    if s_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("s_grid must be strictly ascending"));
    }
    if recalibrate && config.connection.calibrate.is_none() {
        return Err(Error::config("recalibrate needs a [connection.calibrate] section"));
    }
    let rows: Vec<SweepRow> = s_grid
        .iter()
        .map(|&s| row(&at_intensity(config, s, recalibrate)).unwrap_or_else(|e| SweepRow::failure(s, &e)))
        .collect();
    let tol = config.tolerances;
    let mut verdicts = Vec::new();
    let partition = matches!(config.connection.kernel, Kernel::PartitionCounterexample { .. });
    for (i, r) in rows.iter().enumerate() {
        if r.failed() {
            verdicts.push(Verdict::new(
                format!("sweep-row-s{}", r.s),
                1.0,
                Relation::AtMost,
                0.0,
                r.status.clone(),
            ));
            continue;
        }
        if partition {
            verdicts.push(Verdict::new(
                format!("dtv-lower-s{}", r.s),
                r.dtv_ci[0],
                Relation::AtLeast,
                tol.dtv_min,
                format!("bootstrap {} CI lower edge vs dtv_min", tol.bootstrap_level),
            ));
        } else if let Some(prev) = rows[..i].iter().rev().find(|p| !p.failed()) {
            verdicts.push(Verdict::new(
                format!("dtv-nonincreasing-s{}", r.s),
                r.dtv,
                Relation::AtMost,
                prev.dtv_ci[1],
                format!("previous row's bootstrap {} CI upper edge", tol.bootstrap_level),
            ));
        }
    }
    let all_pass = verdicts.iter().all(|v| v.pass);
    Ok(SweepTable {
        statistic: config.run.statistics[0].to_string(),
        rows,
        verdicts,
        all_pass,
    })
}
