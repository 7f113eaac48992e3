//! Aggregation of replication records and scenario verdicts.

use std::collections::BTreeMap;

use serde::Serialize;

use super::config::{ExperimentConfig, Scenario, Statistic, Tolerances};
use super::run::{PreparedExperiment, ReplicationRecord};
use crate::analytics::{
    edge_stein_bound, expected_connected_k, expected_degree_count, expected_k_components,
    ustat_gamma, Calibration, DeterministicConnected, ExpectationEstimate, SteinBound,
};
use crate::connection::ConnectMethod;
use crate::distributions::{
    bootstrap_tv_interval, bootstrap_two_sample_tv_interval, empirical_law, factorial_moment,
    normality_diagnostic, poisson_law, tv_distance, wasserstein_distance,
};
use crate::error::Result;
use crate::rng::derive_seed;
use crate::sampler::Process;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    AtMost,
    AtLeast,
}

/// A pass/fail check, with the number compared and the limit it used.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub limit: f64,
    /// Human-readable origin of `limit`.
    pub tolerance: String,
    pub pass: bool,
}

impl Verdict {
    pub fn new(name: impl Into<String>, value: f64, relation: Relation, limit: f64, tolerance: impl Into<String>) -> Self {
        let pass = match relation {
            Relation::AtMost => value <= limit,
            Relation::AtLeast => value >= limit,
        };
        Verdict {
            name: name.into(),
            value,
            relation,
            limit,
            tolerance: tolerance.into(),
            pass,
        }
    }

    /// One-line rendering, `PASS name: value <= limit (tolerance)`.
    pub fn line(&self) -> String {
        let op = match self.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        };
        format!(
            "{} {}: {:.6} {op} {:.6} ({})",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.limit,
            self.tolerance
        )
    }
}

/// Empirical law of one column and its distances to a Poisson target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatisticSummary {
    pub statistic: String,
    pub mean: f64,
    pub std_error: f64,
    /// Mecke-formula expectation; absent for binomial columns.
    pub analytic: Option<ExpectationEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic_error: Option<String>,
    pub alpha_hat: f64,
    /// Mean of the Poisson law used for `dtv_poisson` and `dw_poisson`:
    /// the analytic value when present, else `alpha_hat`.
    pub target_alpha: f64,
    pub pmf: Vec<f64>,
    pub dtv_poisson: f64,
    pub dtv_ci: [f64; 2],
    pub dw_poisson: f64,
    /// `l -> [estimate, std_error]` of the descending factorial moment.
    pub factorial_moments: BTreeMap<String, [f64; 2]>,
    /// `z -> [empirical, target]`; empty when `alpha_hat` is zero.
    pub normality: BTreeMap<String, [f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedBound {
    pub name: String,
    pub bound: SteinBound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryReport {
    pub scenario: String,
    pub replications: usize,
    pub columns: Vec<String>,
    pub statistics: Vec<StatisticSummary>,
    pub calibration: Option<Calibration>,
    pub bounds: Vec<NamedBound>,
    pub verdicts: Vec<Verdict>,
    pub all_pass: bool,
    /// The resolved configuration, calibrated kernel and defaults included.
    pub config: ExperimentConfig,
}

impl SummaryReport {
    pub fn statistic(&self, name: &str) -> Option<&StatisticSummary> {
        self.statistics.iter().find(|s| s.statistic == name)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }
}

/// Values of column `col` across records.
pub fn column(records: &[ReplicationRecord], col: usize) -> Vec<u64> {
    records.iter().map(|r| r.values[col]).collect()
}

fn analytic_for(prep: &PreparedExperiment, stat: Statistic) -> Result<ExpectationEstimate> {
    let s = prep.config.intensity();
    let (phi, mu, set) = (&prep.phi, &prep.measure, &prep.config.integration);
    match stat {
        Statistic::Degree(j) => expected_degree_count(s, phi, mu, j, set),
        Statistic::Components(k) => {
            expected_k_components(s, phi, mu, k, set, ConnectMethod::default_for(k))
        }
        Statistic::Connected(k) => {
            expected_connected_k(s, phi, mu, k, set, ConnectMethod::default_for(k))
        }
    }
}

/// Summarizes one column against Poisson(`target`), or Poisson(mean) when
/// `target` is `None`.
pub fn summarize(
    name: &str,
    samples: &[u64],
    analytic: Option<ExpectationEstimate>,
    tol: &Tolerances,
    seed: u64,
) -> Result<StatisticSummary> {
    let (mean, se) = factorial_moment(samples, 1)?;
    let target_alpha = analytic.map_or(mean, |a| a.value);
    let emp = empirical_law(samples)?;
    let pois = poisson_law(target_alpha, emp.pmf.len())?;
    let dtv_ci = bootstrap_tv_interval(samples, &pois, tol.bootstrap_resamples, tol.bootstrap_level, seed)?;
    let mut factorial_moments = BTreeMap::new();
    for l in 1..=3 {
        let (e, s) = factorial_moment(samples, l)?;
        factorial_moments.insert(l.to_string(), [e, s]);
    }
    let mut normality = BTreeMap::new();
    if mean > 0.0 {
        for row in normality_diagnostic(samples, mean)?.rows {
            normality.insert(format!("{}", row.z), [row.empirical, row.target]);
        }
    }
    Ok(StatisticSummary {
        statistic: name.to_string(),
        mean,
        std_error: se,
        analytic,
        analytic_error: None,
        alpha_hat: mean,
        target_alpha,
        dtv_poisson: tv_distance(&emp, &pois),
        dtv_ci: [dtv_ci.0, dtv_ci.1],
        dw_poisson: wasserstein_distance(&emp, &pois),
        pmf: emp.pmf,
        factorial_moments,
        normality,
    })
}

/// Aggregates records into a report with the scenario's verdicts.
pub fn build_report(prep: &PreparedExperiment, records: &[ReplicationRecord]) -> Result<SummaryReport> {
    let cfg = &prep.config;
    let tol = cfg.tolerances;
    let columns = prep.columns();
    let stats = &cfg.run.statistics;
    let poisson = matches!(cfg.process.process, Process::Poisson { .. });
    let mut summaries = Vec::with_capacity(columns.len());
    for (c, name) in columns.iter().enumerate() {
        let primary = c < stats.len();
        let (analytic, err) = if primary {
            match analytic_for(prep, stats[c]) {
                Ok(a) => (Some(a), None),
                Err(e) => (None, Some(e.to_string())),
            }
        } else {
            (None, None)
        };
        let seed = derive_seed(cfg.run.master_seed, &format!("bootstrap-{name}"));
        let mut s = summarize(name, &column(records, c), analytic, &tol, seed)?;
        s.analytic_error = err;
        summaries.push(s);
    }

    let mut verdicts = Vec::new();
    let mut bounds = Vec::new();
    let first = &summaries[0];
    let samples0 = column(records, 0);
    let s = cfg.intensity();
    match &cfg.scenario {
        Scenario::Mecke | Scenario::Sweep { .. } => {
            if poisson {
                for sum in summaries.iter().take(stats.len()) {
                    if let Some(a) = sum.analytic {
                        let se = sum.std_error.hypot(a.std_error);
                        verdicts.push(Verdict::new(
                            format!("mecke-{}", sum.statistic),
                            (sum.mean - a.value).abs(),
                            Relation::AtMost,
                            tol.mean_se * se,
                            format!("{} combined standard errors", tol.mean_se),
                        ));
                    }
                }
            }
        }
        Scenario::RggPoissonLimit => {
            verdicts.push(Verdict::new(
                "dtv-poisson-D0",
                first.dtv_ci[1],
                Relation::AtMost,
                tol.dtv_max,
                format!("bootstrap {} CI upper edge vs dtv_max", tol.bootstrap_level),
            ));
            let col = stats
                .iter()
                .position(|s| *s == Statistic::Components(1))
                .unwrap_or(0);
            let sum = &summaries[col];
            let [m2, se2] = sum.factorial_moments["2"];
            verdicts.push(Verdict::new(
                format!("factorial-moment-2-{}", sum.statistic),
                (m2 - sum.target_alpha.powi(2)).abs(),
                Relation::AtMost,
                tol.mean_se * se2,
                format!("{} standard errors of alpha^2", tol.mean_se),
            ));
        }
        Scenario::Counterexample => {
            let p1 = first.pmf.get(1).copied().unwrap_or(0.0);
            verdicts.push(Verdict::new(
                "bernoulli-p1-D0",
                (p1 - (-1.0f64).exp()).abs(),
                Relation::AtMost,
                tol.bernoulli_p1,
                "bernoulli_p1",
            ));
            let target = poisson_law(first.alpha_hat, first.pmf.len())?;
            let seed = derive_seed(cfg.run.master_seed, "bootstrap-alpha-hat");
            let (lo, _) = bootstrap_tv_interval(
                &samples0,
                &target,
                tol.bootstrap_resamples,
                tol.bootstrap_level,
                seed,
            )?;
            verdicts.push(Verdict::new(
                "dtv-poisson-alpha-hat-D0",
                lo,
                Relation::AtLeast,
                tol.dtv_min,
                format!("bootstrap {} CI lower edge vs dtv_min", tol.bootstrap_level),
            ));
        }
        Scenario::EdgeStein => {
            let b = edge_stein_bound(s, &prep.phi, &prep.measure, &cfg.integration)?;
            verdicts.push(Verdict::new(
                "dtv-poisson-H2-vs-edge-bound",
                first.dtv_ci[1],
                Relation::AtMost,
                b.tv_bound + tol.bound_margin,
                format!("edge Stein bound + bound_margin {}", tol.bound_margin),
            ));
            bounds.push(NamedBound {
                name: "edge".into(),
                bound: b,
            });
        }
        Scenario::Ustat => {
            let sel = DeterministicConnected::new(&prep.phi)?;
            let u = ustat_gamma(2, &sel, s, &prep.measure, &cfg.integration)?;
            let e = edge_stein_bound(s, &prep.phi, &prep.measure, &cfg.integration)?;
            verdicts.push(Verdict::new(
                "dtv-poisson-H2-vs-ustat-bound",
                first.dtv_ci[1],
                Relation::AtMost,
                u.tv_bound + tol.bound_margin,
                format!("U-statistic bound + bound_margin {}", tol.bound_margin),
            ));
            verdicts.push(Verdict::new(
                "ustat-vs-edge-bound",
                (u.tv_bound - e.tv_bound).abs(),
                Relation::AtMost,
                tol.bound_agreement_se * u.std_error.hypot(e.std_error),
                format!("{} combined standard errors", tol.bound_agreement_se),
            ));
            bounds.push(NamedBound {
                name: "ustat".into(),
                bound: u,
            });
            bounds.push(NamedBound {
                name: "edge".into(),
                bound: e,
            });
        }
        Scenario::Normality => {
            let report = normality_diagnostic(&samples0, first.alpha_hat)?;
            for row in report.rows {
                verdicts.push(Verdict::new(
                    format!("normality-{}-z{}", first.statistic, row.z),
                    (row.empirical - row.target).abs(),
                    Relation::AtMost,
                    tol.normality,
                    "normality",
                ));
            }
        }
        Scenario::BinomialPoisson { .. } => {
            for (c, stat) in stats.iter().enumerate() {
                let a = column(records, c);
                let b = column(records, c + stats.len());
                let seed = derive_seed(cfg.run.master_seed, &format!("bootstrap-pair-{stat}"));
                let (_, hi) = bootstrap_two_sample_tv_interval(
                    &a,
                    &b,
                    tol.bootstrap_resamples,
                    tol.bootstrap_level,
                    seed,
                )?;
                verdicts.push(Verdict::new(
                    format!("dtv-binomial-poisson-{stat}"),
                    hi,
                    Relation::AtMost,
                    tol.binomial_dtv_max,
                    format!("two-sample bootstrap {} CI upper edge", tol.bootstrap_level),
                ));
            }
        }
    }
    let all_pass = verdicts.iter().all(|v| v.pass);
    Ok(SummaryReport {
        scenario: cfg.scenario.name().into(),
        replications: records.len(),
        columns,
        statistics: summaries,
        calibration: prep.calibration.clone(),
        bounds,
        verdicts,
        all_pass,
        config: cfg.clone(),
    })
}

/// Prepares, simulates and summarizes an experiment.
pub fn run_experiment(config: &ExperimentConfig) -> Result<(Vec<ReplicationRecord>, SummaryReport)> {
    let prep = PreparedExperiment::new(config)?;
    let records = prep.simulate()?;
    let report = build_report(&prep, &records)?;
    Ok((records, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_relations() {
        assert!(Verdict::new("a", 0.02, Relation::AtMost, 0.03, "t").pass);
        assert!(!Verdict::new("a", 0.02, Relation::AtLeast, 0.03, "t").pass);
        assert!(Verdict::new("a", 0.02, Relation::AtMost, 0.03, "t").line().starts_with("PASS a:"));
    }

    #[test]
    fn summary_of_poisson_samples() {
        let mut rng = crate::rng::random_state(8);
        let samples: Vec<u64> = (0..20_000).map(|_| crate::sampler::sample_poisson(1.5, &mut rng)).collect();
        let s = summarize("D0", &samples, None, &Tolerances::default(), 1).unwrap();
        assert!(s.dtv_poisson < 0.02);
        assert!(s.dtv_ci[0] <= s.dtv_poisson.max(s.dtv_ci[0]) && s.dtv_ci[1] < 0.03);
        let [m2, se] = s.factorial_moments["2"];
        assert!((m2 - 2.25).abs() < 4.0 * se);
        assert_eq!(s.normality.len(), 3);
    }

    #[test]
    fn mecke_scenario_passes_for_isolated_vertices() {
        let text = r#"
[space]
kind = "torus"
dimension = 2
[connection]
family = "constant"
p = 0.05
[process]
kind = "poisson"
intensity = 40.0
[run]
replications = 4000
master_seed = 12
statistics = ["D0", "N2", "H3"]
"#;
        let cfg = ExperimentConfig::parse(text, "t").unwrap();
        let (records, report) = run_experiment(&cfg).unwrap();
        assert_eq!(records.len(), 4000);
        assert_eq!(report.verdicts.len(), 3);
        assert!(report.all_pass, "{:#?}", report.verdicts);
    }
}
