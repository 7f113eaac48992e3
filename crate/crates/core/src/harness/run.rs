//! Replication loop.

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, Scenario, Statistic};
use crate::analytics::{calibrate_parameter, Calibration};
use crate::connection::ConnectionFunction;
use crate::error::Result;
use crate::graph::Graph;
use crate::rng::replication_seed;
use crate::sampler::{
    build_graph, capped_degrees, sample_binomial_configuration, sample_poisson_configuration,
    Construction, MarkedConfiguration, Process,
};
use crate::statespace::ProbabilityMeasure;
use crate::stats::{component_counts, connected_induced_count, degree_counts, DegreeHistogram};

/// One simulated graph reduced to the requested counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReplicationRecord {
    pub replication: usize,
    pub seed: u64,
    pub vertices: usize,
    /// One entry per column, in column order.
    pub values: Vec<u64>,
}

/// A configuration resolved into sampling objects, with the kernel knob
/// calibrated if requested.
#[derive(Debug, Clone)]
pub struct PreparedExperiment {
    pub config: ExperimentConfig,
    pub measure: ProbabilityMeasure,
    pub phi: ConnectionFunction,
    pub calibration: Option<Calibration>,
}

impl PreparedExperiment {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let mut config = config.clone();
        let measure = config.space.measure()?;
        let calibration = match &config.connection.calibrate {
            Some(spec) => {
                let c = calibrate_parameter(
                    &config.connection.kernel,
                    &measure,
                    config.intensity(),
                    spec.target,
                    spec.target_statistic()?,
                    spec.tolerance,
                    &config.integration,
                )?;
                config.connection.kernel = c.kernel.clone();
                Some(c)
            }
            None => None,
        };
        let phi = ConnectionFunction::new(config.connection.kernel.clone(), &measure)?;
        Ok(PreparedExperiment {
            config,
            measure,
            phi,
            calibration,
        })
    }

    /// Column names: the requested statistics, followed by their binomial
    /// counterparts in the binomial-poisson scenario.
    pub fn columns(&self) -> Vec<String> {
        let stats = &self.config.run.statistics;
        let mut cols: Vec<String> = stats.iter().map(|s| s.to_string()).collect();
        if self.binomial_count().is_some() {
            cols.extend(stats.iter().map(|s| format!("{s}_binomial")));
        }
        cols
    }

    fn binomial_count(&self) -> Option<usize> {
        match self.config.scenario {
            Scenario::BinomialPoisson { count } => Some(count),
            _ => None,
        }
    }

    pub fn replication_seed(&self, index: usize) -> u64 {
        replication_seed(self.config.run.master_seed, index as u64)
    }

    /// Marked configuration of replication `index`.
    pub fn configuration(&self, index: usize) -> Result<MarkedConfiguration> {
        let seed = self.replication_seed(index);
        match self.config.process.process {
            Process::Poisson { intensity } => sample_poisson_configuration(&self.measure, intensity, seed),
            Process::Binomial { count } => sample_binomial_configuration(&self.measure, count, seed),
        }
    }

    /// Graph of replication `index`.
    pub fn graph(&self, index: usize) -> Result<Graph> {
        let cfg = self.configuration(index)?;
        Ok(build_graph(&cfg, &self.phi, self.config.process.construction))
    }

    pub fn replicate(&self, index: usize) -> Result<ReplicationRecord> {
        let seed = self.replication_seed(index);
        let construction = self.config.process.construction;
        let stats = &self.config.run.statistics;
        let cfg = self.configuration(index)?;
        let mut values = evaluate(&cfg, &self.phi, construction, stats)?;
        if let Some(n) = self.binomial_count() {
            let b = sample_binomial_configuration(&self.measure, n, seed)?;
            values.extend(evaluate(&b, &self.phi, construction, stats)?);
        }
        Ok(ReplicationRecord {
            replication: index,
            seed,
            vertices: cfg.len(),
            values,
        })
    }

    /// All replications, sorted by index. Work is spread over the current
    /// rayon pool; the output does not depend on its size.
    pub fn simulate(&self) -> Result<Vec<ReplicationRecord>> {
        (0..self.config.run.replications)
            .into_par_iter()
            .map(|i| self.replicate(i))
            .collect()
    }
}

/// Counts the requested statistics on one configuration. Degree-only
/// requests avoid materializing the graph.
pub fn evaluate(
    cfg: &MarkedConfiguration,
    phi: &ConnectionFunction,
    construction: Construction,
    stats: &[Statistic],
) -> Result<Vec<u64>> {
    if stats.iter().all(Statistic::is_degree) {
        let cap = stats
            .iter()
            .map(|s| match s {
                Statistic::Degree(j) => *j,
                _ => 0,
            })
            .max()
            .unwrap_or(0);
        let hist = DegreeHistogram::from_degrees(capped_degrees(cfg, phi, construction, cap));
        return Ok(stats
            .iter()
            .map(|s| match s {
                Statistic::Degree(j) => hist.count(*j) as u64,
                _ => unreachable!(),
            })
            .collect());
    }
    let g = build_graph(cfg, phi, construction);
    graph_statistics(&g, stats)
}

/// Counts the requested statistics on a graph.
pub fn graph_statistics(g: &Graph, stats: &[Statistic]) -> Result<Vec<u64>> {
    let hist = degree_counts(g);
    let comps = stats
        .iter()
        .any(|s| matches!(s, Statistic::Components(_)))
        .then(|| component_counts(g));
    stats
        .iter()
        .map(|s| {
            Ok(match *s {
                Statistic::Degree(j) => hist.count(j) as u64,
                Statistic::Components(k) => comps.as_ref().unwrap().count(k) as u64,
                Statistic::Connected(k) => connected_induced_count(g, k)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text_stats: &str, kernel: &str, reps: usize) -> ExperimentConfig {
        let text = format!(
            r#"
[space]
kind = "torus"
dimension = 2
[connection]
{kernel}
[process]
kind = "poisson"
intensity = 5.0
[run]
replications = {reps}
master_seed = 3
statistics = {text_stats}
"#
        );
        ExperimentConfig::parse(&text, "t").unwrap()
    }

    #[test]
    fn isolated_vertices_equal_vertex_count_without_edges() {
        let c = config(r#"["D0"]"#, "family = \"constant\"\np = 0.0", 10_000);
        let recs = PreparedExperiment::new(&c).unwrap().simulate().unwrap();
        let vals: Vec<f64> = recs.iter().map(|r| r.values[0] as f64).collect();
        assert!(recs.iter().all(|r| r.values[0] as usize == r.vertices));
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((mean - 5.0).abs() < 3.0 * (var / n).sqrt());
    }

    #[test]
    fn degree_only_path_matches_full_graph() {
        let c = config(r#"["D0", "D1", "D3"]"#, "family = \"hard-disk\"\nr = 0.3", 50);
        let p = PreparedExperiment::new(&c).unwrap();
        for i in 0..50 {
            let fast = p.replicate(i).unwrap().values;
            let g = p.graph(i).unwrap();
            assert_eq!(fast, graph_statistics(&g, &c.run.statistics).unwrap());
        }
    }

    #[test]
    fn records_are_reproducible() {
        let c = config(r#"["D0", "N2", "H3"]"#, "family = \"constant\"\np = 0.2", 40);
        let p = PreparedExperiment::new(&c).unwrap();
        let a = p.simulate().unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| p.simulate().unwrap());
        assert_eq!(a, b);
        assert_eq!(a[7], p.replicate(7).unwrap());
    }
}
