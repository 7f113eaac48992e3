//! Experiment configuration files.
//!
//! A configuration is a TOML document with the sections `[space]`,
//! `[connection]` (optionally with `[connection.calibrate]`), `[process]`,
//! `[run]`, and the optional `[integration]`, `[scenario]` and
//! `[tolerances]`. Unknown keys are rejected and every error carries a
//! `file:line:column` location.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::analytics::{CalibrationStatistic, IntegrationSettings};
use crate::connection::{ConnectionFunction, Kernel};
use crate::error::{Error, Result};
use crate::sampler::{Construction, Process};
use crate::statespace::{Density, ProbabilityMeasure, SpaceKind, TabulatedDensity};

pub const MAX_DEGREE_STAT: usize = 16;
pub const MAX_COMPONENT_STAT: usize = 5;
pub const MAX_SUBGRAPH_STAT: usize = 5;

/// A requested per-graph count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistic {
    /// `D_j`, vertices of degree `j`.
    Degree(usize),
    /// `N_k`, components with `k` vertices.
    Components(usize),
    /// `H_k`, connected induced `k`-subgraphs.
    Connected(usize),
}

impl Statistic {
    pub fn is_degree(&self) -> bool {
        matches!(self, Statistic::Degree(_))
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statistic::Degree(j) => write!(f, "D{j}"),
            Statistic::Components(k) => write!(f, "N{k}"),
            Statistic::Connected(k) => write!(f, "H{k}"),
        }
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::config(format!("unknown statistic {s:?}; expected Dj, Nk or Hk"));
        let (head, tail) = s.split_at_checked(1).ok_or_else(bad)?;
        let n: usize = tail.parse().map_err(|_| bad())?;
        match head {
            "D" if n <= MAX_DEGREE_STAT => Ok(Statistic::Degree(n)),
            "N" if (1..=MAX_COMPONENT_STAT).contains(&n) => Ok(Statistic::Components(n)),
            "H" if (2..=MAX_SUBGRAPH_STAT).contains(&n) => Ok(Statistic::Connected(n)),
            "D" | "N" | "H" => Err(Error::config(format!(
                "statistic {s} outside supported range (D0..D{MAX_DEGREE_STAT}, \
                 N1..N{MAX_COMPONENT_STAT}, H2..H{MAX_SUBGRAPH_STAT})"
            ))),
            _ => Err(bad()),
        }
    }
}

impl Serialize for Statistic {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Statistic {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Density table of the `[space]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DensitySpec {
    #[default]
    Uniform,
    Gaussian,
    Weibull {
        shape: f64,
        scale: f64,
    },
    Tabulated {
        bins: usize,
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub kind: SpaceKind,
    pub dimension: usize,
    #[serde(default)]
    pub density: DensitySpec,
}

impl SpaceSpec {
    pub fn measure(&self) -> Result<ProbabilityMeasure> {
        let density = match &self.density {
            DensitySpec::Uniform => Density::Uniform,
            DensitySpec::Gaussian => Density::IsotropicGaussian,
            DensitySpec::Weibull { shape, scale } => Density::ProductWeibull {
                shape: *shape,
                scale: *scale,
            },
            DensitySpec::Tabulated { bins, values } => {
                Density::Tabulated(TabulatedDensity::new(self.dimension, *bins, values.clone())?)
            }
        };
        ProbabilityMeasure::new(self.kind, self.dimension, density)
    }
}

/// `[connection.calibrate]`: solve for the kernel knob before running.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateSpec {
    pub target: f64,
    #[serde(default = "default_calibration_statistic")]
    pub statistic: Statistic,
    #[serde(default = "default_calibration_tolerance")]
    pub tolerance: f64,
}

fn default_calibration_statistic() -> Statistic {
    Statistic::Degree(0)
}

fn default_calibration_tolerance() -> f64 {
    1e-9
}

impl CalibrateSpec {
    pub fn target_statistic(&self) -> Result<CalibrationStatistic> {
        match self.statistic {
            Statistic::Degree(j) => Ok(CalibrationStatistic::Degree(j)),
            Statistic::Components(k) => Ok(CalibrationStatistic::Components(k)),
            Statistic::Connected(_) => Err(Error::config(
                "calibration targets D_j or N_k, not H_k",
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectionSpec {
    #[serde(flatten)]
    pub kernel: Kernel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibrate: Option<CalibrateSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    #[serde(flatten)]
    pub process: Process,
    #[serde(default)]
    pub construction: Construction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub replications: usize,
    #[serde(default)]
    pub master_seed: u64,
    pub statistics: Vec<Statistic>,
    /// Edge lists are written for the first `dump_graphs` replications.
    #[serde(default)]
    pub dump_graphs: usize,
}

/// Named verification scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Scenario {
    /// Simulation means against analytic expectations.
    #[default]
    Mecke,
    /// `d_TV` of the first statistic to its Poisson limit, plus the second
    /// factorial moment.
    RggPoissonLimit,
    /// Partition kernel: `D_0` is asymptotically Bernoulli, not Poisson.
    Counterexample,
    /// `H_2` against the edge-count Stein bound.
    EdgeStein,
    /// `H_2` against the U-statistic bound, cross-checked with the edge bound.
    Ustat,
    /// Standardized first statistic against the normal CDF.
    Normality,
    /// Same seeds with `count` i.i.d. points, compared with the Poisson run.
    BinomialPoisson { count: usize },
    /// Repeats the experiment over an intensity grid.
    Sweep {
        s_grid: Vec<f64>,
        #[serde(default)]
        recalibrate: bool,
    },
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Mecke => "mecke",
            Scenario::RggPoissonLimit => "rgg-poisson-limit",
            Scenario::Counterexample => "counterexample",
            Scenario::EdgeStein => "edge-stein",
            Scenario::Ustat => "ustat",
            Scenario::Normality => "normality",
            Scenario::BinomialPoisson { .. } => "binomial-poisson",
            Scenario::Sweep { .. } => "sweep",
        }
    }
}

/// Verdict thresholds. Defaults are the documented acceptance values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Means must lie within this many combined standard errors.
    pub mean_se: f64,
    /// Upper limit on the `d_TV` CI upper edge in the Poisson-limit scenario.
    pub dtv_max: f64,
    /// `|P[D_0 = 1] - e^-1|` limit in the counterexample scenario.
    pub bernoulli_p1: f64,
    /// Lower limit on the `d_TV` CI lower edge in the counterexample scenario.
    pub dtv_min: f64,
    /// Added to Stein bounds before comparing with the `d_TV` CI upper edge.
    pub bound_margin: f64,
    /// Combined standard errors allowed between U-statistic and edge bounds.
    pub bound_agreement_se: f64,
    /// Allowed `|F(z) - Phi(z)|` at `z = -1, 0, 1`.
    pub normality: f64,
    /// Upper limit on the two-sample `d_TV` CI upper edge.
    pub binomial_dtv_max: f64,
    pub bootstrap_resamples: usize,
    pub bootstrap_level: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            mean_se: 3.0,
            dtv_max: 0.03,
            bernoulli_p1: 0.02,
            dtv_min: 0.08,
            bound_margin: 0.01,
            bound_agreement_se: 2.0,
            normality: 0.05,
            binomial_dtv_max: 0.05,
            bootstrap_resamples: 200,
            bootstrap_level: 0.95,
        }
    }
}

/// A parsed experiment with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub space: SpaceSpec,
    pub connection: ConnectionSpec,
    pub process: ProcessSpec,
    pub run: RunSpec,
    #[serde(default)]
    pub integration: IntegrationSettings,
    #[serde(default)]
    pub scenario: Scenario,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl ExperimentConfig {
    /// Parses and validates a configuration; `origin` names the source in
    /// error locations.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let location = match e.span() {
                Some(span) => {
                    let (line, col) = line_col(text, span.start);
                    format!("{origin}:{line}:{col}")
                }
                None => origin.to_string(),
            };
            Error::Parse {
                location,
                message: e.message().to_string(),
            }
        })?;
        cfg.validate().map_err(|e| Error::Parse {
            location: origin.to_string(),
            message: e.to_string(),
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let measure = self.space.measure()?;
        ConnectionFunction::new(self.connection.kernel.clone(), &measure)?;
        match self.process.process {
            Process::Poisson { intensity } if !(intensity > 0.0 && intensity.is_finite()) => {
                return Err(Error::config("process intensity must be positive"))
            }
            Process::Binomial { count: 0 } => {
                return Err(Error::config("process count must be at least 1"))
            }
            _ => {}
        }
        if self.run.replications == 0 {
            return Err(Error::config("replications must be at least 1"));
        }
        if self.run.statistics.is_empty() {
            return Err(Error::config("at least one statistic must be requested"));
        }
        if let Some(c) = &self.connection.calibrate {
            c.target_statistic()?;
            if self.connection.kernel.knob().is_none() {
                return Err(Error::config(format!(
                    "{} has no knob to calibrate",
                    self.connection.kernel.family_name()
                )));
            }
        }
        let needs_h2 = matches!(
            self.scenario,
            Scenario::EdgeStein | Scenario::Ustat
        );
        if needs_h2 && self.run.statistics[0] != Statistic::Connected(2) {
            return Err(Error::config(format!(
                "scenario {} requires H2 as the first statistic",
                self.scenario.name()
            )));
        }
        match &self.scenario {
            Scenario::Counterexample
                if !matches!(self.connection.kernel, Kernel::PartitionCounterexample { .. }) =>
            {
                return Err(Error::config(
                    "counterexample scenario requires the partition-counterexample family",
                ))
            }
            Scenario::Counterexample | Scenario::RggPoissonLimit
                if self.run.statistics[0] != Statistic::Degree(0) =>
            {
                return Err(Error::config(format!(
                    "scenario {} requires D0 as the first statistic",
                    self.scenario.name()
                )))
            }
            Scenario::BinomialPoisson { count: 0 } => {
                return Err(Error::config("binomial-poisson count must be at least 1"))
            }
            Scenario::BinomialPoisson { .. }
                if !matches!(self.process.process, Process::Poisson { .. })
                    || self.process.construction != Construction::Sequential =>
            {
                return Err(Error::config(
                    "binomial-poisson scenario needs a poisson process with sequential construction",
                ))
            }
            Scenario::Sweep { s_grid, .. }
                if s_grid.windows(2).any(|w| w[0] >= w[1]) || s_grid.iter().any(|&s| !(s > 0.0)) =>
            {
                return Err(Error::config("s_grid must be positive and strictly ascending"));
            }
            _ => {}
        }
        let t = &self.tolerances;
        if t.bootstrap_resamples == 0 || !(t.bootstrap_level > 0.0 && t.bootstrap_level < 1.0) {
            return Err(Error::config("bootstrap needs resamples >= 1 and level in (0, 1)"));
        }
        Ok(())
    }

    /// Partition-kernel experiment at intensity `s` with threshold `1/s`,
    /// recording `D0` under the counterexample scenario.
    pub fn counterexample(s: f64, replications: usize, master_seed: u64) -> Result<Self> {
        let cfg = ExperimentConfig {
            space: SpaceSpec {
                kind: SpaceKind::UnitCube,
                dimension: 1,
                density: DensitySpec::Uniform,
            },
            connection: ConnectionSpec {
                kernel: Kernel::PartitionCounterexample { s },
                calibrate: None,
            },
            process: ProcessSpec {
                process: Process::Poisson { intensity: s },
                construction: Construction::Ordered,
            },
            run: RunSpec {
                replications,
                master_seed,
                statistics: vec![Statistic::Degree(0)],
                dump_graphs: 0,
            },
            integration: IntegrationSettings::default(),
            scenario: Scenario::Counterexample,
            tolerances: Tolerances::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Intensity used for analytic targets: `s`, or `n` for binomial runs.
    pub fn intensity(&self) -> f64 {
        match self.process.process {
            Process::Poisson { intensity } => intensity,
            Process::Binomial { count } => count as f64,
        }
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}
