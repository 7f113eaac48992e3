use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use irg::analytics::{
    calibrate_parameter, edge_stein_bound, expected_connected_k, expected_degree_count,
    expected_k_components, ustat_gamma, DeterministicConnected, Method,
};
use irg::harness::config::CalibrateSpec;
use irg::harness::{
    emit, emit_sweep, run_experiment, sweep, threads_from_env, ExperimentConfig, RecordFormat,
    Scenario, Statistic, PreparedExperiment,
};
use irg::{ConnectMethod, ConnectionFunction, Process};

#[derive(Parser)]
#[command(name = "irg", version, about = "Inhomogeneous random graph simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProcessKind {
    Poisson,
    Binomial,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundKind {
    Edge,
    Ustat,
}

#[derive(Subcommand)]
enum Command {
    /// Run the replications of a config and write records and summary.
    Simulate {
        #[arg(short, long)]
        config: PathBuf,
        /// Master seed override.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long, value_enum)]
        process: Option<ProcessKind>,
        #[arg(long)]
        intensity: Option<f64>,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        replications: Option<usize>,
        /// Write edge lists of the first N replications.
        #[arg(long)]
        dump_graphs: Option<usize>,
    },
    /// Evaluate a Mecke-formula expectation (D<j>, N<k>, H<k>).
    Expect {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(long)]
        formula: Statistic,
    },
    /// Evaluate a Stein-method Poisson approximation bound.
    Bound {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        kind: BoundKind,
        /// Subset size of the U-statistic.
        #[arg(long, default_value_t = 2)]
        k: usize,
    },
    /// Solve the kernel knob so a statistic has the target mean.
    Calibrate {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(long)]
        target: f64,
        #[arg(long, default_value = "D0")]
        statistic: Statistic,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
    /// Repeat an experiment over an intensity grid.
    Sweep {
        #[arg(short, long)]
        config: PathBuf,
        /// Comma-separated intensities; defaults to the config's s_grid.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        #[arg(long)]
        recalibrate: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Partition-kernel experiment showing a non-Poisson limit.
    Counterexample {
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 20_000)]
        replications: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Serialize)]
struct Record {
    value: f64,
    std_error: f64,
    samples: usize,
    method: Method,
}

fn print_json<T: Serialize>(v: &T) -> irg::Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn run(cli: Cli) -> irg::Result<bool> {
    match cli.command {
        Command::Simulate {
            config,
            seed,
            out,
            format,
            process,
            intensity,
            count,
            replications,
            dump_graphs,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.run.master_seed = s;
            }
            if let Some(r) = replications {
                cfg.run.replications = r;
            }
            if let Some(d) = dump_graphs {
                cfg.run.dump_graphs = d;
            }
            let kind = process.unwrap_or(match cfg.process.process {
                Process::Poisson { .. } => ProcessKind::Poisson,
                Process::Binomial { .. } => ProcessKind::Binomial,
            });
            cfg.process.process = match (kind, cfg.process.process) {
                (ProcessKind::Poisson, Process::Poisson { intensity: s }) => Process::Poisson {
                    intensity: intensity.unwrap_or(s),
                },
                (ProcessKind::Poisson, Process::Binomial { count: n }) => Process::Poisson {
                    intensity: intensity.unwrap_or(n as f64),
                },
                (ProcessKind::Binomial, Process::Binomial { count: n }) => Process::Binomial {
                    count: count.unwrap_or(n),
                },
                (ProcessKind::Binomial, Process::Poisson { intensity: s }) => Process::Binomial {
                    count: count.unwrap_or(s.round() as usize),
                },
            };
            cfg.validate()?;
            let format = match format {
                Format::Csv => RecordFormat::Csv,
                Format::Jsonl => RecordFormat::Jsonl,
            };
            let (records, report) = run_experiment(&cfg)?;
            emit(&records, &report, format, &out)?;
            if cfg.run.dump_graphs > 0 {
                let prep = PreparedExperiment::new(&cfg)?;
                irg::harness::emit::dump_graphs(&prep, cfg.run.dump_graphs, &out)?;
            }
            for v in &report.verdicts {
                println!("{}", v.line());
            }
            println!("wrote {}", out.display());
            Ok(report.all_pass)
        }
        Command::Expect { config, formula } => {
            let cfg = ExperimentConfig::load(&config)?;
            let prep = PreparedExperiment::new(&cfg)?;
            let (s, phi, mu, set) = (cfg.intensity(), &prep.phi, &prep.measure, &cfg.integration);
            let e = match formula {
                Statistic::Degree(j) => expected_degree_count(s, phi, mu, j, set)?,
                Statistic::Components(k) => {
                    expected_k_components(s, phi, mu, k, set, ConnectMethod::default_for(k))?
                }
                Statistic::Connected(k) => {
                    expected_connected_k(s, phi, mu, k, set, ConnectMethod::default_for(k))?
                }
            };
            print_json(&Record {
                value: e.value,
                std_error: e.std_error,
                samples: e.outer_samples,
                method: e.method,
            })?;
            Ok(true)
        }
        Command::Bound { config, kind, k } => {
            let cfg = ExperimentConfig::load(&config)?;
            let prep = PreparedExperiment::new(&cfg)?;
            let s = cfg.intensity();
            let b = match kind {
                BoundKind::Edge => edge_stein_bound(s, &prep.phi, &prep.measure, &cfg.integration)?,
                BoundKind::Ustat => {
                    let h = DeterministicConnected::new(&prep.phi)?;
                    ustat_gamma(k, &h, s, &prep.measure, &cfg.integration)?
                }
            };
            print_json(&b)?;
            Ok(true)
        }
        Command::Calibrate {
            config,
            target,
            statistic,
            tolerance,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let measure = cfg.space.measure()?;
            ConnectionFunction::new(cfg.connection.kernel.clone(), &measure)?;
            let spec = CalibrateSpec {
                target,
                statistic,
                tolerance,
            };
            let c = calibrate_parameter(
                &cfg.connection.kernel,
                &measure,
                cfg.intensity(),
                target,
                spec.target_statistic()?,
                tolerance,
                &cfg.integration,
            )?;
            print_json(&c)?;
            Ok(true)
        }
        Command::Sweep {
            config,
            grid,
            recalibrate,
            out,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let (default_grid, default_recal) = match &cfg.scenario {
                Scenario::Sweep { s_grid, recalibrate } => (s_grid.clone(), *recalibrate),
                _ => (Vec::new(), false),
            };
            let grid = grid.unwrap_or(default_grid);
            let table = sweep(&cfg, &grid, recalibrate || default_recal)?;
            emit_sweep(&table, &out)?;
            println!("s knob alpha_analytic alpha_hat dtv dw status");
            for r in &table.rows {
                println!(
                    "{} {} {} {:.6} {:.6} {:.6} {}",
                    r.s,
                    r.knob.map_or("-".into(), |k| format!("{k:.6}")),
                    r.alpha_analytic.map_or("-".into(), |a| format!("{a:.6}")),
                    r.alpha_hat,
                    r.dtv,
                    r.dw,
                    r.status
                );
            }
            for v in &table.verdicts {
                println!("{}", v.line());
            }
            Ok(table.all_pass)
        }
        Command::Counterexample {
            s,
            replications,
            seed,
            out,
        } => {
            let cfg = ExperimentConfig::counterexample(s, replications, seed)?;
            let (records, report) = run_experiment(&cfg)?;
            emit(&records, &report, RecordFormat::Csv, &out)?;
            let st = &report.statistics[0];
            println!(
                "P[D0=1] = {:.6}, alpha_hat = {:.6}",
                st.pmf.get(1).copied().unwrap_or(0.0),
                st.alpha_hat
            );
            for v in &report.verdicts {
                println!("{}", v.line());
            }
            Ok(report.all_pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = threads_from_env() {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("irg: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("irg: {e}");
            ExitCode::from(2)
        }
    }
}
