//! Output files.
//!
//! - `records.csv`: header `replication,seed,vertices,<columns>`, one row
//!   per replication in index order.
//! - `records.jsonl`: one JSON object per replication with the same fields.
//! - `summary.json`: the [`SummaryReport`].
//! - `plot_*.dat`: two-column `x y` text, one file per curve.
//! - `graphs/rep_<i>.edges`: edge lists of the first replications.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::report::SummaryReport;
use super::run::{PreparedExperiment, ReplicationRecord};
use super::sweep::SweepTable;
use crate::distributions::poisson_law;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecordFormat {
    #[default]
    Csv,
    Jsonl,
}

impl FromStr for RecordFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(RecordFormat::Csv),
            "jsonl" => Ok(RecordFormat::Jsonl),
            _ => Err(Error::config(format!("unknown record format {s:?}"))),
        }
    }
}

fn write(path: &Path, text: &str) -> Result<PathBuf> {
    fs::write(path, text).map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn records_csv(records: &[ReplicationRecord], columns: &[String]) -> String {
    let mut out = String::from("replication,seed,vertices");
    for c in columns {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for r in records {
        write!(out, "{},{},{}", r.replication, r.seed, r.vertices).unwrap();
        for v in &r.values {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn records_jsonl(records: &[ReplicationRecord], columns: &[String]) -> String {
    let mut out = String::new();
    for r in records {
        write!(
            out,
            "{{\"replication\":{},\"seed\":{},\"vertices\":{}",
            r.replication, r.seed, r.vertices
        )
        .unwrap();
        for (c, v) in columns.iter().zip(&r.values) {
            write!(out, ",{}:{v}", serde_json::to_string(c).unwrap()).unwrap();
        }
        out.push_str("}\n");
    }
    out
}

fn parse_u<T: FromStr>(s: &str, location: impl Fn() -> String) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse {
        location: location(),
        message: format!("expected an unsigned integer, found {s:?}"),
    })
}

/// Parses `records.csv` text into column names and records.
pub fn parse_records_csv(text: &str) -> Result<(Vec<String>, Vec<ReplicationRecord>)> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse {
        location: "records.csv:1".into(),
        message: "missing header".into(),
    })?;
    let fields: Vec<&str> = header.split(',').collect();
    if fields.len() < 3 || fields[..3] != ["replication", "seed", "vertices"] {
        return Err(Error::Parse {
            location: "records.csv:1".into(),
            message: "header must start with replication,seed,vertices".into(),
        });
    }
    let columns: Vec<String> = fields[3..].iter().map(|s| s.to_string()).collect();
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let loc = || format!("records.csv:{}", i + 2);
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != columns.len() + 3 {
            return Err(Error::Parse {
                location: loc(),
                message: format!("expected {} fields", columns.len() + 3),
            });
        }
        records.push(ReplicationRecord {
            replication: parse_u(f[0], loc)?,
            seed: parse_u(f[1], loc)?,
            vertices: parse_u(f[2], loc)?,
            values: f[3..].iter().map(|v| parse_u(v, loc)).collect::<Result<_>>()?,
        });
    }
    Ok((columns, records))
}

/// Parses `records.jsonl` text, reading `columns` from each object.
pub fn parse_records_jsonl(text: &str, columns: &[String]) -> Result<Vec<ReplicationRecord>> {
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            let loc = || format!("records.jsonl:{}", i + 1);
            let v: serde_json::Value = serde_json::from_str(line).map_err(|e| Error::Parse {
                location: loc(),
                message: e.to_string(),
            })?;
            let get = |k: &str| {
                v.get(k).and_then(|x| x.as_u64()).ok_or_else(|| Error::Parse {
                    location: loc(),
                    message: format!("missing unsigned field {k:?}"),
                })
            };
            Ok(ReplicationRecord {
                replication: get("replication")? as usize,
                seed: get("seed")?,
                vertices: get("vertices")? as usize,
                values: columns.iter().map(|c| get(c)).collect::<Result<_>>()?,
            })
        })
        .collect()
}

/// Two-column `x y` text.
pub fn plot_text(points: impl IntoIterator<Item = (f64, f64)>) -> String {
    let mut out = String::new();
    for (x, y) in points {
        writeln!(out, "{x} {y}").unwrap();
    }
    out
}

/// Writes records, summary and plot data into `dir`; returns the paths.
pub fn emit(
    records: &[ReplicationRecord],
    report: &SummaryReport,
    format: RecordFormat,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    create_dir(dir)?;
    let mut paths = Vec::new();
    paths.push(match format {
        RecordFormat::Csv => write(&dir.join("records.csv"), &records_csv(records, &report.columns))?,
        RecordFormat::Jsonl => write(&dir.join("records.jsonl"), &records_jsonl(records, &report.columns))?,
    });
    paths.push(write(
        &dir.join("summary.json"),
        &serde_json::to_string_pretty(report)?,
    )?);
    for st in &report.statistics {
        let emp = st.pmf.iter().enumerate().map(|(i, &p)| (i as f64, p));
        paths.push(write(&dir.join(format!("plot_pmf_{}.dat", st.statistic)), &plot_text(emp))?);
        let pois = poisson_law(st.target_alpha, st.pmf.len())?;
        let curve = pois.pmf.iter().enumerate().map(|(i, &p)| (i as f64, p));
        paths.push(write(
            &dir.join(format!("plot_poisson_{}.dat", st.statistic)),
            &plot_text(curve),
        )?);
    }
    Ok(paths)
}

/// Writes `sweep.csv`, `sweep.json` and the `d_TV` / `d_W` curves.
pub fn emit_sweep(table: &SweepTable, dir: &Path) -> Result<Vec<PathBuf>> {
    create_dir(dir)?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    let mut csv = String::from("s,knob,alpha_analytic,alpha_hat,dtv,dtv_lo,dtv_hi,dw,status\n");
    for r in &table.rows {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            r.s,
            opt(r.knob),
            opt(r.alpha_analytic),
            r.alpha_hat,
            r.dtv,
            r.dtv_ci[0],
            r.dtv_ci[1],
            r.dw,
            r.status.replace(',', ";")
        )
        .unwrap();
    }
    let ok = || table.rows.iter().filter(|r| !r.failed());
    Ok(vec![
        write(&dir.join("sweep.csv"), &csv)?,
        write(&dir.join("sweep.json"), &serde_json::to_string_pretty(table)?)?,
        write(&dir.join("plot_sweep_dtv.dat"), &plot_text(ok().map(|r| (r.s, r.dtv))))?,
        write(&dir.join("plot_sweep_dw.dat"), &plot_text(ok().map(|r| (r.s, r.dw))))?,
    ])
}

/// Writes edge lists of replications `0..count` to `dir/graphs`.
pub fn dump_graphs(prep: &PreparedExperiment, count: usize, dir: &Path) -> Result<Vec<PathBuf>> {
    let gdir = dir.join("graphs");
    create_dir(&gdir)?;
    (0..count.min(prep.config.run.replications))
        .map(|i| {
            let path = gdir.join(format!("rep_{i}.edges"));
            let mut buf = Vec::new();
            prep.graph(i)?
                .write_edge_list(&mut buf)
                .map_err(|e| Error::io(&path, e))?;
            fs::write(&path, buf).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn recs() -> Vec<ReplicationRecord> {
        (0..3)
            .map(|i| ReplicationRecord {
                replication: i,
                seed: 100 + i as u64,
                vertices: 5,
                values: vec![i as u64],
            })
            .collect()
    }

    #[test]
    fn csv_shape() {
        let text = records_csv(&recs(), &["D0".into()]);
        assert_eq!(text.lines().count(), 4);
        assert_eq!(text.lines().next().unwrap(), "replication,seed,vertices,D0");
    }

    #[test]
    fn csv_and_jsonl_agree() {
        let cols = vec!["D0".to_string()];
        let (c, a) = parse_records_csv(&records_csv(&recs(), &cols)).unwrap();
        let b = parse_records_jsonl(&records_jsonl(&recs(), &cols), &c).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, recs());
    }

    #[test]
    fn unwritable_path_reports_it() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        match create_dir(&blocker.join("sub")) {
            Err(Error::Io { path, .. }) => assert!(path.ends_with("sub")),
            other => panic!("{other:?}"),
        }
    }
}
