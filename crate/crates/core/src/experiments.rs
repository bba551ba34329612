//! Running scenarios to CSV files and comparing runs.
//!
//! Numbers are written in Rust's shortest round-trip representation, so an
//! emitted CSV parses back to the exact `f64` values that were logged.

use crate::barrier_gain::Phase;
use crate::diagnostics::{extract_metrics, Metrics, MetricsError};
use crate::scenario::Scenario;
use crate::sim::{simulate, Sample, SimError, TrajectoryLog};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const TRAJECTORY_HEADER: &str = "t,s,u,u2,phi,L,phase,gamma,delta,delta_dot,sat_flag";
pub const METRICS_HEADER: &str =
    "name,controller,t_bar,sup_s_post,sup_phi_tail,L_max,L_min_barrier,sat_count,converged";
pub const COMPARE_HEADER: &str = "name,controller,t_bar,sup_s_post,sup_phi_tail,L_max,sat_count,error";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Error)]
pub enum CompareError {
    #[error("compare needs at least two scenarios, got {0}")]
    TooFewScenarios(usize),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Error)]
pub enum CsvReadError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("unexpected header `{0}`")]
    Header(String),
    #[error("row {row}: bad value `{value}` in column {column}")]
    Value {
        row: usize,
        column: &'static str,
        value: String,
    },
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn phase_str(p: Option<Phase>) -> &'static str {
    p.map_or("-", Phase::as_str)
}

pub fn write_trajectory_csv<W: Write>(log: &TrajectoryLog, out: W) -> io::Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    let mut line = String::with_capacity(256);
    for r in &log.rows {
        line.clear();
        let _ = writeln!(
            line,
            "{:?},{:?},{:?},{:?},{:?},{:?},{},{:?},{:?},{:?},{}",
            r.t,
            r.s,
            r.u,
            r.u2,
            r.phi,
            r.gain,
            phase_str(r.phase),
            r.gamma,
            r.delta,
            r.delta_dot,
            u8::from(r.sat)
        );
        w.write_all(line.as_bytes())?;
    }
    w.flush()
}

const COLUMNS: [&str; 11] = [
    "t", "s", "u", "u2", "phi", "L", "phase", "gamma", "delta", "delta_dot", "sat_flag",
];

/// Parses a trajectory CSV written by [`write_trajectory_csv`].
pub fn read_trajectory_csv<R: Read>(input: R) -> Result<Vec<Sample>, CsvReadError> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().ne(COLUMNS.iter().copied()) {
        return Err(CsvReadError::Header(header.iter().collect::<Vec<_>>().join(",")));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let field = |c: usize| -> Result<f64, CsvReadError> {
            record[c].parse().map_err(|_| CsvReadError::Value {
                row: i + 1,
                column: COLUMNS[c],
                value: record[c].to_string(),
            })
        };
        let phase = match &record[6] {
            "reaching" => Some(Phase::Reaching),
            "barrier" => Some(Phase::Barrier),
            "-" => None,
            other => {
                return Err(CsvReadError::Value {
                    row: i + 1,
                    column: "phase",
                    value: other.to_string(),
                })
            }
        };
        let sat = match &record[10] {
            "0" => false,
            "1" => true,
            other => {
                return Err(CsvReadError::Value {
                    row: i + 1,
                    column: "sat_flag",
                    value: other.to_string(),
                })
            }
        };
        rows.push(Sample {
            t: field(0)?,
            s: field(1)?,
            u: field(2)?,
            u2: field(3)?,
            phi: field(4)?,
            gain: field(5)?,
            phase,
            gamma: field(7)?,
            delta: field(8)?,
            delta_dot: field(9)?,
            sat,
        });
    }
    Ok(rows)
}

pub fn metrics_row(m: &Metrics) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        m.name,
        m.controller,
        opt(m.t_bar),
        opt(m.sup_s_post),
        num(m.sup_phi_tail),
        opt(m.l_max),
        opt(m.l_min_barrier),
        m.sat_count,
        m.converged
    )
}

pub fn write_metrics_csv<W: Write>(m: &Metrics, mut out: W) -> io::Result<()> {
    writeln!(out, "{METRICS_HEADER}")?;
    writeln!(out, "{}", metrics_row(m))
}

/// Metrics of a finished run, with a missing switch folded into
/// `converged = false`.
pub fn run_metrics(log: &TrajectoryLog, scenario: &Scenario) -> Metrics {
    match extract_metrics(log, scenario) {
        Ok(m) => m,
        Err(MetricsError::NoSwitch(m)) => *m,
        Err(MetricsError::EmptyLog) => unreachable!("simulate logs at least one row"),
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trajectory: PathBuf,
    pub metrics_path: PathBuf,
    pub metrics: Metrics,
}

/// Simulates `scenario` and writes `<name>_trajectory.csv` and
/// `<name>_metrics.csv` into `out_dir`, overwriting existing files.
pub fn run(scenario: &Scenario, out_dir: &Path) -> Result<RunOutput, RunError> {
    let log = simulate(scenario)?;
    let metrics = run_metrics(&log, scenario);
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| RunError::Io { path, source }
    };
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let trajectory = out_dir.join(format!("{}_trajectory.csv", scenario.name));
    let metrics_path = out_dir.join(format!("{}_metrics.csv", scenario.name));
    File::create(&trajectory)
        .and_then(|f| write_trajectory_csv(&log, f))
        .map_err(io_err(&trajectory))?;
    File::create(&metrics_path)
        .and_then(|f| write_metrics_csv(&metrics, BufWriter::new(f)))
        .map_err(io_err(&metrics_path))?;
    Ok(RunOutput {
        trajectory,
        metrics_path,
        metrics,
    })
}

#[derive(Debug)]
pub struct CompareRow {
    pub name: String,
    pub result: Result<Metrics, RunError>,
}

#[derive(Debug)]
pub struct Comparison {
    pub rows: Vec<CompareRow>,
    pub csv_path: PathBuf,
}

impl Comparison {
    pub fn csv(&self) -> String {
        let mut out = format!("{COMPARE_HEADER}\n");
        for row in &self.rows {
            match &row.result {
                Ok(m) => {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},",
                        m.name,
                        m.controller,
                        opt(m.t_bar),
                        opt(m.sup_s_post),
                        num(m.sup_phi_tail),
                        opt(m.l_max),
                        m.sat_count
                    );
                }
                Err(e) => {
                    let msg = e.to_string().replace(['"', ','], " ");
                    let _ = writeln!(out, "{},,,,,,,{msg}", row.name);
                }
            }
        }
        out
    }

    /// Fixed-width table for terminals.
    pub fn table(&self) -> String {
        let mut out = format!(
            "{:<16} {:<9} {:>10} {:>12} {:>12} {:>10} {:>6}\n",
            "scenario", "ctrl", "t_bar", "sup|s|post", "sup|phi|tail", "L_max", "sat"
        );
        for row in &self.rows {
            match &row.result {
                Ok(m) => {
                    let f = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.4e}"));
                    let _ = writeln!(
                        out,
                        "{:<16} {:<9} {:>10} {:>12} {:>12.4e} {:>10} {:>6}",
                        m.name,
                        m.controller,
                        m.t_bar.map_or("-".to_string(), |v| format!("{v:.5}")),
                        f(m.sup_s_post),
                        m.sup_phi_tail,
                        f(m.l_max),
                        m.sat_count
                    );
                }
                Err(e) => {
                    let _ = writeln!(out, "{:<16} error: {e}", row.name);
                }
            }
        }
        out
    }

    pub fn first_error(&self) -> Option<&RunError> {
        self.rows.iter().find_map(|r| r.result.as_ref().err())
    }
}

/// Runs every scenario (in parallel) into `out_dir/<index>_<name>/` and
/// writes `compare.csv`. Rows keep the input order; a failing row does not
/// stop the others.
pub fn compare(scenarios: &[Scenario], out_dir: &Path) -> Result<Comparison, CompareError> {
    if scenarios.len() < 2 {
        return Err(CompareError::TooFewScenarios(scenarios.len()));
    }
    let rows: Vec<CompareRow> = std::thread::scope(|scope| {
        let handles: Vec<_> = scenarios
            .iter()
            .enumerate()
            .map(|(i, sc)| {
                let dir = out_dir.join(format!("{i}_{}", sc.name));
                scope.spawn(move || CompareRow {
                    name: sc.name.clone(),
                    result: run(sc, &dir).map(|o| o.metrics),
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("compare worker panicked"))
            .collect()
    });
    let comparison = Comparison {
        rows,
        csv_path: out_dir.join("compare.csv"),
    };
    std::fs::write(&comparison.csv_path, comparison.csv()).map_err(|source| CompareError::Io {
        path: comparison.csv_path.clone(),
        source,
    })?;
    Ok(comparison)
}
