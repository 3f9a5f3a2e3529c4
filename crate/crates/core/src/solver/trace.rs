use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::settings::ControlMode;
use super::SolverError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MonitorKind {
    /// Mean displacement of the listed points (mm).
    Displacement,
    /// Sum of reactions over the listed points (N).
    Reaction,
}

/// A scalar reported in every trace row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monitor {
    pub name: String,
    pub kind: MonitorKind,
    pub points: Vec<usize>,
    pub comp: usize,
}

impl Monitor {
    pub fn evaluate(&self, u: &[f64], reaction: &[f64], ncomp: usize) -> f64 {
        let vals = self.points.iter().map(|&p| match self.kind {
            MonitorKind::Displacement => u[p * ncomp + self.comp],
            MonitorKind::Reaction => reaction[p * ncomp + self.comp],
        });
        let s: f64 = vals.sum();
        match self.kind {
            MonitorKind::Displacement => s / self.points.len().max(1) as f64,
            MonitorKind::Reaction => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    pub mode: ControlMode,
    pub lambda: f64,
    /// Generalized load work-conjugate to `displacement`.
    pub load: f64,
    pub displacement: f64,
    pub monitors: Vec<f64>,
    /// Cumulative dissipated energy (N mm).
    pub dissipated: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolverTrace {
    pub monitor_names: Vec<String>,
    pub rows: Vec<TraceRow>,
}

fn mode_tag(m: ControlMode) -> &'static str {
    match m {
        ControlMode::DisplacementControl => "displacement",
        ControlMode::DissipationControl => "dissipation",
    }
}

impl SolverTrace {
    pub fn new(monitor_names: Vec<String>) -> Self {
        Self { monitor_names, rows: Vec::new() }
    }

    pub fn header(&self) -> String {
        let mut cols = vec!["step", "mode", "lambda", "load_N", "displacement_mm"];
        cols.extend(self.monitor_names.iter().map(String::as_str));
        cols.extend(["dissipated_Nmm", "iterations"]);
        cols.join(",")
    }

    pub fn format_row(row: &TraceRow) -> String {
        let mut s = format!("{},{},{:e},{:e},{:e}", row.step, mode_tag(row.mode), row.lambda, row.load, row.displacement);
        for m in &row.monitors {
            s.push_str(&format!(",{m:e}"));
        }
        s.push_str(&format!(",{:e},{}", row.dissipated, row.iterations));
        s
    }

    /// Reads back a trace file written by [`TraceWriter`].
    pub fn parse(text: &str) -> Result<Self, SolverError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| SolverError::Config("empty trace".into()))?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() < 7 {
            return Err(SolverError::Config("trace header too short".into()));
        }
        let nm = cols.len() - 7;
        let monitor_names = cols[5..5 + nm].iter().map(|s| s.to_string()).collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let f: Vec<&str> = line.split(',').collect();
            let err = || SolverError::Config(format!("malformed trace row {}", i + 1));
            if f.len() != cols.len() {
                return Err(err());
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| err());
            let mode = match f[1] {
                "displacement" => ControlMode::DisplacementControl,
                "dissipation" => ControlMode::DissipationControl,
                _ => return Err(err()),
            };
            rows.push(TraceRow {
                step: f[0].parse().map_err(|_| err())?,
                mode,
                lambda: num(f[2])?,
                load: num(f[3])?,
                displacement: num(f[4])?,
                monitors: f[5..5 + nm].iter().map(|s| num(s)).collect::<Result<_, _>>()?,
                dissipated: num(f[5 + nm])?,
                iterations: f[6 + nm].parse().map_err(|_| err())?,
            });
        }
        Ok(Self { monitor_names, rows })
    }

    /// Largest generalized load over the trace.
    pub fn peak_load(&self) -> f64 {
        self.rows.iter().map(|r| r.load).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Streams trace rows to a delimited text file, flushing after each row.
#[derive(Debug)]
pub struct TraceWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

fn io_err(path: &Path, e: std::io::Error) -> SolverError {
    SolverError::Io { path: path.display().to_string(), message: e.to_string() }
}

impl TraceWriter {
    pub fn create(path: &Path, monitor_names: &[String]) -> Result<Self, SolverError> {
        let file = File::create(path).map_err(|e| io_err(path, e))?;
        let mut w = Self { path: path.to_path_buf(), out: BufWriter::new(file) };
        let header = SolverTrace::new(monitor_names.to_vec()).header();
        w.line(&header)?;
        Ok(w)
    }

    fn line(&mut self, s: &str) -> Result<(), SolverError> {
        writeln!(self.out, "{s}").and_then(|_| self.out.flush()).map_err(|e| io_err(&self.path, e))
    }

    pub fn append(&mut self, row: &TraceRow) -> Result<(), SolverError> {
        self.line(&SolverTrace::format_row(row))
    }
}
