use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solvers::IterateTrace;

pub const TRACE_COLUMNS: [&str; 9] = [
    "iter",
    "time_s",
    "lambda",
    "step_norm",
    "grad_norm",
    "gap",
    "hat_dist",
    "samples",
    "subproblem_iters",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TraceFormat {
    #[default]
    Csv,
    Json,
}

impl TraceFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }

    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "csv" => Some(Self::Csv),
            "json" => Some(Self::Json),
            _ => None,
        }
    }
}

impl FromStr for TraceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Config(format!("unknown trace format '{other}' (expected csv or json)"))),
        }
    }
}

/// Run metadata stored ahead of the rows in JSON traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub algorithm: String,
    pub problem: String,
    pub seed: u64,
    pub status: String,
    /// Echo of the configuration that produced the run.
    pub config: serde_json::Value,
    pub crate_version: String,
}

impl TraceHeader {
    pub fn new(algorithm: &str, problem: &str, seed: u64, status: &str, config: serde_json::Value) -> Self {
        Self {
            algorithm: algorithm.to_string(),
            problem: problem.to_string(),
            seed,
            status: status.to_string(),
            config,
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    /// Absent for CSV, which carries only the columns.
    pub header: Option<TraceHeader>,
    pub rows: Vec<IterateTrace>,
}

#[derive(Serialize)]
struct JsonOut<'a> {
    header: &'a TraceHeader,
    records: &'a [IterateTrace],
}

#[derive(Deserialize)]
struct JsonIn {
    header: TraceHeader,
    records: Vec<IterateTrace>,
}

fn write_csv<W: Write>(rows: &[IterateTrace], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(TRACE_COLUMNS)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::Io {
        path: "<trace>".into(),
        source: e,
    })
}

/// Serializes a trace into bytes; CSV ignores the header.
pub fn render_trace(rows: &[IterateTrace], header: &TraceHeader, format: TraceFormat) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        TraceFormat::Csv => write_csv(rows, &mut buf)?,
        TraceFormat::Json => {
            serde_json::to_writer_pretty(&mut buf, &JsonOut { header, records: rows })?;
            buf.push(b'\n');
        }
    }
    Ok(buf)
}

pub fn emit_trace(rows: &[IterateTrace], header: &TraceHeader, path: impl AsRef<Path>, format: TraceFormat) -> Result<()> {
    let path = path.as_ref();
    let io_err = |e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    };
    let bytes = render_trace(rows, header, format)?;
    let mut file = BufWriter::new(File::create(path).map_err(io_err)?);
    file.write_all(&bytes).map_err(io_err)?;
    file.flush().map_err(io_err)
}

pub fn parse_trace_str(text: &str, format: TraceFormat) -> Result<TraceFile> {
    match format {
        TraceFormat::Csv => {
            let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
            let columns: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
            if columns != TRACE_COLUMNS {
                return Err(Error::Parse {
                    path: "<trace>".into(),
                    line: 1,
                    message: format!("unexpected columns {columns:?}"),
                });
            }
            let rows = r.deserialize().collect::<std::result::Result<Vec<IterateTrace>, _>>()?;
            Ok(TraceFile { header: None, rows })
        }
        TraceFormat::Json => {
            let parsed: JsonIn = serde_json::from_str(text)?;
            Ok(TraceFile {
                header: Some(parsed.header),
                rows: parsed.records,
            })
        }
    }
}

pub fn parse_trace(path: impl AsRef<Path>, format: TraceFormat) -> Result<TraceFile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse_trace_str(&text, format)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows() -> Vec<IterateTrace> {
        vec![
            IterateTrace {
                iter: 1,
                time_s: None,
                lambda: 1.0 / 3.0,
                step_norm: 0.1 + 0.2,
                grad_norm: 1e-300,
                gap: Some(2.5e-17),
                hat_dist: 7.0,
                samples: 12,
                subproblem_iters: 4,
            },
            IterateTrace {
                iter: 2,
                time_s: Some(0.125),
                lambda: 123456.789,
                step_norm: f64::MIN_POSITIVE,
                grad_norm: 3.0,
                gap: None,
                hat_dist: 0.0,
                samples: 0,
                subproblem_iters: 0,
            },
        ]
    }

    fn header() -> TraceHeader {
        TraceHeader::new("newton", "cubic_bilinear", 3, "converged", serde_json::json!({"n": 5}))
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let text = String::from_utf8(render_trace(&rows(), &header(), TraceFormat::Csv).unwrap()).unwrap();
        assert!(text.starts_with("iter,time_s,lambda,step_norm,grad_norm,gap,hat_dist,samples,subproblem_iters\n"));
        let back = parse_trace_str(&text, TraceFormat::Csv).unwrap();
        assert_eq!(back.rows, rows());
        assert!(back.header.is_none());
    }

    #[test]
    fn missing_gap_is_an_empty_cell() {
        let text = String::from_utf8(render_trace(&rows(), &header(), TraceFormat::Csv).unwrap()).unwrap();
        let last = text.lines().nth(2).unwrap();
        assert_eq!(last.split(',').nth(5), Some(""));
        let first = text.lines().nth(1).unwrap();
        assert_eq!(first.split(',').nth(1), Some(""));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let bytes = render_trace(&rows(), &header(), TraceFormat::Json).unwrap();
        let back = parse_trace_str(std::str::from_utf8(&bytes).unwrap(), TraceFormat::Json).unwrap();
        assert_eq!(back.rows, rows());
        assert_eq!(back.header, Some(header()));
    }

    #[test]
    fn empty_trace_is_header_only() {
        let text = String::from_utf8(render_trace(&[], &header(), TraceFormat::Csv).unwrap()).unwrap();
        assert_eq!(text, format!("{}\n", TRACE_COLUMNS.join(",")));
        assert!(parse_trace_str(&text, TraceFormat::Csv).unwrap().rows.is_empty());
        let json = render_trace(&[], &header(), TraceFormat::Json).unwrap();
        assert!(parse_trace_str(std::str::from_utf8(&json).unwrap(), TraceFormat::Json)
            .unwrap()
            .rows
            .is_empty());
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        for format in [TraceFormat::Csv, TraceFormat::Json] {
            let path = dir.path().join(format!("t.{}", format.extension()));
            emit_trace(&rows(), &header(), &path, format).unwrap();
            assert_eq!(TraceFormat::from_path(&path), Some(format));
            assert_eq!(parse_trace(&path, format).unwrap().rows, rows());
        }
    }

    #[test]
    fn wrong_columns_are_rejected() {
        assert!(parse_trace_str("a,b\n1,2\n", TraceFormat::Csv).is_err());
        assert!("xml".parse::<TraceFormat>().is_err());
    }
}
