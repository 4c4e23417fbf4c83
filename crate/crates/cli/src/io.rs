//! Self-describing CSV files: a `# config: {json}` line, a header, then rows.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, UsageError};

const CONFIG_PREFIX: &str = "# config: ";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub replica: u32,
    pub tau: f64,
    pub n: u64,
    pub x_raw: i64,
    pub x_rescaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub tau: f64,
    pub s: f64,
    pub cdf: f64,
    pub err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub tau: f64,
    pub n: u64,
    pub replicas: usize,
    pub ks: f64,
    pub threshold: f64,
    pub passed: bool,
}

pub trait Row: Serialize + DeserializeOwned {
    const HEADER: &'static [&'static str];
}

impl Row for SampleRow {
    const HEADER: &'static [&'static str] = &["replica", "tau", "n", "x_raw", "x_rescaled"];
}

impl Row for TableRow {
    const HEADER: &'static [&'static str] = &["tau", "s", "cdf", "err"];
}

impl Row for ReportRow {
    const HEADER: &'static [&'static str] = &["tau", "n", "replicas", "ks", "threshold", "passed"];
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataFile<R> {
    pub config: ExperimentConfig,
    pub rows: Vec<R>,
}

pub fn render<R: Row>(file: &DataFile<R>) -> Vec<u8> {
    let mut out = format!("{CONFIG_PREFIX}{}\n", file.config.to_json()).into_bytes();
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut out);
    w.write_record(R::HEADER).expect("in-memory write");
    for r in &file.rows {
        w.serialize(r).expect("in-memory write");
    }
    drop(w);
    out
}

pub fn parse<R: Row>(bytes: &[u8]) -> Result<DataFile<R>, UsageError> {
    let mut reader = BufReader::new(bytes);
    let mut first = String::new();
    reader
        .read_line(&mut first)
        .map_err(|e| UsageError(format!("unreadable file: {e}")))?;
    let json = first
        .trim_end()
        .strip_prefix(CONFIG_PREFIX)
        .ok_or_else(|| UsageError("missing `# config:` line".into()))?;
    let config = ExperimentConfig::from_json(json)?;

    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers().map_err(|e| UsageError(format!("bad header: {e}")))?;
    if header.iter().ne(R::HEADER.iter().copied()) {
        return Err(UsageError(format!(
            "columns {:?} do not match the expected {:?}",
            header.iter().collect::<Vec<_>>(),
            R::HEADER
        )));
    }
    let rows = rdr
        .deserialize()
        .collect::<Result<Vec<R>, _>>()
        .map_err(|e| UsageError(format!("bad row: {e}")))?;
    Ok(DataFile { config, rows })
}

pub fn read<R: Row>(path: &Path) -> Result<DataFile<R>, UsageError> {
    let bytes = std::fs::read(path).map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
    parse(&bytes)
}

/// Writes to a temporary file beside `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::CommandKind;
    use tasep_core::fredholm::Process;

    #[test]
    fn table_round_trip() {
        let mut config = ExperimentConfig::empty(CommandKind::Tabulate);
        config.process = Some(Process::Airy21);
        config.taus = vec![0.0];
        config.s_grid = vec![0.1, 1.0 / 3.0];
        config.output = "t.csv".into();
        let file = DataFile {
            config,
            rows: vec![
                TableRow {
                    tau: 0.0,
                    s: 0.1,
                    cdf: 0.123_456_789_012_345_67,
                    err: 1e-12,
                },
                TableRow {
                    tau: 0.0,
                    s: 1.0 / 3.0,
                    cdf: 0.9,
                    err: 0.0,
                },
            ],
        };
        assert_eq!(parse::<TableRow>(&render(&file)).unwrap(), file);
        assert!(parse::<SampleRow>(&render(&file)).is_err());
    }

    #[test]
    fn rejects_files_without_config() {
        assert!(parse::<TableRow>(b"tau,s,cdf,err\n0,0,0.5,0\n").is_err());
    }
}
