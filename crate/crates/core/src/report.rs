//! Census output: CSV records, JSON summaries, checkpoint series and run
//! manifests whose digest pins the CSV bytes.

use std::io::{Read, Write};

use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::census::{census, CensusConfig, CensusRecord, CensusSummary, Checkpoint};
use crate::error::{Error, Result};
use crate::frobenian::{FrobenianFunction, FunctionSpec};
use crate::group::FiniteAbelianGroup;
use crate::sieve::FactorizationTable;

pub const CSV_HEADER: [&str; 5] = ["m", "count", "f_value", "weighted", "cumulative"];

/// Streams census records as CSV. Rationals are written as `p/q`, or `p`
/// when integral.
pub struct CsvRecordWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> CsvRecordWriter<W> {
    pub fn new(w: W) -> Result<Self> {
        let mut inner = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        inner.write_record(CSV_HEADER)?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, r: &CensusRecord) -> Result<()> {
        self.inner.write_record([
            r.m.to_string(),
            r.count.to_string(),
            r.f_value.to_string(),
            r.weighted.to_string(),
            r.cumulative.to_string(),
        ])?;
        Ok(())
    }

    pub fn finish(self) -> Result<W> {
        self.inner.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

pub fn write_census_csv<W: Write>(records: &[CensusRecord], w: W) -> Result<W> {
    let mut out = CsvRecordWriter::new(w)?;
    for r in records {
        out.write(r)?;
    }
    out.finish()
}

pub fn read_census_csv<R: Read>(r: R) -> Result<Vec<CensusRecord>> {
    let mut reader = csv::Reader::from_reader(r);
    if reader.headers()?.iter().ne(CSV_HEADER) {
        return Err(Error::Parse(format!("expected CSV header {}", CSV_HEADER.join(","))));
    }
    let rational = |s: &str| s.parse::<Rational64>().map_err(|_| Error::Parse(format!("`{s}` is not a rational")));
    let integer = |s: &str| s.parse::<u64>().map_err(|_| Error::Parse(format!("`{s}` is not an integer")));
    reader
        .records()
        .map(|row| {
            let row = row?;
            if row.len() != CSV_HEADER.len() {
                return Err(Error::Parse(format!("expected {} columns, found {}", CSV_HEADER.len(), row.len())));
            }
            Ok(CensusRecord {
                m: integer(&row[0])?,
                count: integer(&row[1])?,
                f_value: rational(&row[2])?,
                weighted: rational(&row[3])?,
                cumulative: rational(&row[4])?,
            })
        })
        .collect()
}

/// `(B, C(B))` pairs ready for plotting, with `C(B)` both exact and as a float.
pub fn write_checkpoint_series<W: Write>(checkpoints: &[Checkpoint], w: W) -> Result<W> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record(["bound", "count", "weighted", "weighted_float"])?;
    for c in checkpoints {
        out.write_record([
            c.bound.to_string(),
            c.count.to_string(),
            c.weighted.to_string(),
            format!("{:.6}", c.weighted.to_f64().unwrap_or(f64::NAN)),
        ])?;
    }
    out.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn write_json<T: Serialize, W: Write>(value: &T, mut w: W) -> Result<W> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(w)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Everything needed to rerun a census and check its CSV bytes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub group: String,
    pub function: String,
    pub bound: u64,
    pub checkpoints: Vec<u64>,
    pub workers: usize,
    pub version: String,
    /// SHA-256 of the census CSV.
    pub digest: String,
}

pub struct CensusRun {
    pub csv: Vec<u8>,
    pub summary: CensusSummary,
    pub manifest: RunManifest,
}

/// Runs the census into an in-memory CSV and records its manifest.
pub fn run_census(config: &CensusConfig<'_>, table: &FactorizationTable) -> Result<CensusRun> {
    let mut writer = CsvRecordWriter::new(Vec::new())?;
    let summary = census(config, table, |r| writer.write(r))?;
    let csv = writer.finish()?;
    let manifest = RunManifest {
        group: config.group.to_string(),
        function: config.function.spec().to_string(),
        bound: config.bound,
        checkpoints: summary.checkpoints.iter().map(|c| c.bound).collect(),
        workers: config.workers,
        version: env!("CARGO_PKG_VERSION").to_string(),
        digest: sha256_hex(&csv),
    };
    Ok(CensusRun { csv, summary, manifest })
}

/// Reruns the census described by `manifest`. The returned run's digest
/// equals the manifest's when the output is reproduced.
pub fn replay(manifest: &RunManifest, table: &FactorizationTable) -> Result<CensusRun> {
    let group: FiniteAbelianGroup = manifest.group.parse()?;
    let function = FrobenianFunction::builtin(&manifest.function.parse::<FunctionSpec>()?)?;
    let config = CensusConfig {
        group: &group,
        function: &function,
        bound: manifest.bound,
        workers: manifest.workers,
        checkpoints: manifest.checkpoints.clone(),
    };
    run_census(&config, table)
}
