//! CSV and JSON file formats and the run manifest.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{AfcError, Result};
use crate::spectral::{FourierCoefficientSet, OpticalDepthSpectrum};

pub const SPECTRUM_HEADER: [&str; 2] = ["frequency_hz", "optical_depth"];
pub const COEFFICIENT_HEADER: [&str; 3] = ["p", "re_b", "im_b"];
pub const TRACE_HEADER: [&str; 2] = ["time_s", "intensity"];
pub const CURVE_HEADER: [&str; 5] = ["d", "f_opt", "eta_opt", "f_star", "eta_star"];
pub const SWEEP_HEADER: [&str; 5] = ["power", "peak_depth", "finesse", "eta_fourier", "eta_opt"];
pub const HISTOGRAM_HEADER: [&str; 2] = ["gate_center_s", "counts"];

/// Write a numeric table. Floats use the shortest representation that parses back exactly.
pub fn write_table<W: Write>(w: W, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header).map_err(csv_io)?;
    for row in rows {
        out.write_record(row.iter().map(|v| v.to_string())).map_err(csv_io)?;
    }
    out.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> AfcError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => AfcError::Io(io),
        other => AfcError::Domain(format!("{other:?}")),
    }
}

/// Read a numeric table with exactly the columns of `header`. `source` names the input
/// in error messages, which carry 1-based line numbers.
pub fn read_table<R: Read>(r: R, source: &str, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let parse_err = |line: u64, message: String| AfcError::Parse {
        source_name: source.to_string(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(r);
    let found = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect::<Vec<_>>();
    if found != header {
        return Err(parse_err(
            1,
            format!("expected header `{}`, found `{}`", header.join(","), found.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let row = record
            .iter()
            .enumerate()
            .map(|(i, field)| {
                field
                    .parse::<f64>()
                    .map_err(|_| parse_err(line, format!("column `{}`: `{field}` is not a number", header[i])))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_spectrum_csv<W: Write>(w: W, s: &OpticalDepthSpectrum) -> Result<()> {
    write_table(
        w,
        &SPECTRUM_HEADER,
        s.grid().points().zip(s.depth()).map(|(nu, &d)| vec![nu, d]),
    )
}

/// Read a spectrum file; frequencies must be strictly increasing and evenly spaced.
pub fn read_spectrum_csv<R: Read>(r: R, source: &str) -> Result<OpticalDepthSpectrum> {
    let rows = read_table(r, source, &SPECTRUM_HEADER)?;
    let (freq, depth): (Vec<f64>, Vec<f64>) = rows.iter().map(|row| (row[0], row[1])).unzip();
    OpticalDepthSpectrum::from_samples(&freq, depth)
}

pub fn read_spectrum_file(path: &Path) -> Result<OpticalDepthSpectrum> {
    read_spectrum_csv(File::open(path)?, &path.display().to_string())
}

pub fn write_coefficients_csv<W: Write>(w: W, c: &FourierCoefficientSet) -> Result<()> {
    write_table(
        w,
        &COEFFICIENT_HEADER,
        c.coefficients().iter().enumerate().map(|(p, b)| vec![p as f64, b.re, b.im]),
    )
}

/// Create `path` and hand a buffered writer to `f`.
pub fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n")?;
        Ok(())
    })
}

/// Parse a JSON configuration; unknown fields are rejected by the target type.
pub fn read_json_file<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| AfcError::Parse {
        source_name: path.display().to_string(),
        line: e.line() as u64,
        message: e.to_string(),
    })
}

/// SHA-256 of the canonical JSON form (sorted keys, no whitespace) of `config`.
pub fn config_digest<T: Serialize>(config: &T) -> Result<String> {
    let value = serde_json::to_value(config)?;
    let canonical = serde_json::to_string(&value)?;
    Ok(hex::encode(Sha256::digest(canonical.as_bytes())))
}

/// Provenance record written next to every run's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RunManifest {
    pub tool_version: String,
    pub subcommand: String,
    pub config_digest: String,
    pub input_files: Vec<String>,
    pub output_files: Vec<String>,
    pub rng_seed: Option<u64>,
    /// Seconds since the Unix epoch; not part of the digest.
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new<T: Serialize>(subcommand: &str, config: &T, rng_seed: Option<u64>) -> Result<Self> {
        Ok(RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            config_digest: config_digest(config)?,
            input_files: Vec::new(),
            output_files: Vec::new(),
            rng_seed,
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        })
    }
}
