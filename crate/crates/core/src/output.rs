//! CSV / JSON emission and the run manifest.
//!
//! Data files hold tidy rows, one column per field in declaration order.
//! Each data file gets a `<stem>.manifest.json` sibling recording the full
//! resolved parameter set. Nothing time- or host-dependent is written, so
//! identical inputs give byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{OutputFormat, SweepSpec};
use crate::error::Result;
use crate::pipeline::StudyOutput;
use crate::security::Backend;

/// Bumped whenever a column is added, removed or renamed.
pub const SCHEMA_VERSION: u32 = 1;

pub const ARTIFACT: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn write_rows_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonDoc<'a, T> {
    schema_version: u32,
    rows: &'a [T],
}

pub fn write_rows_json<T: Serialize, W: Write>(rows: &[T], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(
        &mut out,
        &JsonDoc {
            schema_version: SCHEMA_VERSION,
            rows,
        },
    )?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn write_study<W: Write>(study: &StudyOutput, format: OutputFormat, out: W) -> Result<()> {
    macro_rules! emit {
        ($rows:expr) => {
            match format {
                OutputFormat::Csv => write_rows_csv($rows, out),
                OutputFormat::Json => write_rows_json($rows, out),
            }
        };
    }
    match study {
        StudyOutput::Noise(r) => emit!(r),
        StudyOutput::Budget(r) => emit!(r),
        StudyOutput::Ratio(r) => emit!(r),
        StudyOutput::Sweep(r) => emit!(r),
        StudyOutput::Optimum(r) => emit!(r),
        StudyOutput::Oracle(r) => emit!(r),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest<'a> {
    pub schema_version: u32,
    pub artifact: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub protocol: String,
    pub backend: &'static str,
    pub seed: u64,
    pub data_file: Option<String>,
    pub rows: usize,
    pub spec: &'a SweepSpec,
}

impl<'a> Manifest<'a> {
    pub fn new(
        command: &'a str,
        spec: &'a SweepSpec,
        rows: usize,
        data_file: Option<&Path>,
    ) -> Self {
        let backend = if spec.constellation.protocol.is_discrete() {
            Backend::GaussianEquivalent
        } else {
            Backend::Gaussian
        };
        Manifest {
            schema_version: SCHEMA_VERSION,
            artifact: ARTIFACT,
            version: VERSION,
            command,
            protocol: spec.constellation.protocol.label(),
            backend: backend.label(),
            seed: spec.seed,
            data_file: data_file
                .and_then(|p| p.file_name())
                .map(|f| f.to_string_lossy().into_owned()),
            rows,
            spec,
        }
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        out.write_all(b"\n")?;
        Ok(())
    }
}

/// `dir/name.csv` → `dir/name.manifest.json`.
pub fn manifest_path(data: &Path) -> PathBuf {
    let stem = data
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    data.with_file_name(format!("{stem}.manifest.json"))
}

/// Writes the data file and its manifest; returns both paths.
pub fn emit_to_files(
    command: &str,
    spec: &SweepSpec,
    study: &StudyOutput,
    path: &Path,
) -> Result<(PathBuf, PathBuf)> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut data = BufWriter::new(File::create(path)?);
    write_study(study, spec.output.format, &mut data)?;
    data.flush()?;
    let mpath = manifest_path(path);
    let mut m = BufWriter::new(File::create(&mpath)?);
    Manifest::new(command, spec, study.len(), Some(path)).write(&mut m)?;
    m.flush()?;
    Ok((path.to_path_buf(), mpath))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ProtocolKind;
    use crate::pipeline::OptimumRow;

    fn rows() -> Vec<OptimumRow> {
        vec![
            OptimumRow {
                protocol: "qpsk".into(),
                backend: "gaussian-equivalent".into(),
                l_km: 5.0,
                n_opt: Some(61),
                r_total: 0.125,
                gain: Some(40.5),
            },
            OptimumRow {
                protocol: "qpsk".into(),
                backend: "gaussian-equivalent".into(),
                l_km: 400.0,
                n_opt: None,
                r_total: 0.0,
                gain: None,
            },
        ]
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_rows_csv(&rows(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "protocol,backend,l_km,n_opt,r_total,gain");
        assert_eq!(lines[1], "qpsk,gaussian-equivalent,5.0,61,0.125,40.5");
        assert_eq!(lines[2], "qpsk,gaussian-equivalent,400.0,,0.0,");
    }

    #[test]
    fn json_mirror() {
        let mut buf = Vec::new();
        write_rows_json(&rows(), &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["schema_version"], SCHEMA_VERSION);
        assert_eq!(v["rows"][0]["n_opt"], 61);
        assert!(v["rows"][1]["gain"].is_null());
    }

    #[test]
    fn manifest_records_resolved_defaults() {
        let spec = SweepSpec::for_protocol(ProtocolKind::Qpsk).unwrap();
        let mut buf = Vec::new();
        Manifest::new("sweep", &spec, 3, Some(Path::new("/tmp/x/run.csv")))
            .write(&mut buf)
            .unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["backend"], "gaussian-equivalent");
        assert_eq!(v["data_file"], "run.csv");
        assert_eq!(v["spec"]["channel"]["alpha_db_per_km"], 0.2);
        assert_eq!(v["spec"]["channel"]["detection"], "heterodyne-no-switch");
        assert_eq!(
            manifest_path(Path::new("a/b.csv")),
            PathBuf::from("a/b.manifest.json")
        );
    }
}
