//! Run manifests and the artifact writers that point back to them.
//!
//! Each command writes `<command>.manifest.json` next to its outputs. CSV
//! artifacts open with one comment line naming their schema and manifest,
//! then a header row; JSON artifacts carry a `manifest` field.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const MANIFEST_SCHEMA: &str = "wdrcc.manifest/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub command: String,
    pub version: String,
    /// Every parameter the command ran with, after defaults and overrides.
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    /// Wall-clock seconds per stage.
    pub timings: BTreeMap<String, f64>,
    /// Artifact file names, relative to the manifest's directory.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config: &impl Serialize, seed: Option<u64>) -> Result<Self> {
        Ok(Self {
            schema: MANIFEST_SCHEMA.into(),
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: serde_json::to_value(config)?,
            seed,
            timings: BTreeMap::new(),
            outputs: Vec::new(),
        })
    }

    pub fn file_name(&self) -> String {
        format!("{}.manifest.json", self.command)
    }

    pub fn time(&mut self, stage: &str, start: Instant) {
        *self.timings.entry(stage.into()).or_default() += start.elapsed().as_secs_f64();
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(self.file_name());
        write_text(&path, &serde_json::to_string_pretty(self)?)?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&read_text(path)?)?)
    }
}

/// A CSV table: column names plus rows of already formatted fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub schema: &'static str,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(schema: &'static str, header: &[&str]) -> Self {
        Self {
            schema,
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn to_csv(&self, manifest: &str) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let body = String::from_utf8(w.into_inner().map_err(|e| e.into_error())
            .map_err(|e| CliError::io("csv buffer", e))?)
            .expect("csv of utf-8 fields is utf-8");
        Ok(format!("# schema={} manifest={manifest}\n{body}", self.schema))
    }

    /// Parses what [`Table::to_csv`] wrote; returns the table and the
    /// manifest it references.
    pub fn from_csv(schema: &'static str, text: &str) -> Result<(Self, String)> {
        let (first, body) = text
            .split_once('\n')
            .ok_or_else(|| CliError::Invalid("empty csv".into()))?;
        let mut found_schema = None;
        let mut manifest = None;
        for field in first.trim_start_matches('#').split_whitespace() {
            match field.split_once('=') {
                Some(("schema", v)) => found_schema = Some(v),
                Some(("manifest", v)) => manifest = Some(v.to_string()),
                _ => {}
            }
        }
        if found_schema != Some(schema) {
            return Err(CliError::Invalid(format!(
                "expected schema {schema}, found {found_schema:?}"
            )));
        }
        let mut r = csv::Reader::from_reader(body.as_bytes());
        let header = r.headers()?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()))
            .collect::<std::result::Result<_, _>>()?;
        let manifest = manifest.ok_or_else(|| CliError::Invalid("csv names no manifest".into()))?;
        Ok((Self { schema, header, rows }, manifest))
    }
}

/// Shortest representation that parses back to the same value.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Writes `table` as `dir/name` and records it in the manifest.
pub fn emit_table(dir: &Path, name: &str, table: &Table, manifest: &mut RunManifest) -> Result<PathBuf> {
    let path = dir.join(name);
    write_text(&path, &table.to_csv(&manifest.file_name())?)?;
    manifest.outputs.push(name.into());
    Ok(path)
}
