//! CSV, JSON and manifest emission.
//!
//! Every output is byte-identical for identical resolved configuration,
//! seed and library version; wall-clock times go to a separate
//! `timestamps.txt` that the manifest does not cover.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

/// Float cell with 17 significant digits; NaN and infinities spelled out.
pub fn float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Header context shared by all files of one run.
pub struct RunContext {
    pub command: String,
    pub seed: u64,
    pub resolved_config: String,
}

impl RunContext {
    pub fn config_hash(&self) -> String {
        sha256_hex(self.resolved_config.as_bytes())
    }
}

pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn render(&self, ctx: &RunContext) -> Vec<u8> {
        let mut out = Vec::new();
        let mut comment = |s: &str| {
            out.extend_from_slice(b"# ");
            out.extend_from_slice(s.as_bytes());
            out.push(b'\n');
        };
        comment(&format!(
            "lrperc {} command={} schema_version={SCHEMA_VERSION}",
            env!("CARGO_PKG_VERSION"),
            ctx.command
        ));
        comment(&format!("config_sha256={} seed={}", ctx.config_hash(), ctx.seed));
        for line in ctx.resolved_config.lines() {
            comment(line);
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    library_version: &'a str,
    schema_version: u32,
    seed: u64,
    config_sha256: String,
    resolved_config: &'a str,
    files: std::collections::BTreeMap<String, String>,
}

/// Files of one run, written together with the manifest.
pub struct OutputSet {
    files: Vec<(String, Vec<u8>)>,
}

impl OutputSet {
    pub fn new() -> Self {
        OutputSet { files: Vec::new() }
    }

    pub fn csv(&mut self, name: &str, table: &CsvTable, ctx: &RunContext) {
        self.files.push((name.to_string(), table.render(ctx)));
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut bytes = serde_json::to_vec_pretty(value).expect("serializable");
        bytes.push(b'\n');
        self.files.push((name.to_string(), bytes));
    }

    pub fn write(self, dir: &Path, ctx: &RunContext, started: &str) -> std::io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut sums = std::collections::BTreeMap::new();
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            fs::write(&path, bytes)?;
            sums.insert(name.clone(), sha256_hex(bytes));
            written.push(path);
        }
        let manifest = Manifest {
            command: &ctx.command,
            library_version: env!("CARGO_PKG_VERSION"),
            schema_version: SCHEMA_VERSION,
            seed: ctx.seed,
            config_sha256: ctx.config_hash(),
            resolved_config: &ctx.resolved_config,
            files: sums,
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest).expect("serializable");
        bytes.push(b'\n');
        let path = dir.join("manifest.json");
        fs::write(&path, bytes)?;
        written.push(path);
        let ended = chrono::Utc::now().to_rfc3339();
        let path = dir.join("timestamps.txt");
        fs::write(&path, format!("start {started}\nend {ended}\n"))?;
        written.push(path);
        Ok(written)
    }
}
