use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

/// Command, config and version, embedded in every output.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub config: Value,
    pub version: &'static str,
}

impl Manifest {
    fn comment_lines(&self) -> String {
        format!("# command: {}\n# config: {}\n# version: {}\n", self.command, self.config, self.version)
    }
}

/// A CSV table: header plus rows of already formatted cells.
pub struct Csv {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn render(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}

pub fn num(v: f64) -> String {
    // shortest round-trip representation
    format!("{v}")
}

/// JSON document with the manifest under `"manifest"`.
pub fn json_doc(manifest: &Manifest, body: Value) -> Result<String> {
    let mut doc = json!({ "manifest": manifest });
    match body {
        Value::Object(map) => {
            let obj = doc.as_object_mut().expect("object");
            obj.extend(map);
        }
        other => {
            doc["result"] = other;
        }
    }
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

/// CSV document preceded by the manifest as `#` comments.
pub fn csv_doc(manifest: &Manifest, extra: &[(String, String)], table: &Csv) -> Result<String> {
    let mut s = manifest.comment_lines();
    for (k, v) in extra {
        s.push_str(&format!("# {k}: {v}\n"));
    }
    s.push_str(&table.render()?);
    Ok(s)
}

/// Writes to `out` or stdout.
pub fn write(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut o = std::io::stdout().lock();
            match o.write_all(text.as_bytes()).and_then(|_| o.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}
