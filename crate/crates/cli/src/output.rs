//! Atomic artifact writers. Every artifact carries the configuration that
//! produced it: CSVs as leading `#` comment lines, SVGs in `<metadata>`,
//! JSON in its `config_echo` field.

use std::io::Write;
use std::path::Path;

use mdsts_core::markers::SCHEMA_VERSION;
use mdsts_core::AnalysisConfig;

use crate::config;
use crate::error::{io_error, CliError};

/// Writes through a temp file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_error(dir, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| io_error(path, e))?;
    tmp.persist(path).map_err(|e| io_error(path, e.error))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn config_comment(config: &AnalysisConfig) -> String {
    let mut out = format!("# mdsts schema_version = {SCHEMA_VERSION}\n");
    for line in config::to_text(config).lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out
}

/// CSV table with the configuration prepended as comments.
pub fn csv_table(config: &AnalysisConfig, header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::Data(e.to_string()))?;
    for r in rows {
        w.write_record(r).map_err(|e| CliError::Data(e.to_string()))?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| CliError::Data(e.to_string()))?)
        .expect("csv output is utf-8");
    Ok(config_comment(config) + &body)
}

/// Inserts the configuration into an SVG document as `<metadata>`.
pub fn svg_with_config(svg: &str, config: &AnalysisConfig) -> String {
    let text = config::to_text(config).replace('&', "&amp;").replace('<', "&lt;");
    let meta = format!("<metadata>\nschema_version = {SCHEMA_VERSION}\n{text}</metadata>\n");
    match svg.find('\n') {
        Some(i) => format!("{}{meta}{}", &svg[..=i], &svg[i + 1..]),
        None => svg.to_owned() + &meta,
    }
}

pub fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn num(v: f64) -> String {
    v.to_string()
}

pub fn joined(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

/// File-name-safe form of an entity id.
pub fn file_stem(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' }).collect()
}
