//! Rule files. CSV carries `re_node,im_node,re_weight,im_weight` rows; JSON
//! adds degree, error estimate, contour length, provenance and the tool
//! version. Floats are written in shortest round-trip form, so export and
//! import reproduce every bit.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rule::{Provenance, QuadratureRule};

pub const CSV_HEADER: [&str; 4] = ["re_node", "im_node", "re_weight", "im_weight"];
pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleFormat {
    Csv,
    Json,
}

impl RuleFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(RuleFormat::Csv),
            "json" => Some(RuleFormat::Json),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: u64, message: String },
    #[error("{path}: unknown rule format (expected a .csv or .json extension)")]
    UnknownFormat { path: String },
    #[error("cannot serialize: {0}")]
    Serialize(String),
}

pub type Result<T> = std::result::Result<T, IoError>;

#[derive(Serialize, Deserialize)]
struct RuleDocument {
    tool: String,
    version: String,
    degree: usize,
    approx_error: Option<f64>,
    contour_length: Option<f64>,
    constant: Complex64,
    provenance: Provenance,
    nodes: Vec<Complex64>,
    weights: Vec<Complex64>,
}

pub fn rule_to_csv(rule: &QuadratureRule) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let ser = |e: csv::Error| IoError::Serialize(e.to_string());
    w.write_record(CSV_HEADER).map_err(ser)?;
    for (z, c) in rule.nodes.iter().zip(&rule.weights) {
        w.write_record([z.re, z.im, c.re, c.im].map(|x| format!("{x:e}"))).map_err(ser)?;
    }
    let bytes = w.into_inner().map_err(|e| IoError::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| IoError::Serialize(e.to_string()))
}

/// Parses CSV rule text; `path` only labels error messages.
pub fn rule_from_csv(text: &str, path: &str) -> Result<QuadratureRule> {
    let parse_err = |line: u64, message: String| IoError::Parse { path: path.to_string(), line, message };
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(text.as_bytes());
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut seen_header = false;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if !seen_header {
            if record.iter().map(str::trim).ne(CSV_HEADER) {
                return Err(parse_err(line, format!("expected header `{}`", CSV_HEADER.join(","))));
            }
            seen_header = true;
            continue;
        }
        if record.len() != 4 {
            return Err(parse_err(line, format!("expected 4 fields, found {}", record.len())));
        }
        let mut vals = [0.0; 4];
        for (k, field) in record.iter().enumerate() {
            vals[k] = field.trim().parse().map_err(|e| parse_err(line, format!("field {} (`{field}`): {e}", CSV_HEADER[k])))?;
        }
        nodes.push(Complex64::new(vals[0], vals[1]));
        weights.push(Complex64::new(vals[2], vals[3]));
    }
    if !seen_header {
        return Err(parse_err(1, "empty file".into()));
    }
    Ok(QuadratureRule::new(nodes, weights))
}

pub fn rule_to_json(rule: &QuadratureRule) -> Result<String> {
    let doc = RuleDocument {
        tool: TOOL_NAME.into(),
        version: TOOL_VERSION.into(),
        degree: rule.degree,
        approx_error: rule.approx_error,
        contour_length: rule.contour_length,
        constant: rule.constant,
        provenance: rule.provenance.clone(),
        nodes: rule.nodes.clone(),
        weights: rule.weights.clone(),
    };
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| IoError::Serialize(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn rule_from_json(text: &str, path: &str) -> Result<QuadratureRule> {
    let doc: RuleDocument = serde_json::from_str(text).map_err(|e| IoError::Parse { path: path.to_string(), line: e.line() as u64, message: e.to_string() })?;
    if doc.nodes.len() != doc.weights.len() {
        return Err(IoError::Parse {
            path: path.to_string(),
            line: 1,
            message: format!("{} nodes but {} weights", doc.nodes.len(), doc.weights.len()),
        });
    }
    Ok(QuadratureRule {
        nodes: doc.nodes,
        weights: doc.weights,
        constant: doc.constant,
        degree: doc.degree,
        approx_error: doc.approx_error,
        contour_length: doc.contour_length,
        provenance: doc.provenance,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| IoError::Io { path: path.display().to_string(), source })
}

pub fn export_rule(rule: &QuadratureRule, path: &Path, format: RuleFormat) -> Result<()> {
    let text = match format {
        RuleFormat::Csv => rule_to_csv(rule)?,
        RuleFormat::Json => rule_to_json(rule)?,
    };
    write_file(path, &text)
}

/// Reads a rule, choosing the format from the file extension.
pub fn import_rule(path: &Path) -> Result<QuadratureRule> {
    let name = path.display().to_string();
    let format = RuleFormat::from_path(path).ok_or_else(|| IoError::UnknownFormat { path: name.clone() })?;
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Io { path: name.clone(), source })?;
    match format {
        RuleFormat::Csv => rule_from_csv(&text, &name),
        RuleFormat::Json => rule_from_json(&text, &name),
    }
}
