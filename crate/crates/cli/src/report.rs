//! Versioned JSON envelope shared by every subcommand, and its validator.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

pub const COMMANDS: [&str; 8] = ["stencil", "moments", "nse", "analyze", "ou", "simulate", "verify", "known"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema_version: u32,
    pub version: String,
    pub command: String,
    pub model: String,
    pub inputs_hash: String,
    pub seed: Option<u64>,
    /// `ok` or `error`.
    pub status: String,
    pub error: Option<String>,
    pub results: serde_json::Value,
    pub warnings: Vec<String>,
}

#[derive(Debug, Error, PartialEq)]
pub enum SchemaError {
    #[error("not a report: {0}")]
    Parse(String),
    #[error("schema version {0} is not supported (expected {SCHEMA_VERSION})")]
    Version(u32),
    #[error("unknown command `{0}`")]
    Command(String),
    #[error("inputs_hash must be 64 lowercase hex digits")]
    Hash,
    #[error("status `{0}` inconsistent with error field")]
    Status(String),
}

/// SHA-256 over length-prefixed parts, so part boundaries matter.
pub fn inputs_hash<I, S>(parts: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    let mut h = Sha256::new();
    for p in parts {
        let p = p.as_ref();
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    hex::encode(h.finalize())
}

impl Report {
    pub fn ok(command: &str, model: &str, hash: String, seed: Option<u64>, results: serde_json::Value, warnings: Vec<String>) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.into(),
            model: model.into(),
            inputs_hash: hash,
            seed,
            status: "ok".into(),
            error: None,
            results,
            warnings,
        }
    }

    pub fn failure(command: &str, model: &str, hash: String, seed: Option<u64>, reason: String) -> Self {
        Report {
            status: "error".into(),
            error: Some(reason),
            results: serde_json::Value::Null,
            ..Report::ok(command, model, hash, seed, serde_json::Value::Null, Vec::new())
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// Parse and check a report document.
pub fn validate_report(text: &str) -> Result<Report, SchemaError> {
    let r: Report = serde_json::from_str(text).map_err(|e| SchemaError::Parse(e.to_string()))?;
    if r.schema_version != SCHEMA_VERSION {
        return Err(SchemaError::Version(r.schema_version));
    }
    if !COMMANDS.contains(&r.command.as_str()) {
        return Err(SchemaError::Command(r.command));
    }
    if r.inputs_hash.len() != 64 || !r.inputs_hash.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b)) {
        return Err(SchemaError::Hash);
    }
    match (r.status.as_str(), &r.error) {
        ("ok", None) | ("error", Some(_)) => Ok(r),
        _ => Err(SchemaError::Status(r.status)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let r = Report::ok("known", "ou2", inputs_hash(["a"]), None, serde_json::json!({"x": 1}), vec![]);
        assert_eq!(validate_report(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn unknown_field_rejected() {
        let r = Report::ok("known", "ou2", inputs_hash(["a"]), None, serde_json::Value::Null, vec![]);
        let mut v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        v["extra"] = serde_json::json!(1);
        assert!(matches!(validate_report(&v.to_string()), Err(SchemaError::Parse(_))));
    }

    #[test]
    fn hash_separates_parts() {
        assert_ne!(inputs_hash(["ab", "c"]), inputs_hash(["a", "bc"]));
    }
}
