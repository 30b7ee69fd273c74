//! Canonical JSON: sorted keys, two-space indent, LF line endings, trailing newline.

use anyhow::Result;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Object keys come out sorted because `serde_json::Map` is a `BTreeMap`
/// without the `preserve_order` feature.
pub fn to_value(v: &impl Serialize) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

pub fn pretty(v: &impl Serialize) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&to_value(v)?)?;
    s.push('\n');
    Ok(s)
}

/// SHA-256 of the compact canonical form.
pub fn digest(v: &impl Serialize) -> Result<String> {
    let compact = serde_json::to_string(&to_value(v)?)?;
    Ok(hex::encode(Sha256::digest(compact.as_bytes())))
}

/// Parses `text`; errors name the file, the field path and the line and column.
pub fn parse<T: serde::de::DeserializeOwned>(file: &std::path::Path, text: &str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let at = match e.path().to_string() {
            p if p == "." => String::new(),
            p => format!(" field {p}:"),
        };
        crate::UsageError(format!("{}:{at} {}", file.display(), e.inner())).into()
    })
}
