//! Line-oriented `key = value` documents, shared by scenario files and
//! experiment configs.
//!
//! ```text
//! document := line*
//! line     := blank | comment | entry
//! comment  := '#' any*
//! entry    := key ws* '=' ws* value
//! key      := [A-Za-z_][A-Za-z0-9_]*
//! ```
//!
//! Keys may repeat (scenario files list one `strip` entry per strip); values
//! run to the end of the line with surrounding whitespace trimmed.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DocError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing key `{0}`")]
    Missing(String),
    #[error("key `{key}`: cannot parse {value:?}")]
    BadValue { key: String, value: String },
    #[error("unknown key `{key}` on line {line}")]
    UnknownKey { key: String, line: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

pub fn parse(text: &str) -> Result<Vec<Entry>, DocError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(DocError::Syntax {
                line: i + 1,
                message: format!("expected `key = value`, found {line:?}"),
            });
        };
        let key = key.trim();
        let valid_key = key
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !valid_key {
            return Err(DocError::Syntax {
                line: i + 1,
                message: format!("invalid key {key:?}"),
            });
        }
        out.push(Entry {
            key: key.to_string(),
            value: value.trim().to_string(),
            line: i + 1,
        });
    }
    Ok(out)
}

/// Last value given for `key`.
pub fn get<'a>(entries: &'a [Entry], key: &str) -> Option<&'a str> {
    entries
        .iter()
        .rev()
        .find(|e| e.key == key)
        .map(|e| e.value.as_str())
}

pub fn require<'a>(entries: &'a [Entry], key: &str) -> Result<&'a str, DocError> {
    get(entries, key).ok_or_else(|| DocError::Missing(key.to_string()))
}

pub fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, DocError> {
    value.parse().map_err(|_| DocError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
    })
}

/// Seventeen significant digits: enough for an exact `f64` round trip.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}
