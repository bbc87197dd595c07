//! Flat `key=value` configuration files. Keys are the long flag names of a
//! subcommand; values given on the command line win.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {line}: expected key=value")]
    Syntax { line: usize },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key {key:?}")]
    Duplicate { line: usize, key: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Blank lines and lines starting with `#` are skipped; whitespace around
/// keys and values is trimmed.
pub fn parse_config(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut out: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let (k, v) = s.split_once('=').ok_or(ConfigError::Syntax { line })?;
        let (key, value) = (k.trim(), v.trim());
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(ConfigError::Syntax { line });
        }
        if out.iter().any(|e| e.key == key) {
            return Err(ConfigError::Duplicate { line, key: key.to_string() });
        }
        out.push(Entry { line, key: key.to_string(), value: value.to_string() });
    }
    Ok(out)
}

/// `--key value` pairs for the accepted keys; anything else is an error.
pub fn to_flags(entries: &[Entry], known: &[String]) -> Result<Vec<String>, ConfigError> {
    let mut flags = Vec::with_capacity(entries.len() * 2);
    for e in entries {
        if !known.contains(&e.key) {
            return Err(ConfigError::UnknownKey { line: e.line, key: e.key.clone() });
        }
        flags.push(format!("--{}", e.key));
        flags.push(e.value.clone());
    }
    Ok(flags)
}
