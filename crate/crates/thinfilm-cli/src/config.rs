//! Flat key=value run manifests: one `key = value` pair per line, `#`
//! for full-line comments. Every diagnostic carries its line number and
//! unconsumed keys are rejected, so a typo never silently selects a
//! default.

use std::cell::Cell;
use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug)]
struct Entry {
    value: String,
    line: usize,
    consumed: Cell<bool>,
}

#[derive(Debug)]
pub struct Config {
    entries: BTreeMap<String, Entry>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("config {}: {e}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                return Err(format!("config line {line}: expected `key = value`, got {trimmed:?}"));
            };
            let key = key.trim();
            let value = value.trim();
            if key.is_empty()
                || !key
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_')
            {
                return Err(format!("config line {line}: invalid key {key:?}"));
            }
            if value.is_empty() {
                return Err(format!("config line {line}: key `{key}` has an empty value"));
            }
            if let Some(prev) = entries.get(key) {
                return Err(format!(
                    "config line {line}: duplicate key `{key}` (first set on line {})",
                    prev.line
                ));
            }
            entries.insert(
                key.to_owned(),
                Entry {
                    value: value.to_owned(),
                    line,
                    consumed: Cell::new(false),
                },
            );
        }
        Ok(Self { entries })
    }

    /// Raw lookup; marks the key as consumed.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| {
            e.consumed.set(true);
            e.value.as_str()
        })
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn require(&self, key: &str) -> Result<&str, String> {
        self.get(key)
            .ok_or_else(|| format!("config: missing required key `{key}`"))
    }

    fn parse_value<T: FromStr>(&self, key: &str, value: &str, what: &str) -> Result<T, String>
    where
        T::Err: Display,
    {
        value.parse().map_err(|e| {
            let line = self.entries[key].line;
            format!("config line {line}: key `{key}`: expected {what}, got {value:?} ({e})")
        })
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>, String> {
        self.get(key)
            .map(|v| self.parse_value(key, v, "a real number"))
            .transpose()
    }

    pub fn require_f64(&self, key: &str) -> Result<f64, String> {
        let v = self.require(key)?;
        self.parse_value(key, v, "a real number")
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>, String> {
        self.get(key)
            .map(|v| self.parse_value(key, v, "a nonnegative integer"))
            .transpose()
    }

    pub fn require_usize(&self, key: &str) -> Result<usize, String> {
        let v = self.require(key)?;
        self.parse_value(key, v, "a nonnegative integer")
    }

    pub fn get_bool(&self, key: &str) -> Result<Option<bool>, String> {
        match self.get(key) {
            None => Ok(None),
            Some("true") => Ok(Some(true)),
            Some("false") => Ok(Some(false)),
            Some(other) => {
                let line = self.entries[key].line;
                Err(format!(
                    "config line {line}: key `{key}`: expected true or false, got {other:?}"
                ))
            }
        }
    }

    /// Comma-separated list of reals.
    pub fn get_f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, String> {
        let Some(raw) = self.get(key) else {
            return Ok(None);
        };
        let line = self.entries[key].line;
        raw.split(',')
            .map(|piece| {
                piece.trim().parse().map_err(|e| {
                    format!(
                        "config line {line}: key `{key}`: expected comma-separated reals, \
                         got {piece:?} ({e})"
                    )
                })
            })
            .collect::<Result<Vec<f64>, String>>()
            .map(Some)
    }

    /// Fails if any key was never consumed, listing each with its line.
    pub fn finish(&self) -> Result<(), String> {
        let unknown: Vec<String> = self
            .entries
            .iter()
            .filter(|(_, e)| !e.consumed.get())
            .map(|(k, e)| format!("line {}: unknown key `{k}`", e.line))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(format!("config: {}", unknown.join("; ")))
        }
    }

    /// Canonical `key = value` listing (sorted) for the run manifest.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (k, e) in &self.entries {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&e.value);
            out.push('\n');
        }
        out
    }
}
