//! Flat `[section]` / `key = value` experiment configuration.
//!
//! Lines are trimmed; `#` starts a comment line. Every key read by a
//! command is recorded together with its resolved value (defaults
//! included), and keys present in the file that no command read are
//! rejected so typos never pass silently.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{}{msg}", line.map(|l| format!("config line {l}: ")).unwrap_or_default())]
pub struct ConfigError {
    pub line: Option<usize>,
    pub msg: String,
}

fn err<T>(line: Option<usize>, msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError { line, msg: msg.into() })
}

#[derive(Debug, Clone, Default)]
struct Section {
    line: usize,
    entries: BTreeMap<String, (String, usize)>,
}

#[derive(Debug, Default)]
pub struct Config {
    sections: BTreeMap<String, Section>,
    used: RefCell<BTreeSet<(String, String)>>,
    resolved: RefCell<BTreeMap<String, BTreeMap<String, String>>>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut sections: BTreeMap<String, Section> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            if let Some(rest) = s.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .map(str::trim)
                    .filter(|n| !n.is_empty())
                    .ok_or(ConfigError { line: Some(line), msg: format!("malformed section header {s:?}") })?;
                if sections.contains_key(name) {
                    return err(Some(line), format!("section [{name}] appears twice"));
                }
                sections.insert(name.to_string(), Section { line, entries: BTreeMap::new() });
                current = Some(name.to_string());
                continue;
            }
            let Some((key, value)) = s.split_once('=') else {
                return err(Some(line), format!("expected `key = value`, got {s:?}"));
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return err(Some(line), "empty key");
            }
            let Some(sec) = current.as_ref() else {
                return err(Some(line), format!("key {key:?} appears before any [section]"));
            };
            let entries = &mut sections.get_mut(sec).unwrap().entries;
            if entries.insert(key.to_string(), (value.to_string(), line)).is_some() {
                return err(Some(line), format!("key {key:?} repeated in [{sec}]"));
            }
        }
        Ok(Config { sections, ..Default::default() })
    }

    pub fn section_line(&self, section: &str) -> Option<usize> {
        self.sections.get(section).map(|s| s.line)
    }

    fn raw(&self, section: &str, key: &str) -> Option<&(String, usize)> {
        self.used.borrow_mut().insert((section.to_string(), key.to_string()));
        self.sections.get(section).and_then(|s| s.entries.get(key))
    }

    fn record(&self, section: &str, key: &str, value: String) {
        self.resolved.borrow_mut().entry(section.to_string()).or_default().insert(key.to_string(), value);
    }

    fn parse_value<T: FromStr>(v: &str, line: usize, key: &str) -> Result<T, ConfigError> {
        v.parse().or_else(|_| err(Some(line), format!("cannot parse {key} = {v:?}")))
    }

    /// Parsed value of `key`, or the default when absent and one is given.
    pub fn get<T: FromStr + ToString>(&self, section: &str, key: &str, default: Option<T>) -> Result<T, ConfigError> {
        let value = match (self.raw(section, key), default) {
            (Some((v, line)), _) => Self::parse_value(v, *line, key)?,
            (None, Some(d)) => d,
            (None, None) => {
                return err(self.section_line(section), format!("missing required key [{section}] {key}"))
            }
        };
        self.record(section, key, value.to_string());
        Ok(value)
    }

    /// Comma-separated list; an empty value is an empty list.
    pub fn get_list<T: FromStr + ToString>(
        &self,
        section: &str,
        key: &str,
        default: Option<Vec<T>>,
    ) -> Result<Vec<T>, ConfigError> {
        let values = match (self.raw(section, key), default) {
            (Some((v, line)), _) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| Self::parse_value(s, *line, key))
                .collect::<Result<Vec<T>, _>>()?,
            (None, Some(d)) => d,
            (None, None) => {
                return err(self.section_line(section), format!("missing required key [{section}] {key}"))
            }
        };
        let text = values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ");
        self.record(section, key, text);
        Ok(values)
    }

    /// Line of `key` if it was given explicitly.
    pub fn line_of(&self, section: &str, key: &str) -> Option<usize> {
        self.sections.get(section).and_then(|s| s.entries.get(key)).map(|e| e.1)
    }

    /// Records a value that did not come from the file (e.g. the seed).
    pub fn set_resolved(&self, section: &str, key: &str, value: String) {
        self.record(section, key, value);
    }

    /// Errors on any section or key that was never read.
    pub fn reject_unknown(&self) -> Result<(), ConfigError> {
        let used = self.used.borrow();
        for (name, sec) in &self.sections {
            if !used.iter().any(|(s, _)| s == name) {
                return err(Some(sec.line), format!("unknown section [{name}]"));
            }
            for (key, (_, line)) in &sec.entries {
                if !used.contains(&(name.clone(), key.clone())) {
                    return err(Some(*line), format!("unknown key {key:?} in [{name}]"));
                }
            }
        }
        Ok(())
    }

    /// Canonical text of every resolved value, sorted by section and key.
    pub fn resolved_text(&self) -> String {
        let mut out = String::new();
        for (sec, entries) in self.resolved.borrow().iter() {
            let _ = writeln!(out, "[{sec}]");
            for (k, v) in entries {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        out
    }
}
