//! Settings files and flag resolution.
//!
//! A settings file is either a JSON object or `key = value` lines (`#`
//! starts a comment). Keys use underscores; dashes are accepted and
//! normalised. A flag given on the command line always wins over the file,
//! and the file wins over built-in defaults. Keys that no command consumes
//! are rejected so a typo never silently falls back to a default.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Mutex;

use serde_json::Value;

use crate::domain::IouThreshold;

use super::CliError;

#[derive(Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
    used: Mutex<BTreeSet<String>>,
}

fn normalise(key: &str) -> String {
    key.trim().replace('-', "_")
}

fn flatten(key: &str, v: &Value) -> Result<String, CliError> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        Value::Array(items) => items
            .iter()
            .map(|x| match x {
                Value::Array(_) | Value::Object(_) => {
                    Err(CliError::input(format!("config key {key:?}: nested arrays are not supported")))
                }
                other => flatten(key, other),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(|parts| parts.join(",")),
        Value::Null | Value::Object(_) => Err(CliError::input(format!(
            "config key {key:?}: expected a string, number, boolean or list"
        ))),
    }
}

impl Settings {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::input(format!("{}: {}", path.display(), e.message)))
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        if text.trim_start().starts_with('{') {
            let obj: serde_json::Map<String, Value> = serde_json::from_str(text)
                .map_err(|e| CliError::input(format!("malformed JSON settings: {e}")))?;
            for (k, v) in &obj {
                // null reads as "not set", so an echoed config can be reused
                if !v.is_null() {
                    values.insert(normalise(k), flatten(k, v)?);
                }
            }
        } else {
            for (i, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| CliError::input(format!("line {}: expected key = value", i + 1)))?;
                values.insert(normalise(k), v.trim().trim_matches('"').to_string());
            }
        }
        Ok(Self { values, used: Mutex::default() })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.used.lock().expect("settings lock").insert(key.to_string());
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        let raw = self.raw(key);
        if flag.is_some() {
            return Ok(flag);
        }
        raw.map(|s| {
            s.parse::<T>()
                .map_err(|e| CliError::input(format!("config key {key:?}: {e}")))
        })
        .transpose()
    }

    pub fn or<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        Ok(self.get(flag, key)?.unwrap_or(default))
    }

    pub fn required<T>(&self, flag: Option<T>, key: &str) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        self.get(flag, key)?
            .ok_or_else(|| CliError::input(format!("missing --{}", key.replace('_', "-"))))
    }

    /// `--key` forces on, `--no-key` forces off, otherwise the file decides.
    pub fn switch(&self, on: bool, off: bool, key: &str, default: bool) -> Result<bool, CliError> {
        let file = self.get::<Switch>(None, key)?.map(|s| s.0);
        Ok(if on {
            true
        } else if off {
            false
        } else {
            file.unwrap_or(default)
        })
    }

    pub fn finish(&self) -> Result<(), CliError> {
        let used = self.used.lock().expect("settings lock");
        let unknown: Vec<&str> = self
            .values
            .keys()
            .filter(|k| !used.contains(*k))
            .map(String::as_str)
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::input(format!("unknown config keys: {}", unknown.join(", "))))
        }
    }
}

struct Switch(bool);

impl FromStr for Switch {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "true" | "on" | "yes" | "1" => Ok(Switch(true)),
            "false" | "off" | "no" | "0" => Ok(Switch(false)),
            other => Err(format!("expected true or false, got {other:?}")),
        }
    }
}

/// Comma-separated IoU thresholds, kept in the given order.
#[derive(Debug, Clone, PartialEq)]
pub struct TauList(pub Vec<IouThreshold>);

impl Default for TauList {
    fn default() -> Self {
        TauList(IouThreshold::defaults())
    }
}

impl FromStr for TauList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out: Vec<IouThreshold> = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let v: f64 = part.parse().map_err(|_| format!("{part:?} is not a number"))?;
            let t = IouThreshold::new(v).map_err(|e| e.to_string())?;
            if out.contains(&t) {
                return Err(format!("threshold {v} listed twice"));
            }
            out.push(t);
        }
        if out.is_empty() {
            return Err("at least one IoU threshold is required".into());
        }
        Ok(TauList(out))
    }
}
