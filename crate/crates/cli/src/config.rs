//! Flat `key = value` configuration files.
//!
//! One assignment per line; `#` starts a comment (whole-line or trailing);
//! blank lines are ignored. Dotted keys express structure without nesting
//! syntax (`laser.seed = 7`, `pid.kp = 0.5`). Values never contain `#`.
//!
//! Lookups are typed and mark the key as consumed; [`Config::finish`]
//! then rejects any key the command never asked for, so a typo like
//! `noize.sigma` fails loudly instead of silently falling back to a
//! default. Errors always name the file, line and key.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CmdError, CmdResult};

/// A parsed configuration file with consumption tracking.
#[derive(Debug)]
pub struct Config {
    /// Display name used in error messages (usually the file path).
    origin: String,
    /// key -> (1-based line, raw value).
    values: BTreeMap<String, (usize, String)>,
    used: RefCell<BTreeSet<String>>,
}

impl Config {
    pub fn load(path: &Path) -> CmdResult<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CmdError::Validation(format!("cannot read config '{}': {e}", path.display()))
        })?;
        Config::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> CmdResult<Config> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CmdError::Validation(format!(
                    "{origin}:{lineno}: expected 'key = value', got '{line}'"
                )));
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(CmdError::Validation(format!(
                    "{origin}:{lineno}: assignment has an empty key"
                )));
            }
            if let Some((first, _)) = values.insert(key.to_string(), (lineno, value.to_string()))
            {
                return Err(CmdError::Validation(format!(
                    "{origin}:{lineno}: duplicate key '{key}' (first set on line {first})"
                )));
            }
        }
        Ok(Config {
            origin: origin.to_string(),
            values,
            used: RefCell::new(BTreeSet::new()),
        })
    }

    fn raw(&self, key: &str) -> Option<&(usize, String)> {
        let entry = self.values.get(key);
        if entry.is_some() {
            self.used.borrow_mut().insert(key.to_string());
        }
        entry
    }

    fn parse_value<T>(&self, key: &str, lineno: usize, value: &str) -> CmdResult<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        value.parse().map_err(|e| {
            CmdError::Validation(format!(
                "{}:{lineno}: key '{key}' = '{value}': {e}",
                self.origin
            ))
        })
    }

    /// A key that must be present.
    pub fn require<T>(&self, key: &str) -> CmdResult<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.raw(key) {
            Some((lineno, value)) => self.parse_value(key, *lineno, &value.clone()),
            None => Err(CmdError::Validation(format!(
                "{}: missing required key '{key}'",
                self.origin
            ))),
        }
    }

    /// An optional key with a default.
    pub fn get<T>(&self, key: &str, default: T) -> CmdResult<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.get_opt(key).map(|v| v.unwrap_or(default))
    }

    /// An optional key without a default.
    pub fn get_opt<T>(&self, key: &str) -> CmdResult<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.raw(key) {
            Some((lineno, value)) => self.parse_value(key, *lineno, &value.clone()).map(Some),
            None => Ok(None),
        }
    }

    /// An optional comma-separated list of numbers.
    pub fn get_list(&self, key: &str) -> CmdResult<Option<Vec<f64>>> {
        let Some((lineno, value)) = self.raw(key) else {
            return Ok(None);
        };
        let (lineno, value) = (*lineno, value.clone());
        let mut out = Vec::new();
        for part in value.split(',') {
            out.push(self.parse_value(key, lineno, part.trim())?);
        }
        Ok(Some(out))
    }

    /// Every key as given, for the run manifest.
    pub fn entries(&self) -> BTreeMap<String, String> {
        self.values
            .iter()
            .map(|(k, (_, v))| (k.clone(), v.clone()))
            .collect()
    }

    /// Fails if any key was never consumed by the command.
    pub fn finish(&self) -> CmdResult<()> {
        let used = self.used.borrow();
        let unknown: Vec<String> = self
            .values
            .iter()
            .filter(|(k, _)| !used.contains(*k))
            .map(|(k, (lineno, _))| format!("'{k}' (line {lineno})"))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CmdError::Validation(format!(
                "{}: unknown key{} {}",
                self.origin,
                if unknown.len() == 1 { "" } else { "s" },
                unknown.join(", ")
            )))
        }
    }
}
