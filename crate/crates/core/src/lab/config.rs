//! Flat `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored; a `#` after a value
//! starts a trailing comment. Keys are case-sensitive and may appear once.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct Config {
    entries: BTreeMap<String, String>,
    used: RefCell<BTreeSet<String>>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`, got `{}`", lineno + 1, raw.trim()))
            })?;
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(Error::Config(format!("line {}: bad key `{key}`", lineno + 1)));
            }
            if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
        }
        Ok(Self {
            entries,
            used: RefCell::default(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Overrides or adds a key, as if it had been in the file.
    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        let v = self.entries.get(key)?;
        self.used.borrow_mut().insert(key.to_string());
        Some(v.as_str())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|e| Error::Config(format!("key `{key}`: cannot parse `{s}`: {e}"))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?
            .ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
    }

    /// Comma- or whitespace-separated list of reals.
    pub fn get_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(s) = self.raw(key) else {
            return Ok(None);
        };
        s.split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| Error::Config(format!("key `{key}`: cannot parse `{t}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    /// Keys present in the file that no getter has asked for.
    pub fn unused_keys(&self) -> Vec<String> {
        let used = self.used.borrow();
        self.entries
            .keys()
            .filter(|k| !used.contains(*k))
            .cloned()
            .collect()
    }

    /// Fails on keys nothing consumed, which are almost always typos.
    pub fn finish(&self) -> Result<()> {
        let unused = self.unused_keys();
        if unused.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(format!("unknown key(s): {}", unused.join(", "))))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_values_and_comments() {
        let c = Config::parse("# header\n k = 1e4 \n\nbc = neumann # trailing\nk_values = 1e1, 1e2 1e3\n").unwrap();
        assert_eq!(c.require::<f64>("k").unwrap(), 1e4);
        assert_eq!(c.require::<String>("bc").unwrap(), "neumann");
        assert_eq!(c.get_list("k_values").unwrap().unwrap(), vec![10.0, 100.0, 1000.0]);
        assert_eq!(c.get_or("cells", 64usize).unwrap(), 64);
        assert!(c.finish().is_ok());
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(Config::parse("k 1").is_err());
        assert!(Config::parse("k = 1\nk = 2").is_err());
        assert!(Config::parse("two words = 1").is_err());
        let c = Config::parse("k = abc").unwrap();
        assert!(c.get::<f64>("k").is_err());
        assert!(c.require::<f64>("m").is_err());
    }

    #[test]
    fn unknown_keys_are_reported() {
        let c = Config::parse("k = 1\ntypo = 2").unwrap();
        let _ = c.get::<f64>("k");
        assert_eq!(c.unused_keys(), vec!["typo".to_string()]);
        assert!(c.finish().is_err());
    }
}
