//! Flat `key=value` experiment configuration.
//!
//! One assignment per line; `#` starts a comment; blank lines are ignored.
//! No nesting — the full configuration is echoed into report provenance, so
//! the format stays diff-friendly.

use std::collections::BTreeMap;

use gibbs_lines_core::{Error, Result};

#[derive(Clone, Debug, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::invalid(format!("config line {}: expected key=value", lineno + 1))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(Error::invalid(format!(
                    "config line {}: empty key",
                    lineno + 1
                )));
            }
            if values.insert(key.clone(), value).is_some() {
                return Err(Error::invalid(format!(
                    "config line {}: duplicate key '{key}'",
                    lineno + 1
                )));
            }
        }
        Ok(Config { values })
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn get_str(&self, key: &str) -> Result<&str> {
        self.values
            .get(key)
            .map(|s| s.as_str())
            .ok_or_else(|| Error::invalid(format!("missing required config key '{key}'")))
    }

    pub fn get_str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.values.get(key).map(|s| s.as_str()).unwrap_or(default)
    }

    pub fn get_f64(&self, key: &str) -> Result<f64> {
        self.get_str(key)?
            .parse()
            .map_err(|_| Error::invalid(format!("config key '{key}' is not a number")))
    }

    pub fn get_f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.values.get(key) {
            Some(_) => self.get_f64(key),
            None => Ok(default),
        }
    }

    pub fn get_u64(&self, key: &str) -> Result<u64> {
        self.get_str(key)?
            .parse()
            .map_err(|_| Error::invalid(format!("config key '{key}' is not a nonnegative integer")))
    }

    pub fn get_u64_or(&self, key: &str, default: u64) -> Result<u64> {
        match self.values.get(key) {
            Some(_) => self.get_u64(key),
            None => Ok(default),
        }
    }

    pub fn get_usize_or(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.get_u64_or(key, default as u64)? as usize)
    }

    /// Comma-separated list of numbers.
    pub fn get_f64_list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.values.get(key) {
            None => Ok(default.to_vec()),
            Some(s) => s
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse()
                        .map_err(|_| Error::invalid(format!("config key '{key}': bad list entry")))
                })
                .collect(),
        }
    }

    pub fn get_usize_list_or(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        match self.values.get(key) {
            None => Ok(default.to_vec()),
            Some(s) => s
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse()
                        .map_err(|_| Error::invalid(format!("config key '{key}': bad list entry")))
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_values() {
        let c = Config::parse("# a comment\nseed = 7\n t=1.5 # trailing\n\nname=verify-toda\n")
            .unwrap();
        assert_eq!(c.get_u64("seed").unwrap(), 7);
        assert_eq!(c.get_f64("t").unwrap(), 1.5);
        assert_eq!(c.get_str("name").unwrap(), "verify-toda");
        assert!(c.get_str("missing").is_err());
        assert_eq!(c.get_f64_or("missing", 2.0).unwrap(), 2.0);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(Config::parse("just a line").is_err());
        assert!(Config::parse("=1").is_err());
        assert!(Config::parse("a=1\na=2").is_err());
    }

    #[test]
    fn parses_lists() {
        let c = Config::parse("xs=1, 2.5 ,4\n").unwrap();
        assert_eq!(c.get_f64_list_or("xs", &[]).unwrap(), vec![1.0, 2.5, 4.0]);
        assert_eq!(c.get_f64_list_or("ys", &[9.0]).unwrap(), vec![9.0]);
        assert!(Config::parse("xs=1,oops\n")
            .unwrap()
            .get_f64_list_or("xs", &[])
            .is_err());
    }
}
