//! `key = value` configuration files. Command-line flags take precedence.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::UsageError;

pub const KEYS: [&str; 16] = [
    "degree",
    "n",
    "seed",
    "samples",
    "starts",
    "threads",
    "format",
    "density",
    "radius",
    "knot",
    "pairing",
    "max_iter",
    "dir_seed",
    "numbered",
    "sphere_factorization",
    "out",
];

#[derive(Clone, Debug, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, UsageError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() || line.starts_with('[') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| UsageError(format!("config line {}: expected key = value", i + 1)))?;
            let key = key.trim().replace('-', "_");
            if !KEYS.contains(&key.as_str()) {
                return Err(UsageError(format!("config line {}: unknown key {key:?}", i + 1)));
            }
            let value = value.trim().trim_matches('"').to_string();
            values.insert(key, value);
        }
        Ok(Config { values })
    }

    pub fn load(path: &Path) -> Result<Config, UsageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        Config::parse(&text)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, UsageError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| UsageError(format!("config key {key}: cannot parse {v:?}"))),
        }
    }

    /// `flag`, else the config value, else `default`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, UsageError> {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.get(key)?.unwrap_or(default)),
        }
    }

    /// Boolean switches: set by the flag or by a true config value.
    pub fn switch(&self, flag: bool, key: &str) -> Result<bool, UsageError> {
        Ok(flag || self.get::<bool>(key)?.unwrap_or(false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let c = Config::parse("# run\nseed = 9\nsamples=500\nknot = \"trivial\"\n[extra]\n").unwrap();
        assert_eq!(c.pick(None, "seed", 0u64).unwrap(), 9);
        assert_eq!(c.pick(Some(3), "seed", 0u64).unwrap(), 3);
        assert_eq!(c.pick(None, "n", 3usize).unwrap(), 3);
        assert_eq!(c.get::<String>("knot").unwrap().as_deref(), Some("trivial"));
    }

    #[test]
    fn bad_lines_are_usage_errors() {
        assert!(Config::parse("seed 9").is_err());
        assert!(Config::parse("colour = red").is_err());
        assert!(Config::parse("seed = x").unwrap().get::<u64>("seed").is_err());
        assert!(Config::parse("max-iter = 5").unwrap().get::<usize>("max_iter").unwrap() == Some(5));
    }
}
