//! Key-value configuration files.
//!
//! Plain text, one `key = value` per line, `#` comments. Keys mirror the
//! long flag names (`metric`, `part`, `fraction`, `seq-len`, ...); a flag
//! given on the command line always overrides the file value.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        if !path.exists() {
            return Err(CliError::usage(format!(
                "config file not found: {}",
                path.display()
            )));
        }
        let text = std::fs::read_to_string(path)?;
        let mut values = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::usage(format!(
                    "{}:{}: expected `key = value`, got {line:?}",
                    path.display(),
                    lineno + 1
                )));
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Config { values })
    }

    fn parse_value<T>(&self, key: &str, raw: &str) -> CliResult<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        raw.parse().map_err(|e| {
            CliError::usage(format!("invalid value {raw:?} for `{key}`: {e}"))
        })
    }

    /// Flag value, else config value, else default.
    pub fn get<T>(&self, key: &str, flag: Option<T>, default: T) -> CliResult<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.values.get(key) {
            Some(raw) => self.parse_value(key, raw),
            None => Ok(default),
        }
    }

    /// Flag value, else config value, else None.
    pub fn get_opt<T>(&self, key: &str, flag: Option<T>) -> CliResult<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            Some(raw) => Ok(Some(self.parse_value(key, raw)?)),
            None => Ok(None),
        }
    }

    /// A flag value, else config value, else None — for values that must be
    /// parsed later (kept as strings so exactness is preserved).
    pub fn get_string(&self, key: &str, flag: Option<String>) -> Option<String> {
        flag.or_else(|| self.values.get(key).cloned())
    }

    /// Boolean switch: true when the flag is present, else the config value,
    /// else `default`.
    pub fn get_switch(&self, key: &str, switch: bool, default: bool) -> CliResult<bool> {
        if switch {
            return Ok(true);
        }
        self.get(key, None, default)
    }

    /// All `hyperparameter.<name>` entries.
    pub fn hyperparameters(&self) -> BTreeMap<String, String> {
        self.values
            .iter()
            .filter_map(|(k, v)| {
                k.strip_prefix("hyperparameter.")
                    .map(|name| (name.to_string(), v.clone()))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn config_from(text: &str) -> Config {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(text.as_bytes()).unwrap();
        Config::load(Some(file.path())).unwrap()
    }

    #[test]
    fn parses_and_merges() {
        let config = config_from("# comment\nmetric = sjr\nseq-len = 128\n\nfraction=0.25\n");
        assert_eq!(
            config.get::<String>("metric", None, "h-index".into()).unwrap(),
            "sjr"
        );
        assert_eq!(config.get::<u32>("seq-len", Some(64), 512).unwrap(), 64);
        assert_eq!(config.get::<u32>("seq-len", None, 512).unwrap(), 128);
        assert_eq!(config.get::<u32>("batch-size", None, 8192).unwrap(), 8192);
        assert_eq!(config.get_string("fraction", None).as_deref(), Some("0.25"));
    }

    #[test]
    fn switch_semantics() {
        let config = config_from("drop-unscored = true\n");
        assert!(config.get_switch("drop-unscored", false, false).unwrap());
        assert!(config.get_switch("pad-final", true, false).unwrap());
        assert!(!config.get_switch("pad-final", false, false).unwrap());
    }

    #[test]
    fn bad_lines_and_missing_files_are_usage_errors() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(b"just a line\n").unwrap();
        let err = Config::load(Some(file.path())).unwrap_err();
        assert_eq!(err.exit_code(), 1);

        let err = Config::load(Some(Path::new("/no/such/file.conf"))).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.message().contains("/no/such/file.conf"));
    }

    #[test]
    fn hyperparameter_prefix() {
        let config = config_from("hyperparameter.adam_beta1 = 0.9\nhyperparameter.dropout = 0.1\n");
        let hp = config.hyperparameters();
        assert_eq!(hp.len(), 2);
        assert_eq!(hp["adam_beta1"], "0.9");
    }
}
