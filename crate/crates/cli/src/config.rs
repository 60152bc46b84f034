//! Flat `key = value` config files with `[section]` headers.
//!
//! Keys before the first header are global. A subcommand reads its own
//! section and falls back to the global keys. Keys are the long flag names;
//! underscores are accepted in place of dashes.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigFile {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('_', "-")
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            let bad = |why: &str| CliError::Usage(format!("config line {}: {why}", i + 1));
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| bad("unterminated section header"))?
                    .trim();
                if name.is_empty() {
                    return Err(bad("empty section name"));
                }
                current = name.to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad("expected key = value"))?;
            let key = normalize(key);
            if key.is_empty() {
                return Err(bad("empty key"));
            }
            let value = value.trim();
            let value = value
                .strip_prefix('"')
                .and_then(|v| v.strip_suffix('"'))
                .unwrap_or(value);
            if sections
                .entry(current.clone())
                .or_default()
                .insert(key.clone(), value.to_string())
                .is_some()
            {
                return Err(bad(&format!("duplicate key '{key}'")));
            }
        }
        Ok(ConfigFile { sections })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn raw(&self, section: &str, key: &str) -> Option<&str> {
        let key = normalize(key);
        self.sections
            .get(section)
            .and_then(|s| s.get(&key))
            .or_else(|| self.sections.get("").and_then(|s| s.get(&key)))
            .map(String::as_str)
    }

    /// Rejects keys in `section` outside `allowed`. Global keys only need to
    /// be in `global`, since they may belong to another subcommand.
    pub fn check_keys(
        &self,
        section: &str,
        allowed: &[&str],
        global: &[&str],
    ) -> Result<(), CliError> {
        for (name, ok) in [("", global), (section, allowed)] {
            if let Some(keys) = self.sections.get(name) {
                if let Some(k) = keys.keys().find(|k| !ok.contains(&k.as_str())) {
                    let place = if name.is_empty() { "global" } else { name };
                    return Err(CliError::Usage(format!(
                        "unknown config key '{k}' in {place} section"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Command-line value first, then the config file.
pub struct Settings<'a> {
    pub file: Option<&'a ConfigFile>,
    pub section: &'static str,
}

impl Settings<'_> {
    pub fn get<T>(&self, cli: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        if cli.is_some() {
            return Ok(cli);
        }
        match self.file.and_then(|f| f.raw(self.section, key)) {
            None => Ok(None),
            Some(text) => text
                .parse::<T>()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key '{key}': {e}"))),
        }
    }

    pub fn or<T>(&self, cli: Option<T>, key: &str, default: T) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        Ok(self.get(cli, key)?.unwrap_or(default))
    }
}
