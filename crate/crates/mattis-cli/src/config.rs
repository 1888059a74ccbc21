//! Flat `key = value` config files merged with command-line flags.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use crate::CliError;

/// Raw settings; flags are inserted after the file so they win.
#[derive(Debug, Default, Clone)]
pub struct Settings {
    raw: BTreeMap<String, String>,
    /// Resolved values in the order they were requested, echoed as metadata.
    resolved: Vec<(String, String)>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('_', "-").to_ascii_lowercase()
}

impl Settings {
    pub fn parse_file(text: &str, allowed: &[&str]) -> Result<Self, CliError> {
        let mut s = Settings::default();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::Input(format!("config line {}: expected key = value", no + 1)));
            };
            let key = normalize(k);
            if !allowed.contains(&key.as_str()) {
                return Err(CliError::Input(format!("config line {}: unknown key {key:?}", no + 1)));
            }
            s.raw.insert(key, v.trim().to_string());
        }
        Ok(s)
    }

    pub fn set(&mut self, key: &str, value: Option<&String>) {
        if let Some(v) = value {
            self.raw.insert(normalize(key), v.trim().to_string());
        }
    }

    pub fn get<T>(&mut self, key: &str, default: T) -> Result<T, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = match self.raw.get(key) {
            Some(s) => s
                .parse::<T>()
                .map_err(|e| CliError::Input(format!("--{key}: {e}")))?,
            None => default,
        };
        self.resolved.push((key.to_string(), v.to_string()));
        Ok(v)
    }

    pub fn get_opt<T>(&mut self, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        match self.raw.get(key) {
            Some(s) => {
                let v = s.parse::<T>().map_err(|e| CliError::Input(format!("--{key}: {e}")))?;
                self.resolved.push((key.to_string(), v.to_string()));
                Ok(Some(v))
            }
            None => Ok(None),
        }
    }

    /// Comma-separated list.
    pub fn get_list<T>(&mut self, key: &str, default: &[T]) -> Result<Vec<T>, CliError>
    where
        T: FromStr + Display + Clone,
        T::Err: Display,
    {
        let v = match self.raw.get(key) {
            Some(s) => s
                .split(',')
                .filter(|p| !p.trim().is_empty())
                .map(|p| p.trim().parse::<T>().map_err(|e| CliError::Input(format!("--{key}: {e}"))))
                .collect::<Result<Vec<T>, _>>()?,
            None => default.to_vec(),
        };
        let shown: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        self.resolved.push((key.to_string(), shown.join(",")));
        Ok(v)
    }

    pub fn resolved(&self) -> &[(String, String)] {
        &self.resolved
    }
}
