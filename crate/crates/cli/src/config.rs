//! Flat `key = value` config files and flag/config/default resolution.

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

/// Keys are compared after mapping `_` to `-`, so `n_total` and `n-total`
/// name the same setting.
pub fn normalize_key(key: &str) -> String {
    key.trim().replace('_', "-")
}

/// Parses `key = value` lines. `#` starts a comment; blank lines are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("config line {}: expected key = value, got '{raw}'", lineno + 1);
        };
        let key = normalize_key(key);
        if key.is_empty() {
            bail!("config line {}: empty key", lineno + 1);
        }
        if out.insert(key.clone(), value.trim().to_string()).is_some() {
            bail!("config line {}: duplicate key '{key}'", lineno + 1);
        }
    }
    Ok(out)
}

pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in config {}", path.display()))
}

/// Resolves each setting as flag, else config entry, else default, and
/// records the outcome so it can be written next to every output.
pub struct Resolver {
    file: BTreeMap<String, String>,
    used: BTreeSet<String>,
    resolved: Map<String, Value>,
}

impl Resolver {
    pub fn new(file: BTreeMap<String, String>, command: &str) -> Self {
        let mut resolved = Map::new();
        resolved.insert("command".into(), Value::from(command));
        resolved.insert("version".into(), Value::from(env!("CARGO_PKG_VERSION")));
        Self {
            file,
            used: BTreeSet::new(),
            resolved,
        }
    }

    fn lookup<T>(&mut self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.used.insert(key.to_string());
        match self.file.get(key) {
            None => Ok(None),
            Some(text) => match text.parse::<T>() {
                Ok(v) => Ok(Some(v)),
                Err(e) => bail!("config key '{key}': cannot parse '{text}': {e}"),
            },
        }
    }

    fn record<T: Serialize>(&mut self, key: &str, value: &T) -> Result<()> {
        let v = serde_json::to_value(value).with_context(|| format!("recording '{key}'"))?;
        self.resolved.insert(key.to_string(), v);
        Ok(())
    }

    pub fn value<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + Serialize,
        T::Err: Display,
    {
        let from_file = self.lookup(key)?;
        let v = flag.or(from_file).unwrap_or(default);
        self.record(key, &v)?;
        Ok(v)
    }

    /// A setting without a default; recorded as `null` when absent.
    pub fn optional<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr + Serialize,
        T::Err: Display,
    {
        let from_file = self.lookup(key)?;
        let v = flag.or(from_file);
        self.record(key, &v)?;
        Ok(v)
    }

    pub fn required<T>(&mut self, key: &str, flag: Option<T>) -> Result<T>
    where
        T: FromStr + Serialize,
        T::Err: Display,
    {
        match self.optional(key, flag)? {
            Some(v) => Ok(v),
            None => bail!("missing required setting '{key}' (flag --{key} or config key)"),
        }
    }

    /// Boolean switches: a present flag means true.
    pub fn switch(&mut self, key: &str, flag: bool, default: bool) -> Result<bool> {
        self.value(key, flag.then_some(true), default)
    }

    /// Marks a key as consumed without recording it (settings that do not
    /// affect output content, like the output directory).
    pub fn consume(&mut self, key: &str) -> Option<String> {
        self.used.insert(key.to_string());
        self.file.get(key).cloned()
    }

    /// Logs config keys that no setting asked for and returns the record.
    pub fn finish(self) -> Value {
        for key in self.file.keys().filter(|k| !self.used.contains(*k)) {
            log::warn!("config key '{key}' is not used by '{}'", self.resolved["command"]);
        }
        Value::Object(self.resolved)
    }
}

/// Renders a resolved record back into config-file syntax.
pub fn to_config_text(resolved: &Value) -> String {
    let mut out = String::new();
    if let Value::Object(map) = resolved {
        for (k, v) in map {
            let scalar = !(v.is_null() || v.is_array() || v.is_object());
            if matches!(k.as_str(), "command" | "version") || !scalar {
                continue;
            }
            let text = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("{k} = {text}\n"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_underscores() {
        let c = parse_config("# header\nn_total = 40\n\nsigma=0.1 # inline\n").unwrap();
        assert_eq!(c["n-total"], "40");
        assert_eq!(c["sigma"], "0.1");
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn rejects_malformed_and_duplicate_lines() {
        assert!(parse_config("sigma 0.1").is_err());
        assert!(parse_config("a=1\na=2").is_err());
        assert!(parse_config(" = 3").is_err());
    }

    #[test]
    fn flag_beats_file_beats_default() {
        let file = parse_config("sigma = 0.1\nseed = 4").unwrap();
        let mut r = Resolver::new(file, "kernel");
        assert_eq!(r.value("sigma", Some(0.2), 0.08).unwrap(), 0.2);
        assert_eq!(r.value("seed", None, 1u64).unwrap(), 4);
        assert_eq!(r.value("paths", None, 3000usize).unwrap(), 3000);
        let v = r.finish();
        assert_eq!(v["sigma"], 0.2);
        assert_eq!(v["seed"], 4);
        assert_eq!(v["paths"], 3000);
    }

    #[test]
    fn bad_file_value_is_an_error() {
        let mut r = Resolver::new(parse_config("seed = many").unwrap(), "kernel");
        assert!(r.value("seed", None, 1u64).is_err());
    }

    #[test]
    fn record_round_trips_through_config_text() {
        let mut r = Resolver::new(BTreeMap::new(), "kernel");
        r.value("sigma", None, 0.08).unwrap();
        r.value("mode", None, "half".to_string()).unwrap();
        r.switch("reflection", false, false).unwrap();
        r.optional::<String>("contours", None).unwrap();
        let first = r.finish();
        let text = to_config_text(&first);
        let mut again = Resolver::new(parse_config(&text).unwrap(), "kernel");
        again.value("sigma", None, 1.0).unwrap();
        again.value("mode", None, String::new()).unwrap();
        again.switch("reflection", false, true).unwrap();
        again.optional::<String>("contours", None).unwrap();
        assert_eq!(again.finish(), first);
    }
}
