//! Key-value experiment configuration.
//!
//! A config file holds one `key = value` pair per line. Blank lines and lines starting with
//! `#` are ignored. Keys are the long flag names of the subcommand (`n-rule`, `out-dir`, ...);
//! underscores and upper case are accepted and normalized. Flags given on the command line
//! override the file. An optional `command = <name>` line pins the file to one subcommand.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{CliError, Result};

/// Keys accepted by every subcommand.
pub const GLOBAL_KEYS: &[&str] = &["seed", "threads", "out-dir", "format", "plot"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Flag,
    Default,
    File { path: PathBuf, line: usize },
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Flag => write!(f, "command line"),
            Origin::Default => write!(f, "default"),
            Origin::File { path, line } => write!(f, "{} line {line}", path.display()),
        }
    }
}

#[derive(Debug, Clone)]
struct Entry {
    raw: String,
    origin: Origin,
}

pub fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('_', "-")
}

/// One `key = value` line of a config file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigLine {
    pub key: String,
    pub value: String,
    pub line: usize,
}

pub fn parse_config_text(path: &Path, text: &str) -> Result<Vec<ConfigLine>> {
    let mut out: Vec<ConfigLine> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let syntax = |message: String| CliError::Syntax {
            path: path.to_path_buf(),
            line,
            message,
        };
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| syntax(format!("expected `key = value`, found `{s}`")))?;
        let key = normalize_key(k);
        let value = v.trim().to_string();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '-') {
            return Err(syntax(format!("bad key `{}`", k.trim())));
        }
        if value.is_empty() {
            return Err(CliError::Key {
                origin: Origin::File {
                    path: path.to_path_buf(),
                    line,
                },
                key,
                message: "empty value".into(),
            });
        }
        if let Some(prev) = out.iter().find(|e| e.key == key) {
            return Err(syntax(format!(
                "duplicate key `{key}` (first set on line {})",
                prev.line
            )));
        }
        out.push(ConfigLine { key, value, line });
    }
    Ok(out)
}

/// Resolved parameters of one run. Every value read is echoed into the report.
#[derive(Debug)]
pub struct Params {
    command: String,
    entries: BTreeMap<String, Entry>,
    echoed: RefCell<BTreeMap<String, String>>,
}

impl Params {
    /// Merges a config file (if any) with command-line values, checking every key against `schema`.
    pub fn resolve(
        command: &str,
        schema: &[&str],
        config: Option<&Path>,
        flags: Vec<(&str, Option<String>)>,
    ) -> Result<Self> {
        let mut entries = BTreeMap::new();
        if let Some(path) = config {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            for cl in parse_config_text(path, &text)? {
                let origin = Origin::File {
                    path: path.to_path_buf(),
                    line: cl.line,
                };
                if cl.key == "command" {
                    if cl.value != command {
                        return Err(CliError::Key {
                            origin,
                            key: cl.key,
                            message: format!("config is for `{}`, not `{command}`", cl.value),
                        });
                    }
                    continue;
                }
                if !schema.contains(&cl.key.as_str()) && !GLOBAL_KEYS.contains(&cl.key.as_str()) {
                    let mut known: Vec<&str> = schema.iter().chain(GLOBAL_KEYS).copied().collect();
                    known.sort_unstable();
                    return Err(CliError::Key {
                        origin,
                        key: cl.key,
                        message: format!("unknown key for `{command}`; expected one of {}", known.join(", ")),
                    });
                }
                entries.insert(cl.key, Entry { raw: cl.value, origin });
            }
        }
        for (key, value) in flags {
            if let Some(raw) = value {
                entries.insert(
                    normalize_key(key),
                    Entry {
                        raw,
                        origin: Origin::Flag,
                    },
                );
            }
        }
        Ok(Self {
            command: command.to_string(),
            entries,
            echoed: RefCell::new(BTreeMap::new()),
        })
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    pub fn echoed(&self) -> BTreeMap<String, String> {
        self.echoed.borrow().clone()
    }

    fn origin(&self, key: &str) -> Origin {
        self.entries
            .get(key)
            .map(|e| e.origin.clone())
            .unwrap_or(Origin::Default)
    }

    /// Error attributed to wherever `key` was set.
    pub fn error(&self, key: &str, message: impl Into<String>) -> CliError {
        CliError::Key {
            origin: self.origin(key),
            key: key.to_string(),
            message: message.into(),
        }
    }

    pub fn is_set(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn raw(&self, key: &str, default: Option<&str>) -> Option<String> {
        let v = self
            .entries
            .get(key)
            .map(|e| e.raw.clone())
            .or(default.map(String::from));
        if let Some(v) = &v {
            self.echoed.borrow_mut().insert(key.to_string(), v.clone());
        }
        v
    }

    /// Value of a setting that does not affect results, so it stays out of the report.
    pub fn setting(&self, key: &str) -> Option<String> {
        self.entries.get(key).map(|e| e.raw.clone())
    }

    pub fn string(&self, key: &str, default: &str) -> String {
        self.raw(key, Some(default)).unwrap_or_default()
    }

    pub fn optional(&self, key: &str) -> Option<String> {
        self.raw(key, None)
    }

    pub fn required(&self, key: &str) -> Result<String> {
        self.raw(key, None).ok_or_else(|| self.error(key, "required"))
    }

    pub fn parse<T: FromStr>(&self, key: &str, default: &str) -> Result<T> {
        let raw = self.string(key, default);
        raw.parse()
            .map_err(|_| self.error(key, format!("cannot parse `{raw}` as {}", short_type::<T>())))
    }

    pub fn number(&self, key: &str, default: &str) -> Result<f64> {
        let raw = self.string(key, default);
        parse_number(&raw).ok_or_else(|| self.error(key, format!("expected a number, got `{raw}`")))
    }

    pub fn required_number(&self, key: &str) -> Result<f64> {
        let raw = self.required(key)?;
        parse_number(&raw).ok_or_else(|| self.error(key, format!("expected a number, got `{raw}`")))
    }

    pub fn positive(&self, key: &str, default: &str) -> Result<f64> {
        let v = self.number(key, default)?;
        if v <= 0.0 || !v.is_finite() {
            return Err(self.error(key, format!("must be positive and finite, got {v}")));
        }
        Ok(v)
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        let raw = self.string(key, "false");
        match raw.as_str() {
            "true" | "yes" | "1" | "on" => Ok(true),
            "false" | "no" | "0" | "off" => Ok(false),
            _ => Err(self.error(key, format!("expected true or false, got `{raw}`"))),
        }
    }

    pub fn choice(&self, key: &str, options: &[&str], default: &str) -> Result<String> {
        let raw = self.string(key, default);
        if options.contains(&raw.as_str()) {
            Ok(raw)
        } else {
            Err(self.error(key, format!("expected one of {}, got `{raw}`", options.join("|"))))
        }
    }

    /// `a..b` (inclusive) or a comma list of integers; never empty.
    pub fn int_list(&self, key: &str, default: &str) -> Result<Vec<i64>> {
        let raw = self.string(key, default);
        let v = parse_int_list(&raw)
            .ok_or_else(|| self.error(key, format!("expected `a..b` or `a,b,...`, got `{raw}`")))?;
        if v.is_empty() {
            return Err(self.error(key, "range is empty"));
        }
        Ok(v)
    }

    pub fn number_list(&self, key: &str, default: Option<&str>) -> Result<Vec<f64>> {
        let raw = self.raw(key, default).ok_or_else(|| self.error(key, "required"))?;
        let v: Option<Vec<f64>> = raw.split(',').map(|s| parse_number(s.trim())).collect();
        match v {
            Some(v) if !v.is_empty() => Ok(v),
            _ => Err(self.error(key, format!("expected a comma-separated list of numbers, got `{raw}`"))),
        }
    }
}

fn short_type<T>() -> &'static str {
    let name = std::any::type_name::<T>();
    name.rsplit("::").next().unwrap_or(name)
}

/// A decimal number or a fraction `p/q`.
pub fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((p, q)) => p.trim().parse::<f64>().ok()? / q.trim().parse::<f64>().ok()?,
        None => s.parse::<f64>().ok()?,
    };
    v.is_finite().then_some(v)
}

pub fn parse_int_list(s: &str) -> Option<Vec<i64>> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let a: i64 = a.trim().parse().ok()?;
        let b = b.trim();
        let b: i64 = match b.strip_prefix('=') {
            Some(rest) => rest.trim().parse().ok()?,
            None => b.parse().ok()?,
        };
        return Some((a..=b).collect());
    }
    s.split(',').map(|p| p.trim().parse().ok()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lines_and_reports_positions() {
        let p = Path::new("x.cfg");
        let ok = parse_config_text(p, "# c\n\nalpha = 1\nN_rule= log\n").unwrap();
        assert_eq!(ok[1].key, "n-rule");
        assert_eq!(ok[1].line, 4);
        let err = parse_config_text(p, "alpha = 1\nbroken line\n").unwrap_err();
        assert!(err.to_string().contains("x.cfg:2"), "{err}");
        let err = parse_config_text(p, "a = 1\na = 2\n").unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn ranges_and_fractions() {
        assert_eq!(parse_int_list("1..4"), Some(vec![1, 2, 3, 4]));
        assert_eq!(parse_int_list("1..=2"), Some(vec![1, 2]));
        assert_eq!(parse_int_list("3, 5"), Some(vec![3, 5]));
        assert_eq!(parse_int_list("3..x"), None);
        assert_eq!(parse_number("1/3"), Some(1.0 / 3.0));
        assert_eq!(parse_number("1/0"), None);
    }
}
