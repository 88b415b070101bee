//! Tolerance-aware comparison of a JSON report against a stored golden copy.
//!
//! Numbers match when `|a − b| ≤ atol + rtol·|b|`, with `b` the golden value. Everything else
//! must be equal. The top-level `version` field is skipped so goldens survive releases.

use std::fmt;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerance {
    pub atol: f64,
    pub rtol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            atol: 1e-12,
            rtol: 1e-9,
        }
    }
}

impl Tolerance {
    pub fn accepts(&self, got: f64, expected: f64) -> bool {
        got == expected || (got - expected).abs() <= self.atol + self.rtol * expected.abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiffKind {
    Number { got: f64, expected: f64, abs_diff: f64 },
    Value { got: Value, expected: Value },
    Missing { expected: Value },
    Unexpected { got: Value },
    Length { got: usize, expected: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diff {
    /// Location such as `results.rows[3].value`.
    pub path: String,
    #[serde(flatten)]
    pub kind: DiffKind,
}

impl fmt::Display for Diff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = if self.path.is_empty() { "<root>" } else { &self.path };
        match &self.kind {
            DiffKind::Number {
                got,
                expected,
                abs_diff,
            } => {
                write!(f, "{p}: got {got}, expected {expected} (|diff| = {abs_diff:e})")
            }
            DiffKind::Value { got, expected } => write!(f, "{p}: got {got}, expected {expected}"),
            DiffKind::Missing { expected } => write!(f, "{p}: missing, expected {expected}"),
            DiffKind::Unexpected { got } => write!(f, "{p}: not in golden, got {got}"),
            DiffKind::Length { got, expected } => write!(f, "{p}: length {got}, expected {expected}"),
        }
    }
}

pub fn golden_compare(report: &Value, golden: &Value, tol: Tolerance) -> Vec<Diff> {
    let mut out = Vec::new();
    walk("", report, golden, tol, &mut out);
    out
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn walk(path: &str, got: &Value, expected: &Value, tol: Tolerance, out: &mut Vec<Diff>) {
    match (got, expected) {
        (Value::Number(a), Value::Number(b)) => {
            let (a, b) = (a.as_f64().unwrap_or(f64::NAN), b.as_f64().unwrap_or(f64::NAN));
            if !tol.accepts(a, b) {
                out.push(Diff {
                    path: path.to_string(),
                    kind: DiffKind::Number {
                        got: a,
                        expected: b,
                        abs_diff: (a - b).abs(),
                    },
                });
            }
        }
        (Value::Object(a), Value::Object(b)) => {
            for (k, vb) in b {
                if path.is_empty() && k == "version" {
                    continue;
                }
                match a.get(k) {
                    Some(va) => walk(&join(path, k), va, vb, tol, out),
                    None => out.push(Diff {
                        path: join(path, k),
                        kind: DiffKind::Missing { expected: vb.clone() },
                    }),
                }
            }
            for (k, va) in a {
                if !b.contains_key(k) && !(path.is_empty() && k == "version") {
                    out.push(Diff {
                        path: join(path, k),
                        kind: DiffKind::Unexpected { got: va.clone() },
                    });
                }
            }
        }
        (Value::Array(a), Value::Array(b)) => {
            if a.len() != b.len() {
                out.push(Diff {
                    path: path.to_string(),
                    kind: DiffKind::Length {
                        got: a.len(),
                        expected: b.len(),
                    },
                });
            }
            for (i, (va, vb)) in a.iter().zip(b).enumerate() {
                walk(&format!("{path}[{i}]"), va, vb, tol, out);
            }
        }
        (a, b) if a == b => {}
        (a, b) => out.push(Diff {
            path: path.to_string(),
            kind: DiffKind::Value {
                got: a.clone(),
                expected: b.clone(),
            },
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn locates_differences() {
        let golden = json!({"version": "0.0.1", "results": {"rows": [1.0, 2.0, {"v": 3.0}], "name": "a"}});
        let report = json!({"version": "9", "results": {"rows": [1.0, 2.5, {"v": 3.0 + 1e-13}], "name": "a", "x": 1}});
        let diffs = golden_compare(&report, &golden, Tolerance::default());
        let paths: Vec<&str> = diffs.iter().map(|d| d.path.as_str()).collect();
        assert_eq!(paths, vec!["results.rows[1]", "results.x"]);
    }

    #[test]
    fn rule_is_relative_to_golden() {
        let tol = Tolerance { atol: 0.0, rtol: 0.1 };
        assert!(tol.accepts(10.9, 10.0));
        assert!(!tol.accepts(10.0, 9.0));
    }
}
