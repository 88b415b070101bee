mod conditions;
mod dense;
mod measure;
mod polyhedron;
mod potential;
mod spectral;

use std::path::Path;

use specdisc_core::geometry::GammaRule;
use specdisc_core::measure::WeightedSpace;
use specdisc_core::potentials::{Alpha, NRule, ValphaPotential};
use specdisc_core::rearrange::ScalarField;

use crate::args::Command;
use crate::config::{parse_number, Params};
use crate::error::{CliError, Result};
use crate::report::Report;

/// Runs one experiment subcommand. `golden` is handled by the caller.
pub fn run(cmd: &Command, params: &Params, seed: u64) -> Result<Report> {
    match cmd {
        Command::Rearrange(_) => measure::rearrange(params),
        Command::Optcover(_) => measure::optcover(params),
        Command::Polyhedron(_) => polyhedron::run(params, seed),
        Command::DenseVerify(_) => dense::run(params, seed),
        Command::Potential(_) => potential::run(params),
        Command::Conditions(_) => conditions::run(params),
        Command::Spectral(_) => spectral::run(params, seed),
        Command::Golden { .. } => unreachable!("golden is dispatched separately"),
    }
}

fn read_json(path: &Path) -> Result<serde_json::Value> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Space from `space` and field from `field`, or from the atom values when `field` is absent.
fn space_and_field(params: &Params) -> Result<(WeightedSpace, ScalarField)> {
    let space_path = params.required("space")?;
    let path = Path::new(&space_path);
    let space: WeightedSpace = serde_json::from_value(read_json(path)?).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let field = match params.optional("field") {
        Some(f) => {
            let fp = Path::new(&f);
            let values: Vec<f64> = serde_json::from_value(read_json(fp)?).map_err(|e| CliError::Input {
                path: fp.to_path_buf(),
                message: format!("expected an array of numbers: {e}"),
            })?;
            ScalarField::new(values)?
        }
        None => ScalarField::from_slots(&space)?,
    };
    Ok((space, field))
}

fn alpha(params: &Params, default: &str) -> Result<Alpha> {
    let raw = params.string("alpha", default);
    let bad = |m: String| params.error("alpha", m);
    let a = match raw.split_once('/') {
        Some((p, q)) => {
            let p: u32 = p.trim().parse().map_err(|_| bad(format!("bad fraction `{raw}`")))?;
            let q: u32 = q.trim().parse().map_err(|_| bad(format!("bad fraction `{raw}`")))?;
            Alpha::rational(p, q)
        }
        None => Alpha::new(parse_number(&raw).ok_or_else(|| bad(format!("expected a number, got `{raw}`")))?),
    };
    a.map_err(|e| bad(e.to_string()))
}

fn n_rule(params: &Params) -> Result<NRule> {
    let raw = params.string("n-rule", "linear");
    let rule = match raw.as_str() {
        "log" => NRule::Log,
        "sqrt" => NRule::Sqrt,
        "linear" => NRule::Linear,
        "one-plus-linear" => NRule::OnePlusLinear,
        s => {
            let table = s
                .strip_prefix("table:")
                .or_else(|| s.strip_prefix("custom-table:"))
                .ok_or_else(|| params.error("n-rule", format!("unknown rule `{s}`")))?;
            let v: Option<Vec<f64>> = table.split(',').map(|x| parse_number(x.trim())).collect();
            NRule::Table(v.ok_or_else(|| params.error("n-rule", format!("bad table `{table}`")))?)
        }
    };
    rule.validate().map_err(|e| params.error("n-rule", e.to_string()))?;
    Ok(rule)
}

fn dim(params: &Params, default: &str) -> Result<usize> {
    let d: usize = params.parse("dim", default)?;
    if d == 0 {
        return Err(params.error("dim", "must be positive"));
    }
    Ok(d)
}

fn valpha(params: &Params, alpha_default: &str) -> Result<ValphaPotential> {
    let d = dim(params, "3")?;
    Ok(ValphaPotential::new(d, alpha(params, alpha_default)?, n_rule(params)?)?)
}

/// `power:e[:c]`, `power-log:e[:c]` or `const:c`.
fn gamma(params: &Params, default: &str) -> Result<GammaRule> {
    let raw = params.string("gamma", default);
    let bad = || {
        params.error(
            "gamma",
            format!("expected power:e[:c], power-log:e[:c] or const:c, got `{raw}`"),
        )
    };
    let parts: Vec<&str> = raw.split(':').collect();
    let num = |s: &str| parse_number(s).ok_or_else(bad);
    let coeff = |i: usize| parts.get(i).map(|s| num(s)).unwrap_or(Ok(1.0));
    match parts.as_slice() {
        ["const", c] => Ok(GammaRule::Power {
            coeff: num(c)?,
            exponent: 0.0,
        }),
        ["power", e] | ["power", e, _] => Ok(GammaRule::Power {
            coeff: coeff(2)?,
            exponent: num(e)?,
        }),
        ["power-log", e] | ["power-log", e, _] => Ok(GammaRule::PowerLog {
            coeff: coeff(2)?,
            exponent: num(e)?,
        }),
        _ => Err(bad()),
    }
}

/// A potential given by name.
enum Potential {
    Valpha(ValphaPotential),
    Const(f64),
    Quadratic,
}

impl Potential {
    fn parse(params: &Params, alpha_default: &str) -> Result<Self> {
        let raw = params.string("potential", "valpha");
        match raw.as_str() {
            "valpha" => Ok(Potential::Valpha(valpha(params, alpha_default)?)),
            "zero" => Ok(Potential::Const(0.0)),
            "quadratic" => Ok(Potential::Quadratic),
            s => match s.strip_prefix("const:").and_then(parse_number) {
                Some(c) if c >= 0.0 => Ok(Potential::Const(c)),
                _ => Err(params.error(
                    "potential",
                    format!("expected valpha, zero, const:c or quadratic, got `{s}`"),
                )),
            },
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            // Points handed in by the grids are finite, so evaluation cannot fail.
            Potential::Valpha(p) => p.eval(x).unwrap_or(f64::NAN),
            Potential::Const(c) => *c,
            Potential::Quadratic => x.iter().map(|v| v * v).sum(),
        }
    }
}

fn positive_count(params: &Params, key: &str, default: &str) -> Result<usize> {
    let v: usize = params.parse(key, default)?;
    if v == 0 {
        return Err(params.error(key, "must be positive"));
    }
    Ok(v)
}
