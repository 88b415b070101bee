use serde_json::json;
use specdisc_core::densesys::{cantor_cylinder, product_combine, verify_system, DenseSystem, Sampler};
use specdisc_core::geometry::{rat_to_f64, Rat};

use super::positive_count;
use crate::config::Params;
use crate::error::Result;
use crate::report::{to_value, Report, Table};

/// `p/q`, an integer, or a finite decimal, read exactly.
fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let (p, q): (i128, i128) = (p.trim().parse().ok()?, q.trim().parse().ok()?);
        return (q != 0).then(|| Rat::new(p, q));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 18 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let den = 10i128.pow(frac.len() as u32);
    let digits: i128 = format!("{int}{frac}").parse().ok()?;
    Some(Rat::new(digits, den))
}

pub fn run(params: &Params, seed: u64) -> Result<Report> {
    let kind = params.choice("system", &["cantor", "cylinder", "product"], "cantor")?;
    let default_levels = if kind == "product" { "8" } else { "12" };
    let levels: u32 = params.parse("levels", default_levels)?;
    let bad_levels = |e: specdisc_core::Error| params.error("levels", e.to_string());
    let mut system = match kind.as_str() {
        "cantor" => DenseSystem::cantor(levels).map_err(bad_levels)?,
        "cylinder" => {
            let d = super::dim(params, "2")?;
            cantor_cylinder(d, levels, &vec![0; d]).map_err(bad_levels)?
        }
        _ => {
            let c = DenseSystem::cantor(levels).map_err(bad_levels)?;
            product_combine(&[c.clone(), c])?
        }
    };
    if let Some(raw) = params.optional("theta") {
        let theta =
            parse_rat(&raw).ok_or_else(|| params.error("theta", format!("expected p/q or a decimal, got `{raw}`")))?;
        system = DenseSystem::new(system.m, theta, system.ambient, system.levels)
            .map_err(|e| params.error("theta", e.to_string()))?;
    }
    let sampler = Sampler {
        seed,
        random: params.parse("samples", "10000")?,
        structured_levels: params.parse("structured-levels", "6")?,
        bits: positive_count(params, "bits", "16")? as u32,
        ..Sampler::default()
    };
    let rep = verify_system(&system, &sampler)?;
    let mut table = Table::new("failures", &["center", "radius", "level_bound"]);
    for f in &rep.failures {
        table.push(vec![
            format!("{:?}", f.center).into(),
            f.radius.into(),
            f.level_bound.into(),
        ]);
    }
    let mut report = Report::new("dense-verify");
    report.results = json!({
        "system": {
            "kind": kind,
            "dim": system.dim(),
            "m": system.m,
            "theta": rat_to_f64(&system.theta),
            "levels": system.depth(),
        },
        "sampler": to_value(&sampler),
        "report": to_value(&rep),
    });
    report.checks.insert("no_failures".into(), rep.failed == 0);
    report.tables.push(table);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_parse_exactly() {
        assert_eq!(parse_rat("1/9"), Some(Rat::new(1, 9)));
        assert_eq!(parse_rat("0.125"), Some(Rat::new(1, 8)));
        assert_eq!(parse_rat("2"), Some(Rat::from_integer(2)));
        assert_eq!(parse_rat("1/0"), None);
        assert_eq!(parse_rat("0.1e3"), None);
    }
}
