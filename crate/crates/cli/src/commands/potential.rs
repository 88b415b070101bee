use serde_json::json;
use specdisc_core::potentials::{cube_index, leftmost_cell, positivity_fraction_on_cell};

use super::valpha;
use crate::config::{parse_number, Params};
use crate::error::Result;
use crate::report::{to_value, Report, Table};

fn parse_point(s: &str) -> Option<Vec<f64>> {
    s.split(',').map(|v| parse_number(v.trim())).collect()
}

pub fn run(params: &Params) -> Result<Report> {
    let pot = valpha(params, "1")?;
    let d = pot.dim;
    let mut report = Report::new("potential");
    let mut results = json!({ "potential": to_value(&pot) });

    if let Some(raw) = params.optional("eval") {
        let mut table = Table::new("eval", &["point", "cube", "value"]);
        for chunk in raw.split(';').map(str::trim).filter(|c| !c.is_empty()) {
            let x = parse_point(chunk)
                .filter(|x| x.len() == d)
                .ok_or_else(|| params.error("eval", format!("expected {d} comma-separated numbers, got `{chunk}`")))?;
            let v = pot.eval(&x).map_err(|e| params.error("eval", e.to_string()))?;
            table.push(vec![
                format!("{x:?}").into(),
                format!("{:?}", cube_index(&x)).into(),
                v.into(),
            ]);
        }
        report.tables.push(table);
    }

    if let Some(raw) = params.optional("cell") {
        let bad = || params.error("cell", format!("expected `l1,...,l{d} j n`, got `{raw}`"));
        let parts: Vec<&str> = raw.split([' ', ';']).filter(|s| !s.is_empty()).collect();
        let [l, j, n] = parts.as_slice() else {
            return Err(bad());
        };
        let l: Vec<i64> = l
            .split(',')
            .map(|v| v.trim().parse().ok())
            .collect::<Option<Vec<_>>>()
            .filter(|l| l.len() == d)
            .ok_or_else(bad)?;
        let (j, n): (u32, u32) = (j.parse().map_err(|_| bad())?, n.parse().map_err(|_| bad())?);
        let cell = leftmost_cell(&l, j, n).map_err(|e| params.error("cell", e.to_string()))?;
        results["cell"] = json!({ "l": l, "j": j, "n": n, "box": to_value(&cell.to_box()) });
        if params.flag("fraction")? {
            let f = positivity_fraction_on_cell(&pot, &cell, &l).map_err(|e| params.error("cell", e.to_string()))?;
            let mut table = Table::new(
                "fraction",
                &["level", "cell_level", "analytic", "measured", "exact", "agree"],
            );
            table.push(vec![
                f.level.into(),
                f.cell_level.into(),
                f.analytic.into(),
                f.measured.into(),
                f.exact.into(),
                f.agree.into(),
            ]);
            report.checks.insert("fraction_agrees".into(), f.agree);
            results["fraction"] = to_value(&f);
            report.tables.push(table);
        }
    }

    if report.tables.is_empty() && !params.is_set("cell") {
        return Err(params.error("eval", "give --eval points or a --cell"));
    }
    report.results = results;
    Ok(report)
}
