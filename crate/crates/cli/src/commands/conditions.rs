use serde_json::json;
use specdisc_core::conditions::{
    cond_gmd, cond_thm313, cond_thm35, cond_thm36, sandwich_per_center, verify_example54, verify_example55, CellField,
    ConditionTrace, DomainFamily, Example54Options, TraceOptions,
};
use specdisc_core::densesys::cantor_cylinder;

use super::{alpha, dim, gamma, n_rule, positive_count, valpha, Potential};
use crate::config::Params;
use crate::error::Result;
use crate::report::{to_value, Report, Table};

const TRACE_COLUMNS: [&str; 3] = ["index", "value", "verdict"];

pub fn run(params: &Params) -> Result<Report> {
    let which = params.choice("which", &["thm35", "thm36", "thm313", "gmd", "ex54", "ex55"], "ex54")?;
    let mut report = Report::new("conditions");
    match which.as_str() {
        "thm35" | "thm36" => center_trace(params, &which, &mut report)?,
        "thm313" => thm313(params, &mut report)?,
        "gmd" => gmd(params, &mut report)?,
        "ex54" => ex54(params, &mut report)?,
        _ => ex55(params, &mut report)?,
    }
    Ok(report)
}

fn axis_point(d: usize, first: f64, rest: f64) -> Vec<f64> {
    let mut y = vec![rest; d];
    y[0] = first;
    y
}

fn centers(params: &Params, d: usize) -> Result<Vec<Vec<f64>>> {
    Ok(params
        .int_list("centers", "2..10")?
        .into_iter()
        .map(|k| axis_point(d, k as f64 + 0.5, 0.5))
        .collect())
}

fn trace_options(params: &Params) -> Result<TraceOptions> {
    let family = match params
        .choice("family", &["cube", "inscribed-cube", "ball"], "cube")?
        .as_str()
    {
        "cube" => DomainFamily::Cube,
        "inscribed-cube" => DomainFamily::InscribedCube,
        _ => DomainFamily::Ball,
    };
    Ok(TraceOptions {
        family,
        resolution: positive_count(params, "resolution", "24")?,
        window: positive_count(params, "window", "4")?,
    })
}

/// Step direction of each trace value against the previous one.
fn step_labels(values: &[f64]) -> Vec<&'static str> {
    let tol = 1e-9;
    let mut out = vec!["start"];
    for p in values.windows(2) {
        let scale = p[0].abs().max(p[1].abs()).max(1.0);
        out.push(if (p[1] - p[0]).abs() <= tol * scale {
            "flat"
        } else if p[1] > p[0] {
            "up"
        } else {
            "down"
        });
    }
    out.truncate(values.len());
    out
}

fn record_trace(trace: &ConditionTrace, report: &mut Report) {
    let mut table = Table::new("trace", &TRACE_COLUMNS);
    let values = trace.values();
    for (p, step) in trace.points.iter().zip(step_labels(&values)) {
        table.push(vec![p.index.into(), p.value.into(), step.into()]);
    }
    report.verdicts.insert("diverging".into(), trace.verdict.diverging);
    report
        .verdicts
        .insert("nondecreasing".into(), trace.verdict.nondecreasing);
    report
        .verdicts
        .insert("strictly_increasing".into(), trace.verdict.strictly_increasing);
    report.results = json!({ "trace": to_value(trace) });
    report.tables.push(table);
}

fn center_trace(params: &Params, which: &str, report: &mut Report) -> Result<()> {
    let pot = Potential::parse(params, "1")?;
    let d = match &pot {
        Potential::Valpha(p) => p.dim,
        _ => dim(params, "3")?,
    };
    let centers = centers(params, d)?;
    let r = params.positive("r", "1/3")?;
    let opts = trace_options(params)?;
    let v = |x: &[f64]| pot.eval(x);
    let (rule, trace) = if which == "thm35" {
        let g = gamma(params, "const:0.05")?;
        let t = cond_thm35(&v, &g, &centers, r, &opts).map_err(|e| params.error("gamma", e.to_string()))?;
        (g, t)
    } else {
        let g = gamma(params, "power:1")?;
        let t = cond_thm36(&v, &g, &centers, r, &opts).map_err(|e| params.error("gamma", e.to_string()))?;
        (g, t)
    };
    record_trace(&trace, report);
    if params.is_set("theta") {
        let theta = params.number("theta", "2")?;
        let checks = sandwich_per_center(&v, &rule, theta, &centers, r, &opts)
            .map_err(|e| params.error("theta", e.to_string()))?;
        report.checks.insert("sandwich".into(), checks.iter().all(|c| c.ok));
        report.results["sandwich"] = to_value(&checks);
    }
    Ok(())
}

fn thm313(params: &Params, report: &mut Report) -> Result<()> {
    let pot = valpha(params, "1")?;
    let d = pot.dim;
    let n: u32 = params.parse("n", "1")?;
    if n == 0 {
        return Err(params.error("n", "cell level must be positive"));
    }
    let ls: Vec<Vec<i64>> = params
        .int_list("l", "4..9")?
        .into_iter()
        .map(|k| {
            let mut l = vec![0; d];
            l[0] = k;
            l
        })
        .collect();
    let g = gamma(params, "power:1")?;
    let window = positive_count(params, "window", "4")?;
    let systems = move |l: &[i64]| cantor_cylinder(d, n, l);
    let trace = cond_thm313(&CellField::Valpha(&pot), &systems, &g, 3, n, &ls, window)
        .map_err(|e| params.error("l", e.to_string()))?;
    record_trace(&trace, report);
    Ok(())
}

fn gmd(params: &Params, report: &mut Report) -> Result<()> {
    let pot = Potential::parse(params, "1")?;
    let d = match &pot {
        Potential::Valpha(p) => p.dim,
        _ => dim(params, "3")?,
    };
    let centers = centers(params, d)?;
    let r = params.positive("r", "1/3")?;
    let delta = params.positive("delta", "1/2")?;
    let c = params.positive("c", "1/10")?;
    let resolution = positive_count(params, "resolution", "24")?;
    let v = |x: &[f64]| pot.eval(x);
    let points = cond_gmd(&v, delta, c, r, &centers, resolution).map_err(|e| params.error("delta", e.to_string()))?;
    let mut table = Table::new("gmd", &TRACE_COLUMNS);
    let mut detail = Table::new(
        "gmd_detail",
        &[
            "index",
            "integral",
            "threshold",
            "superlevel_mass",
            "ratio",
            "fraction",
            "holds",
        ],
    );
    for p in &points {
        table.push(vec![p.index.into(), p.fraction.into(), p.holds.into()]);
        detail.push(vec![
            p.index.into(),
            p.integral.into(),
            p.threshold.into(),
            p.superlevel_mass.into(),
            p.ratio.into(),
            p.fraction.into(),
            p.holds.into(),
        ]);
    }
    report
        .verdicts
        .insert("holds_everywhere".into(), points.iter().all(|p| p.holds));
    report.results = json!({ "points": to_value(&points) });
    report.tables.push(table);
    report.tables.push(detail);
    Ok(())
}

fn ex54(params: &Params, report: &mut Report) -> Result<()> {
    let a = alpha(params, "1")?;
    let rule = n_rule(params)?;
    let levels = params.int_list("n", "1..6")?;
    let ls = params.int_list("l", "3..10")?;
    let to_u32 = |key: &str, v: &[i64]| -> Result<Vec<u32>> {
        v.iter()
            .map(|x| u32::try_from(*x).map_err(|_| params.error(key, format!("{x} is not a level"))))
            .collect()
    };
    let opts = Example54Options {
        dim: dim(params, "3")?,
        gmd_levels: to_u32("n", &levels)?,
        cell_level: params.parse("cell-level", "2")?,
        l_values: ls,
        delta: params.positive("delta", "1/2")?,
        c: params.positive("c", "1/10")?,
        tolerance: params.positive("tolerance", "1e-12")?,
    };
    let rep = verify_example54(a, rule, &opts).map_err(|e| params.error("l", e.to_string()))?;
    let mut table = Table::new("ex54", &TRACE_COLUMNS);
    let mut detail = Table::new(
        "ex54_gmd",
        &["n", "fraction", "expected", "abs_error", "exact", "holds"],
    );
    for g in &rep.gmd {
        table.push(vec![g.n.into(), g.fraction.into(), g.holds.into()]);
        detail.push(vec![
            g.n.into(),
            g.fraction.into(),
            g.expected.into(),
            g.abs_error.into(),
            g.exact.into(),
            g.holds.into(),
        ]);
    }
    let mut cells = Table::new("ex54_cell", &["l_inf", "value", "expected", "equal"]);
    for row in &rep.thm313 {
        cells.push(vec![
            row.l_inf.into(),
            row.value.into(),
            row.expected.into(),
            row.equal.into(),
        ]);
    }
    report.tolerances.insert("fraction".into(), opts.tolerance);
    report
        .verdicts
        .insert("gmd_strictly_decreasing".into(), rep.gmd_strictly_decreasing);
    report.checks.insert("example".into(), rep.ok);
    report.results = to_value(&rep);
    report.tables.extend([table, detail, cells]);
    Ok(())
}

fn ex55(params: &Params, report: &mut Report) -> Result<()> {
    let d = dim(params, "3")?;
    let a = alpha(params, "1")?;
    let rule = n_rule(params)?;
    let g = gamma(params, "power-log:2/3")?;
    let js: Vec<u32> = params
        .int_list("j", "1..12")?
        .into_iter()
        .map(|j| {
            u32::try_from(j)
                .ok()
                .filter(|j| *j > 0)
                .ok_or_else(|| params.error("j", format!("{j} is not a positive scale")))
        })
        .collect::<Result<_>>()?;
    let rep = verify_example55(d, a, rule, &g, &js).map_err(|e| params.error("alpha", e.to_string()))?;
    let mut table = Table::new("ex55", &TRACE_COLUMNS);
    let mut detail = Table::new(
        "ex55_rows",
        &[
            "j",
            "r",
            "level",
            "fraction",
            "gamma_hat",
            "rearrangement",
            "margin",
            "divergence_ratio",
            "estimate_holds",
        ],
    );
    for row in &rep.rows {
        table.push(vec![row.j.into(), row.rearrangement.into(), row.estimate_holds.into()]);
        detail.push(vec![
            row.j.into(),
            row.r.into(),
            row.level.into(),
            row.fraction.into(),
            row.gamma_hat.into(),
            row.rearrangement.into(),
            row.margin.into(),
            row.divergence_ratio.into(),
            row.estimate_holds.into(),
        ]);
    }
    report
        .verdicts
        .insert("ratio_strictly_increasing".into(), rep.ratio_strictly_increasing);
    report.checks.insert("example".into(), rep.ok);
    report.results = to_value(&rep);
    report.tables.extend([table, detail]);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::step_labels;

    #[test]
    fn steps() {
        assert_eq!(step_labels(&[1.0, 2.0, 2.0, 1.0]), vec!["start", "up", "flat", "down"]);
        assert!(step_labels(&[]).is_empty());
    }
}
