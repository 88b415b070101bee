use serde_json::json;
use specdisc_core::spectral::{axis_windows, bottom_trace, Discretization, EigenOptions, WindowPotential};

use super::{dim, positive_count, Potential};
use crate::config::Params;
use crate::error::Result;
use crate::report::{Report, Table};

pub fn run(params: &Params, seed: u64) -> Result<Report> {
    let pot = Potential::parse(params, "1/2")?;
    let d = match &pot {
        Potential::Valpha(p) => p.dim,
        _ => dim(params, "3")?,
    };
    let ks = params.int_list("windows", "2..8")?;
    let half = params.positive("half", "4")?;
    let nodes = positive_count(params, "nodes", "24")?;
    let k = positive_count(params, "k", "1")?;
    let mode = match params
        .choice("discretization", &["cell-average", "pointwise"], "cell-average")?
        .as_str()
    {
        "cell-average" => Discretization::CellAverage,
        _ => Discretization::Pointwise,
    };
    let opts = EigenOptions {
        tol: params.positive("tol", "1e-8")?,
        seed,
        ..EigenOptions::default()
    };
    let windows = axis_windows(d, &ks, half);
    let field = |x: &[f64]| pot.eval(x);
    let source = match &pot {
        Potential::Valpha(p) => WindowPotential::Valpha(p, mode),
        _ => WindowPotential::Field(&field),
    };
    let trace = bottom_trace(&source, &windows, nodes, k, &opts).map_err(|e| params.error("nodes", e.to_string()))?;

    let mut columns = vec!["index".to_string()];
    columns.extend((0..k).map(|i| format!("E{i}")));
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut table = Table::new("spectral", &cols);
    for row in &trace.rows {
        let mut cells = vec![row.index.into()];
        cells.extend(row.energies.iter().map(|e| (*e).into()));
        table.push(cells);
    }
    let max_residual = trace
        .rows
        .iter()
        .flat_map(|r| r.residuals.iter())
        .fold(0.0f64, |m, v| m.max(*v));
    let mut report = Report::new("spectral");
    report.tolerances.insert("residual".into(), opts.tol);
    report.results = json!({
        "h": trace.h,
        "nodes_per_window": trace.nodes_per_window,
        "growth": trace.growth,
        "max_residual": max_residual,
        "rows": trace.rows,
    });
    report.verdicts.insert("nondecreasing".into(), trace.nondecreasing);
    report.checks.insert("converged".into(), max_residual <= opts.tol);
    report.tables.push(table);
    Ok(report)
}
