use serde_json::json;
use specdisc_core::optcover::{brute_force_i, check_prop34, greedy_i, solve_j, BRUTE_FORCE_LIMIT};
use specdisc_core::rearrange::DistributionProfile;

use super::space_and_field;
use crate::config::Params;
use crate::error::Result;
use crate::report::{to_value, Report, Table};

pub fn rearrange(params: &Params) -> Result<Report> {
    let (space, field) = space_and_field(params)?;
    let ts = params.number_list("t-list", None)?;
    let profile = DistributionProfile::new(&field, &space)?;
    let mut table = Table::new("rearrange", &["t", "W_star", "Wbar_star", "kappa_minus"]);
    let mut rows = Vec::with_capacity(ts.len());
    for &t in &ts {
        let lower = profile
            .nondecreasing(t)
            .map_err(|e| params.error("t-list", e.to_string()))?;
        let upper = profile.nonincreasing(t)?;
        let kappa = profile.strict_sublevel_mass(t)?;
        table.push(vec![t.into(), lower.into(), upper.into(), kappa.into()]);
        rows.push((t, lower, upper));
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut report = Report::new("rearrange");
    report.results = json!({
        "atoms": space.len(),
        "total_mass": space.total_mass(),
    });
    report
        .checks
        .insert("W_star_nondecreasing".into(), rows.windows(2).all(|p| p[1].1 >= p[0].1));
    report.checks.insert(
        "Wbar_star_nonincreasing".into(),
        rows.windows(2).all(|p| p[1].2 <= p[0].2),
    );
    report.tables.push(table);
    Ok(report)
}

pub fn optcover(params: &Params) -> Result<Report> {
    let (space, field) = space_and_field(params)?;
    let t = params.required_number("t")?;
    let theta = params.number("theta", "2")?;
    let slack = params.positive("slack", "1e-12")?;
    let sol = solve_j(&field, &space, t).map_err(|e| params.error("t", e.to_string()))?;
    let brute = (space.len() <= BRUTE_FORCE_LIMIT)
        .then(|| brute_force_i(&field, &space, t))
        .transpose()?;
    let greedy = greedy_i(&field, &space, t)?;
    let prop = check_prop34(&field, &space, t, theta, slack).map_err(|e| params.error("theta", e.to_string()))?;

    let mut report = Report::new("optcover");
    report.tolerances.insert("slack".into(), slack);
    report.results = json!({
        "J": sol.value,
        "I_bruteforce": brute,
        "I_greedy": greedy,
        "optimal_set": to_value(&sol),
        "prop34": {
            "lhs": prop.lower_bound,
            "J_left": prop.j_left,
            "J_right": prop.j_right,
            "rhs": prop.upper_bound,
            "ok": prop.ok,
        },
    });
    let tol = slack * greedy.abs().max(1.0);
    if let Some(b) = brute {
        report.checks.insert("J_le_I_bruteforce".into(), sol.value <= b + tol);
        report
            .checks
            .insert("I_bruteforce_le_I_greedy".into(), b <= greedy + tol);
    }
    report.checks.insert("J_le_I_greedy".into(), sol.value <= greedy + tol);
    report.checks.insert("prop34".into(), prop.ok);
    let mut table = Table::new("optcover", &["t", "J", "I_bruteforce", "I_greedy"]);
    table.push(vec![
        t.into(),
        sol.value.into(),
        brute.map_or("".into(), Into::into),
        greedy.into(),
    ]);
    report.tables.push(table);
    Ok(report)
}
