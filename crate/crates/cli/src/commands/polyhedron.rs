use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use specdisc_core::geometry::Ball;
use specdisc_core::polyhedron::{
    hl_dominance_check, lemma42_check, max_inscribed_delta, pushforward_check, DistortedMeasure, GridOptions,
    Lemma42Setup, Region, SlabQuadrature, StepField,
};

use super::{dim, positive_count};
use crate::config::Params;
use crate::error::Result;
use crate::report::{Report, Table};

pub fn run(params: &Params, seed: u64) -> Result<Report> {
    let check = params.choice("check", &["pushforward", "dominance", "lemma42"], "dominance")?;
    let d = dim(params, "3")?;
    let radius = params.positive("radius", "1")?;
    let measure =
        DistortedMeasure::new(Ball::new(vec![0.0; d], radius)?).map_err(|e| params.error("dim", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = Report::new("polyhedron");
    match check.as_str() {
        "pushforward" => pushforward(params, &measure, &mut rng, &mut report)?,
        "dominance" => dominance(params, measure, &mut rng, &mut report)?,
        _ => lemma42(params, &measure, &mut rng, &mut report)?,
    }
    Ok(report)
}

fn pushforward(params: &Params, measure: &DistortedMeasure, rng: &mut ChaCha8Rng, report: &mut Report) -> Result<()> {
    let samples = positive_count(params, "samples", "100")?;
    let slabs = positive_count(params, "slabs", "200")?;
    let transverse = positive_count(params, "transverse", "100")?;
    let tol = params.positive("tol", "5e-3")?;
    let intervals: Vec<(f64, f64)> = (0..samples)
        .map(|_| {
            let (a, b): (f64, f64) = (rng.random(), rng.random());
            (a.min(b), a.max(b))
        })
        .collect();
    let rep = pushforward_check(measure, slabs, transverse, &intervals)?;
    let mut table = Table::new("pushforward", &["a", "b", "lebesgue", "preimage", "discrepancy"]);
    for iv in &rep.intervals {
        table.push(vec![
            iv.a.into(),
            iv.b.into(),
            iv.lebesgue.into(),
            iv.preimage.into(),
            iv.discrepancy.into(),
        ]);
    }
    report.tolerances.insert("max_discrepancy".into(), tol);
    report.results = json!({
        "slabs": rep.slabs,
        "transverse": rep.transverse,
        "max_discrepancy": rep.max_discrepancy,
    });
    report
        .checks
        .insert("pushforward_uniform".into(), rep.max_discrepancy <= tol);
    report.tables.push(table);
    Ok(())
}

fn dominance(params: &Params, measure: DistortedMeasure, rng: &mut ChaCha8Rng, report: &mut Report) -> Result<()> {
    let d = measure.dim();
    let samples = positive_count(params, "samples", "1000")?;
    let def = GridOptions::default_for(d);
    let options = GridOptions {
        slabs: positive_count(params, "slabs", &def.slabs.to_string())?,
        transverse: positive_count(params, "transverse", &def.transverse.to_string())?,
        allow_high_dim: false,
    };
    let tol = params.positive("tol", "1e-6")?;
    let bb = measure.ball.bounding_box();
    let quad = SlabQuadrature::new(measure, options)?;
    let regions: Vec<Region> = (0..samples)
        .map(|_| {
            let (mut lo, mut hi) = (Vec::with_capacity(d), Vec::with_capacity(d));
            for k in 0..d {
                let a = rng.random_range(bb.lo[k]..bb.hi[k]);
                let b = rng.random_range(bb.lo[k]..bb.hi[k]);
                lo.push(a.min(b));
                hi.push(a.max(b));
            }
            Region { lo, hi }
        })
        .collect();
    let margins = hl_dominance_check(&quad, &regions);
    let sublevel: Vec<Region> = (1..50)
        .map(|k| Region::half_space(d, bb.lo[0] + (bb.hi[0] - bb.lo[0]) * k as f64 / 50.0))
        .collect();
    let gap = hl_dominance_check(&quad, &sublevel)
        .iter()
        .map(|m| m.margin.abs())
        .fold(0.0, f64::max);
    let mut table = Table::new("dominance", &["index", "mu_s", "lebesgue", "bound", "margin"]);
    for (i, m) in margins.iter().enumerate() {
        table.push(vec![
            i.into(),
            m.mu_s.into(),
            m.lebesgue.into(),
            m.bound.into(),
            m.margin.into(),
        ]);
    }
    let violations = margins.iter().filter(|m| m.margin < -tol).count();
    let min_margin = margins.iter().map(|m| m.margin).fold(f64::INFINITY, f64::min);
    report.tolerances.insert("margin".into(), tol);
    report.results = json!({
        "slabs": options.slabs,
        "transverse": options.transverse,
        "violations": violations,
        "min_margin": min_margin,
        "sublevel_max_gap": gap,
    });
    report.checks.insert("dominance".into(), violations == 0);
    report.checks.insert("sublevel_equality".into(), gap <= tol);
    report.tables.push(table);
    Ok(())
}

fn lemma42(params: &Params, measure: &DistortedMeasure, rng: &mut ChaCha8Rng, report: &mut Report) -> Result<()> {
    let d = measure.dim();
    let samples = positive_count(params, "samples", "100")?;
    let cells = positive_count(params, "cells-per-side", "8")?;
    let tol = params.positive("tol", "1e-9")?;
    let dmax = max_inscribed_delta(d)?;
    let ball = &measure.ball;
    let mut table = Table::new("lemma42", &["index", "delta", "t", "kappa", "lhs", "rhs", "ok"]);
    let mut bad = 0;
    for i in 0..samples {
        let blocks: Vec<usize> = (0..d).map(|_| rng.random_range(1..=5)).collect();
        let count: usize = blocks.iter().product();
        let values: Vec<f64> = (0..count).map(|_| rng.random_range(0.0..10.0)).collect();
        let field = StepField::new(ball.bounding_box(), blocks, values, rng.random_range(0.0..10.0))?;
        let delta = rng.random_range(0.05..0.99) * dmax;
        let t = rng.random_range(0.05..0.95);
        let setup = Lemma42Setup {
            orthant: rng.random_range(0..1u32 << d),
            cells_per_side: cells,
        };
        let rep = lemma42_check(measure, &field, t, delta, &setup, tol)?;
        bad += usize::from(!rep.ok);
        table.push(vec![
            i.into(),
            delta.into(),
            t.into(),
            rep.kappa.into(),
            rep.lhs.into(),
            rep.rhs.into(),
            rep.ok.into(),
        ]);
    }
    report.tolerances.insert("slack".into(), tol);
    report.results = json!({ "fields": samples, "violations": bad, "max_delta": dmax });
    report.checks.insert("lemma42".into(), bad == 0);
    report.tables.push(table);
    Ok(())
}
