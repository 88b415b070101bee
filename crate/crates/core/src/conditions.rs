//! Discreteness condition functionals evaluated as finite traces, and the checks of the two
//! counterexamples built from the oscillating potential.

use std::collections::BTreeMap;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::densesys::{cantor_cylinder, DenseSystem};
use crate::error::{invalid, out_of_range, Error, Result};
use crate::geometry::{
    ball_volume, pow3_big, rat_to_big, rat_to_f64, xi_subset, AxisBox, CubeChart, GammaRule, MadicCell, Rat,
};
use crate::measure::{build_uniform_grid, restrict, WeightedSpace};
use crate::optcover::{check_prop34, solve_j, SandwichCheck};
use crate::potentials::{positivity_measure_exact, Alpha, NRule, Scalar, ValphaPotential};
use crate::rearrange::{DistributionProfile, ScalarField};

/// Potential given pointwise.
pub type FieldFn<'a> = &'a (dyn Fn(&[f64]) -> f64 + Sync);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConditionId {
    Thm35,
    Thm36,
    Thm313,
    Gmd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    /// `|y|` for centers, `|l|_∞` for unit cubes.
    pub index: f64,
    pub label: String,
    pub value: f64,
}

const REL_TOL: f64 = 1e-9;

/// Finite stand-in for `lim = ∞`: monotone growth over a trailing window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceVerdict {
    pub window_start: usize,
    pub window_len: usize,
    pub nondecreasing: bool,
    pub strictly_increasing: bool,
    /// `last / first` over the window (infinite when `first = 0 < last`).
    pub growth: f64,
    pub diverging: bool,
}

impl DivergenceVerdict {
    pub fn from_values(values: &[f64], window: usize) -> Self {
        let len = window.clamp(1, values.len().max(1)).min(values.len());
        let start = values.len() - len;
        let w = &values[start..];
        // Changes within rounding of the grid masses count as flat.
        let above = |a: f64, b: f64| b - a > REL_TOL * a.abs().max(b.abs());
        let nondecreasing = w.windows(2).all(|p| !above(p[1], p[0]));
        let strictly_increasing = w.windows(2).all(|p| above(p[0], p[1]));
        let (first, last) = (w.first().copied().unwrap_or(0.0), w.last().copied().unwrap_or(0.0));
        let growth = if first > 0.0 {
            last / first
        } else if last > 0.0 {
            f64::INFINITY
        } else {
            1.0
        };
        Self {
            window_start: start,
            window_len: len,
            nondecreasing,
            strictly_increasing,
            growth,
            diverging: len >= 2 && nondecreasing && above(first, last),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionTrace {
    pub condition: ConditionId,
    pub parameters: BTreeMap<String, String>,
    pub points: Vec<TracePoint>,
    pub verdict: DivergenceVerdict,
}

impl ConditionTrace {
    fn build(
        condition: ConditionId,
        parameters: BTreeMap<String, String>,
        points: Vec<TracePoint>,
        window: usize,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("centers", "trace needs at least one point"));
        }
        if points.windows(2).any(|p| p[1].index <= p[0].index) {
            return Err(invalid("centers", "indices must be strictly increasing"));
        }
        let values: Vec<f64> = points.iter().map(|p| p.value).collect();
        Ok(Self {
            condition,
            parameters,
            verdict: DivergenceVerdict::from_values(&values, window),
            points,
        })
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }
}

/// Shape of `G_r(y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainFamily {
    /// Cube of side `2r/√d` inscribed in `B_r(y)`.
    InscribedCube,
    /// `y + r[-1,1]^d`
    Cube,
    /// `B_r(y)`, cells kept by center.
    Ball,
}

/// Grid for the domain family on `(y, r)`.
pub fn domain_space(family: DomainFamily, y: &[f64], r: f64, resolution: usize) -> Result<WeightedSpace> {
    let d = y.len();
    if !(r > 0.0) {
        return Err(out_of_range("r", r, "r > 0"));
    }
    let half = match family {
        DomainFamily::InscribedCube => r / (d as f64).sqrt(),
        DomainFamily::Cube | DomainFamily::Ball => r,
    };
    let bbox = AxisBox::new(
        y.iter().map(|c| c - half).collect(),
        y.iter().map(|c| c + half).collect(),
    )?;
    let grid = build_uniform_grid(&bbox, &vec![resolution; d])?;
    match family {
        DomainFamily::Ball => restrict(&grid, |x| {
            x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() < r * r
        }),
        _ => Ok(grid),
    }
}

fn sample(space: &WeightedSpace, v: FieldFn) -> Result<ScalarField> {
    ScalarField::sample(space, v)
}

fn norm(y: &[f64]) -> f64 {
    y.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Settings shared by the center-based traces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    pub family: DomainFamily,
    pub resolution: usize,
    pub window: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            family: DomainFamily::InscribedCube,
            resolution: 12,
            window: 4,
        }
    }
}

fn base_parameters(opts: &TraceOptions, r: f64) -> BTreeMap<String, String> {
    let mut p = BTreeMap::new();
    p.insert("family".into(), format!("{:?}", opts.family));
    p.insert("resolution".into(), opts.resolution.to_string());
    p.insert("r".into(), r.to_string());
    p.insert("window".into(), opts.window.to_string());
    p
}

/// `J_V(σ(r), y, r)` with `σ(r) = (1 − γ̃(r))·mes(G_r)`, the measure taken on the grid.
pub fn cond_thm35(
    v: FieldFn,
    gamma_tilde: &GammaRule,
    centers: &[Vec<f64>],
    r: f64,
    opts: &TraceOptions,
) -> Result<ConditionTrace> {
    let g = gamma_tilde.eval(r);
    if !(g > 0.0 && g < 1.0) {
        return Err(out_of_range("gamma_tilde(r)", g, "(0, 1)"));
    }
    let points = centers
        .par_iter()
        .map(|y| {
            let space = domain_space(opts.family, y, r, opts.resolution)?;
            let field = sample(&space, v)?;
            let t = (1.0 - g) * space.total_mass();
            Ok(TracePoint {
                index: norm(y),
                label: format!("{y:?}"),
                value: solve_j(&field, &space, t)?.value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut params = base_parameters(opts, r);
    params.insert("gamma_tilde".into(), gamma_tilde.describe());
    ConditionTrace::build(ConditionId::Thm35, params, points, opts.window)
}

/// `V̄^⋆(δ̂(r), y, r)` with `δ̂(r) = γ̂(r)·mes(G_r)`.
pub fn cond_thm36(
    v: FieldFn,
    gamma_hat: &GammaRule,
    centers: &[Vec<f64>],
    r: f64,
    opts: &TraceOptions,
) -> Result<ConditionTrace> {
    let g = gamma_hat.eval(r);
    if !(g > 0.0 && g < 1.0) {
        return Err(out_of_range("gamma_hat(r)", g, "(0, 1)"));
    }
    let points = centers
        .par_iter()
        .map(|y| {
            let space = domain_space(opts.family, y, r, opts.resolution)?;
            let field = sample(&space, v)?;
            let t = g * space.total_mass();
            Ok(TracePoint {
                index: norm(y),
                label: format!("{y:?}"),
                value: DistributionProfile::new(&field, &space)?.nonincreasing(t)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut params = base_parameters(opts, r);
    params.insert("gamma_hat".into(), gamma_hat.describe());
    ConditionTrace::build(ConditionId::Thm36, params, points, opts.window)
}

/// Two-sided bound of `J` by `V̄^⋆` at each center, relating the two traces above.
pub fn sandwich_per_center(
    v: FieldFn,
    gamma: &GammaRule,
    theta: f64,
    centers: &[Vec<f64>],
    r: f64,
    opts: &TraceOptions,
) -> Result<Vec<SandwichCheck>> {
    let g = gamma.eval(r);
    centers
        .par_iter()
        .map(|y| {
            let space = domain_space(opts.family, y, r, opts.resolution)?;
            let field = sample(&space, v)?;
            check_prop34(&field, &space, g * space.total_mass(), theta, 1e-12)
        })
        .collect()
}

/// `γ(m^{-n})` with an exact form `3^{-n·p/q}` when `m = 3` and `γ(r) = r^{p/q}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellThreshold {
    pub value: f64,
    pub exponent: Option<(u64, u64)>,
    pub level: u32,
}

impl CellThreshold {
    pub fn new(gamma: &GammaRule, m: u32, n: u32) -> Result<Self> {
        let value = gamma.eval((m as f64).powi(-(n as i32)));
        if !(value > 0.0 && value <= 1.0) {
            return Err(out_of_range("gamma(m^-n)", value, "(0, 1]"));
        }
        let exponent = match gamma {
            GammaRule::Power { coeff, exponent } if *coeff == 1.0 && m == 3 => Alpha::new(*exponent)
                .ok()
                .and_then(|a| a.ratio)
                .map(|(p, q)| (p as u64, q as u64)),
            _ => None,
        };
        Ok(Self {
            value,
            exponent,
            level: n,
        })
    }
}

/// Positivity fraction of `V_α` on a cell lying in `D_j(l)`, with `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValphaCell {
    pub level: u32,
    pub fraction: f64,
    /// Exact fraction when `3^{-αj}` is rational.
    pub exact: Option<BigRational>,
    pub amplitude: f64,
}

/// Exact positivity data on a triadic corner-chart cell of `Q_1(l)` whose projection lies in one `D_j`.
pub fn valpha_cell(pot: &ValphaPotential, cell: &MadicCell, l: &[i64]) -> Result<ValphaCell> {
    let j = crate::potentials::cell_cantor_level(cell, l)?
        .ok_or_else(|| Error::Hypothesis("cell projection is not inside a single adjacent interval".into()))?;
    let p = ValphaPotential::period_exponent(l);
    let b = cell.to_rat_box();
    let shift = Rat::from_integer(l[0] as i128);
    let (lo, hi) = (b.lo[0] - shift, b.hi[0] - shift);
    let amplitude = pot.amplitude.eval(l);
    if let Some(beta) = <BigRational as Scalar>::beta(&pot.alpha, j) {
        let (a, bb) = (rat_to_big(&lo), rat_to_big(&hi));
        let m = positivity_measure_exact(&pow3_big(p as i64), &beta, &a, &bb)?;
        let frac = m / (bb - a);
        return Ok(ValphaCell {
            level: j,
            fraction: Scalar::to_f64(&frac),
            exact: Some(frac),
            amplitude,
        });
    }
    let (a, bb) = (rat_to_f64(&lo), rat_to_f64(&hi));
    let m = positivity_measure_exact(&3f64.powi(p as i32), &pot.alpha.beta(j), &a, &bb)?;
    Ok(ValphaCell {
        level: j,
        fraction: m / (bb - a),
        exact: None,
        amplitude,
    })
}

/// `V̄^⋆(u·mes(Q), Q)` for `V ∈ {0, N}` on the cell: `N` if the positive part has fraction `≥ u`.
fn two_valued_rearrangement(cell: &ValphaCell, alpha: &Alpha, u: &CellThreshold) -> f64 {
    let reaches = match (&cell.exact, alpha.ratio, u.exponent) {
        // fraction = 3^{-αj} exactly; compare exponents αj ≤ n·p/q.
        (Some(frac), Some((a, b)), Some((p, q)))
            if *frac == <BigRational as Scalar>::beta(alpha, cell.level).unwrap_or_default() =>
        {
            (a as u64) * (cell.level as u64) * q <= (u.level as u64) * p * (b as u64)
        }
        _ => cell.fraction >= u.value * (1.0 - 1e-12),
    };
    if reaches {
        cell.amplitude
    } else {
        0.0
    }
}

/// Row of [`xi_nonempty_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiRow {
    pub l: Vec<i64>,
    pub n: u32,
    pub j: u32,
    pub count: usize,
    pub nonempty: bool,
}

/// `Ξ_n(l, j) ≠ ∅` for `j ≤ n`.
pub fn xi_nonempty_check(
    systems: &(dyn Fn(&[i64]) -> Result<DenseSystem> + Sync),
    m: u32,
    ns: &[u32],
    ls: &[Vec<i64>],
) -> Result<Vec<XiRow>> {
    let mut jobs = Vec::new();
    for l in ls {
        for &n in ns {
            for j in 1..=n {
                jobs.push((l.clone(), n, j));
            }
        }
    }
    jobs.par_iter()
        .map(|(l, n, j)| {
            let sys = systems(l)?;
            let region = sys.levels.get(*j as usize - 1).cloned().unwrap_or_default();
            let count = xi_subset(l, *n, m, CubeChart::Corner, &region)?.len();
            Ok(XiRow {
                l: l.clone(),
                n: *n,
                j: *j,
                count,
                nonempty: count > 0,
            })
        })
        .collect()
}

/// Field for the m-adic cell condition.
pub enum CellField<'a> {
    /// Exact evaluation on cells.
    Valpha(&'a ValphaPotential),
    /// Midpoint sampling with `resolution` points per axis inside each cell.
    Sampled { f: FieldFn<'a>, resolution: usize },
}

fn cell_rearrangement(field: &CellField, cell: &MadicCell, l: &[i64], u: &CellThreshold) -> Result<f64> {
    match field {
        CellField::Valpha(pot) => Ok(two_valued_rearrangement(&valpha_cell(pot, cell, l)?, &pot.alpha, u)),
        CellField::Sampled { f, resolution } => {
            let space = build_uniform_grid(&cell.to_box(), &vec![*resolution; l.len()])?;
            let values = ScalarField::sample(&space, f)?;
            DistributionProfile::new(&values, &space)?.nonincreasing(u.value.min(1.0) * space.total_mass())
        }
    }
}

/// `min_{ξ ∈ ∪_{j≤n} Ξ_n(l,j)} V̄^⋆(γ(m^{-n}), ξ, n)` for each `l`.
pub fn cond_thm313(
    field: &CellField,
    systems: &(dyn Fn(&[i64]) -> Result<DenseSystem> + Sync),
    gamma: &GammaRule,
    m: u32,
    n: u32,
    ls: &[Vec<i64>],
    window: usize,
) -> Result<ConditionTrace> {
    let u = CellThreshold::new(gamma, m, n)?;
    let points = ls
        .par_iter()
        .map(|l| {
            let sys = systems(l)?;
            let mut cells = Vec::new();
            for j in 1..=n {
                let region = sys.levels.get(j as usize - 1).cloned().unwrap_or_default();
                let xi = xi_subset(l, n, m, CubeChart::Corner, &region)?;
                if xi.is_empty() {
                    return Err(Error::Hypothesis(format!("Xi_{n}({l:?}, {j}) is empty")));
                }
                cells.extend(xi);
            }
            let mut best = f64::INFINITY;
            for c in &cells {
                best = best.min(cell_rearrangement(field, c, l, &u)?);
            }
            Ok(TracePoint {
                index: l.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0) as f64,
                label: format!("{l:?}"),
                value: best,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut params = BTreeMap::new();
    params.insert("gamma".into(), gamma.describe());
    params.insert("m".into(), m.to_string());
    params.insert("n".into(), n.to_string());
    params.insert("window".into(), window.to_string());
    ConditionTrace::build(ConditionId::Thm313, params, points, window)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmdPoint {
    pub index: f64,
    pub integral: f64,
    pub threshold: f64,
    pub superlevel_mass: f64,
    /// `λ^⋆ / mes(B_r)`
    pub ratio: f64,
    /// `λ^⋆ / mes(Q_r)`
    pub fraction: f64,
    pub holds: bool,
}

/// `λ^⋆(δ/mes(Q_r) ∫_{Q_r(y)} V) ≥ c·mes(B_r)` on grids over `y + r[-1,1]^d`.
pub fn cond_gmd(
    v: FieldFn,
    delta: f64,
    c: f64,
    r: f64,
    centers: &[Vec<f64>],
    resolution: usize,
) -> Result<Vec<GmdPoint>> {
    if !(delta > 0.0) {
        return Err(out_of_range("delta", delta, "delta > 0"));
    }
    if !(c > 0.0 && c < 1.0) {
        return Err(out_of_range("c", c, "(0, 1)"));
    }
    centers
        .par_iter()
        .map(|y| {
            let space = domain_space(DomainFamily::Cube, y, r, resolution)?;
            let field = sample(&space, v)?;
            let cube = space.total_mass();
            let integral: f64 = crate::numeric::csum(field.values().iter().zip(space.masses()).map(|(a, m)| a * m));
            let threshold = delta / cube * integral;
            let superlevel_mass = DistributionProfile::new(&field, &space)?.lambda_upper(threshold);
            let ball = ball_volume(y.len(), r);
            let ratio = superlevel_mass / ball;
            Ok(GmdPoint {
                index: norm(y),
                integral,
                threshold,
                superlevel_mass,
                ratio,
                fraction: superlevel_mass / cube,
                holds: ratio >= c,
            })
        })
        .collect()
}

/// The same functional on a cell of `V_α`, exactly: the superlevel set is the positive part.
#[derive(Debug, Clone, PartialEq)]
pub struct GmdCell {
    pub fraction: f64,
    pub exact: Option<BigRational>,
    pub ratio: f64,
    pub holds: bool,
}

pub fn gmd_valpha_cell(pot: &ValphaPotential, cell: &MadicCell, l: &[i64], delta: f64, c: f64) -> Result<GmdCell> {
    let data = valpha_cell(pot, cell, l)?;
    // The threshold δ·N·fraction lies in (0, N] when δ·fraction ≤ 1.
    if delta * data.fraction > 1.0 {
        return Err(Error::Hypothesis("delta too large: the threshold exceeds N(l)".into()));
    }
    let side = rat_to_f64(&(cell.to_rat_box().hi[0] - cell.to_rat_box().lo[0]));
    let d = l.len();
    let cube = side.powi(d as i32);
    let ratio = data.fraction * cube / ball_volume(d, side / 2.0);
    Ok(GmdCell {
        fraction: data.fraction,
        exact: data.exact,
        ratio,
        holds: ratio >= c,
    })
}

/// `n = [log_m(1/(θr))] + 2`
pub fn lemma_level(m: u32, theta: f64, r: f64) -> Result<u32> {
    if !(theta > 0.0 && theta < 1.0) || !(r > 0.0) || m < 2 {
        return Err(invalid("parameters", "need m >= 2, theta in (0,1), r > 0"));
    }
    let x = (1.0 / (theta * r)).ln() / (m as f64).ln();
    // Guard exact powers against rounding below the integer.
    let k = (x + 1e-12).floor().max(0.0);
    Ok(k as u32 + 2)
}

/// `K = (2d·m^{2(d−1)} + 1)^{-1}`
pub fn lemma_constant(d: usize, m: u32) -> f64 {
    1.0 / (2.0 * d as f64 * (m as f64).powi(2 * (d as i32 - 1)) + 1.0)
}

/// `γ̂(ρ, K) = K·γ(θρ/m²)·θ^d`
pub fn gamma_hat_of(gamma: &GammaRule, rho: f64, k: f64, theta: f64, m: u32, d: usize) -> f64 {
    k * gamma.eval(theta * rho / (m as f64 * m as f64)) * theta.powi(d as i32)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thm313Row {
    pub l_inf: u64,
    pub value: f64,
    pub expected: f64,
    pub equal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmdRow {
    pub n: u32,
    pub fraction: f64,
    pub expected: f64,
    pub abs_error: f64,
    /// The fraction was compared with `3^{-αn}` in rational arithmetic.
    pub exact: bool,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example54Report {
    pub dim: usize,
    pub alpha: f64,
    pub n_rule: String,
    pub cell_level: u32,
    pub thm313: Vec<Thm313Row>,
    pub gmd: Vec<GmdRow>,
    pub thm313_exact: bool,
    pub gmd_max_error: f64,
    pub gmd_strictly_decreasing: bool,
    pub ok: bool,
}

/// Options for [`verify_example54`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example54Options {
    pub dim: usize,
    /// Levels `n` of the cells `Q(ξ_n, n) ⊆ D_n(l_n)` with `|l_n|_∞ = n`.
    pub gmd_levels: Vec<u32>,
    /// Level of the cell condition.
    pub cell_level: u32,
    /// `|l|_∞` values for the cell condition, `l = (k, 0, …, 0)`.
    pub l_values: Vec<i64>,
    pub delta: f64,
    pub c: f64,
    pub tolerance: f64,
}

impl Default for Example54Options {
    fn default() -> Self {
        Self {
            dim: 3,
            gmd_levels: (1..=6).collect(),
            cell_level: 2,
            l_values: (3..=10).collect(),
            delta: 0.5,
            c: 0.1,
            tolerance: 1e-12,
        }
    }
}

fn axis_l(d: usize, k: i64) -> Vec<i64> {
    let mut l = vec![0; d];
    l[0] = k;
    l
}

/// The cell condition holds with value `N(l)` while the averaged superlevel fractions are `3^{-αn} → 0`.
pub fn verify_example54(alpha: Alpha, n_rule: NRule, opts: &Example54Options) -> Result<Example54Report> {
    let d = opts.dim;
    let pot = ValphaPotential::new(d, alpha, n_rule.clone())?;
    let n = opts.cell_level;
    if opts.l_values.iter().any(|k| *k <= n as i64) {
        return Err(Error::Hypothesis(format!("|l|_inf must exceed n = {n}")));
    }
    let levels = n.max(opts.gmd_levels.iter().copied().max().unwrap_or(1));
    let systems = move |l: &[i64]| cantor_cylinder(d, levels, l);
    let ls: Vec<Vec<i64>> = opts.l_values.iter().map(|k| axis_l(d, *k)).collect();
    let gamma = GammaRule::power(alpha.value);
    let trace = cond_thm313(&CellField::Valpha(&pot), &systems, &gamma, 3, n, &ls, 2)?;
    let thm313: Vec<Thm313Row> = trace
        .points
        .iter()
        .zip(&ls)
        .map(|(p, l)| {
            let expected = pot.amplitude.eval(l);
            Thm313Row {
                l_inf: p.index as u64,
                value: p.value,
                expected,
                equal: p.value == expected,
            }
        })
        .collect();
    let gmd = opts
        .gmd_levels
        .par_iter()
        .map(|&k| {
            let l = axis_l(d, k as i64);
            let cell = crate::potentials::leftmost_cell(&l, k, k)?;
            let g = gmd_valpha_cell(&pot, &cell, &l, opts.delta, opts.c)?;
            let expected = alpha.beta(k);
            let (abs_error, exact) = match (&g.exact, <BigRational as Scalar>::beta(&alpha, k)) {
                (Some(f), Some(b)) => (Scalar::to_f64(&(f.clone() - b).abs_ratio()), true),
                _ => ((g.fraction - expected).abs(), false),
            };
            Ok(GmdRow {
                n: k,
                fraction: g.fraction,
                expected,
                abs_error,
                exact,
                holds: g.holds,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let thm313_exact = thm313.iter().all(|r| r.equal);
    let gmd_max_error = gmd.iter().map(|r| r.abs_error).fold(0.0, f64::max);
    let gmd_strictly_decreasing = gmd.windows(2).all(|w| w[1].fraction < w[0].fraction);
    Ok(Example54Report {
        dim: d,
        alpha: alpha.value,
        n_rule: n_rule.name(),
        cell_level: n,
        ok: thm313_exact && gmd_max_error <= opts.tolerance && gmd_strictly_decreasing,
        thm313,
        gmd,
        thm313_exact,
        gmd_max_error,
        gmd_strictly_decreasing,
    })
}

trait AbsRatio {
    fn abs_ratio(&self) -> Self;
}

impl AbsRatio for BigRational {
    fn abs_ratio(&self) -> Self {
        num_traits::Signed::abs(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example55Row {
    pub j: u32,
    pub r: f64,
    pub level: u32,
    pub l: Vec<i64>,
    pub cube: AxisBox,
    /// Positive part of `V_α` in the cube, as a fraction of its volume.
    pub fraction: f64,
    pub fraction_exact: Option<String>,
    pub gamma_hat: f64,
    /// `V̄^⋆(γ̂(r_j)·mes(Q), Q)`
    pub rearrangement: f64,
    /// `γ̂(r_j) − fraction`; positive means the rearrangement vanishes.
    pub margin: f64,
    pub lemma_bounds_hold: bool,
    /// Positive mass `≤ 2·3^d ψ(r_j) mes(Q)`.
    pub estimate_holds: bool,
    /// `γ̂(r_j)/r_j^α`
    pub divergence_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example55Report {
    pub dim: usize,
    pub alpha: f64,
    pub gamma_hat: String,
    pub rows: Vec<Example55Row>,
    /// Smallest `J` with zero rearrangement for every tested `j ≥ J`.
    pub first_zero_from: Option<u32>,
    pub ratio_strictly_increasing: bool,
    /// Cell condition trace on the same potential.
    pub thm313: ConditionTrace,
    pub ok: bool,
}

/// Cubes `Q_{r_j}` with `r_j = 2·3^{-(j+1)}` at the left end of `I_{j,1} + j` where the
/// rearrangement of `V_α` vanishes, while the cell condition still diverges.
pub fn verify_example55(
    dim: usize,
    alpha: Alpha,
    n_rule: NRule,
    gamma_hat: &GammaRule,
    js: &[u32],
) -> Result<Example55Report> {
    let d = dim as f64;
    let lower = 2.0 * (d - 2.0) / d;
    if !(alpha.value > lower && alpha.value < 2.0) {
        return Err(out_of_range("alpha", alpha.value, format!("({lower}, 2)")));
    }
    if js.is_empty() || js.windows(2).any(|w| w[1] <= w[0]) || js[0] == 0 {
        return Err(invalid("j", "need a strictly increasing list of positive levels"));
    }
    let pot = ValphaPotential::new(dim, alpha, n_rule.clone())?;
    let rows = js
        .par_iter()
        .map(|&j| {
            let l = axis_l(dim, j as i64);
            let r = Rat::new(2, 3i128.pow(j + 1));
            let a = Rat::new(1, 3i128.pow(j));
            let b = a + r;
            let p = ValphaPotential::period_exponent(&l);
            let rf = rat_to_f64(&r);
            let mut lo = vec![0.0; dim];
            let mut hi = vec![rf; dim];
            lo[0] = j as f64 + rat_to_f64(&a);
            hi[0] = j as f64 + rat_to_f64(&b);
            let cube = AxisBox::new(lo, hi)?;
            let beta_f = alpha.beta(j);
            let (fraction, fraction_exact, lemma_ok) = match <BigRational as Scalar>::beta(&alpha, j) {
                Some(beta) => {
                    let s = pow3_big(p as i64);
                    let (ab, bb) = (rat_to_big(&a), rat_to_big(&b));
                    let m = positivity_measure_exact(&s, &beta, &ab, &bb)?;
                    let len = bb - ab;
                    let two = BigRational::from_integer(2.into());
                    let spread = two * beta.clone() / s;
                    let ok = m <= beta.clone() * len.clone() + spread.clone() && m >= beta * len.clone() - spread;
                    let frac = m / len;
                    (Scalar::to_f64(&frac), Some(frac.to_string()), ok)
                }
                None => {
                    let s = 3f64.powi(p as i32);
                    let (af, bf) = (rat_to_f64(&a), rat_to_f64(&b));
                    let m = positivity_measure_exact(&s, &beta_f, &af, &bf)?;
                    let spread = 2.0 * beta_f / s;
                    let slack = 1e-15;
                    let ok = m <= beta_f * (bf - af) + spread + slack && m >= beta_f * (bf - af) - spread - slack;
                    (m / (bf - af), None, ok)
                }
            };
            let g = gamma_hat.eval(rf);
            if !(g > 0.0 && g < 1.0) {
                return Err(out_of_range("gamma_hat(r_j)", g, "(0, 1)"));
            }
            // Positive mass fraction·r^d against 2·3^d ψ(r) r^d, ψ(r) = r^α.
            let estimate_holds = fraction <= 2.0 * 3f64.powi(dim as i32) * rf.powf(alpha.value);
            let rearrangement = if fraction >= g { pot.amplitude.eval(&l) } else { 0.0 };
            Ok(Example55Row {
                j,
                r: rf,
                level: j,
                l,
                cube,
                fraction,
                fraction_exact,
                gamma_hat: g,
                rearrangement,
                margin: g - fraction,
                lemma_bounds_hold: lemma_ok,
                estimate_holds,
                divergence_ratio: g / rf.powf(alpha.value),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut first_zero_from = None;
    for row in rows.iter().rev() {
        if row.rearrangement == 0.0 {
            first_zero_from = Some(row.j);
        } else {
            break;
        }
    }
    let ratio_strictly_increasing = rows.windows(2).all(|w| w[1].divergence_ratio > w[0].divergence_ratio);
    let n = 2;
    let ls: Vec<Vec<i64>> = (3..=8).map(|k| axis_l(dim, k)).collect();
    let systems = move |l: &[i64]| cantor_cylinder(dim, n, l);
    let thm313 = cond_thm313(
        &CellField::Valpha(&pot),
        &systems,
        &GammaRule::power(alpha.value),
        3,
        n,
        &ls,
        4,
    )?;
    let ok = first_zero_from.is_some()
        && ratio_strictly_increasing
        && rows.iter().all(|r| r.lemma_bounds_hold)
        && (!pot.amplitude.diverges() || thm313.verdict.diverging);
    Ok(Example55Report {
        dim,
        alpha: alpha.value,
        gamma_hat: gamma_hat.describe(),
        rows,
        first_zero_from,
        ratio_strictly_increasing,
        thm313,
        ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts() {
        let v = DivergenceVerdict::from_values(&[1.0, 2.0, 3.0], 3);
        assert!(v.diverging && v.strictly_increasing && v.growth == 3.0);
        let v = DivergenceVerdict::from_values(&[0.0, 0.0, 0.0], 3);
        assert!(!v.diverging && v.nondecreasing);
        let v = DivergenceVerdict::from_values(&[5.0, 1.0, 2.0, 3.0], 3);
        assert_eq!(v.window_start, 1);
        assert!(v.diverging);
    }

    fn centers(d: usize, n: usize) -> Vec<Vec<f64>> {
        (1..=n)
            .map(|k| {
                let mut y = vec![0.0; d];
                y[0] = k as f64 * 2.0;
                y
            })
            .collect()
    }

    #[test]
    fn constant_and_zero_fields() {
        let opts = TraceOptions {
            resolution: 6,
            ..TraceOptions::default()
        };
        let gt = GammaRule::Power {
            coeff: 0.5,
            exponent: 0.0,
        };
        let c = |_: &[f64]| 2.0;
        let tr = cond_thm35(&c, &gt, &centers(2, 3), 0.5, &opts).unwrap();
        let space = domain_space(opts.family, &[0.0, 0.0], 0.5, 6).unwrap();
        for p in &tr.points {
            assert!((p.value - 2.0 * 0.5 * space.total_mass()).abs() < 1e-12);
        }
        assert!(!tr.verdict.diverging);
        let z = |_: &[f64]| 0.0;
        let tr = cond_thm36(&z, &gt, &centers(2, 3), 0.5, &opts).unwrap();
        assert!(tr.values().iter().all(|v| *v == 0.0));
        let bad = [vec![2.0, 0.0], vec![1.0, 0.0]];
        assert!(cond_thm36(&z, &gt, &bad, 0.5, &opts).is_err());
    }

    #[test]
    fn radial_growth_diverges() {
        let opts = TraceOptions {
            resolution: 8,
            ..TraceOptions::default()
        };
        let v = |x: &[f64]| x.iter().map(|a| a * a).sum::<f64>();
        let tr = cond_thm36(&v, &GammaRule::power(0.5), &centers(3, 5), 0.5, &opts).unwrap();
        assert!(tr.verdict.diverging && tr.verdict.strictly_increasing);
        let checks = sandwich_per_center(&v, &GammaRule::power(0.5), 2.0, &centers(3, 5), 0.5, &opts).unwrap();
        assert!(checks.iter().all(|c| c.ok));
    }

    #[test]
    fn gmd_on_constants() {
        let one = |_: &[f64]| 1.0;
        let pts = cond_gmd(&one, 0.5, 0.1, 0.5, &centers(2, 2), 4).unwrap();
        let expect = 1.0 / ball_volume(2, 0.5);
        assert!(pts.iter().all(|p| (p.ratio - expect).abs() < 1e-12 && p.holds));
        let zero = |_: &[f64]| 0.0;
        let pts = cond_gmd(&zero, 0.5, 0.1, 0.5, &centers(2, 2), 4).unwrap();
        assert!(pts.iter().all(|p| (p.fraction - 1.0).abs() < 1e-12));
    }

    #[test]
    fn lemma_formulas() {
        assert_eq!(lemma_level(3, 1.0 / 9.0, 1.0 / 3.0).unwrap(), 5);
        assert_eq!(lemma_level(3, 1.0 / 9.0, 0.5).unwrap(), 4);
        assert!((lemma_constant(3, 3) - 1.0 / 487.0).abs() < 1e-18);
        let g = GammaRule::power(1.0);
        assert!((gamma_hat_of(&g, 0.9, 0.5, 0.5, 3, 2) - 0.5 * 0.05 * 0.25).abs() < 1e-15);
    }

    #[test]
    fn cell_minimum_of_constant_field() {
        let c = |_: &[f64]| 4.0;
        let systems = |l: &[i64]| cantor_cylinder(2, 2, l);
        let ls = vec![vec![3, 0], vec![4, 0]];
        let field = CellField::Sampled { f: &c, resolution: 3 };
        let tr = cond_thm313(&field, &systems, &GammaRule::power(1.0), 3, 2, &ls, 2).unwrap();
        assert!(tr.values().iter().all(|v| *v == 4.0));
    }

    #[test]
    fn empty_level_is_reported() {
        let systems = |l: &[i64]| Ok(cantor_cylinder(2, 2, l)?.without_level(2));
        let rows = xi_nonempty_check(&systems, 3, &[2], &[vec![0, 0]]).unwrap();
        assert!(rows[0].nonempty && !rows[1].nonempty);
        let c = |_: &[f64]| 1.0;
        let field = CellField::Sampled { f: &c, resolution: 2 };
        assert!(cond_thm313(&field, &systems, &GammaRule::power(1.0), 3, 2, &[vec![3, 0]], 2).is_err());
    }

    #[test]
    fn oscillating_cells_small() {
        let opts = Example54Options {
            gmd_levels: (1..=3).collect(),
            l_values: vec![3, 4],
            ..Example54Options::default()
        };
        let rep = verify_example54(Alpha::new(1.0).unwrap(), NRule::Linear, &opts).unwrap();
        assert!(rep.ok, "{rep:?}");
        assert_eq!(rep.gmd_max_error, 0.0);
    }

    #[test]
    fn vanishing_example_alpha_range() {
        let g = GammaRule::power_log(2.0 / 3.0);
        assert!(verify_example55(3, Alpha::new(0.5).unwrap(), NRule::Linear, &g, &[1, 2]).is_err());
        let rep = verify_example55(3, Alpha::new(1.0).unwrap(), NRule::Linear, &g, &[1, 2, 3]).unwrap();
        assert_eq!(rep.first_zero_from, Some(1));
        assert!(rep.ok);
    }
}
