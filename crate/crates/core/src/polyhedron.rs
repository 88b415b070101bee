//! Slice map of a ball, the capacity-weighted measure `μ_s` with density `cap·f'(s)`,
//! the `Z` weight, and the quantitative checks built on them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, out_of_range, Error, Result};
use crate::geometry::{ball_capacity, AxisBox, Ball};
use crate::numeric::{bisect_increasing, simpson, CompensatedSum};
use crate::rearrange::DistributionProfile;

/// Dimensions enabled without [`GridOptions::allow_high_dim`].
pub const DEFAULT_MAX_DIM: usize = 5;

/// Nodes of the tabulated slice map.
pub const SLICE_NODES: usize = 2048;

fn check_dim(d: usize) -> Result<()> {
    if d < 3 {
        return Err(out_of_range("d", d as f64, "d >= 3"));
    }
    Ok(())
}

/// `f(t) = t^{(d-2)/d}`
pub fn f_power(d: usize, t: f64) -> f64 {
    t.max(0.0).powf((d as f64 - 2.0) / d as f64)
}

/// `f'(t) = ((d-2)/d) t^{-2/d}`, infinite at 0.
pub fn f_prime(d: usize, t: f64) -> f64 {
    let df = d as f64;
    (df - 2.0) / df * t.powf(-2.0 / df)
}

/// `1/f'(t) = (d/(d-2)) t^{2/d}`
pub fn inverse_f_prime(d: usize, t: f64) -> f64 {
    let df = d as f64;
    df / (df - 2.0) * t.max(0.0).powf(2.0 / df)
}

/// `∫_{-π/2}^{π/2} cos^d φ dφ`
fn cos_power_integral(d: usize) -> f64 {
    let (mut w, start) = if d % 2 == 0 {
        (std::f64::consts::PI, 2)
    } else {
        (2.0, 3)
    };
    let mut k = start;
    while k <= d {
        w *= (k as f64 - 1.0) / k as f64;
        k += 2;
    }
    w
}

/// Fraction of the unit ball lying in `{x_1 ≤ c}`.
pub fn slice_fraction(d: usize, c: f64) -> Result<f64> {
    check_dim(d)?;
    if !(c.abs() <= 1.0) {
        return Err(out_of_range("c", c, "[-1, 1]"));
    }
    // u = sin φ turns the weight (1-u²)^{(d-1)/2} du into cos^d φ dφ.
    let half_pi = std::f64::consts::FRAC_PI_2;
    let phi = c.asin();
    let di = d as i32;
    let part = simpson(&|p: f64| p.cos().powi(di), -half_pi, phi, 1e-14);
    Ok((part / cos_power_integral(d)).clamp(0.0, 1.0))
}

/// Tabulated slice fraction in the angle variable with cubic Hermite interpolation.
#[derive(Debug, Clone)]
pub struct SliceMap {
    dim: usize,
    norm: f64,
    step: f64,
    values: Vec<f64>,
}

impl SliceMap {
    pub fn new(d: usize) -> Result<Self> {
        check_dim(d)?;
        let norm = cos_power_integral(d);
        let di = d as i32;
        let step = std::f64::consts::PI / SLICE_NODES as f64;
        let lo = -std::f64::consts::FRAC_PI_2;
        let pieces: Vec<f64> = (0..SLICE_NODES)
            .into_par_iter()
            .map(|k| {
                let a = lo + k as f64 * step;
                simpson(&|p: f64| p.cos().powi(di), a, a + step, 1e-17)
            })
            .collect();
        let mut values = Vec::with_capacity(SLICE_NODES + 1);
        let mut acc = CompensatedSum::new();
        values.push(0.0);
        for p in pieces {
            acc.add(p);
            values.push(acc.value() / norm);
        }
        *values.last_mut().expect("nonempty") = 1.0;
        Ok(Self {
            dim: d,
            norm,
            step,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Fraction left of offset `c ∈ [-1,1]` (clamped outside).
    pub fn eval(&self, c: f64) -> f64 {
        if c <= -1.0 {
            return 0.0;
        }
        if c >= 1.0 {
            return 1.0;
        }
        let phi = c.asin() + std::f64::consts::FRAC_PI_2;
        let pos = phi / self.step;
        let k = (pos.floor() as usize).min(SLICE_NODES - 1);
        let u = pos - k as f64;
        let di = self.dim as i32;
        let lo = -std::f64::consts::FRAC_PI_2;
        let d0 = (lo + k as f64 * self.step).cos().powi(di) / self.norm * self.step;
        let d1 = (lo + (k + 1) as f64 * self.step).cos().powi(di) / self.norm * self.step;
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let u2 = u * u;
        let u3 = u2 * u;
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        (h00 * y0 + h10 * d0 + h01 * y1 + h11 * d1).clamp(0.0, 1.0)
    }

    /// Offset `c` with `eval(c) = u`.
    pub fn inverse(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return -1.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        bisect_increasing(|c| self.eval(c), u, -1.0, 1.0, 1e-15)
    }
}

/// `s_{r,y}(x)`: normalized ball measure of `{P_1 z ≤ P_1 x}`.
pub fn s_map(ball: &Ball, x: &[f64]) -> Result<f64> {
    let c = ((x[0] - ball.center[0]) / ball.radius).clamp(-1.0, 1.0);
    slice_fraction(ball.dim(), c)
}

/// `(f'(s_{r,y}(x)))^{-1}`, the factor turning `W` into `Z`.
pub fn z_weight(ball: &Ball, x: &[f64]) -> Result<f64> {
    Ok(inverse_f_prime(ball.dim(), s_map(ball, x)?))
}

/// Measure on a ball with density `cap(B_r)·f'(s_{r,y})` against normalized Lebesgue measure.
#[derive(Debug, Clone)]
pub struct DistortedMeasure {
    pub ball: Ball,
    pub capacity: f64,
    slice: SliceMap,
}

impl DistortedMeasure {
    pub fn new(ball: Ball) -> Result<Self> {
        let d = ball.dim();
        check_dim(d)?;
        Ok(Self {
            capacity: ball_capacity(d, ball.radius)?,
            slice: SliceMap::new(d)?,
            ball,
        })
    }

    pub fn dim(&self) -> usize {
        self.ball.dim()
    }

    pub fn slice_map(&self) -> &SliceMap {
        &self.slice
    }

    /// `s` as a function of the first coordinate.
    pub fn s_of_x1(&self, x1: f64) -> f64 {
        self.slice.eval((x1 - self.ball.center[0]) / self.ball.radius)
    }

    /// First coordinate where `s` reaches `u`.
    pub fn x1_of_s(&self, u: f64) -> f64 {
        self.ball.center[0] + self.ball.radius * self.slice.inverse(u)
    }

    pub fn s(&self, x: &[f64]) -> f64 {
        self.s_of_x1(x[0])
    }

    pub fn density(&self, x: &[f64]) -> f64 {
        self.capacity * f_prime(self.dim(), self.s(x))
    }

    pub fn z_weight(&self, x: &[f64]) -> f64 {
        inverse_f_prime(self.dim(), self.s(x))
    }
}

/// Target value of `s` on the boundary of `{1/f'(s) ≥ δ}`: `((d-2)δ/d)^{d/2}`.
pub fn delta_level(d: usize, delta: f64) -> f64 {
    let df = d as f64;
    ((df - 2.0) * delta / df).powf(df / 2.0)
}

/// `σ(δ)`: first coordinate, in the chart of `B_1(e)` with `e = (1,0,…)`, where `1/f'(s) = δ`.
pub fn sigma_delta(d: usize, delta: f64) -> Result<f64> {
    check_dim(d)?;
    let target = delta_level(d, delta);
    if !(target > 0.0 && target < 1.0) {
        return Err(out_of_range("((d-2)delta/d)^(d/2)", target, "(0, 1)"));
    }
    let map = SliceMap::new(d)?;
    Ok(1.0 + map.inverse(target))
}

/// Largest `δ` with `σ(δ) ≤ 1 − d^{-1/2}`, i.e. the inscribed cube lies where `1/f'(s) ≥ δ`.
pub fn max_inscribed_delta(d: usize) -> Result<f64> {
    check_dim(d)?;
    let s = slice_fraction(d, -1.0 / (d as f64).sqrt())?;
    Ok(inverse_f_prime(d, s))
}

/// Region for mass queries: a box whose bounds may be infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Region {
    pub fn whole(d: usize) -> Self {
        Self {
            lo: vec![f64::NEG_INFINITY; d],
            hi: vec![f64::INFINITY; d],
        }
    }

    pub fn empty(d: usize) -> Self {
        Self {
            lo: vec![0.0; d],
            hi: vec![-1.0; d],
        }
    }

    /// `{x_1 ≤ x1_max}`
    pub fn half_space(d: usize, x1_max: f64) -> Self {
        let mut r = Self::whole(d);
        r.hi[0] = x1_max;
        r
    }

    pub fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(a, b)| a >= b)
    }
}

impl From<&AxisBox> for Region {
    fn from(b: &AxisBox) -> Self {
        Self {
            lo: b.lo.clone(),
            hi: b.hi.clone(),
        }
    }
}

/// Resolution of the slab quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridOptions {
    pub slabs: usize,
    pub transverse: usize,
    pub allow_high_dim: bool,
}

impl GridOptions {
    /// `128` slabs; transverse resolution shrinking with dimension.
    pub fn default_for(d: usize) -> Self {
        let transverse = match d {
            0..=3 => 128,
            4 => 32,
            _ => 12,
        };
        Self {
            slabs: 128,
            transverse,
            allow_high_dim: false,
        }
    }
}

/// Transverse cells of one slab: inclusion flags as a summed-area table.
#[derive(Debug, Clone)]
struct SlabSection {
    count: u32,
    prefix: Vec<u32>,
}

/// Quadrature for `μ_s` and `m_{d,r}` on a ball.
///
/// Both measures are integrated exactly in the first coordinate through `s` and `f(s)`;
/// the transverse share of a region is the fraction of in-ball transverse cells it contains.
/// Since every slab carries `Δf` against `Δs` with the same weights, sublevel sets of `s`
/// are exact and `μ_s(A) ≤ cap·f(m(A))` holds without discretization error.
#[derive(Debug, Clone)]
pub struct SlabQuadrature {
    measure: DistortedMeasure,
    options: GridOptions,
    edges: Vec<f64>,
    s_edges: Vec<f64>,
    sections: Vec<SlabSection>,
}

impl SlabQuadrature {
    pub fn new(measure: DistortedMeasure, options: GridOptions) -> Result<Self> {
        let d = measure.dim();
        if d > DEFAULT_MAX_DIM && !options.allow_high_dim {
            return Err(invalid("d", format!("dimension {d} needs allow_high_dim")));
        }
        if options.slabs == 0 || options.transverse == 0 {
            return Err(invalid("options", "resolution must be positive"));
        }
        let (y1, r) = (measure.ball.center[0], measure.ball.radius);
        let n = options.slabs;
        let edges: Vec<f64> = (0..=n).map(|i| y1 - r + 2.0 * r * i as f64 / n as f64).collect();
        let s_edges: Vec<f64> = edges
            .iter()
            .enumerate()
            .map(|(i, x)| match i {
                0 => 0.0,
                i if i == n => 1.0,
                _ => measure.s_of_x1(*x),
            })
            .collect();
        let nt = options.transverse;
        let k = d - 1;
        let cells = nt.pow(k as u32);
        let h = 2.0 * r / nt as f64;
        let centers: Vec<f64> = (0..nt).map(|j| -r + (j as f64 + 0.5) * h).collect();
        let sections = (0..n)
            .into_par_iter()
            .map(|i| {
                let mid = 0.5 * (edges[i] + edges[i + 1]) - y1;
                let rho2 = r * r - mid * mid;
                let mut flags = vec![0u32; cells];
                let mut count = 0u32;
                for (c, flag) in flags.iter_mut().enumerate() {
                    let mut rem = c;
                    let mut norm2 = 0.0;
                    for _ in 0..k {
                        let v = centers[rem % nt];
                        norm2 += v * v;
                        rem /= nt;
                    }
                    if norm2 < rho2 {
                        *flag = 1;
                        count += 1;
                    }
                }
                if count == 0 {
                    let mut c = 0;
                    for _ in 0..k {
                        c = c * nt + nt / 2;
                    }
                    flags[c] = 1;
                    count = 1;
                }
                SlabSection {
                    count,
                    prefix: summed_area(&flags, nt, k),
                }
            })
            .collect();
        Ok(Self {
            measure,
            options,
            edges,
            s_edges,
            sections,
        })
    }

    pub fn measure(&self) -> &DistortedMeasure {
        &self.measure
    }

    pub fn options(&self) -> GridOptions {
        self.options
    }

    /// Transverse cell index range `[a, b)` whose centers lie in `[lo, hi]` on axis `axis`.
    fn transverse_range(&self, axis: usize, lo: f64, hi: f64) -> (usize, usize) {
        let nt = self.options.transverse as f64;
        let r = self.measure.ball.radius;
        let h = 2.0 * r / nt;
        let y = self.measure.ball.center[axis];
        let a = ((lo - y + r) / h - 0.5).ceil().max(0.0);
        let b = ((hi - y + r) / h - 0.5).floor() + 1.0;
        let b = b.min(nt).max(0.0);
        (a.min(nt) as usize, b.max(a.min(nt)) as usize)
    }

    /// `(μ_s(A), m_{d,r}(A))`
    pub fn masses(&self, region: &Region) -> (f64, f64) {
        if region.is_empty() {
            return (0.0, 0.0);
        }
        let d = self.measure.dim();
        let nt = self.options.transverse;
        let ranges: Vec<(usize, usize)> = (1..d)
            .map(|k| self.transverse_range(k, region.lo[k], region.hi[k]))
            .collect();
        if ranges.iter().any(|(a, b)| a >= b) {
            return (0.0, 0.0);
        }
        let first = self.edges.partition_point(|e| *e <= region.lo[0]).saturating_sub(1);
        let mut mu = CompensatedSum::new();
        let mut m = CompensatedSum::new();
        for i in first..self.options.slabs {
            let (a, b) = (self.edges[i], self.edges[i + 1]);
            if a >= region.hi[0] {
                break;
            }
            let lo = a.max(region.lo[0]);
            let hi = b.min(region.hi[0]);
            if lo >= hi {
                continue;
            }
            let s_lo = if lo == a {
                self.s_edges[i]
            } else {
                self.measure.s_of_x1(lo)
            };
            let s_hi = if hi == b {
                self.s_edges[i + 1]
            } else {
                self.measure.s_of_x1(hi)
            };
            let sec = &self.sections[i];
            let inside = box_count(&sec.prefix, nt, &ranges);
            if inside == 0 {
                continue;
            }
            let share = inside as f64 / sec.count as f64;
            let d_f = f_power(d, s_hi) - f_power(d, s_lo);
            mu.add(d_f * share);
            m.add((s_hi - s_lo) * share);
        }
        (self.measure.capacity * mu.value(), m.value())
    }

    pub fn mu_s(&self, region: &Region) -> f64 {
        self.masses(region).0
    }
}

/// Summed-area table of a `k`-dimensional `nt^k` array, with a zero border.
fn summed_area(flags: &[u32], nt: usize, k: usize) -> Vec<u32> {
    let side = nt + 1;
    let size = side.pow(k as u32);
    let mut table = vec![0u32; size];
    for (c, f) in flags.iter().enumerate() {
        let mut rem = c;
        let mut idx = 0;
        let mut stride = 1;
        for _ in 0..k {
            idx += (rem % nt + 1) * stride;
            rem /= nt;
            stride *= side;
        }
        table[idx] = *f;
    }
    let mut stride = 1;
    for _ in 0..k {
        for idx in 0..size {
            if (idx / stride) % side != 0 {
                table[idx] += table[idx - stride];
            }
        }
        stride *= side;
    }
    table
}

/// Number of flagged cells in the index box `ranges` (one `[a,b)` per axis).
fn box_count(prefix: &[u32], nt: usize, ranges: &[(usize, usize)]) -> u32 {
    let side = nt + 1;
    let k = ranges.len();
    let mut total: i64 = 0;
    for corner in 0..(1usize << k) {
        let mut idx = 0;
        let mut stride = 1;
        let mut sign = 1i64;
        for (axis, (a, b)) in ranges.iter().enumerate() {
            if corner & (1 << axis) != 0 {
                idx += a * stride;
                sign = -sign;
            } else {
                idx += b * stride;
            }
            stride *= side;
        }
        total += sign * prefix[idx] as i64;
    }
    total as u32
}

pub fn mu_s_mass(quadrature: &SlabQuadrature, region: &Region) -> f64 {
    quadrature.mu_s(region)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominanceMargin {
    pub mu_s: f64,
    pub lebesgue: f64,
    pub bound: f64,
    /// `bound − μ_s`
    pub margin: f64,
}

/// `cap·f(m(A)) − μ_s(A)` for every region.
pub fn hl_dominance_check(quadrature: &SlabQuadrature, regions: &[Region]) -> Vec<DominanceMargin> {
    let d = quadrature.measure().dim();
    let cap = quadrature.measure().capacity;
    regions
        .par_iter()
        .map(|reg| {
            let (mu_s, lebesgue) = quadrature.masses(reg);
            let bound = cap * f_power(d, lebesgue);
            DominanceMargin {
                mu_s,
                lebesgue,
                bound,
                margin: bound - mu_s,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaReport {
    pub delta: f64,
    pub q: f64,
    pub kappa: f64,
}

/// `κ = δ q (d−2)/d` with `q = μ_s(cube)/μ_s(ball)`.
pub fn kappa_const(delta: f64, quadrature: &SlabQuadrature, cube: &AxisBox) -> Result<KappaReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(out_of_range("delta", delta, "(0, 1)"));
    }
    let d = quadrature.measure().dim() as f64;
    let whole = quadrature.mu_s(&Region::whole(cube.dim()));
    let q = quadrature.mu_s(&Region::from(cube)) / whole;
    Ok(KappaReport {
        delta,
        q,
        kappa: delta * q * (d - 2.0) / d,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalDiscrepancy {
    pub a: f64,
    pub b: f64,
    pub lebesgue: f64,
    pub preimage: f64,
    pub discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PushforwardReport {
    pub slabs: usize,
    pub transverse: usize,
    pub intervals: Vec<IntervalDiscrepancy>,
    pub max_discrepancy: f64,
}

/// Compares `|B|` with the grid measure of `s^{-1}(B)` for intervals `B ⊆ [0,1]`.
///
/// Cells are counted by their lower corner (a first-order rule); the preimage, a slab
/// in the first coordinate, is cut exactly.
pub fn pushforward_check(
    measure: &DistortedMeasure,
    slabs: usize,
    transverse: usize,
    intervals: &[(f64, f64)],
) -> Result<PushforwardReport> {
    let d = measure.dim();
    if slabs == 0 || transverse == 0 {
        return Err(invalid("resolution", "must be positive"));
    }
    let cells = (transverse as u64).checked_pow(d as u32 - 1).unwrap_or(u64::MAX);
    if cells > 50_000_000 {
        return Err(Error::TooLarge {
            what: "transverse grid".into(),
            limit: 50_000_000,
        });
    }
    for (a, b) in intervals {
        if !(0.0 <= *a && a <= b && *b <= 1.0) {
            return Err(invalid("interval", format!("[{a}, {b}] is not inside [0, 1]")));
        }
    }
    let (y1, r) = (measure.ball.center[0], measure.ball.radius);
    let h = 2.0 * r / slabs as f64;
    let ht = 2.0 * r / transverse as f64;
    let lower: Vec<f64> = (0..transverse).map(|j| -r + j as f64 * ht).collect();
    let mut norms: Vec<f64> = (0..cells as usize)
        .map(|c| {
            let mut rem = c;
            let mut n2 = 0.0;
            for _ in 0..d - 1 {
                let v = lower[rem % transverse];
                n2 += v * v;
                rem /= transverse;
            }
            n2
        })
        .collect();
    norms.sort_by(f64::total_cmp);
    let edges: Vec<f64> = (0..=slabs).map(|i| y1 - r + i as f64 * h).collect();
    let area: Vec<f64> = (0..slabs)
        .map(|i| {
            let x = edges[i] - y1;
            let rho2 = r * r - x * x;
            norms.partition_point(|n| *n < rho2) as f64
        })
        .collect();
    let total: f64 = area.iter().map(|a| a * h).sum();
    let results: Vec<IntervalDiscrepancy> = intervals
        .iter()
        .map(|(a, b)| {
            let lo = measure.x1_of_s(*a);
            let hi = measure.x1_of_s(*b);
            let mut acc = CompensatedSum::new();
            let first = edges.partition_point(|e| *e <= lo).saturating_sub(1);
            for i in first..slabs {
                let ov = edges[i + 1].min(hi) - edges[i].max(lo);
                if edges[i] >= hi {
                    break;
                }
                if ov > 0.0 {
                    acc.add(ov * area[i]);
                }
            }
            let preimage = acc.value() / total;
            let lebesgue = b - a;
            IntervalDiscrepancy {
                a: *a,
                b: *b,
                lebesgue,
                preimage,
                discrepancy: (lebesgue - preimage).abs(),
            }
        })
        .collect();
    let max_discrepancy = results.iter().map(|r| r.discrepancy).fold(0.0, f64::max);
    Ok(PushforwardReport {
        slabs,
        transverse,
        intervals: results,
        max_discrepancy,
    })
}

/// Piecewise-constant field on a box split into equal blocks, constant outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepField {
    pub bbox: AxisBox,
    pub blocks: Vec<usize>,
    /// Lexicographic by block index.
    pub values: Vec<f64>,
    pub outside: f64,
}

impl StepField {
    pub fn new(bbox: AxisBox, blocks: Vec<usize>, values: Vec<f64>, outside: f64) -> Result<Self> {
        if blocks.len() != bbox.dim() || blocks.contains(&0) {
            return Err(invalid("blocks", "one positive count per axis"));
        }
        if values.len() != blocks.iter().product::<usize>() {
            return Err(invalid("values", "one value per block"));
        }
        if values
            .iter()
            .chain(std::iter::once(&outside))
            .any(|v| !(*v >= 0.0) || !v.is_finite())
        {
            return Err(invalid("values", "must be finite and nonnegative"));
        }
        Ok(Self {
            bbox,
            blocks,
            values,
            outside,
        })
    }

    pub fn constant(bbox: AxisBox, value: f64) -> Result<Self> {
        let d = bbox.dim();
        Self::new(bbox, vec![1; d], vec![value], value)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        if !self.bbox.contains(x) {
            return self.outside;
        }
        let mut idx = 0;
        for (k, &xk) in x.iter().enumerate() {
            let (a, b) = (self.bbox.lo[k], self.bbox.hi[k]);
            let n = self.blocks[k];
            let j = (((xk - a) / (b - a)) * n as f64).floor() as usize;
            idx = idx * n + j.min(n - 1);
        }
        self.values[idx]
    }
}

/// Setup of the inequality `Z̄^⋆_{μ_s}(κt) ≥ δ·W̄^⋆(t)` on one ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma42Setup {
    /// Which of the `2^d` sub-cubes of the inscribed cube: bit `k` set = upper half on axis `k`.
    pub orthant: u32,
    /// Grid cells per side of the sub-cube.
    pub cells_per_side: usize,
}

impl Default for Lemma42Setup {
    fn default() -> Self {
        Self {
            orthant: 1,
            cells_per_side: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma42Report {
    pub delta: f64,
    pub sigma: f64,
    pub t: f64,
    pub q: f64,
    pub kappa: f64,
    pub sub_cube: AxisBox,
    /// `Z̄^⋆_{μ_s}(κ t μ_s(B))`
    pub lhs: f64,
    /// `δ·W̄^⋆(t·m(Q̃), Q̃)`
    pub rhs: f64,
    pub ok: bool,
}

/// Corner-anchored sub-cube of side `r/√d` of the cube inscribed in the ball.
pub fn inscribed_sub_cube(ball: &Ball, orthant: u32) -> AxisBox {
    let a = ball.radius / (ball.dim() as f64).sqrt();
    let (lo, hi) = ball
        .center
        .iter()
        .enumerate()
        .map(|(k, y)| {
            if orthant & (1 << k) != 0 {
                (*y, y + a)
            } else {
                (y - a, *y)
            }
        })
        .unzip();
    AxisBox { lo, hi }
}

/// Evaluates both sides on a grid aligned with the sub-cube. `μ_s` and the Lebesgue measure
/// share the slab rule of [`SlabQuadrature`], so the inequality holds for the discrete model
/// exactly when it holds in the continuum argument.
pub fn lemma42_check(
    measure: &DistortedMeasure,
    field: &StepField,
    t: f64,
    delta: f64,
    setup: &Lemma42Setup,
    slack: f64,
) -> Result<Lemma42Report> {
    let d = measure.dim();
    if !(t > 0.0 && t < 1.0) {
        return Err(out_of_range("t", t, "(0, 1)"));
    }
    let sigma = sigma_delta(d, delta)?;
    if sigma > 1.0 - 1.0 / (d as f64).sqrt() {
        return Err(Error::Hypothesis(format!(
            "sigma(delta) = {sigma} exceeds 1 - d^(-1/2); the inscribed cube leaves the region 1/f'(s) >= delta"
        )));
    }
    if setup.cells_per_side == 0 || setup.orthant >= (1 << d) {
        return Err(invalid("setup", "bad orthant or resolution"));
    }
    let ball = &measure.ball;
    let (y, r) = (&ball.center, ball.radius);
    let sub = inscribed_sub_cube(ball, setup.orthant);
    let h = r / (d as f64).sqrt() / setup.cells_per_side as f64;
    let reach = (r / h).ceil() as i64;
    let width = (2 * reach) as usize;
    let edge = |k: usize, i: i64| y[k] + i as f64 * h;

    // Slabs in x1, with s and f(s) at the clipped edges.
    let x_lo = y[0] - r;
    let x_hi = y[0] + r;
    let mut mu_atoms: Vec<(f64, f64)> = Vec::new();
    let mut sub_atoms: Vec<(f64, f64)> = Vec::new();
    let mut mu_total = CompensatedSum::new();
    let mut mu_sub = CompensatedSum::new();
    let mut m_sub = CompensatedSum::new();
    let k = d - 1;
    let cells = width.pow(k as u32);
    let mut x = vec![0.0; d];
    for i in -reach..reach {
        let (a, b) = (edge(0, i).max(x_lo), edge(0, i + 1).min(x_hi));
        if a >= b {
            continue;
        }
        let s_a = if a <= x_lo { 0.0 } else { measure.s_of_x1(a) };
        let s_b = if b >= x_hi { 1.0 } else { measure.s_of_x1(b) };
        let mid = edge(0, i) + 0.5 * h;
        x[0] = mid;
        let rho2 = r * r - (mid - y[0]) * (mid - y[0]);
        let mut members = Vec::new();
        for c in 0..cells {
            let mut rem = c;
            let mut n2 = 0.0;
            for (axis, &ya) in y.iter().enumerate().take(d).skip(1) {
                let j = (rem % width) as i64 - reach;
                rem /= width;
                let v = edge(axis, j) + 0.5 * h;
                n2 += (v - ya) * (v - ya);
            }
            if n2 < rho2 {
                members.push(c);
            }
        }
        if members.is_empty() {
            let mut c = 0;
            for _ in 0..k {
                c = c * width + reach as usize;
            }
            members.push(c);
        }
        let n = members.len() as f64;
        let dm = (s_b - s_a) / n;
        let dmu = measure.capacity * (f_power(d, s_b) - f_power(d, s_a)) / n;
        let weight = inverse_f_prime(d, measure.s_of_x1(mid));
        for c in members {
            let mut rem = c;
            let mut dims = Vec::with_capacity(k);
            for _ in 0..k {
                dims.push((rem % width) as i64 - reach);
                rem /= width;
            }
            // `c` was built with axis 1 as the fastest digit.
            for (axis, j) in (1..d).zip(dims.iter()) {
                x[axis] = edge(axis, *j) + 0.5 * h;
            }
            let w = field.eval(&x);
            mu_atoms.push((w * weight, dmu));
            mu_total.add(dmu);
            if sub.contains(&x) {
                sub_atoms.push((w, dm));
                mu_sub.add(dmu);
                m_sub.add(dm);
            }
        }
    }
    if sub_atoms.is_empty() {
        return Err(Error::EmptyRestriction);
    }
    let mu_ball = mu_total.value();
    let q = mu_sub.value() / mu_ball;
    let kappa = delta * q * (d as f64 - 2.0) / d as f64;

    mu_atoms.sort_by(|p, q| p.0.total_cmp(&q.0));
    sub_atoms.sort_by(|p, q| p.0.total_cmp(&q.0));
    let z_profile = DistributionProfile::from_sorted_pairs(&mu_atoms, mu_ball);
    let w_profile = DistributionProfile::from_sorted_pairs(&sub_atoms, m_sub.value());
    let lhs = z_profile.nonincreasing_any(kappa * t * mu_ball);
    let rhs = delta * w_profile.nonincreasing_any(t * m_sub.value());
    let ok = lhs >= rhs - slack;
    Ok(Lemma42Report {
        delta,
        sigma,
        t,
        q,
        kappa,
        sub_cube: sub,
        lhs,
        rhs,
        ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_ball(d: usize) -> Ball {
        Ball::new(vec![0.0; d], 1.0).unwrap()
    }

    #[test]
    fn slice_fraction_examples() {
        assert!((slice_fraction(3, 0.0).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(slice_fraction(3, 1.0).unwrap(), 1.0);
        assert!((slice_fraction(3, 0.5).unwrap() - 27.0 / 32.0).abs() < 1e-10);
        assert!(slice_fraction(3, 1.5).is_err());
        assert!(slice_fraction(2, 0.0).is_err());
    }

    #[test]
    fn table_matches_closed_form_in_three_dimensions() {
        let map = SliceMap::new(3).unwrap();
        let mut prev = -1.0;
        for i in 0..=4000 {
            let c = -1.0 + 2.0 * i as f64 / 4000.0;
            let exact = (2.0 + 3.0 * c - c * c * c) / 4.0;
            let v = map.eval(c);
            assert!((v - exact).abs() < 1e-12, "c = {c}");
            assert!(v >= prev);
            prev = v;
        }
        assert!((map.inverse(27.0 / 32.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn s_map_and_weight() {
        let b = unit_ball(3);
        assert!((s_map(&b, &[0.0, 0.3, 0.1]).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(s_map(&b, &[-1.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!((z_weight(&b, &[0.0; 3]).unwrap() - 1.889881574842309).abs() < 1e-9);
        assert_eq!(z_weight(&b, &[-1.0, 0.0, 0.0]).unwrap(), 0.0);
        let m = DistortedMeasure::new(b).unwrap();
        for x1 in [-0.9, -0.2, 0.4, 0.95] {
            let x = [x1, 0.0, 0.0];
            assert!((m.z_weight(&x) * m.density(&x) / m.capacity - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn s_map_scale_translation_identity() {
        let b = Ball::new(vec![2.0, -1.0, 0.5], 0.25).unwrap();
        let e = Ball::new(vec![1.0, 0.0, 0.0], 1.0).unwrap();
        for x1 in [1.8, 1.9, 2.0, 2.2] {
            let x = [x1, -1.0, 0.5];
            let z: Vec<f64> = [x1 - (2.0 - 0.25), 0.0, 0.0].iter().map(|v| v / 0.25).collect();
            assert!((s_map(&b, &x).unwrap() - s_map(&e, &z).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn sigma_round_trip() {
        for d in [3, 4, 5] {
            let dd = d as f64;
            let half = dd / (dd - 2.0) * 0.5f64.powf(2.0 / dd);
            assert!((sigma_delta(d, half).unwrap() - 1.0).abs() < 1e-10);
            let mut prev = 0.0;
            for delta in [0.2, 0.5, 0.9, 1.2] {
                let s = sigma_delta(d, delta).unwrap();
                let back = slice_fraction(d, s - 1.0).unwrap();
                assert!((back - delta_level(d, delta)).abs() < 1e-9);
                assert!(s > prev);
                prev = s;
            }
        }
        assert!(sigma_delta(3, 10.0).is_err());
    }

    #[test]
    fn density_minimum_is_attained_at_the_far_pole() {
        for d in [3, 4, 5] {
            let dd = d as f64;
            let lo = (0..=1000)
                .map(|i| f_prime(d, i as f64 / 1000.0))
                .fold(f64::MAX, f64::min);
            assert!((lo - (dd - 2.0) / dd).abs() < 1e-15);
            assert!((f_prime(d, 0.3) * 0.3f64.powf(2.0 / dd) - (dd - 2.0) / dd).abs() < 1e-15);
        }
    }

    #[test]
    fn summed_area_counts() {
        let nt = 3;
        let flags: Vec<u32> = (0..9).map(|i| (i % 2) as u32).collect();
        let table = summed_area(&flags, nt, 2);
        assert_eq!(box_count(&table, nt, &[(0, 3), (0, 3)]), 4);
        assert_eq!(box_count(&table, nt, &[(1, 2), (0, 3)]), 2);
        assert_eq!(box_count(&table, nt, &[(0, 1), (0, 1)]), 0);
    }

    #[test]
    fn quadrature_total_and_half() {
        let m = DistortedMeasure::new(unit_ball(3)).unwrap();
        let q = SlabQuadrature::new(
            m,
            GridOptions {
                slabs: 64,
                transverse: 32,
                allow_high_dim: false,
            },
        )
        .unwrap();
        let cap = q.measure().capacity;
        let (mu, leb) = q.masses(&Region::whole(3));
        assert!((mu - cap).abs() < 1e-12 * cap && (leb - 1.0).abs() < 1e-12);
        let half = q.mu_s(&Region::half_space(3, 0.0));
        assert!((half - cap * 0.5f64.powf(1.0 / 3.0)).abs() < 1e-10);
        assert_eq!(q.mu_s(&Region::empty(3)), 0.0);
    }

    #[test]
    fn high_dimensions_need_opt_in() {
        let m = DistortedMeasure::new(unit_ball(6)).unwrap();
        let mut o = GridOptions::default_for(6);
        o.transverse = 4;
        assert!(SlabQuadrature::new(m.clone(), o).is_err());
        o.allow_high_dim = true;
        assert!(SlabQuadrature::new(m, o).is_ok());
    }

    #[test]
    fn pushforward_trivial_intervals() {
        let m = DistortedMeasure::new(unit_ball(3)).unwrap();
        let rep = pushforward_check(&m, 100, 50, &[(0.0, 1.0), (0.0, 0.5)]).unwrap();
        assert!(rep.intervals[0].discrepancy < 1e-12);
        assert!(rep.intervals[1].discrepancy < 1e-2);
    }

    #[test]
    fn distorted_inequality_trivial_fields() {
        let ball = unit_ball(3);
        let m = DistortedMeasure::new(ball.clone()).unwrap();
        let delta = 0.9 * max_inscribed_delta(3).unwrap();
        let setup = Lemma42Setup::default();
        let zero = StepField::constant(ball.bounding_box(), 0.0).unwrap();
        let rep = lemma42_check(&m, &zero, 0.5, delta, &setup, 1e-9).unwrap();
        assert!(rep.ok && rep.lhs == 0.0 && rep.rhs == 0.0);
        let sub = inscribed_sub_cube(&ball, setup.orthant);
        let indicator = StepField::new(sub, vec![1, 1, 1], vec![1.0], 0.0).unwrap();
        let rep = lemma42_check(&m, &indicator, 0.5, delta, &setup, 1e-9).unwrap();
        assert!(rep.ok, "{rep:?}");
        assert!(rep.kappa < delta * rep.q);
        assert!(lemma42_check(&m, &zero, 0.5, 1.8, &setup, 1e-9).is_err());
    }
}
