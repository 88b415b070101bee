//! Boxes, cubes, balls, star-shaped domains, m-adic cells and capacity constants.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, out_of_range, Error, Result};

pub type Rat = Ratio<i128>;

/// Axis-aligned box `×[lo_k, hi_k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(invalid("box", "lo and hi must have the same positive length"));
        }
        for k in 0..lo.len() {
            if !(lo[k] < hi[k]) || !lo[k].is_finite() || !hi[k].is_finite() {
                return Err(Error::EmptyBox { axis: k });
            }
        }
        Ok(Self { lo, hi })
    }

    /// `[0,1]^d`.
    pub fn unit(d: usize) -> Self {
        Self {
            lo: vec![0.0; d],
            hi: vec![1.0; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    /// Intersection, or `None` if it has empty interior.
    pub fn intersect(&self, other: &AxisBox) -> Option<AxisBox> {
        let lo: Vec<f64> = self.lo.iter().zip(&other.lo).map(|(a, b)| a.max(*b)).collect();
        let hi: Vec<f64> = self.hi.iter().zip(&other.hi).map(|(a, b)| a.min(*b)).collect();
        if lo.iter().zip(&hi).all(|(a, b)| a < b) {
            Some(AxisBox { lo, hi })
        } else {
            None
        }
    }
}

/// `Q_r(y) = y + r·[-1,1]^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    pub center: Vec<f64>,
    pub half_width: f64,
}

impl Cube {
    pub fn new(center: Vec<f64>, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(out_of_range("half_width", half_width, "(0, inf)"));
        }
        Ok(Self { center, half_width })
    }

    pub fn to_box(&self) -> AxisBox {
        AxisBox {
            lo: self.center.iter().map(|c| c - self.half_width).collect(),
            hi: self.center.iter().map(|c| c + self.half_width).collect(),
        }
    }

    pub fn volume(&self) -> f64 {
        (2.0 * self.half_width).powi(self.center.len() as i32)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.center)
            .all(|(v, c)| (v - c).abs() <= self.half_width)
    }
}

/// Open ball `B_r(y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(out_of_range("radius", radius, "(0, inf)"));
        }
        Ok(Self { center, radius })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let r2: f64 = x.iter().zip(&self.center).map(|(v, c)| (v - c) * (v - c)).sum();
        r2 < self.radius * self.radius
    }

    pub fn volume(&self) -> f64 {
        ball_volume(self.dim(), self.radius)
    }

    pub fn bounding_box(&self) -> AxisBox {
        Cube {
            center: self.center.clone(),
            half_width: self.radius,
        }
        .to_box()
    }
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    let (mut v, start) = if d % 2 == 0 { (1.0, 2) } else { (2.0, 3) };
    let mut k = start;
    while k <= d {
        v *= 2.0 * PI / k as f64;
        k += 2;
    }
    v
}

pub fn ball_volume(d: usize, r: f64) -> f64 {
    unit_ball_volume(d) * r.powi(d as i32)
}

fn check_capacity_dim(d: usize) -> Result<()> {
    if d < 3 {
        return Err(out_of_range("d", d as f64, "d >= 3"));
    }
    Ok(())
}

/// Constant of the isocapacity inequality `mes(F) <= c_d cap(F)^{d/(d-2)}`.
pub fn isocapacity_constant(d: usize) -> Result<f64> {
    check_capacity_dim(d)?;
    let df = d as f64;
    let base = df * (df - 2.0) * unit_ball_volume(d).powf(2.0 / df);
    Ok(base.powf(-df / (df - 2.0)))
}

/// Harmonic capacity of a closed ball of radius `r`.
pub fn ball_capacity(d: usize, r: f64) -> Result<f64> {
    check_capacity_dim(d)?;
    if !(r > 0.0) || !r.is_finite() {
        return Err(out_of_range("r", r, "(0, inf)"));
    }
    let df = d as f64;
    Ok(df * (df - 2.0) * unit_ball_volume(d) * r.powi(d as i32 - 2))
}

/// Star-shaped domain `{x : x/r(x/|x|) <= 1}` known through samples of its radial function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarDomain {
    pub dim: usize,
    pub radii: Vec<f64>,
    pub max_radius: f64,
    pub min_radius: f64,
}

impl StarDomain {
    pub fn from_radii(dim: usize, radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() {
            return Err(invalid("radii", "no directions sampled"));
        }
        if let Some(bad) = radii.iter().find(|r| !(**r > 0.0) || !r.is_finite()) {
            return Err(out_of_range("radius", *bad, "(0, inf)"));
        }
        let max_radius = radii.iter().cloned().fold(f64::MIN, f64::max);
        let min_radius = radii.iter().cloned().fold(f64::MAX, f64::min);
        Ok(Self {
            dim,
            radii,
            max_radius,
            min_radius,
        })
    }

    pub fn ball(dim: usize) -> Self {
        Self::from_radii(dim, vec![1.0]).expect("unit radius is valid")
    }

    /// `(max r / min r)^d`, at least 1.
    pub fn eccentricity(&self) -> f64 {
        (self.max_radius / self.min_radius).powi(self.dim as i32)
    }

    pub fn is_ball(&self) -> bool {
        self.max_radius == self.min_radius
    }
}

/// Anchoring of unit cubes and m-adic cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CubeChart {
    /// `Q_r(y) = y + r[-1,1]^d`; the unit cube `Q_1(l)` has side 2.
    Centered,
    /// `Q_r(y) = y + [0,r]^d`; the unit cube `Q_1(l)` has side 1.
    Corner,
}

/// Box with exact rational endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RatBox {
    pub lo: Vec<Rat>,
    pub hi: Vec<Rat>,
}

impl RatBox {
    pub fn new(lo: Vec<Rat>, hi: Vec<Rat>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(invalid("box", "lo and hi must have the same positive length"));
        }
        for k in 0..lo.len() {
            if lo[k] >= hi[k] {
                return Err(Error::EmptyBox { axis: k });
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> Rat {
        self.lo
            .iter()
            .zip(&self.hi)
            .fold(Rat::one(), |acc, (a, b)| acc * (b - a))
    }

    pub fn contains_box(&self, other: &RatBox) -> bool {
        (0..self.dim()).all(|k| self.lo[k] <= other.lo[k] && other.hi[k] <= self.hi[k])
    }

    pub fn translate(&self, shift: &[i64]) -> RatBox {
        let s: Vec<Rat> = shift.iter().map(|v| Rat::from_integer(*v as i128)).collect();
        RatBox {
            lo: self.lo.iter().zip(&s).map(|(a, b)| a + b).collect(),
            hi: self.hi.iter().zip(&s).map(|(a, b)| a + b).collect(),
        }
    }

    /// Cartesian product with another box.
    pub fn product(&self, other: &RatBox) -> RatBox {
        let mut lo = self.lo.clone();
        lo.extend(other.lo.iter().cloned());
        let mut hi = self.hi.clone();
        hi.extend(other.hi.iter().cloned());
        RatBox { lo, hi }
    }

    pub fn to_f64(&self) -> AxisBox {
        AxisBox {
            lo: self.lo.iter().map(rat_to_f64).collect(),
            hi: self.hi.iter().map(rat_to_f64).collect(),
        }
    }

    /// Pieces of `self` not covered by `cut`, pairwise disjoint up to faces.
    fn subtract(&self, cut: &RatBox) -> Vec<RatBox> {
        let d = self.dim();
        for k in 0..d {
            if cut.hi[k] <= self.lo[k] || cut.lo[k] >= self.hi[k] {
                return vec![self.clone()];
            }
        }
        let mut out = Vec::new();
        let mut rest = self.clone();
        for k in 0..d {
            if cut.lo[k] > rest.lo[k] {
                let mut piece = rest.clone();
                piece.hi[k] = cut.lo[k];
                out.push(piece);
                rest.lo[k] = cut.lo[k];
            }
            if cut.hi[k] < rest.hi[k] {
                let mut piece = rest.clone();
                piece.lo[k] = cut.hi[k];
                out.push(piece);
                rest.hi[k] = cut.hi[k];
            }
        }
        out
    }

    /// Exact test of `self ⊆ ∪ cover`.
    pub fn covered_by(&self, cover: &[RatBox]) -> bool {
        if cover.iter().any(|c| c.contains_box(self)) {
            return true;
        }
        let mut residue = vec![self.clone()];
        for c in cover {
            residue = residue.iter().flat_map(|r| r.subtract(c)).collect();
            if residue.is_empty() {
                return true;
            }
        }
        residue.is_empty()
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn rat_to_big(r: &Rat) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// Cell `Q(ξ, n)` of the m-adic partition of a unit cube; the anchor is `numer / m^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MadicCell {
    pub m: u32,
    pub level: u32,
    pub numer: Vec<i64>,
    pub chart: CubeChart,
}

impl MadicCell {
    pub fn denominator(&self) -> i128 {
        (self.m as i128).pow(self.level)
    }

    pub fn anchor(&self) -> Vec<Rat> {
        let den = self.denominator();
        self.numer.iter().map(|v| Rat::new(*v as i128, den)).collect()
    }

    pub fn to_rat_box(&self) -> RatBox {
        let den = self.denominator();
        let (lo_off, hi_off) = match self.chart {
            CubeChart::Centered => (-1, 1),
            CubeChart::Corner => (0, 1),
        };
        RatBox {
            lo: self.numer.iter().map(|v| Rat::new(*v as i128 + lo_off, den)).collect(),
            hi: self.numer.iter().map(|v| Rat::new(*v as i128 + hi_off, den)).collect(),
        }
    }

    pub fn to_box(&self) -> AxisBox {
        self.to_rat_box().to_f64()
    }

    pub fn volume(&self) -> Rat {
        self.to_rat_box().volume()
    }
}

/// Exact box of the unit cube `Q_1(l)` in the given chart.
pub fn unit_cube(l: &[i64], chart: CubeChart) -> RatBox {
    let (a, b) = match chart {
        CubeChart::Centered => (-1, 1),
        CubeChart::Corner => (0, 1),
    };
    RatBox {
        lo: l.iter().map(|v| Rat::from_integer((*v + a) as i128)).collect(),
        hi: l.iter().map(|v| Rat::from_integer((*v + b) as i128)).collect(),
    }
}

const CELL_ENUMERATION_BITS: f64 = 30.0;

/// All `m^{dn}` cells of level `n` tiling `Q_1(l)`, in lexicographic order.
pub fn madic_cells(l: &[i64], n: u32, m: u32, chart: CubeChart) -> Result<Vec<MadicCell>> {
    if n < 1 {
        return Err(out_of_range("n", n as f64, "n >= 1"));
    }
    if m < 2 {
        return Err(out_of_range("m", m as f64, "m >= 2"));
    }
    let d = l.len();
    if d == 0 {
        return Err(invalid("l", "empty index vector"));
    }
    let bits = d as f64 * n as f64 * (m as f64).log2();
    if bits > CELL_ENUMERATION_BITS {
        return Err(Error::TooLarge {
            what: format!("{m}^({d}*{n}) cells"),
            limit: 1 << 30,
        });
    }
    let per_axis = (m as i64).pow(n);
    let count = (per_axis as usize).pow(d as u32);
    let mut cells = Vec::with_capacity(count);
    let mut k = vec![0i64; d];
    loop {
        let numer = l
            .iter()
            .zip(&k)
            .map(|(li, ki)| match chart {
                CubeChart::Centered => li * per_axis - per_axis + 2 * ki + 1,
                CubeChart::Corner => li * per_axis + ki,
            })
            .collect();
        cells.push(MadicCell {
            m,
            level: n,
            numer,
            chart,
        });
        let mut axis = d;
        loop {
            if axis == 0 {
                return Ok(cells);
            }
            axis -= 1;
            k[axis] += 1;
            if k[axis] < per_axis {
                break;
            }
            k[axis] = 0;
        }
    }
}

/// Cells of `Ξ_n(l)` contained in the union `region`.
pub fn xi_subset(l: &[i64], n: u32, m: u32, chart: CubeChart, region: &[RatBox]) -> Result<Vec<MadicCell>> {
    if region.is_empty() {
        return Ok(Vec::new());
    }
    let cells = madic_cells(l, n, m, chart)?;
    Ok(cells
        .into_iter()
        .filter(|c| c.to_rat_box().covered_by(region))
        .collect())
}

/// Scale rule `r ↦ γ(r)` used by the discreteness conditions.
#[derive(Clone)]
pub enum GammaRule {
    /// `coeff · r^exponent`
    Power { coeff: f64, exponent: f64 },
    /// `coeff · r^exponent · ln(1/r)`
    PowerLog { coeff: f64, exponent: f64 },
    /// `(γ̃(r)/G)^{(d-2)/d}`
    FromTilde {
        tilde: Box<GammaRule>,
        eccentricity: f64,
        dim: usize,
    },
    Custom {
        name: String,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for GammaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

impl GammaRule {
    pub fn power(exponent: f64) -> Self {
        GammaRule::Power { coeff: 1.0, exponent }
    }

    pub fn power_log(exponent: f64) -> Self {
        GammaRule::PowerLog { coeff: 1.0, exponent }
    }

    pub fn custom(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        GammaRule::Custom {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            GammaRule::Power { coeff, exponent } => coeff * r.powf(*exponent),
            GammaRule::PowerLog { coeff, exponent } => coeff * r.powf(*exponent) * (1.0 / r).ln(),
            GammaRule::FromTilde {
                tilde,
                eccentricity,
                dim,
            } => {
                let d = *dim as f64;
                (tilde.eval(r) / eccentricity).powf((d - 2.0) / d)
            }
            GammaRule::Custom { f, .. } => f(r),
        }
    }

    /// Exact value at a rational radius when the rule is a unit power with integer exponent.
    pub fn eval_exact(&self, r: &BigRational) -> Option<BigRational> {
        match self {
            GammaRule::Power { coeff, exponent }
                if *coeff == 1.0 && exponent.fract() == 0.0 && exponent.abs() < 64.0 =>
            {
                let e = *exponent as i32;
                if r.is_zero() && e <= 0 {
                    return None;
                }
                Some(num_traits::pow::Pow::pow(r, e))
            }
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            GammaRule::Power { coeff, exponent } => format!("{coeff}*r^{exponent}"),
            GammaRule::PowerLog { coeff, exponent } => format!("{coeff}*r^{exponent}*ln(1/r)"),
            GammaRule::FromTilde {
                tilde,
                eccentricity,
                dim,
            } => format!("({}/{eccentricity})^(({dim}-2)/{dim})", tilde.describe()),
            GammaRule::Custom { name, .. } => name.clone(),
        }
    }
}

/// `γ(r) = (γ̃(r)/G)^{(d-2)/d}` for a star domain with eccentricity `G`.
pub fn gamma_from_tilde(tilde: &GammaRule, domain: &StarDomain) -> GammaRule {
    GammaRule::FromTilde {
        tilde: Box::new(tilde.clone()),
        eccentricity: domain.eccentricity(),
        dim: domain.dim,
    }
}

/// Finite surrogate for `limsup_{r→0} r^{-e} γ(r) = ∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityTrace {
    pub exponent: f64,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// Number of trailing samples that must each set a new maximum.
    pub record_window: usize,
    /// Required ratio `final / initial`.
    pub growth_factor: f64,
    pub trailing_records: usize,
    pub diverges: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibilityWindow {
    pub r0: f64,
    pub samples: usize,
    pub record_window: usize,
    pub growth_factor: f64,
}

impl Default for AdmissibilityWindow {
    fn default() -> Self {
        Self {
            r0: 1.0,
            samples: 40,
            record_window: 10,
            growth_factor: 10.0,
        }
    }
}

/// Evaluates `r_k^{-e} γ(r_k)` on `r_k = r0·2^{-k}` and applies the record/growth surrogate.
pub fn gamma_admissible(gamma: &GammaRule, exponent: f64, window: AdmissibilityWindow) -> Result<AdmissibilityTrace> {
    if window.samples < 2 || window.record_window == 0 || window.record_window >= window.samples {
        return Err(invalid("window", "need samples > record_window >= 1"));
    }
    let mut radii = Vec::with_capacity(window.samples);
    let mut values = Vec::with_capacity(window.samples);
    for k in 1..=window.samples {
        let r = window.r0 * 0.5f64.powi(k as i32);
        let g = gamma.eval(r);
        if !(g > 0.0 && g < 1.0) {
            return Err(out_of_range("gamma(r)", g, "(0, 1)"));
        }
        radii.push(r);
        values.push(r.powf(-exponent) * g);
    }
    let mut trailing_records = 0;
    let mut best = f64::NEG_INFINITY;
    let mut records = vec![false; values.len()];
    for (i, v) in values.iter().enumerate() {
        if *v > best {
            records[i] = i > 0;
            best = *v;
        }
    }
    for flag in records.iter().rev() {
        if *flag {
            trailing_records += 1;
        } else {
            break;
        }
    }
    let first = values[0];
    let last = *values.last().expect("nonempty");
    let diverges = trailing_records >= window.record_window && last >= window.growth_factor * first;
    Ok(AdmissibilityTrace {
        exponent,
        radii,
        values,
        record_window: window.record_window,
        growth_factor: window.growth_factor,
        trailing_records,
        diverges,
    })
}

/// Exact `3^e` (negative `e` allowed).
pub fn pow3_big(e: i64) -> BigRational {
    let p = BigInt::from(3u32).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-15);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn capacity_constant_in_three_dimensions() {
        let c = isocapacity_constant(3).unwrap();
        assert!((c - 1.0 / (48.0 * PI * PI)).abs() < 1e-16);
        assert!((c - 2.1109e-3).abs() < 1e-7);
        assert!(isocapacity_constant(2).is_err());
    }

    #[test]
    fn capacity_constant_in_four_dimensions() {
        // (8 (π²/2)^{1/2})^{-2} = 1/(32π²)
        let c = isocapacity_constant(4).unwrap();
        assert!((c - 1.0 / (32.0 * PI * PI)).abs() < 1e-16);
    }

    #[test]
    fn ball_capacity_scaling() {
        assert!((ball_capacity(3, 1.0).unwrap() - 4.0 * PI).abs() < 1e-12);
        assert!((ball_capacity(3, 2.0).unwrap() - 8.0 * PI).abs() < 1e-12);
        for d in 3..7 {
            let ratio = ball_capacity(d, 1.4).unwrap() / ball_capacity(d, 0.7).unwrap();
            assert!((ratio - 2f64.powi(d as i32 - 2)).abs() < 1e-12);
        }
    }

    #[test]
    fn madic_counts_and_tiling() {
        assert_eq!(madic_cells(&[0], 1, 3, CubeChart::Centered).unwrap().len(), 3);
        assert_eq!(madic_cells(&[0, 0], 2, 3, CubeChart::Centered).unwrap().len(), 81);
        let cells = madic_cells(&[0], 1, 3, CubeChart::Centered).unwrap();
        let boxes: Vec<RatBox> = cells.iter().map(|c| c.to_rat_box()).collect();
        assert_eq!(boxes[0].lo[0], Rat::from_integer(-1));
        assert_eq!(boxes[0].hi[0], Rat::new(-1, 3));
        assert_eq!(boxes[2].hi[0], Rat::from_integer(1));
        for w in boxes.windows(2) {
            assert_eq!(w[0].hi[0], w[1].lo[0]);
        }
        assert!(madic_cells(&[0; 4], 8, 3, CubeChart::Corner).is_err());
    }

    #[test]
    fn box_cover_by_adjacent_pieces() {
        let b = |lo: i128, hi: i128| RatBox::new(vec![Rat::new(lo, 4)], vec![Rat::new(hi, 4)]).unwrap();
        assert!(b(1, 3).covered_by(&[b(0, 2), b(2, 4)]));
        assert!(!b(1, 3).covered_by(&[b(0, 2), b(5, 6)]));
        assert!(!b(1, 3).covered_by(&[]));
    }

    #[test]
    fn gamma_from_tilde_examples() {
        let ball = StarDomain::ball(3);
        let g = gamma_from_tilde(&GammaRule::power(1.0), &ball);
        assert!((g.eval(0.125) - 0.5).abs() < 1e-15);
        let stretched = StarDomain::from_radii(3, vec![1.0, 2.0]).unwrap();
        assert_eq!(stretched.eccentricity(), 8.0);
        let g = gamma_from_tilde(&GammaRule::power(1.0), &stretched);
        assert!((g.eval(0.5) - (0.5f64 / 8.0).cbrt()).abs() < 1e-15);
    }

    #[test]
    fn admissibility_examples() {
        let w = AdmissibilityWindow::default();
        assert!(gamma_admissible(&GammaRule::power(1.5), 2.0, w).unwrap().diverges);
        assert!(!gamma_admissible(&GammaRule::power(2.0), 2.0, w).unwrap().diverges);
        let e = 2.0 / 3.0;
        let t = gamma_admissible(&GammaRule::power_log(e), e, w).unwrap();
        assert!(t.diverges);
        for (k, v) in t.values.iter().enumerate() {
            assert!((v - (k + 1) as f64 * 2f64.ln()).abs() < 1e-12);
        }
        assert!(gamma_admissible(&GammaRule::power(-1.0), 2.0, w).is_err());
    }
}
