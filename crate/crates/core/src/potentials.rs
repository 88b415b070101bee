//! The oscillating potential `V_α`: periodic indicators on Cantor adjacent intervals with
//! amplitude `N(l)` on each unit cube, and exact positivity measures.

use std::ops::{Add, Div, Mul, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::densesys::cantor_adjacent;
use crate::error::{invalid, out_of_range, Error, Result};
use crate::geometry::{pow3_big, rat_to_big, AxisBox, CubeChart, MadicCell, Rat};

/// Deepest Cantor level searched when locating a point.
pub const MAX_LOCATE_LEVEL: u32 = 60;

/// Number type for positivity computations: `f64` or exact `BigRational`.
pub trait Scalar:
    Clone + PartialOrd + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
    fn from_ratio(numer: i64, denom: i64) -> Self;
    fn floor(&self) -> Self;
    fn to_f64(&self) -> f64;
    /// `3^e`
    fn pow3(e: i64) -> Self;
    /// `3^{-α n}`, if representable.
    fn beta(alpha: &Alpha, n: u32) -> Option<Self>;
    /// `u ≤ 3^{-α n}`
    fn le_beta(u: &Self, alpha: &Alpha, n: u32) -> bool;

    fn zero() -> Self {
        Self::from_ratio(0, 1)
    }

    fn min_of(a: Self, b: Self) -> Self {
        if a <= b {
            a
        } else {
            b
        }
    }
}

impl Scalar for f64 {
    fn from_ratio(numer: i64, denom: i64) -> Self {
        numer as f64 / denom as f64
    }

    fn floor(&self) -> Self {
        f64::floor(*self)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn pow3(e: i64) -> Self {
        3f64.powi(e as i32)
    }

    fn beta(alpha: &Alpha, n: u32) -> Option<Self> {
        Some(alpha.beta(n))
    }

    fn le_beta(u: &Self, alpha: &Alpha, n: u32) -> bool {
        *u <= alpha.beta(n)
    }
}

impl Scalar for BigRational {
    fn from_ratio(numer: i64, denom: i64) -> Self {
        BigRational::new(BigInt::from(numer), BigInt::from(denom))
    }

    fn floor(&self) -> Self {
        BigRational::floor(self)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn pow3(e: i64) -> Self {
        pow3_big(e)
    }

    fn beta(alpha: &Alpha, n: u32) -> Option<Self> {
        let (p, q) = alpha.ratio?;
        let e = p as u64 * n as u64;
        (e % q as u64 == 0).then(|| pow3_big(-((e / q as u64) as i64)))
    }

    /// Exact for rational `α = p/q`: `u^q ≤ 3^{-pn}`; falls back to `f64` otherwise.
    fn le_beta(u: &Self, alpha: &Alpha, n: u32) -> bool {
        match alpha.ratio {
            Some((p, q)) => {
                if u.is_negative() || u.is_zero() {
                    return true;
                }
                let lhs = num_traits::pow::Pow::pow(u, q);
                lhs <= pow3_big(-((p as u64 * n as u64) as i64))
            }
            None => Scalar::to_f64(u) <= alpha.beta(n),
        }
    }
}

/// Exponent `α ∈ (0,2)`, optionally known as an exact fraction `p/q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Alpha {
    pub value: f64,
    pub ratio: Option<(u32, u32)>,
}

impl Alpha {
    pub fn new(value: f64) -> Result<Self> {
        if !(value > 0.0 && value < 2.0) {
            return Err(out_of_range("alpha", value, "(0, 2)"));
        }
        // Recognize small fractions so exact arithmetic is available.
        let ratio = (1..=12u32).find_map(|q| {
            let p = (value * q as f64).round();
            ((p / q as f64 - value).abs() < 1e-15).then_some((p as u32, q))
        });
        Ok(Self { value, ratio })
    }

    pub fn rational(p: u32, q: u32) -> Result<Self> {
        if q == 0 {
            return Err(invalid("alpha", "zero denominator"));
        }
        let value = p as f64 / q as f64;
        let mut a = Self::new(value)?;
        let g = num_integer::gcd(p, q);
        a.ratio = Some((p / g, q / g));
        Ok(a)
    }

    pub fn is_exact(&self) -> bool {
        self.ratio.is_some()
    }

    /// `3^{-α n}`
    pub fn beta(&self, n: u32) -> f64 {
        3f64.powf(-self.value * n as f64)
    }
}

/// `θ_β`, 1-periodic with value 1 on `(0, β]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicIndicator {
    pub beta: f64,
}

impl PeriodicIndicator {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(out_of_range("beta", beta, "(0, 1)"));
        }
        Ok(Self { beta })
    }

    pub fn eval(&self, x: f64) -> f64 {
        eval_theta(self.beta, x)
    }
}

/// Position of `x` in its period, in `(0, 1]`.
fn period_position<S: Scalar>(x: &S) -> S {
    let f = x.clone() - x.floor();
    if f <= S::zero() {
        S::from_ratio(1, 1)
    } else {
        f
    }
}

pub fn eval_theta(beta: f64, x: f64) -> f64 {
    if period_position(&x) <= beta {
        1.0
    } else {
        0.0
    }
}

/// Exact `θ_β(x)` for rational `x` and `β`.
pub fn eval_theta_exact(beta: &BigRational, x: &BigRational) -> bool {
    period_position(x) <= *beta
}

/// Level `n` with `x ∈ D_n` (closed adjacent intervals), for `x ∈ (0,1]`.
pub fn cantor_level<S: Scalar>(x: &S) -> Option<u32> {
    let third = S::from_ratio(1, 3);
    let two_thirds = S::from_ratio(2, 3);
    let three = S::from_ratio(3, 1);
    let two = S::from_ratio(2, 1);
    let mut y = x.clone();
    for n in 1..=MAX_LOCATE_LEVEL {
        if y >= third && y <= two_thirds {
            return Some(n);
        }
        y = if y < third {
            y * three.clone()
        } else {
            y * three.clone() - two.clone()
        };
    }
    None
}

/// `Σ_{N,p,α}(x)` for `x ∈ (0,1]`: `N θ_{3^{-αn}}(3^p x)` on `D_n`, 0 elsewhere.
pub fn eval_sigma_with<S: Scalar>(amplitude: f64, p: u32, alpha: &Alpha, x: &S) -> Result<f64> {
    if !(*x > S::zero() && *x <= S::from_ratio(1, 1)) {
        return Err(out_of_range("x", x.to_f64(), "(0, 1]"));
    }
    let Some(n) = cantor_level(x) else {
        return Ok(0.0);
    };
    let u = period_position(&(x.clone() * S::pow3(p as i64)));
    Ok(if S::le_beta(&u, alpha, n) { amplitude } else { 0.0 })
}

pub fn eval_sigma(amplitude: f64, p: u32, alpha: &Alpha, x: f64) -> Result<f64> {
    if !(amplitude > 0.0) {
        return Err(out_of_range("N", amplitude, "N > 0"));
    }
    eval_sigma_with(amplitude, p, alpha, &x)
}

/// Amplitude rule `l ↦ N(l) ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NRule {
    /// `1 + ln(1 + |l|_∞)`
    Log,
    /// `1 + √|l|_∞`
    Sqrt,
    /// `max(1, |l|_∞)`
    Linear,
    /// `1 + |l|_∞`
    OnePlusLinear,
    /// `table[min(|l|_∞, len-1)]`
    Table(Vec<f64>),
}

impl NRule {
    pub fn eval(&self, l: &[i64]) -> f64 {
        let k = l.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0) as f64;
        match self {
            NRule::Log => 1.0 + k.ln_1p(),
            NRule::Sqrt => 1.0 + k.sqrt(),
            NRule::Linear => k.max(1.0),
            NRule::OnePlusLinear => 1.0 + k,
            NRule::Table(t) => t[(k as usize).min(t.len() - 1)],
        }
    }

    /// Whether `N(l) → ∞`.
    pub fn diverges(&self) -> bool {
        !matches!(self, NRule::Table(_))
    }

    pub fn validate(&self) -> Result<()> {
        if let NRule::Table(t) = self {
            if t.is_empty() || t.iter().any(|v| !(*v >= 1.0) || !v.is_finite()) {
                return Err(invalid("N-rule", "table entries must be finite and >= 1"));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> String {
        match self {
            NRule::Log => "log".into(),
            NRule::Sqrt => "sqrt".into(),
            NRule::Linear => "linear".into(),
            NRule::OnePlusLinear => "one-plus-linear".into(),
            NRule::Table(t) => format!("table{t:?}"),
        }
    }
}

/// `V_α(x) = Σ_{N(l), |l|_∞+1, α}(x_1 − l_1)` on the unit cube `l + [0,1]^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValphaPotential {
    pub dim: usize,
    pub alpha: Alpha,
    pub amplitude: NRule,
}

/// Unit cube index of `x`: `l_i = ⌈x_i⌉ − 1`, so each coordinate lies in `(l_i, l_i + 1]`.
pub fn cube_index(x: &[f64]) -> Vec<i64> {
    x.iter().map(|v| v.ceil() as i64 - 1).collect()
}

impl ValphaPotential {
    pub fn new(dim: usize, alpha: Alpha, amplitude: NRule) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("d", "dimension must be positive"));
        }
        amplitude.validate()?;
        Ok(Self { dim, alpha, amplitude })
    }

    pub fn period_exponent(l: &[i64]) -> u32 {
        l.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0) as u32 + 1
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::FieldLength {
                expected: self.dim,
                got: x.len(),
            });
        }
        let l = cube_index(x);
        let local = x[0] - l[0] as f64;
        eval_sigma_with(self.amplitude.eval(&l), Self::period_exponent(&l), &self.alpha, &local)
    }

    /// Same as [`eval`](Self::eval) for rational points, with exact level location and comparison.
    pub fn eval_exact(&self, x: &[BigRational]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::FieldLength {
                expected: self.dim,
                got: x.len(),
            });
        }
        let l: Vec<i64> = x
            .iter()
            .map(|v| (v.ceil().to_integer() - BigInt::one()).to_i64().unwrap_or(i64::MAX))
            .collect();
        let local = x[0].clone() - BigRational::from_integer(BigInt::from(l[0]));
        eval_sigma_with(self.amplitude.eval(&l), Self::period_exponent(&l), &self.alpha, &local)
    }
}

/// `∫_a^b Σ(x) dx / N` over local coordinates `0 ≤ a ≤ b ≤ 1`, in floating point.
///
/// Walks the Cantor tree, dropping components whose positive mass is below `tol`.
pub fn positive_mass_local(p: u32, alpha: &Alpha, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(0.0 <= a && a <= b && b <= 1.0) {
        return Err(invalid("interval", "need 0 <= a <= b <= 1"));
    }
    let scale = 3f64.powi(p as i32);
    let mut total = crate::numeric::CompensatedSum::new();
    let mut stack = vec![(0.0f64, 1.0f64, 0u32)];
    while let Some((c, len, j)) = stack.pop() {
        let (lo, hi) = (a.max(c), b.min(c + len));
        if lo >= hi {
            continue;
        }
        let beta = alpha.beta(j + 1);
        if len * beta < tol || j >= MAX_LOCATE_LEVEL {
            continue;
        }
        let third = len / 3.0;
        let (ml, mh) = (lo.max(c + third), hi.min(c + 2.0 * third));
        if ml < mh {
            total.add(positivity_measure_exact(&scale, &beta, &ml, &mh)?);
        }
        stack.push((c + 2.0 * third, third, j + 1));
        stack.push((c, third, j + 1));
    }
    Ok(total.value())
}

/// Integer pieces `(l, lo, hi)` of `[a, b]` with `[lo, hi] ⊆ [l, l + 1]`.
fn unit_pieces(a: f64, b: f64) -> Vec<(i64, f64, f64)> {
    let mut out = Vec::new();
    let mut x = a;
    while x < b {
        let l = x.floor() as i64;
        let e = b.min(l as f64 + 1.0);
        out.push((l, x, e));
        x = e;
    }
    out
}

/// One-dimensional integral needed by a cell average: `x_1`-interval `[a, b]` of the cube with
/// first index `l0` and period exponent `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MassKey {
    pub p: u32,
    pub l0: i64,
    a_bits: u64,
    b_bits: u64,
}

impl MassKey {
    pub fn mass(&self, alpha: &Alpha, tol: f64) -> Result<f64> {
        let (a, b) = (f64::from_bits(self.a_bits), f64::from_bits(self.b_bits));
        let shift = self.l0 as f64;
        positive_mass_local(self.p, alpha, (a - shift).max(0.0), (b - shift).min(1.0), tol)
    }
}

impl ValphaPotential {
    /// Pieces of `mean_cell V_α = Σ w · mass(key)` split along the unit lattice.
    pub fn cell_pieces(&self, cell: &AxisBox) -> Result<Vec<(MassKey, f64)>> {
        if cell.lo.len() != self.dim {
            return Err(Error::FieldLength {
                expected: self.dim,
                got: cell.lo.len(),
            });
        }
        let axes: Vec<Vec<(i64, f64, f64)>> = (0..self.dim).map(|i| unit_pieces(cell.lo[i], cell.hi[i])).collect();
        let volume = cell.volume();
        let mut out = Vec::new();
        let mut idx = vec![0usize; self.dim];
        'outer: loop {
            let l: Vec<i64> = idx.iter().enumerate().map(|(i, &k)| axes[i][k].0).collect();
            let (_, a, b) = axes[0][idx[0]];
            let transverse: f64 = (1..self.dim).map(|i| axes[i][idx[i]].2 - axes[i][idx[i]].1).product();
            let key = MassKey {
                p: Self::period_exponent(&l),
                l0: l[0],
                a_bits: a.to_bits(),
                b_bits: b.to_bits(),
            };
            out.push((key, self.amplitude.eval(&l) * transverse / volume));
            for i in 0..self.dim {
                idx[i] += 1;
                if idx[i] < axes[i].len() {
                    continue 'outer;
                }
                idx[i] = 0;
            }
            break;
        }
        Ok(out)
    }

    /// Mean of `V_α` over a box; components of the Cantor tree below `tol` are dropped.
    pub fn cell_average(&self, cell: &AxisBox, tol: f64) -> Result<f64> {
        let mut total = crate::numeric::CompensatedSum::new();
        for (key, w) in self.cell_pieces(cell)? {
            total.add(w * key.mass(&self.alpha, tol)?);
        }
        Ok(total.value())
    }
}

pub fn eval_valpha(pot: &ValphaPotential, x: &[f64]) -> Result<f64> {
    pot.eval(x)
}

/// `G(u) = ⌊u⌋β + min(frac u, β)`, the measure of `{θ_β > 0} ∩ [0, u]`.
fn positive_length<S: Scalar>(u: &S, beta: &S) -> S {
    let fl = u.floor();
    let frac = u.clone() - fl.clone();
    fl * beta.clone() + S::min_of(frac, beta.clone())
}

/// `M(S, β, a, b) = mes{x ∈ [a,b] : θ_β(Sx) > 0}`.
pub fn positivity_measure_exact<S: Scalar>(scale: &S, beta: &S, a: &S, b: &S) -> Result<S> {
    if !(*scale > S::zero()) {
        return Err(out_of_range("S", scale.to_f64(), "S > 0"));
    }
    if !(*beta > S::zero() && *beta < S::from_ratio(1, 1)) {
        return Err(out_of_range("beta", beta.to_f64(), "(0, 1)"));
    }
    if a > b {
        return Err(invalid("interval", "a must not exceed b"));
    }
    let sa = scale.clone() * a.clone();
    let sb = scale.clone() * b.clone();
    Ok((positive_length(&sb, beta) - positive_length(&sa, beta)) / scale.clone())
}

/// Positivity fraction on a cell `Q(ξ,n)` lying in `D_j(l)`: analytic `3^{-αj}` and the measured value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFraction {
    pub level: u32,
    pub cell_level: u32,
    pub analytic: f64,
    pub measured: f64,
    /// Both values agree exactly (rational path) or within `1e-14` (floating path).
    pub exact: bool,
    pub agree: bool,
}

/// Leftmost level-`n` cell (corner chart, `m = 3`) of `Q_1(l)` inside `I_{j,1} + l_1`.
pub fn leftmost_cell(l: &[i64], j: u32, n: u32) -> Result<MadicCell> {
    if n < j {
        return Err(Error::Hypothesis(format!("cell level {n} is coarser than j = {j}")));
    }
    let den = 3i64.pow(n);
    let first = 3i64.pow(n - j);
    let mut numer: Vec<i64> = l.iter().map(|v| v * den).collect();
    numer[0] += first;
    Ok(MadicCell {
        m: 3,
        level: n,
        numer,
        chart: CubeChart::Corner,
    })
}

/// Level `j` of the adjacent interval containing the cell's first-coordinate projection.
pub fn cell_cantor_level(cell: &MadicCell, l: &[i64]) -> Result<Option<u32>> {
    if cell.m != 3 || cell.chart != CubeChart::Corner {
        return Err(invalid("cell", "expected a triadic corner-chart cell"));
    }
    let b = cell.to_rat_box();
    let lo = b.lo[0] - Rat::from_integer(l[0] as i128);
    let hi = b.hi[0] - Rat::from_integer(l[0] as i128);
    for j in 1..=cell.level {
        if cantor_adjacent(j)?.iter().any(|iv| iv.lo[0] <= lo && hi <= iv.hi[0]) {
            return Ok(Some(j));
        }
    }
    Ok(None)
}

pub fn positivity_fraction_on_cell(pot: &ValphaPotential, cell: &MadicCell, l: &[i64]) -> Result<CellFraction> {
    let n = cell.level;
    let p = ValphaPotential::period_exponent(l);
    if p <= n + 1 {
        return Err(Error::Hypothesis(format!("|l|_inf = {} must exceed n = {n}", p - 1)));
    }
    let j = cell_cantor_level(cell, l)?
        .ok_or_else(|| Error::Hypothesis("cell does not lie in any D_j(l), j <= n".into()))?;
    let b = cell.to_rat_box();
    let shift = Rat::from_integer(l[0] as i128);
    let (lo, hi) = (b.lo[0] - shift, b.hi[0] - shift);
    let alpha = &pot.alpha;
    let analytic = alpha.beta(j);
    if let Some(beta) = <BigRational as Scalar>::beta(alpha, j) {
        let scale = pow3_big(p as i64);
        let (a, bb) = (rat_to_big(&lo), rat_to_big(&hi));
        let m = positivity_measure_exact(&scale, &beta, &a, &bb)?;
        let frac = m / (bb - a);
        return Ok(CellFraction {
            level: j,
            cell_level: n,
            analytic,
            measured: Scalar::to_f64(&frac),
            exact: true,
            agree: frac == beta,
        });
    }
    let scale = 3f64.powi(p as i32);
    let (a, bb) = (crate::geometry::rat_to_f64(&lo), crate::geometry::rat_to_f64(&hi));
    let m = positivity_measure_exact(&scale, &analytic, &a, &bb)?;
    let measured = m / (bb - a);
    Ok(CellFraction {
        level: j,
        cell_level: n,
        analytic,
        measured,
        exact: false,
        agree: (measured - analytic).abs() <= 1e-14,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    #[test]
    fn theta_examples() {
        assert_eq!(eval_theta(0.5, 0.5), 1.0);
        assert_eq!(eval_theta(0.5, 0.5 + 1e-12), 0.0);
        assert_eq!(eval_theta(0.5, 2.3), 1.0);
        assert_eq!(eval_theta(0.5, 1.0), 0.0);
        assert_eq!(eval_theta(0.5, 0.0), 0.0);
        assert!(eval_theta_exact(&big(1, 3), &big(7, 3)));
        assert!(!eval_theta_exact(&big(1, 3), &big(8, 3)));
    }

    #[test]
    fn cantor_levels() {
        assert_eq!(cantor_level(&0.5), Some(1));
        assert_eq!(cantor_level(&big(1, 3)), Some(1));
        assert_eq!(cantor_level(&big(1, 9)), Some(2));
        assert_eq!(cantor_level(&big(8, 9)), Some(2));
        assert_eq!(cantor_level(&big(1, 4)), None);
        assert_eq!(cantor_level(&big(1, 1)), None);
        assert_eq!(cantor_level(&0.99), Some(6));
        let i6 = cantor_adjacent(6).unwrap();
        assert!(i6
            .iter()
            .any(|b| crate::geometry::rat_to_f64(&b.lo[0]) <= 0.99 && 0.99 <= crate::geometry::rat_to_f64(&b.hi[0])));
    }

    #[test]
    fn sigma_examples() {
        let one = Alpha::new(1.0).unwrap();
        assert_eq!(eval_sigma(7.0, 1, &one, 0.5).unwrap(), 0.0);
        // 3·(1/9 + 0.01) sits in the first period third
        assert_eq!(eval_sigma(7.0, 1, &one, 1.0 / 9.0 + 0.01).unwrap(), 0.0);
        assert_eq!(eval_sigma(7.0, 2, &one, 0.34).unwrap(), 7.0);
        assert_eq!(eval_sigma(14.0, 2, &one, 0.34).unwrap(), 14.0);
        assert_eq!(eval_sigma(7.0, 2, &one, 0.25).unwrap(), 0.0);
        assert!(eval_sigma(7.0, 2, &one, 0.0).is_err());
        assert!(eval_sigma(7.0, 2, &one, 1.5).is_err());
    }

    #[test]
    fn alpha_fractions() {
        assert_eq!(Alpha::new(1.5).unwrap().ratio, Some((3, 2)));
        assert_eq!(Alpha::new(1.0).unwrap().ratio, Some((1, 1)));
        assert!(Alpha::new(std::f64::consts::FRAC_1_SQRT_2).unwrap().ratio.is_none());
        assert!(Alpha::new(2.0).is_err());
        assert!(Alpha::new(0.0).is_err());
        let a = Alpha::new(1.5).unwrap();
        assert_eq!(<BigRational as Scalar>::beta(&a, 2), Some(big(1, 27)));
        assert_eq!(<BigRational as Scalar>::beta(&a, 1), None);
        assert!(<BigRational as Scalar>::le_beta(&big(1, 6), &a, 1));
        assert!(!<BigRational as Scalar>::le_beta(&big(1, 5), &a, 1));
    }

    #[test]
    fn positivity_examples() {
        let m = positivity_measure_exact(&big(3, 1), &big(1, 3), &big(0, 1), &big(1, 1)).unwrap();
        assert_eq!(m, big(1, 3));
        let m = positivity_measure_exact(&1.0, &0.25, &0.1, &0.2).unwrap();
        assert!((m - 0.1).abs() < 1e-15);
        assert!(positivity_measure_exact(&0.0, &0.25, &0.1, &0.2).is_err());
    }

    #[test]
    fn cell_fractions() {
        let pot = ValphaPotential::new(3, Alpha::new(1.0).unwrap(), NRule::Linear).unwrap();
        let l = [5, 0, 0];
        let cell = leftmost_cell(&l, 2, 2).unwrap();
        let f = positivity_fraction_on_cell(&pot, &cell, &l).unwrap();
        assert!(f.exact && f.agree);
        assert_eq!(f.level, 2);
        assert!((f.measured - 1.0 / 9.0).abs() < 1e-16);
        let pot = ValphaPotential::new(3, Alpha::new(0.5).unwrap(), NRule::Linear).unwrap();
        let cell = leftmost_cell(&l, 1, 1).unwrap();
        let f = positivity_fraction_on_cell(&pot, &cell, &l).unwrap();
        assert!((f.analytic - 0.5773502691896258).abs() < 1e-15 && f.agree);
        assert!(positivity_fraction_on_cell(&pot, &leftmost_cell(&[1, 0, 0], 1, 1).unwrap(), &[1, 0, 0]).is_err());
    }

    #[test]
    fn potential_values_per_cube() {
        let pot = ValphaPotential::new(2, Alpha::new(1.0).unwrap(), NRule::OnePlusLinear).unwrap();
        assert_eq!(cube_index(&[1.0, 0.5]), vec![0, 0]);
        assert_eq!(cube_index(&[1.0001, -0.5]), vec![1, -1]);
        for i in 0..2000 {
            let x = [2.0 + i as f64 / 2000.0 + 1e-7, 0.3];
            let v = pot.eval(&x).unwrap();
            assert!(v == 0.0 || v == 3.0);
        }
        let exact = pot
            .eval_exact(&[big(2, 1) + big(1, 3) + big(1, 100_000), big(3, 10)])
            .unwrap();
        assert_eq!(exact, 3.0);
    }
}
