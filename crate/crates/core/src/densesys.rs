//! Dense systems of boxes: Cantor adjacent intervals, cylinders, products and the witness search.

use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, out_of_range, Error, Result};
use crate::geometry::{rat_to_f64, Rat, RatBox};

/// Highest Cantor level that can be built.
pub const MAX_CANTOR_LEVEL: u32 = 20;

/// Upper bound on the boxes of one product level.
pub const MAX_LEVEL_BOXES: usize = 1 << 22;

/// Level-`n` intervals adjacent to the middle-third Cantor set, left to right.
pub fn cantor_adjacent(n: u32) -> Result<Vec<RatBox>> {
    if !(1..=MAX_CANTOR_LEVEL).contains(&n) {
        return Err(out_of_range("n", n as f64, format!("1..={MAX_CANTOR_LEVEL}")));
    }
    let den = 3i128.pow(n);
    let count = 1usize << (n - 1);
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        // Surviving interval of level n-1: ternary digits of `k` in binary, 1 -> 2.
        let mut a = 0i128;
        for bit in (0..n - 1).rev() {
            a = 3 * a + if (k >> bit) & 1 == 1 { 2 } else { 0 };
        }
        out.push(RatBox {
            lo: vec![Rat::new(3 * a + 1, den)],
            hi: vec![Rat::new(3 * a + 2, den)],
        });
    }
    Ok(out)
}

/// Finite prefix `D_1, …, D_L` of a sequence of box unions inside an ambient cube.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSystem {
    pub m: u32,
    pub theta: Rat,
    pub ambient: RatBox,
    /// `levels[n-1]` is `D_n`.
    pub levels: Vec<Vec<RatBox>>,
}

impl DenseSystem {
    pub fn new(m: u32, theta: Rat, ambient: RatBox, levels: Vec<Vec<RatBox>>) -> Result<Self> {
        if m < 2 {
            return Err(out_of_range("m", m as f64, "m >= 2"));
        }
        if !(theta > Rat::zero() && theta < Rat::one()) {
            return Err(out_of_range("theta", rat_to_f64(&theta), "(0, 1)"));
        }
        for level in &levels {
            for b in level {
                if b.dim() != ambient.dim() || !ambient.contains_box(b) {
                    return Err(invalid("levels", "every box must lie in the ambient cube"));
                }
            }
        }
        Ok(Self {
            m,
            theta,
            ambient,
            levels,
        })
    }

    /// Example system in `[0,1]`: `m = 3`, `θ = 1/9`.
    pub fn cantor(levels: u32) -> Result<Self> {
        let ls = (1..=levels).map(cantor_adjacent).collect::<Result<Vec<_>>>()?;
        let ambient = RatBox::new(vec![Rat::zero()], vec![Rat::one()])?;
        Self::new(3, Rat::new(1, 9), ambient, ls)
    }

    pub fn dim(&self) -> usize {
        self.ambient.dim()
    }

    pub fn depth(&self) -> u32 {
        self.levels.len() as u32
    }

    pub fn level(&self, n: u32) -> &[RatBox] {
        &self.levels[n as usize - 1]
    }

    pub fn translate(&self, shift: &[i64]) -> Self {
        Self {
            m: self.m,
            theta: self.theta,
            ambient: self.ambient.translate(shift),
            levels: self
                .levels
                .iter()
                .map(|l| l.iter().map(|b| b.translate(shift)).collect())
                .collect(),
        }
    }

    /// Same system with `D_n` emptied.
    pub fn without_level(&self, n: u32) -> Self {
        let mut out = self.clone();
        if let Some(l) = out.levels.get_mut(n as usize - 1) {
            l.clear();
        }
        out
    }

    /// `[log_m(1/(θr))]` for rational `r`, in exact integer arithmetic.
    pub fn level_bound(&self, r: &Rat) -> Result<u32> {
        let r = *r * self.theta;
        if r <= Rat::zero() {
            return Err(out_of_range("r", rat_to_f64(&r), "r > 0"));
        }
        // Largest j with m^j·θr ≤ 1.
        let (num, den) = (*r.numer(), *r.denom());
        let m = self.m as i128;
        let mut j = 0u32;
        let mut p: i128 = 1;
        while let Some(next) = p.checked_mul(m) {
            if next.checked_mul(num).map_or(true, |v| v > den) {
                break;
            }
            p = next;
            j += 1;
        }
        Ok(j)
    }
}

/// `{D_n × Q}` for an extra cube `Q`.
pub fn cylinder_extend(system: &DenseSystem, extra: &RatBox) -> DenseSystem {
    DenseSystem {
        m: system.m,
        theta: system.theta,
        ambient: system.ambient.product(extra),
        levels: system
            .levels
            .iter()
            .map(|l| l.iter().map(|b| b.product(extra)).collect())
            .collect(),
    }
}

/// `(D_n × [0,1]^{d-1}) + l`, the system carried by each unit cube of the oscillating potential.
pub fn cantor_cylinder(d: usize, levels: u32, l: &[i64]) -> Result<DenseSystem> {
    if d == 0 || l.len() != d {
        return Err(invalid("l", "one index per dimension"));
    }
    let base = DenseSystem::cantor(levels)?;
    let sys = if d == 1 {
        base
    } else {
        let unit = RatBox::new(vec![Rat::zero(); d - 1], vec![Rat::one(); d - 1])?;
        cylinder_extend(&base, &unit)
    };
    Ok(sys.translate(l))
}

/// Index tuples `(n_1, …, n_I)` with entries in `1..=N` and maximum exactly `N`, lexicographic.
pub fn max_level_tuples(components: usize, level: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut t = vec![1u32; components];
    if components == 0 || level == 0 {
        return out;
    }
    loop {
        if t.contains(&level) {
            out.push(t.clone());
        }
        let mut axis = components;
        loop {
            if axis == 0 {
                return out;
            }
            axis -= 1;
            t[axis] += 1;
            if t[axis] <= level {
                break;
            }
            t[axis] = 1;
        }
    }
}

/// Product system with `𝒟_N = ∪_{max n_i = N} ×_i D^{(i)}_{n_i}`, truncated at the shortest component.
pub fn product_combine(systems: &[DenseSystem]) -> Result<DenseSystem> {
    let first = systems.first().ok_or_else(|| invalid("systems", "need at least one"))?;
    if systems.iter().any(|s| s.m != first.m || s.theta != first.theta) {
        return Err(invalid("systems", "components must share m and theta"));
    }
    let depth = systems.iter().map(|s| s.depth()).min().unwrap_or(0);
    let ambient = systems[1..]
        .iter()
        .fold(first.ambient.clone(), |acc, s| acc.product(&s.ambient));
    let mut levels = Vec::with_capacity(depth as usize);
    for n in 1..=depth {
        let mut boxes = Vec::new();
        for tuple in max_level_tuples(systems.len(), n) {
            let count: usize = tuple.iter().zip(systems).map(|(k, s)| s.level(*k).len()).product();
            if boxes.len() + count > MAX_LEVEL_BOXES {
                return Err(Error::TooLarge {
                    what: format!("product level {n}"),
                    limit: MAX_LEVEL_BOXES as u64,
                });
            }
            let mut partial: Vec<RatBox> = systems[0].level(tuple[0]).to_vec();
            for (k, s) in tuple[1..].iter().zip(&systems[1..]) {
                partial = partial
                    .iter()
                    .flat_map(|a| s.level(*k).iter().map(move |b| a.product(b)))
                    .collect();
            }
            boxes.extend(partial);
        }
        levels.push(boxes);
    }
    DenseSystem::new(first.m, first.theta, ambient, levels)
}

/// Query cube `z + r[-1,1]^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QueryCube {
    pub center: Vec<Rat>,
    pub radius: Rat,
}

impl QueryCube {
    pub fn to_rat_box(&self) -> RatBox {
        RatBox {
            lo: self.center.iter().map(|c| c - self.radius).collect(),
            hi: self.center.iter().map(|c| c + self.radius).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub level: u32,
    pub parallelepiped: RatBox,
    /// Center of the inner cube of half-width `θr`.
    pub inner_center: Vec<Rat>,
    pub inner_radius: Rat,
}

impl Witness {
    pub fn inner_box(&self) -> RatBox {
        QueryCube {
            center: self.inner_center.clone(),
            radius: self.inner_radius,
        }
        .to_rat_box()
    }
}

/// Independent exact re-check of a witness.
pub fn witness_is_valid(system: &DenseSystem, cube: &QueryCube, w: &Witness) -> bool {
    let Ok(bound) = system.level_bound(&cube.radius) else {
        return false;
    };
    let inner = w.inner_box();
    w.level >= 1
        && w.level <= bound
        && w.inner_radius == system.theta * cube.radius
        && system
            .levels
            .get(w.level as usize - 1)
            .is_some_and(|l| l.contains(&w.parallelepiped))
        && w.parallelepiped.contains_box(&inner)
        && cube.to_rat_box().contains_box(&inner)
}

/// Levels with boxes stored as integer numerators over one denominator, sorted along axis 0.
#[derive(Debug, Clone)]
pub struct SystemIndex {
    system: DenseSystem,
    denom: i128,
    levels: Vec<IndexedLevel>,
}

#[derive(Debug, Clone)]
struct IndexedLevel {
    /// `(lo, hi)` numerators per axis, flattened; order matches `order`.
    coords: Vec<(i128, i128)>,
    order: Vec<usize>,
    max_width: i128,
}

impl SystemIndex {
    pub fn new(system: DenseSystem) -> Result<Self> {
        let d = system.dim();
        let mut denom: i128 = 1;
        let mut fold = |r: &Rat| {
            denom = denom.lcm(r.denom());
        };
        for k in 0..d {
            fold(&system.ambient.lo[k]);
            fold(&system.ambient.hi[k]);
        }
        for level in &system.levels {
            for b in level {
                for k in 0..d {
                    fold(&b.lo[k]);
                    fold(&b.hi[k]);
                }
            }
        }
        let scale = |r: &Rat| r.numer() * (denom / r.denom());
        let levels = system
            .levels
            .iter()
            .map(|level| {
                let mut order: Vec<usize> = (0..level.len()).collect();
                order.sort_by(|a, b| level[*a].lo[0].cmp(&level[*b].lo[0]));
                let mut coords = Vec::with_capacity(level.len() * d);
                let mut max_width = 0;
                for &i in &order {
                    let b = &level[i];
                    for k in 0..d {
                        coords.push((scale(&b.lo[k]), scale(&b.hi[k])));
                    }
                    max_width = max_width.max(scale(&b.hi[0]) - scale(&b.lo[0]));
                }
                IndexedLevel {
                    coords,
                    order,
                    max_width,
                }
            })
            .collect();
        Ok(Self { system, denom, levels })
    }

    pub fn system(&self) -> &DenseSystem {
        &self.system
    }

    /// First witness in order of level, then of position along axis 0; `None` if there is none.
    pub fn witness(&self, cube: &QueryCube) -> Result<Option<Witness>> {
        let sys = &self.system;
        let d = sys.dim();
        if cube.center.len() != d {
            return Err(Error::FieldLength {
                expected: d,
                got: cube.center.len(),
            });
        }
        if cube.radius <= Rat::zero()
            || cube.radius >= Rat::one()
            || cube.radius * sys.theta * (sys.m as i128 * sys.m as i128) >= Rat::one()
        {
            return Err(out_of_range(
                "r",
                rat_to_f64(&cube.radius),
                "(0, min(1, 1/(theta m^2)))",
            ));
        }
        if !sys.ambient.contains_box(&cube.to_rat_box()) {
            return Err(invalid("cube", "must lie in the ambient cube"));
        }
        let bound = sys.level_bound(&cube.radius)?;
        if bound > sys.depth() {
            return Err(Error::TooLarge {
                what: format!("level bound {bound} exceeds the {} built levels", sys.depth()),
                limit: sys.depth() as u64,
            });
        }
        let inner = sys.theta * cube.radius;
        // Common denominator for the cube and the system.
        let mut q = self.denom.lcm(inner.denom()).lcm(cube.radius.denom());
        for c in &cube.center {
            q = q.lcm(c.denom());
        }
        let up = q / self.denom;
        let num = |r: &Rat| r.numer() * (q / r.denom());
        let lo: Vec<i128> = cube.center.iter().map(|c| num(c) - num(&cube.radius)).collect();
        let hi: Vec<i128> = cube.center.iter().map(|c| num(c) + num(&cube.radius)).collect();
        let side = 2 * num(&inner);
        for j in 1..=bound {
            let level = &self.levels[j as usize - 1];
            let count = level.order.len();
            // Boxes along axis 0 starting before `hi[0] - side` and ending after `lo[0] + side`.
            let start_min = lo[0] + side - level.max_width * up;
            let first = partition(count, |i| level.coords[i * d].0 * up < start_min);
            for i in first..count {
                let row = &level.coords[i * d..(i + 1) * d];
                if row[0].0 * up > hi[0] - side {
                    break;
                }
                let mut ok = true;
                for k in 0..d {
                    let a = (row[k].0 * up).max(lo[k]);
                    let b = (row[k].1 * up).min(hi[k]);
                    if b - a < side {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    let centre = (0..d)
                        .map(|k| Rat::new((row[k].0 * up).max(lo[k]), q) + inner)
                        .collect();
                    let pi = sys.levels[j as usize - 1][level.order[i]].clone();
                    return Ok(Some(Witness {
                        level: j,
                        parallelepiped: pi,
                        inner_center: centre,
                        inner_radius: inner,
                    }));
                }
            }
        }
        Ok(None)
    }
}

fn partition(len: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0, len);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Convenience wrapper building a fresh index.
pub fn witness(system: &DenseSystem, cube: &QueryCube) -> Result<Option<Witness>> {
    SystemIndex::new(system.clone())?.witness(cube)
}

/// Sampling plan for [`verify_system`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sampler {
    pub seed: u64,
    pub random: usize,
    /// Structured cubes aligned with box edges of levels `2..=structured_levels`.
    pub structured_levels: u32,
    /// Smallest radius considered, as a fraction of the largest radius admitting the built levels.
    pub min_radius: f64,
    /// Largest radius; cubes with larger radius are not sampled.
    pub max_radius: f64,
    /// Grid for rational coordinates: multiples of `1/(2^bits · denominator)`.
    pub bits: u32,
}

impl Default for Sampler {
    fn default() -> Self {
        Self {
            seed: 7,
            random: 10_000,
            structured_levels: 6,
            min_radius: 0.0,
            max_radius: 0.999,
            bits: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub center: Vec<f64>,
    pub radius: f64,
    pub level_bound: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub tested: usize,
    pub failed: usize,
    pub structured: usize,
    pub max_level_used: u32,
    /// Smallest slack `level_bound − level` over successful witnesses.
    pub min_level_slack: Option<u32>,
    pub failures: Vec<Failure>,
}

/// Smallest rational radius whose level bound stays within the built levels.
fn min_radius_for_depth(system: &DenseSystem) -> Rat {
    // m^{L+1} θ r > 1.
    let p = (system.m as i128).pow(system.depth() + 1);
    (Rat::one() / (system.theta * p)) * Rat::new(1001, 1000)
}

/// Radius cap: `r < min(1, 1/(θm²))` and the cube must fit in the ambient cube.
fn max_radius(system: &DenseSystem, sampler: &Sampler) -> Rat {
    let m2 = (system.m as i128) * (system.m as i128);
    let def = Rat::one() / (system.theta * m2);
    let fit = (0..system.dim())
        .map(|k| (system.ambient.hi[k] - system.ambient.lo[k]) / 2)
        .min()
        .unwrap_or(Rat::one());
    let cap = Rat::new((sampler.max_radius * 1e6).round() as i128, 1_000_000);
    let mut r = fit.min(cap).min(Rat::one());
    if r >= def {
        r = def * Rat::new(999, 1000);
    }
    r
}

fn quantize(x: f64, den: i128) -> Rat {
    Rat::new((x * den as f64).round() as i128, den)
}

/// Structured cubes: edges on, or just beside, endpoints of level boxes, with radii near level scales.
pub fn structured_cubes(system: &DenseSystem, sampler: &Sampler) -> Vec<QueryCube> {
    let d = system.dim();
    let r_lo = min_radius_for_depth(system);
    let r_hi = max_radius(system, sampler);
    let m = system.m as i128;
    let mut out = Vec::new();
    for n in 2..=sampler.structured_levels.min(system.depth()) {
        let unit = Rat::new(1, m.pow(n));
        // θr around the bracket (m^{-(n+1)}, m^{-n}].
        let radii: Vec<Rat> = [Rat::new(1001, 1000), Rat::new(3, 2), Rat::new(2, 1), Rat::new(m, 1)]
            .iter()
            .map(|f| unit / m * f / system.theta)
            .filter(|r| *r >= r_lo && *r <= r_hi)
            .collect();
        let eps = unit / 64;
        let offsets = [-unit, -unit / 2, -eps, Rat::zero(), eps, unit / 2];
        let mut edges: Vec<Rat> = system
            .levels
            .iter()
            .take(n as usize)
            .flatten()
            .flat_map(|b| [b.lo[0], b.hi[0]])
            .collect();
        edges.sort();
        edges.dedup();
        for e in edges {
            for off in &offsets {
                for r in &radii {
                    for left in [true, false] {
                        let edge = e + off;
                        let c0 = if left { edge + r } else { edge - r };
                        let mut center = vec![c0];
                        for k in 1..d {
                            center.push((system.ambient.lo[k] + system.ambient.hi[k]) / 2 + eps * k as i128);
                        }
                        let cube = QueryCube { center, radius: *r };
                        if system.ambient.contains_box(&cube.to_rat_box()) {
                            out.push(cube);
                        }
                    }
                }
            }
        }
    }
    out
}

/// Seeded random cubes: log-uniform radius, uniform position, rational coordinates.
pub fn random_cubes(system: &DenseSystem, sampler: &Sampler) -> Vec<QueryCube> {
    let d = system.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed);
    let floor = min_radius_for_depth(system);
    let r_lo = rat_to_f64(&floor).max(sampler.min_radius);
    let r_hi = rat_to_f64(&max_radius(system, sampler));
    let den = (1i128 << sampler.bits) * (system.m as i128).pow(system.depth().min(20));
    let mut out = Vec::with_capacity(sampler.random);
    while out.len() < sampler.random {
        let r = (r_lo.ln() + rng.random::<f64>() * (r_hi.ln() - r_lo.ln())).exp();
        let r = quantize(r, den);
        if r < floor || r > Rat::from_integer(1) {
            continue;
        }
        let center = (0..d)
            .map(|k| {
                let lo = rat_to_f64(&(system.ambient.lo[k] + r));
                let hi = rat_to_f64(&(system.ambient.hi[k] - r));
                quantize(lo + rng.random::<f64>() * (hi - lo), den)
            })
            .collect();
        let cube = QueryCube { center, radius: r };
        if system.ambient.contains_box(&cube.to_rat_box()) {
            out.push(cube);
        }
    }
    out
}

/// Runs the witness search over structured and random cubes; each witness is re-checked exactly.
pub fn verify_system(system: &DenseSystem, sampler: &Sampler) -> Result<VerifyReport> {
    let index = SystemIndex::new(system.clone())?;
    let structured = structured_cubes(system, sampler);
    let n_structured = structured.len();
    let mut cubes = structured;
    cubes.extend(random_cubes(system, sampler));
    let results: Vec<Result<(Option<Witness>, u32)>> = cubes
        .par_iter()
        .map(|c| {
            let bound = system.level_bound(&c.radius)?;
            let w = index.witness(c)?;
            if let Some(w) = &w {
                if !witness_is_valid(system, c, w) {
                    return Err(Error::Hypothesis("witness failed the exact re-check".into()));
                }
            }
            Ok((w, bound))
        })
        .collect();
    let mut report = VerifyReport {
        tested: cubes.len(),
        failed: 0,
        structured: n_structured,
        max_level_used: 0,
        min_level_slack: None,
        failures: Vec::new(),
    };
    for (cube, res) in cubes.iter().zip(results) {
        let (w, bound) = res?;
        match w {
            Some(w) => {
                report.max_level_used = report.max_level_used.max(w.level);
                let slack = bound - w.level;
                report.min_level_slack = Some(report.min_level_slack.map_or(slack, |s| s.min(slack)));
            }
            None => {
                report.failed += 1;
                report.failures.push(Failure {
                    center: cube.center.iter().map(rat_to_f64).collect(),
                    radius: rat_to_f64(&cube.radius),
                    level_bound: bound,
                });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i128, b: i128) -> Rat {
        Rat::new(a, b)
    }

    #[test]
    fn first_cantor_levels() {
        let d1 = cantor_adjacent(1).unwrap();
        assert_eq!(d1, vec![RatBox::new(vec![r(1, 3)], vec![r(2, 3)]).unwrap()]);
        let d2 = cantor_adjacent(2).unwrap();
        assert_eq!(d2[0].lo[0], r(1, 9));
        assert_eq!(d2[0].hi[0], r(2, 9));
        assert_eq!(d2[1].lo[0], r(7, 9));
        assert_eq!(d2[1].hi[0], r(8, 9));
        for n in 1..=10 {
            let total: Rat = cantor_adjacent(n).unwrap().iter().map(|b| b.volume()).sum();
            assert_eq!(total, r(1 << (n - 1), 3i128.pow(n)));
        }
        assert!(cantor_adjacent(0).is_err());
        assert!(cantor_adjacent(21).is_err());
    }

    #[test]
    fn level_bound_is_exact() {
        let s = DenseSystem::cantor(8).unwrap();
        // 1/(θr) = 36 -> [log_3 36] = 3
        assert_eq!(s.level_bound(&r(1, 4)).unwrap(), 3);
        // 1/(θr) = 27 exactly
        assert_eq!(s.level_bound(&r(1, 3)).unwrap(), 3);
        assert_eq!(s.level_bound(&(r(1, 3) + r(1, 1000))).unwrap(), 2);
    }

    #[test]
    fn hand_witness() {
        let s = DenseSystem::cantor(6).unwrap();
        let cube = QueryCube {
            center: vec![r(9, 20)],
            radius: r(1, 4),
        };
        let w = witness(&s, &cube).unwrap().unwrap();
        assert_eq!(w.level, 1);
        assert_eq!(w.parallelepiped.lo[0], r(1, 3));
        assert!(witness_is_valid(&s, &cube, &w));
    }

    #[test]
    fn witness_errors() {
        let s = DenseSystem::cantor(3).unwrap();
        let tiny = QueryCube {
            center: vec![r(1, 2)],
            radius: r(1, 100_000),
        };
        assert!(witness(&s, &tiny).is_err());
        let outside = QueryCube {
            center: vec![r(1, 10)],
            radius: r(1, 5),
        };
        assert!(witness(&s, &outside).is_err());
    }

    #[test]
    fn tuples_with_given_maximum() {
        for i in 1..=3usize {
            for n in 1..=4u32 {
                let t = max_level_tuples(i, n);
                assert_eq!(t.len(), (n.pow(i as u32) - (n - 1).pow(i as u32)) as usize);
            }
        }
        assert_eq!(max_level_tuples(2, 1), vec![vec![1, 1]]);
    }

    #[test]
    fn cylinder_and_product_shapes() {
        let c = DenseSystem::cantor(3).unwrap();
        let unit = RatBox::new(vec![Rat::zero()], vec![Rat::one()]).unwrap();
        let cyl = cylinder_extend(&c, &unit);
        assert_eq!(cyl.level(2).len(), c.level(2).len());
        assert_eq!(cyl.level(1)[0].volume(), r(1, 3));
        let single = product_combine(std::slice::from_ref(&c)).unwrap();
        assert_eq!(single, c);
        let p = product_combine(&[c.clone(), c.clone()]).unwrap();
        assert_eq!(p.level(1).len(), 1);
        assert_eq!(p.level(1)[0].volume(), r(1, 9));
        assert_eq!(p.level(2).len(), 2 + 2 + 4);
    }

    #[test]
    fn small_verification_runs() {
        let s = DenseSystem::cantor(8).unwrap();
        let sampler = Sampler {
            random: 500,
            ..Sampler::default()
        };
        let rep = verify_system(&s, &sampler).unwrap();
        assert_eq!(rep.failed, 0, "{:?}", rep.failures.first());
        assert!(rep.structured > 0);
        let broken = verify_system(&s.without_level(2), &sampler).unwrap();
        assert!(broken.failed > 0);
    }
}
