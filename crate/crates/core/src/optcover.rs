//! Minimal integral of a field over sets of prescribed mass.

use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::measure::WeightedSpace;
use crate::numeric::CompensatedSum;
use crate::rearrange::{DistributionProfile, ScalarField};

/// Brute force enumerates `2^n` subsets; keep `n` small.
pub const BRUTE_FORCE_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractionalAtom {
    pub position: usize,
    pub id: u64,
    /// In `(0, 1]`.
    pub fraction: f64,
}

/// Optimal cover for mass `t`: all atoms in `full`, plus a fraction of one tie-layer atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverSolution {
    pub value: f64,
    pub threshold: f64,
    pub full: Vec<usize>,
    pub partial: Option<FractionalAtom>,
    pub achieved_mass: f64,
}

fn check_open_t(t: f64, space: &WeightedSpace) -> Result<()> {
    if !(t > 0.0 && t < space.total_mass()) {
        return Err(out_of_range("t", t, format!("(0, {})", space.total_mass())));
    }
    Ok(())
}

/// Atoms ordered by value, ties by id.
fn value_order(field: &ScalarField, space: &WeightedSpace) -> Vec<usize> {
    let v = field.values();
    let atoms = space.atoms();
    let mut order: Vec<usize> = (0..space.len()).collect();
    order.sort_by(|a, b| v[*a].total_cmp(&v[*b]).then(atoms[*a].id.cmp(&atoms[*b].id)));
    order
}

/// `J_W(t) = ∫_{K^-} W + (t − κ^-) W_⋆(t)` together with a set realizing it.
pub fn solve_j(field: &ScalarField, space: &WeightedSpace, t: f64) -> Result<CoverSolution> {
    field.check(space)?;
    check_open_t(t, space)?;
    let profile = DistributionProfile::new(field, space)?;
    let threshold = profile.nondecreasing(t)?;
    let kappa = profile.strict_sublevel_mass(t)?;
    let v = field.values();

    let mut integral = CompensatedSum::new();
    let mut full = Vec::new();
    for (i, a) in space.atoms().iter().enumerate() {
        if v[i] < threshold {
            integral.add(v[i] * a.mass);
            full.push(i);
        }
    }
    let value = integral.value() + (t - kappa) * threshold;

    let mut mass = CompensatedSum::new();
    mass.add(kappa);
    let mut partial = None;
    let mut tie: Vec<usize> = (0..space.len()).filter(|i| v[*i] == threshold).collect();
    tie.sort_by_key(|i| space.atoms()[*i].id);
    for i in tie {
        let need = t - mass.value();
        if need <= 0.0 {
            break;
        }
        let a = &space.atoms()[i];
        if a.mass <= need {
            full.push(i);
            mass.add(a.mass);
        } else {
            let fraction = need / a.mass;
            partial = Some(FractionalAtom {
                position: i,
                id: a.id,
                fraction,
            });
            mass.add(fraction * a.mass);
            break;
        }
    }
    full.sort_unstable();
    Ok(CoverSolution {
        value,
        threshold,
        full,
        partial,
        achieved_mass: mass.value(),
    })
}

/// Exact minimum of `∫_E W` over unions `E` of whole atoms with `μ(E) ≥ t`.
pub fn brute_force_i(field: &ScalarField, space: &WeightedSpace, t: f64) -> Result<f64> {
    field.check(space)?;
    let n = space.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooManyAtoms {
            count: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    check_open_t(t, space)?;
    let masses: Vec<f64> = space.masses().collect();
    let weights: Vec<f64> = masses.iter().zip(field.values()).map(|(m, v)| m * v).collect();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1u32 << n) {
        let mut mass = CompensatedSum::new();
        let mut integral = CompensatedSum::new();
        for i in 0..n {
            if mask & (1 << i) != 0 {
                mass.add(masses[i]);
                integral.add(weights[i]);
            }
        }
        if mass.value() >= t {
            best = best.min(integral.value());
        }
    }
    Ok(best)
}

/// Takes whole atoms in nondecreasing value order until the mass reaches `t`.
pub fn greedy_i(field: &ScalarField, space: &WeightedSpace, t: f64) -> Result<f64> {
    field.check(space)?;
    check_open_t(t, space)?;
    let v = field.values();
    let mut mass = CompensatedSum::new();
    let mut integral = CompensatedSum::new();
    for i in value_order(field, space) {
        if mass.value() >= t {
            break;
        }
        let m = space.atoms()[i].mass;
        mass.add(m);
        integral.add(v[i] * m);
    }
    Ok(integral.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichCheck {
    /// `((θ−1)t/θ)·W̄^⋆(t)`
    pub lower_bound: f64,
    /// `J(μ(X) − t/θ)`
    pub j_left: f64,
    /// `J(μ(X) − t)`
    pub j_right: f64,
    /// `(μ(X) − t)·W̄^⋆(t)`
    pub upper_bound: f64,
    pub ok: bool,
}

/// Two-sided bound of `J` in terms of `W̄^⋆(t)`, compared with relative slack `slack`.
pub fn check_prop34(
    field: &ScalarField,
    space: &WeightedSpace,
    t: f64,
    theta: f64,
    slack: f64,
) -> Result<SandwichCheck> {
    field.check(space)?;
    check_open_t(t, space)?;
    if !(theta > 1.0) || !theta.is_finite() {
        return Err(out_of_range("theta", theta, "(1, inf)"));
    }
    let total = space.total_mass();
    let top = DistributionProfile::new(field, space)?.nonincreasing(t)?;
    let lower_bound = (theta - 1.0) * t / theta * top;
    let upper_bound = (total - t) * top;
    let j_left = solve_j(field, space, total - t / theta)?.value;
    let j_right = solve_j(field, space, total - t)?.value;
    let ok = j_left >= lower_bound - slack * lower_bound.abs().max(1.0)
        && j_right <= upper_bound + slack * upper_bound.abs().max(1.0);
    Ok(SandwichCheck {
        lower_bound,
        j_left,
        j_right,
        upper_bound,
        ok,
    })
}
