//! Distribution functions and monotone rearrangements of a nonnegative field.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::measure::WeightedSpace;
use crate::numeric::CompensatedSum;

/// Nonnegative values attached to the atoms of a space, in atom order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (i, v) in values.iter().enumerate() {
            if !(*v >= 0.0) || !v.is_finite() {
                return Err(Error::BadFieldValue {
                    id: i as u64,
                    value: *v,
                });
            }
        }
        Ok(Self { values })
    }

    /// Reads the value slots of the atoms; a missing slot is an error.
    pub fn from_slots(space: &WeightedSpace) -> Result<Self> {
        let values = space
            .atoms()
            .iter()
            .map(|a| {
                a.value.ok_or(Error::BadFieldValue {
                    id: a.id,
                    value: f64::NAN,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(values)
    }

    /// Closed-form field evaluated at cell centers of a grid space.
    pub fn sample(space: &WeightedSpace, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..space.len())
            .map(|i| space.cell_center(i).map(|c| f(&c)).ok_or(Error::NotGrid))
            .collect::<Result<Vec<_>>>()?;
        Self::new(values)
    }

    pub fn constant(space: &WeightedSpace, c: f64) -> Result<Self> {
        Self::new(vec![c; space.len()])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v * c).collect())
    }

    pub fn select(&self, positions: &[usize]) -> Self {
        Self {
            values: positions.iter().map(|i| self.values[*i]).collect(),
        }
    }

    pub(crate) fn check(&self, space: &WeightedSpace) -> Result<()> {
        if self.values.len() != space.len() {
            return Err(Error::FieldLength {
                expected: space.len(),
                got: self.values.len(),
            });
        }
        Ok(())
    }
}

/// Sorted value layers with their sub- and superlevel masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionProfile {
    /// Distinct values, ascending.
    pub values: Vec<f64>,
    /// `μ{W = s_i}`
    pub layer_mass: Vec<f64>,
    /// `μ{W ≤ s_i}`
    pub lower: Vec<f64>,
    /// `μ{W ≥ s_i}`
    pub upper: Vec<f64>,
    pub total_mass: f64,
}

impl DistributionProfile {
    pub fn new(field: &ScalarField, space: &WeightedSpace) -> Result<Self> {
        field.check(space)?;
        let mut pairs: Vec<(f64, f64)> = field.values.iter().zip(space.masses()).map(|(v, m)| (*v, m)).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self::from_sorted_pairs(&pairs, space.total_mass()))
    }

    /// `(value, mass)` pairs sorted by value.
    pub(crate) fn from_sorted_pairs(pairs: &[(f64, f64)], total_mass: f64) -> Self {
        let mut values = Vec::new();
        let mut layers: Vec<CompensatedSum> = Vec::new();
        for (v, m) in pairs {
            if values.last() != Some(v) {
                values.push(*v);
                layers.push(CompensatedSum::new());
            }
            layers.last_mut().expect("pushed above").add(*m);
        }
        let layer_mass: Vec<f64> = layers.iter().map(|s| s.value()).collect();
        let k = values.len();
        let mut lower = Vec::with_capacity(k);
        let mut acc = CompensatedSum::new();
        for l in &layers {
            acc.add(l.value());
            lower.push(acc.value());
        }
        let mut upper = vec![0.0; k];
        let mut acc = CompensatedSum::new();
        for i in (0..k).rev() {
            acc.add(layers[i].value());
            upper[i] = acc.value();
        }
        Self {
            values,
            layer_mass,
            lower,
            upper,
            total_mass,
        }
    }

    fn check_t(&self, t: f64) -> Result<()> {
        if !(t > 0.0 && t <= self.total_mass) {
            return Err(out_of_range("t", t, format!("(0, {}]", self.total_mass)));
        }
        Ok(())
    }

    /// `μ{W ≤ s}`
    pub fn lambda_lower(&self, s: f64) -> f64 {
        let n = self.values.partition_point(|v| *v <= s);
        if n == 0 {
            0.0
        } else {
            self.lower[n - 1]
        }
    }

    /// `μ{W ≥ s}`
    pub fn lambda_upper(&self, s: f64) -> f64 {
        let n = self.values.partition_point(|v| *v < s);
        if n == self.values.len() {
            0.0
        } else {
            self.upper[n]
        }
    }

    /// Index of `W_⋆(t)`: the first layer whose sublevel mass reaches `t`.
    fn lower_index(&self, t: f64) -> usize {
        let i = self.lower.partition_point(|p| *p < t);
        i.min(self.values.len() - 1)
    }

    /// Index of `W̄^⋆(t)`: the last layer whose superlevel mass reaches `t`.
    fn upper_index(&self, t: f64) -> Option<usize> {
        let n = self.upper.partition_point(|u| *u >= t);
        if n > 0 {
            Some(n - 1)
        } else if t <= self.total_mass {
            Some(0)
        } else {
            None
        }
    }

    /// `W_⋆(t) = sup{s > 0 : μ{W ≤ s} < t}`
    pub fn nondecreasing(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        Ok(self.values[self.lower_index(t)])
    }

    /// `W̄^⋆(t) = sup{s > 0 : μ{W ≥ s} ≥ t}`
    pub fn nonincreasing(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        Ok(self.nonincreasing_any(t))
    }

    /// As [`Self::nonincreasing`] but for any `t > 0`; the supremum of an empty set is 0.
    pub fn nonincreasing_any(&self, t: f64) -> f64 {
        self.upper_index(t).map_or(0.0, |i| self.values[i])
    }

    /// Mass of `{W < W_⋆(t)}`.
    pub fn strict_sublevel_mass(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        let i = self.lower_index(t);
        Ok(if i == 0 { 0.0 } else { self.lower[i - 1] })
    }
}

pub fn lambda_lower(field: &ScalarField, space: &WeightedSpace, s: f64) -> Result<f64> {
    Ok(DistributionProfile::new(field, space)?.lambda_lower(s))
}

pub fn lambda_upper(field: &ScalarField, space: &WeightedSpace, s: f64) -> Result<f64> {
    Ok(DistributionProfile::new(field, space)?.lambda_upper(s))
}

pub fn rearr_nondecreasing(field: &ScalarField, space: &WeightedSpace, t: f64) -> Result<f64> {
    DistributionProfile::new(field, space)?.nondecreasing(t)
}

pub fn rearr_nonincreasing(field: &ScalarField, space: &WeightedSpace, t: f64) -> Result<f64> {
    DistributionProfile::new(field, space)?.nonincreasing(t)
}

/// The strict sublevel set `K^- = {W < W_⋆(t)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrictSublevel {
    pub threshold: f64,
    /// Positions of the atoms in the space.
    pub atoms: Vec<usize>,
    pub mass: f64,
}

pub fn strict_sublevel(field: &ScalarField, space: &WeightedSpace, t: f64) -> Result<StrictSublevel> {
    let profile = DistributionProfile::new(field, space)?;
    let threshold = profile.nondecreasing(t)?;
    let mass = profile.strict_sublevel_mass(t)?;
    let atoms = (0..space.len()).filter(|i| field.values[*i] < threshold).collect();
    Ok(StrictSublevel { threshold, atoms, mass })
}

/// Both sides of a rearrangement inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

fn positions_to_space(
    field: &ScalarField,
    space: &WeightedSpace,
    positions: &[usize],
) -> Result<(ScalarField, WeightedSpace)> {
    Ok((field.select(positions), space.select(positions)?))
}

/// `W̄^⋆(t μ(Ω), Ω) ≥ min_n W̄^⋆(t μ(Ω_n), Ω_n)` for `Ω = ∪ Ω_n`, parts given as atom positions.
pub fn check_union_inequality(
    field: &ScalarField,
    space: &WeightedSpace,
    parts: &[Vec<usize>],
    t: f64,
) -> Result<InequalityCheck> {
    field.check(space)?;
    if !(t > 0.0 && t < 1.0) {
        return Err(out_of_range("t", t, "(0, 1)"));
    }
    if parts.is_empty() || parts.iter().any(|p| p.is_empty()) {
        return Err(Error::EmptyRestriction);
    }
    let mut seen = HashSet::new();
    let mut union = Vec::new();
    for p in parts {
        for i in p {
            if !seen.insert(*i) {
                return Err(Error::OverlappingParts(space.atoms()[*i].id));
            }
            union.push(*i);
        }
    }
    union.sort_unstable();
    let (uf, us) = positions_to_space(field, space, &union)?;
    let lhs = DistributionProfile::new(&uf, &us)?.nonincreasing_any(t * us.total_mass());
    let mut rhs = f64::INFINITY;
    for p in parts {
        let (pf, ps) = positions_to_space(field, space, p)?;
        rhs = rhs.min(DistributionProfile::new(&pf, &ps)?.nonincreasing_any(t * ps.total_mass()));
    }
    Ok(InequalityCheck {
        lhs,
        rhs,
        holds: lhs >= rhs,
    })
}

/// `W̄^⋆(t, Ω_1) ≤ W̄^⋆(t, Ω_2)` for `Ω_1 ⊆ Ω_2`, both given as atom positions.
pub fn check_inclusion_monotonicity(
    field: &ScalarField,
    space: &WeightedSpace,
    inner: &[usize],
    outer: &[usize],
    t: f64,
) -> Result<InequalityCheck> {
    field.check(space)?;
    if !(t > 0.0) {
        return Err(out_of_range("t", t, "(0, inf)"));
    }
    let outer_set: HashSet<usize> = outer.iter().copied().collect();
    if let Some(i) = inner.iter().find(|i| !outer_set.contains(i)) {
        return Err(crate::error::invalid(
            "inner",
            format!("atom {} is not in the outer set", space.atoms()[*i].id),
        ));
    }
    let (f1, s1) = positions_to_space(field, space, inner)?;
    let (f2, s2) = positions_to_space(field, space, outer)?;
    let lhs = DistributionProfile::new(&f1, &s1)?.nonincreasing_any(t);
    let rhs = DistributionProfile::new(&f2, &s2)?.nonincreasing_any(t);
    Ok(InequalityCheck {
        lhs,
        rhs,
        holds: lhs <= rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_atoms(values: &[f64]) -> (ScalarField, WeightedSpace) {
        let masses = vec![1.0; values.len()];
        let space = WeightedSpace::from_masses_and_values(&masses, values).unwrap();
        (ScalarField::new(values.to_vec()).unwrap(), space)
    }

    #[test]
    fn distribution_functions() {
        let (f, s) = unit_atoms(&[1.0, 2.0, 4.0]);
        assert_eq!(lambda_lower(&f, &s, 2.0).unwrap(), 2.0);
        assert_eq!(lambda_lower(&f, &s, 0.5).unwrap(), 0.0);
        assert_eq!(lambda_lower(&f, &s, 9.0).unwrap(), 3.0);
        assert_eq!(lambda_upper(&f, &s, 2.0).unwrap(), 2.0);
        assert_eq!(lambda_upper(&f, &s, 0.0).unwrap(), 3.0);
        assert_eq!(lambda_upper(&f, &s, 4.5).unwrap(), 0.0);
    }

    #[test]
    fn nondecreasing_rearrangement() {
        let (f, s) = unit_atoms(&[1.0, 2.0, 4.0]);
        assert_eq!(rearr_nondecreasing(&f, &s, 1.5).unwrap(), 2.0);
        assert_eq!(rearr_nondecreasing(&f, &s, 0.5).unwrap(), 1.0);
        assert_eq!(rearr_nondecreasing(&f, &s, 3.0).unwrap(), 4.0);
        assert!(rearr_nondecreasing(&f, &s, 0.0).is_err());
        assert!(rearr_nondecreasing(&f, &s, 3.5).is_err());
        let (c, cs) = unit_atoms(&[2.5, 2.5]);
        assert_eq!(rearr_nondecreasing(&c, &cs, 1.3).unwrap(), 2.5);
    }

    #[test]
    fn nonincreasing_rearrangement() {
        let (f, s) = unit_atoms(&[5.0, 3.0, 3.0, 1.0]);
        assert_eq!(rearr_nonincreasing(&f, &s, 2.0).unwrap(), 3.0);
        let (g, gs) = unit_atoms(&[1.0, 2.0, 4.0]);
        assert_eq!(rearr_nonincreasing(&g, &gs, 3.0).unwrap(), 1.0);
        let (c, cs) = unit_atoms(&[7.0, 7.0, 7.0]);
        assert_eq!(rearr_nonincreasing(&c, &cs, 2.2).unwrap(), 7.0);
    }

    #[test]
    fn strict_sublevel_examples() {
        let (f, s) = unit_atoms(&[1.0, 2.0, 4.0]);
        let k = strict_sublevel(&f, &s, 1.5).unwrap();
        assert_eq!((k.atoms.clone(), k.mass), (vec![0], 1.0));
        let k = strict_sublevel(&f, &s, 3.0).unwrap();
        assert_eq!((k.threshold, k.mass), (4.0, 2.0));
        let (c, cs) = unit_atoms(&[3.0, 3.0]);
        let k = strict_sublevel(&c, &cs, 1.0).unwrap();
        assert!(k.atoms.is_empty() && k.mass == 0.0);
    }

    #[test]
    fn union_inequality_examples() {
        let (f, s) = unit_atoms(&[1.0, 1.0, 9.0, 9.0]);
        let one = check_union_inequality(&f, &s, &[vec![0, 1, 2, 3]], 0.5).unwrap();
        assert_eq!(one.lhs, one.rhs);
        let two = check_union_inequality(&f, &s, &[vec![0, 1], vec![2, 3]], 0.5).unwrap();
        // union: μ{W ≥ 9} = 2 = 0.5·4, so lhs = 9; parts give 1 and 9
        assert_eq!((two.lhs, two.rhs, two.holds), (9.0, 1.0, true));
        assert!(matches!(
            check_union_inequality(&f, &s, &[vec![0, 1], vec![1, 2]], 0.5),
            Err(Error::OverlappingParts(1))
        ));
    }

    #[test]
    fn inclusion_examples() {
        let (f, s) = unit_atoms(&[3.0, 1.0, 8.0, 2.0]);
        let all = vec![0, 1, 2, 3];
        let same = check_inclusion_monotonicity(&f, &s, &all, &all, 2.0).unwrap();
        assert_eq!(same.lhs, same.rhs);
        let single = check_inclusion_monotonicity(&f, &s, &[1], &all, 0.5).unwrap();
        assert!(single.holds && single.lhs == 1.0 && single.rhs == 8.0);
        let beyond = check_inclusion_monotonicity(&f, &s, &[1], &all, 3.0).unwrap();
        assert_eq!(beyond.lhs, 0.0);
    }
}
