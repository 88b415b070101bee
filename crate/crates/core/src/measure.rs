//! Finite measure spaces: explicit atom lists and grid-cell measures.

use std::collections::HashSet;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::geometry::AxisBox;
use crate::numeric::csum;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub id: u64,
    pub mass: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

impl Atom {
    pub fn new(id: u64, mass: f64) -> Self {
        Self { id, mass, value: None }
    }

    pub fn with_value(id: u64, mass: f64, value: f64) -> Self {
        Self {
            id,
            mass,
            value: Some(value),
        }
    }
}

/// Cell geometry behind a grid-built space. `cells[i]` is the linear cell index of atom `i`.
#[derive(Debug, Clone, PartialEq)]
struct GridLayout {
    bbox: AxisBox,
    resolution: Vec<usize>,
    cells: Vec<usize>,
}

impl GridLayout {
    fn multi_index(&self, mut linear: usize) -> Vec<usize> {
        let d = self.resolution.len();
        let mut idx = vec![0; d];
        for k in (0..d).rev() {
            idx[k] = linear % self.resolution[k];
            linear /= self.resolution[k];
        }
        idx
    }

    fn linear_index(resolution: &[usize], idx: &[usize]) -> usize {
        idx.iter().zip(resolution).fold(0, |acc, (i, n)| acc * n + i)
    }

    fn cell_box(&self, linear: usize) -> AxisBox {
        let idx = self.multi_index(linear);
        let mut lo = Vec::with_capacity(idx.len());
        let mut hi = Vec::with_capacity(idx.len());
        for (k, i) in idx.iter().enumerate() {
            let (a, b) = (self.bbox.lo[k], self.bbox.hi[k]);
            let n = self.resolution[k] as f64;
            lo.push(a + (b - a) * (*i as f64) / n);
            hi.push(a + (b - a) * (*i as f64 + 1.0) / n);
        }
        AxisBox { lo, hi }
    }
}

/// Finite measure space made of positive-mass atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSpace {
    atoms: Vec<Atom>,
    total_mass: f64,
    grid: Option<GridLayout>,
}

impl WeightedSpace {
    pub fn from_atoms(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptyRestriction);
        }
        let mut seen = HashSet::with_capacity(atoms.len());
        for a in &atoms {
            if !(a.mass > 0.0) || !a.mass.is_finite() {
                return Err(invalid("mass", format!("atom {} has mass {}", a.id, a.mass)));
            }
            if !seen.insert(a.id) {
                return Err(Error::DuplicateId(a.id));
            }
        }
        let total_mass = csum(atoms.iter().map(|a| a.mass));
        Ok(Self {
            atoms,
            total_mass,
            grid: None,
        })
    }

    /// Atoms with the given masses, ids `0..n`, values attached.
    pub fn from_masses_and_values(masses: &[f64], values: &[f64]) -> Result<Self> {
        if masses.len() != values.len() {
            return Err(Error::FieldLength {
                expected: masses.len(),
                got: values.len(),
            });
        }
        let atoms = masses
            .iter()
            .zip(values)
            .enumerate()
            .map(|(i, (m, v))| Atom::with_value(i as u64, *m, *v))
            .collect();
        Self::from_atoms(atoms)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn masses(&self) -> impl Iterator<Item = f64> + '_ {
        self.atoms.iter().map(|a| a.mass)
    }

    pub fn max_mass(&self) -> f64 {
        self.masses().fold(0.0, f64::max)
    }

    pub fn is_grid(&self) -> bool {
        self.grid.is_some()
    }

    pub fn dim(&self) -> Option<usize> {
        self.grid.as_ref().map(|g| g.resolution.len())
    }

    /// Cell of atom `i` for grid-built spaces.
    pub fn cell_box(&self, i: usize) -> Option<AxisBox> {
        self.grid.as_ref().map(|g| g.cell_box(g.cells[i]))
    }

    pub fn cell_center(&self, i: usize) -> Option<Vec<f64>> {
        self.cell_box(i).map(|b| b.center())
    }

    /// Copy with the value slots replaced.
    pub fn with_values(&self, values: &[f64]) -> Result<Self> {
        if values.len() != self.atoms.len() {
            return Err(Error::FieldLength {
                expected: self.atoms.len(),
                got: values.len(),
            });
        }
        let mut out = self.clone();
        for (a, v) in out.atoms.iter_mut().zip(values) {
            a.value = Some(*v);
        }
        Ok(out)
    }

    /// Sub-space of the atoms at the given positions (positions must be distinct).
    pub fn select(&self, positions: &[usize]) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::EmptyRestriction);
        }
        let atoms = positions.iter().map(|i| self.atoms[*i].clone()).collect();
        let mut out = Self::from_atoms(atoms)?;
        if let Some(g) = &self.grid {
            out.grid = Some(GridLayout {
                bbox: g.bbox.clone(),
                resolution: g.resolution.clone(),
                cells: positions.iter().map(|i| g.cells[*i]).collect(),
            });
        }
        Ok(out)
    }

    /// Sub-space of the atoms accepted by `keep`.
    pub fn filter(&self, keep: impl Fn(&Atom) -> bool) -> Result<Self> {
        let positions: Vec<usize> = (0..self.atoms.len()).filter(|i| keep(&self.atoms[*i])).collect();
        self.select(&positions)
    }
}

#[derive(Serialize, Deserialize)]
struct SpaceRecord {
    atoms: Vec<Atom>,
    total_mass: f64,
}

impl Serialize for WeightedSpace {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SpaceRecord {
            atoms: self.atoms.clone(),
            total_mass: self.total_mass,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for WeightedSpace {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Input {
            atoms: Vec<Atom>,
        }
        let input = Input::deserialize(deserializer)?;
        WeightedSpace::from_atoms(input.atoms).map_err(serde::de::Error::custom)
    }
}

/// Box split into `resolution[k]` cells per axis with a per-cell weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeasure {
    pub bbox: AxisBox,
    pub resolution: Vec<usize>,
    /// Lexicographic by cell index; mass of a cell is `density · volume`.
    pub density: Vec<f64>,
}

impl GridMeasure {
    pub fn new(bbox: AxisBox, resolution: Vec<usize>, density: impl Fn(&[f64]) -> f64) -> Result<Self> {
        check_resolution(&bbox, &resolution)?;
        let layout = GridLayout {
            bbox: bbox.clone(),
            resolution: resolution.clone(),
            cells: Vec::new(),
        };
        let count: usize = resolution.iter().product();
        let density = (0..count).map(|i| density(&layout.cell_box(i).center())).collect();
        Ok(Self {
            bbox,
            resolution,
            density,
        })
    }

    pub fn cell_volume(&self) -> f64 {
        self.bbox.volume() / self.resolution.iter().product::<usize>() as f64
    }

    /// One atom per positive-weight cell, id = linear cell index.
    pub fn to_space(&self) -> Result<WeightedSpace> {
        let vol = self.cell_volume();
        let mut atoms = Vec::new();
        let mut cells = Vec::new();
        for (i, w) in self.density.iter().enumerate() {
            if !(*w >= 0.0) || !w.is_finite() {
                return Err(invalid("density", format!("cell {i} has weight {w}")));
            }
            if *w > 0.0 {
                atoms.push(Atom::new(i as u64, w * vol));
                cells.push(i);
            }
        }
        if atoms.is_empty() {
            return Err(Error::ZeroMass);
        }
        let mut space = WeightedSpace::from_atoms(atoms)?;
        space.grid = Some(GridLayout {
            bbox: self.bbox.clone(),
            resolution: self.resolution.clone(),
            cells,
        });
        Ok(space)
    }
}

fn check_resolution(bbox: &AxisBox, resolution: &[usize]) -> Result<()> {
    if resolution.len() != bbox.dim() {
        return Err(invalid("resolution", "one entry per axis required"));
    }
    if resolution.contains(&0) {
        return Err(invalid("resolution", "at least one cell per axis"));
    }
    Ok(())
}

/// Grid space with cell mass `density(midpoint) · cell volume`. Cells of zero weight carry no atom.
pub fn build_grid(bbox: &AxisBox, resolution: &[usize], density: impl Fn(&[f64]) -> f64) -> Result<WeightedSpace> {
    GridMeasure::new(bbox.clone(), resolution.to_vec(), density)?.to_space()
}

/// Lebesgue measure on a uniform grid.
pub fn build_uniform_grid(bbox: &AxisBox, resolution: &[usize]) -> Result<WeightedSpace> {
    build_grid(bbox, resolution, |_| 1.0)
}

/// Splits every cell into `k^d` equal children carrying the parent's value.
pub fn refine(space: &WeightedSpace, k: usize) -> Result<WeightedSpace> {
    if k < 2 {
        return Err(invalid("k", "refinement factor must be at least 2"));
    }
    let g = space.grid.as_ref().ok_or(Error::NotGrid)?;
    let d = g.resolution.len();
    let children = k.pow(d as u32);
    let resolution: Vec<usize> = g.resolution.iter().map(|n| n * k).collect();
    let mut pieces: Vec<(usize, Atom)> = Vec::with_capacity(space.len() * children);
    for (atom, cell) in space.atoms.iter().zip(&g.cells) {
        let parent = g.multi_index(*cell);
        let mass = atom.mass / children as f64;
        let mut offset = vec![0usize; d];
        for _ in 0..children {
            let idx: Vec<usize> = parent.iter().zip(&offset).map(|(p, o)| p * k + o).collect();
            let linear = GridLayout::linear_index(&resolution, &idx);
            pieces.push((
                linear,
                Atom {
                    id: linear as u64,
                    mass,
                    value: atom.value,
                },
            ));
            for axis in (0..d).rev() {
                offset[axis] += 1;
                if offset[axis] < k {
                    break;
                }
                offset[axis] = 0;
            }
        }
    }
    pieces.sort_by_key(|(linear, _)| *linear);
    let cells = pieces.iter().map(|(c, _)| *c).collect();
    let mut out = WeightedSpace::from_atoms(pieces.into_iter().map(|(_, a)| a).collect())?;
    out.grid = Some(GridLayout {
        bbox: g.bbox.clone(),
        resolution,
        cells,
    });
    Ok(out)
}

/// Atoms whose cell center lies in `region`.
pub fn restrict(space: &WeightedSpace, region: impl Fn(&[f64]) -> bool) -> Result<WeightedSpace> {
    let g = space.grid.as_ref().ok_or(Error::NotGrid)?;
    let positions: Vec<usize> = (0..space.len())
        .filter(|i| region(&g.cell_box(g.cells[*i]).center()))
        .collect();
    space.select(&positions)
}
