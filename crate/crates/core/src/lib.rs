//! Rearrangements, optimal covers, capacity-weighted measures, dense Cantor systems and the
//! oscillating potentials used to test sufficient conditions for a discrete Schrodinger spectrum.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conditions;
pub mod densesys;
pub mod error;
pub mod geometry;
pub mod measure;
pub mod numeric;
pub mod optcover;
pub mod polyhedron;
pub mod potentials;
pub mod rearrange;
pub mod spectral;

pub use conditions::{ConditionId, ConditionTrace, DivergenceVerdict, DomainFamily};
pub use densesys::{DenseSystem, QueryCube, Witness};
pub use error::{Error, Result};
pub use geometry::{AxisBox, Ball, Cube, CubeChart, GammaRule, MadicCell, RatBox, StarDomain};
pub use measure::{Atom, GridMeasure, WeightedSpace};
pub use optcover::CoverSolution;
pub use polyhedron::{DistortedMeasure, SlabQuadrature};
pub use potentials::{Alpha, NRule, ValphaPotential};
pub use rearrange::{DistributionProfile, ScalarField};
pub use spectral::{CsrMatrix, DiscreteHamiltonian, Discretization, Window};
