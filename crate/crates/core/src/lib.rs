//! Constrained partial-transport energies.
//!
//! A density `0 <= rho <= 1` sends all of its mass to the free space it leaves
//! behind: the second marginal may not exceed `1 - rho`. This crate computes
//! that energy exactly in one dimension (rightward sweep), by min-cost flow on
//! grids, and by decomposition along rays around a center.

pub mod error;
pub mod flow;
pub mod io;
pub mod line;
pub mod measure;
pub mod quad;
pub mod radial;
pub mod shapes;
pub mod symmetry;

pub use error::{Error, Result};
pub use flow::{solve_line, solve_partial_ot, solve_partial_ot_with, DiscretePlan, EdgeFilter, OtSolution, SolveOptions, Transfer};
pub use line::{sweep_rightward, MonotonePlan, Sweep};
pub use measure::{CellGrid, Density1D, GridDensity, WeightedMeasure};
pub use radial::RadialDensity;
pub use symmetry::Reflection;


