//! Homogenized wetting on periodic rough and chemically patterned walls.

pub mod banded;
pub mod contactline;
pub mod energy;
pub mod error;
pub mod homogenize;
pub mod hysteresis;
pub mod interface;
pub mod lbfgs;
pub mod quadrature;
pub mod solver;
pub mod surface;
pub mod validate;

pub use contactline::{lift_contact_line, ContactLine, LineElement, LineFrame};
pub use error::{Error, Result};
pub use homogenize::{
    convergence_study, ConvergenceReport, ConvergenceRow, HomogenizedFit, LemmaChecks, Profile,
};
pub use hysteresis::{
    angle_vs_offset, hysteresis_range, pillar_cassie_baxter, AngleTable, HysteresisRange,
};
pub use interface::{DiscreteInterface, Grid};
pub use solver::{solve_free, solve_pinned, Solution, SolveStatus, SolverConfig};
pub use surface::{
    CellGeometry, CellShape, Chemistry, FnPattern, FnShape, Geometry, SurfaceSpec,
    WettabilityField, WettabilityPattern,
};
