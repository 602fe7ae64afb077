//! Discrete closed domain, Wentzell operator blocks and the quadrature norms.

mod cg;
mod forms;
mod grid;
mod operator;
mod solver;

pub use cg::{cg_solve, CgOutcome};
pub use forms::{BoundaryForm, FormParts, StiffnessForm};
pub use grid::{build_grid, Grid, StateField};
pub use operator::{assemble_wentzell, inner_x2, norm, v1_form, NormKind, WentzellOperator, WentzellParams};
pub use solver::StripSolver;
