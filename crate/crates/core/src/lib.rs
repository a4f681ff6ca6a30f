//! Supercooled Stefan problem: particle and grid solvers for the physical
//! frontier, plus post-processing of the stopped-mass potential and the
//! local behaviour of the free boundary.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod boundary_analysis;
pub mod densities;
pub mod error;
pub mod frontier;
pub mod grid_solver;
pub mod harness;
pub mod jump_rule;
pub mod particle_sim;
pub mod potential;
pub mod rng;
pub mod synthetic;

pub use densities::Density;
pub use error::{AnalysisError, DensityError, HarnessError, JumpError, SimError};
pub use frontier::{FrontierPath, JumpRecord};
