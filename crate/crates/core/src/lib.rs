//! Generalized hyperbolic circle patterns on cellularly decomposed surfaces.
//!
//! Given the face–edge incidence of a decomposed surface, a generalized
//! intersection angle `theta` on every edge and a target curvature on
//! every face, this crate finds the radii realizing the target for the
//! pattern types `(1, 1, 0)` and `(0, 0, delta)`. It provides
//!
//! * the per-edge triangle laws and their derivatives ([`geometry`]),
//! * curvature, the discrete Laplace operator and the Ricci and Calabi
//!   energies ([`curvature`]),
//! * a damped Newton solver and the combinatorial Ricci and Calabi flows
//!   ([`solve`]),
//! * decision procedures for which targets are attainable ([`feasibility`]).
//!
//! The crate is `no_std` and needs only `alloc`.

#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod complex;
pub mod curvature;
pub mod error;
pub mod feasibility;
pub mod geometry;
pub mod linalg;
pub mod quadrature;
pub mod solve;

pub use complex::{
    builtin_torus_grid, Edge, FaceSubset, Incidence, PatternComplex, Slot, Violation,
};
pub use curvature::{calabi_energy, CurvatureReport, LaplaceMatrix, Pattern, RadiusState};
pub use error::{Error, Result};
pub use feasibility::{
    check_exhaustive, check_maxflow, check_positivity, FeasibilityReport, Verdict,
};
pub use geometry::{Delta, EdgeGeometry, PatternType, UPair};
pub use solve::{
    calabi_flow, closed_form_solve_00d, ricci_flow, run_flow, solve_newton, solve_newton_from,
    BoundaryDiagnosis, FlowMethod, FlowOptions, FlowSample, Integrator, NewtonSolution,
    NonConvergence, SolveOptions, Termination, Trajectory,
};
