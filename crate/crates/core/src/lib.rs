//! Numerical laboratory for the U(2)-invariant constant scalar curvature
//! metrics g_m(R) on Hirzebruch surfaces.
//!
//! The profile f of each metric solves a Duffing boundary value problem
//! whose closed form is a Jacobi elliptic cosine; everything downstream —
//! curvature invariants, the diagonal Bach tensor along several
//! independently derived routes, the global functionals (volume, Yamabe,
//! B_t, Chern-Gauss-Bonnet), and the Bach-flat phase-plane ODE — is
//! computed at least twice and cross-checked.

pub mod bachflat;
pub mod csc_profile;
pub mod curvature;
pub mod error;
pub mod functionals;
pub mod ode;
pub mod quadrature;
pub mod special_fn;

pub use csc_profile::{solve_closed_form, solve_numeric_ivp, MetricProfile, SolverParams};
pub use curvature::{BachDiagonal, BachRoute, CurvatureState};
pub use error::{Error, Result};
pub use functionals::FunctionalReport;
