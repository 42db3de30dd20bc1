//! Numerical workbench for normalized multi-peak solutions of two-component
//! coupled nonlinear Schrödinger systems with trapping potentials.
//!
//! The pipeline: radial ground state and synchronized limiting profiles
//! ([`profiles`]), blended quadratic trap potentials ([`potentials`]), the
//! coupled linearized operator and its σ-eigenbasis ([`linearized`]), linear
//! correction fields ([`corrections`]), multi-peak assembly ([`assembler`]),
//! the bordered Newton solver ([`solver`]), mass-constraint machinery
//! ([`mass`]) and the verification suite ([`verify`]).

pub mod corrections;
pub mod grid;
pub mod linearized;
pub mod linalg;
pub mod potentials;
pub mod profiles;
pub mod spectral;

pub use grid::{Field2, RadialGrid, TensorGrid};
pub use profiles::{solve_ground_state, CouplingParams, GroundState, ProfilePair};
