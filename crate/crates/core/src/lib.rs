//! Structure-preserving finite-difference solvers for the Hunter-Saxton,
//! modified Hunter-Saxton and two-component Hunter-Saxton equations.

pub mod grid;
pub mod harness;
pub mod ode;
pub mod pinv;
pub mod schemes;
pub mod solver;
pub mod waves;
