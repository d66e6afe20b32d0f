//! Viscosity solutions of evolutionary Hamilton-Jacobi equations on the circle.
//!
//! The crate solves `u_t + H(x, u_x) = 0` on the unit torus with a monotone
//! local Lax-Friedrichs scheme, composes the solution semigroups of two
//! Hamiltonians, and provides the weak KAM diagnostics needed to decide
//! whether a multi-time problem `u_t + H = 0, u_s + G = 0` has a viscosity
//! solution:
//!
//! - [`hamiltonians`]: the Hamiltonian catalog, Poisson brackets and the
//!   Hamiltonian flow with graph pushing.
//! - [`solver`]: the scheme, a-priori gradient bounds, the Hopf-Lax oracle for
//!   `H = p^2/2` and the sup-convolution in time.
//! - [`multitime`]: semigroup composition, commutation defects and the
//!   existence verdict.
//! - [`weakkam`]: critical values, regularity constants and invariant-graph
//!   checks.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod error;
pub mod grid;
pub mod hamiltonians;
pub(crate) mod math;
pub mod multitime;
pub mod solver;
pub mod weakkam;

pub use error::{HjError, Result};
pub use grid::{GridFunction, InitialDatum};
pub use hamiltonians::{Coercivity, Convexity, FlowState, GraphCloud, Hamiltonian1D, Potential};
pub use solver::{SchemeConfig, SolveParams, TimeSlab};
