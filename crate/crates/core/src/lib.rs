//! Construction and analysis of counter-diabatic (transitionless) driving
//! Hamiltonians under component-wise constraints.
//!
//! The crate solves the quantum-brachistochrone completion problem for
//! Hamiltonians whose components on an orthonormal su(N) generator basis are
//! partially fixed, builds the counter-diabatic term spectrally, propagates
//! the time-dependent Schrödinger equation, checks the dynamical-invariant
//! structure of the resulting passage, and evaluates its second-order
//! stability against operator perturbations.
//!
//! The core is `no_std` (with `alloc`); IO, file formats, and the CLI live in
//! the companion `qbdrive-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod algebra;
pub mod driving;
pub mod dynamics;
pub mod grid;
pub mod matrix;
pub mod qb;
pub mod spectral;
pub mod spin1;
pub mod stability;

pub use algebra::{CoeffVector, GeneratorBasis};
pub use grid::Grid;
pub use matrix::{C64, CMatrix, StateVector};
