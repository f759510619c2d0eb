//! Grover's database search realized with coupled harmonic oscillators.
//!
//! The crate is organized bottom-up:
//!
//! * [`grover`] is the abstract amplitude-amplification reference: reflections,
//!   iteration, optimal stopping and random-stop statistics.
//! * [`oscillator`] holds the physical design of the coupled system (a big
//!   oscillator coupled to `N` identical small ones through the center of
//!   mass), its eigenfrequencies and the projection onto normal modes.
//! * [`classical`] evolves the system exactly or with a damped fixed-step
//!   integrator, applies the elastic tapping oracle and runs the search.
//! * [`quantum`] is the coherent-state counterpart with the image
//!   construction for the tapped (half-harmonic) oscillator.
//! * [`catalysis`] explores energy focusing as a rate-enhancement mechanism:
//!   Boltzmann enhancement, isotope-mass detuning and cooperativity.
//!
//! Natural units `m = k = 1` are the default throughout.

// `!(x > 0.0)` style checks reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalysis;
pub mod classical;
mod error;
pub mod grover;
pub mod oscillator;
pub mod quantum;

pub use error::{Error, Result};
