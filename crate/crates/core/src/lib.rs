//! Exact computation of the generic stretching factor of free group
//! automorphisms.
//!
//! The length `L(Φ)` of an automorphism is the length of the image of the
//! uniform geodesic current. This crate evaluates it as an exact rational by
//! pulling cylinders back through the boundary homeomorphism of `Φ` and summing
//! current values over products of disjoint ray cylinders. On top of the engine
//! sit Whitehead descent, length spectra of bounded complexity, Monte Carlo
//! estimates, and checks of the measure identities the engine relies on.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line and parallel drivers live in the `freestretch` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod automorphisms;
pub mod boundary;
mod error;
pub mod length;
pub mod measures;
pub mod rational;
pub mod selftest;
pub mod whitehead;
pub mod words;

pub use error::Error;

pub use automorphisms::{Automorphism, Generator, WhType, WhiteheadSecondKind};
pub use boundary::{BoundaryMap, CylinderPartition};
pub use length::{LengthReport, McEstimate};
pub use measures::{CylinderMeasure, FrequencyMeasure, MarkovSpec};
pub use num_rational::BigRational;
pub use words::{Letter, Rank, Word};

pub type Result<T, E = Error> = core::result::Result<T, E>;
