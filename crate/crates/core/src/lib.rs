//! Exact lattice-point counting in stretched, coordinate-symmetric convex
//! bodies, together with the two-term asymptotics that govern those counts,
//! the optimal determinant-one diagonal stretch, and a mollified
//! Poisson-summation counter that brackets the exact count.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function of its inputs; IO, file formats and the command line live in the
//! `latstretch` companion crate.
//!
//! Module map:
//!
//! - [`geometry`]: bodies given by their gauge, diagonal stretches, volumes,
//!   cross sections, inradius and the balanced representative.
//! - [`counting`]: exact counts over the positive, nonnegative, nonzero and
//!   full lattice plus the coordinate hyperplanes, and a brute-force oracle.
//! - [`asymptotics`]: two-term predictions, error series, Weyl counts for
//!   cuboids and the AM-GM gap.
//! - [`optimizer`]: exact plateau search in the plane, pattern search in
//!   higher dimension, convergence sweeps.
//! - [`fourier`]: indicator transforms, mollifiers, the smoothed lattice sum
//!   and the sandwich check.
#![no_std]
#![deny(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod asymptotics;
pub mod counting;
mod error;
pub mod fourier;
pub mod geometry;
pub mod optimizer;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
pub use geometry::{BodyKind, ConvexBody, DiagonalStretch, Gauge};
