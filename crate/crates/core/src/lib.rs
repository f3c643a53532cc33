//! Exact arithmetic for heights under plane polynomial automorphisms.
//!
//! The crate is organised bottom-up:
//!
//! - [`ratpoly`]: exact rationals and bivariate polynomials (generic over the
//!   coefficient scalar, concrete over [`Rat`]).
//! - [`automorphism`]: Hénon and triangular generators, composition,
//!   conjugation, degree sequences, dynamical degree and regularity.
//! - [`heights`]: logarithmic naive heights of rational points and the
//!   explicit growth constant of a map.
//! - [`canonical`]: truncated-limit canonical heights with tail bounds,
//!   periodicity verdicts and the squaring-recurrence classifier.
//! - [`orbit`]: forward/backward split heights, orbit heights and point
//!   counting along an orbit.
//! - [`picard`]: intersection calculus on the resolution surface of a Hénon
//!   map.
//! - [`io`]: map-description documents and point files.
//!
//! Most numerical routines are generic over [`scalar::Scalar`]; the aliases
//! below fix the concrete types used by the rest of the crate and the CLI.

pub mod automorphism;
pub mod canonical;
pub mod error;
pub mod heights;
mod interval;
pub mod io;
pub mod linalg;
pub mod orbit;
pub mod picard;
pub mod ratpoly;
pub mod scalar;

pub use error::{Error, Result};

/// Exact rational number in canonical form (reduced, positive denominator).
pub type Rat = num_rational::BigRational;

/// Bivariate polynomial in `x`, `y` with exact rational coefficients.
pub type Poly = ratpoly::BivarPoly<Rat>;

/// Divisor class on the resolution surface with exact rational coefficients.
pub type Divisor = picard::DivisorClass<Rat>;

/// Real values (heights, bounds) are carried as doubles.
pub type Real = f64;

/// Binary fixed-point reals with 256 fractional bits.
pub type HighPrecision = scalar::Fixed;

pub use automorphism::{InfinityPoint, PlaneAutomorphism};
pub use canonical::{HeightEngine, HeightEstimate, PeriodicVerdict};
pub use heights::{AffinePoint, ProjPoint};
pub use picard::PicBasis;
