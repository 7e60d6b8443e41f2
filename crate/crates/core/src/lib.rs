//! Exact lattice and polynomial toolkit for deciding, and constructing
//! witnesses for, realizations of powers of Salem numbers as dynamical
//! degrees of automorphisms of 2-tori, K3 surfaces and Enriques surfaces.
//!
//! All decisions are made in exact arithmetic (arbitrary-precision integers
//! and rationals). Floating point is never used to decide anything; real
//! algebraic numbers are handled through Sturm-isolated rational intervals.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: dense integer/rational matrices, Hermite and Smith normal
//!   forms, characteristic polynomials, orders of matrices modulo `k`.
//! * [`polyarith`]: integer polynomials, factorization, real root isolation,
//!   Salem certification and minimal polynomials of powers.
//! * [`lattice`]: lattices, discriminant forms, gluing, orthogonal
//!   complements, short vector enumeration, local symbols.
//! * [`isometry`]: isometries, kernels, twists, integral powers.
//! * [`positivity`]: cyclic and obstructing roots, chamber preservation.
//! * [`realize`]: realizability decisions and certificate pipelines.
//! * [`json`]: the JSON document formats used by the CLI.

#![allow(clippy::needless_range_loop)]

pub mod arith;
pub mod error;
pub mod isometry;
pub mod json;
pub mod lattice;
pub mod linalg;
pub mod polyarith;
pub mod positivity;
pub mod realize;

pub use error::{Error, Result};
pub use isometry::{Isometry, TwistElement};
pub use lattice::fqf::{FiniteQuadraticForm, GlueMap};
pub use lattice::Lattice;
pub use polyarith::{IntPolynomial, RootIsolation, SalemCertificate};
pub use positivity::ObstructionReport;
pub use realize::{RealizationCertificate, SurfaceClass};

pub use num_bigint::BigInt;
pub use num_rational::BigRational;
