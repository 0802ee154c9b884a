//! Exact symbolic engine for formal deformation quantization.
//!
//! Everything is computed over Gaussian rationals, truncated at a fixed
//! power of the deformation parameter `lam`. There is no floating point
//! anywhere: identities either hold exactly modulo `lam^(N+1)` or fail
//! with a concrete witness.
//!
//! The crate is split along the objects of the theory:
//!
//! * [`scalar`], [`series`], [`poly`], [`diffop`], [`matrix`] — the
//!   arithmetic substrate: exact scalars, truncated formal series,
//!   multivariate polynomials on split (base/fiber) variable sets and
//!   differential operators with polynomial coefficients.
//! * [`star`] — star products: the constant-tensor exponential product,
//!   user-supplied cochain products, associativity/Hermitian checks,
//!   Poisson data and equivalence transformations.
//! * [`module`] — deformation of projective modules: idempotent
//!   deformation by Newton iteration, module actions, deformed Hermitian
//!   metrics and module equivalences.
//! * [`hochschild`] — the differential Hochschild complex of base
//!   functions with operator values, and an exact coboundary solver.
//! * [`principal`] — right-module deformations of a trivial bundle
//!   model: obstruction cocycles, order-by-order extension and
//!   equivalence solving.
//! * [`commutant`] — the commutant of the deformed right action:
//!   lifting of vertical operators, the induced product on them and the
//!   induced left action.
//!
//! The crate is `no_std` (with `alloc`); IO, parsing and reports live in
//! the companion CLI crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod commutant;
pub mod diffop;
pub mod hochschild;
pub mod linalg;
pub mod matrix;
pub mod module;
pub mod poly;
pub mod principal;
pub mod ring;
pub mod scalar;
pub mod series;
pub mod star;

pub use diffop::{DiffOp, MultiDiffOp};
pub use hochschild::{AnsatzBounds, Cochain, SubmersionModel};
pub use matrix::Matrix;
pub use poly::{Mono, Polynomial};
pub use ring::{Conjugate, Ring};
pub use scalar::{Rational, Scalar};
pub use series::{FormalSeries, MatrixSeries, OpSeries, PolySeries, SeriesError, Sign};
pub use star::{EquivalenceTransform, PoissonTensor, StarProduct};
