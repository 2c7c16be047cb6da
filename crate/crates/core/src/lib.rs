//! Quadrature on scattered nodes of the sphere and localized polynomial
//! approximation built on top of it.
//!
//! The crate covers:
//!
//! * special functions ([`specfun`]): B-spline filters, ultraspherical
//!   polynomials, real spherical harmonics on the 2-sphere;
//! * node sets ([`geometry`]): random samples, the dyadic octahedral
//!   triangulation and its area measure, mesh norms;
//! * the filtered kernel `Phi_n(h; .)` ([`kernel`]);
//! * quadrature construction and verification ([`quadrature`]): a product
//!   reference rule, the least-squares (Gram solve) construction, the
//!   recurrence construction, exactness checks, Gram spectra and
//!   Marcinkiewicz-Zygmund ratios;
//! * the discrete summability operator `sigma_n` ([`operators`]);
//! * reproducible numerical experiments ([`experiments`]) and file formats
//!   ([`io`]).
//!
//! All bases are orthonormal with respect to the normalized surface measure,
//! so the constant function is `Y_{0,1} = 1` and quadrature weights sum to 1.

pub mod error;
pub mod exec;
pub mod experiments;
pub mod geometry;
pub mod io;
pub mod kernel;
pub mod linalg;
pub mod operators;
pub mod quadrature;
pub mod specfun;

pub use error::{Error, Result};
pub use geometry::{PointKind, PointSet, SphericalCap, UnitPoint};
pub use kernel::{Kernel, KernelSpec};
pub use operators::{EvalPath, HarmonicCoeffs, OperatorSpec};
pub use quadrature::{QuadratureRule, SolverOptions, VerificationReport};
pub use specfun::{Filter, HarmonicBasis};
