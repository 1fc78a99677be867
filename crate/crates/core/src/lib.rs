//! High-precision computations around the Bergman kernel of spaces of
//! holomorphic Siegel cusp forms of degree n <= 2.
//!
//! The crate is organized along the objects it computes:
//!
//! - [`numerics`]: extended-precision scalar engine (log-gamma, Bessel J,
//!   Kloosterman sums, periodic quadrature, log-log slope fits),
//! - [`symspace`]: exact symmetric-matrix arithmetic, Minkowski reduction and
//!   reduction of points of the Siegel upper half-space to the fundamental
//!   domain,
//! - [`lattice`]: enumeration of half-integral positive forms under trace and
//!   spectral-window constraints, automorph counting, piecewise counting
//!   exponents,
//! - [`fourier`]: the Fourier-side majorants (mass function, (alpha, beta)
//!   envelopes, q_k evaluation with certified shell tails, closed-form sup
//!   bounds),
//! - [`kernel`]: the geometric side (h-factors, a(n,k), the Lipschitz series
//!   identity, coprime-pair enumeration, diagonal/off-diagonal kernel sums,
//!   sup scans, the lower-bound witness),
//! - [`petersson`]: the spectral side (c_{n,k}, exact degree-1 Poincare
//!   coefficients, the quadrature oracle for p(T), degree-2 envelopes, the
//!   lower-bound chain),
//! - [`hecke`]: degree-2 similitude coset enumeration, the amplifier-gap
//!   inequality and near-stabilizer counts,
//! - [`verify`]: the acceptance checks wired together, one pass/fail line per
//!   criterion.

pub mod error;
pub mod fourier;
pub mod hecke;
pub mod kernel;
pub mod lattice;
pub mod numerics;
pub mod par;
pub mod petersson;
pub mod qexp;
pub mod symspace;
pub mod verify;

pub use error::{Error, Result};
pub use numerics::PrecisionContext;
