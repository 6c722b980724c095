//! Desk-scale computer algebra for p-adic fields and their towers.
//!
//! The crate is organized around finite-precision arithmetic in unramified
//! extensions of `Q_p` and builds up to:
//!
//! - [`padic`]: scalars of the fraction field of `W(F_{p^f})` at tracked
//!   absolute precision, polynomials, Newton polygons, slope factorization
//!   and Hensel lifting;
//! - [`tower`]: the totally ramified tower `K(pi_n)` cut out by a degree-`p`
//!   polynomial `f` (trace, norm, embeddings, series evaluation with tail
//!   certificates);
//! - [`dieudonne`]: free `Z_p`-modules with a Frobenius matrix `F` and
//!   Verschiebung `V = p F^{-1}` (characteristic/minimal polynomials,
//!   ordinary/non-ordinary splitting);
//! - [`logpoints`]: the logarithm-style series `l(x)`, its correction
//!   constants `eps`, and the trace relations they satisfy at tower points;
//! - [`iwasawa`]: the finite-level group rings `Z_p[x]/((1+x)^{p^n} - 1)`,
//!   norm-recurrent sequences and their root components, and determinant
//!   assembly;
//! - [`bounds`]: genus formulas for the curves `y^{2p^M} = x^{3p^N} + ax^{p^N} + b`
//!   with a Riemann-Hurwitz cross-check, and the corank bound evaluator.
//!
//! Everything is `no_std` + `alloc`: values are immutable, operations are
//! pure, and each scalar carries its own absolute precision so that every
//! "equals zero" claim is a checkable valuation bound.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bounds;
pub mod dieudonne;
pub mod error;
pub mod iwasawa;
pub mod linalg;
pub mod logpoints;
pub mod padic;
pub mod pseries;
pub mod tower;
pub mod val;

pub use error::{Error, Result};
pub use padic::{PadicScalar, PrimeCtx, PPoly};
pub use val::{Rat, Val};
