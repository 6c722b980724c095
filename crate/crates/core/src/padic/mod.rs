//! Finite-precision arithmetic in `Q_p` and its unramified extensions.
//!
//! A [`PrimeCtx`] fixes the prime `p`, the unramified degree `f`, and a
//! working precision cap. Elements of `K = Q_{p^f}` are represented on the
//! basis `1, zeta, ..., zeta^{f-1}` where `zeta` is the Teichmuller lift of a
//! residue-field generator, so that the Frobenius `sigma` acts exactly
//! (`sigma(zeta) = zeta^p`). A [`PadicScalar`] is a vector of residue
//! coordinates divided by an explicit power of `p`; it carries its own
//! absolute precision, and every operation propagates the worst-case loss.

mod hensel;
mod newton;
mod poly;
mod scalar;

pub use hensel::hensel_lift_coprime;
pub use newton::{newton_polygon, slope_split, SlopeSplit};
pub use poly::PPoly;
pub(crate) use poly::poly_xgcd;
pub use scalar::{PadicScalar, PrimeCtx};
