//! Valuations as exact rationals.
//!
//! Valuations of scalars in an unramified field are integers; elements of the
//! level-`n` layer of a Lubin-Tate tower have valuations in
//! `(1/e_n) Z` with `e_n = (p-1) p^{n-1}`, so the common currency is `Rat`.

use core::cmp::Ordering;
use num_rational::Ratio;

/// Exact rational number used for valuations and slopes.
pub type Rat = Ratio<i64>;

/// Rational from a numerator/denominator pair.
pub fn rat(num: i64, den: i64) -> Rat {
    Ratio::new(num, den)
}

/// A valuation measured at finite precision.
///
/// `Exact(v)` means the valuation is provably `v` (the leading digit was
/// observed). `AtLeast(b)` means every stored digit vanishes: the element is
/// indistinguishable from zero and its valuation is `>= b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Val {
    Exact(Rat),
    AtLeast(Rat),
}

impl Val {
    /// Lower bound, regardless of exactness.
    pub fn bound(&self) -> Rat {
        match self {
            Val::Exact(v) | Val::AtLeast(v) => *v,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Val::Exact(_))
    }

    /// Exact value, or an error message describing the indeterminacy.
    pub fn exact(&self) -> Option<Rat> {
        match self {
            Val::Exact(v) => Some(*v),
            Val::AtLeast(_) => None,
        }
    }

    /// Minimum of two independently measured valuations (no cancellation:
    /// use this to fold coefficient valuations of one object).
    pub fn smallest(self, other: Val) -> Val {
        match (self, other) {
            (Val::Exact(a), Val::Exact(b)) => Val::Exact(a.min(b)),
            (Val::Exact(a), Val::AtLeast(b)) | (Val::AtLeast(b), Val::Exact(a)) => {
                if a <= b {
                    Val::Exact(a)
                } else {
                    Val::AtLeast(b)
                }
            }
            (Val::AtLeast(a), Val::AtLeast(b)) => Val::AtLeast(a.min(b)),
        }
    }

    /// Valuation of a sum: the ultrametric minimum.
    ///
    /// When both operands are exact with distinct values the result is exact;
    /// otherwise only the lower bound survives (equal exact valuations can
    /// cancel).
    pub fn of_sum(self, other: Val) -> Val {
        match (self, other) {
            (Val::Exact(a), Val::Exact(b)) => match a.cmp(&b) {
                Ordering::Less => Val::Exact(a),
                Ordering::Greater => Val::Exact(b),
                // Equal exact valuations can cancel.
                Ordering::Equal => Val::AtLeast(a),
            },
            (Val::Exact(a), Val::AtLeast(b)) => {
                if a < b {
                    Val::Exact(a)
                } else {
                    Val::AtLeast(b.min(a))
                }
            }
            (Val::AtLeast(_), Val::Exact(_)) => other.of_sum(self),
            (Val::AtLeast(a), Val::AtLeast(b)) => Val::AtLeast(a.min(b)),
        }
    }

    /// Valuation of a product (bounds add; exact only if both are exact).
    pub fn add(self, other: Val) -> Val {
        match (self, other) {
            (Val::Exact(a), Val::Exact(b)) => Val::Exact(a + b),
            _ => Val::AtLeast(self.bound() + other.bound()),
        }
    }

    /// True if the valuation is provably `>= t`.
    pub fn at_least(&self, t: Rat) -> bool {
        self.bound() >= t
    }

    /// True if the valuation is provably `< t` (requires exactness).
    pub fn provably_below(&self, t: Rat) -> bool {
        matches!(self, Val::Exact(v) if *v < t)
    }
}

impl core::fmt::Display for Val {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Val::Exact(v) => write!(f, "{v}"),
            Val::AtLeast(v) => write!(f, ">= {v}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_handles_cancellation() {
        let a = Val::Exact(rat(2, 1));
        let b = Val::Exact(rat(2, 1));
        assert_eq!(a.of_sum(b), Val::AtLeast(rat(2, 1)));
        assert_eq!(a.smallest(b), Val::Exact(rat(2, 1)));
        let c = Val::Exact(rat(1, 2));
        assert_eq!(a.of_sum(c), Val::Exact(rat(1, 2)));
    }

    #[test]
    fn bounds_compose() {
        let a = Val::AtLeast(rat(5, 1));
        let b = Val::Exact(rat(1, 1));
        assert_eq!(a.add(b), Val::AtLeast(rat(6, 1)));
        assert!(a.of_sum(b).is_exact());
        assert!(!a.smallest(b).is_exact() || a.smallest(b).bound() == rat(1, 1));
    }
}
