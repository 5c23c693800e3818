//! Ramification of the quaternion algebra `(-1, d)` over the rationals.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::{trial_factor, valuation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Place {
    Prime(u64),
    Real,
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Prime(p) => write!(f, "{p}"),
            Place::Real => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrauerRamification {
    pub discriminant: i64,
    pub ramified: BTreeSet<Place>,
}

impl BrauerRamification {
    /// True when `(-1, d)` splits everywhere, i.e. `d` is a sum of two
    /// rational squares.
    pub fn is_split(&self) -> bool {
        self.ramified.is_empty()
    }
}

/// Local Hilbert symbol `(-1, d)_v` as `±1`.
pub fn hilbert_symbol_minus_one(d: i64, place: Place) -> i8 {
    assert!(d != 0);
    let nontrivial = match place {
        Place::Real => d < 0,
        Place::Prime(2) => {
            let u = d.unsigned_abs() >> d.unsigned_abs().trailing_zeros();
            let u = if d < 0 { (4 - u % 4) % 4 } else { u % 4 };
            u == 3
        }
        Place::Prime(p) => p % 4 == 3 && valuation(d.unsigned_abs(), p) % 2 == 1,
    };
    if nontrivial {
        -1
    } else {
        1
    }
}

/// Places where `(-1, d)` is ramified. Only 2, the odd primes dividing `d`
/// and the real place can appear.
pub fn brauer_ramification(d: i64) -> BrauerRamification {
    assert!(d != 0, "the symbol (-1, 0) is undefined");
    let mut candidates = vec![Place::Real, Place::Prime(2)];
    candidates
        .extend(trial_factor(d.unsigned_abs()).into_iter().filter(|&(p, _)| p != 2).map(|(p, _)| Place::Prime(p)));
    let ramified = candidates.into_iter().filter(|&v| hilbert_symbol_minus_one(d, v) == -1).collect();
    BrauerRamification { discriminant: d, ramified }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frobenian::is_sum_of_two_squares;

    /// General Hilbert symbol `(a, b)_p` from the textbook formulas, with
    /// `a = p^α u`, `b = p^β v`.
    fn hilbert_general(a: i64, b: i64, p: u64) -> i8 {
        let split = |x: i64| {
            let v = valuation(x.unsigned_abs(), p);
            (v, x / (p as i64).pow(v))
        };
        let (alpha, u) = split(a);
        let (beta, v) = split(b);
        if p == 2 {
            let eps = |x: i64| ((x - 1) / 2).rem_euclid(2);
            let omega = |x: i64| ((x * x - 1) / 8).rem_euclid(2);
            let e = eps(u) * eps(v) + alpha as i64 * omega(v) + beta as i64 * omega(u);
            if e % 2 == 0 {
                1
            } else {
                -1
            }
        } else {
            let legendre = |x: i64| crate::arith::kronecker(x as i128, p as i128);
            let eps_p = ((p - 1) / 2) as i64 % 2;
            let mut s: i8 = if (alpha as i64 * beta as i64 * eps_p) % 2 == 0 { 1 } else { -1 };
            if beta % 2 == 1 {
                s *= legendre(u);
            }
            if alpha % 2 == 1 {
                s *= legendre(v);
            }
            s
        }
    }

    fn set(places: &[Place]) -> BTreeSet<Place> {
        places.iter().copied().collect()
    }

    #[test]
    fn examples() {
        assert!(brauer_ramification(5).is_split());
        assert_eq!(brauer_ramification(-1).ramified, set(&[Place::Prime(2), Place::Real]));
        assert_eq!(brauer_ramification(12).ramified, set(&[Place::Prime(2), Place::Prime(3)]));
    }

    #[test]
    fn matches_general_symbol() {
        for d in -500i64..=500 {
            if d == 0 {
                continue;
            }
            for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23] {
                assert_eq!(hilbert_symbol_minus_one(d, Place::Prime(p)), hilbert_general(-1, d, p), "d={d} p={p}");
            }
        }
    }

    #[test]
    fn reciprocity_and_sots() {
        for d in -10_000i64..=10_000 {
            if d == 0 {
                continue;
            }
            let b = brauer_ramification(d);
            assert_eq!(b.ramified.len() % 2, 0, "d = {d}");
            assert_eq!(b.is_split(), d > 0 && is_sum_of_two_squares(d as u64), "d = {d}");
        }
    }
}
