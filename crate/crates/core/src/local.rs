//! Places of ℚ, Hilbert symbols and Hasse invariants.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::arith::{is_prime, jacobi, squarefree_part, ArithError, Rational, SquareClass};
use crate::forms::DiagonalForm;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlaceError {
    #[error("{0} is not a prime")]
    NotPrime(BigInt),
    #[error("cannot parse place {0:?}; expected \"inf\" or a prime")]
    Parse(String),
}

/// A place of ℚ. Orders as `∞ < 2 < 3 < 5 < ...`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Infinite,
    Finite(BigInt),
}

impl Place {
    pub fn finite(p: impl Into<BigInt>) -> Result<Place, PlaceError> {
        let p = p.into();
        if is_prime(&p) {
            Ok(Place::Finite(p))
        } else {
            Err(PlaceError::NotPrime(p))
        }
    }

    pub fn two() -> Place {
        Place::Finite(BigInt::from(2))
    }

    pub fn prime(&self) -> Option<&BigInt> {
        match self {
            Place::Infinite => None,
            Place::Finite(p) => Some(p),
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Infinite => write!(f, "inf"),
            Place::Finite(p) => write!(f, "{p}"),
        }
    }
}

impl FromStr for Place {
    type Err = PlaceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if matches!(t, "inf" | "infinity" | "∞" | "oo") {
            return Ok(Place::Infinite);
        }
        let p: BigInt = t.parse().map_err(|_| PlaceError::Parse(s.to_string()))?;
        Place::finite(p)
    }
}

impl Serialize for Place {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Place {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Splits a square-free `a` as `p^α · u` with `α ∈ {0, 1}`.
fn split_at(a: &BigInt, p: &BigInt) -> (u32, BigInt) {
    if a.is_multiple_of(p) {
        (1, a / p)
    } else {
        (0, a.clone())
    }
}

/// `ε(u) = (u − 1)/2 mod 2` for odd `u`.
fn epsilon(u: &BigInt) -> u32 {
    let r = u.mod_floor(&BigInt::from(4)).to_u32().unwrap_or(0);
    u32::from(r == 3)
}

/// `ω(u) = (u² − 1)/8 mod 2` for odd `u`.
fn omega(u: &BigInt) -> u32 {
    let r = u.mod_floor(&BigInt::from(8)).to_u32().unwrap_or(0);
    u32::from(r == 3 || r == 5)
}

/// Hilbert symbol of two square classes at a place.
pub fn hilbert_class(a: &SquareClass, b: &SquareClass, v: &Place) -> i8 {
    let (a, b) = (a.value(), b.value());
    match v {
        Place::Infinite => {
            if a.is_negative() && b.is_negative() {
                -1
            } else {
                1
            }
        }
        Place::Finite(p) if p == &BigInt::from(2) => {
            let (alpha, u) = split_at(a, p);
            let (beta, w) = split_at(b, p);
            let e = epsilon(&u) * epsilon(&w) + alpha * omega(&w) + beta * omega(&u);
            if e.is_multiple_of(2) {
                1
            } else {
                -1
            }
        }
        Place::Finite(p) => {
            let (alpha, u) = split_at(a, p);
            let (beta, w) = split_at(b, p);
            let mut s: i8 = 1;
            if alpha * beta * epsilon(p) % 2 == 1 {
                s = -s;
            }
            if beta == 1 {
                s *= jacobi(&u, p);
            }
            if alpha == 1 {
                s *= jacobi(&w, p);
            }
            s
        }
    }
}

/// Hilbert symbol `(a, b)_v` of nonzero rationals: `+1` iff
/// `z² = a·x² + b·y²` has a nontrivial solution over the completion at `v`.
pub fn hilbert_symbol(a: &Rational, b: &Rational, v: &Place) -> Result<i8, ArithError> {
    Ok(hilbert_class(&squarefree_part(a)?, &squarefree_part(b)?, v))
}

/// Hasse invariant `∏_{i<j} (aᵢ, aⱼ)_v`.
pub fn hasse_invariant(q: &DiagonalForm, v: &Place) -> i8 {
    let c = q.coefficients();
    let mut s = 1;
    for i in 0..c.len() {
        for j in i + 1..c.len() {
            s *= hilbert_class(&c[i], &c[j], v);
        }
    }
    s
}

/// `∞`, `2`, and every odd prime dividing some coefficient; sorted.
pub fn relevant_places(q: &DiagonalForm) -> Vec<Place> {
    places_for(q.coefficients())
}

pub(crate) fn places_for<'a>(classes: impl IntoIterator<Item = &'a SquareClass>) -> Vec<Place> {
    let mut out = vec![Place::Infinite, Place::two()];
    for c in classes {
        for p in c.odd_primes() {
            out.push(Place::Finite(p));
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Whether the class `d` is a square in the completion at `v`.
pub fn is_local_square(d: &SquareClass, v: &Place) -> bool {
    let d = d.value();
    match v {
        Place::Infinite => d.is_positive(),
        Place::Finite(p) if p == &BigInt::from(2) => {
            d.mod_floor(&BigInt::from(8)) == BigInt::from(1)
        }
        Place::Finite(p) => !d.mod_floor(p).is_zero() && jacobi(d, p) == 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::is_prime_u64;

    fn sc(n: i64) -> SquareClass {
        SquareClass::from_i64(n)
    }

    fn place(s: &str) -> Place {
        s.parse().unwrap()
    }

    fn form(c: &[i64]) -> DiagonalForm {
        DiagonalForm::from_integers(c).unwrap()
    }

    #[test]
    fn symbol_examples() {
        for v in ["inf", "2", "3", "5", "7"] {
            assert_eq!(hilbert_class(&sc(1), &sc(-7), &place(v)), 1);
        }
        assert_eq!(hilbert_class(&sc(-1), &sc(-1), &Place::Infinite), -1);
        assert_eq!(hilbert_class(&sc(-1), &sc(-1), &place("2")), -1);
        assert_eq!(hilbert_class(&sc(2), &sc(3), &place("3")), -1);
        let r = |s: &str| s.parse::<Rational>().unwrap();
        assert_eq!(
            hilbert_symbol(&r("-4/9"), &r("-1"), &Place::Infinite),
            Ok(-1)
        );
        assert!(hilbert_symbol(&r("0"), &r("1"), &Place::Infinite).is_err());
    }

    #[test]
    fn hasse_examples() {
        assert_eq!(hasse_invariant(&form(&[1, 1, 1, 1]), &place("2")), 1);
        assert_eq!(hasse_invariant(&form(&[-1, -1]), &Place::Infinite), -1);
        assert_eq!(hasse_invariant(&form(&[1, 1, 3, 3]), &place("3")), -1);
        assert_eq!(hasse_invariant(&form(&[5]), &place("5")), 1);
    }

    #[test]
    fn relevant_place_examples() {
        let show = |c: &[i64]| -> Vec<String> {
            relevant_places(&form(c))
                .iter()
                .map(|p| p.to_string())
                .collect()
        };
        assert_eq!(show(&[1, 1, 1, 1]), ["inf", "2"]);
        assert_eq!(show(&[-2, 1, 3, 3]), ["inf", "2", "3"]);
        assert_eq!(show(&[1, -15]), ["inf", "2", "3", "5"]);
    }

    #[test]
    fn place_parsing() {
        assert_eq!(place("inf"), Place::Infinite);
        assert!("4".parse::<Place>().is_err());
        assert!("x".parse::<Place>().is_err());
        assert!(place("2") < place("3"));
        assert!(Place::Infinite < place("2"));
    }

    #[test]
    fn symmetric_and_square_class_invariant() {
        let vals: Vec<i64> = (-30..=30).filter(|&x| x != 0).collect();
        let places: Vec<Place> = std::iter::once(Place::Infinite)
            .chain(
                (2..30u64)
                    .filter(|&p| is_prime_u64(p))
                    .map(|p| Place::finite(p).unwrap()),
            )
            .collect();
        for &a in &vals {
            for &b in &vals {
                for v in &places {
                    assert_eq!(
                        hilbert_class(&sc(a), &sc(b), v),
                        hilbert_class(&sc(b), &sc(a), v)
                    );
                }
            }
        }
    }
}
