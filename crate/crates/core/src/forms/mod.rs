//! Regular diagonal quadratic forms over ℚ.
//!
//! Isotropy is decided by Hasse–Minkowski from the classical invariants
//! (dimension, determinant, Hasse invariants with the `i < j` convention,
//! signature). The same invariant-level criteria drive Witt decomposition.

mod search;
mod witt;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{ArithError, SquareClass};
use crate::local::{hasse_invariant, hilbert_class, is_local_square, relevant_places, Place};

pub use search::isotropic_vector;
pub use witt::{
    witt_decompose, witt_decompose_with, AnisotropicPart, WittDecomposition, WittOptions,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormError {
    #[error("a quadratic form needs at least one coefficient")]
    Empty,
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("no diagonal form with the target invariants among coefficients up to {bound}")]
    SynthesisExhausted { bound: u64 },
}

/// Regular diagonal form `⟨a₁, …, aₙ⟩` with square-free integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<SquareClass>", into = "Vec<SquareClass>")]
pub struct DiagonalForm {
    coefficients: Vec<SquareClass>,
}

impl TryFrom<Vec<SquareClass>> for DiagonalForm {
    type Error = FormError;

    fn try_from(v: Vec<SquareClass>) -> Result<Self, Self::Error> {
        DiagonalForm::new(v)
    }
}

impl From<DiagonalForm> for Vec<SquareClass> {
    fn from(q: DiagonalForm) -> Self {
        q.coefficients
    }
}

impl DiagonalForm {
    pub fn new(coefficients: Vec<SquareClass>) -> Result<Self, FormError> {
        if coefficients.is_empty() {
            return Err(FormError::Empty);
        }
        Ok(DiagonalForm { coefficients })
    }

    /// Reduces each nonzero integer to its square class.
    pub fn from_integers(coefficients: &[i64]) -> Result<Self, FormError> {
        let classes = coefficients
            .iter()
            .map(|&c| SquareClass::of_integer(c))
            .collect::<Result<Vec<_>, _>>()?;
        DiagonalForm::new(classes)
    }

    pub fn hyperbolic_plane() -> Self {
        DiagonalForm {
            coefficients: vec![SquareClass::one(), SquareClass::minus_one()],
        }
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[SquareClass] {
        &self.coefficients
    }

    pub fn to_i64_vec(&self) -> Option<Vec<i64>> {
        self.coefficients.iter().map(SquareClass::to_i64).collect()
    }

    pub fn determinant(&self) -> SquareClass {
        self.coefficients
            .iter()
            .fold(SquareClass::one(), |acc, c| acc.mul(c))
    }

    /// `(−1)^{n(n−1)/2} · det`.
    pub fn signed_discriminant(&self) -> SquareClass {
        signed_discriminant(self.dim(), &self.determinant())
    }

    pub fn signature(&self) -> (usize, usize) {
        let neg = self.coefficients.iter().filter(|c| c.is_negative()).count();
        (self.dim() - neg, neg)
    }

    pub fn orthogonal_sum(&self, other: &DiagonalForm) -> DiagonalForm {
        let mut coefficients = self.coefficients.clone();
        coefficients.extend(other.coefficients.iter().cloned());
        DiagonalForm { coefficients }
    }

    pub fn scaled(&self, s: &SquareClass) -> DiagonalForm {
        DiagonalForm {
            coefficients: self.coefficients.iter().map(|c| c.mul(s)).collect(),
        }
    }

    pub fn negated(&self) -> DiagonalForm {
        self.scaled(&SquareClass::minus_one())
    }

    pub fn with_hyperbolic_planes(&self, count: usize) -> DiagonalForm {
        (0..count).fold(self.clone(), |q, _| {
            q.orthogonal_sum(&DiagonalForm::hyperbolic_plane())
        })
    }

    /// Coefficients sorted in witness order; two forms with the same sorted
    /// coefficients are trivially isometric.
    pub fn sorted(&self) -> DiagonalForm {
        let mut coefficients = self.coefficients.clone();
        coefficients.sort();
        DiagonalForm { coefficients }
    }
}

impl fmt::Display for DiagonalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, c) in self.coefficients.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ">")
    }
}

pub(crate) fn signed_discriminant(dim: usize, det: &SquareClass) -> SquareClass {
    if (dim * dim.saturating_sub(1) / 2) % 2 == 1 {
        det.neg()
    } else {
        det.clone()
    }
}

/// Classical invariants of a form (or of a Witt class representative).
///
/// `hasse` holds the Hasse invariant at every relevant place; at any other
/// place it is `+1`, which is how two invariant records with different
/// place sets are compared.
#[derive(Debug, Clone, Eq, Serialize)]
pub struct FormInvariants {
    pub dimension: usize,
    pub determinant: SquareClass,
    pub signed_discriminant: SquareClass,
    pub hasse: BTreeMap<Place, i8>,
    pub signature: (usize, usize),
}

impl FormInvariants {
    pub fn hasse_at(&self, v: &Place) -> i8 {
        self.hasse.get(v).copied().unwrap_or(1)
    }

    /// Invariants of the zero form.
    pub fn zero() -> FormInvariants {
        FormInvariants {
            dimension: 0,
            determinant: SquareClass::one(),
            signed_discriminant: SquareClass::one(),
            hasse: [Place::Infinite, Place::two()]
                .into_iter()
                .map(|p| (p, 1))
                .collect(),
            signature: (0, 0),
        }
    }

    fn places(&self) -> impl Iterator<Item = &Place> {
        self.hasse.keys()
    }

    /// Whether a form with these invariants is isotropic at `v`.
    pub fn isotropic_at(&self, v: &Place) -> bool {
        let n = self.dimension;
        if n < 2 {
            return false;
        }
        if let Place::Infinite = v {
            return self.signature.0 > 0 && self.signature.1 > 0;
        }
        let d = &self.determinant;
        let eps = self.hasse_at(v);
        match n {
            2 => is_local_square(&d.neg(), v),
            3 => eps == hilbert_class(&SquareClass::minus_one(), &d.neg(), v),
            4 => {
                let m1 = SquareClass::minus_one();
                !(is_local_square(d, v) && eps == -hilbert_class(&m1, &m1, v))
            }
            _ => true,
        }
    }

    /// Hasse–Minkowski verdict from invariants alone.
    pub fn isotropy(&self) -> Isotropy {
        match self.dimension {
            0 | 1 => Isotropy::Anisotropic {
                failing_place: Place::Infinite,
            },
            2 => {
                let minus_d = self.determinant.neg();
                if minus_d.is_one() {
                    Isotropy::Isotropic
                } else if minus_d.is_negative() {
                    Isotropy::Anisotropic {
                        failing_place: Place::Infinite,
                    }
                } else {
                    let p = minus_d.factorization().prime_powers[0].0.clone();
                    Isotropy::Anisotropic {
                        failing_place: Place::Finite(p),
                    }
                }
            }
            _ => match self.places().find(|v| !self.isotropic_at(v)) {
                Some(v) => Isotropy::Anisotropic {
                    failing_place: v.clone(),
                },
                None => Isotropy::Isotropic,
            },
        }
    }

    /// Invariants after splitting off one hyperbolic plane:
    /// from `ε(q₁ ⊥ H) = ε(q₁)·(d(q₁), −1)` and `d(q₁ ⊥ H) = −d(q₁)`.
    fn without_hyperbolic_plane(&self) -> FormInvariants {
        let m1 = SquareClass::minus_one();
        let det = self.determinant.neg();
        let hasse = self
            .hasse
            .iter()
            .map(|(v, e)| (v.clone(), e * hilbert_class(&det, &m1, v)))
            .collect();
        let dimension = self.dimension - 2;
        FormInvariants {
            dimension,
            signed_discriminant: signed_discriminant(dimension, &det),
            determinant: det,
            hasse,
            signature: (self.signature.0 - 1, self.signature.1 - 1),
        }
    }

    /// Equality of the classifying data, treating absent Hasse entries as `+1`.
    pub fn same_class(&self, other: &FormInvariants) -> bool {
        if self.dimension != other.dimension
            || self.determinant != other.determinant
            || self.signature != other.signature
        {
            return false;
        }
        let places: BTreeSet<&Place> = self.places().chain(other.places()).collect();
        places
            .into_iter()
            .all(|v| self.hasse_at(v) == other.hasse_at(v))
    }
}

impl PartialEq for FormInvariants {
    fn eq(&self, other: &Self) -> bool {
        self.same_class(other)
    }
}

/// Outcome of the global isotropy test; anisotropic verdicts name a place
/// where the form is locally anisotropic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Isotropy {
    Isotropic,
    Anisotropic { failing_place: Place },
}

impl Isotropy {
    pub fn is_isotropic(&self) -> bool {
        matches!(self, Isotropy::Isotropic)
    }
}

pub fn invariants(q: &DiagonalForm) -> FormInvariants {
    let places = relevant_places(q);
    FormInvariants {
        dimension: q.dim(),
        determinant: q.determinant(),
        signed_discriminant: q.signed_discriminant(),
        hasse: places
            .into_iter()
            .map(|v| {
                let e = hasse_invariant(q, &v);
                (v, e)
            })
            .collect(),
        signature: q.signature(),
    }
}

pub fn is_isotropic_local(q: &DiagonalForm, v: &Place) -> bool {
    let mut inv = invariants(q);
    if !inv.hasse.contains_key(v) {
        inv.hasse.insert(v.clone(), hasse_invariant(q, v));
    }
    inv.isotropic_at(v)
}

pub fn isotropy(q: &DiagonalForm) -> Isotropy {
    invariants(q).isotropy()
}

pub fn is_isotropic(q: &DiagonalForm) -> bool {
    isotropy(q).is_isotropic()
}

/// Whether `q` represents `c`, i.e. `q ⊥ ⟨−c⟩` is isotropic.
pub fn represents(q: &DiagonalForm, c: &SquareClass) -> bool {
    is_isotropic(&q.orthogonal_sum(&DiagonalForm {
        coefficients: vec![c.neg()],
    }))
}

/// `⟨1, a₁⟩ ⊗ … ⊗ ⟨1, aₙ⟩`, coefficient `k` being the product of the
/// generators selected by the bits of `k`.
pub fn pfister(generators: &[SquareClass]) -> Result<DiagonalForm, FormError> {
    if generators.is_empty() {
        return Err(FormError::Empty);
    }
    let coefficients = (0..1usize << generators.len())
        .map(|mask| {
            generators
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .fold(SquareClass::one(), |acc, (_, g)| acc.mul(g))
        })
        .collect();
    Ok(DiagonalForm { coefficients })
}

/// Witt index and invariants of the anisotropic part, computed by peeling
/// hyperbolic planes at the invariant level.
pub fn anisotropic_invariants(q: &DiagonalForm) -> (usize, FormInvariants) {
    let mut inv = invariants(q);
    let mut index = 0;
    while inv.isotropy().is_isotropic() {
        inv = inv.without_hyperbolic_plane();
        index += 1;
    }
    (index, inv)
}

pub fn is_witt_equivalent(q1: &DiagonalForm, q2: &DiagonalForm) -> bool {
    let (_, a) = anisotropic_invariants(q1);
    let (_, b) = anisotropic_invariants(q2);
    a.same_class(&b)
}

/// Isometry over ℚ: equal dimension and identical classifying invariants.
pub fn is_isometric(q1: &DiagonalForm, q2: &DiagonalForm) -> bool {
    invariants(q1).same_class(&invariants(q2))
}

/// Value of the diagonal form at an integer vector.
pub fn evaluate(q: &DiagonalForm, x: &[BigInt]) -> BigInt {
    q.coefficients
        .iter()
        .zip(x)
        .map(|(a, xi)| a.value() * xi * xi)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    fn form(c: &[i64]) -> DiagonalForm {
        DiagonalForm::from_integers(c).unwrap()
    }

    fn sc(n: i64) -> SquareClass {
        SquareClass::from_i64(n)
    }

    fn place(s: &str) -> Place {
        s.parse().unwrap()
    }

    #[test]
    fn invariant_examples() {
        let inv = invariants(&form(&[1, 1, 1, 1]));
        assert_eq!(inv.dimension, 4);
        assert_eq!(inv.determinant, sc(1));
        assert_eq!(inv.signed_discriminant, sc(1));
        assert_eq!(inv.signature, (4, 0));

        let inv = invariants(&form(&[-2, 1, 3, 3]));
        assert_eq!(inv.determinant, sc(-2));
        assert_eq!(inv.signed_discriminant, sc(-2));
        assert_eq!(inv.signature, (3, 1));

        let inv = invariants(&form(&[1, -1]));
        assert_eq!(inv.determinant, sc(-1));
        assert_eq!(inv.signed_discriminant, sc(1));
        assert_eq!(inv.signature, (1, 1));
    }

    #[test]
    fn local_isotropy_examples() {
        let q = form(&[1, 1, 1, 1]);
        assert!(!is_isotropic_local(&q, &Place::Infinite));
        assert!(!is_isotropic_local(&q, &place("2")));
        assert!(is_isotropic_local(&q, &place("3")));
        assert!(!oracle::local_isotropic(&[1, 1, 1, 1], Some(2)));
        assert!(oracle::local_isotropic(&[1, 1, 1, 1], Some(3)));
        // A place outside the relevant set.
        assert!(is_isotropic_local(&q, &place("11")));
        assert!(!is_isotropic_local(&form(&[1, 1]), &place("3")));
    }

    #[test]
    fn global_isotropy_examples() {
        assert!(is_isotropic(&form(&[1, -1])));
        assert!(is_isotropic(&form(&[1, 1, -2])));
        assert_eq!(
            isotropy(&form(&[1, 1, 1, -7])),
            Isotropy::Anisotropic {
                failing_place: place("2")
            }
        );
        assert!(!oracle::local_isotropic(&[1, 1, 1, -7], Some(2)));
        assert_eq!(
            isotropy(&form(&[-2, 1, 3, 3])),
            Isotropy::Anisotropic {
                failing_place: place("3")
            }
        );
        assert!(!oracle::local_isotropic(&[-2, 1, 3, 3], Some(3)));
        assert_eq!(
            isotropy(&form(&[1, 1])),
            Isotropy::Anisotropic {
                failing_place: Place::Infinite
            }
        );
        assert_eq!(
            isotropy(&form(&[1, -6])),
            Isotropy::Anisotropic {
                failing_place: place("2")
            }
        );
        assert!(!is_isotropic(&form(&[5])));
    }

    #[test]
    fn representation_examples() {
        assert!(represents(&form(&[1, 1, 1]), &sc(2)));
        assert!(!represents(&form(&[1, 3, 3]), &sc(2)));
        assert!(!oracle::local_isotropic(&[1, 3, 3, -2], Some(3)));
        assert!(represents(&form(&[-1, -1, -1]), &sc(-3)));
    }

    #[test]
    fn pfister_examples() {
        assert_eq!(pfister(&[sc(-1)]).unwrap(), form(&[1, -1]));
        assert_eq!(pfister(&[sc(1), sc(1)]).unwrap(), form(&[1, 1, 1, 1]));
        assert_eq!(pfister(&[sc(1), sc(-3)]).unwrap(), form(&[1, 1, -3, -3]));
        assert_eq!(pfister(&[sc(2), sc(3), sc(5)]).unwrap().dim(), 8);
        assert!(pfister(&[]).is_err());
    }

    #[test]
    fn witt_equivalence_examples() {
        assert!(is_witt_equivalent(&form(&[1, -1]), &form(&[2, -2])));
        assert!(!is_witt_equivalent(
            &form(&[1, 1, 1, 1]),
            &form(&[-2, 1, 3, 3])
        ));
        for c in [&[1][..], &[2, 3], &[-1, 5, 7], &[1, 1, 1, 1]] {
            let q = form(c);
            assert!(is_witt_equivalent(&q, &q.with_hyperbolic_planes(1)));
        }
    }

    #[test]
    fn empty_form_rejected() {
        assert_eq!(DiagonalForm::new(vec![]), Err(FormError::Empty));
        assert!(DiagonalForm::from_integers(&[1, 0]).is_err());
    }
}
