//! Quaternion algebras `(a, b)` over ℚ.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{witness_order, ArithError, SquareClass};
use crate::forms::{
    anisotropic_invariants, is_isometric, is_isotropic, represents, DiagonalForm, FormInvariants,
};
use crate::local::{hilbert_class, places_for, Place};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuatError {
    #[error("{0} is split; the operation is defined for division algebras only")]
    NotDivision(QuaternionAlgebra),
    #[error("{0} and {1} are isomorphic")]
    Isomorphic(QuaternionAlgebra, QuaternionAlgebra),
    #[error("no algebra with the required ramification among coefficients up to {bound}")]
    ConnectingExhausted { bound: u64 },
    #[error("cannot parse quaternion algebra {0:?}; expected \"a,b\" or \"(a,b)\"")]
    Parse(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuaternionAlgebra {
    pub a: SquareClass,
    pub b: SquareClass,
}

impl QuaternionAlgebra {
    pub fn new(a: SquareClass, b: SquareClass) -> Self {
        QuaternionAlgebra { a, b }
    }

    /// Reduces both arguments to their square classes.
    pub fn from_integers(a: i64, b: i64) -> Result<Self, ArithError> {
        Ok(QuaternionAlgebra::new(
            SquareClass::of_integer(a)?,
            SquareClass::of_integer(b)?,
        ))
    }

    /// `⟨1, −a, −b, ab⟩`.
    pub fn norm_form(&self) -> DiagonalForm {
        DiagonalForm::new(vec![
            SquareClass::one(),
            self.a.neg(),
            self.b.neg(),
            self.a.mul(&self.b),
        ])
        .expect("nonempty")
    }

    /// `⟨a, b, −ab⟩`, the norm form restricted to pure quaternions, negated.
    pub fn pure_part(&self) -> DiagonalForm {
        DiagonalForm::new(vec![
            self.a.clone(),
            self.b.clone(),
            self.a.mul(&self.b).neg(),
        ])
        .expect("nonempty")
    }

    pub fn ramification(&self) -> RamificationSet {
        let places = places_for([&self.a, &self.b])
            .into_iter()
            .filter(|v| hilbert_class(&self.a, &self.b, v) == -1)
            .collect();
        RamificationSet { places }
    }

    pub fn is_division(&self) -> bool {
        let anisotropic = !is_isotropic(&self.norm_form());
        assert_eq!(
            anisotropic,
            !self.ramification().is_empty(),
            "norm form and ramification disagree for {self}"
        );
        anisotropic
    }

    fn require_division(&self) -> Result<(), QuatError> {
        if self.is_division() {
            Ok(())
        } else {
            Err(QuatError::NotDivision(self.clone()))
        }
    }

    /// Whether `ℚ(√c)` embeds in the algebra. Always false for `c = 1`.
    pub fn contains_subfield(&self, c: &SquareClass) -> bool {
        !c.is_one() && represents(&self.pure_part(), c)
    }
}

impl fmt::Display for QuaternionAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

impl FromStr for QuaternionAlgebra {
    type Err = QuatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let t = t
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .unwrap_or(t);
        let parse_err = || QuatError::Parse(s.to_string());
        let (a, b) = t.split_once(',').ok_or_else(parse_err)?;
        let a: i64 = a.trim().parse().map_err(|_| parse_err())?;
        let b: i64 = b.trim().parse().map_err(|_| parse_err())?;
        Ok(QuaternionAlgebra::from_integers(a, b)?)
    }
}

/// Places where an algebra ramifies, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RamificationSet {
    pub places: Vec<Place>,
}

impl RamificationSet {
    pub fn is_empty(&self) -> bool {
        self.places.is_empty()
    }

    pub fn len(&self) -> usize {
        self.places.len()
    }

    pub fn symmetric_difference(&self, other: &RamificationSet) -> RamificationSet {
        let a: BTreeSet<&Place> = self.places.iter().collect();
        let b: BTreeSet<&Place> = other.places.iter().collect();
        RamificationSet {
            places: a.symmetric_difference(&b).map(|p| (*p).clone()).collect(),
        }
    }
}

impl fmt::Display for RamificationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.places.iter().map(Place::to_string).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

pub fn is_isomorphic(d1: &QuaternionAlgebra, d2: &QuaternionAlgebra) -> bool {
    let by_forms = is_isometric(&d1.norm_form(), &d2.norm_form());
    let by_ramification = d1.ramification() == d2.ramification();
    assert_eq!(
        by_forms, by_ramification,
        "isomorphism criteria disagree for {d1}, {d2}"
    );
    by_forms
}

/// `⟨a, b, −ab, −a′, −b′, a′b′⟩`.
pub fn albert_form(d1: &QuaternionAlgebra, d2: &QuaternionAlgebra) -> DiagonalForm {
    d1.pure_part().orthogonal_sum(&d2.pure_part().negated())
}

/// `q_D ⊥ −q_{D′}`.
pub fn norm_difference(d1: &QuaternionAlgebra, d2: &QuaternionAlgebra) -> DiagonalForm {
    d1.norm_form().orthogonal_sum(&d2.norm_form().negated())
}

pub fn is_linked(d1: &QuaternionAlgebra, d2: &QuaternionAlgebra) -> Result<bool, QuatError> {
    d1.require_division()?;
    d2.require_division()?;
    let linked = is_isotropic(&albert_form(d1, d2));
    let (index, _) = anisotropic_invariants(&norm_difference(d1, d2));
    assert_eq!(
        linked,
        index >= 2,
        "linkage criteria disagree for {d1}, {d2}"
    );
    Ok(linked)
}

fn candidates(height_bound: u64) -> impl Iterator<Item = SquareClass> {
    witness_order(height_bound)
        .into_iter()
        .filter(|c| !c.is_one())
}

/// First `c ≠ 1` with `|c| ≤ height_bound`, in witness order, such that
/// `ℚ(√c)` embeds in both algebras.
pub fn common_subfield_witness(
    d1: &QuaternionAlgebra,
    d2: &QuaternionAlgebra,
    height_bound: u64,
) -> Result<Option<SquareClass>, QuatError> {
    d1.require_division()?;
    d2.require_division()?;
    Ok(candidates(height_bound).find(|c| d1.contains_subfield(c) && d2.contains_subfield(c)))
}

/// First `c` with `|c| ≤ height_bound`, in witness order, such that `ℚ(√c)`
/// embeds in exactly one of the algebras. `None` means the bound was too
/// small, never that the algebras share all quadratic subfields.
pub fn distinguishing_witness(
    d1: &QuaternionAlgebra,
    d2: &QuaternionAlgebra,
    height_bound: u64,
) -> Result<Option<SquareClass>, QuatError> {
    d1.require_division()?;
    d2.require_division()?;
    if is_isomorphic(d1, d2) {
        return Err(QuatError::Isomorphic(d1.clone(), d2.clone()));
    }
    Ok(candidates(height_bound).find(|c| d1.contains_subfield(c) != d2.contains_subfield(c)))
}

pub const CONNECTING_BOUNDS: [u64; 3] = [50, 300, 1000];

/// The algebra whose Brauer class is `[D] + [D′]`, found by enumerating
/// coefficient pairs. Its norm form is the Pfister form similar to the
/// anisotropic part of `q_D ⊥ −q_{D′}`.
pub fn connecting_algebra(
    d1: &QuaternionAlgebra,
    d2: &QuaternionAlgebra,
) -> Result<QuaternionAlgebra, QuatError> {
    connecting_algebra_with(d1, d2, &CONNECTING_BOUNDS)
}

/// As [`connecting_algebra`], escalating through `bounds` on the absolute
/// value of the coefficients.
pub fn connecting_algebra_with(
    d1: &QuaternionAlgebra,
    d2: &QuaternionAlgebra,
    bounds: &[u64],
) -> Result<QuaternionAlgebra, QuatError> {
    d1.require_division()?;
    d2.require_division()?;
    if is_isomorphic(d1, d2) {
        return Err(QuatError::Isomorphic(d1.clone(), d2.clone()));
    }
    let target = d1.ramification().symmetric_difference(&d2.ramification());
    let mut last = 0;
    for &bound in bounds {
        last = bound;
        let pool = witness_order(bound);
        for m in 0..pool.len() {
            for i in 0..=m {
                let cand = QuaternionAlgebra::new(pool[i].clone(), pool[m].clone());
                if cand.ramification() == target {
                    return Ok(cand);
                }
            }
        }
    }
    Err(QuatError::ConnectingExhausted { bound: last })
}

/// First `s` in witness order with `|s| ≤ bound` such that `s·q` has the
/// given invariants.
pub fn similarity_factor(
    q: &DiagonalForm,
    target: &FormInvariants,
    bound: u64,
) -> Option<SquareClass> {
    witness_order(bound)
        .into_iter()
        .find(|s| crate::forms::invariants(&q.scaled(s)).same_class(target))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum PairVerdict {
    Isomorphic,
    /// `ℚ(√witness)` embeds in exactly one of the two algebras.
    Distinguished {
        witness: SquareClass,
        embeds_in_first: bool,
    },
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairReport {
    pub first: usize,
    pub second: usize,
    #[serde(flatten)]
    pub verdict: PairVerdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GenusReport {
    pub algebras: Vec<QuaternionAlgebra>,
    pub ramification: Vec<RamificationSet>,
    /// Isomorphism classes as lists of indices into `algebras`.
    pub classes: Vec<Vec<usize>>,
    pub pairs: Vec<PairReport>,
}

impl GenusReport {
    pub fn is_resolved(&self) -> bool {
        self.pairs
            .iter()
            .all(|p| p.verdict != PairVerdict::Inconclusive)
    }
}

/// Resolves every unordered pair of the family either as isomorphic or by a
/// quadratic subfield contained in only one of them.
pub fn genus_report(
    family: &[QuaternionAlgebra],
    height_bound: u64,
) -> Result<GenusReport, QuatError> {
    for d in family {
        d.require_division()?;
    }
    let mut pairs = Vec::new();
    let mut class_of: Vec<usize> = (0..family.len()).collect();
    for j in 0..family.len() {
        for i in 0..j {
            let (d1, d2) = (&family[i], &family[j]);
            let verdict = if is_isomorphic(d1, d2) {
                class_of[j] = class_of[j].min(class_of[i]);
                PairVerdict::Isomorphic
            } else {
                match distinguishing_witness(d1, d2, height_bound)? {
                    Some(witness) => PairVerdict::Distinguished {
                        embeds_in_first: d1.contains_subfield(&witness),
                        witness,
                    },
                    None => PairVerdict::Inconclusive,
                }
            };
            pairs.push(PairReport {
                first: i,
                second: j,
                verdict,
            });
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (i, &c) in class_of.iter().enumerate() {
        if c == i {
            classes.push(vec![i]);
        } else {
            let slot = classes
                .iter_mut()
                .find(|cl| cl[0] == c)
                .expect("representative first");
            slot.push(i);
        }
    }
    Ok(GenusReport {
        algebras: family.to_vec(),
        ramification: family.iter().map(QuaternionAlgebra::ramification).collect(),
        classes,
        pairs,
    })
}
